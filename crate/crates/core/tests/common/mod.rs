//! Shared helpers for the integration tests.
#![allow(dead_code)]

use fbm_core::experiment::ExperimentConfig;
use fbm_core::{BoundaryCurve, DomainRadii, WaveProblem};
use twofloat::TwoFloat;

/// `J_n(t)` from the ascending power series summed in double-double
/// arithmetic, independent of the library's evaluation strategy.
pub fn bessel_series_oracle(n: u32, t: f64) -> f64 {
    let half = TwoFloat::from(0.5 * t);
    let mut term = TwoFloat::from(1.0);
    for j in 1..=n {
        term = div(term * half, j as f64);
    }
    let q = -(half * half);
    let mut sum = term;
    let mut m = 0u32;
    loop {
        m += 1;
        term = div(div(term * q, m as f64), (m + n) as f64);
        sum += term;
        if (m as f64) > t && term.hi().abs() < 1e-34 * sum.hi().abs().max(1e-300) {
            break;
        }
        if term.hi() == 0.0 || m > 2000 {
            break;
        }
    }
    sum.hi()
}

/// Kite radii (0.923, 1.985) used by the reference
/// experiments.
pub fn reported_kite_radii() -> DomainRadii {
    DomainRadii::new(0.923, 1.985).unwrap()
}

pub fn kite_problem(k: f64, truncation: usize) -> WaveProblem {
    WaveProblem::with_radii(
        k,
        BoundaryCurve::kite(),
        reported_kite_radii(),
        2.2,
        truncation,
    )
    .unwrap()
}

/// Kite configuration with the reported radii and `tau0 = 2.2`.
pub fn kite_config(k: &str, delta: &str, seeds: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"curve": "kite", "radii": {{"r_in_max": 0.923, "r_ex_min": 1.985}},
            "k": {k}, "delta": {delta}, "tau0": 2.2, "seeds": {seeds}}}"#
    ))
    .unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `a / b` to double-double accuracy by one correction step; the crate's
/// own quotient keeps only the leading word.
fn div(a: TwoFloat, b: f64) -> TwoFloat {
    let q1 = a.hi() / b;
    let r = a - TwoFloat::from(b) * TwoFloat::from(q1);
    let q2 = r.hi() / b;
    let r2 = r - TwoFloat::from(b) * TwoFloat::from(q2);
    TwoFloat::from(q1) + TwoFloat::from(q2) + TwoFloat::from(r2.hi() / b)
}
