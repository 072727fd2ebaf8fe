//! Bessel functions of the first kind and the scaled Fourier-Bessel basis.
//!
//! The basis function of order `n` is
//!
//! ```text
//! phi_n(x) = 2^|n| |n|! / (k M)^|n| * J_n(k r) * exp(i n theta)
//! ```
//!
//! Neither the prefactor nor `J_n(k r)` is representable on its own for large
//! `|n|`, so everything here is written in terms of the normalized Bessel
//! function
//!
//! ```text
//! S_n(t) = J_n(t) * n! * (2 / t)^n,     S_n(0) = 1,
//! ```
//!
//! which stays O(1) for small `t`. With it `phi_n = ±(r/M)^|n| S_|n|(k r) e^{i n theta}`.

use num_complex::Complex64;

use crate::error::{FbmError, Result};
use crate::Vec2;

/// Largest supported |order|.
pub const N_MAX: usize = 128;

/// Arguments below this use the power series unconditionally.
const SERIES_ARG_LIMIT: f64 = 5.0;

/// Rescaling threshold for the backward recurrence.
const RECURRENCE_BIG: f64 = 1.0e250;

/// Signed integer Bessel order with `|n| <= N_MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BesselOrder(i32);

impl BesselOrder {
    pub fn new(n: i32) -> Result<Self> {
        if n.unsigned_abs() as usize > N_MAX {
            return Err(FbmError::OrderCap {
                order: n as i64,
                cap: N_MAX as i64,
            });
        }
        Ok(Self(n))
    }

    pub fn get(self) -> i32 {
        self.0
    }

    fn abs(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    /// `(-1)^n` for negative orders, `1` otherwise.
    fn reflection_sign(self) -> f64 {
        if self.0 < 0 && self.0 % 2 != 0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl TryFrom<i32> for BesselOrder {
    type Error = FbmError;

    fn try_from(n: i32) -> Result<Self> {
        Self::new(n)
    }
}

fn check_arg(function: &'static str, t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(FbmError::Domain { function, value: t });
    }
    Ok(())
}

/// `J_n(t)` for `t >= 0`.
pub fn bessel_j(n: BesselOrder, t: f64) -> Result<f64> {
    check_arg("bessel_j", t)?;
    Ok(n.reflection_sign() * bessel_j_nonneg(n.abs(), t))
}

/// `J'_n(t)` for `t >= 0`, with the analytic limit at `t = 0`.
pub fn bessel_j_prime(n: BesselOrder, t: f64) -> Result<f64> {
    check_arg("bessel_j_prime", t)?;
    let a = n.abs();
    let d = if a == 0 {
        -bessel_j_nonneg(1, t)
    } else {
        0.5 * (bessel_j_nonneg(a - 1, t) - bessel_j_nonneg(a + 1, t))
    };
    Ok(n.reflection_sign() * d)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

fn bessel_j_nonneg(n: usize, t: f64) -> f64 {
    if t == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if series_is_accurate(n, t) {
        let log_lead = n as f64 * (0.5 * t).ln() - ln_factorial(n);
        log_lead.exp() * series_normalized(n, t)
    } else {
        recurrence_sequence(n, t)[n]
    }
}

/// The series for `S_n` is free of cancellation once `t^2/4 <= n + 1`; below
/// `SERIES_ARG_LIMIT` the cancellation costs at most one digit.
fn series_is_accurate(n: usize, t: f64) -> bool {
    t < SERIES_ARG_LIMIT || 0.25 * t * t <= (n + 1) as f64
}

/// `S_n(t) = sum_p (-t^2/4)^p / (p! (n+1)...(n+p))`.
fn series_normalized(n: usize, t: f64) -> f64 {
    let x = 0.25 * t * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut p = 1usize;
    loop {
        term *= -x / (p as f64 * (n + p) as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * 0.5 * sum.abs() && p as f64 > x {
            break;
        }
        p += 1;
        if p > 500 {
            break;
        }
    }
    sum
}

/// Miller backward recurrence returning `J_0(t) ..= J_nmax(t)` for `t > 0`,
/// normalized with `J_0 + 2 sum_k J_2k = 1`.
fn recurrence_sequence(nmax: usize, t: f64) -> Vec<f64> {
    let top = nmax.max(t.ceil() as usize);
    let mut start = top + 30 + (60.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let mut out = vec![0.0; nmax + 1];
    let mut j_next = 0.0;
    let mut j_cur = 1.0;
    let mut even_sum = 0.0;
    let two_over_t = 2.0 / t;
    for k in (1..=start).rev() {
        if k <= nmax {
            out[k] = j_cur;
        }
        if k % 2 == 0 {
            even_sum += 2.0 * j_cur;
        }
        let j_prev = k as f64 * two_over_t * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > RECURRENCE_BIG {
            let s = 1.0 / RECURRENCE_BIG;
            j_cur *= s;
            j_next *= s;
            even_sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = j_cur;
    let norm = j_cur + even_sum;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `S_n(t)` for `n = 0 ..= nmax`.
pub fn normalized_bessel_sequence(nmax: usize, t: f64) -> Vec<f64> {
    if t == 0.0 {
        return vec![1.0; nmax + 1];
    }
    let mut out = vec![0.0; nmax + 1];
    let mut recurrence: Option<Vec<f64>> = None;
    let ln_half_t = (0.5 * t).ln();
    let mut ln_fact = 0.0;
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        *slot = if series_is_accurate(n, t) {
            series_normalized(n, t)
        } else {
            let seq = recurrence.get_or_insert_with(|| recurrence_sequence(nmax, t));
            seq[n] * (ln_fact - n as f64 * ln_half_t).exp()
        };
    }
    out
}

/// Wavenumber and scaling radius of the Fourier-Bessel basis.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BasisContext {
    k: f64,
    m: f64,
}

impl BasisContext {
    pub fn new(k: f64, m: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(FbmError::InvalidParameter(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(FbmError::InvalidParameter(format!(
                "scaling radius must be positive, got {m}"
            )));
        }
        Ok(Self { k, m })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn m(&self) -> f64 {
        self.m
    }
}

/// Values and Cartesian gradients of `phi_n` for `n = -order ..= order` at one point.
#[derive(Debug, Clone)]
pub struct BasisSample {
    order: usize,
    pub values: Vec<Complex64>,
    pub gradients: Vec<[Complex64; 2]>,
}

impl BasisSample {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry for signed order `n`.
    pub fn value(&self, n: i32) -> Complex64 {
        self.values[(n + self.order as i32) as usize]
    }

    pub fn gradient(&self, n: i32) -> [Complex64; 2] {
        self.gradients[(n + self.order as i32) as usize]
    }
}

/// Evaluates every basis function up to `|n| <= order` at `point` from one
/// Bessel sequence.
pub fn basis_sample(ctx: &BasisContext, order: usize, point: Vec2) -> Result<BasisSample> {
    if order > N_MAX {
        return Err(FbmError::OrderCap {
            order: order as i64,
            cap: N_MAX as i64,
        });
    }
    let (k, m) = (ctx.k, ctx.m);
    let r = point.x.hypot(point.y);
    let theta = point.y.atan2(point.x);
    let (sin_t, cos_t) = theta.sin_cos();
    let q = r / m;
    let s = normalized_bessel_sequence(order + 1, k * r);

    let len = 2 * order + 1;
    let mut values = vec![Complex64::new(0.0, 0.0); len];
    let mut gradients = vec![[Complex64::new(0.0, 0.0); 2]; len];

    for a in 0..=order {
        let q_a = q.powi(a as i32);
        let magnitude = q_a * s[a];
        // d/dr of (r/M)^a S_a(k r), written without 1/r factors.
        let (radial, angular_over_r) = if a == 0 {
            (-0.5 * k * k * r * s[1], 0.0)
        } else {
            let q_am1 = q.powi(a as i32 - 1);
            let lower = a as f64 / m * q_am1 * s[a - 1];
            let upper = q_a * k * k * r / (4.0 * (a + 1) as f64) * s[a + 1];
            (lower - upper, a as f64 / m * q_am1 * s[a])
        };

        for sign_n in [1i32, -1] {
            if a == 0 && sign_n < 0 {
                continue;
            }
            let n = sign_n * a as i32;
            let parity = if sign_n < 0 && a % 2 == 1 { -1.0 } else { 1.0 };
            let phase = Complex64::from_polar(parity, n as f64 * theta);
            let idx = (n + order as i32) as usize;
            values[idx] = phase * magnitude;
            // grad = phase * [radial * e_r + i n/r * S * e_theta]
            let ang = Complex64::new(0.0, sign_n as f64 * angular_over_r);
            let gx = phase * (radial * cos_t - ang * sin_t);
            let gy = phase * (radial * sin_t + ang * cos_t);
            gradients[idx] = [gx, gy];
        }
    }

    Ok(BasisSample {
        order,
        values,
        gradients,
    })
}

/// `phi_n(point)`.
pub fn basis_value(ctx: &BasisContext, n: BesselOrder, point: Vec2) -> Result<Complex64> {
    let sample = basis_sample(ctx, n.abs(), point)?;
    Ok(sample.value(n.get()))
}

/// Cartesian gradient of `phi_n` at `point`.
pub fn basis_gradient(ctx: &BasisContext, n: BesselOrder, point: Vec2) -> Result<[Complex64; 2]> {
    let sample = basis_sample(ctx, n.abs(), point)?;
    Ok(sample.gradient(n.get()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(n: i32) -> BesselOrder {
        BesselOrder::new(n).unwrap()
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(ord(0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(ord(3), 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j_prime(ord(0), 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j_prime(ord(1), 0.0).unwrap(), 0.5);
        assert_eq!(bessel_j_prime(ord(2), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn reference_values() {
        assert!((bessel_j(ord(0), 1.0).unwrap() - 0.7651976865579666).abs() < 1e-15);
        assert!((bessel_j_prime(ord(0), 1.0).unwrap() + 0.4400505857449335).abs() < 1e-15);
    }

    #[test]
    fn reflection_is_exact() {
        for n in 0..=40 {
            for &t in &[0.3, 2.0, 7.5, 19.0, 40.0] {
                let pos = bessel_j(ord(n), t).unwrap();
                let neg = bessel_j(ord(-n), t).unwrap();
                let expected = if n % 2 == 0 { pos } else { -pos };
                assert_eq!(neg, expected);
            }
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            bessel_j(ord(1), -0.5),
            Err(FbmError::Domain { .. })
        ));
        assert!(matches!(
            BesselOrder::new(N_MAX as i32 + 1),
            Err(FbmError::OrderCap { .. })
        ));
        assert!(BesselOrder::new(-(N_MAX as i32)).is_ok());
        assert!(BasisContext::new(0.0, 1.0).is_err());
        assert!(BasisContext::new(1.0, -1.0).is_err());
    }

    #[test]
    fn recurrence_identity() {
        for n in 1..=40 {
            for i in 0..80 {
                let t = 0.1 + i as f64 * 0.5;
                let jm = bessel_j(ord(n - 1), t).unwrap();
                let j = bessel_j(ord(n), t).unwrap();
                let jp = bessel_j(ord(n + 1), t).unwrap();
                let resid = jm + jp - 2.0 * n as f64 / t * j;
                assert!(
                    resid.abs() <= 1e-10 * j.abs().max(1.0),
                    "n={n} t={t} {resid}"
                );
            }
        }
    }

    #[test]
    fn derivative_relations() {
        // J'_n = n J_n / t - J_{n+1}  and  J'_{n+1} = J_n - (n+1) J_{n+1} / t
        for n in 0..=39 {
            for i in 0..80 {
                let t = 0.1 + i as f64 * 0.5;
                let j = bessel_j(ord(n), t).unwrap();
                let jp1 = bessel_j(ord(n + 1), t).unwrap();
                let d = bessel_j_prime(ord(n), t).unwrap();
                let d1 = bessel_j_prime(ord(n + 1), t).unwrap();
                assert!((d - (n as f64 * j / t - jp1)).abs() < 1e-10);
                assert!((d1 - (j - (n + 1) as f64 * jp1 / t)).abs() < 1e-10);
                // cross relation J_n J'_{n+1} - J'_n J_{n+1} = J_n^2 + J_{n+1}^2 - (2n+1) J_n J_{n+1} / t
                let lhs = j * d1 - d * jp1;
                let rhs = j * j + jp1 * jp1 - (2 * n + 1) as f64 * j * jp1 / t;
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn normalized_sequence_matches_direct() {
        for &t in &[0.0, 1e-3, 0.7, 4.9, 5.1, 12.0, 33.0] {
            let s = normalized_bessel_sequence(60, t);
            for (n, &sn) in s.iter().enumerate() {
                if t == 0.0 {
                    assert_eq!(sn, 1.0);
                    continue;
                }
                let j = bessel_j(ord(n as i32), t).unwrap();
                let direct = j * (ln_factorial(n) + n as f64 * (2.0 / t).ln()).exp();
                if direct.is_finite() && j.abs() > 1e-280 {
                    assert!(
                        (sn - direct).abs() <= 1e-11 * direct.abs().max(1.0),
                        "n={n} t={t}: {sn} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn large_order_small_argument_stays_finite() {
        let ctx = BasisContext::new(1.0, 2.0).unwrap();
        let p = Vec2::new(1e-3, 2e-3);
        let v = basis_value(&ctx, ord(128), p).unwrap();
        assert!(v.norm().is_finite());
        let far = Vec2::new(1.9, 0.1);
        let w = basis_value(&ctx, ord(-127), far).unwrap();
        assert!(w.norm().is_finite() && w.norm() > 0.0);
    }

    #[test]
    fn basis_examples() {
        let ctx = BasisContext::new(1.0, 2.0).unwrap();
        let origin = Vec2::zeros();
        assert_eq!(
            basis_value(&ctx, ord(0), origin).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(basis_value(&ctx, ord(2), origin).unwrap().norm(), 0.0);
        let v = basis_value(&ctx, ord(1), Vec2::new(1.0, 0.0)).unwrap();
        assert!((v.re - 0.4400505857449335).abs() < 1e-15 && v.im.abs() < 1e-15);

        let g0 = basis_gradient(&ctx, ord(0), origin).unwrap();
        assert_eq!(g0[0].norm() + g0[1].norm(), 0.0);
        let g = basis_gradient(&ctx, ord(0), Vec2::new(1.0, 0.0)).unwrap();
        assert!((g[0].re + 0.4400505857449335).abs() < 1e-15);
        assert!(g[0].im.abs() < 1e-15 && g[1].norm() < 1e-15);
    }

    #[test]
    fn gradient_limit_at_origin() {
        let ctx = BasisContext::new(1.3, 2.5).unwrap();
        let origin = Vec2::zeros();
        // phi_{±1} ~ ±(x ± i y) / M near the origin
        let g1 = basis_gradient(&ctx, ord(1), origin).unwrap();
        let gm1 = basis_gradient(&ctx, ord(-1), origin).unwrap();
        let inv_m = 1.0 / 2.5;
        assert!((g1[0] - Complex64::new(inv_m, 0.0)).norm() < 1e-15);
        assert!((g1[1] - Complex64::new(0.0, inv_m)).norm() < 1e-15);
        assert!((gm1[0] - Complex64::new(-inv_m, 0.0)).norm() < 1e-15);
        assert!((gm1[1] - Complex64::new(0.0, inv_m)).norm() < 1e-15);
        for n in [2, -2, 5, -7] {
            let g = basis_gradient(&ctx, ord(n), origin).unwrap();
            assert_eq!(g[0].norm() + g[1].norm(), 0.0);
        }
    }
}
