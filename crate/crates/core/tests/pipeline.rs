mod common;

use common::{kite_config, kite_problem};
use fbm_core::experiment::{
    parse_orders, sweep_csv, write_solve_outputs, write_svd_outputs, write_trace_outputs, AutoOr,
    ExperimentConfig, TRACE_SAMPLES,
};
use fbm_core::field_eval::{error_report, evaluate_field, evaluate_gradient};
use fbm_core::special_fn::basis_value;
use fbm_core::trace_operator::assemble_operator;
use fbm_core::{BesselOrder, CoefficientVector, Complex64, InteriorGrid, PlaneWave, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_coefficients(n: usize, seed: u64) -> CoefficientVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CoefficientVector::from_vec(
        (0..2 * n + 1)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

#[test]
fn field_matches_direct_sum_in_any_order() {
    let problem = kite_problem(3.0, 9);
    let c = random_coefficients(9, 4);
    for p in [
        Vec2::new(0.1, -0.3),
        Vec2::new(-0.8, 0.5),
        Vec2::new(1.2, 0.0),
    ] {
        let mut terms: Vec<Complex64> = c
            .iter()
            .map(|(n, z)| {
                z * basis_value(problem.basis(), BesselOrder::new(n).unwrap(), p).unwrap()
            })
            .collect();
        terms.reverse();
        let direct: Complex64 = terms.iter().sum();
        let got = evaluate_field(&problem, &c, p).unwrap();
        assert!((got - direct).norm() < 1e-13 * (1.0 + direct.norm()));
    }
}

#[test]
fn field_satisfies_helmholtz_and_gradient_is_consistent() {
    let problem = kite_problem(4.0, 12);
    let c = random_coefficients(12, 8);
    let k = 4.0;
    let h = 1e-3;
    let u = |p: Vec2| evaluate_field(&problem, &c, p).unwrap();
    for p in [
        Vec2::new(0.2, 0.1),
        Vec2::new(-0.5, -0.4),
        Vec2::new(0.9, 0.6),
    ] {
        let ex = Vec2::new(h, 0.0);
        let ey = Vec2::new(0.0, h);
        let lap = (u(p + ex) + u(p - ex) + u(p + ey) + u(p - ey) - u(p) * 4.0) / (h * h);
        let scale: f64 = c.norm() * k * k;
        assert!((lap + u(p) * (k * k)).norm() < 1e-4 * scale);
        let g = evaluate_gradient(&problem, &c, p).unwrap();
        let fd = (u(p + ex) - u(p - ex)) / (2.0 * h);
        assert!((g[0] - fd).norm() < 1e-5 * scale);
    }
}

#[test]
fn operator_rows_are_impedance_traces_of_the_field() {
    let problem = kite_problem(2.0, 7);
    let rule = problem.curve().build_quadrature(256).unwrap();
    let op = assemble_operator(&problem, &rule).unwrap();
    let c = random_coefficients(7, 2);
    let applied = op.apply(&c).unwrap();
    for j in (0..rule.len()).step_by(37) {
        let x = rule.points[j];
        let nu = rule.normals[j];
        let g = evaluate_gradient(&problem, &c, x).unwrap();
        let trace = g[0] * nu.x
            + g[1] * nu.y
            + Complex64::new(0.0, 2.0) * evaluate_field(&problem, &c, x).unwrap();
        assert!(
            (applied[j] - trace * rule.row_scale()[j]).norm() < 1e-12 * (1.0 + applied[j].norm())
        );
    }
}

#[test]
fn interior_error_stable_under_grid_refinement() {
    let problem = kite_problem(1.0, 8);
    let wave = PlaneWave::new(1.0, Vec2::new(0.6, 0.8)).unwrap();
    let rule = problem.curve().build_quadrature(256).unwrap();
    // perturb the plane wave's expansion by a known amount
    let c = random_coefficients(8, 1);
    let report = |res: usize| {
        error_report(
            &problem,
            &c,
            &wave,
            &InteriorGrid::new(problem.curve(), res).unwrap(),
            &rule,
        )
        .unwrap()
    };
    let (r1, r2, r3) = (report(100), report(200), report(400));
    // the excluded band near the boundary shrinks with the cell size, so
    // the grid norms converge at first order
    for f in [
        |r: &fbm_core::ErrorReport| r.rel_l2_interior,
        |r: &fbm_core::ErrorReport| r.rel_h1semi_interior,
    ] {
        let d1 = (f(&r1) - f(&r2)).abs();
        let d2 = (f(&r2) - f(&r3)).abs();
        assert!(d2 < 0.75 * d1, "{d1} then {d2}");
        assert!(d2 < 0.1 * f(&r3));
    }
    assert_eq!(r1.rel_l2_boundary, r3.rel_l2_boundary);
}

#[test]
fn circle_solve_is_accurate() {
    let cfg = ExperimentConfig::single("circle:1", 1.0, 0.0);
    let exp = cfg.prepare().unwrap();
    let case = exp.run_solve().unwrap();
    assert!(case.report.rel_l2_interior <= 1e-8);
    assert!(case.report.rel_l2_boundary <= 1e-8);
    assert!(case.report.rel_l2_normal_derivative <= 1e-8);
}

#[test]
fn noisy_solve_error_tracks_noise() {
    let exp = kite_config("1", "0.01", "[1]").prepare().unwrap();
    let case = exp.run_solve().unwrap();
    assert_eq!(case.plan.truncation, 8);
    assert!(case.report.rel_l2_interior > 1e-4 && case.report.rel_l2_interior < 1e-1);
}

#[test]
fn sweep_counts_and_medians() {
    let cfg = kite_config(
        "[0.5, 1, 5]",
        "[1e-16, 0.01, 0.05]",
        "[1,2,3,4,5,6,7,8,9,10]",
    );
    let table = cfg.prepare().unwrap().run_sweep();
    assert_eq!(table.rows.len(), 90);
    assert_eq!(table.summaries.len(), 9);
    assert!(table.rows.iter().all(|r| r.status == "ok"));
    let csv = sweep_csv(&table);
    assert_eq!(csv.lines().filter(|l| l.starts_with("case,")).count(), 90);
    assert_eq!(csv.lines().filter(|l| l.starts_with("median,")).count(), 9);
    let cell = table
        .summaries
        .iter()
        .find(|s| s.k == 1.0 && s.delta == 0.01)
        .unwrap();
    let med = cell.rel_l2_interior.unwrap();
    assert!((1e-4..=1e-1).contains(&med), "{med}");
}

#[test]
fn sweep_marks_failed_cases_and_continues() {
    let mut cfg = kite_config("[1, 5]", "0.01", "[1]");
    // too few nodes for N = 20 at k = 5 but enough for N = 8 at k = 1
    cfg.quadrature_nodes = AutoOr::Value(32);
    let table = cfg.prepare().unwrap().run_sweep();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.rows[0].status, "ok");
    assert!(
        table.rows[1].status.starts_with("failed:"),
        "{}",
        table.rows[1].status
    );
    assert!(table.summaries[1].rel_l2_interior.is_none());
}

#[test]
fn svd_study_outputs() {
    let exp = kite_config("1", "0", "[1]").prepare().unwrap();
    let orders = parse_orders("4..24:2").unwrap();
    let study = exp.run_svd_study(&orders).unwrap();
    assert_eq!(study.rows.len(), 11);
    assert!(study.slope.is_some());
    let dir = tempfile::tempdir().unwrap();
    let files = write_svd_outputs(&study, &exp, dir.path()).unwrap();
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert!(text.contains("# slope="));
    assert!(!text.contains("# slope=n/a"));

    let single = exp.run_svd_study(&[10]).unwrap();
    assert!(single.slope.is_none());
    write_svd_outputs(&single, &exp, dir.path()).unwrap();
    assert!(std::fs::read_to_string(&files[0])
        .unwrap()
        .contains("# slope=n/a"));

    let exp5 = kite_config("5", "0", "[1]").prepare().unwrap();
    let study5 = exp5.run_svd_study(&orders).unwrap();
    assert!(study5.rows.iter().all(|r| r.mu_min > 0.0));
}

#[test]
fn trace_plot_files() {
    let exp = kite_config("7", "0.01", "[1]").prepare().unwrap();
    let plot = exp.run_trace_plot(7.0, 0.01, 1).unwrap();
    assert_eq!(plot.t.len(), TRACE_SAMPLES);
    assert_eq!(plot.t[0], 0.0);
    let last = 2.0 * std::f64::consts::PI * (1.0 - 1.0 / 512.0);
    assert!((plot.t[511] - last).abs() < 1e-15);
    let case = exp.run_case(7.0, 0.01, 1).unwrap();
    // pointwise gap of the real part within a small multiple of the
    // relative boundary error
    assert!(plot.max_gap() < 20.0 * case.report.rel_l2_boundary);
    let dir = tempfile::tempdir().unwrap();
    let files = write_trace_outputs(&plot, dir.path()).unwrap();
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 512);
        for key in [
            "k=",
            "delta=",
            "eta=",
            "tau0=",
            "N=",
            "alpha=",
            "quadrature_nodes=",
            "grid_resolution=",
            "seed=",
            "m_overridden=",
        ] {
            assert!(text.contains(&format!("# {key}")), "{key} missing");
        }
    }

    let clean = exp.run_trace_plot(7.0, 1e-16, 1).unwrap();
    assert!(clean.max_gap() < 1e-6);
}

#[test]
fn solve_outputs_are_deterministic() {
    let exp = kite_config("5", "0.05", "[3]").prepare().unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_solve_outputs(&exp.run_solve().unwrap(), &exp, a.path()).unwrap();
    write_solve_outputs(&exp.run_solve().unwrap(), &exp, b.path()).unwrap();
    for name in ["report.json", "coefficients.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["metadata"]["N"], 18);
    assert_eq!(report["metadata"]["seed"], 3);
}
