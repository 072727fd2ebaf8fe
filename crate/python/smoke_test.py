"""Smoke test for the `fbm` Python extension.

Build and run from the repository root:

    cargo build -p fbm-py --release --features extension-module
    cp target/release/libfbm.so python/fbm.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import fbm  # noqa: E402


def check(condition, label):
    print(("ok   " if condition else "FAIL ") + label)
    if not condition:
        sys.exit(1)


def main():
    check(fbm.bessel_j(0, 0.0) == 1.0, "J_0(0) = 1")
    check(abs(fbm.bessel_j(0, 1.0) - 0.7651976865579666) < 1e-15, "J_0(1)")
    check(fbm.bessel_j(-3, 2.0) == -fbm.bessel_j(3, 2.0), "reflection")
    check(abs(fbm.bessel_j_prime(0, 1.0) + 0.4400505857449335) < 1e-15, "J_0'(1)")
    v = fbm.basis_value(1.0, 2.0, 1, 1.0, 0.0)
    check(isinstance(v, complex) and abs(v - 0.4400505857449335) < 1e-15, "basis value")

    kite = fbm.Curve.kite()
    radii = kite.radii()
    check(abs(radii.r_in_max - 0.9228) < 1e-3, "kite inscribed radius")
    circle = fbm.Curve("circle:2")
    r = circle.compute_radii()
    check(abs(r.r_in_max - 2) < 1e-9 and abs(r.r_ex_min - 2) < 1e-9, "circle radii")
    check(kite.is_interior(0.0, 0.0) and not kite.is_interior(3.0, 0.0), "interior test")

    reported = fbm.Radii(0.923, 1.985)
    plan = fbm.select_parameters(5.0, 0.01, reported, 2.2)
    check(plan["N"] == 20 and plan["branch"] == "large_k", "parameter selection")
    try:
        fbm.select_parameters(1.0, 0.01, reported, 2.0)
        check(False, "tau0 validation")
    except ValueError as e:
        check(str(e).startswith("tau0_too_small"), "tau0 validation")

    problem = fbm.WaveProblem(1.0, kite, 2.2, 19, radii=reported)
    coeffs = problem.solve_plane_wave(1e-30, 400)
    check(len(coeffs) == 39, "coefficient count")
    x, y = 0.3, -0.2
    exact = complex(math.cos(x * 0.5 + y * math.sqrt(3) / 2), math.sin(x * 0.5 + y * math.sqrt(3) / 2))
    check(abs(problem.field(coeffs, x, y) - exact) < 1e-10, "plane wave reconstruction")

    config = {
        "curve": "kite",
        "radii": {"r_in_max": 0.923, "r_ex_min": 1.985},
        "k": 1,
        "delta": 1e-16,
        "tau0": 2.2,
        "seeds": [1],
    }
    report = fbm.solve(json.dumps(config))
    check(report["report"]["rel_l2_interior"] <= 1e-8, "noise-free solve")
    exp = fbm.Experiment(json.dumps(config))
    study = exp.svd_study([4, 6, 8, 10])
    check(len(study["rows"]) == 4 and study["slope"] < 0, "svd study")
    print("all checks passed")


if __name__ == "__main__":
    main()
