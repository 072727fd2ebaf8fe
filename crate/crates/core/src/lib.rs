//! Fourier-Bessel solver for the two-dimensional Helmholtz equation
//! `Δu + k²u = 0` with impedance data `∂u/∂ν + i k u = f` on a smooth closed
//! curve.
//!
//! The pipeline is:
//!
//! 1. [`geometry`]: boundary curve, extremal radii about the origin and a
//!    periodic trapezoidal rule on the curve;
//! 2. [`regularized_solver::select_parameters`]: truncation order `N` and
//!    Tikhonov parameter `α` from the wavenumber, noise level and radii;
//! 3. [`trace_operator`]: the quadrature-weighted matrix mapping expansion
//!    coefficients to impedance data, plus exact and noisy data;
//! 4. [`regularized_solver`]: SVD and the filtered solve of
//!    `(αI + A*A) c = A* f^δ`;
//! 5. [`field_eval`]: reconstruction and relative error norms;
//! 6. [`experiment`]: configuration files, sweeps and output tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod field_eval;
pub mod geometry;
pub mod numeric;
pub mod regularized_solver;
pub mod special_fn;
pub mod trace_operator;

pub use error::{FbmError, Result};
pub use field_eval::{ErrorReport, ExactSolution, InteriorGrid, PlaneWave};
pub use geometry::{BoundaryCurve, DomainRadii, QuadratureRule};
pub use regularized_solver::{CoefficientVector, RegularizationPlan, SingularSystem, SvdStudy};
pub use special_fn::{BasisContext, BesselOrder};
pub use trace_operator::{BoundaryData, DiscreteTraceOperator, WaveProblem};

/// Points and real vectors in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;

pub use num_complex::Complex64;
