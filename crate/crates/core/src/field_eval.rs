//! Reconstruction of `u_N` and relative error norms against a known solution.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::geometry::{BoundaryCurve, QuadratureRule};
use crate::numeric::pairwise_sum;
use crate::regularized_solver::CoefficientVector;
use crate::special_fn::basis_sample;
use crate::trace_operator::{check_direction, WaveProblem};
use crate::Vec2;

/// Default points per axis of the interior grid.
pub const DEFAULT_GRID_RESOLUTION: usize = 200;

const MIN_REFERENCE_NORM: f64 = 1e-14;

fn check_length(problem: &WaveProblem, c: &CoefficientVector) -> Result<()> {
    if c.truncation() != problem.truncation() {
        return Err(FbmError::Size(format!(
            "coefficients of order {} for a problem of order {}",
            c.truncation(),
            problem.truncation()
        )));
    }
    Ok(())
}

/// `u_N(x) = Σ c_n phi_n(x)`.
pub fn evaluate_field(
    problem: &WaveProblem,
    c: &CoefficientVector,
    point: Vec2,
) -> Result<Complex64> {
    check_length(problem, c)?;
    let sample = basis_sample(problem.basis(), c.truncation(), point)?;
    Ok(c.as_slice()
        .iter()
        .zip(&sample.values)
        .map(|(a, phi)| a * phi)
        .sum())
}

/// `∇u_N(x)`.
pub fn evaluate_gradient(
    problem: &WaveProblem,
    c: &CoefficientVector,
    point: Vec2,
) -> Result<[Complex64; 2]> {
    check_length(problem, c)?;
    let sample = basis_sample(problem.basis(), c.truncation(), point)?;
    Ok(gradient_from_sample(c, &sample.gradients))
}

fn gradient_from_sample(c: &CoefficientVector, gradients: &[[Complex64; 2]]) -> [Complex64; 2] {
    let mut g = [Complex64::new(0.0, 0.0); 2];
    for (a, grad) in c.as_slice().iter().zip(gradients) {
        g[0] += a * grad[0];
        g[1] += a * grad[1];
    }
    g
}

/// Value and gradient of `u_N` from one basis evaluation.
fn field_and_gradient(
    problem: &WaveProblem,
    c: &CoefficientVector,
    point: Vec2,
) -> Result<(Complex64, [Complex64; 2])> {
    let sample = basis_sample(problem.basis(), c.truncation(), point)?;
    let value = c
        .as_slice()
        .iter()
        .zip(&sample.values)
        .map(|(a, phi)| a * phi)
        .sum();
    Ok((value, gradient_from_sample(c, &sample.gradients)))
}

/// A reference solution with known value and gradient everywhere.
pub trait ExactSolution: Sync {
    fn value(&self, point: Vec2) -> Complex64;
    fn gradient(&self, point: Vec2) -> [Complex64; 2];
}

/// `u(x) = exp(i k x·d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub k: f64,
    pub direction: Vec2,
}

impl PlaneWave {
    pub fn new(k: f64, direction: Vec2) -> Result<Self> {
        check_direction(direction)?;
        Ok(Self { k, direction })
    }
}

impl ExactSolution for PlaneWave {
    fn value(&self, point: Vec2) -> Complex64 {
        Complex64::cis(self.k * point.dot(&self.direction))
    }

    fn gradient(&self, point: Vec2) -> [Complex64; 2] {
        let ik_u = Complex64::new(0.0, self.k) * self.value(point);
        [ik_u * self.direction.x, ik_u * self.direction.y]
    }
}

/// Cell centres of a uniform grid over `[-R, R]²` that lie inside the
/// curve and at least one cell diagonal away from it.
#[derive(Debug, Clone)]
pub struct InteriorGrid {
    pub points: Vec<Vec2>,
    pub cell_area: f64,
    pub resolution: usize,
    /// Interior cell centres dropped for being too close to the boundary.
    pub excluded: usize,
}

impl InteriorGrid {
    /// `R` is the curve's circumscribed radius.
    pub fn new(curve: &BoundaryCurve, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(FbmError::Size(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        let half = curve.radii().r_ex_min;
        let h = 2.0 * half / resolution as f64;
        let diagonal = h * std::f64::consts::SQRT_2;
        let candidates: Vec<Vec2> = (0..resolution)
            .flat_map(|i| {
                (0..resolution).map(move |j| {
                    Vec2::new(-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h)
                })
            })
            .collect();
        let flags: Vec<(bool, bool)> = candidates
            .par_iter()
            .map(|&p| {
                let inside = curve.is_interior(p);
                let keep = inside && curve.distance_to_boundary(p) >= diagonal;
                (inside, keep)
            })
            .collect();
        let mut points = Vec::new();
        let mut excluded = 0;
        for (p, (inside, keep)) in candidates.into_iter().zip(flags) {
            if keep {
                points.push(p);
            } else if inside {
                excluded += 1;
            }
        }
        if points.is_empty() {
            return Err(FbmError::Degenerate(format!(
                "no interior grid points at resolution {resolution}"
            )));
        }
        if excluded > 0 {
            log::debug!(
                "interior grid: {} points, {} near-boundary points excluded",
                points.len(),
                excluded
            );
        }
        Ok(Self {
            points,
            cell_area: h * h,
            resolution,
            excluded,
        })
    }

    /// Fraction of interior cell centres dropped near the boundary.
    pub fn excluded_fraction(&self) -> f64 {
        self.excluded as f64 / (self.excluded + self.points.len()) as f64
    }
}

/// Discretization details recorded with every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub quadrature_nodes: usize,
    pub grid_resolution: usize,
    pub grid_points: usize,
    pub grid_excluded_fraction: f64,
}

/// Relative errors of a reconstruction against a reference solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `‖u_N − u‖_{L²(D)} / ‖u‖_{L²(D)}`
    pub rel_l2_interior: f64,
    /// `‖∇u_N − ∇u‖_{L²(D)} / ‖∇u‖_{L²(D)}`
    pub rel_h1semi_interior: f64,
    /// `‖u_N − u‖_{L²(Γ)} / ‖u‖_{L²(Γ)}`
    pub rel_l2_boundary: f64,
    /// `‖∂_ν u_N − ∂_ν u‖_{L²(Γ)} / ‖∂_ν u‖_{L²(Γ)}`
    pub rel_l2_normal_derivative: f64,
    pub metadata: ReportMetadata,
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if !(den.sqrt() >= MIN_REFERENCE_NORM) {
        return Err(FbmError::Degenerate(format!(
            "reference {what} norm below {MIN_REFERENCE_NORM:e}"
        )));
    }
    Ok((num / den).sqrt())
}

fn sq(z: [Complex64; 2]) -> f64 {
    z[0].norm_sqr() + z[1].norm_sqr()
}

/// Computes the four relative errors. Interior integrals are cell-area
/// weighted sums over `grid`, boundary integrals use `rule`. Sums are
/// reduced pairwise in point order, so the result does not depend on the
/// thread count.
pub fn error_report(
    problem: &WaveProblem,
    c: &CoefficientVector,
    exact: &dyn ExactSolution,
    grid: &InteriorGrid,
    rule: &QuadratureRule,
) -> Result<ErrorReport> {
    check_length(problem, c)?;

    let interior: Vec<[f64; 4]> = grid
        .points
        .par_iter()
        .map(|&p| {
            let (u, g) = field_and_gradient(problem, c, p)?;
            let ue = exact.value(p);
            let ge = exact.gradient(p);
            Ok([
                (u - ue).norm_sqr(),
                ue.norm_sqr(),
                sq([g[0] - ge[0], g[1] - ge[1]]),
                sq(ge),
            ])
        })
        .collect::<Result<_>>()?;
    let column =
        |rows: &[[f64; 4]], i: usize| pairwise_sum(&rows.iter().map(|r| r[i]).collect::<Vec<_>>());

    let boundary: Vec<[f64; 4]> = (0..rule.len())
        .into_par_iter()
        .map(|j| {
            let p = rule.points[j];
            let nu = rule.normals[j];
            let w = rule.weight * rule.speeds[j];
            let (u, g) = field_and_gradient(problem, c, p)?;
            let ue = exact.value(p);
            let ge = exact.gradient(p);
            let dn = g[0] * nu.x + g[1] * nu.y;
            let dne = ge[0] * nu.x + ge[1] * nu.y;
            Ok([
                w * (u - ue).norm_sqr(),
                w * ue.norm_sqr(),
                w * (dn - dne).norm_sqr(),
                w * dne.norm_sqr(),
            ])
        })
        .collect::<Result<_>>()?;

    let area = grid.cell_area;
    Ok(ErrorReport {
        rel_l2_interior: ratio(
            area * column(&interior, 0),
            area * column(&interior, 1),
            "L2(D)",
        )?,
        rel_h1semi_interior: ratio(
            area * column(&interior, 2),
            area * column(&interior, 3),
            "gradient L2(D)",
        )?,
        rel_l2_boundary: ratio(column(&boundary, 0), column(&boundary, 1), "L2(boundary)")?,
        rel_l2_normal_derivative: ratio(
            column(&boundary, 2),
            column(&boundary, 3),
            "normal derivative",
        )?,
        metadata: ReportMetadata {
            quadrature_nodes: rule.len(),
            grid_resolution: grid.resolution,
            grid_points: grid.points.len(),
            grid_excluded_fraction: grid.excluded_fraction(),
        },
    })
}
