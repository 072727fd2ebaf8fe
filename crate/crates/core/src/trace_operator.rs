//! The discrete impedance trace operator and boundary data.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::geometry::{BoundaryCurve, DomainRadii, QuadratureRule};
use crate::regularized_solver::CoefficientVector;
use crate::special_fn::{basis_sample, BasisContext, N_MAX};
use crate::Vec2;

/// Relative margin applied when the scaling radius has to be pushed past
/// the boundary.
const M_OVERRIDE_MARGIN: f64 = 1e-6;

/// Scalar parameters of a problem, serialized into every output file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParameters {
    pub k: f64,
    pub tau0: f64,
    pub truncation: usize,
    pub r_in: f64,
    pub r_ex: f64,
    /// Scaling radius `M` of the basis.
    pub scaling_radius: f64,
    /// True when `M` was raised above `tau0 * r_in` to enclose the curve.
    pub m_overridden: bool,
    pub radii: DomainRadii,
}

/// Wavenumber, curve, radii and truncation of one boundary value problem.
#[derive(Debug, Clone)]
pub struct WaveProblem {
    curve: BoundaryCurve,
    params: ProblemParameters,
    basis: BasisContext,
}

impl WaveProblem {
    /// Builds the problem from the curve's own radii.
    pub fn new(k: f64, curve: BoundaryCurve, tau0: f64, truncation: usize) -> Result<Self> {
        let radii = curve.radii();
        Self::with_radii(k, curve, radii, tau0, truncation)
    }

    /// `r_in = min(r_in_max, 1/k)`, `r_ex = tau0 r_in`, `M = r_ex`, except
    /// that `M` is raised to just above the circumscribed radius when `r_ex`
    /// does not enclose the curve.
    ///
    /// `radii` drive `r_in` and the `tau0 > tau_min` check and may differ
    /// from the curve's computed radii (e.g. externally reported values);
    /// the enclosing check on `M` always uses the larger of the two
    /// circumscribed radii.
    pub fn with_radii(
        k: f64,
        curve: BoundaryCurve,
        radii: DomainRadii,
        tau0: f64,
        truncation: usize,
    ) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(FbmError::InvalidParameter(format!(
                "wavenumber must be positive, got {k}"
            )));
        }
        if !(tau0 > radii.tau_min) || !tau0.is_finite() {
            return Err(FbmError::Tau0TooSmall {
                tau0,
                tau_min: radii.tau_min,
            });
        }
        if truncation > N_MAX {
            return Err(FbmError::OrderCap {
                order: truncation as i64,
                cap: N_MAX as i64,
            });
        }
        let r_in = radii.r_in_max.min(1.0 / k);
        let r_ex = tau0 * r_in;
        let enclosing = radii.r_ex_min.max(curve.radii().r_ex_min);
        let (scaling_radius, m_overridden) = if r_ex > enclosing {
            (r_ex, false)
        } else {
            let m = (1.0 + M_OVERRIDE_MARGIN) * enclosing;
            log::info!(
                "scaling radius raised from {r_ex} to {m} to enclose the boundary (k = {k})"
            );
            (m, true)
        };
        let basis = BasisContext::new(k, scaling_radius)?;
        Ok(Self {
            curve,
            params: ProblemParameters {
                k,
                tau0,
                truncation,
                r_in,
                r_ex,
                scaling_radius,
                m_overridden,
                radii,
            },
            basis,
        })
    }

    /// Same problem with a different truncation order.
    pub fn with_truncation(&self, truncation: usize) -> Result<Self> {
        Self::with_radii(
            self.params.k,
            self.curve.clone(),
            self.params.radii,
            self.params.tau0,
            truncation,
        )
    }

    pub fn k(&self) -> f64 {
        self.params.k
    }

    pub fn truncation(&self) -> usize {
        self.params.truncation
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn basis(&self) -> &BasisContext {
        &self.basis
    }

    pub fn params(&self) -> &ProblemParameters {
        &self.params
    }

    pub fn radii(&self) -> &DomainRadii {
        &self.params.radii
    }

    /// Number of unknowns, `2N + 1`.
    pub fn unknowns(&self) -> usize {
        2 * self.params.truncation + 1
    }
}

/// Quadrature-weighted matrix of the impedance trace map. Column `j`
/// corresponds to order `n = j − N`; row `i` to quadrature node `i`.
#[derive(Debug, Clone)]
pub struct DiscreteTraceOperator {
    pub matrix: DMatrix<Complex64>,
    pub rule: QuadratureRule,
    truncation: usize,
}

impl DiscreteTraceOperator {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Signed order of each column.
    pub fn column_orders(&self) -> Vec<i32> {
        let n = self.truncation as i32;
        (-n..=n).collect()
    }

    /// Weighted samples of `∂u_N/∂ν + i k u_N` for the given coefficients.
    pub fn apply(&self, c: &CoefficientVector) -> Result<Vec<Complex64>> {
        if c.len() != self.matrix.ncols() {
            return Err(FbmError::Size(format!(
                "coefficient vector has length {}, operator expects {}",
                c.len(),
                self.matrix.ncols()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(c.as_slice());
        Ok((&self.matrix * v).iter().copied().collect())
    }
}

/// Impedance term `i k φ + ν·∇φ` for one basis function.
fn impedance_entry(k: f64, value: Complex64, gradient: [Complex64; 2], normal: Vec2) -> Complex64 {
    Complex64::new(0.0, k) * value + gradient[0] * normal.x + gradient[1] * normal.y
}

/// Builds the `M_q × (2N+1)` matrix with entries
/// `sqrt(w_j |x'(t_j)|) (i k φ_n(x_j) + ν_j·∇φ_n(x_j))`.
pub fn assemble_operator(
    problem: &WaveProblem,
    rule: &QuadratureRule,
) -> Result<DiscreteTraceOperator> {
    let n = problem.truncation();
    let cols = problem.unknowns();
    let rows = rule.len();
    if cols > rows {
        return Err(FbmError::Size(format!(
            "2N+1 = {cols} unknowns exceed {rows} quadrature nodes"
        )));
    }
    let k = problem.k();
    let basis = problem.basis();
    let row_data: Vec<Vec<Complex64>> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let sample = basis_sample(basis, n, rule.points[i])?;
            let scale = rule.row_scale()[i];
            Ok((0..cols)
                .map(|j| {
                    scale
                        * impedance_entry(k, sample.values[j], sample.gradients[j], rule.normals[i])
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let matrix = DMatrix::from_fn(rows, cols, |i, j| row_data[i][j]);
    if matrix
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(FbmError::Degenerate("non-finite operator entry".into()));
    }
    Ok(DiscreteTraceOperator {
        matrix,
        rule: rule.clone(),
        truncation: n,
    })
}

/// Impedance data sampled at the quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    /// Samples `f(x_j)`.
    pub values: Vec<Complex64>,
    /// `sqrt(w_j |x'(t_j)|) f(x_j)`; its Euclidean norm is the discrete `L²(Γ)` norm.
    pub weighted: Vec<Complex64>,
    row_scale: Vec<f64>,
}

impl BoundaryData {
    pub fn from_samples(values: Vec<Complex64>, rule: &QuadratureRule) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(FbmError::Size(format!(
                "{} samples for {} quadrature nodes",
                values.len(),
                rule.len()
            )));
        }
        let row_scale = rule.row_scale().to_vec();
        let weighted = values.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
        Ok(Self {
            values,
            weighted,
            row_scale,
        })
    }

    /// Data whose weighted vector is given directly, e.g. `A c` for a
    /// manufactured solution.
    pub fn from_weighted(weighted: Vec<Complex64>, rule: &QuadratureRule) -> Result<Self> {
        if weighted.len() != rule.len() {
            return Err(FbmError::Size(format!(
                "{} samples for {} quadrature nodes",
                weighted.len(),
                rule.len()
            )));
        }
        let row_scale = rule.row_scale().to_vec();
        let values = weighted
            .iter()
            .zip(&row_scale)
            .map(|(v, s)| v / s)
            .collect();
        Ok(Self {
            values,
            weighted,
            row_scale,
        })
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Impedance trace of the plane wave `exp(i k x·d)`:
/// `f = i k (ν·d + 1) exp(i k x·d)`.
pub fn plane_wave_data(
    problem: &WaveProblem,
    rule: &QuadratureRule,
    direction: Vec2,
) -> Result<BoundaryData> {
    check_direction(direction)?;
    let k = problem.k();
    let values = rule
        .points
        .iter()
        .zip(&rule.normals)
        .map(|(x, nu)| {
            Complex64::new(0.0, k * (nu.dot(&direction) + 1.0))
                * Complex64::cis(k * x.dot(&direction))
        })
        .collect();
    BoundaryData::from_samples(values, rule)
}

pub(crate) fn check_direction(direction: Vec2) -> Result<()> {
    if !((direction.norm() - 1.0).abs() < 1e-12) {
        return Err(FbmError::InvalidParameter(format!(
            "direction must be a unit vector, got ({}, {})",
            direction.x, direction.y
        )));
    }
    Ok(())
}

/// Adds complex Gaussian noise rescaled so that
/// `‖f^δ − f‖_{L²(Γ)} = delta ‖f‖_{L²(Γ)}` holds exactly.
pub fn add_noise(data: &BoundaryData, delta: f64, seed: u64) -> Result<BoundaryData> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(FbmError::InvalidParameter(format!(
            "noise level must be nonnegative, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(data.clone());
    }
    let norm = data.l2_norm();
    if norm == 0.0 {
        return Err(FbmError::Degenerate(
            "cannot calibrate relative noise on zero data".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = (0..data.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect();
    let raw_norm = raw
        .iter()
        .zip(&data.row_scale)
        .map(|(e, s)| (e * s).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = delta * norm / raw_norm;
    let values = data
        .values
        .iter()
        .zip(&raw)
        .map(|(f, e)| f + e * scale)
        .collect::<Vec<_>>();
    let weighted = values
        .iter()
        .zip(&data.row_scale)
        .map(|(v, s)| v * s)
        .collect();
    Ok(BoundaryData {
        values,
        weighted,
        row_scale: data.row_scale.clone(),
    })
}
