//! Singular value decomposition of the trace operator, Tikhonov-filtered
//! solves and the a-priori choice of truncation order and regularization
//! parameter.

mod svd;

pub use svd::{thin_svd, ThinSvd};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FbmError, Result};
use crate::geometry::{default_quadrature_size, DomainRadii};
use crate::numeric::least_squares_slope;
use crate::special_fn::N_MAX;
use crate::trace_operator::{assemble_operator, BoundaryData, DiscreteTraceOperator, WaveProblem};

/// Noise levels below this are treated as this (machine precision).
pub const DELTA_FLOOR: f64 = 1e-16;

/// `alpha = 0` solves require `mu_min > RANK_TOL * mu_max`.
const RANK_TOL: f64 = 1e-13;

/// Expansion coefficients `c_n`, stored for `n = -N ..= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    truncation: usize,
    coeffs: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn zeros(truncation: usize) -> Self {
        Self {
            truncation,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * truncation + 1],
        }
    }

    /// Wraps `2N + 1` coefficients ordered `n = -N ..= N`.
    pub fn from_vec(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(FbmError::Size(format!(
                "coefficient vector must have odd length, got {}",
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(FbmError::Degenerate("non-finite coefficient".into()));
        }
        Ok(Self {
            truncation: coeffs.len() / 2,
            coeffs,
        })
    }

    /// The unit vector selecting order `n`.
    pub fn unit(truncation: usize, n: i32) -> Self {
        let mut c = Self::zeros(truncation);
        c.coeffs[(n + truncation as i32) as usize] = Complex64::new(1.0, 0.0);
        c
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of order `n`.
    pub fn get(&self, n: i32) -> Complex64 {
        self.coeffs[(n + self.truncation as i32) as usize]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Pairs `(n, c_n)`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        let n = self.truncation as i32;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, c)| (j as i32 - n, *c))
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Singular triples `(mu_j, d_j, phi_j)` of the discrete trace operator,
/// `A d_j = mu_j phi_j`, in descending order of `mu_j`.
#[derive(Debug, Clone)]
pub struct SingularSystem {
    pub singular_values: Vec<f64>,
    /// Columns are the left vectors `phi_j`.
    pub left_vectors: DMatrix<Complex64>,
    /// Columns are the right vectors `d_j`.
    pub right_vectors: DMatrix<Complex64>,
}

impl SingularSystem {
    pub fn mu_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn mu_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }
}

/// Full thin SVD of the assembled operator.
pub fn svd(op: &DiscreteTraceOperator) -> Result<SingularSystem> {
    svd_of_matrix(&op.matrix)
}

pub fn svd_of_matrix(matrix: &DMatrix<Complex64>) -> Result<SingularSystem> {
    let ThinSvd {
        singular_values,
        u,
        v,
    } = thin_svd(matrix)?;
    Ok(SingularSystem {
        singular_values,
        left_vectors: u,
        right_vectors: v,
    })
}

/// `c = Σ_j mu_j / (alpha + mu_j²) <f^δ, phi_j> d_j`, the solution of
/// `(alpha I + A*A) c = A* f^δ`.
pub fn tikhonov_solve(
    system: &SingularSystem,
    rhs: &BoundaryData,
    alpha: f64,
) -> Result<CoefficientVector> {
    tikhonov_solve_weighted(system, &rhs.weighted, alpha)
}

/// As [`tikhonov_solve`] with the quadrature-weighted right-hand side given
/// directly.
pub fn tikhonov_solve_weighted(
    system: &SingularSystem,
    weighted_rhs: &[Complex64],
    alpha: f64,
) -> Result<CoefficientVector> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(FbmError::InvalidParameter(format!(
            "regularization parameter must be nonnegative, got {alpha}"
        )));
    }
    let rows = system.left_vectors.nrows();
    if weighted_rhs.len() != rows {
        return Err(FbmError::Size(format!(
            "right-hand side has {} entries, operator has {rows} rows",
            weighted_rhs.len()
        )));
    }
    if alpha == 0.0 && !(system.mu_min() > RANK_TOL * system.mu_max()) {
        return Err(FbmError::Rank {
            mu_min: system.mu_min(),
            mu_max: system.mu_max(),
        });
    }
    let n = system.rank();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); system.right_vectors.nrows()];
    for j in 0..n {
        let mu = system.singular_values[j];
        let denom = alpha + mu * mu;
        if denom == 0.0 {
            continue;
        }
        let projection: Complex64 = system
            .left_vectors
            .column(j)
            .iter()
            .zip(weighted_rhs)
            .map(|(phi, f)| phi.conj() * f)
            .sum();
        let factor = projection * (mu / denom);
        for (c, d) in coeffs.iter_mut().zip(system.right_vectors.column(j).iter()) {
            *c += factor * d;
        }
    }
    CoefficientVector::from_vec(coeffs)
}

/// Which rule of the parameter choice applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `0 < k <= 1`
    SmallK,
    /// `k > 1`
    LargeK,
}

/// Truncation order and regularization parameter for one `(k, delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationPlan {
    pub k: f64,
    pub delta: f64,
    /// `max(delta, DELTA_FLOOR)`, the value entering the formulas.
    pub delta_eff: f64,
    pub eta: f64,
    pub tau0: f64,
    pub tau_min: f64,
    pub branch: Branch,
    #[serde(rename = "N")]
    pub truncation: usize,
    pub alpha: f64,
    /// Exponent `eta ln tau0` of the error bound (metadata only).
    pub lambda: f64,
    /// Exponent `7/2 + 11 ln tau0 / (2 ln tau_min)` of the `k > 1` bound;
    /// absent for `k <= 1`.
    pub sigma: Option<f64>,
    /// True when the formula asked for more than `N_MAX` terms.
    pub capped: bool,
}

/// Selects `N` and `alpha`:
///
/// * `k <= 1`: `N = ceil(eta ln|ln δ|)`, `alpha = k² δ tau0^(−2N)`;
/// * `k > 1`: `N = ceil(11 ln k / (2 ln tau_min) + eta ln|ln δ|)`,
///   `alpha = δ tau0^(−2N) / k`,
///
/// with `δ` floored at [`DELTA_FLOOR`] and `N` clamped to `1 ..= N_MAX`.
pub fn select_parameters(
    k: f64,
    delta: f64,
    eta: f64,
    radii: &DomainRadii,
    tau0: f64,
) -> Result<RegularizationPlan> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(FbmError::InvalidParameter(format!(
            "wavenumber must be positive, got {k}"
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(FbmError::InvalidParameter(format!(
            "noise level must lie in [0, 1), got {delta}"
        )));
    }
    if !(eta > 1.0 && eta.is_finite()) {
        return Err(FbmError::InvalidParameter(format!(
            "eta must exceed 1, got {eta}"
        )));
    }
    let tau_min = radii.tau_min;
    if !(tau0 > tau_min && tau0.is_finite()) {
        return Err(FbmError::Tau0TooSmall { tau0, tau_min });
    }
    let delta_eff = delta.max(DELTA_FLOOR);
    let log_log = eta * delta_eff.ln().abs().ln();
    let branch = if k <= 1.0 {
        Branch::SmallK
    } else {
        Branch::LargeK
    };
    let raw = match branch {
        Branch::SmallK => log_log,
        Branch::LargeK => {
            if !(tau_min > 1.0) {
                return Err(FbmError::InvalidParameter(format!(
                    "the k > 1 rule needs tau_min > 1, got {tau_min}"
                )));
            }
            11.0 * k.ln() / (2.0 * tau_min.ln()) + log_log
        }
    };
    let wanted = raw.ceil().max(1.0);
    let capped = wanted > N_MAX as f64;
    if capped {
        log::warn!("truncation order {wanted} capped at {N_MAX}");
    }
    let truncation = wanted.min(N_MAX as f64) as usize;
    let decay = tau0.powi(-2 * truncation as i32);
    let alpha = match branch {
        Branch::SmallK => k * k * delta_eff * decay,
        Branch::LargeK => delta_eff * decay / k,
    };
    let sigma = match branch {
        Branch::SmallK => None,
        Branch::LargeK => Some(3.5 + 11.0 * tau0.ln() / (2.0 * tau_min.ln())),
    };
    Ok(RegularizationPlan {
        k,
        delta,
        delta_eff,
        eta,
        tau0,
        tau_min,
        branch,
        truncation,
        alpha,
        lambda: eta * tau0.ln(),
        sigma,
        capped,
    })
}

/// Shape of the lower bound on the smallest singular value,
/// `c min(1, k) / (1 + sqrt k) (r_in / r_ex)^N`, for a caller-supplied `c`.
pub fn mu_min_bound(k: f64, r_in: f64, r_ex: f64, truncation: usize, c: f64) -> f64 {
    debug_assert!(r_in <= r_ex);
    c * k.min(1.0) / (1.0 + k.sqrt()) * (r_in / r_ex).powi(truncation as i32)
}

/// One row of [`SvdStudy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvdStudyRow {
    #[serde(rename = "N")]
    pub truncation: usize,
    pub quadrature_nodes: usize,
    pub mu_max: f64,
    pub mu_min: f64,
    /// [`mu_min_bound`] with `c = 1`.
    pub bound_shape: f64,
}

/// Smallest singular value as a function of the truncation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdStudy {
    pub rows: Vec<SvdStudyRow>,
    /// Least-squares slope of `ln mu_min` against `N`; `None` for a single row.
    pub slope: Option<f64>,
}

/// Assembles and decomposes the operator for every order in `orders`
/// (ascending), keeping `k`, the curve and `tau0` of `template`. The
/// quadrature size is `quadrature` or the default for each order.
pub fn svd_decay_study(
    template: &WaveProblem,
    orders: &[usize],
    quadrature: Option<usize>,
) -> Result<SvdStudy> {
    if orders.is_empty() {
        return Err(FbmError::InvalidParameter("empty list of orders".into()));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FbmError::InvalidParameter(
            "orders must be strictly ascending".into(),
        ));
    }
    let rows = orders
        .par_iter()
        .map(|&n| {
            let problem = template.with_truncation(n)?;
            let nodes = quadrature.unwrap_or_else(|| default_quadrature_size(n));
            let rule = problem.curve().build_quadrature(nodes)?;
            let op = assemble_operator(&problem, &rule)?;
            let system = svd(&op)?;
            let prm = problem.params();
            Ok(SvdStudyRow {
                truncation: n,
                quadrature_nodes: nodes,
                mu_max: system.mu_max(),
                mu_min: system.mu_min(),
                bound_shape: mu_min_bound(prm.k, prm.r_in, prm.r_ex, n, 1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for w in rows.windows(2) {
        if w[1].mu_min > w[0].mu_min * (1.0 + 1e-12) {
            log::warn!(
                "mu_min increased from {:e} (N = {}) to {:e} (N = {})",
                w[0].mu_min,
                w[0].truncation,
                w[1].mu_min,
                w[1].truncation
            );
        }
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.truncation as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mu_min.ln()).collect();
    Ok(SvdStudy {
        slope: least_squares_slope(&xs, &ys),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radii(tau_min: f64) -> DomainRadii {
        DomainRadii::new(1.0, tau_min).unwrap()
    }

    #[test]
    fn plan_examples() {
        let small = select_parameters(0.5, 0.01, 5.0, &radii(1.5), 2.0).unwrap();
        assert_eq!(small.branch, Branch::SmallK);
        assert_eq!(small.truncation, 8);
        assert!((small.alpha / (0.25 * 0.01 * 2f64.powi(-16)) - 1.0).abs() < 1e-14);

        let kite = DomainRadii::new(0.923, 1.985).unwrap();
        let large = select_parameters(5.0, 0.01, 5.0, &kite, 2.2).unwrap();
        assert_eq!(large.branch, Branch::LargeK);
        assert_eq!(large.truncation, 20);
        assert!((large.alpha / (0.2 * 0.01 * 2.2f64.powi(-40)) - 1.0).abs() < 1e-14);
        assert!(large.sigma.is_some());

        let floor = select_parameters(1.0, 0.0, 5.0, &radii(1.5), 2.0).unwrap();
        assert_eq!(floor.branch, Branch::SmallK);
        assert_eq!(floor.delta_eff, 1e-16);
        assert_eq!(floor.truncation, 19);
    }

    #[test]
    fn plan_validation() {
        let r = radii(2.0);
        assert!(matches!(
            select_parameters(1.0, 0.01, 5.0, &r, 2.0),
            Err(FbmError::Tau0TooSmall { .. })
        ));
        assert!(select_parameters(1.0, 1.0, 5.0, &r, 3.0).is_err());
        assert!(select_parameters(1.0, -0.1, 5.0, &r, 3.0).is_err());
        assert!(select_parameters(1.0, 0.1, 1.0, &r, 3.0).is_err());
        assert!(select_parameters(0.0, 0.1, 5.0, &r, 3.0).is_err());
        // circle: tau_min = 1 has no k > 1 rule
        assert!(select_parameters(2.0, 0.1, 5.0, &radii(1.0), 1.1).is_err());
        // large noise pushes the formula below one term
        let p = select_parameters(0.5, 0.9, 5.0, &r, 3.0).unwrap();
        assert_eq!(p.truncation, 1);
    }

    #[test]
    fn plan_caps_order() {
        let p = select_parameters(1e6, 0.01, 5.0, &radii(1.01), 1.02).unwrap();
        assert!(p.capped);
        assert_eq!(p.truncation, N_MAX);
    }

    #[test]
    fn bound_examples() {
        assert!((mu_min_bound(1.0, 1.0, 2.0, 0, 1.0) - 0.5).abs() < 1e-15);
        let a = mu_min_bound(1.0, 1.0, 2.0, 5, 1.0);
        let b = mu_min_bound(1.0, 1.0, 2.0, 6, 1.0);
        assert!((b / a - 0.5).abs() < 1e-15);
        assert!((mu_min_bound(4.0, 1.0, 1.0, 0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_vector_indexing() {
        let c = CoefficientVector::unit(3, -2);
        assert_eq!(c.len(), 7);
        assert_eq!(c.get(-2), Complex64::new(1.0, 0.0));
        assert_eq!(c.iter().next().unwrap().0, -3);
        assert!(CoefficientVector::from_vec(vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn zero_rhs_and_rank_error() {
        let mut a = DMatrix::<Complex64>::zeros(6, 3);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        a[(1, 1)] = Complex64::new(1.0, 0.0);
        let system = svd_of_matrix(&a).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); 6];
        assert!(matches!(
            tikhonov_solve_weighted(&system, &zero, 0.0),
            Err(FbmError::Rank { .. })
        ));
        let c = tikhonov_solve_weighted(&system, &zero, 1e-3).unwrap();
        assert_eq!(c.norm(), 0.0);
        assert!(tikhonov_solve_weighted(&system, &zero[..5], 1e-3).is_err());
        assert!(tikhonov_solve_weighted(&system, &zero, -1.0).is_err());
    }
}
