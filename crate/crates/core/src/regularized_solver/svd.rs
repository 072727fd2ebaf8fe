//! One-sided Jacobi SVD for dense complex matrices.
//!
//! Tall inputs are first reduced by a Householder QR; the Hestenes rotations
//! then run on the square triangular factor. One-sided Jacobi computes small
//! singular values of column-graded matrices to high relative accuracy.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FbmError, Result};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(s) V*`, singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub singular_values: Vec<f64>,
    pub u: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
}

fn column_dot(m: &DMatrix<Complex64>, p: usize, q: usize) -> Complex64 {
    m.column(p)
        .iter()
        .zip(m.column(q).iter())
        .map(|(a, b)| a.conj() * b)
        .sum()
}

fn column_norm_sqr(m: &DMatrix<Complex64>, p: usize) -> f64 {
    m.column(p).iter().map(|z| z.norm_sqr()).sum()
}

/// Applies `[a, b] <- [c a − s g* b, s a + c g* b]` to columns `p`, `q`.
fn rotate(m: &mut DMatrix<Complex64>, p: usize, q: usize, c: f64, s: f64, g_conj: Complex64) {
    for i in 0..m.nrows() {
        let a = m[(i, p)];
        let b = m[(i, q)] * g_conj;
        m[(i, p)] = a * c - b * s;
        m[(i, q)] = a * s + b * c;
    }
}

/// Orthogonalizes the columns of `work` in place, accumulating the
/// rotations into `v`.
fn hestenes(work: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>) -> Result<()> {
    let n = work.ncols();
    let tol = f64::EPSILON * (work.nrows() as f64).sqrt();
    let mut norms: Vec<f64> = (0..n).map(|j| column_norm_sqr(work, j)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = column_dot(work, p, q);
                let g_abs = gamma.norm();
                if g_abs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g_abs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let g_conj = (gamma / g_abs).conj();
                rotate(work, p, q, c, s, g_conj);
                rotate(v, p, q, c, s, g_conj);
                norms[p] = column_norm_sqr(work, p);
                norms[q] = column_norm_sqr(work, q);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(FbmError::Convergence { sweeps: MAX_SWEEPS })
}

/// Thin SVD of an `m × n` matrix with `m >= n`.
pub fn thin_svd(a: &DMatrix<Complex64>) -> Result<ThinSvd> {
    let (m, n) = a.shape();
    if m < n {
        return Err(FbmError::Size(format!(
            "thin SVD needs rows >= columns, got {m} x {n}"
        )));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(FbmError::Degenerate("non-finite matrix entry".into()));
    }
    if n == 0 {
        return Ok(ThinSvd {
            singular_values: Vec::new(),
            u: DMatrix::zeros(m, 0),
            v: DMatrix::zeros(0, 0),
        });
    }

    let (q, mut work) = if m > n {
        let qr = a.clone().qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, a.clone())
    };
    let mut v = DMatrix::<Complex64>::identity(n, n);
    hestenes(&mut work, &mut v)?;

    let sigma: Vec<f64> = (0..n).map(|j| column_norm_sqr(&work, j).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let rows = work.nrows();
    let mut u_small = DMatrix::<Complex64>::zeros(rows, n);
    let mut v_sorted = DMatrix::<Complex64>::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma[src];
        singular_values.push(s);
        if s > 0.0 {
            u_small.set_column(dst, &(work.column(src) / Complex64::new(s, 0.0)));
        }
        v_sorted.set_column(dst, &v.column(src));
    }
    let u = match q {
        Some(q) => q * u_small,
        None => u_small,
    };
    Ok(ThinSvd {
        singular_values,
        u,
        v: v_sorted,
    })
}
