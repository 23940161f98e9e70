//! Dense complex matrix helpers shared by the solvers.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest number of implicit QR sweeps allowed before an SVD is declared failed.
const SVD_MAX_ITERS: usize = 10_000;

/// Truncation tolerance for a matrix of shape `rows x cols` with leading singular value `sigma1`.
pub fn rank_tolerance(rows: usize, cols: usize, sigma1: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma1
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Real part of the Frobenius inner product `tr(a^H b)`.
pub fn inner_re(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn relative_error(estimate: &CMatrix, reference: &CMatrix) -> f64 {
    let denom = frobenius_sq(reference).sqrt();
    let num = frobenius_sq(&(estimate - reference)).sqrt();
    if denom == 0.0 {
        num
    } else {
        num / denom
    }
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// SVD with singular values sorted non-increasing.
pub fn svd(m: &CMatrix, compute_uv: bool) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m.clone(), compute_uv, compute_uv, f64::EPSILON, SVD_MAX_ITERS).ok_or_else(|| {
        Error::NumericalFailure {
            iteration: 0,
            reason: format!("SVD of {}x{} matrix did not converge", m.nrows(), m.ncols()),
        }
    })
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(svd(m, false)?.singular_values.iter().copied().collect())
}

/// Number of singular values above `max(rows, cols) * eps * sigma_1`.
pub fn numerical_rank(m: &CMatrix) -> Result<usize> {
    let sv = singular_values(m)?;
    let Some(&s1) = sv.first() else {
        return Ok(0);
    };
    if s1 == 0.0 {
        return Ok(0);
    }
    let tol = rank_tolerance(m.nrows(), m.ncols(), s1);
    Ok(sv.iter().filter(|&&s| s > tol).count())
}

/// Moore-Penrose pseudoinverse with relative truncation.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: CMatrix,
    pub rank: usize,
    /// Largest over smallest retained singular value.
    pub condition: f64,
}

pub fn pseudo_inverse(m: &CMatrix) -> Result<PseudoInverse> {
    let (rows, cols) = m.shape();
    let dec = svd(m, true)?;
    let u = dec.u.as_ref().expect("u requested");
    let v_t = dec.v_t.as_ref().expect("v_t requested");
    let sv = &dec.singular_values;
    let s1 = sv.iter().copied().fold(0.0, f64::max);

    let mut pinv = CMatrix::zeros(cols, rows);
    if s1 == 0.0 {
        return Ok(PseudoInverse {
            matrix: pinv,
            rank: 0,
            condition: f64::INFINITY,
        });
    }
    let tol = rank_tolerance(rows, cols, s1);
    let mut rank = 0;
    let mut smallest = s1;
    for (r, &s) in sv.iter().enumerate() {
        if s <= tol {
            continue;
        }
        rank += 1;
        smallest = smallest.min(s);
        // V Sigma^+ U^H, accumulated one rank-one term at a time
        let left = v_t.row(r).adjoint();
        let right = u.column(r).adjoint() * Complex64::from(1.0 / s);
        pinv += left * right;
    }
    Ok(PseudoInverse {
        matrix: pinv,
        rank,
        condition: s1 / smallest,
    })
}

/// Column-major vectorization.
pub fn vec(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &nalgebra::DVector<Complex64>, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::dims("unvec", rows * cols, v.len()));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}
