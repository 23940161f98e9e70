//! Conventional per-user CSIT acquisition: each user runs least squares on
//! its own pilot observation, `h_k = y_k Phi^+`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LsEstimate {
    pub channel: CMatrix,
    /// Condition number of `Phi Phi^H` over the retained subspace.
    pub condition: f64,
    /// Numerical rank of `Phi`; the estimate is minimum-norm when this is below `M`.
    pub pilot_rank: usize,
}

/// Row `k` of the result is `y_k Phi^+`. All rows share one pseudoinverse.
pub fn ls_per_user(observation: &CMatrix, phi: &CMatrix) -> Result<LsEstimate> {
    if observation.ncols() != phi.ncols() {
        return Err(Error::dims("ls_per_user (Y columns vs Phi columns)", phi.ncols(), observation.ncols()));
    }
    let pinv = linalg::pseudo_inverse(phi)?;
    Ok(LsEstimate {
        channel: observation * &pinv.matrix,
        condition: pinv.condition * pinv.condition,
        pilot_rank: pinv.rank,
    })
}
