use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitize, CMatrix, OverlapFactor};

/// Solution of `D v = λ E v` on the retained part of the overlap spectrum.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` holds `v_i` in basis coordinates (M × rank), E-orthonormal.
    pub eigenvectors: CMatrix,
    pub retained_rank: usize,
}

/// Canonical orthogonalization: drop overlap eigenpairs below
/// `svd_threshold × λ_max(E)`, solve the projected Hermitian problem, and map
/// eigenvectors back to basis coordinates.
pub fn regularized_solve(d: &CMatrix, e: &CMatrix, svd_threshold: f64) -> Result<EigenSolution> {
    if d.shape() != e.shape() || d.nrows() != d.ncols() {
        return Err(Error::Dimension(format!(
            "D is {:?} but E is {:?}",
            d.shape(),
            e.shape()
        )));
    }
    if !(0.0..1.0).contains(&svd_threshold) {
        return Err(Error::InvalidArgument(format!(
            "svd_threshold must lie in [0, 1), got {svd_threshold}"
        )));
    }
    let factor = OverlapFactor::new(e, svd_threshold)?;
    let x = &factor.transform;
    let mut projected = x.adjoint() * d * x;
    hermitize(&mut projected);
    let (eigenvalues, w) = eigh(&projected);
    Ok(EigenSolution {
        eigenvalues,
        eigenvectors: x * w,
        retained_rank: factor.rank(),
    })
}
