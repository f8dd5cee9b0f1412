//! Dense spectral diagnostics for small operators.
//!
//! Only meant for grids up to a few thousand points: everything here densifies.

use faer::Mat;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Largest matrix dimension accepted by the dense routines (64×64 grid).
pub const MAX_DENSE_DIM: usize = 64 * 64 + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

fn dense(m: &CsrMatrix) -> Result<Mat<f64>> {
    if m.nrows().max(m.ncols()) > MAX_DENSE_DIM {
        return Err(Error::LinearAlgebra(format!(
            "{}x{} is too large for dense diagnostics (limit {MAX_DENSE_DIM})",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.to_dense())
}

pub fn eigenvalues(m: &CsrMatrix) -> Result<Vec<Eigenvalue>> {
    let a = dense(m)?;
    let ev = a
        .eigenvalues()
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalue iteration failed: {e:?}")))?;
    Ok(ev.into_iter().map(|z| Eigenvalue { re: z.re, im: z.im }).collect())
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CsrMatrix) -> Result<Vec<f64>> {
    dense(m)?
        .singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))
}

pub fn min_singular_value(m: &CsrMatrix) -> Result<f64> {
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0))
}

/// Summary of a spectrum that is expected to be imaginary apart from a
/// cluster at the origin.
///
/// A defective zero eigenvalue of algebraic multiplicity `m` is resolved by a
/// floating-point eigensolver as a ring of radius `~ (ε‖A‖)^(1/m)`, so zero
/// modes are counted as eigenvalues below `zero_tol · ρ(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub spectral_radius: f64,
    pub zero_modes: usize,
    /// Largest `|Re λ| / ρ(A)` over eigenvalues outside the zero cluster.
    pub max_rel_real_nonzero: f64,
    pub min_real: f64,
}

pub fn summarize_spectrum(eigs: &[Eigenvalue], zero_tol: f64) -> SpectrumSummary {
    let rho = eigs.iter().map(Eigenvalue::norm).fold(0.0, f64::max);
    let cutoff = zero_tol * rho;
    let zero_modes = eigs.iter().filter(|z| z.norm() <= cutoff).count();
    let max_rel_real_nonzero = eigs
        .iter()
        .filter(|z| z.norm() > cutoff)
        .map(|z| z.re.abs() / rho)
        .fold(0.0, f64::max);
    let min_real = eigs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    SpectrumSummary {
        spectral_radius: rho,
        zero_modes,
        max_rel_real_nonzero,
        min_real,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbp::{build_sbp_1d, SbpOrder};

    #[test]
    fn rotation_generator_is_imaginary() {
        let m = CsrMatrix::from_triplets(2, 2, [(0, 1, 1.0), (1, 0, -1.0)]);
        let s = summarize_spectrum(&eigenvalues(&m).unwrap(), 1e-3);
        assert_eq!(s.zero_modes, 0);
        assert!(s.max_rel_real_nonzero < 1e-14);
        assert!((s.spectral_radius - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sbp121_odd_size_spectrum() {
        let p = build_sbp_1d(SbpOrder::Sbp121, 5, 1.0).unwrap();
        let s = summarize_spectrum(&eigenvalues(&p.d_matrix).unwrap(), 1e-3);
        assert!(s.max_rel_real_nonzero < 1e-12);
        // odd sizes carry a threefold zero eigenvalue
        assert_eq!(s.zero_modes, 3);
    }

    #[test]
    fn smallest_singular_value_detects_rank_loss() {
        let p = build_sbp_1d(SbpOrder::Sbp121, 6, 1.0).unwrap();
        assert!(min_singular_value(&p.d_matrix).unwrap() < 1e-12);
    }
}
