//! Uniform discretization of the abstract parameter rectangle `(tau, sigma)`.
//!
//! Flat arrays store `tau` slowest and `sigma` fastest, so the entry for
//! `(n_tau_idx, n_sigma_idx)` lives at `n_tau_idx * n_sigma + n_sigma_idx`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest point count accepted along either direction. The operator order
/// imposes its own, larger minimum when the SBP pairs are built.
pub const MIN_POINTS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_tau: usize,
    pub n_sigma: usize,
    pub tau_interval: [f64; 2],
    pub sigma_interval: [f64; 2],
}

impl GridSpec {
    pub fn new(
        n_tau: usize,
        n_sigma: usize,
        tau_interval: [f64; 2],
        sigma_interval: [f64; 2],
    ) -> Result<Self> {
        let grid = Self {
            n_tau,
            n_sigma,
            tau_interval,
            sigma_interval,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tau < MIN_POINTS || self.n_sigma < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points per direction, got {}x{}",
                self.n_tau, self.n_sigma
            )));
        }
        for (name, [a, b]) in [("tau", self.tau_interval), ("sigma", self.sigma_interval)] {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidGrid(format!(
                    "{name} interval [{a}, {b}] must be finite and increasing"
                )));
            }
        }
        Ok(())
    }

    pub fn d_tau(&self) -> f64 {
        (self.tau_interval[1] - self.tau_interval[0]) / (self.n_tau - 1) as f64
    }

    pub fn d_sigma(&self) -> f64 {
        (self.sigma_interval[1] - self.sigma_interval[0]) / (self.n_sigma - 1) as f64
    }

    pub fn total_volume(&self) -> usize {
        self.n_tau * self.n_sigma
    }

    pub fn tau_length(&self) -> f64 {
        self.tau_interval[1] - self.tau_interval[0]
    }

    pub fn sigma_length(&self) -> f64 {
        self.sigma_interval[1] - self.sigma_interval[0]
    }

    #[inline]
    pub fn index(&self, n_tau_idx: usize, n_sigma_idx: usize) -> usize {
        debug_assert!(n_tau_idx < self.n_tau && n_sigma_idx < self.n_sigma);
        n_tau_idx * self.n_sigma + n_sigma_idx
    }

    /// Inverse of [`GridSpec::index`].
    #[inline]
    pub fn coords(&self, flat: usize) -> (usize, usize) {
        (flat / self.n_sigma, flat % self.n_sigma)
    }

    pub fn tau(&self, n_tau_idx: usize) -> f64 {
        self.tau_interval[0] + n_tau_idx as f64 * self.d_tau()
    }

    pub fn sigma(&self, n_sigma_idx: usize) -> f64 {
        self.sigma_interval[0] + n_sigma_idx as f64 * self.d_sigma()
    }

    pub fn tau_points(&self) -> Vec<f64> {
        (0..self.n_tau).map(|i| self.tau(i)).collect()
    }

    pub fn sigma_points(&self) -> Vec<f64> {
        (0..self.n_sigma).map(|j| self.sigma(j)).collect()
    }

    /// Samples `f(tau, sigma)` into a flat array.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let taus = self.tau_points();
        let sigmas = self.sigma_points();
        let mut out = Vec::with_capacity(self.total_volume());
        for &tau in &taus {
            for &sigma in &sigmas {
                out.push(f(tau, sigma));
            }
        }
        out
    }

    /// Contiguous range of flat indices belonging to one `tau` slice.
    pub fn tau_slice(&self, n_tau_idx: usize) -> std::ops::Range<usize> {
        let start = n_tau_idx * self.n_sigma;
        start..start + self.n_sigma
    }

    /// Flat indices of one `sigma` column (strided).
    pub fn sigma_slice(&self, n_sigma_idx: usize) -> Vec<usize> {
        (0..self.n_tau).map(|i| self.index(i, n_sigma_idx)).collect()
    }

    /// `sqrt(d_tau² + d_sigma²)`, the spacing used in convergence fits.
    pub fn combined_spacing(&self) -> f64 {
        self.d_tau().hypot(self.d_sigma())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacings_follow_from_counts() {
        let g = GridSpec::new(60, 48, [0.0, 0.5], [0.0, 1.0]).unwrap();
        assert_eq!(g.d_tau(), 0.5 / 59.0);
        assert_eq!(g.d_sigma(), 1.0 / 47.0);
        assert!((g.d_tau() - 1.0 / 118.0).abs() < 1e-16);
        assert_eq!(g.total_volume(), 2880);
    }

    #[test]
    fn index_is_a_bijection() {
        let g = GridSpec::new(7, 5, [0.0, 1.0], [-1.0, 2.0]).unwrap();
        let mut seen = vec![false; g.total_volume()];
        for i in 0..g.n_tau {
            for j in 0..g.n_sigma {
                let k = g.index(i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(g.coords(k), (i, j));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn rejects_small_or_inverted_grids() {
        assert!(GridSpec::new(1, 10, [0.0, 1.0], [0.0, 1.0]).is_err());
        assert!(GridSpec::new(10, 10, [1.0, 0.0], [0.0, 1.0]).is_err());
        assert!(GridSpec::new(10, 10, [0.0, 1.0], [0.0, f64::NAN]).is_err());
    }

    #[test]
    fn endpoints_are_hit() {
        let g = GridSpec::new(11, 9, [0.25, 0.75], [0.0, 2.0]).unwrap();
        assert!((g.tau(g.n_tau - 1) - 0.75).abs() < 1e-15);
        assert!((g.sigma(g.n_sigma - 1) - 2.0).abs() < 1e-15);
    }
}
