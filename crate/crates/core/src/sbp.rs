//! Summation-by-parts operators.
//!
//! One-dimensional quadrature/derivative pairs `(h, d)` with `q = h·d`
//! satisfying `q + qᵀ = diag[-1, 0, …, 0, 1]`, their tensor-product lifts to
//! the `(tau, sigma)` grid, and the boundary-penalized ("regularized")
//! derivatives that remove the spurious π-mode from quadratic actions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::grid::GridSpec;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SbpOrder {
    /// Second order interior, first order at the boundary (trapezoidal norm).
    Sbp121,
    /// Fourth order interior, second order at the boundary.
    Sbp242,
}

impl SbpOrder {
    pub fn min_points(self) -> usize {
        match self {
            SbpOrder::Sbp121 => 4,
            // two 4-row corner closures must not overlap
            SbpOrder::Sbp242 => 8,
        }
    }

    pub fn interior_order(self) -> u32 {
        match self {
            SbpOrder::Sbp121 => 2,
            SbpOrder::Sbp242 => 4,
        }
    }

    pub fn boundary_order(self) -> u32 {
        match self {
            SbpOrder::Sbp121 => 1,
            SbpOrder::Sbp242 => 2,
        }
    }

    /// Rows at each end that carry the boundary closure.
    pub fn closure_rows(self) -> usize {
        match self {
            SbpOrder::Sbp121 => 1,
            SbpOrder::Sbp242 => 4,
        }
    }
}

impl fmt::Display for SbpOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SbpOrder::Sbp121 => f.write_str("SBP121"),
            SbpOrder::Sbp242 => f.write_str("SBP242"),
        }
    }
}

impl std::str::FromStr for SbpOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sbp121" => Ok(SbpOrder::Sbp121),
            "sbp242" => Ok(SbpOrder::Sbp242),
            other => Err(format!("unknown SBP order '{other}' (expected sbp121 or sbp242)")),
        }
    }
}

#[rustfmt::skip]
const SBP242_H: [f64; 4] = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];

// Left closure of the 2-4 operator (unit spacing). Row 3, column 2 is -59/98;
// that value is forced by q + qᵀ = diag[-1, 0, …, 0, 1] given h[3] = 49/48.
#[rustfmt::skip]
const SBP242_D: [[f64; 6]; 4] = [
    [-24.0 / 17.0, 59.0 / 34.0, -4.0 / 17.0, -3.0 / 34.0, 0.0, 0.0],
    [-1.0 / 2.0, 0.0, 1.0 / 2.0, 0.0, 0.0, 0.0],
    [4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0, 0.0],
    [3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0],
];

#[rustfmt::skip]
const SBP242_INTERIOR: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];

/// One-dimensional quadrature weights and derivative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpPair {
    pub order: SbpOrder,
    pub n: usize,
    pub spacing: f64,
    pub h_diag: Vec<f64>,
    pub d_matrix: CsrMatrix,
}

impl SbpPair {
    /// `q = diag(h)·d`
    pub fn q_matrix(&self) -> CsrMatrix {
        CsrMatrix::diagonal(&self.h_diag).matmul(&self.d_matrix)
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.d_matrix.mul_vec(f)
    }

    /// Discrete inner product `fᵀ·h·g`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.h_diag
            .iter()
            .zip(f.iter().zip(g))
            .map(|(h, (a, b))| h * a * b)
            .sum()
    }
}

pub fn build_sbp_1d(order: SbpOrder, n: usize, spacing: f64) -> Result<SbpPair> {
    if n < order.min_points() {
        return Err(Error::TooFewPoints {
            order,
            min: order.min_points(),
            n,
        });
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
    }
    let inv = 1.0 / spacing;
    let mut trip = Vec::new();
    let mut h = vec![spacing; n];

    match order {
        SbpOrder::Sbp121 => {
            h[0] = 0.5 * spacing;
            h[n - 1] = 0.5 * spacing;
            trip.push((0, 0, -inv));
            trip.push((0, 1, inv));
            for i in 1..n - 1 {
                trip.push((i, i - 1, -0.5 * inv));
                trip.push((i, i + 1, 0.5 * inv));
            }
            trip.push((n - 1, n - 2, -inv));
            trip.push((n - 1, n - 1, inv));
        }
        SbpOrder::Sbp242 => {
            for (i, &w) in SBP242_H.iter().enumerate() {
                h[i] = w * spacing;
                h[n - 1 - i] = w * spacing;
            }
            for (i, row) in SBP242_D.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        trip.push((i, j, v * inv));
                        // the right closure is the point reflection of the left one
                        trip.push((n - 1 - i, n - 1 - j, -v * inv));
                    }
                }
            }
            for i in 4..n - 4 {
                for (k, &v) in SBP242_INTERIOR.iter().enumerate() {
                    if v != 0.0 {
                        trip.push((i, i + k - 2, v * inv));
                    }
                }
            }
        }
    }

    Ok(SbpPair {
        order,
        n,
        spacing,
        h_diag: h,
        d_matrix: CsrMatrix::from_triplets(n, n, trip),
    })
}

/// `D_tau = d_tau ⊗ 1`
pub fn lift_tau(pair: &SbpPair, grid: &GridSpec) -> Result<CsrMatrix> {
    check_len("lift_tau: pair size vs n_tau", grid.n_tau, pair.n)?;
    Ok(CsrMatrix::kron(&pair.d_matrix, &CsrMatrix::identity(grid.n_sigma)))
}

/// `D_sigma = 1 ⊗ d_sigma`
pub fn lift_sigma(pair: &SbpPair, grid: &GridSpec) -> Result<CsrMatrix> {
    check_len("lift_sigma: pair size vs n_sigma", grid.n_sigma, pair.n)?;
    Ok(CsrMatrix::kron(&CsrMatrix::identity(grid.n_tau), &pair.d_matrix))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Tau,
    Sigma,
}

impl Direction {
    /// Flat indices of the first slice in this direction, the one that
    /// receives the penalty.
    pub fn penalized_indices(self, grid: &GridSpec) -> Vec<usize> {
        match self {
            Direction::Tau => grid.tau_slice(0).collect(),
            Direction::Sigma => grid.sigma_slice(0),
        }
    }
}

/// Regularized derivative `f ↦ linear·f + offset` with
/// `linear = D + S` and `offset = -S·f_bnd`.
///
/// Equivalent to the augmented `(N+1)×(N+1)` matrix acting on `[f; 1]`, see
/// [`AffineOp::to_augmented`].
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOp {
    pub linear: CsrMatrix,
    pub offset: Vec<f64>,
    pub direction: Direction,
}

impl AffineOp {
    /// Wraps an unpenalized operator (zero offset).
    pub fn plain(linear: CsrMatrix, direction: Direction) -> Self {
        let offset = vec![0.0; linear.nrows()];
        Self {
            linear,
            offset,
            direction,
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = self.linear.mul_vec(f);
        out.iter_mut().zip(&self.offset).for_each(|(o, c)| *o += c);
        out
    }

    pub fn dim(&self) -> usize {
        self.linear.nrows()
    }

    /// Affine-coordinate form: the linear part in the top-left block, the
    /// offset as the last column and a unit in the bottom-right corner.
    pub fn to_augmented(&self) -> CsrMatrix {
        let n = self.dim();
        let trip = self
            .linear
            .triplets()
            .chain(self.offset.iter().enumerate().map(|(i, &v)| (i, n, v)))
            .chain(std::iter::once((n, n, 1.0)));
        CsrMatrix::from_triplets(n + 1, n + 1, trip)
    }
}

/// Adds the boundary penalty `sigma0·h⁻¹·E⁰ (f - f_bnd)` on the first slice of
/// `direction`. `pair` supplies the one-dimensional weights along `direction`.
pub fn regularize(
    base: &CsrMatrix,
    pair: &SbpPair,
    grid: &GridSpec,
    direction: Direction,
    boundary_data: &[f64],
    sigma0: f64,
) -> Result<AffineOp> {
    let tv = grid.total_volume();
    check_len("regularize: base rows", tv, base.nrows())?;
    check_len("regularize: base cols", tv, base.ncols())?;
    check_len("regularize: boundary data", tv, boundary_data.len())?;
    let along = match direction {
        Direction::Tau => grid.n_tau,
        Direction::Sigma => grid.n_sigma,
    };
    check_len("regularize: pair size", along, pair.n)?;

    let penalized = direction.penalized_indices(grid);
    let mut on_slice = vec![false; tv];
    penalized.iter().for_each(|&k| on_slice[k] = true);
    if let Some(index) = (0..tv).find(|&k| !on_slice[k] && boundary_data[k] != 0.0) {
        return Err(Error::BoundaryDataOffSlice { index });
    }

    let weight = sigma0 / pair.h_diag[0];
    let penalty = CsrMatrix::from_triplets(tv, tv, penalized.iter().map(|&k| (k, k, weight)));
    let mut offset = vec![0.0; tv];
    for &k in &penalized {
        offset[k] = -weight * boundary_data[k];
    }
    Ok(AffineOp {
        linear: base.add(&penalty),
        offset,
        direction,
    })
}

/// Places `f` on the penalized slice of `direction` and zero elsewhere, the
/// layout [`regularize`] expects for its boundary data.
pub fn boundary_data_from_slice(grid: &GridSpec, direction: Direction, values: &[f64]) -> Result<Vec<f64>> {
    let idx = direction.penalized_indices(grid);
    check_len("boundary slice values", idx.len(), values.len())?;
    let mut out = vec![0.0; grid.total_volume()];
    for (&k, &v) in idx.iter().zip(values) {
        out[k] = v;
    }
    Ok(out)
}

/// Discrete delta along `tau`: `h_tau⁻¹ e_k`.
pub fn discrete_delta_tau(grid: &GridSpec, pair: &SbpPair, k: usize) -> Result<Vec<f64>> {
    check_len("discrete_delta_tau: pair size", grid.n_tau, pair.n)?;
    if k >= grid.n_tau {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: grid.n_tau,
        });
    }
    let mut delta = vec![0.0; grid.n_tau];
    delta[k] = 1.0 / pair.h_diag[k];
    Ok(delta)
}

/// Full `(tau, sigma)` quadrature weights `h_tau ⊗ h_sigma` as a flat array.
pub fn full_quadrature(h_tau: &[f64], h_sigma: &[f64]) -> Vec<f64> {
    h_tau
        .iter()
        .flat_map(|&a| h_sigma.iter().map(move |&b| a * b))
        .collect()
}

/// Slice-wise spatial integration: `n_tau × total_volume`, row `i` holds
/// `h_sigmaᵀ` on the columns of slice `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialQuadrature {
    pub matrix: CsrMatrix,
    pub h_sigma: Vec<f64>,
}

impl SpatialQuadrature {
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(f)
    }
}

pub fn spatial_quadrature(grid: &GridSpec, pair_sigma: &SbpPair) -> Result<SpatialQuadrature> {
    check_len("spatial_quadrature: pair size", grid.n_sigma, pair_sigma.n)?;
    let trip = (0..grid.n_tau).flat_map(|i| {
        pair_sigma
            .h_diag
            .iter()
            .enumerate()
            .map(move |(j, &w)| (i, i * grid.n_sigma + j, w))
    });
    Ok(SpatialQuadrature {
        matrix: CsrMatrix::from_triplets(grid.n_tau, grid.total_volume(), trip.collect::<Vec<_>>()),
        h_sigma: pair_sigma.h_diag.clone(),
    })
}
