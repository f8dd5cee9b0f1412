//! Discrete doubled-branch action with Lagrange-multiplier constraints, its
//! exact gradient and its Hessian.
//!
//! Per branch the bulk density is
//!
//! ```text
//! L = ½ { (1 - k V(φ)) ṫ² + k [ φ̇² (t′² - 1) - 2 φ′ φ̇ ṫ t′ + φ′² ṫ² ] },   k = 1/T
//! ```
//!
//! with `ṫ = D̄ᵗ_τ t`, `t′ = D_σ t`, `φ̇ = D̄ᵠ_τ φ` and `φ′ = D̄ᵠ_σ φ`. The action
//! is the forward bulk term minus the backward one plus `Σ wᵢ μᵢ gᵢ` for every
//! multiplier block `μ` with constraint values `g` and quadrature weights `w`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Result};
use crate::grid::GridSpec;
use crate::problem::ProblemSpec;
use crate::sbp::{
    boundary_data_from_slice, build_sbp_1d, full_quadrature, lift_sigma, lift_tau, regularize,
    AffineOp, Direction, SbpPair,
};
use crate::sparse::CsrMatrix;
use crate::state::{Layout, StateVector};

/// Pointwise potential `V(φ)` returning `(V, V′, V″)`.
pub type Potential = Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Forward,
    Backward,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Forward => 1.0,
            Branch::Backward => -1.0,
        }
    }
}

/// First derivatives entering the density at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    /// `ṫ`
    pub a: f64,
    /// `t′`
    pub b: f64,
    /// `φ̇`
    pub c: f64,
    /// `φ′`
    pub e: f64,
    /// `φ`
    pub f: f64,
}

/// Value and partial derivatives of the density with respect to `(a, b, c, e, f)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DensityDerivs {
    pub value: f64,
    pub grad: [f64; 5],
    /// Upper triangle of the symmetric 5×5 Hessian, row-major:
    /// `aa ab ac ae af bb bc be bf cc ce cf ee ef ff`.
    pub hess: [f64; 15],
}

/// Position of `(i, j)` (with `i <= j`) in [`DensityDerivs::hess`].
pub const fn hess_index(i: usize, j: usize) -> usize {
    // row offsets of a 5×5 upper triangle
    const OFF: [usize; 5] = [0, 5, 9, 12, 14];
    OFF[i] + (j - i)
}

pub fn density(k: f64, jet: Jet, potential: Option<&Potential>) -> f64 {
    let Jet { a, b, c, e, f } = jet;
    let v = potential.map_or(0.0, |p| p(f).0);
    0.5 * ((1.0 - k * v) * a * a + k * (c * c * (b * b - 1.0) - 2.0 * e * c * a * b + e * e * a * a))
}

pub fn density_derivs(k: f64, jet: Jet, potential: Option<&Potential>) -> DensityDerivs {
    let Jet { a, b, c, e, f } = jet;
    let (v, v1, v2) = potential.map_or((0.0, 0.0, 0.0), |p| p(f));
    let mut h = [0.0; 15];
    h[hess_index(0, 0)] = 1.0 - k * v + k * e * e;
    h[hess_index(0, 1)] = -k * e * c;
    h[hess_index(0, 2)] = -k * e * b;
    h[hess_index(0, 3)] = k * (2.0 * e * a - c * b);
    h[hess_index(0, 4)] = -k * v1 * a;
    h[hess_index(1, 1)] = k * c * c;
    h[hess_index(1, 2)] = k * (2.0 * c * b - e * a);
    h[hess_index(1, 3)] = -k * c * a;
    h[hess_index(2, 2)] = k * (b * b - 1.0);
    h[hess_index(2, 3)] = -k * a * b;
    h[hess_index(3, 3)] = k * a * a;
    h[hess_index(4, 4)] = -0.5 * k * v2 * a * a;
    DensityDerivs {
        value: density(k, jet, potential),
        grad: [
            (1.0 - k * v) * a + k * (e * e * a - e * c * b),
            k * (c * c * b - e * c * a),
            k * (c * (b * b - 1.0) - e * a * b),
            k * (e * a * a - c * a * b),
            -0.5 * k * v1 * a * a,
        ],
        hess: h,
    }
}

/// Components `g_ττ, g_τσ, g_σσ` of the induced metric for the map
/// `(t, x)(τ, σ)` in a flat background `diag(-c², 1)`.
pub fn induced_metric(t_dot: f64, t_prime: f64, x_dot: f64, x_prime: f64, c: f64) -> [f64; 3] {
    let c2 = c * c;
    [
        -c2 * t_dot * t_dot + x_dot * x_dot,
        -c2 * t_dot * t_prime + x_dot * x_prime,
        -c2 * t_prime * t_prime + x_prime * x_prime,
    ]
}

pub fn metric_det([g00, g01, g11]: [f64; 3]) -> f64 {
    g00 * g11 - g01 * g01
}

/// `adj[g]` of a symmetric 2×2 metric, in the same packed layout.
pub fn metric_adjugate([g00, g01, g11]: [f64; 3]) -> [f64; 3] {
    [g11, -g01, g00]
}

/// `-c² (ṫ x′ - ẋ t′)²`
pub fn metric_det_reduced(t_dot: f64, t_prime: f64, x_dot: f64, x_prime: f64, c: f64) -> f64 {
    let j = t_dot * x_prime - x_dot * t_prime;
    -c * c * j * j
}

/// Derivative fields of one branch plus the induced metric (`x = σ`).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricBundle {
    pub branch: Branch,
    pub t_dot: Vec<f64>,
    pub t_prime: Vec<f64>,
    pub phi_dot: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub g: Vec<[f64; 3]>,
    pub det_g: Vec<f64>,
    pub adj_g: Vec<[f64; 3]>,
}

/// One multiplier block: `gᵢ = Σ coeff · x[col] - rhsᵢ`, contributing
/// `Σ wᵢ μᵢ gᵢ` to the action.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintBlock {
    pub name: &'static str,
    /// Index of the multiplier block in the state layout.
    pub block: usize,
    pub weights: Vec<f64>,
    /// Rows over flat primal indices.
    pub rows: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl ConstraintBlock {
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.rows.mul_vec(x);
        g.iter_mut().zip(&self.rhs).for_each(|(v, r)| *v -= r);
        g
    }
}

/// Max-norms of all constraint violations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    pub initial_value_t: f64,
    pub initial_value_phi: f64,
    pub initial_derivative_t: f64,
    pub initial_derivative_phi: f64,
    pub connecting_value_t: f64,
    pub connecting_value_phi: f64,
    pub connecting_derivative_t: f64,
    pub connecting_derivative_phi: f64,
    pub dirichlet_phi: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        [
            self.initial_value_t,
            self.initial_value_phi,
            self.initial_derivative_t,
            self.initial_derivative_phi,
            self.connecting_value_t,
            self.connecting_value_phi,
            self.connecting_derivative_t,
            self.connecting_derivative_phi,
            self.dirichlet_phi,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Split of the action value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionParts {
    pub bulk_forward: f64,
    pub bulk_backward: f64,
    pub multipliers: f64,
}

impl ActionParts {
    pub fn total(&self) -> f64 {
        self.bulk_forward - self.bulk_backward + self.multipliers
    }
}

/// All operators and constraint rows of one problem, built once.
#[derive(Clone)]
pub struct Discretization {
    pub spec: ProblemSpec,
    pub layout: Layout,
    pub pair_tau: SbpPair,
    pub pair_sigma: SbpPair,
    /// Diagonal of `H = h_τ ⊗ h_σ`.
    pub weights: Vec<f64>,
    pub d_tau: CsrMatrix,
    pub d_sigma: CsrMatrix,
    /// `D̄ᵗ_τ`, penalized with `t_IC`.
    pub dt_t: AffineOp,
    /// `D̄ᵠ_τ`, penalized with `φ_IC`.
    pub dt_phi: AffineOp,
    /// `D̄ᵠ_σ`, penalized with the left Dirichlet data.
    pub ds_phi: AffineOp,
    pub constraints: Vec<ConstraintBlock>,
    potential: Option<Potential>,
    identity: CsrMatrix,
}

impl std::fmt::Debug for Discretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization")
            .field("grid", &self.spec.grid)
            .field("order", &self.spec.order)
            .field("unknowns", &self.layout.len())
            .field("potential", &self.potential.is_some())
            .finish()
    }
}

impl Discretization {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let grid = &spec.grid;
        let pair_tau = build_sbp_1d(spec.order, grid.n_tau, grid.d_tau())?;
        let pair_sigma = build_sbp_1d(spec.order, grid.n_sigma, grid.d_sigma())?;
        let d_tau = lift_tau(&pair_tau, grid)?;
        let d_sigma = lift_sigma(&pair_sigma, grid)?;

        let t_bnd = boundary_data_from_slice(grid, Direction::Tau, &spec.t_ic)?;
        let phi_bnd = boundary_data_from_slice(grid, Direction::Tau, &spec.phi_ic)?;
        let left_bnd = boundary_data_from_slice(grid, Direction::Sigma, &spec.phi_bc_left)?;
        let dt_t = regularize(&d_tau, &pair_tau, grid, Direction::Tau, &t_bnd, spec.sigma0)?;
        let dt_phi = regularize(&d_tau, &pair_tau, grid, Direction::Tau, &phi_bnd, spec.sigma0)?;
        let ds_phi = regularize(&d_sigma, &pair_sigma, grid, Direction::Sigma, &left_bnd, spec.sigma0)?;

        let layout = Layout::new(grid);
        let constraints = build_constraints(spec, &layout, &pair_tau, &pair_sigma, &d_tau);
        Ok(Self {
            spec: spec.clone(),
            weights: full_quadrature(&pair_tau.h_diag, &pair_sigma.h_diag),
            identity: CsrMatrix::identity(grid.total_volume()),
            layout,
            pair_tau,
            pair_sigma,
            d_tau,
            d_sigma,
            dt_t,
            dt_phi,
            ds_phi,
            constraints,
            potential: None,
        })
    }

    /// Attaches a pointwise potential. Acceptance runs use none.
    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = Some(potential);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.spec.grid
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    fn k(&self) -> f64 {
        self.spec.inverse_tension()
    }

    fn check_flat(&self, x: &[f64]) -> Result<()> {
        check_len("flat state", self.dim(), x.len())?;
        check_finite("state", x)
    }

    fn check_field(&self, what: &'static str, v: &[f64]) -> Result<()> {
        check_len(what, self.grid().total_volume(), v.len())?;
        check_finite(what, v)
    }

    /// `(ṫ, t′, φ̇, φ′)` of one branch.
    pub fn derivatives(&self, t: &[f64], phi: &[f64]) -> [Vec<f64>; 4] {
        [
            self.dt_t.apply(t),
            self.d_sigma.mul_vec(t),
            self.dt_phi.apply(phi),
            self.ds_phi.apply(phi),
        ]
    }

    fn jets(&self, t: &[f64], phi: &[f64]) -> Vec<Jet> {
        let [a, b, c, e] = self.derivatives(t, phi);
        (0..t.len())
            .map(|k| Jet {
                a: a[k],
                b: b[k],
                c: c[k],
                e: e[k],
                f: phi[k],
            })
            .collect()
    }

    /// Quadrature of the density over one branch (no sign, no multipliers).
    pub fn bulk_action(&self, t: &[f64], phi: &[f64]) -> Result<f64> {
        self.check_field("t", t)?;
        self.check_field("phi", phi)?;
        let k = self.k();
        Ok(self
            .jets(t, phi)
            .into_iter()
            .zip(&self.weights)
            .map(|(j, w)| w * density(k, j, self.potential.as_ref()))
            .sum())
    }

    pub fn action_parts(&self, state: &StateVector) -> Result<ActionParts> {
        state.check(self.grid())?;
        let x = state.pack();
        self.check_flat(&x)?;
        Ok(ActionParts {
            bulk_forward: self.bulk_action(&state.t1, &state.phi1)?,
            bulk_backward: self.bulk_action(&state.t2, &state.phi2)?,
            multipliers: self.multiplier_terms(&x),
        })
    }

    pub fn action(&self, state: &StateVector) -> Result<f64> {
        Ok(self.action_parts(state)?.total())
    }

    pub fn action_flat(&self, x: &[f64]) -> Result<f64> {
        self.action(&StateVector::unpack(self.grid(), x)?)
    }

    fn multiplier_terms(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let mu = &x[self.layout.block(c.block)];
                c.values(x)
                    .iter()
                    .zip(mu)
                    .zip(&c.weights)
                    .map(|((g, m), w)| w * m * g)
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn gradient(&self, state: &StateVector) -> Result<Vec<f64>> {
        state.check(self.grid())?;
        self.gradient_flat(&state.pack())
    }

    pub fn gradient_flat(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_flat(x)?;
        let tv = self.grid().total_volume();
        let k = self.k();
        let mut grad = vec![0.0; self.dim()];
        for (branch, t0, p0) in [(Branch::Forward, 0, 2 * tv), (Branch::Backward, tv, 3 * tv)] {
            let s = branch.sign();
            let (t, phi) = (&x[t0..t0 + tv], &x[p0..p0 + tv]);
            let mut la = vec![0.0; tv];
            let mut lb = vec![0.0; tv];
            let mut lc = vec![0.0; tv];
            let mut le = vec![0.0; tv];
            for (kk, jet) in self.jets(t, phi).into_iter().enumerate() {
                let d = density_derivs(k, jet, self.potential.as_ref());
                let w = s * self.weights[kk];
                la[kk] = w * d.grad[0];
                lb[kk] = w * d.grad[1];
                lc[kk] = w * d.grad[2];
                le[kk] = w * d.grad[3];
                grad[p0 + kk] += w * d.grad[4];
            }
            let gt = self.dt_t.linear.tr_mul_vec(&la);
            let gt2 = self.d_sigma.tr_mul_vec(&lb);
            let gp = self.dt_phi.linear.tr_mul_vec(&lc);
            let gp2 = self.ds_phi.linear.tr_mul_vec(&le);
            for i in 0..tv {
                grad[t0 + i] += gt[i] + gt2[i];
                grad[p0 + i] += gp[i] + gp2[i];
            }
        }
        for c in &self.constraints {
            let range = self.layout.block(c.block);
            let g = c.values(x);
            let wmu: Vec<f64> = x[range.clone()].iter().zip(&c.weights).map(|(m, w)| m * w).collect();
            for (i, r) in range.enumerate() {
                grad[r] += c.weights[i] * g[i];
            }
            for (col, v) in c.rows.tr_mul_vec(&wmu).into_iter().enumerate() {
                grad[col] += v;
            }
        }
        Ok(grad)
    }

    /// Emits every Hessian entry as `(row, col, value)`. The sequence of
    /// `(row, col)` pairs depends only on the discretization, never on `x`,
    /// so a sparsity pattern computed once stays valid. Duplicates are to be
    /// summed.
    pub fn hessian_entries(&self, x: &[f64], mut sink: impl FnMut(usize, usize, f64)) -> Result<()> {
        self.check_flat(x)?;
        let tv = self.grid().total_volume();
        let k = self.k();
        let ops: [&CsrMatrix; 5] = [
            &self.dt_t.linear,
            &self.d_sigma,
            &self.dt_phi.linear,
            &self.ds_phi.linear,
            &self.identity,
        ];
        for (branch, t0, p0) in [(Branch::Forward, 0, 2 * tv), (Branch::Backward, tv, 3 * tv)] {
            let s = branch.sign();
            let (t, phi) = (&x[t0..t0 + tv], &x[p0..p0 + tv]);
            let derivs: Vec<DensityDerivs> = self
                .jets(t, phi)
                .into_iter()
                .map(|j| density_derivs(k, j, self.potential.as_ref()))
                .collect();
            // slots 0,1 act on t; 2,3,4 act on φ
            let offset = |slot: usize| if slot < 2 { t0 } else { p0 };
            let n_slots = if self.potential.is_some() { 5 } else { 4 };
            for i in 0..n_slots {
                for j in i..n_slots {
                    let hi = hess_index(i, j);
                    let (oi, oj) = (offset(i), offset(j));
                    let (pi, pj) = (ops[i], ops[j]);
                    for (kk, d) in derivs.iter().enumerate() {
                        let coef = s * self.weights[kk] * d.hess[hi];
                        for (ci, vi) in pi.row(kk) {
                            for (cj, vj) in pj.row(kk) {
                                let v = coef * vi * vj;
                                sink(oi + ci, oj + cj, v);
                                if i != j {
                                    sink(oj + cj, oi + ci, v);
                                }
                            }
                        }
                    }
                }
            }
        }
        for c in &self.constraints {
            let start = self.layout.block(c.block).start;
            for (r, col, v) in c.rows.triplets() {
                let w = c.weights[r] * v;
                sink(start + r, col, w);
                sink(col, start + r, w);
            }
        }
        Ok(())
    }

    /// Hessian as a sparse matrix (duplicates summed, zeros dropped).
    pub fn hessian(&self, x: &[f64]) -> Result<CsrMatrix> {
        let mut trip = Vec::new();
        self.hessian_entries(x, |r, c, v| trip.push((r, c, v)))?;
        Ok(CsrMatrix::from_triplets(self.dim(), self.dim(), trip))
    }

    pub fn metric_bundle(&self, t: &[f64], phi: &[f64], branch: Branch) -> Result<MetricBundle> {
        self.check_field("t", t)?;
        self.check_field("phi", phi)?;
        let [t_dot, t_prime, phi_dot, phi_prime] = self.derivatives(t, phi);
        let c = self.spec.wave_speed;
        let g: Vec<[f64; 3]> = t_dot
            .iter()
            .zip(&t_prime)
            .map(|(&a, &b)| induced_metric(a, b, 0.0, 1.0, c))
            .collect();
        let det_g = t_dot.iter().map(|&a| -c * c * a * a).collect();
        let adj_g = g.iter().map(|&m| metric_adjugate(m)).collect();
        Ok(MetricBundle {
            branch,
            t_dot,
            t_prime,
            phi_dot,
            phi_prime,
            g,
            det_g,
            adj_g,
        })
    }

    pub fn constraint_residuals(&self, state: &StateVector) -> Result<ConstraintResiduals> {
        state.check(self.grid())?;
        let x = state.pack();
        let norm = |name: &str| -> f64 {
            self.constraints
                .iter()
                .filter(|c| c.name == name)
                .flat_map(|c| c.values(&x))
                .fold(0.0, |m: f64, v| m.max(v.abs()))
        };
        Ok(ConstraintResiduals {
            initial_value_t: norm("lam_t"),
            initial_value_phi: norm("lam_phi"),
            initial_derivative_t: norm("lamt_t"),
            initial_derivative_phi: norm("lamt_phi"),
            connecting_value_t: norm("gam_t"),
            connecting_value_phi: norm("gam_phi"),
            connecting_derivative_t: norm("gamt_t"),
            connecting_derivative_phi: norm("gamt_phi"),
            dirichlet_phi: ["kap_phi", "kapt_phi", "xi_phi", "xit_phi"]
                .into_iter()
                .map(norm)
                .fold(0.0, f64::max),
        })
    }
}

fn build_constraints(
    spec: &ProblemSpec,
    layout: &Layout,
    pair_tau: &SbpPair,
    pair_sigma: &SbpPair,
    d_tau: &CsrMatrix,
) -> Vec<ConstraintBlock> {
    let grid = &spec.grid;
    let (nt, ns) = (grid.n_tau, grid.n_sigma);
    let n = layout.len();
    let t1 = layout.block(0).start;
    let t2 = layout.block(1).start;
    let p1 = layout.block(2).start;
    let p2 = layout.block(3).start;
    let first: Vec<usize> = grid.tau_slice(0).collect();
    let last: Vec<usize> = grid.tau_slice(nt - 1).collect();
    let left = grid.sigma_slice(0);
    let right = grid.sigma_slice(ns - 1);

    // point evaluation on a list of flat field indices of one branch
    let values = |idx: &[usize], base: usize, sign: f64| -> Vec<(usize, usize, f64)> {
        idx.iter().enumerate().map(|(r, &k)| (r, base + k, sign)).collect()
    };
    // D_τ evaluated at a list of flat field indices
    let derivs = |idx: &[usize], base: usize, sign: f64| -> Vec<(usize, usize, f64)> {
        idx.iter()
            .enumerate()
            .flat_map(|(r, &k)| d_tau.row(k).map(move |(c, v)| (r, base + c, sign * v)))
            .collect()
    };
    let block = |name: &'static str, weights: &[f64], trip: Vec<(usize, usize, f64)>, rhs: Vec<f64>| {
        let block = crate::state::BLOCKS.iter().position(|(b, _)| *b == name).expect("known block");
        ConstraintBlock {
            name,
            block,
            weights: weights.to_vec(),
            rows: CsrMatrix::from_triplets(weights.len(), n, trip),
            rhs,
        }
    };
    let concat = |a: Vec<(usize, usize, f64)>, b: Vec<(usize, usize, f64)>| a.into_iter().chain(b).collect();
    let hs = &pair_sigma.h_diag;
    let ht = &pair_tau.h_diag;
    vec![
        block("lam_t", hs, values(&first, t1, 1.0), spec.t_ic.clone()),
        block("lam_phi", hs, values(&first, p1, 1.0), spec.phi_ic.clone()),
        block("lamt_t", hs, derivs(&first, t1, 1.0), spec.t_dot_ic.clone()),
        block("lamt_phi", hs, derivs(&first, p1, 1.0), spec.phi_dot_ic.clone()),
        block("gam_t", hs, concat(values(&last, t1, 1.0), values(&last, t2, -1.0)), vec![0.0; ns]),
        block("gam_phi", hs, concat(values(&last, p1, 1.0), values(&last, p2, -1.0)), vec![0.0; ns]),
        block("gamt_t", hs, concat(derivs(&last, t1, 1.0), derivs(&last, t2, -1.0)), vec![0.0; ns]),
        block("gamt_phi", hs, concat(derivs(&last, p1, 1.0), derivs(&last, p2, -1.0)), vec![0.0; ns]),
        block("kap_phi", ht, values(&left, p1, 1.0), spec.phi_bc_left.clone()),
        block("kapt_phi", ht, values(&right, p1, 1.0), spec.phi_bc_right.clone()),
        block("xi_phi", ht, values(&left, p2, 1.0), spec.phi_bc_left.clone()),
        block("xit_phi", ht, values(&right, p2, 1.0), spec.phi_bc_right.clone()),
    ]
}

pub fn evaluate_action(spec: &ProblemSpec, state: &StateVector) -> Result<f64> {
    Discretization::new(spec)?.action(state)
}

pub fn evaluate_gradient(spec: &ProblemSpec, state: &StateVector) -> Result<Vec<f64>> {
    Discretization::new(spec)?.gradient(state)
}

pub fn metric_bundle(spec: &ProblemSpec, t: &[f64], phi: &[f64], branch: Branch) -> Result<MetricBundle> {
    Discretization::new(spec)?.metric_bundle(t, phi, branch)
}

pub fn constraint_residuals(spec: &ProblemSpec, state: &StateVector) -> Result<ConstraintResiduals> {
    Discretization::new(spec)?.constraint_residuals(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Profile, Setup};
    use crate::sbp::SbpOrder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(nt: usize, ns: usize, tension: f64, order: SbpOrder) -> Setup {
        let mut s = Setup::default().with_grid(nt, ns);
        s.tension = tension;
        s.order = order;
        s
    }

    fn random_state(disc: &Discretization, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let g = disc.grid();
        let mut st = StateVector::zeros(g);
        let taus = g.tau_points();
        for (k, v) in st.t1.iter_mut().enumerate() {
            *v = 2.5 * taus[k / g.n_sigma] + 0.1 * rng.random_range(-1.0..1.0);
        }
        st.t2 = st.t1.iter().map(|v| v + 0.05 * rng.random_range(-1.0..1.0)).collect();
        let mut x = st.pack();
        for v in x[disc.layout.block(2).start..].iter_mut() {
            *v += rng.random_range(-1.0..1.0);
        }
        x
    }

    #[test]
    fn equal_branches_cancel() {
        let spec = setup(8, 6, 1e4, SbpOrder::Sbp121).vacuum().problem().unwrap();
        let mut st = StateVector::zeros(&spec.grid);
        st.t1 = spec.grid.sample(|tau, _| 2.5 * tau);
        st.t2 = st.t1.clone();
        assert_eq!(evaluate_action(&spec, &st).unwrap(), 0.0);
    }

    #[test]
    fn bulk_of_trivial_map_is_half_the_area() {
        let mut s = setup(9, 7, 3.0, SbpOrder::Sbp121).vacuum();
        s.grid.tau_interval = [0.0, 0.75];
        s.grid.sigma_interval = [0.0, 2.0];
        s.t_dot_ic = 1.0;
        let disc = Discretization::new(&s.problem().unwrap()).unwrap();
        let t = disc.grid().sample(|tau, _| tau);
        let zero = vec![0.0; t.len()];
        let bulk = disc.bulk_action(&t, &zero).unwrap();
        assert!((bulk - 0.5 * 0.75 * 2.0).abs() < 1e-14, "{bulk}");
    }

    #[test]
    fn bulk_with_linear_field() {
        let tension = 1e4;
        let mut spec = setup(10, 8, tension, SbpOrder::Sbp242).vacuum().problem().unwrap();
        spec.t_dot_ic = vec![1.0; 8];
        spec.phi_ic = spec.grid.sigma_points();
        spec.phi_bc_right = vec![1.0; 10];
        let disc = Discretization::new(&spec).unwrap();
        let t = disc.grid().sample(|tau, _| tau);
        let phi = disc.grid().sample(|_, sigma| sigma);
        let bulk = disc.bulk_action(&t, &phi).unwrap();
        let expected = 0.5 * (1.0 + 1.0 / tension) * 0.5;
        assert!((bulk - expected).abs() < 1e-14 * expected, "{bulk} vs {expected}");
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for order in [SbpOrder::Sbp121, SbpOrder::Sbp242] {
            let (nt, ns) = if order == SbpOrder::Sbp121 { (8, 6) } else { (9, 8) };
            let mut s = setup(nt, ns, 0.7, order);
            s.phi_dot_ic = Profile::SineMode { amplitude: 0.3, mode: 2 };
            let disc = Discretization::new(&s.problem().unwrap()).unwrap();
            let x = random_state(&disc, &mut rng);
            let g = disc.gradient_flat(&x).unwrap();
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let h = 1e-6;
            for i in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (disc.action_flat(&xp).unwrap() - disc.action_flat(&xm).unwrap()) / (2.0 * h);
                let rel = (fd - g[i]).abs() / g[i].abs().max(1e-3 * scale);
                assert!(rel < 1e-6, "{order} component {i}: fd {fd} analytic {}", g[i]);
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = setup(8, 6, 0.5, SbpOrder::Sbp121);
        let disc = Discretization::new(&s.problem().unwrap()).unwrap();
        let x = random_state(&disc, &mut rng);
        let hess = disc.hessian(&x).unwrap();
        let h = 1e-6;
        for j in (0..x.len()).step_by(3) {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let gp = disc.gradient_flat(&xp).unwrap();
            let gm = disc.gradient_flat(&xm).unwrap();
            for i in 0..x.len() {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                let exact = hess.get(i, j);
                assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "({i},{j}) {fd} vs {exact}");
            }
        }
        assert!(hess.max_abs_diff(&hess.transpose()) < 1e-12);
    }

    #[test]
    fn hessian_pattern_is_independent_of_values() {
        let s = setup(8, 6, 2.0, SbpOrder::Sbp121);
        let disc = Discretization::new(&s.problem().unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let collect = |x: &[f64]| {
            let mut v = Vec::new();
            disc.hessian_entries(x, |r, c, _| v.push((r, c))).unwrap();
            v
        };
        let a = collect(&vec![0.0; disc.dim()]);
        let b = collect(&random_state(&disc, &mut rng));
        assert_eq!(a, b);
    }

    #[test]
    fn swapping_branches_negates_the_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let disc = Discretization::new(&setup(8, 6, 1.3, SbpOrder::Sbp121).problem().unwrap()).unwrap();
        let mut st = StateVector::unpack(disc.grid(), &random_state(&disc, &mut rng)).unwrap();
        st.zero_multipliers();
        let a = disc.action(&st).unwrap();
        st.swap_branches();
        assert_eq!(disc.action(&st).unwrap(), -a);
    }

    #[test]
    fn multiplier_gradient_is_weighted_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let disc = Discretization::new(&setup(8, 6, 1e4, SbpOrder::Sbp121).problem().unwrap()).unwrap();
        let x = random_state(&disc, &mut rng);
        let st = StateVector::unpack(disc.grid(), &x).unwrap();
        let g = disc.gradient_flat(&x).unwrap();
        let lam = disc.layout.by_name("lam_t").unwrap();
        for (j, r) in lam.enumerate() {
            let expected = disc.pair_sigma.h_diag[j] * (st.t1[j] - disc.spec.t_ic[j]);
            assert!((g[r] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn time_translation_leaves_bulk_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for order in [SbpOrder::Sbp121, SbpOrder::Sbp242] {
            let spec = setup(12, 9, 0.8, order).problem().unwrap();
            let disc = Discretization::new(&spec).unwrap();
            let st = StateVector::unpack(disc.grid(), &random_state(&disc, &mut rng)).unwrap();
            let before = disc.bulk_action(&st.t1, &st.phi1).unwrap() - disc.bulk_action(&st.t2, &st.phi2).unwrap();
            let shift = 3.7;
            let mut shifted = spec.clone();
            shifted.t_ic.iter_mut().for_each(|v| *v += shift);
            let d2 = Discretization::new(&shifted).unwrap();
            let t1: Vec<f64> = st.t1.iter().map(|v| v + shift).collect();
            let t2: Vec<f64> = st.t2.iter().map(|v| v + shift).collect();
            let after = d2.bulk_action(&t1, &st.phi1).unwrap() - d2.bulk_action(&t2, &st.phi2).unwrap();
            assert!((after - before).abs() <= 1e-13 * before.abs().max(1.0), "{before} {after}");
        }
    }

    #[test]
    fn trivial_maps_have_unit_determinant() {
        let spec = setup(8, 6, 1e4, SbpOrder::Sbp121).vacuum().problem().unwrap();
        let g = spec.grid.clone();
        let mut s1 = spec.clone();
        s1.t_dot_ic = vec![1.0; 6];
        let mb = metric_bundle(&s1, &g.sample(|tau, _| tau), &vec![0.0; 48], Branch::Forward).unwrap();
        assert!(mb.det_g.iter().all(|&d| (d + 1.0).abs() < 1e-13));
        assert!(mb.t_prime.iter().all(|&d| d == 0.0));
        let mb = metric_bundle(&spec, &g.sample(|tau, _| 2.5 * tau), &vec![0.0; 48], Branch::Forward).unwrap();
        assert!(mb.det_g.iter().all(|&d| (d + 6.25).abs() < 1e-12));
        for (m, a) in mb.g.iter().zip(&mb.adj_g) {
            let det = metric_det(*m);
            // g · adj[g] = det · 1
            assert!((m[0] * a[0] + m[1] * a[1] - det).abs() < 1e-12 * det.abs());
            assert!((m[0] * a[1] + m[1] * a[2]).abs() < 1e-12 * det.abs());
        }
    }

    #[test]
    fn connecting_shift_shows_in_residuals() {
        let spec = setup(8, 6, 1e4, SbpOrder::Sbp121).vacuum().problem().unwrap();
        let g = &spec.grid;
        let mut st = StateVector::zeros(g);
        st.t1 = g.sample(|tau, _| 2.5 * tau);
        st.t2 = st.t1.clone();
        let r = constraint_residuals(&spec, &st).unwrap();
        assert!(r.max() < 1e-13, "{r:?}");
        for k in g.tau_slice(g.n_tau - 1) {
            st.t1[k] += 1.0;
        }
        let r = constraint_residuals(&spec, &st).unwrap();
        assert!((r.connecting_value_t - 1.0).abs() < 1e-14);
    }

    #[test]
    fn potential_enters_gradient_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let disc = Discretization::new(&setup(8, 6, 0.9, SbpOrder::Sbp121).problem().unwrap())
            .unwrap()
            .with_potential(Arc::new(|p: f64| (0.5 * p * p + 0.1 * p.powi(4), p + 0.4 * p.powi(3), 1.0 + 1.2 * p * p)));
        let x = random_state(&disc, &mut rng);
        let g = disc.gradient_flat(&x).unwrap();
        let hess = disc.hessian(&x).unwrap();
        let h = 1e-6;
        for i in (disc.layout.block(2).start..disc.layout.block(3).end).step_by(7) {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (disc.action_flat(&xp).unwrap() - disc.action_flat(&xm).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * (1.0 + g[i].abs()));
            let gp = disc.gradient_flat(&xp).unwrap();
            let gm = disc.gradient_flat(&xm).unwrap();
            assert!(((gp[i] - gm[i]) / (2.0 * h) - hess.get(i, i)).abs() < 1e-6 * (1.0 + hess.get(i, i).abs()));
        }
    }
}
