//! Discrete Noether charge of time translations and the conventional field
//! energy, both per τ slice.

use serde::{Deserialize, Serialize};

use crate::action::Discretization;
use crate::error::{Error, Result};
use crate::problem::Setup;
use crate::solver::{precondition, solve, SolverOptions};
use crate::state::StateVector;

/// Charge per τ slice split into its parts; `q_total` is their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeSeries {
    pub tau: Vec<f64>,
    pub q_total: Vec<f64>,
    /// `H_σ D_τ t₁`
    pub q_coord: Vec<f64>,
    /// The order-`1/T` field contribution.
    pub q_field: Vec<f64>,
    /// Multiplier terms, nonzero only on the first and last slice.
    pub q_multiplier: Vec<f64>,
    /// `max |Q - Q₀| / |Q₀|`
    pub drift: f64,
    /// `max |Q - Q₀|`
    pub drift_abs: f64,
}

fn slice_sums(disc: &Discretization, f: &[f64]) -> Vec<f64> {
    let g = disc.grid();
    let hs = &disc.pair_sigma.h_diag;
    (0..g.n_tau)
        .map(|i| f[g.tau_slice(i)].iter().zip(hs).map(|(v, h)| v * h).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Noether charge of the forward branch on every slice.
pub fn noether_charge(disc: &Discretization, state: &StateVector) -> Result<ChargeSeries> {
    state.check(disc.grid())?;
    let g = disc.grid();
    let k = disc.spec.inverse_tension();
    let a = disc.d_tau.mul_vec(&state.t1);
    let b = disc.d_sigma.mul_vec(&state.t1);
    let c = disc.d_tau.mul_vec(&state.phi1);
    let e = disc.d_sigma.mul_vec(&state.phi1);
    let field: Vec<f64> = (0..a.len())
        .map(|n| k * (e[n] * e[n] * a[n] - c[n] * e[n] * b[n]))
        .collect();
    let q_coord = slice_sums(disc, &a);
    let q_field = slice_sums(disc, &field);
    let ht = &disc.pair_tau.h_diag;
    let hs = &disc.pair_sigma.h_diag;
    let mut q_multiplier = vec![0.0; g.n_tau];
    q_multiplier[0] += dot(hs, &state.lamt_t) / ht[0];
    q_multiplier[g.n_tau - 1] += dot(hs, &state.gamt_t) / ht[g.n_tau - 1];
    let q_total: Vec<f64> = (0..g.n_tau).map(|i| q_coord[i] + q_field[i] + q_multiplier[i]).collect();
    let q0 = q_total[0];
    let drift_abs = q_total.iter().map(|q| (q - q0).abs()).fold(0.0, f64::max);
    if !drift_abs.is_finite() {
        return Err(Error::NonFinite("Noether charge"));
    }
    Ok(ChargeSeries {
        tau: g.tau_points(),
        drift: if q0 != 0.0 { drift_abs / q0.abs() } else { drift_abs },
        drift_abs,
        q_total,
        q_coord,
        q_field,
        q_multiplier,
    })
}

/// `½ H_σ [(D_τφ / D_τt)² + (D_σφ)²]` per slice for the forward branch.
pub fn conventional_energy(disc: &Discretization, state: &StateVector) -> Result<Vec<f64>> {
    state.check(disc.grid())?;
    let a = disc.d_tau.mul_vec(&state.t1);
    if let Some(n) = a.iter().position(|v| v.abs() < 1e-12) {
        return Err(Error::DegenerateTimeMap { index: n, value: a[n] });
    }
    let c = disc.d_tau.mul_vec(&state.phi1);
    let e = disc.d_sigma.mul_vec(&state.phi1);
    let density: Vec<f64> = (0..a.len())
        .map(|n| 0.5 * ((c[n] / a[n]).powi(2) + e[n] * e[n]))
        .collect();
    Ok(slice_sums(disc, &density))
}

/// One row of a `ṫ_IC` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub t_dot_ic: f64,
    pub n_tau: usize,
    pub n_sigma: usize,
    /// `Q` on the first slice.
    pub q0: f64,
    pub drift: f64,
    pub drift_abs: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the entry could not be solved at all.
    pub error: Option<String>,
}

/// `n_tau` scaled with the clock rate so that the physical time step stays
/// close to the template's.
pub fn scaled_n_tau(template_n_tau: usize, template_t_dot: f64, t_dot: f64) -> usize {
    (template_n_tau as f64 * t_dot / template_t_dot).round() as usize
}

/// Solves `setup` and summarizes its charge. Failures are reported in the
/// returned row.
pub fn drift_point(setup: &Setup, options: &SolverOptions) -> DriftPoint {
    let mut row = DriftPoint {
        t_dot_ic: setup.t_dot_ic,
        n_tau: setup.grid.n_tau,
        n_sigma: setup.grid.n_sigma,
        q0: f64::NAN,
        drift: f64::NAN,
        drift_abs: f64::NAN,
        iterations: 0,
        converged: false,
        error: None,
    };
    let run = || -> Result<_> {
        if !(setup.t_dot_ic > 0.0) {
            return Err(Error::InvalidProblem(format!("t_dot_ic must be positive, got {}", setup.t_dot_ic)));
        }
        let (spec, x0) = precondition(setup)?;
        let disc = Discretization::new(&spec)?;
        solve(&disc, &x0, options)
    };
    match run() {
        Ok(rep) => {
            row.q0 = rep.charges.q_total[0];
            row.drift = rep.charges.drift;
            row.drift_abs = rep.charges.drift_abs;
            row.iterations = rep.iterations;
            row.converged = rep.converged;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs `template` once per clock rate, with `n_tau` scaled by
/// [`scaled_n_tau`]. A failed entry does not stop the sweep.
pub fn noether_drift_sweep(template: &Setup, t_dot_values: &[f64], options: &SolverOptions) -> Vec<DriftPoint> {
    t_dot_values
        .iter()
        .map(|&v| drift_point(&sweep_setup(template, v), options))
        .collect()
}

/// The setup of one sweep entry.
pub fn sweep_setup(template: &Setup, t_dot: f64) -> Setup {
    let mut s = template.clone();
    s.t_dot_ic = t_dot;
    s.grid.n_tau = scaled_n_tau(template.grid.n_tau, template.t_dot_ic, t_dot);
    s
}
