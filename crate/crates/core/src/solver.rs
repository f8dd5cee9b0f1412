//! Newton iteration on the stationarity system `∇E(x) = 0`.
//!
//! Each step solves the KKT system with a sparse LU whose symbolic analysis
//! is computed once and reused. The matrix is symmetrically equilibrated and
//! the multiplier diagonal carries a small negative shift, which keeps the
//! factorization well posed when constraint rows are redundant (the field
//! value at a corner is fixed both by the slice and by the wall conditions).
//! Iterative refinement against the unshifted matrix removes the bias.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Pair, SparseColMat, SymbolicSparseColMat};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::action::Discretization;
use crate::error::{Error, Result};
use crate::noether::{noether_charge, ChargeSeries};
use crate::oracle::Dalembert;
use crate::problem::{ProblemSpec, Setup};
use crate::sparse::CsrMatrix;
use crate::state::StateVector;

/// A square nonlinear system `r(x) = 0` with a sparse Jacobian.
pub trait StationarityProblem {
    fn dim(&self) -> usize;

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Jacobian entries in an order that does not depend on `x`.
    /// Duplicates are summed.
    fn jacobian_entries(&self, x: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> Result<()>;

    /// Unknowns that act as Lagrange multipliers.
    fn dual_indices(&self) -> std::ops::Range<usize> {
        0..0
    }
}

impl StationarityProblem for Discretization {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.gradient_flat(x)
    }

    fn jacobian_entries(&self, x: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> Result<()> {
        self.hessian_entries(x, |r, c, v| sink(r, c, v))
    }

    fn dual_indices(&self) -> std::ops::Range<usize> {
        self.layout.multipliers()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Converged when `‖∇E‖∞` falls to this value.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Extra Newton steps taken after convergence while the residual still
    /// halves.
    pub polish_steps: usize,
    /// Shortest step length tried by the line search before falling back to
    /// Levenberg–Marquardt.
    pub min_step: f64,
    pub refinement_steps: usize,
    /// Shift on the equilibrated multiplier diagonal.
    pub dual_regularization: f64,
    pub levenberg_initial: f64,
    pub levenberg_max: f64,
    pub verbosity: u8,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            polish_steps: 3,
            min_step: 1e-4,
            refinement_steps: 4,
            dual_regularization: 1e-10,
            levenberg_initial: 1e-6,
            levenberg_max: 1e8,
            verbosity: 0,
        }
    }
}

/// Outcome of [`solve_stationarity_system`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    pub converged: bool,
    /// Accepted steps.
    pub iterations: usize,
    /// `‖r‖∞` before the first step and after every accepted step.
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub levenberg_steps: usize,
    /// Worst relative linear-solve residual seen after refinement.
    pub linear_residual: f64,
    pub message: Option<String>,
}

struct Pattern {
    symbolic: SymbolicSparseColMat<usize>,
    argsort: faer::sparse::Argsort<usize>,
    lu: SymbolicLu<usize>,
    /// Positions in the value array of the shifted diagonal entries.
    dual_diag: Vec<usize>,
    n_entries: usize,
}

struct Linearization {
    matrix: SparseColMat<usize, f64>,
    scale: Vec<f64>,
    lu: Lu<usize, f64>,
}

/// Polishing stops once the residual is this fraction of the tolerance.
const POLISH_FLOOR: f64 = 1e-4;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn collect_entries<P: StationarityProblem + ?Sized>(
    problem: &P,
    x: &[f64],
) -> Result<(Vec<Pair<usize, usize>>, Vec<f64>)> {
    let mut idx = Vec::new();
    let mut val = Vec::new();
    problem.jacobian_entries(x, &mut |r, c, v| {
        idx.push(Pair { row: r, col: c });
        val.push(v);
    })?;
    for d in problem.dual_indices() {
        idx.push(Pair { row: d, col: d });
        val.push(0.0);
    }
    Ok((idx, val))
}

fn linalg(e: impl std::fmt::Debug) -> Error {
    Error::LinearAlgebra(format!("{e:?}"))
}

impl Pattern {
    fn new(n: usize, idx: &[Pair<usize, usize>], duals: std::ops::Range<usize>) -> Result<Self> {
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, idx).map_err(linalg)?;
        let lu = SymbolicLu::try_new(symbolic.as_ref()).map_err(linalg)?;
        let col_ptr = symbolic.col_ptr();
        let row_idx = symbolic.row_idx();
        let dual_diag = duals
            .map(|d| {
                (col_ptr[d]..col_ptr[d + 1])
                    .find(|&p| row_idx[p] == d)
                    .expect("diagonal entry was inserted")
            })
            .collect();
        Ok(Self {
            symbolic,
            argsort,
            lu,
            dual_diag,
            n_entries: idx.len(),
        })
    }

    fn factor(&self, values: &[f64], shift: f64) -> Result<Linearization> {
        if values.len() != self.n_entries {
            return Err(Error::LinearAlgebra("Jacobian pattern changed between iterations".into()));
        }
        let matrix = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, values).map_err(linalg)?;
        let n = matrix.nrows();
        let col_ptr = matrix.symbolic().col_ptr();
        let row_idx = matrix.symbolic().row_idx();
        let vals = matrix.val();
        let mut row_max = vec![0.0f64; n];
        for c in 0..n {
            for p in col_ptr[c]..col_ptr[c + 1] {
                let r = row_idx[p];
                row_max[r] = row_max[r].max(vals[p].abs());
            }
        }
        let scale: Vec<f64> = row_max.iter().map(|&m| if m > 0.0 { 1.0 / m.sqrt() } else { 1.0 }).collect();
        let mut scaled = matrix.clone();
        {
            let sym = self.symbolic.clone();
            let (cp, ri) = (sym.col_ptr(), sym.row_idx());
            let sv = scaled.val_mut();
            for c in 0..n {
                for p in cp[c]..cp[c + 1] {
                    sv[p] *= scale[ri[p]] * scale[c];
                }
            }
            for &p in &self.dual_diag {
                sv[p] -= shift;
            }
        }
        let lu = Lu::try_new_with_symbolic(self.lu.clone(), scaled.as_ref()).map_err(linalg)?;
        Ok(Linearization { matrix, scale, lu })
    }
}

fn csc_mul(m: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    let cp = m.symbolic().col_ptr();
    let ri = m.symbolic().row_idx();
    let v = m.val();
    let mut y = vec![0.0; m.nrows()];
    for c in 0..m.ncols() {
        let xc = x[c];
        if xc != 0.0 {
            for p in cp[c]..cp[c + 1] {
                y[ri[p]] += v[p] * xc;
            }
        }
    }
    y
}

impl Linearization {
    /// Solves `J p = b` with refinement; returns `p` and the relative
    /// residual `‖b - J p‖∞ / ‖b‖∞`.
    fn solve(&self, b: &[f64], refinement: usize) -> (Vec<f64>, f64) {
        let n = b.len();
        let bnorm = inf_norm(b).max(f64::MIN_POSITIVE);
        let mut p = vec![0.0; n];
        let mut res = b.to_vec();
        let mut best = (p.clone(), 1.0);
        for _ in 0..=refinement {
            let mut rhs = Mat::from_fn(n, 1, |i, _| res[i] * self.scale[i]);
            self.lu.solve_in_place(rhs.as_mut());
            for i in 0..n {
                p[i] += rhs[(i, 0)] * self.scale[i];
            }
            let jp = csc_mul(&self.matrix, &p);
            res = b.iter().zip(&jp).map(|(bi, ji)| bi - ji).collect();
            let rel = inf_norm(&res) / bnorm;
            if !rel.is_finite() {
                break;
            }
            if rel < best.1 {
                best = (p.clone(), rel);
            }
            if rel < 1e-14 {
                break;
            }
        }
        best
    }
}

/// Damped least-squares step `(JᵀJ + μ diag(JᵀJ)) p = -Jᵀ r`.
fn levenberg_step(n: usize, entries: &[Pair<usize, usize>], values: &[f64], r: &[f64], mu: f64) -> Result<Vec<f64>> {
    let j = CsrMatrix::from_triplets(n, n, entries.iter().zip(values).map(|(p, &v)| (p.row, p.col, v)));
    let jtj = j.transpose().matmul(&j);
    let diag: Vec<f64> = (0..n).map(|i| mu * jtj.get(i, i).max(1e-300)).collect();
    let a = jtj.add(&CsrMatrix::diagonal(&diag));
    let trip: Vec<faer::sparse::Triplet<usize, usize, f64>> = a
        .triplets()
        .map(|(r, c, v)| faer::sparse::Triplet::new(r, c, v))
        .collect();
    let m = SparseColMat::try_new_from_triplets(n, n, &trip).map_err(linalg)?;
    let lu = m.sp_lu().map_err(linalg)?;
    let g = j.tr_mul_vec(r);
    let mut rhs = Mat::from_fn(n, 1, |i, _| -g[i]);
    lu.solve_in_place(rhs.as_mut());
    Ok((0..n).map(|i| rhs[(i, 0)]).collect())
}

fn residual_norm<P: StationarityProblem + ?Sized>(problem: &P, x: &[f64]) -> Option<(Vec<f64>, f64)> {
    if !x.iter().all(|v| v.is_finite()) {
        return None;
    }
    let r = problem.residual(x).ok()?;
    let n = inf_norm(&r);
    n.is_finite().then_some((r, n))
}

/// Damped Newton iteration for `r(x) = 0` starting from `x0`.
///
/// The residual history is non-increasing: a step is accepted only when it
/// lowers `‖r‖∞`.
pub fn solve_stationarity_system<P: StationarityProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    options: &SolverOptions,
) -> Result<NewtonReport> {
    let n = problem.dim();
    crate::error::check_len("initial guess", n, x0.len())?;
    crate::error::check_finite("initial guess", x0)?;
    let mut x = x0.to_vec();
    let (mut r, mut norm) =
        residual_norm(problem, &x).ok_or(Error::NonFinite("residual at the initial guess"))?;
    let mut report = NewtonReport {
        x: Vec::new(),
        converged: false,
        iterations: 0,
        residual_history: vec![norm],
        final_residual: norm,
        levenberg_steps: 0,
        linear_residual: 0.0,
        message: None,
    };
    let mut pattern: Option<Pattern> = None;
    let mut polish_left = options.polish_steps;
    let mut mu = options.levenberg_initial;

    while report.iterations < options.max_iterations {
        let converged = norm <= options.tolerance;
        if converged && polish_left == 0 {
            break;
        }
        let (idx, vals) = collect_entries(problem, &x)?;
        if pattern.is_none() {
            pattern = Some(Pattern::new(n, &idx, problem.dual_indices())?);
        }
        let pat = pattern.as_ref().expect("pattern built above");
        let b: Vec<f64> = r.iter().map(|v| -v).collect();
        let newton = pat
            .factor(&vals, options.dual_regularization)
            .map(|lin| lin.solve(&b, options.refinement_steps));

        let mut accepted = None;
        if let Ok((p, rel)) = &newton {
            report.linear_residual = report.linear_residual.max(*rel);
            let mut alpha = 1.0;
            while alpha >= options.min_step {
                let trial: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + alpha * pi).collect();
                if let Some((rt, nt)) = residual_norm(problem, &trial) {
                    let ok = if converged {
                        nt < 0.5 * norm && norm > POLISH_FLOOR * options.tolerance
                    } else {
                        nt < (1.0 - 1e-4 * alpha) * norm
                    };
                    if ok {
                        if options.verbosity > 1 {
                            eprintln!("  step {alpha:.3e}, linear residual {rel:.3e}");
                        }
                        accepted = Some((trial, rt, nt));
                        break;
                    }
                }
                if converged {
                    break;
                }
                alpha *= 0.5;
            }
        }
        if accepted.is_none() && converged {
            break;
        }
        if accepted.is_none() {
            while mu <= options.levenberg_max {
                if let Ok(p) = levenberg_step(n, &idx[..idx.len() - problem.dual_indices().len()], &vals[..idx.len() - problem.dual_indices().len()], &r, mu) {
                    let trial: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + pi).collect();
                    if let Some((rt, nt)) = residual_norm(problem, &trial) {
                        if nt < norm {
                            accepted = Some((trial, rt, nt));
                            report.levenberg_steps += 1;
                            mu = (mu * 0.1).max(options.levenberg_initial);
                            break;
                        }
                    }
                }
                mu *= 10.0;
            }
        }
        let Some((xn, rn, nn)) = accepted else {
            report.message = Some(match newton {
                Err(e) => format!("linear solve failed and no damped step reduced the residual: {e}"),
                Ok(_) => format!("stalled at residual {norm:e}: no step reduced it"),
            });
            break;
        };
        if converged {
            polish_left -= 1;
        }
        x = xn;
        r = rn;
        norm = nn;
        report.iterations += 1;
        report.residual_history.push(norm);
        if options.verbosity > 0 {
            eprintln!("newton {:3}: |r| = {:.3e}", report.iterations, norm);
        }
    }
    report.converged = norm <= options.tolerance;
    if !report.converged && report.message.is_none() {
        report.message = Some(format!(
            "no convergence after {} iterations (residual {norm:e})",
            report.iterations
        ));
    }
    report.final_residual = norm;
    report.x = x;
    Ok(report)
}

/// Full result of solving one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub state: StateVector,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub levenberg_steps: usize,
    pub linear_residual: f64,
    pub wall_time_s: f64,
    pub charges: ChargeSeries,
    pub warnings: Vec<String>,
    pub message: Option<String>,
}

/// Starting guess: linear time map from the initial slice and the field
/// propagated by d'Alembert through that map; both branches agree and the
/// multipliers vanish.
pub fn precondition_with(spec: &ProblemSpec, field: &Dalembert) -> Result<StateVector> {
    spec.validate()?;
    let grid = &spec.grid;
    let mut state = StateVector::zeros(grid);
    let tau0 = grid.tau_interval[0];
    let mut t = vec![0.0; grid.total_volume()];
    let mut elapsed = vec![0.0; grid.total_volume()];
    for (k, tk) in t.iter_mut().enumerate() {
        let (i, j) = grid.coords(k);
        elapsed[k] = spec.t_dot_ic[j] * (grid.tau(i) - tau0);
        *tk = spec.t_ic[j] + elapsed[k];
    }
    let phi = field.sample_through_map(grid, &elapsed, 0.0)?;
    state.t1 = t.clone();
    state.t2 = t;
    state.phi1 = phi.clone();
    state.phi2 = phi;
    Ok(state)
}

pub fn precondition(setup: &Setup) -> Result<(ProblemSpec, StateVector)> {
    let spec = setup.problem()?;
    let field = Dalembert::from_setup(setup)?;
    let state = precondition_with(&spec, &field)?;
    Ok((spec, state))
}

/// Peak of `½(φ̇² + φ′²)` on the initial slice in physical units.
pub fn initial_energy_density(spec: &ProblemSpec) -> Result<f64> {
    let pair = crate::sbp::build_sbp_1d(spec.order, spec.grid.n_sigma, spec.grid.d_sigma())?;
    let dphi = pair.apply(&spec.phi_ic);
    Ok(dphi
        .iter()
        .zip(spec.phi_dot_ic.iter().zip(&spec.t_dot_ic))
        .map(|(e, (c, a))| 0.5 * ((c / a).powi(2) + e * e))
        .fold(0.0, f64::max))
}

/// `max |ṫ_IC| Δτ / Δσ` in units with `c = 1`. The centered operators
/// amplify high-frequency modes when this exceeds one.
pub fn cfl_number(spec: &ProblemSpec) -> f64 {
    let rate = spec.t_dot_ic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    spec.wave_speed * rate * spec.grid.d_tau() / spec.grid.d_sigma()
}

/// Solves the discrete stationarity problem from `initial`.
pub fn solve(disc: &Discretization, initial: &StateVector, options: &SolverOptions) -> Result<SolveReport> {
    let start = Instant::now();
    initial.check(disc.grid())?;
    let mut warnings = Vec::new();
    let energy = initial_energy_density(&disc.spec)?;
    if energy > disc.spec.tension / 100.0 {
        warnings.push(format!(
            "initial field energy density {energy:.3e} exceeds T/100 = {:.3e}; the small-field expansion is questionable",
            disc.spec.tension / 100.0
        ));
    }
    let cfl = cfl_number(&disc.spec);
    if cfl > 1.0 {
        warnings.push(format!(
            "CFL number {cfl:.3} exceeds 1; high-frequency modes grow across the slab"
        ));
    }
    let newton = solve_stationarity_system(disc, &initial.pack(), options)?;
    let state = StateVector::unpack(disc.grid(), &newton.x)?;
    let charges = noether_charge(disc, &state)?;
    Ok(SolveReport {
        state,
        converged: newton.converged,
        iterations: newton.iterations,
        residual_history: newton.residual_history,
        final_residual: newton.final_residual,
        levenberg_steps: newton.levenberg_steps,
        linear_residual: newton.linear_residual,
        wall_time_s: start.elapsed().as_secs_f64(),
        charges,
        warnings,
        message: newton.message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `r(x) = A x - b` with a fixed symmetric `A`.
    struct Linear {
        a: Vec<(usize, usize, f64)>,
        b: Vec<f64>,
    }

    impl StationarityProblem for Linear {
        fn dim(&self) -> usize {
            self.b.len()
        }
        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            let mut r: Vec<f64> = self.b.iter().map(|v| -v).collect();
            for &(i, j, v) in &self.a {
                r[i] += v * x[j];
            }
            Ok(r)
        }
        fn jacobian_entries(&self, _: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> Result<()> {
            self.a.iter().for_each(|&(i, j, v)| sink(i, j, v));
            Ok(())
        }
    }

    /// `rᵢ = xᵢ³ - 8`, root at 2.
    struct Cubic(usize);

    impl StationarityProblem for Cubic {
        fn dim(&self) -> usize {
            self.0
        }
        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(x.iter().map(|v| v * v * v - 8.0).collect())
        }
        fn jacobian_entries(&self, x: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> Result<()> {
            x.iter().enumerate().for_each(|(i, v)| sink(i, i, 3.0 * v * v));
            Ok(())
        }
    }

    #[test]
    fn quadratic_energy_converges_in_one_step() {
        let p = Linear {
            a: vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -3.0), (2, 2, 2.0), (0, 0, 1.0)],
            b: vec![1.0, 2.0, 3.0],
        };
        let rep = solve_stationarity_system(&p, &[0.0; 3], &SolverOptions::default()).unwrap();
        assert!(rep.converged);
        assert!(rep.final_residual < 1e-14);
        assert_eq!(rep.iterations, 1);
        assert!((rep.x[2] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn converged_start_takes_no_steps() {
        let rep = solve_stationarity_system(&Cubic(3), &[2.0; 3], &SolverOptions::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.residual_history, vec![0.0]);
    }

    #[test]
    fn history_is_monotone_on_a_nonlinear_problem() {
        let rep = solve_stationarity_system(&Cubic(4), &[0.3, 5.0, 1.0, 30.0], &SolverOptions::default()).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert!(rep.residual_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(rep.x.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    /// `r = (x₀², x₁ - 1)`: the Jacobian is singular on `x₀ = 0`.
    struct Degenerate;

    impl StationarityProblem for Degenerate {
        fn dim(&self) -> usize {
            2
        }
        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] * x[0], x[1] - 1.0])
        }
        fn jacobian_entries(&self, x: &[f64], sink: &mut dyn FnMut(usize, usize, f64)) -> Result<()> {
            sink(0, 0, 2.0 * x[0]);
            sink(1, 1, 1.0);
            Ok(())
        }
    }

    #[test]
    fn singular_jacobian_uses_the_fallback() {
        let rep = solve_stationarity_system(&Degenerate, &[0.0, 5.0], &SolverOptions::default()).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert!(rep.levenberg_steps > 0);
    }

    #[test]
    fn vacuum_solves_in_a_few_iterations() {
        let setup = Setup::default().with_grid(14, 10).vacuum();
        let (spec, x0) = precondition(&setup).unwrap();
        let disc = Discretization::new(&spec).unwrap();
        let rep = solve(&disc, &x0, &SolverOptions::default()).unwrap();
        assert!(rep.converged, "{:?}", rep.message);
        assert!(rep.iterations <= 5);
        for (k, t) in rep.state.t1.iter().enumerate() {
            let (i, _) = spec.grid.coords(k);
            assert!((t - 2.5 * spec.grid.tau(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn bump_run_converges_and_keeps_branches_equal() {
        let setup = Setup::default().with_grid(20, 14);
        let (spec, x0) = precondition(&setup).unwrap();
        let disc = Discretization::new(&spec).unwrap();
        let rep = solve(&disc, &x0, &SolverOptions::default()).unwrap();
        assert!(rep.converged, "{:?}", rep.message);
        assert!(rep.warnings.is_empty());
        let diff = rep.state.phi1.iter().zip(&rep.state.phi2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
        let rc = disc.constraint_residuals(&rep.state).unwrap();
        assert!(rc.max() < 1e-8, "{rc:?}");
    }

    #[test]
    fn strong_fields_are_flagged() {
        let mut setup = Setup::default().with_grid(14, 10);
        setup.tension = 1.0;
        let (spec, x0) = precondition(&setup).unwrap();
        let disc = Discretization::new(&spec).unwrap();
        let options = SolverOptions { max_iterations: 1, ..Default::default() };
        let rep = solve(&disc, &x0, &options).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        assert!(rep.warnings[0].contains("T/100"));

        let coarse = Setup::default().with_grid(16, 14);
        let (spec, x0) = precondition(&coarse).unwrap();
        assert!(cfl_number(&spec) > 1.0);
        let disc = Discretization::new(&spec).unwrap();
        let rep = solve(&disc, &x0, &options).unwrap();
        assert!(rep.warnings.iter().any(|w| w.contains("CFL")));
    }
}
