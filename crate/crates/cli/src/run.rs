//! A single solve with its charge, energy and error analysis.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ibvp_core::action::ConstraintResiduals;
use ibvp_core::oracle::{error_norms, ErrorNorms, ReferenceCache};
use ibvp_core::{
    cfl_number, conventional_energy, precondition, solve, Discretization, GridSpec, Profile, Setup, SolveReport,
};
use serde::{Deserialize, Serialize};

use crate::artifacts::{fmt_f64, git_describe, ArtifactDir};
use crate::config::Config;
use crate::error::CliError;

pub const REPORT: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchDifference {
    pub t: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub e0: f64,
    /// `max |E(τ) - E(τ₀)|`
    pub max_deviation: f64,
}

/// Slice nearest to the time the packet first reaches a wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSlice {
    pub slice: usize,
    pub time: f64,
    /// σ index of the largest `|D_τ t - ṫ_IC|` on that slice.
    pub argmax_sigma_index: usize,
    pub cells_from_wall: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeMapStats {
    /// `max - min` of `ṫ` away from the boundary slices and walls.
    pub t_dot_interior_range: f64,
    pub wall_arrival_time: Option<f64>,
    pub reflection: Option<ReflectionSlice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub precondition_s: f64,
    pub solve_s: f64,
    pub reference_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub git_describe: String,
    pub config: Config,
    pub unknowns: usize,
    pub cfl: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub levenberg_steps: usize,
    pub linear_residual: f64,
    pub message: Option<String>,
    pub warnings: Vec<String>,
    pub constraint_residuals: ConstraintResiduals,
    pub branch_difference: BranchDifference,
    pub q0: f64,
    /// Relative charge drift `max |Q - Q₀| / |Q₀|`.
    pub drift: f64,
    pub drift_abs: f64,
    /// Physical time reached on the last slice (σ average).
    pub final_time: f64,
    pub conventional_energy: EnergySummary,
    pub errors: Option<ErrorNorms>,
    pub reference_error: Option<String>,
    pub reference_substeps: Option<usize>,
    pub time_map: TimeMapStats,
    pub timings: Timings,
}

/// Everything a run computes, kept in memory.
pub struct RunOutput {
    pub setup: Setup,
    pub disc: Discretization,
    pub solve: SolveReport,
    pub energy: Vec<f64>,
    pub report: RunReport,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Time at which the packet center, or for other profiles the largest
/// sampled displacement, first meets a wall.
fn wall_arrival_time(setup: &Setup) -> Option<f64> {
    let g = &setup.grid;
    let [a, b] = g.sigma_interval;
    if let Profile::WavePacket { amplitude, center, .. } = setup.phi_ic {
        if amplitude == 0.0 {
            return None;
        }
        return Some(setup.t_ic + (center - a).min(b - center).max(0.0) / setup.wave_speed);
    }
    let (j, peak) = g
        .sigma_points()
        .iter()
        .map(|&s| setup.phi_ic.eval(s, [a, b]).abs())
        .enumerate()
        .fold((0, 0.0), |best, (j, v)| if v > best.1 { (j, v) } else { best });
    if peak == 0.0 || matches!(setup.phi_ic, Profile::Constant { .. }) {
        return None;
    }
    let s = g.sigma(j);
    Some(setup.t_ic + (s - a).min(b - s) / setup.wave_speed)
}

pub fn time_map_stats(setup: &Setup, disc: &Discretization, t1: &[f64]) -> TimeMapStats {
    let g = disc.grid();
    let (nt, ns) = (g.n_tau, g.n_sigma);
    let t_dot = disc.dt_t.apply(t1);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 1..nt - 1 {
        for j in 1..ns - 1 {
            let v = t_dot[g.index(i, j)];
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let arrival = wall_arrival_time(setup);
    let reflection = arrival.and_then(|ta| {
        let times = slice_times(disc, t1);
        if ta < times[0] || ta > times[nt - 1] {
            return None;
        }
        let slice = (0..nt)
            .min_by(|&x, &y| (times[x] - ta).abs().total_cmp(&(times[y] - ta).abs()))
            .expect("non-empty");
        let raw = disc.d_tau.mul_vec(t1);
        let dev = |j: usize| (raw[g.index(slice, j)] - setup.t_dot_ic).abs();
        let j = (0..ns).max_by(|&x, &y| dev(x).total_cmp(&dev(y))).expect("non-empty");
        Some(ReflectionSlice {
            slice,
            time: times[slice],
            argmax_sigma_index: j,
            cells_from_wall: j.min(ns - 1 - j),
        })
    });
    TimeMapStats {
        t_dot_interior_range: hi - lo,
        wall_arrival_time: arrival,
        reflection,
    }
}

/// σ-averaged physical time of every slice.
pub fn slice_times(disc: &Discretization, t: &[f64]) -> Vec<f64> {
    let g = disc.grid();
    let hs = &disc.pair_sigma.h_diag;
    let len = g.sigma_length();
    (0..g.n_tau)
        .map(|i| t[g.tau_slice(i)].iter().zip(hs).map(|(v, h)| v * h).sum::<f64>() / len)
        .collect()
}

/// Solves `config` and evaluates all diagnostics. A non-converged solve is
/// still returned; the caller decides how to report it.
pub fn compute(config: &Config, cache: Option<&ReferenceCache>) -> Result<RunOutput, CliError> {
    config.validate()?;
    let start = Instant::now();
    let setup = config.setup();
    let (spec, x0) = precondition(&setup)?;
    let disc = Discretization::new(&spec)?;
    let precondition_s = start.elapsed().as_secs_f64();

    let rep = solve(&disc, &x0, &config.solver)?;
    let state = &rep.state;
    let energy = conventional_energy(&disc, state).unwrap_or_else(|_| vec![f64::NAN; spec.grid.n_tau]);

    let ref_start = Instant::now();
    let reference = match cache {
        Some(c) => c.get_or_compute(&setup, &config.mol_options()),
        None => ibvp_core::mol_reference(&setup, &config.mol_options()),
    };
    let (errors, reference_error, reference_substeps) = match reference {
        Ok(r) => (
            Some(error_norms(&setup, &disc.weights, &state.t1, &state.phi1, &r)?),
            None,
            Some(r.substeps),
        ),
        Err(e) => (None, Some(e.to_string()), None),
    };
    let reference_s = ref_start.elapsed().as_secs_f64();

    let e0 = energy[0];
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        git_describe: git_describe(),
        config: config.clone(),
        unknowns: disc.dim(),
        cfl: cfl_number(&spec),
        converged: rep.converged,
        iterations: rep.iterations,
        residual_history: rep.residual_history.clone(),
        final_residual: rep.final_residual,
        levenberg_steps: rep.levenberg_steps,
        linear_residual: rep.linear_residual,
        message: rep.message.clone(),
        warnings: rep.warnings.clone(),
        constraint_residuals: disc.constraint_residuals(state)?,
        branch_difference: BranchDifference {
            t: max_abs_diff(&state.t1, &state.t2),
            phi: max_abs_diff(&state.phi1, &state.phi2),
        },
        q0: rep.charges.q_total[0],
        drift: rep.charges.drift,
        drift_abs: rep.charges.drift_abs,
        final_time: *slice_times(&disc, &state.t1).last().expect("non-empty"),
        conventional_energy: EnergySummary {
            e0,
            max_deviation: energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max),
        },
        errors,
        reference_error,
        reference_substeps,
        time_map: time_map_stats(&setup, &disc, &state.t1),
        timings: Timings {
            precondition_s,
            solve_s: rep.wall_time_s,
            reference_s,
            total_s: start.elapsed().as_secs_f64(),
        },
    };
    Ok(RunOutput {
        setup,
        disc,
        solve: rep,
        energy,
        report,
    })
}

fn grid_rows(g: &GridSpec) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
    (0..g.total_volume()).map(|k| {
        let (i, j) = g.coords(k);
        (k, i, j)
    })
}

pub fn write_artifacts(out: &RunOutput, dir: &ArtifactDir) -> Result<(), CliError> {
    let g = out.disc.grid();
    let s = &out.solve.state;

    let mut w = dir.csv("solution.csv", &["tau_idx", "sigma_idx", "tau", "sigma", "t", "x", "phi"])?;
    for (k, i, j) in grid_rows(g) {
        let sigma = g.sigma(j);
        w.write_record([
            i.to_string(),
            j.to_string(),
            fmt_f64(g.tau(i)),
            fmt_f64(sigma),
            fmt_f64(s.t1[k]),
            fmt_f64(sigma),
            fmt_f64(s.phi1[k]),
        ])?;
    }
    w.flush()?;

    let q = &out.solve.charges;
    let mut w = dir.csv(
        "charges.csv",
        &["slice", "tau", "q_total", "q_coord", "q_field", "q_multiplier", "e_conv"],
    )?;
    for i in 0..g.n_tau {
        w.write_record([
            i.to_string(),
            fmt_f64(q.tau[i]),
            fmt_f64(q.q_total[i]),
            fmt_f64(q.q_coord[i]),
            fmt_f64(q.q_field[i]),
            fmt_f64(q.q_multiplier[i]),
            fmt_f64(out.energy[i]),
        ])?;
    }
    w.flush()?;

    let t_dot = out.disc.dt_t.apply(&s.t1);
    let t_prime = out.disc.d_sigma.mul_vec(&s.t1);
    let mut w = dir.csv(
        "derivatives.csv",
        &["tau_idx", "sigma_idx", "tau", "sigma", "t", "t_dot", "t_prime"],
    )?;
    for (k, i, j) in grid_rows(g) {
        w.write_record([
            i.to_string(),
            j.to_string(),
            fmt_f64(g.tau(i)),
            fmt_f64(g.sigma(j)),
            fmt_f64(s.t1[k]),
            fmt_f64(t_dot[k]),
            fmt_f64(t_prime[k]),
        ])?;
    }
    w.flush()?;

    dir.write_text("config.toml", &out.report.config.to_toml())?;
    dir.write_text("charges.gp", CHARGES_GP)?;
    dir.write_text("solution.gp", SOLUTION_GP)?;
    dir.write_json(REPORT, &out.report)?;
    Ok(())
}

const CHARGES_GP: &str = r#"set datafile separator ","
set key autotitle columnhead
set xlabel "tau"
set multiplot layout 2,1
set ylabel "Q - Q(0)"
stats "charges.csv" using 3 nooutput every ::0::0
plot "charges.csv" using 2:($3 - STATS_min) with linespoints title "Noether charge"
set ylabel "E_conv"
plot "charges.csv" using 2:7 with linespoints title "conventional energy"
unset multiplot
pause mouse close
"#;

const SOLUTION_GP: &str = r#"set datafile separator ","
set xlabel "x"
set ylabel "t"
set zlabel "phi"
set dgrid3d 60,48
splot "solution.csv" using 6:5:7 every ::1 with lines title "phi(t, x)"
pause mouse close
"#;

/// Artifact directory, report and whether it came from an earlier run.
pub struct RunResult {
    pub dir: PathBuf,
    pub report: RunReport,
    pub cached: bool,
}

/// `run` subcommand: solve, write artifacts, and fail with a solver error
/// (after flushing everything and leaving a `FAILED` marker) when the solve
/// did not converge.
pub fn run(config: &Config, root: &Path, force: bool) -> Result<RunResult, CliError> {
    config.validate()?;
    let dir = ArtifactDir::for_config(root, "run", config);
    if !force && dir.is_complete(REPORT) {
        let report: RunReport = serde_json::from_slice(&std::fs::read(dir.file(REPORT))?)?;
        return Ok(RunResult {
            dir: dir.path().to_path_buf(),
            report,
            cached: true,
        });
    }
    run_into(config, &dir, &ReferenceCache::new(root.join("reference-cache")))
}

/// Solves into an explicit directory, ignoring earlier contents.
pub fn run_into(config: &Config, dir: &ArtifactDir, cache: &ReferenceCache) -> Result<RunResult, CliError> {
    dir.create()?;
    dir.write_text("config.toml", &config.to_toml())?;
    let out = match compute(config, Some(cache)) {
        Ok(out) => out,
        Err(e) => {
            dir.mark_failed(&e.to_string())?;
            return Err(e);
        }
    };
    write_artifacts(&out, dir)?;
    if !out.report.converged {
        let msg = out
            .report
            .message
            .clone()
            .unwrap_or_else(|| format!("not converged, |r| = {:e}", out.report.final_residual));
        dir.mark_failed(&msg)?;
        return Err(CliError::Solver(msg));
    }
    Ok(RunResult {
        dir: dir.path().to_path_buf(),
        report: out.report,
        cached: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packet_reaches_the_wall_at_half_a_time_unit() {
        let t = wall_arrival_time(&Setup::default()).unwrap();
        assert!((t - 0.5).abs() < 1e-12, "{t}");
        assert_eq!(wall_arrival_time(&Setup::default().vacuum()), None);
    }

    #[test]
    fn slice_times_of_a_plane() {
        let s = Setup::default().with_grid(9, 7).vacuum();
        let disc = Discretization::new(&s.problem().unwrap()).unwrap();
        let t = s.grid.sample(|tau, _| 0.1 + 2.5 * tau);
        for (i, v) in slice_times(&disc, &t).iter().enumerate() {
            assert!((v - (0.1 + 2.5 * s.grid.tau(i))).abs() < 1e-14);
        }
        let stats = time_map_stats(&s, &disc, &t);
        assert!(stats.t_dot_interior_range < 1e-12);
        assert!(stats.reflection.is_none());
    }
}
