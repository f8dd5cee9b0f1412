//! Grid-refinement and clock-rate sweeps.

use std::path::{Path, PathBuf};

use ibvp_core::oracle::ReferenceCache;
use ibvp_core::{drift_point, fit_convergence, sweep_setup, DriftPoint, PowerLawFit};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::{fmt_f64, ArtifactDir};
use crate::config::Config;
use crate::error::CliError;
use crate::run::{run_into, RunReport};

/// Fewest successful grids that still give a meaningful fit.
pub const MIN_FIT_GRIDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_tau: usize,
    pub n_sigma: usize,
    pub spacing: f64,
    pub converged: bool,
    pub iterations: usize,
    pub drift: f64,
    pub eps_t: Option<f64>,
    pub eps_phi: Option<f64>,
    pub eps_phi_we: Option<f64>,
    pub eps_phi_mol: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub rows: Vec<ConvergenceRow>,
    pub fit_t: Option<PowerLawFit>,
    pub fit_phi: Option<PowerLawFit>,
    pub fit_phi_mol: Option<PowerLawFit>,
    /// Whether `eps_phi_we` falls strictly from each grid to the next finer one.
    pub eps_phi_we_decreasing: bool,
    pub failed_grids: Vec<[usize; 2]>,
}

impl ConvergenceSummary {
    pub fn successes(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_none()).count()
    }
}

fn row_from(n_tau: usize, n_sigma: usize, spacing: f64, result: Result<RunReport, CliError>) -> ConvergenceRow {
    let mut row = ConvergenceRow {
        n_tau,
        n_sigma,
        spacing,
        converged: false,
        iterations: 0,
        drift: f64::NAN,
        eps_t: None,
        eps_phi: None,
        eps_phi_we: None,
        eps_phi_mol: None,
        error: None,
    };
    match result {
        Ok(r) => {
            row.converged = r.converged;
            row.iterations = r.iterations;
            row.drift = r.drift;
            match r.errors {
                Some(e) => {
                    row.eps_t = Some(e.eps_t);
                    row.eps_phi = Some(e.eps_phi);
                    row.eps_phi_we = Some(e.eps_phi_we);
                    row.eps_phi_mol = Some(e.eps_phi_mol);
                }
                None => row.error = r.reference_error.or(Some("no reference".into())),
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn fit(rows: &[ConvergenceRow], pick: impl Fn(&ConvergenceRow) -> Option<f64>) -> Option<PowerLawFit> {
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| pick(r).map(|e| (r.spacing, e))).collect();
    fit_convergence(&pts).ok()
}

pub fn summarize(mut rows: Vec<ConvergenceRow>) -> ConvergenceSummary {
    rows.sort_by(|a, b| b.spacing.total_cmp(&a.spacing));
    let ok: Vec<ConvergenceRow> = rows.iter().filter(|r| r.error.is_none()).cloned().collect();
    let we: Vec<f64> = ok.iter().filter_map(|r| r.eps_phi_we).collect();
    ConvergenceSummary {
        fit_t: fit(&ok, |r| r.eps_t),
        fit_phi: fit(&ok, |r| r.eps_phi),
        fit_phi_mol: fit(&ok, |r| r.eps_phi_mol),
        eps_phi_we_decreasing: we.len() >= 2 && we.windows(2).all(|w| w[1] < w[0]),
        failed_grids: rows
            .iter()
            .filter(|r| r.error.is_some())
            .map(|r| [r.n_tau, r.n_sigma])
            .collect(),
        rows,
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs:?} worker threads: {e}")))
}

/// Solves every grid of `config.sweep.grids` in its own subdirectory and fits
/// power laws to the error norms.
pub fn sweep_convergence(
    config: &Config,
    root: &Path,
    jobs: Option<usize>,
) -> Result<(PathBuf, ConvergenceSummary), CliError> {
    config.validate()?;
    let dir = ArtifactDir::for_config(root, "sweep-convergence", config);
    dir.create()?;
    dir.write_text("config.toml", &config.to_toml())?;
    let cache = ReferenceCache::new(root.join("reference-cache"));

    let rows: Vec<ConvergenceRow> = pool(jobs)?.install(|| {
        config
            .sweep
            .grids
            .par_iter()
            .map(|&[nt, ns]| {
                let c = config.with_grid(nt, ns);
                let spacing = c.setup().grid.combined_spacing();
                let sub = ArtifactDir::at(dir.file(&format!("grid-{nt}x{ns}")));
                let res = run_into(&c, &sub, &cache).map(|r| r.report);
                row_from(nt, ns, spacing, res)
            })
            .collect()
    });
    let summary = summarize(rows);

    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut w = dir.csv(
        "convergence.csv",
        &[
            "n_tau",
            "n_sigma",
            "spacing",
            "eps_t",
            "eps_phi",
            "eps_phi_we",
            "eps_phi_mol",
            "converged",
            "iterations",
            "drift",
        ],
    )?;
    for r in &summary.rows {
        w.write_record([
            r.n_tau.to_string(),
            r.n_sigma.to_string(),
            fmt_f64(r.spacing),
            opt(r.eps_t),
            opt(r.eps_phi),
            opt(r.eps_phi_we),
            opt(r.eps_phi_mol),
            r.converged.to_string(),
            r.iterations.to_string(),
            fmt_f64(r.drift),
        ])?;
    }
    w.flush()?;
    dir.write_json("fits.json", &summary)?;
    dir.write_text("convergence.gp", CONVERGENCE_GP)?;

    if summary.successes() < MIN_FIT_GRIDS {
        let msg = format!(
            "only {} of {} grids succeeded, need {MIN_FIT_GRIDS}",
            summary.successes(),
            summary.rows.len()
        );
        dir.mark_failed(&msg)?;
        return Err(CliError::Solver(msg));
    }
    Ok((dir.path().to_path_buf(), summary))
}

const CONVERGENCE_GP: &str = r#"set datafile separator ","
set logscale xy
set key left top
set xlabel "spacing"
set ylabel "L2 error"
plot "convergence.csv" using 3:4 every ::1 with linespoints title "eps_t", \
     "convergence.csv" using 3:5 every ::1 with linespoints title "eps_phi", \
     "convergence.csv" using 3:6 every ::1 with linespoints title "eps_phi_we", \
     "convergence.csv" using 3:7 every ::1 with linespoints title "eps_phi_mol"
pause mouse close
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdotSummary {
    pub rows: Vec<DriftPoint>,
    pub q0_ascending: bool,
    pub max_drift: f64,
}

/// Solves the configured run once per clock rate, with `n_tau` scaled so that
/// the physical time step stays fixed.
pub fn sweep_tdot(config: &Config, root: &Path, jobs: Option<usize>) -> Result<(PathBuf, TdotSummary), CliError> {
    config.validate()?;
    let dir = ArtifactDir::for_config(root, "sweep-tdot", config);
    dir.create()?;
    dir.write_text("config.toml", &config.to_toml())?;
    let template = config.setup();
    for &v in &config.sweep.t_dot_values {
        let c = sweep_setup(&template, v);
        c.problem()
            .and_then(|p| p.validate())
            .map_err(|e| CliError::Config(format!("t_dot = {v}: {e}")))?;
    }

    let rows: Vec<DriftPoint> = pool(jobs)?.install(|| {
        config
            .sweep
            .t_dot_values
            .par_iter()
            .map(|&v| drift_point(&sweep_setup(&template, v), &config.solver))
            .collect()
    });

    let mut w = dir.csv(
        "tdot_sweep.csv",
        &["t_dot_ic", "n_tau", "n_sigma", "q0", "drift", "iterations", "converged"],
    )?;
    for r in &rows {
        w.write_record([
            fmt_f64(r.t_dot_ic),
            r.n_tau.to_string(),
            r.n_sigma.to_string(),
            fmt_f64(r.q0),
            fmt_f64(r.drift),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;

    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.t_dot_ic.total_cmp(&b.t_dot_ic));
    let summary = TdotSummary {
        q0_ascending: sorted.windows(2).all(|w| w[1].q0 > w[0].q0),
        max_drift: rows.iter().map(|r| r.drift).fold(0.0, f64::max),
        rows,
    };
    dir.write_json("summary.json", &summary)?;
    dir.write_text("tdot.gp", TDOT_GP)?;

    let failed: Vec<String> = summary
        .rows
        .iter()
        .filter(|r| r.error.is_some() || !r.converged)
        .map(|r| format!("t_dot = {}: {}", r.t_dot_ic, r.error.as_deref().unwrap_or("not converged")))
        .collect();
    if !failed.is_empty() {
        let msg = failed.join("; ");
        dir.mark_failed(&msg)?;
        return Err(CliError::Solver(msg));
    }
    Ok((dir.path().to_path_buf(), summary))
}

const TDOT_GP: &str = r#"set datafile separator ","
set key autotitle columnhead
set xlabel "t_dot_ic"
set ylabel "Q(0)"
plot "tdot_sweep.csv" using 1:4 with linespoints title "initial charge"
pause mouse close
"#;
