//! Operator matrices and spectra for inspection.

use std::path::{Path, PathBuf};

use ibvp_core::diagnostics::{eigenvalues, min_singular_value, summarize_spectrum, Eigenvalue, SpectrumSummary};
use ibvp_core::{CsrMatrix, Discretization, GridSpec, SbpOrder, Setup};
use serde::{Deserialize, Serialize};

use crate::artifacts::{fmt_f64, ArtifactDir};
use crate::config::Config;
use crate::error::CliError;

/// Largest grid whose operators are densified.
pub const MAX_DIAG_GRID: usize = 64;
/// Largest volume for which augmented eigenvalues are computed.
pub const MAX_AUGMENTED_VOLUME: usize = 384;
const ZERO_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub spectral_radius: f64,
    pub zero_modes: usize,
    pub max_rel_real_nonzero: f64,
    pub min_real: f64,
}

impl From<SpectrumSummary> for SpectrumReport {
    fn from(s: SpectrumSummary) -> Self {
        Self {
            spectral_radius: s.spectral_radius,
            zero_modes: s.zero_modes,
            max_rel_real_nonzero: s.max_rel_real_nonzero,
            min_real: s.min_real,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagSummary {
    pub order: SbpOrder,
    pub n_tau: usize,
    pub n_sigma: usize,
    /// Unregularized operators: 1D in τ and σ, lifted `D_τ` and `D_σ`.
    pub spectra: Vec<(String, SpectrumReport)>,
    /// Smallest singular value of each regularized operator.
    pub min_singular: Vec<(String, f64)>,
    /// Augmented regularized operators, small grids only.
    pub augmented: Vec<(String, SpectrumReport)>,
}

fn write_matrix(dir: &ArtifactDir, name: &str, m: &CsrMatrix) -> Result<(), CliError> {
    let mut w = dir.csv(name, &["row", "col", "value"])?;
    for (r, c, v) in m.triplets() {
        w.write_record([r.to_string(), c.to_string(), fmt_f64(v)])?;
    }
    w.flush()?;
    Ok(())
}

fn write_eigs(dir: &ArtifactDir, name: &str, eigs: &[Eigenvalue]) -> Result<(), CliError> {
    let mut w = dir.csv(name, &["re", "im"])?;
    for z in eigs {
        w.write_record([fmt_f64(z.re), fmt_f64(z.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Setup whose operators are inspected; initial data only enter the offsets.
pub fn diag_setup(config: &Config, order: SbpOrder, n_tau: usize, n_sigma: usize) -> Result<Setup, CliError> {
    if n_tau > MAX_DIAG_GRID || n_sigma > MAX_DIAG_GRID {
        return Err(CliError::Config(format!(
            "diag-operators densifies every operator; {n_tau}x{n_sigma} exceeds {MAX_DIAG_GRID}x{MAX_DIAG_GRID}"
        )));
    }
    let mut s = config.setup().with_grid(n_tau, n_sigma);
    s.order = order;
    s.problem()
        .and_then(|p| p.validate())
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(s)
}

pub fn diag_operators(
    config: &Config,
    order: SbpOrder,
    n_tau: usize,
    n_sigma: usize,
    root: &Path,
) -> Result<(PathBuf, DiagSummary), CliError> {
    let setup = diag_setup(config, order, n_tau, n_sigma)?;
    let disc = Discretization::new(&setup.problem()?)?;
    let mut c = config.with_grid(n_tau, n_sigma);
    c.grid.order = order;
    let dir = ArtifactDir::for_config(root, "diag-operators", &c);
    dir.create()?;

    let grid: &GridSpec = disc.grid();
    let mut summary = DiagSummary {
        order,
        n_tau: grid.n_tau,
        n_sigma: grid.n_sigma,
        spectra: Vec::new(),
        min_singular: Vec::new(),
        augmented: Vec::new(),
    };

    let plain = [
        ("d_tau_1d", &disc.pair_tau.d_matrix),
        ("d_sigma_1d", &disc.pair_sigma.d_matrix),
        ("d_tau", &disc.d_tau),
        ("d_sigma", &disc.d_sigma),
    ];
    for (name, m) in plain {
        write_matrix(&dir, &format!("{name}.csv"), m)?;
        let eigs = eigenvalues(m)?;
        write_eigs(&dir, &format!("{name}_eigenvalues.csv"), &eigs)?;
        summary
            .spectra
            .push((name.to_string(), summarize_spectrum(&eigs, ZERO_TOL).into()));
    }

    let regularized = [("dbar_tau_t", &disc.dt_t), ("dbar_tau_phi", &disc.dt_phi), ("dbar_sigma_phi", &disc.ds_phi)];
    for (name, op) in regularized {
        write_matrix(&dir, &format!("{name}.csv"), &op.linear)?;
        summary.min_singular.push((name.to_string(), min_singular_value(&op.linear)?));
        if grid.total_volume() <= MAX_AUGMENTED_VOLUME {
            let eigs = eigenvalues(&op.to_augmented())?;
            write_eigs(&dir, &format!("{name}_augmented_eigenvalues.csv"), &eigs)?;
            summary
                .augmented
                .push((name.to_string(), summarize_spectrum(&eigs, ZERO_TOL).into()));
        }
    }
    dir.write_json("summary.json", &summary)?;
    Ok((dir.path().to_path_buf(), summary))
}
