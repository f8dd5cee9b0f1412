//! TOML run configuration.
//!
//! Every field has a default; the defaults describe the reference run
//! (60×48 grid on τ ∈ [0, ½], σ ∈ [0, 1], T = 10⁴, ṫ = 5/2, a Gaussian-damped
//! sine packet at rest).

use std::collections::HashSet;
use std::path::Path;

use ibvp_core::oracle::{MolMode, MolOptions, MIN_REFINEMENT};
use ibvp_core::{GridSpec, Profile, SbpOrder, Setup, SolverOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n_tau: usize,
    pub n_sigma: usize,
    pub tau_interval: [f64; 2],
    pub sigma_interval: [f64; 2],
    pub order: SbpOrder,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_tau: 60,
            n_sigma: 48,
            tau_interval: [0.0, 0.5],
            sigma_interval: [0.0, 1.0],
            order: SbpOrder::Sbp121,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub tension: f64,
    pub wave_speed: f64,
    /// Boundary penalty strength of the regularized derivatives.
    pub sigma0: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            tension: 1e4,
            wave_speed: 1.0,
            sigma0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub t_ic: f64,
    pub t_dot_ic: f64,
    pub phi_ic: Profile,
    /// `∂φ/∂τ` on the first slice.
    pub phi_dot_ic: Profile,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            t_ic: 0.0,
            t_dot_ic: 2.5,
            phi_ic: Profile::default_packet(),
            phi_dot_ic: Profile::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// `[n_tau, n_sigma]` pairs for the refinement study.
    pub grids: Vec<[usize; 2]>,
    pub t_dot_values: Vec<f64>,
    /// Fine σ points per coarse interval in the coupled reference.
    pub mol_refinement: usize,
    pub mol_cfl: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            // Δτ and Δσ halve from the first to the last grid at a fixed
            // CFL number of about 0.9
            grids: vec![[66, 48], [89, 64], [111, 80], [133, 96]],
            t_dot_values: vec![1.5, 2.0, 2.5],
            mol_refinement: 16,
            mol_cfl: 0.5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub initial: InitialSection,
    pub solver: SolverOptions,
    pub sweep: SweepSection,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The resolved configuration with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn setup(&self) -> Setup {
        Setup {
            grid: GridSpec {
                n_tau: self.grid.n_tau,
                n_sigma: self.grid.n_sigma,
                tau_interval: self.grid.tau_interval,
                sigma_interval: self.grid.sigma_interval,
            },
            order: self.grid.order,
            tension: self.physics.tension,
            wave_speed: self.physics.wave_speed,
            sigma0: self.physics.sigma0,
            t_ic: self.initial.t_ic,
            t_dot_ic: self.initial.t_dot_ic,
            phi_ic: self.initial.phi_ic.clone(),
            phi_dot_ic: self.initial.phi_dot_ic.clone(),
        }
    }

    pub fn mol_options(&self) -> MolOptions {
        MolOptions {
            refinement: self.sweep.mol_refinement,
            cfl: self.sweep.mol_cfl,
            mode: MolMode::Dynamic,
        }
    }

    /// Copy with a different grid size.
    pub fn with_grid(&self, n_tau: usize, n_sigma: usize) -> Self {
        let mut c = self.clone();
        c.grid.n_tau = n_tau;
        c.grid.n_sigma = n_sigma;
        c
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let setup = self.setup();
        let check = |s: &Setup| s.problem().and_then(|p| p.validate().map(|_| ()));
        check(&setup).map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.initial.t_dot_ic > 0.0) {
            return Err(CliError::Config(format!(
                "t_dot_ic must be positive, got {}",
                self.initial.t_dot_ic
            )));
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(CliError::Config(format!(
                "solver tolerance must be positive, got {}",
                self.solver.tolerance
            )));
        }
        if self.solver.max_iterations == 0 {
            return Err(CliError::Config("solver max_iterations must be at least 1".into()));
        }

        let mut seen = HashSet::new();
        for &[nt, ns] in &self.sweep.grids {
            if !seen.insert((nt, ns)) {
                return Err(CliError::Config(format!("duplicate sweep grid {nt}x{ns}")));
            }
            check(&setup.with_grid(nt, ns))
                .map_err(|e| CliError::Config(format!("sweep grid {nt}x{ns}: {e}")))?;
        }
        let mut seen = HashSet::new();
        for &v in &self.sweep.t_dot_values {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("sweep t_dot values must be positive, got {v}")));
            }
            if !seen.insert(v.to_bits()) {
                return Err(CliError::Config(format!("duplicate sweep t_dot value {v}")));
            }
        }
        if self.sweep.mol_refinement < MIN_REFINEMENT {
            return Err(CliError::Config(format!(
                "mol_refinement must be at least {MIN_REFINEMENT}, got {}",
                self.sweep.mol_refinement
            )));
        }
        if !(self.sweep.mol_cfl > 0.0 && self.sweep.mol_cfl <= 1.0) {
            return Err(CliError::Config(format!("mol_cfl must lie in (0, 1], got {}", self.sweep.mol_cfl)));
        }
        Ok(())
    }

    /// Short content hash naming the artifact directory of `command`.
    pub fn hash(&self, command: &str) -> String {
        let payload = serde_json::to_vec(&(command, self)).expect("config serializes");
        Sha256::digest(&payload)
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
