//! Problem definition: grid, operator order, tension and initial/boundary data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::grid::GridSpec;
use crate::sbp::{build_sbp_1d, SbpOrder};

/// Tolerance for the corner compatibility of initial and Dirichlet data.
pub const CORNER_TOL: f64 = 1e-12;

/// Closed-form spatial profiles for initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude · sin(π s) · exp(-width (σ - center)²)` with `s = (σ - σⁱ)/L`.
    WavePacket {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default = "default_center")]
        center: f64,
    },
    /// `amplitude · sin(mode · π s)`
    SineMode {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
    },
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn default_width() -> f64 {
    100.0
}

fn default_center() -> f64 {
    0.5
}

impl Profile {
    pub fn default_packet() -> Self {
        Profile::WavePacket {
            amplitude: 1.0,
            width: default_width(),
            center: default_center(),
        }
    }

    /// Value at `sigma` for the interval `[a, b]`.
    pub fn eval(&self, sigma: f64, [a, b]: [f64; 2]) -> f64 {
        let s = (sigma - a) / (b - a);
        match *self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => value,
            Profile::WavePacket {
                amplitude,
                width,
                center,
            } => amplitude * (PI * s).sin() * (-width * (sigma - center).powi(2)).exp(),
            Profile::SineMode { amplitude, mode } => amplitude * (mode as f64 * PI * s).sin(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero)
            || matches!(self, Profile::Constant { value } if *value == 0.0)
            || matches!(self, Profile::WavePacket { amplitude, .. } | Profile::SineMode { amplitude, .. } if *amplitude == 0.0)
    }
}

/// Fully sampled problem data consumed by the action, solver and charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub grid: GridSpec,
    pub order: SbpOrder,
    pub tension: f64,
    pub wave_speed: f64,
    /// Penalty strength of the regularized derivatives.
    pub sigma0: f64,
    pub phi_ic: Vec<f64>,
    /// `∂φ/∂τ` on the first slice.
    pub phi_dot_ic: Vec<f64>,
    pub t_ic: Vec<f64>,
    pub t_dot_ic: Vec<f64>,
    pub phi_bc_left: Vec<f64>,
    pub phi_bc_right: Vec<f64>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        build_sbp_1d(self.order, self.grid.n_tau, self.grid.d_tau())?;
        build_sbp_1d(self.order, self.grid.n_sigma, self.grid.d_sigma())?;
        if !(self.tension.is_finite() && self.tension > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "tension must be positive and finite, got {}",
                self.tension
            )));
        }
        if self.wave_speed != 1.0 {
            return Err(Error::InvalidProblem(format!(
                "the action is formulated in units with c = 1, got wave_speed = {}",
                self.wave_speed
            )));
        }
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(Error::InvalidProblem(format!("sigma0 must be positive, got {}", self.sigma0)));
        }
        let (nt, ns) = (self.grid.n_tau, self.grid.n_sigma);
        check_len("phi_ic", ns, self.phi_ic.len())?;
        check_len("phi_dot_ic", ns, self.phi_dot_ic.len())?;
        check_len("t_ic", ns, self.t_ic.len())?;
        check_len("t_dot_ic", ns, self.t_dot_ic.len())?;
        check_len("phi_bc_left", nt, self.phi_bc_left.len())?;
        check_len("phi_bc_right", nt, self.phi_bc_right.len())?;
        for (name, v) in [
            ("phi_ic", &self.phi_ic),
            ("phi_dot_ic", &self.phi_dot_ic),
            ("t_ic", &self.t_ic),
            ("t_dot_ic", &self.t_dot_ic),
            ("phi_bc_left", &self.phi_bc_left),
            ("phi_bc_right", &self.phi_bc_right),
        ] {
            check_finite(name, v)?;
        }
        let left = self.phi_ic[0] - self.phi_bc_left[0];
        let right = self.phi_ic[ns - 1] - self.phi_bc_right[0];
        if left.abs() > CORNER_TOL || right.abs() > CORNER_TOL {
            return Err(Error::InvalidProblem(format!(
                "initial field and Dirichlet data disagree at the corners ({left:e}, {right:e})"
            )));
        }
        if let Some(j) = self.t_dot_ic.iter().position(|&v| v.abs() < 1e-12) {
            return Err(Error::DegenerateTimeMap {
                index: j,
                value: self.t_dot_ic[j],
            });
        }
        Ok(())
    }

    pub fn inverse_tension(&self) -> f64 {
        1.0 / self.tension
    }
}

/// Compact, serializable description of a run that samples into a
/// [`ProblemSpec`]. Time-map initial data are uniform in `sigma`; the field
/// has homogeneous Dirichlet walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub grid: GridSpec,
    pub order: SbpOrder,
    pub tension: f64,
    pub wave_speed: f64,
    pub sigma0: f64,
    pub t_ic: f64,
    pub t_dot_ic: f64,
    pub phi_ic: Profile,
    /// Initial `∂φ/∂τ`; the physical velocity is this divided by `t_dot_ic`.
    pub phi_dot_ic: Profile,
}

impl Default for Setup {
    fn default() -> Self {
        Self {
            grid: GridSpec {
                n_tau: 60,
                n_sigma: 48,
                tau_interval: [0.0, 0.5],
                sigma_interval: [0.0, 1.0],
            },
            order: SbpOrder::Sbp121,
            tension: 1e4,
            wave_speed: 1.0,
            sigma0: 1.0,
            t_ic: 0.0,
            t_dot_ic: 2.5,
            phi_ic: Profile::default_packet(),
            phi_dot_ic: Profile::Zero,
        }
    }
}

impl Setup {
    /// Same grid and time map as `self` with the field switched off.
    pub fn vacuum(&self) -> Self {
        Self {
            phi_ic: Profile::Zero,
            phi_dot_ic: Profile::Zero,
            ..self.clone()
        }
    }

    pub fn with_grid(&self, n_tau: usize, n_sigma: usize) -> Self {
        let mut out = self.clone();
        out.grid.n_tau = n_tau;
        out.grid.n_sigma = n_sigma;
        out
    }

    pub fn phi_at(&self, sigma: f64) -> f64 {
        self.phi_ic.eval(sigma, self.grid.sigma_interval)
    }

    /// Physical initial velocity `∂φ/∂t = (∂φ/∂τ) / (∂t/∂τ)`.
    pub fn physical_velocity_at(&self, sigma: f64) -> f64 {
        self.phi_dot_ic.eval(sigma, self.grid.sigma_interval) / self.t_dot_ic
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        self.grid.validate()?;
        let sig = self.grid.sigma_points();
        let iv = self.grid.sigma_interval;
        let mut phi_ic: Vec<f64> = sig.iter().map(|&s| self.phi_ic.eval(s, iv)).collect();
        // Profiles vanish at the walls analytically; clear the rounding residue
        // so the corner data match the homogeneous Dirichlet values exactly.
        for k in [0, sig.len() - 1] {
            if phi_ic[k].abs() <= CORNER_TOL {
                phi_ic[k] = 0.0;
            }
        }
        let spec = ProblemSpec {
            grid: self.grid.clone(),
            order: self.order,
            tension: self.tension,
            wave_speed: self.wave_speed,
            sigma0: self.sigma0,
            phi_dot_ic: sig.iter().map(|&s| self.phi_dot_ic.eval(s, iv)).collect(),
            phi_ic,
            t_ic: vec![self.t_ic; sig.len()],
            t_dot_ic: vec![self.t_dot_ic; sig.len()],
            phi_bc_left: vec![0.0; self.grid.n_tau],
            phi_bc_right: vec![0.0; self.grid.n_tau],
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_setup_is_the_headline_run() {
        let spec = Setup::default().problem().unwrap();
        assert_eq!(spec.grid.total_volume(), 2880);
        assert_eq!(spec.phi_ic[0], 0.0);
        assert_eq!(spec.phi_ic[47], 0.0);
        // σ = ½ is not a node of the 48-point grid
        assert!((spec.phi_ic.iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 2e-2);
    }

    #[test]
    fn small_grids_name_the_operator_minimum() {
        let err = Setup::default().with_grid(3, 48).problem().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("SBP121") && msg.contains('4'), "{msg}");
        let mut s = Setup::default().with_grid(7, 12);
        s.order = SbpOrder::Sbp242;
        assert!(s.problem().unwrap_err().to_string().contains("SBP242"));
    }

    #[test]
    fn corner_mismatch_is_rejected() {
        let mut spec = Setup::default().problem().unwrap();
        spec.phi_ic[0] = 1e-3;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn nonpositive_tension_is_rejected() {
        let mut s = Setup::default();
        s.tension = 0.0;
        assert!(s.problem().is_err());
    }

    #[test]
    fn profile_serde_roundtrip() {
        let p = Profile::default_packet();
        let txt = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Profile>(&txt).unwrap(), p);
        let q: Profile = serde_json::from_str(r#"{"kind":"sine_mode"}"#).unwrap();
        assert_eq!(q, Profile::SineMode { amplitude: 1.0, mode: 1 });
    }
}
