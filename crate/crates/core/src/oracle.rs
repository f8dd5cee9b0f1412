//! Reference solutions and error analysis.
//!
//! * [`Dalembert`]: exact solution of `φ_tt = c² φ_xx` between homogeneous
//!   Dirichlet walls (odd-periodic extension).
//! * [`mol_reference`]: method-of-lines integration of the coupled equations
//!   of motion for `(t, φ)` on a refined, exactly aligned grid.
//! * [`l2_error`] and [`fit_convergence`] for refinement studies.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{check_len, Error, Result};
use crate::grid::GridSpec;
use crate::problem::{Profile, Setup};

/// Largest wall value accepted as "zero" for the Dirichlet extension.
pub const WALL_TOL: f64 = 1e-12;

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

// 8-point Gauss–Legendre rule on [-1, 1]
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Panels per wall-to-wall length in the velocity integral.
const PANELS: usize = 64;

/// d'Alembert solution with odd reflection at both walls.
pub struct Dalembert {
    phi: ScalarFn,
    velocity: Option<ScalarFn>,
    c: f64,
    domain: [f64; 2],
}

impl std::fmt::Debug for Dalembert {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dalembert")
            .field("c", &self.c)
            .field("domain", &self.domain)
            .field("velocity", &self.velocity.is_some())
            .finish()
    }
}

impl Dalembert {
    /// `velocity` is the physical `∂φ/∂t` at `t = 0`; `None` means zero.
    pub fn new(phi: ScalarFn, velocity: Option<ScalarFn>, c: f64, domain: [f64; 2]) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidProblem(format!("wave speed must be positive, got {c}")));
        }
        if !(domain[1] > domain[0]) {
            return Err(Error::InvalidGrid(format!("empty domain {domain:?}")));
        }
        for x in domain {
            let v = phi(x);
            let w = velocity.as_ref().map_or(0.0, |g| g(x));
            for value in [v, w] {
                if value.abs() > WALL_TOL {
                    return Err(Error::IncompatibleWallData { x, value });
                }
            }
        }
        Ok(Self {
            phi,
            velocity,
            c,
            domain,
        })
    }

    /// Initial data of a [`Setup`]; its `∂φ/∂τ` is converted to the physical
    /// velocity with the initial `ṫ`.
    pub fn from_setup(setup: &Setup) -> Result<Self> {
        let iv = setup.grid.sigma_interval;
        let p = setup.phi_ic.clone();
        let phi: ScalarFn = Box::new(move |s| p.eval(s, iv));
        let velocity: Option<ScalarFn> = if setup.phi_dot_ic.is_zero() {
            None
        } else {
            let v = setup.phi_dot_ic.clone();
            let tdot = setup.t_dot_ic;
            Some(Box::new(move |s| v.eval(s, iv) / tdot))
        };
        Self::new(phi, velocity, setup.wave_speed, iv)
    }

    fn length(&self) -> f64 {
        self.domain[1] - self.domain[0]
    }

    /// Position within one period `[0, 2L)` measured from the left wall.
    fn reduce(&self, x: f64) -> f64 {
        (x - self.domain[0]).rem_euclid(2.0 * self.length())
    }

    fn odd_extension(&self, f: &ScalarFn, x: f64) -> f64 {
        let l = self.length();
        let r = self.reduce(x);
        if r <= l {
            f(self.domain[0] + r)
        } else {
            -f(self.domain[0] + 2.0 * l - r)
        }
    }

    /// `∫₀^y g(σⁱ + s) ds` for `0 ≤ y ≤ L` by composite Gauss–Legendre.
    fn partial_integral(&self, g: &ScalarFn, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let panels = ((PANELS as f64 * y / self.length()).ceil() as usize).max(1);
        let w = y / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = self.domain[0] + (p as f64 + 0.5) * w;
            for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
                sum += wt * (g(mid + 0.5 * w * x) + g(mid - 0.5 * w * x));
            }
        }
        0.5 * w * sum
    }

    /// Periodic antiderivative of the odd-extended velocity.
    fn antiderivative(&self, g: &ScalarFn, x: f64) -> f64 {
        let l = self.length();
        let r = self.reduce(x);
        self.partial_integral(g, r.min(2.0 * l - r))
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let ct = self.c * t;
        let mut v = 0.5 * (self.odd_extension(&self.phi, x - ct) + self.odd_extension(&self.phi, x + ct));
        if let Some(g) = &self.velocity {
            v += (self.antiderivative(g, x + ct) - self.antiderivative(g, x - ct)) / (2.0 * self.c);
        }
        v
    }

    /// Samples `φ(σ, t(τ, σ) - t0)` for a time map on `grid`.
    pub fn sample_through_map(&self, grid: &GridSpec, time_map: &[f64], t0: f64) -> Result<Vec<f64>> {
        check_len("time map", grid.total_volume(), time_map.len())?;
        Ok((0..grid.total_volume())
            .map(|k| {
                let (_, j) = grid.coords(k);
                self.eval(grid.sigma(j), time_map[k] - t0)
            })
            .collect())
    }
}

/// One-shot evaluation of the d'Alembert solution.
pub fn dalembert(
    phi_ic: impl Fn(f64) -> f64 + Send + Sync + 'static,
    phi_dot_ic_physical: impl Fn(f64) -> f64 + Send + Sync + 'static,
    x: f64,
    t: f64,
    c: f64,
    domain: [f64; 2],
) -> Result<f64> {
    if !(domain[0]..=domain[1]).contains(&x) {
        return Err(Error::InvalidProblem(format!("x = {x} lies outside {domain:?}")));
    }
    if t < 0.0 {
        return Err(Error::InvalidProblem(format!("t must be non-negative, got {t}")));
    }
    let o = Dalembert::new(Box::new(phi_ic), Some(Box::new(phi_dot_ic_physical)), c, domain)?;
    Ok(o.eval(x, t))
}

/// `sqrt((a - b)ᵀ H (a - b))`
pub fn l2_error(a: &[f64], b: &[f64], weights: &[f64]) -> Result<f64> {
    check_len("l2_error: second field", a.len(), b.len())?;
    check_len("l2_error: weights", a.len(), weights.len())?;
    Ok(a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| w * (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub beta: f64,
}

/// Least-squares fit of `log e = log α + β log s`.
pub fn fit_convergence(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::TooFewFitPoints(points.len()));
    }
    if let Some(&(spacing, error)) = points
        .iter()
        .find(|(s, e)| !(*s > 0.0 && *e > 0.0 && s.is_finite() && e.is_finite()))
    {
        return Err(Error::NonPositiveFitData { spacing, error });
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidProblem("convergence fit needs distinct spacings".into()));
    }
    let beta = sxy / sxx;
    Ok(PowerLawFit {
        alpha: (my - beta * mx).exp(),
        beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MolMode {
    /// Coupled equations for `t` and `φ`.
    Dynamic,
    /// `t` frozen to its initial linear map; `φ` obeys the plain wave equation.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MolOptions {
    /// Fine `sigma` points per coarse interval (at least 4).
    pub refinement: usize,
    /// Fine step as a fraction of `Δσ_fine / (c ṫ)`.
    pub cfl: f64,
    pub mode: MolMode,
}

impl Default for MolOptions {
    fn default() -> Self {
        Self {
            refinement: 16,
            cfl: 0.5,
            mode: MolMode::Dynamic,
        }
    }
}

pub const MIN_REFINEMENT: usize = 4;

/// Reference fields on the coarse grid of the originating [`Setup`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub grid: GridSpec,
    pub options: MolOptions,
    /// Fine RK4 steps per coarse `tau` interval.
    pub substeps: usize,
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
}

// sixth-order central first and second derivative weights
const D1: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D2: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

/// Value at index `i` (possibly a ghost) of a field with reflection `parity`
/// about both ends of `0..=m`.
#[inline]
fn ghost(u: &[f64], i: isize, parity: f64) -> f64 {
    let m = (u.len() - 1) as isize;
    if i < 0 {
        parity * u[(-i) as usize]
    } else if i > m {
        parity * u[(2 * m - i) as usize]
    } else {
        u[i as usize]
    }
}

fn first_derivative(u: &[f64], parity: f64, dx: f64, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        let j = j as isize;
        let mut s = 0.0;
        for (k, c) in D1.iter().enumerate() {
            let k = k as isize + 1;
            s += c * (ghost(u, j + k, parity) - ghost(u, j - k, parity));
        }
        *o = s / dx;
    }
}

fn second_derivative(u: &[f64], parity: f64, dx: f64, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        let j = j as isize;
        let mut s = D2[0] * u[j as usize];
        for (k, c) in D2.iter().enumerate().skip(1) {
            let k = k as isize;
            s += c * (ghost(u, j + k, parity) + ghost(u, j - k, parity));
        }
        *o = s / (dx * dx);
    }
}

/// Right-hand side of the semi-discrete system; the state is stored as
/// consecutive blocks of `m + 1` values.
struct MolSystem {
    n: usize,
    dx: f64,
    k: f64,
    mode: MolMode,
    /// `c² ṫ²` for the frozen wave equation.
    frozen_speed2: f64,
}

impl MolSystem {
    fn blocks(&self) -> usize {
        match self.mode {
            MolMode::Dynamic => 4,
            MolMode::Frozen => 2,
        }
    }

    /// Velocities `(ṫ, φ̇)` from the conjugate momenta.
    fn velocities(&self, y: &[f64], sigma0: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let (t, rest) = y.split_at(n);
        let (phi, rest) = rest.split_at(n);
        let (pt, pphi) = rest.split_at(n);
        let mut tp = vec![0.0; n];
        let mut pp = vec![0.0; n];
        first_derivative(t, 1.0, self.dx, &mut tp);
        first_derivative(phi, -1.0, self.dx, &mut pp);
        let mut td = vec![0.0; n];
        let mut fd = vec![0.0; n];
        let k = self.k;
        for j in 0..n {
            let (b, e) = (tp[j], pp[j]);
            let m00 = 1.0 + k * e * e;
            let m01 = -k * e * b;
            let m10 = -e * b;
            let m11 = b * b - 1.0;
            let det = m00 * m11 - m01 * m10;
            if det.abs() < 1e-12 {
                return Err(Error::DegenerateFlux {
                    sigma: sigma0 + j as f64 * self.dx,
                    det,
                });
            }
            td[j] = (pt[j] * m11 - m01 * pphi[j]) / det;
            fd[j] = (m00 * pphi[j] - m10 * pt[j]) / det;
        }
        Ok((td, fd, tp, pp))
    }

    fn rhs(&self, y: &[f64], out: &mut [f64], sigma0: f64) -> Result<()> {
        let n = self.n;
        match self.mode {
            MolMode::Frozen => {
                let (phi, psi) = y.split_at(n);
                out[..n].copy_from_slice(psi);
                second_derivative(phi, -1.0, self.dx, &mut out[n..]);
                out[n..].iter_mut().for_each(|v| *v *= self.frozen_speed2);
            }
            MolMode::Dynamic => {
                let (td, fd, tp, pp) = self.velocities(y, sigma0)?;
                let k = self.k;
                let mut flux_t = vec![0.0; n];
                let mut flux_phi = vec![0.0; n];
                for j in 0..n {
                    let (a, b, c, e) = (td[j], tp[j], fd[j], pp[j]);
                    flux_t[j] = k * (c * c * b - e * c * a);
                    flux_phi[j] = e * a * a - c * a * b;
                }
                out[..n].copy_from_slice(&td);
                out[n..2 * n].copy_from_slice(&fd);
                first_derivative(&flux_t, -1.0, self.dx, &mut out[2 * n..3 * n]);
                first_derivative(&flux_phi, 1.0, self.dx, &mut out[3 * n..]);
                out[2 * n..].iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(())
    }
}

/// Integrates the equations of motion on a grid `options.refinement` times
/// finer in `sigma` whose nodes contain every coarse node, with an integer
/// number of RK4 steps per coarse `tau` interval. No interpolation is needed.
pub fn mol_reference(setup: &Setup, options: &MolOptions) -> Result<Reference> {
    if options.refinement < MIN_REFINEMENT {
        return Err(Error::RefinementTooSmall {
            min: MIN_REFINEMENT,
            got: options.refinement,
        });
    }
    if !(options.cfl > 0.0 && options.cfl <= 1.0) {
        return Err(Error::InvalidProblem(format!("cfl must lie in (0, 1], got {}", options.cfl)));
    }
    let spec = setup.problem()?;
    let grid = &spec.grid;
    let r = options.refinement;
    let n = r * (grid.n_sigma - 1) + 1;
    let dx = grid.d_sigma() / r as f64;
    let iv = grid.sigma_interval;
    let sig: Vec<f64> = (0..n).map(|j| iv[0] + j as f64 * dx).collect();
    let k = spec.inverse_tension();

    let clean = |mut v: Vec<f64>| {
        // odd fields vanish exactly at the walls
        v[0] = 0.0;
        v[n - 1] = 0.0;
        v
    };
    let phi0 = clean(sig.iter().map(|&s| setup.phi_ic.eval(s, iv)).collect());
    let phidot0 = clean(sig.iter().map(|&s| setup.phi_dot_ic.eval(s, iv)).collect());
    for p in [&setup.phi_ic, &setup.phi_dot_ic] {
        for x in iv {
            let v = p.eval(x, iv);
            if v.abs() > WALL_TOL {
                return Err(Error::IncompatibleWallData { x, value: v });
            }
        }
    }
    let tdot = setup.t_dot_ic;
    let sys = MolSystem {
        n,
        dx,
        k,
        mode: options.mode,
        frozen_speed2: (setup.wave_speed * tdot).powi(2),
    };

    let mut y = match options.mode {
        MolMode::Frozen => [phi0, phidot0].concat(),
        MolMode::Dynamic => {
            let t0 = vec![setup.t_ic; n];
            let mut tp = vec![0.0; n];
            let mut pp = vec![0.0; n];
            first_derivative(&t0, 1.0, dx, &mut tp);
            first_derivative(&phi0, -1.0, dx, &mut pp);
            let pt: Vec<f64> = (0..n)
                .map(|j| tdot * (1.0 + k * pp[j] * pp[j]) - k * pp[j] * tp[j] * phidot0[j])
                .collect();
            let pphi: Vec<f64> = (0..n)
                .map(|j| phidot0[j] * (tp[j] * tp[j] - 1.0) - pp[j] * tdot * tp[j])
                .collect();
            [t0, phi0, pt, pphi].concat()
        }
    };
    debug_assert_eq!(y.len(), sys.blocks() * n);

    let speed = setup.wave_speed * tdot.abs();
    let substeps = ((grid.d_tau() * speed) / (options.cfl * dx)).ceil().max(1.0) as usize;
    let h = grid.d_tau() / substeps as f64;
    let bound = 1e3 * (1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs())));

    let mut t_out = Vec::with_capacity(grid.total_volume());
    let mut phi_out = Vec::with_capacity(grid.total_volume());
    let taus = grid.tau_points();
    let mut emit = |y: &[f64], tau: f64| {
        for j in 0..grid.n_sigma {
            let f = j * r;
            match options.mode {
                MolMode::Dynamic => {
                    t_out.push(y[f]);
                    phi_out.push(y[n + f]);
                }
                MolMode::Frozen => {
                    t_out.push(setup.t_ic + tdot * (tau - taus[0]));
                    phi_out.push(y[f]);
                }
            }
        }
    };
    emit(&y, taus[0]);

    let len = y.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let mut tmp = vec![0.0; len];
    for i in 1..grid.n_tau {
        for _ in 0..substeps {
            sys.rhs(&y, &mut k1, iv[0])?;
            for q in 0..len {
                tmp[q] = y[q] + 0.5 * h * k1[q];
            }
            sys.rhs(&tmp, &mut k2, iv[0])?;
            for q in 0..len {
                tmp[q] = y[q] + 0.5 * h * k2[q];
            }
            sys.rhs(&tmp, &mut k3, iv[0])?;
            for q in 0..len {
                tmp[q] = y[q] + h * k3[q];
            }
            sys.rhs(&tmp, &mut k4, iv[0])?;
            for q in 0..len {
                y[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
            }
        }
        if y.iter().any(|v| !v.is_finite() || v.abs() > bound) {
            return Err(Error::UnstableReference { tau: taus[i] });
        }
        emit(&y, taus[i]);
    }

    Ok(Reference {
        grid: grid.clone(),
        options: *options,
        substeps,
        t: t_out,
        phi: phi_out,
    })
}

/// Global L2 deviations of a solved forward branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// `t₁` against the coupled reference.
    pub eps_t: f64,
    /// `φ₁` against d'Alembert evaluated through the reference time map.
    pub eps_phi: f64,
    /// `φ₁` against d'Alembert evaluated through the solution's own `t₁`.
    pub eps_phi_we: f64,
    /// `φ₁` against the coupled reference field.
    pub eps_phi_mol: f64,
}

/// Compares `(t1, phi1)` on `setup.grid` with `reference` and the d'Alembert
/// solution; `weights` is the full `(tau, sigma)` quadrature.
pub fn error_norms(setup: &Setup, weights: &[f64], t1: &[f64], phi1: &[f64], reference: &Reference) -> Result<ErrorNorms> {
    if reference.grid != setup.grid {
        return Err(Error::InvalidGrid("reference was computed on a different grid".into()));
    }
    let exact = Dalembert::from_setup(setup)?;
    let through_ref = exact.sample_through_map(&setup.grid, &reference.t, setup.t_ic)?;
    let through_own = exact.sample_through_map(&setup.grid, t1, setup.t_ic)?;
    Ok(ErrorNorms {
        eps_t: l2_error(t1, &reference.t, weights)?,
        eps_phi: l2_error(phi1, &through_ref, weights)?,
        eps_phi_we: l2_error(phi1, &through_own, weights)?,
        eps_phi_mol: l2_error(phi1, &reference.phi, weights)?,
    })
}

/// JSON sidecar describing a cached reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheSidecar {
    pub key: String,
    pub grid: GridSpec,
    pub options: MolOptions,
    pub substeps: usize,
    pub tension: f64,
    pub t_dot_ic: f64,
    pub phi_ic: Profile,
    pub phi_dot_ic: Profile,
    /// sha256 of the binary payload.
    pub content_sha256: String,
}

/// On-disk cache of reference fields: `<key>.bin` holds `t` then `phi` as
/// little-endian `f64`, `<key>.json` the sidecar.
#[derive(Debug, Clone)]
pub struct ReferenceCache {
    dir: PathBuf,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(setup: &Setup, options: &MolOptions) -> Result<String> {
        let payload = serde_json::to_vec(&(env!("CARGO_PKG_VERSION"), setup, options))?;
        Ok(hex(&Sha256::digest(&payload)))
    }

    fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        (self.dir.join(format!("{key}.bin")), self.dir.join(format!("{key}.json")))
    }

    /// Cached reference if present and intact.
    pub fn load(&self, setup: &Setup, options: &MolOptions) -> Result<Option<Reference>> {
        let key = Self::key(setup, options)?;
        let (bin, json) = self.paths(&key);
        if !bin.exists() || !json.exists() {
            return Ok(None);
        }
        let side: CacheSidecar = serde_json::from_slice(&fs::read(&json)?)?;
        let bytes = fs::read(&bin)?;
        if side.key != key || hex(&Sha256::digest(&bytes)) != side.content_sha256 {
            return Ok(None);
        }
        let tv = side.grid.total_volume();
        if bytes.len() != 16 * tv {
            return Ok(None);
        }
        let vals: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Some(Reference {
            grid: side.grid,
            options: side.options,
            substeps: side.substeps,
            t: vals[..tv].to_vec(),
            phi: vals[tv..].to_vec(),
        }))
    }

    pub fn store(&self, setup: &Setup, reference: &Reference) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let key = Self::key(setup, &reference.options)?;
        let (bin, json) = self.paths(&key);
        let bytes: Vec<u8> = reference
            .t
            .iter()
            .chain(&reference.phi)
            .flat_map(|v| v.to_le_bytes())
            .collect();
        let side = CacheSidecar {
            key,
            grid: reference.grid.clone(),
            options: reference.options,
            substeps: reference.substeps,
            tension: setup.tension,
            t_dot_ic: setup.t_dot_ic,
            phi_ic: setup.phi_ic.clone(),
            phi_dot_ic: setup.phi_dot_ic.clone(),
            content_sha256: hex(&Sha256::digest(&bytes)),
        };
        fs::write(&bin, &bytes)?;
        fs::write(&json, serde_json::to_vec_pretty(&side)?)?;
        Ok(())
    }

    pub fn get_or_compute(&self, setup: &Setup, options: &MolOptions) -> Result<Reference> {
        if let Some(r) = self.load(setup, options)? {
            return Ok(r);
        }
        let r = mol_reference(setup, options)?;
        self.store(setup, &r)?;
        Ok(r)
    }
}
