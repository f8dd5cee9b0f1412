use std::f64::consts::PI;

use ibvp_core::oracle::{l2_error, mol_reference, Dalembert, MolMode, MolOptions, ReferenceCache};
use ibvp_core::sbp::full_quadrature;
use ibvp_core::{Profile, Setup};

fn frozen() -> MolOptions {
    MolOptions {
        mode: MolMode::Frozen,
        ..MolOptions::default()
    }
}

fn small(n_tau: usize, n_sigma: usize) -> Setup {
    Setup::default().with_grid(n_tau, n_sigma)
}

fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect()
}

#[test]
fn vacuum_reference_is_a_plane() {
    let mut s = small(11, 9).vacuum();
    s.t_ic = 0.3;
    let r = mol_reference(&s, &MolOptions::default()).unwrap();
    for (k, t) in r.t.iter().enumerate() {
        let (i, _) = s.grid.coords(k);
        assert!((t - (0.3 + 2.5 * s.grid.tau(i))).abs() < 1e-12);
    }
    assert!(r.phi.iter().all(|p| *p == 0.0));
}

#[test]
fn frozen_sine_mode_oscillates_at_the_physical_frequency() {
    let mut s = small(21, 17);
    s.phi_ic = Profile::SineMode { amplitude: 1.0, mode: 1 };
    let r = mol_reference(&s, &frozen()).unwrap();
    let mut worst = 0.0f64;
    for (k, p) in r.phi.iter().enumerate() {
        let (i, j) = s.grid.coords(k);
        let exact = (PI * 2.5 * s.grid.tau(i)).cos() * (PI * s.grid.sigma(j)).sin();
        worst = worst.max((p - exact).abs());
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn frozen_reference_agrees_with_dalembert() {
    let s = small(31, 25);
    let r = mol_reference(&s, &frozen()).unwrap();
    let exact = Dalembert::from_setup(&s).unwrap();
    for (i, j) in [(3, 5), (10, 12), (15, 20), (22, 2), (27, 18), (30, 12)] {
        let k = s.grid.index(i, j);
        let v = exact.eval(s.grid.sigma(j), 2.5 * s.grid.tau(i));
        assert!((r.phi[k] - v).abs() < 1e-7, "({i},{j}): {} vs {v}", r.phi[k]);
    }
}

#[test]
fn frozen_reference_with_initial_velocity() {
    let mut s = small(21, 17);
    s.phi_ic = Profile::Zero;
    // ∂φ/∂τ = 2.5π sin(πσ) ⇒ φ = sin(πt) sin(πσ) with t = 2.5τ
    s.phi_dot_ic = Profile::SineMode { amplitude: 2.5 * PI, mode: 1 };
    let r = mol_reference(&s, &frozen()).unwrap();
    for (k, p) in r.phi.iter().enumerate() {
        let (i, j) = s.grid.coords(k);
        let exact = (PI * 2.5 * s.grid.tau(i)).sin() * (PI * s.grid.sigma(j)).sin();
        assert!((p - exact).abs() < 1e-8);
    }
}

#[test]
fn coupled_reference_approaches_the_wave_equation_as_tension_grows() {
    let base = small(31, 25);
    let w = full_quadrature(&trapezoid(31, base.grid.d_tau()), &trapezoid(25, base.grid.d_sigma()));
    let wave = mol_reference(&base, &frozen()).unwrap();
    let gap = |tension: f64| {
        let mut s = base.clone();
        s.tension = tension;
        let r = mol_reference(&s, &MolOptions::default()).unwrap();
        l2_error(&r.phi, &wave.phi, &w).unwrap()
    };
    let (g4, g5) = (gap(1e4), gap(1e5));
    let ratio = g4 / g5;
    assert!((7.0..13.0).contains(&ratio), "{g4:e} {g5:e}");
}

#[test]
fn reference_rejects_coarse_refinement() {
    let opts = MolOptions {
        refinement: 2,
        ..MolOptions::default()
    };
    assert!(mol_reference(&small(8, 6), &opts).is_err());
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ReferenceCache::new(dir.path());
    let s = small(9, 7);
    let opts = MolOptions {
        refinement: 4,
        ..MolOptions::default()
    };
    assert!(cache.load(&s, &opts).unwrap().is_none());
    let computed = cache.get_or_compute(&s, &opts).unwrap();
    let loaded = cache.load(&s, &opts).unwrap().unwrap();
    assert_eq!(computed, loaded);

    // a different tension is a different key
    let mut other = s.clone();
    other.tension = 10.0;
    assert!(cache.load(&other, &opts).unwrap().is_none());

    // tampered payloads are ignored
    let key = ReferenceCache::key(&s, &opts).unwrap();
    let bin = dir.path().join(format!("{key}.bin"));
    let mut bytes = std::fs::read(&bin).unwrap();
    bytes[0] ^= 1;
    std::fs::write(&bin, bytes).unwrap();
    assert!(cache.load(&s, &opts).unwrap().is_none());
}

#[test]
fn dalembert_is_periodic() {
    let s = Setup::default();
    let o = Dalembert::from_setup(&s).unwrap();
    for j in 0..=40 {
        let x = j as f64 / 40.0;
        for shift in [0.0, 0.37] {
            assert!((o.eval(x, shift + 2.0) - o.eval(x, shift)).abs() < 1e-10);
        }
    }
}

#[test]
fn dalembert_energy_is_constant() {
    let n = 4001;
    let dx = 1.0 / (n - 1) as f64;
    let o = Dalembert::from_setup(&Setup::default()).unwrap();
    let energy = |t: f64| {
        let dt = 1e-5;
        let u: Vec<f64> = (0..n).map(|j| o.eval(j as f64 * dx, t)).collect();
        let mut e = 0.0;
        for j in 1..n - 1 {
            let x = j as f64 * dx;
            let ut = (o.eval(x, t + dt) - o.eval(x, (t - dt).max(0.0))) / (t + dt - (t - dt).max(0.0));
            let ux = (u[j + 1] - u[j - 1]) / (2.0 * dx);
            e += 0.5 * (ut * ut + ux * ux) * dx;
        }
        e
    };
    let e0 = energy(0.0);
    for t in [0.1, 0.25, 0.5, 0.77, 1.3] {
        let e = energy(t);
        assert!((e - e0).abs() < 1e-4 * e0, "t = {t}: {e} vs {e0}");
    }
}
