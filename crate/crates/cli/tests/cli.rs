use std::path::Path;
use std::process::{Command, Output};

use ibvp_cli::artifacts::FAILED_MARKER;
use ibvp_cli::run::RunReport;

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noether-ibvp"))
        .args(args)
        .env("NOETHER_IBVP_OUT", out)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn only_subdir(root: &Path, prefix: &str) -> std::path::PathBuf {
    let mut dirs: Vec<_> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(prefix))
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.pop().unwrap()
}

#[test]
fn too_small_grid_exits_with_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[grid]\nn_tau = 3\n");
    let o = bin(&["run", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("SBP121") && err.contains("at least 4"), "{err}");
}

#[test]
fn unknown_keys_exit_with_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[physics]\ntensoin = 3.0\n");
    assert_eq!(bin(&["run", "--config", &cfg], tmp.path()).status.code(), Some(1));
    let missing = tmp.path().join("missing.toml");
    assert_eq!(
        bin(&["run", "--config", missing.to_str().unwrap()], tmp.path()).status.code(),
        Some(1)
    );
}

#[test]
fn run_writes_its_artifacts_and_is_reused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[grid]\nn_tau = 24\nn_sigma = 16\n");
    let o = bin(&["run", "--config", &cfg], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_subdir(tmp.path(), "run-");
    for f in ["solution.csv", "charges.csv", "derivatives.csv", "report.json", "config.toml", "charges.gp"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    assert!(!dir.join(FAILED_MARKER).exists());

    let report: RunReport = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert!(report.converged);
    assert!(report.drift <= 1e-10);
    assert_eq!(report.config.grid.n_tau, 24);
    assert!(report.errors.is_some());

    let mut rows = csv::Reader::from_path(dir.join("charges.csv")).unwrap();
    let q: Vec<f64> = rows.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(q.len(), 24);
    assert_eq!(q[0], report.q0);
    let solution = csv::Reader::from_path(dir.join("solution.csv")).unwrap().into_records().count();
    assert_eq!(solution, 24 * 16);

    let again = bin(&["run", "--config", &cfg], tmp.path());
    assert!(String::from_utf8_lossy(&again.stdout).contains("(cached)"));
    let forced = bin(&["run", "--config", &cfg, "--force"], tmp.path());
    assert!(!String::from_utf8_lossy(&forced.stdout).contains("(cached)"));
}

#[test]
fn unconverged_run_leaves_a_marker_and_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[grid]\nn_tau = 24\nn_sigma = 16\n[solver]\nmax_iterations = 1\n",
    );
    let o = bin(&["run", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let dir = only_subdir(tmp.path(), "run-");
    assert!(dir.join(FAILED_MARKER).is_file());
    assert!(dir.join("report.json").is_file());
    // a marked directory is not reused
    let again = bin(&["run", "--config", &cfg], tmp.path());
    assert_eq!(again.status.code(), Some(2));
}

#[test]
fn flags_override_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[grid]\nn_tau = 16\nn_sigma = 24\ntau_interval = [0.0, 0.2]\n");
    let o = bin(&["run", "--config", &cfg, "--order", "sbp242", "--tolerance", "1e-9"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_subdir(tmp.path(), "run-");
    let report: RunReport = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.config.grid.order, ibvp_core::SbpOrder::Sbp242);
    assert_eq!(report.config.solver.tolerance, 1e-9);
}

#[test]
fn tdot_sweep_writes_one_row_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[grid]\nn_tau = 24\nn_sigma = 16\n");
    let o = bin(&["sweep-tdot", "--config", &cfg, "--jobs", "2"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_subdir(tmp.path(), "sweep-tdot-");
    let rows: Vec<csv::StringRecord> = csv::Reader::from_path(dir.join("tdot_sweep.csv"))
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect();
    let n_tau: Vec<&str> = rows.iter().map(|r| r.get(1).unwrap()).collect();
    assert_eq!(n_tau, ["14", "19", "24"]);
}

#[test]
fn operator_dump_is_bounded() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["diag-operators", "--n-tau", "8", "--n-sigma", "6"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = only_subdir(tmp.path(), "diag-operators-");
    for f in ["d_tau.csv", "d_tau_1d_eigenvalues.csv", "dbar_tau_t_augmented_eigenvalues.csv", "summary.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    assert_eq!(bin(&["diag-operators", "--n-tau", "65"], tmp.path()).status.code(), Some(1));
}
