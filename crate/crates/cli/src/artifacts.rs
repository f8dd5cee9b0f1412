//! Artifact directories, CSV/JSON writers and the build version string.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;

/// Present in a directory whose run did not complete.
pub const FAILED_MARKER: &str = "FAILED";

/// 17 significant digits: parsing the text gives back the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub struct ArtifactDir {
    path: PathBuf,
}

impl ArtifactDir {
    /// `<root>/<command>-<config hash>`.
    pub fn for_config(root: &Path, command: &str, config: &Config) -> Self {
        Self {
            path: root.join(format!("{command}-{}", config.hash(command))),
        }
    }

    pub fn at(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// A finished earlier run left `primary` behind and no failure marker.
    pub fn is_complete(&self, primary: &str) -> bool {
        self.file(primary).exists() && !self.file(FAILED_MARKER).exists()
    }

    pub fn create(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.path)?;
        let marker = self.file(FAILED_MARKER);
        if marker.exists() {
            fs::remove_file(marker)?;
        }
        Ok(())
    }

    pub fn mark_failed(&self, reason: &str) -> Result<(), CliError> {
        fs::create_dir_all(&self.path)?;
        fs::write(self.file(FAILED_MARKER), format!("{reason}\n"))?;
        Ok(())
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        fs::write(self.file(name), serde_json::to_vec_pretty(value)?)?;
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        fs::write(self.file(name), text)?;
        Ok(())
    }

    pub fn csv(&self, name: &str, header: &[&str]) -> Result<csv::Writer<fs::File>, CliError> {
        let mut w = csv::Writer::from_path(self.file(name))?;
        w.write_record(header)?;
        Ok(w)
    }
}

/// `git describe` of the source tree, or the crate version outside a checkout.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn floats_survive_a_text_round_trip(v in proptest::num::f64::ANY) {
            let back: f64 = fmt_f64(v).parse().unwrap();
            prop_assert!(back.to_bits() == v.to_bits() || (v.is_nan() && back.is_nan()));
        }
    }

    #[test]
    fn failed_marker_blocks_reuse() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = ArtifactDir::at(tmp.path().join("x"));
        dir.create().unwrap();
        dir.write_text("report.json", "{}").unwrap();
        assert!(dir.is_complete("report.json"));
        dir.mark_failed("stalled").unwrap();
        assert!(!dir.is_complete("report.json"));
        dir.create().unwrap();
        assert!(dir.is_complete("report.json"));
    }
}
