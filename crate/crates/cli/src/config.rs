use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// LP certificate residuals.
    pub lp_gap: f64,
    /// LP values against closed forms.
    pub closed_form: f64,
    /// Inequalities checked by property suites.
    pub assert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lp_gap: 1e-9,
            closed_form: 1e-7,
            assert: 1e-8,
        }
    }
}

/// Grid sizes and sample counts; unset entries take each command's default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub points: Option<usize>,
    pub samples: Option<usize>,
    pub restarts: Option<usize>,
    pub pairs: Option<usize>,
    pub p_step: Option<f64>,
    pub p_max: Option<f64>,
    pub phi: Option<Vec<f64>>,
}

/// Contents of a `--config` TOML file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    /// Command line to run when none is given, e.g. `"kappa-sweep --family rx"`.
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub cache_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub grids: Grids,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Settings after merging flags over the config file.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub grids: Grids,
}

pub const DEFAULT_SEED: u64 = 20240601;

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("lp_gap", t.lp_gap),
            ("closed_form", t.closed_form),
            ("assert", t.assert),
        ] {
            if !(v.is_finite() && v > 0.0) {
                bail!("tolerance {name} must be positive, got {v}");
            }
        }
        if self.threads == Some(0) {
            bail!("--threads must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_tables_and_rejects_unknown_keys() {
        let cfg: FileConfig = toml::from_str("seed = 5\nformat = \"json\"\n[tolerances]\nassert = 1e-6\n").unwrap();
        assert_eq!(cfg.seed, Some(5));
        assert_eq!(cfg.format, Some(Format::Json));
        assert_eq!(cfg.tolerances.assert, 1e-6);
        assert_eq!(cfg.tolerances.lp_gap, 1e-9);
        assert!(toml::from_str::<FileConfig>("[grids]\nsamples = 10\nbogus = 1\n").is_err());
    }
}
