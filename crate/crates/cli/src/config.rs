//! TOML run configuration. Every section and key is optional; unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub rotor: RotorSection,
    #[serde(default)]
    pub wavepacket: WavepacketSection,
    #[serde(default)]
    pub otoc: OtocSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotorSection {
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub lambda: Option<f64>,
    pub hbar: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub m: Option<f64>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub jitter: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketSection {
    pub k0: Option<i64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtocSection {
    pub steps: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub kind: Option<String>,
    pub dim: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub k_values: Option<Vec<f64>>,
    pub lambda_values: Option<Vec<f64>>,
    pub diagnostics: Option<Vec<String>>,
    pub base_seed: Option<u64>,
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub parallelism: Option<usize>,
    pub backend: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Resolved settings of a run, echoed into output metadata.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EffectiveConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotor: Option<ptkr::RotorParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavepacket: Option<ptkr::WavepacketSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<ptkr::rmt::EnsembleSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_parse() {
        let cfg = RunConfig::parse(
            r#"
            [rotor]
            K = 30.0
            lambda = 1e-4
            N = 101
            [ensemble]
            kind = "ginue"
            dim = 50
            [grid]
            k_values = [0.5, 1.0]
            lambda_values = [0.0]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.rotor.k, Some(30.0));
        assert_eq!(cfg.rotor.n, Some(101));
        assert_eq!(cfg.ensemble.dim, Some(50));
        assert_eq!(cfg.grid.k_values.as_deref(), Some(&[0.5, 1.0][..]));
        assert!(cfg.wavepacket.k0.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[rotor]\nkick = 1.0\n").is_err());
        assert!(RunConfig::parse("[rotr]\nK = 1.0\n").is_err());
        assert!(RunConfig::parse("top = 1\n").is_err());
    }
}
