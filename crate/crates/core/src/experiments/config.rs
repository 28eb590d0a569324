use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::operator::DEFAULT_DIM_GUARD;
use crate::source::file::{load_model, ModelSpec};
use crate::source::SourceModel;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Stein,
    Sanov,
    Aep,
    MixingAudit,
    Stationary,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Stein => "stein",
            ExperimentKind::Sanov => "sanov",
            ExperimentKind::Aep => "aep",
            ExperimentKind::MixingAudit => "mixing_audit",
            ExperimentKind::Stationary => "stationary",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

/// A model given inline or as a path to a model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    File { path: PathBuf },
    Inline(ModelSpec),
}

/// A constant or one value per entry of `n_values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    Const(f64),
    PerN(Vec<f64>),
}

impl Schedule {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Schedule::Const(x) => *x,
            Schedule::PerN(v) => v[i],
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Schedule::Const(x) => vec![*x],
            Schedule::PerN(v) => v.clone(),
        }
    }
}

fn default_eps() -> Schedule {
    Schedule::Const(0.1)
}
fn default_delta() -> Schedule {
    Schedule::Const(0.1)
}
fn default_m_slices() -> usize {
    4
}
fn default_max_dim() -> usize {
    DEFAULT_DIM_GUARD
}
fn default_l_values() -> Vec<usize> {
    (1..=10).collect()
}
fn default_tolerance() -> f64 {
    0.05
}
fn default_block_len() -> usize {
    1
}

/// One experiment, read from JSON.
///
/// Model roles by experiment: `stein`, `aep` and `stationary` use `null`
/// and `reference`; `sanov` uses `reference` and the members listed in
/// `omega` (default: every other model); `mixing_audit` audits
/// `reference` and probes every other model against it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    pub models: BTreeMap<String, ModelRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<String>>,
    #[serde(default = "default_eps")]
    pub eps: Schedule,
    #[serde(default = "default_delta")]
    pub delta: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub n_values: Vec<usize>,
    #[serde(default = "default_m_slices")]
    pub m_slices: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Gaps audited by `mixing_audit`.
    #[serde(default = "default_l_values")]
    pub l_values: Vec<usize>,
    /// Final-gap tolerance of the Stein probe in `mixing_audit`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Block length for the ergodic decomposition in `stationary`.
    #[serde(default = "default_block_len")]
    pub block_len: usize,
    /// Directory model paths resolve against; the config file's directory.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn config_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        msg: msg.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| config_err("$", e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.kind.ok_or_else(|| config_err("kind", "missing experiment kind"))
    }

    /// Checks every field the chosen experiment reads.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        if (kind != ExperimentKind::MixingAudit || self.models.len() > 1) && self.n_values.is_empty() {
            return Err(config_err("n_values", "must not be empty"));
        }
        if self.n_values.contains(&0) {
            return Err(config_err("n_values", "entries must be positive"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("n_values", "must be strictly ascending"));
        }
        for (name, s) in [("eps", &self.eps), ("delta", &self.delta)] {
            if let Schedule::PerN(v) = s {
                if v.len() != self.n_values.len() {
                    return Err(config_err(name, format!("has {} entries for {} n_values", v.len(), self.n_values.len())));
                }
            }
        }
        for (i, e) in self.eps.values().into_iter().enumerate() {
            if !(e > 0.0 && e < 1.0) {
                return Err(config_err(&format!("eps[{i}]"), "must lie in (0, 1)"));
            }
        }
        for (i, d) in self.delta.values().into_iter().enumerate() {
            if d.is_nan() || d <= 0.0 {
                return Err(config_err(&format!("delta[{i}]"), "must be positive"));
            }
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(config_err("eta", "must be positive"));
            }
        }
        if self.m_slices == 0 {
            return Err(config_err("m_slices", "must be positive"));
        }
        if self.max_dim == 0 {
            return Err(config_err("max_dim", "must be positive"));
        }
        if self.block_len == 0 {
            return Err(config_err("block_len", "must be positive"));
        }
        if self.l_values.contains(&0) {
            return Err(config_err("l_values", "entries must be positive"));
        }
        let need = |name: &str| {
            if self.models.contains_key(name) {
                Ok(())
            } else {
                Err(config_err(&format!("models.{name}"), "required model is missing"))
            }
        };
        match kind {
            ExperimentKind::Stein | ExperimentKind::Aep | ExperimentKind::Stationary => {
                need("null")?;
                need("reference")?;
            }
            ExperimentKind::Sanov => {
                need("reference")?;
                if self.omega_names().is_empty() {
                    return Err(config_err("omega", "null family is empty"));
                }
                for name in self.omega_names() {
                    need(&name)?;
                }
            }
            ExperimentKind::MixingAudit => need("reference")?,
        }
        Ok(())
    }

    pub fn omega_names(&self) -> Vec<String> {
        match &self.omega {
            Some(v) => v.clone(),
            None => self.models.keys().filter(|k| *k != "reference").cloned().collect(),
        }
    }

    pub fn model(&self, name: &str) -> Result<SourceModel> {
        let r = self
            .models
            .get(name)
            .ok_or_else(|| config_err(&format!("models.{name}"), "required model is missing"))?;
        let built = match r {
            ModelRef::File { path } => load_model(self.base_dir.join(path)),
            ModelRef::Inline(spec) => spec.build(&self.base_dir),
        };
        built.map_err(|e| config_err(&format!("models.{name}"), e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON form, first 16 digits.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STEIN: &str = r#"{
        "kind": "stein",
        "models": {
            "null": {"variant": "classical_iid", "p": [0.5, 0.5]},
            "reference": {"variant": "classical_iid", "p": [0.25, 0.75]}
        },
        "eps": 0.1,
        "n_values": [64, 128]
    }"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_json(STEIN, ".").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.kind().unwrap(), ExperimentKind::Stein);
        assert_eq!(cfg.m_slices, 4);
        assert!(cfg.model("null").unwrap().is_classical());
    }

    #[test]
    fn errors_name_the_field() {
        let bad = STEIN.replace("[64, 128]", "[128, 64]");
        let err = ExperimentConfig::from_json(&bad, ".").unwrap().validate().unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "n_values"), "{err}");

        let bad = STEIN.replace("\"eps\": 0.1", "\"eps\": [0.1, 1.5]");
        let err = ExperimentConfig::from_json(&bad, ".").unwrap().validate().unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "eps[1]"), "{err}");

        let bad = STEIN.replace("\"reference\"", "\"ref\"");
        let err = ExperimentConfig::from_json(&bad, ".").unwrap().validate().unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "models.reference"), "{err}");

        assert!(ExperimentConfig::from_json(r#"{"models": {}, "bogus": 1}"#, ".").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::from_json(STEIN, ".").unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 7;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
