//! JSON model definitions.
//!
//! ```json
//! {"variant": "classical_markov", "T": [[0.75, 0.25], [0.25, 0.75]]}
//! {"variant": "quantum_iid", "rho_csv_path": "rho.csv"}
//! {"variant": "finite_mixture", "weights": [0.5, 0.5],
//!  "components": [{"variant": "classical_iid", "p": [1, 0]},
//!                 {"variant": "classical_iid", "p": [0.5, 0.5]}]}
//! ```
//!
//! Density operators come either from a CSV file in the operator interchange
//! format (paths relative to the model file) or inline as real rows under
//! `rho`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SourceModel;
use crate::operator::{csv::read_operator, DensityOperator, HermitianOperator};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ModelSpec {
    ClassicalIid {
        p: Vec<f64>,
    },
    ClassicalMarkov {
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<Vec<f64>>,
    },
    QuantumIid {
        #[serde(flatten)]
        rho: RhoSource,
    },
    QuantumBlockIid {
        #[serde(flatten)]
        rho: RhoSource,
        block_len: usize,
    },
    FiniteMixture {
        weights: Vec<f64>,
        components: Vec<ModelSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_csv_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<f64>>>,
}

impl RhoSource {
    fn load(&self, base: &Path) -> Result<DensityOperator> {
        let op = match (&self.rho_csv_path, &self.rho) {
            (Some(path), None) => read_operator(base.join(path))?,
            (None, Some(rows)) => HermitianOperator::from_real_rows(rows)?,
            _ => {
                return Err(Error::invalid(
                    "give exactly one of `rho_csv_path` and `rho`",
                ))
            }
        };
        DensityOperator::new(op)
    }
}

impl ModelSpec {
    /// Builds the model; relative CSV paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<SourceModel> {
        match self {
            ModelSpec::ClassicalIid { p } => SourceModel::classical_iid(p),
            ModelSpec::ClassicalMarkov { t, pi: None } => SourceModel::classical_markov(t),
            ModelSpec::ClassicalMarkov { t, pi: Some(pi) } => {
                SourceModel::classical_markov_with_stationary(pi, t)
            }
            ModelSpec::QuantumIid { rho } => Ok(SourceModel::quantum_iid(rho.load(base)?)),
            ModelSpec::QuantumBlockIid { rho, block_len } => {
                SourceModel::quantum_block_iid(rho.load(base)?, *block_len)
            }
            ModelSpec::FiniteMixture {
                weights,
                components,
            } => {
                let comps = components
                    .iter()
                    .map(|c| c.build(base))
                    .collect::<Result<Vec<_>>>()?;
                SourceModel::finite_mixture(weights, comps)
            }
        }
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SourceModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: ModelSpec = serde_json::from_str(&text)?;
    spec.build(path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::csv::write_operator;
    use crate::source::marginal_distribution;

    #[test]
    fn parses_every_variant() {
        let iid: ModelSpec = serde_json::from_str(r#"{"variant":"classical_iid","p":[0.25,0.75]}"#).unwrap();
        assert!(matches!(iid.build(Path::new(".")).unwrap(), SourceModel::ClassicalIid(_)));

        let mk: ModelSpec =
            serde_json::from_str(r#"{"variant":"classical_markov","T":[[0.9,0.1],[0.2,0.8]]}"#).unwrap();
        let m = mk.build(Path::new(".")).unwrap();
        assert!((marginal_distribution(&m, 1).unwrap()[0] - 2.0 / 3.0).abs() < 1e-14);

        let mix: ModelSpec = serde_json::from_str(
            r#"{"variant":"finite_mixture","weights":[0.5,0.5],
                "components":[{"variant":"classical_iid","p":[1,0]},{"variant":"classical_iid","p":[0.5,0.5]}]}"#,
        )
        .unwrap();
        assert_eq!(marginal_distribution(&mix.build(Path::new(".")).unwrap(), 1).unwrap(), vec![0.75, 0.25]);

        let inline: ModelSpec =
            serde_json::from_str(r#"{"variant":"quantum_iid","rho":[[0.5,0.5],[0.5,0.5]]}"#).unwrap();
        assert_eq!(inline.build(Path::new(".")).unwrap().site().dim, 2);
    }

    #[test]
    fn reads_rho_from_csv_next_to_the_model() {
        let dir = tempfile::tempdir().unwrap();
        let rho = DensityOperator::maximally_mixed(4);
        write_operator(dir.path().join("rho.csv"), rho.op()).unwrap();
        let model = dir.path().join("model.json");
        std::fs::write(&model, r#"{"variant":"quantum_block_iid","rho_csv_path":"rho.csv","block_len":2}"#).unwrap();
        let m = load_model(&model).unwrap();
        assert_eq!(m.site().dim, 2);
    }

    #[test]
    fn rejects_bad_definitions() {
        assert!(serde_json::from_str::<ModelSpec>(r#"{"variant":"classical_iid"}"#).is_err());
        assert!(serde_json::from_str::<ModelSpec>(r#"{"variant":"nope","p":[1]}"#).is_err());
        let s: ModelSpec = serde_json::from_str(r#"{"variant":"classical_iid","p":[0.5,0.6]}"#).unwrap();
        assert!(s.build(Path::new(".")).is_err());
        let s: ModelSpec = serde_json::from_str(r#"{"variant":"quantum_iid"}"#).unwrap();
        assert!(s.build(Path::new(".")).is_err());
    }
}
