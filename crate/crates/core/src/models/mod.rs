//! The four price predictors and their on-disk format.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::files::{read_json, write_json};
use crate::{Error, Result};

pub mod forest;
pub mod linear;
pub mod lstm;
pub mod sgd;

pub use forest::{fit_random_forest, forest_predict, Forest, ForestConfig};
pub use linear::{fit_ols, LinearModel};
pub use lstm::{lstm_predict, lstm_train, LstmConfig, LstmModel};
pub use sgd::{fit_sgd_huber, huber_derivative, huber_loss, SgdConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lr,
    Sgd,
    Rf,
    Lstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Lr, ModelKind::Sgd, ModelKind::Rf, ModelKind::Lstm];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "lr",
            ModelKind::Sgd => "sgd",
            ModelKind::Rf => "rf",
            ModelKind::Lstm => "lstm",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(vec![format!("unknown model '{s}' (expected lr, sgd, rf or lstm)")]))
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    version: u32,
    kind: ModelKind,
    model: T,
}

pub fn save_model<T: Serialize>(path: &Path, kind: ModelKind, model: &T) -> Result<()> {
    write_json(path, &Envelope { version: FORMAT_VERSION, kind, model })
}

pub fn load_model<T: DeserializeOwned>(path: &Path, kind: ModelKind) -> Result<T> {
    let env: Envelope<T> = read_json(path)?;
    if env.version != FORMAT_VERSION {
        return Err(Error::Data(format!(
            "{}: model format version {} (expected {FORMAT_VERSION})",
            path.display(),
            env.version
        )));
    }
    if env.kind != kind {
        return Err(Error::Data(format!("{}: holds a {} model, expected {kind}", path.display(), env.kind)));
    }
    Ok(env.model)
}

pub(crate) fn check_finite_rows(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::InsufficientData("empty design matrix".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Data(format!("{} rows but {} targets", x.len(), y.len())));
    }
    let width = x[0].len();
    if x.iter().any(|r| r.len() != width) {
        return Err(Error::Data("ragged design matrix".into()));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in training data".into()));
    }
    Ok(width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_roundtrip_and_kind_check() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = LinearModel { coefficients: vec![1.5, -2.0], intercept: 0.25 };
        save_model(&p, ModelKind::Lr, &m).unwrap();
        let back: LinearModel = load_model(&p, ModelKind::Lr).unwrap();
        assert_eq!(back, m);
        assert!(load_model::<LinearModel>(&p, ModelKind::Sgd).is_err());
    }

    #[test]
    fn kind_names() {
        for k in ModelKind::ALL {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
        assert!("xgb".parse::<ModelKind>().is_err());
    }
}
