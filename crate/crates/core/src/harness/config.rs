//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::models::{ModelParams, ZetaLaw};
use crate::sim::{ModelKind, ModelSpec, StatKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    /// Closed form where one exists, Monte Carlo otherwise.
    #[default]
    Analytic,
    /// Always Monte Carlo.
    McOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub alpha0: f64,
    pub alpha_zeta: f64,
    #[serde(serialize_with = "ser_radius", deserialize_with = "de_radius")]
    pub kappa_u: f64,
    pub spacing: f64,
    pub zeta_law: ZetaLaw,
    pub stat: StatKind,
    pub n_grid: Vec<usize>,
    pub reps: u64,
    pub seed: u64,
    pub c_j: f64,
    pub c_t: f64,
    pub epsilon: f64,
    pub mu_mode: MuMode,
    /// Simulate margins around the observed window (interior statistics).
    pub padded: bool,
    pub peer_lambda: f64,
    pub peer_beta: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Neighborhood,
            alpha0: 0.0,
            alpha_zeta: -1.0,
            kappa_u: 1.0,
            spacing: 1.0,
            zeta_law: ZetaLaw::Lattice,
            stat: StatKind::Degree,
            n_grid: vec![256, 4096],
            reps: 200,
            seed: 1,
            c_j: 1.0,
            c_t: 1.0,
            epsilon: 0.05,
            mu_mode: MuMode::Analytic,
            padded: true,
            peer_lambda: 0.5,
            peer_beta: 1.0,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn ser_radius<S: Serializer>(k: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if k.is_infinite() && *k > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*k)
    }
}

fn de_radius<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Radius {
        Number(f64),
        Int(i64),
        Text(String),
    }
    match Radius::deserialize(d)? {
        Radius::Number(x) => Ok(x),
        Radius::Int(x) => Ok(x as f64),
        Radius::Text(t) if matches!(t.as_str(), "inf" | "+inf" | "infinity") => Ok(f64::INFINITY),
        Radius::Text(t) => Err(serde::de::Error::custom(format!("invalid radius `{t}`"))),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let cfg = Self::from_toml_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(invalid("reps", "must be at least 1"));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(invalid("n_grid", "must be a nonempty list of positive sizes"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("n_grid", "must be strictly ascending"));
        }
        if !(self.c_j > 0.0 && self.c_t > 0.0) {
            return Err(invalid("c_j/c_t", "must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(invalid("epsilon", "must lie in (0, 1/4)"));
        }
        self.model_spec().map(|_| ())
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let params = ModelParams::new(self.alpha0, self.alpha_zeta, self.kappa_u, self.spacing)?;
        let spec = ModelSpec {
            kind: self.model,
            params,
            law: self.zeta_law,
            stat: self.stat,
            peer_lambda: self.peer_lambda,
            peer_beta: self.peer_beta,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            model = "utility"
            alpha0 = 0.5
            alpha_zeta = -2.0
            kappa_u = inf
            stat = "peer_avg"
            n_grid = [64, 128]
            reps = 10
            seed = 7
            mu_mode = "mc_oracle"
            padded = false
            "#,
        )
        .unwrap();
        assert_eq!(cfg.model, ModelKind::Utility);
        assert!(cfg.kappa_u.is_infinite());
        assert_eq!(cfg.stat, StatKind::PeerAvg);
        assert_eq!(cfg.mu_mode, MuMode::McOracle);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn radius_accepts_integers_and_text() {
        let a = ExperimentConfig::from_toml_str("kappa_u = 2").unwrap();
        assert_eq!(a.kappa_u, 2.0);
        let b = ExperimentConfig::from_toml_str("kappa_u = \"inf\"").unwrap();
        assert!(b.kappa_u.is_infinite());
        assert!(ExperimentConfig::from_toml_str("kappa_u = \"wide\"").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("colour = 3").is_err());
    }

    #[test]
    fn validation_failures() {
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.reps = 0));
        assert!(bad(|c| c.n_grid = vec![]));
        assert!(bad(|c| c.n_grid = vec![64, 32]));
        assert!(bad(|c| c.alpha_zeta = 1.0));
        assert!(bad(|c| c.epsilon = 0.3));
        assert!(bad(|c| c.peer_lambda = 1.0));
        assert!(bad(|c| {
            c.zeta_law = ZetaLaw::IidUniform;
            c.model = ModelKind::Neighborhood;
        }));
        assert!(ExperimentConfig::default().validate().is_ok());
    }
}
