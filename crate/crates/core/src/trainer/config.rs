use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TrainError;
use crate::gridworld::{bundled, EnvConfig, Layout};
use crate::ilp::{BiasConfig, LearnerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Plain approximate Q-learning; the symbolic path is off.
    Approxq,
    /// Approximate Q-learning with rule-biased exploration.
    Neuroq,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Approxq => "approxq",
            Algorithm::Neuroq => "neuroq",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "approxq" => Ok(Algorithm::Approxq),
            "neuroq" => Ok(Algorithm::Neuroq),
            other => Err(format!(
                "unknown algorithm `{other}` (expected approxq or neuroq)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub episodes: usize,
    pub batch_size: usize,
    /// Capacity of the best-episode buffer.
    pub sigma: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub seed: u64,
    /// A bundled map name (`small`, `large`) or a path to a `.lay` file.
    pub map: String,
    pub env: EnvConfig,
    pub learner: LearnerConfig,
    pub bias: BiasConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            algorithm: Algorithm::Neuroq,
            episodes: 20_000,
            batch_size: 100,
            sigma: 5,
            alpha: 0.2,
            gamma: 0.8,
            epsilon: 0.05,
            rho_min: 0.1,
            rho_max: 0.95,
            seed: 0,
            map: "small".to_owned(),
            env: EnvConfig::default(),
            learner: LearnerConfig::default(),
            bias: BiasConfig::default(),
        }
    }
}

impl TrainConfig {
    /// Checks every bound; returns advisory warnings on success.
    pub fn validate(&self) -> Result<Vec<String>, TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.episodes == 0 {
            return bad("episodes must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.sigma == 0 {
            return bad("sigma must be at least 1".into());
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
            ("rho_min", self.rho_min),
            ("rho_max", self.rho_max),
            ("env.chase_prob", self.env.chase_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        if self.rho_min > self.rho_max {
            return bad(format!(
                "rho_min {} exceeds rho_max {}",
                self.rho_min, self.rho_max
            ));
        }
        if self.env.max_steps == 0 {
            return bad("env.max_steps must be at least 1".into());
        }
        self.learner
            .validate()
            .map_err(|e| TrainError::Config(format!("learner: {e}")))?;
        let mut warnings = Vec::new();
        if !self.episodes.is_multiple_of(self.batch_size) {
            warnings.push(format!(
                "episodes ({}) is not a multiple of batch_size ({}); the last batch is partial",
                self.episodes, self.batch_size
            ));
        }
        Ok(warnings)
    }
}

/// A parsed map with its source text.
#[derive(Debug, Clone)]
pub struct MapSource {
    pub text: String,
    pub layout: Layout,
}

impl MapSource {
    /// Resolves a bundled name first, then a file path.
    pub fn load(name: &str) -> Result<Self, TrainError> {
        let text = match bundled(name) {
            Some(t) => t.to_owned(),
            None => std::fs::read_to_string(Path::new(name))
                .map_err(|e| TrainError::Map(format!("{name}: {e}")))?,
        };
        let layout = Layout::parse(&text).map_err(|e| TrainError::Map(format!("{name}: {e}")))?;
        Ok(MapSource { text, layout })
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.text.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
