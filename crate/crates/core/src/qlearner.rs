//! Linear approximate Q-learning.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gridworld::{legal_from, Action, ActionSet, GameState, Layout};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error(
        "non-finite TD error {delta} (r = {reward}, q = {q}, max q' = {next_max}) at tick {tick}"
    )]
    NonFinite {
        delta: f64,
        reward: f64,
        q: f64,
        next_max: f64,
        tick: u32,
    },
    #[error("feature vector has {found} components, weights have {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("bad weights line {line}: {message}")]
    Snapshot { line: usize, message: String },
}

/// State-action features, each in `[0, 1]`.
pub trait FeatureExtractor: fmt::Debug + Send + Sync {
    fn names(&self) -> &[&'static str];

    fn extract(&self, s: &GameState, a: Action, layout: &Layout) -> Vec<f64>;

    fn len(&self) -> usize {
        self.names().len()
    }

    fn is_empty(&self) -> bool {
        self.names().is_empty()
    }
}

/// Bias, ghost pressure next to the successor cell, eats-food flag, and
/// normalised maze distance from the successor cell to the nearest pellet.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultFeatures;

const DEFAULT_NAMES: [&str; 4] = ["bias", "ghosts_1_step", "eats_food", "closest_food"];

impl FeatureExtractor for DefaultFeatures {
    fn names(&self) -> &[&'static str] {
        &DEFAULT_NAMES
    }

    fn extract(&self, s: &GameState, a: Action, layout: &Layout) -> Vec<f64> {
        let next = s.agent.offset(a.delta());
        let n_ghosts = s.ghosts.len();
        let near = s
            .ghosts
            .iter()
            .filter(|g| !g.is_scared() && g.pos.manhattan(next) <= 1)
            .count();
        let ghosts = if n_ghosts == 0 {
            0.0
        } else {
            near as f64 / n_ghosts as f64
        };
        let eats = if s.food.contains(next) { 1.0 } else { 0.0 };
        let area = (layout.width * layout.height) as f64;
        let closest = layout
            .nearest_in(next, &s.food)
            .map_or(0.0, |d| f64::from(d) / area);
        vec![1.0, ghosts, eats, closest]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QWeights(pub Vec<f64>);

impl QWeights {
    pub fn zeros(n: usize) -> Self {
        QWeights(vec![0.0; n])
    }

    pub fn dot(&self, f: &[f64]) -> f64 {
        self.0.iter().zip(f).map(|(w, x)| w * x).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|w| w.is_finite())
    }

    /// `name value` per line, in feature order.
    pub fn to_text(&self, names: &[&str]) -> String {
        names
            .iter()
            .zip(&self.0)
            .map(|(n, w)| format!("{n} {w:?}\n"))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<(Vec<String>, QWeights), QError> {
        let mut names = Vec::new();
        let mut w = Vec::new();
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let bad = |message: &str| QError::Snapshot {
                line: i + 1,
                message: message.to_owned(),
            };
            let mut parts = line.split_whitespace();
            let name = parts.next().ok_or_else(|| bad("missing name"))?;
            let value = parts
                .next()
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| bad("missing or bad value"))?;
            names.push(name.to_owned());
            w.push(value);
        }
        Ok((names, QWeights(w)))
    }
}

/// Legal actions paired with their features.
pub type ActionFeatures = Vec<(Action, Vec<f64>)>;

/// Tie-break order for the argmax.
const ARGMAX_ORDER: [Action; 5] = Action::ALL;

/// Weights, feature map, and step sizes of one learner.
#[derive(Debug, Clone)]
pub struct QLearner {
    pub weights: QWeights,
    pub alpha: f64,
    pub gamma: f64,
    features: Arc<dyn FeatureExtractor>,
}

impl QLearner {
    pub fn new(features: Arc<dyn FeatureExtractor>, alpha: f64, gamma: f64) -> Self {
        QLearner {
            weights: QWeights::zeros(features.len()),
            alpha,
            gamma,
            features,
        }
    }

    pub fn with_default_features(alpha: f64, gamma: f64) -> Self {
        Self::new(Arc::new(DefaultFeatures), alpha, gamma)
    }

    pub fn feature_names(&self) -> &[&'static str] {
        self.features.names()
    }

    pub fn features(&self, s: &GameState, a: Action, layout: &Layout) -> Vec<f64> {
        self.features.extract(s, a, layout)
    }

    pub fn q_value(&self, s: &GameState, a: Action, layout: &Layout) -> f64 {
        self.weights.dot(&self.features(s, a, layout))
    }

    /// Features of every action in `legal`, in tie-break order.
    pub fn action_features(
        &self,
        s: &GameState,
        legal: ActionSet,
        layout: &Layout,
    ) -> ActionFeatures {
        ARGMAX_ORDER
            .into_iter()
            .filter(|a| legal.contains(*a))
            .map(|a| (a, self.features(s, a, layout)))
            .collect()
    }

    /// Argmax over a feature table; ties go to the earliest row.
    pub fn greedy_in(&self, table: &ActionFeatures) -> Action {
        let mut best: Option<(Action, f64)> = None;
        for (a, f) in table {
            let q = self.weights.dot(f);
            if best.is_none_or(|(_, bq)| q > bq) {
                best = Some((*a, q));
            }
        }
        best.expect("at least one legal action").0
    }

    pub fn max_in(&self, table: &ActionFeatures) -> f64 {
        table
            .iter()
            .map(|(_, f)| self.weights.dot(f))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Argmax over `legal`; ties go to the first action in
    /// north, south, east, west, stop order.
    pub fn greedy_among(&self, s: &GameState, legal: ActionSet, layout: &Layout) -> Action {
        self.greedy_in(&self.action_features(s, legal, layout))
    }

    pub fn greedy_action(&self, s: &GameState, layout: &Layout) -> Action {
        self.greedy_among(s, legal_from(layout, s.agent), layout)
    }

    /// `max_a' Q(s', a')`, or 0 when `s'` is terminal.
    pub fn max_q(&self, s: &GameState, layout: &Layout) -> f64 {
        if !s.is_running() {
            return 0.0;
        }
        self.max_in(&self.action_features(s, legal_from(layout, s.agent), layout))
    }

    /// One TD step on `(s, a, r, s')`; returns the TD error. A time-limit
    /// truncation is not terminal, so `s'` still bootstraps.
    pub fn update(
        &mut self,
        s: &GameState,
        a: Action,
        reward: f64,
        next: &GameState,
        layout: &Layout,
    ) -> Result<f64, QError> {
        let f = self.features(s, a, layout);
        let next_max = self.max_q(next, layout);
        self.update_with(&f, reward, next_max, s.tick)
    }

    /// The update with features and bootstrap value precomputed.
    pub fn update_with(
        &mut self,
        f: &[f64],
        reward: f64,
        next_max: f64,
        tick: u32,
    ) -> Result<f64, QError> {
        if f.len() != self.weights.0.len() {
            return Err(QError::Dimension {
                expected: self.weights.0.len(),
                found: f.len(),
            });
        }
        let q = self.weights.dot(f);
        let delta = reward + self.gamma * next_max - q;
        if !delta.is_finite() {
            return Err(QError::NonFinite {
                delta,
                reward,
                q,
                next_max,
                tick,
            });
        }
        for (w, x) in self.weights.0.iter_mut().zip(f) {
            *w += self.alpha * delta * x;
        }
        if !self.weights.is_finite() {
            return Err(QError::NonFinite {
                delta,
                reward,
                q,
                next_max,
                tick,
            });
        }
        Ok(delta)
    }
}
