//! Approximate Q-learning for Pac-Man whose exploration is softly biased by
//! answer-set policy heuristics, relearned from the best episodes after every
//! batch.
//!
//! Modules, bottom-up:
//! - [`gridworld`]: the environment.
//! - [`symbolic`]: ground atoms, rules, and model evaluation.
//! - [`grounding`]: feature and action maps between the two.
//! - [`ilp`]: hypothesis search over weighted examples.
//! - [`qlearner`]: linear Q-function and its update.
//! - [`trainer`]: the episode/batch loop, metrics, and run logs.

pub mod gridworld;
pub mod grounding;
pub mod ilp;
pub mod qlearner;
pub mod symbolic;
pub mod trainer;
