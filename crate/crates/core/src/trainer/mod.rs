//! The training loop, its metrics, and its logs.

mod best;
mod config;
mod metrics;
mod output;
mod run;
mod select;

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

pub use best::{BestEpisodes, EpisodeTrace};
pub use config::{sha256_hex, Algorithm, MapSource, TrainConfig};
pub use metrics::{compute_rho, discounted_return, hamming_convergence, RunningMean};
pub use output::{
    actions_line, file_sha256, parse_actions_line, read_actions, read_learner_best, seed_dir,
    write_seed_logs, RunManifest, MANIFEST_FILE,
};
pub use run::{
    agent_rng, episode_rng, replay_episode, run_training, run_training_on, BatchRecord,
    EpisodeRecord, LearnerCall, Outcome, TrainLog,
};
pub use select::{explore, select_action, select_with_table, Reasoner};

use crate::gridworld::PacmanEnv;
use crate::ilp::{build_wcdpis, generate_search_space, BiasError, IlpTask};
use crate::qlearner::QError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("map: {0}")]
    Map(String),
    #[error("mode bias: {0}")]
    Bias(#[from] BiasError),
    #[error("episode {episode}: {source}")]
    Diverged {
        episode: usize,
        #[source]
        source: QError,
    },
    #[error("replay: {0}")]
    Replay(String),
    #[error("no learner call was logged for batch {0}")]
    MissingBatch(usize),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for TrainError {
    fn from(e: std::io::Error) -> Self {
        TrainError::Io(e.to_string())
    }
}

/// Rebuilds the ILP task the learner solved at `batch` (0 is the bootstrap
/// call) of one seed, by replaying the best-buffer episodes it saw.
pub fn reconstruct_task(run_dir: &Path, seed: u64, batch: usize) -> Result<IlpTask, TrainError> {
    let manifest = RunManifest::read(run_dir)?;
    let cfg = manifest.config_for(seed);
    let map = manifest.load_map()?;
    let dir = seed_dir(run_dir, seed);
    let best = read_learner_best(&dir, batch)?.ok_or(TrainError::MissingBatch(batch))?;
    let actions = read_actions(&dir)?;
    let env = PacmanEnv::new(Arc::new(map.layout.clone()), cfg.env);
    let mut episodes = Vec::with_capacity(best.len());
    for &(episode, ret) in &best {
        let acts = actions.get(episode.wrapping_sub(1)).ok_or_else(|| {
            TrainError::Replay(format!("episode {episode} missing from actions.txt"))
        })?;
        let steps: Vec<_> = replay_episode(&env, seed, episode, acts)?
            .into_iter()
            .map(|(s, a, _)| (s, a))
            .collect();
        episodes.push((steps, ret));
    }
    let examples = build_wcdpis(
        &map.layout,
        episodes.iter().map(|(s, r)| (s.as_slice(), *r)),
    );
    Ok(IlpTask::new(generate_search_space(&cfg.bias)?, examples))
}
