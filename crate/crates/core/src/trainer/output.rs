//! Run logs on disk. Per seed, under `seed_<n>/`:
//!
//! - `episodes.csv`: seed, episode, return, length, outcome
//! - `batches.csv`: seed, batch, mean_return, total_s, learner_s, reasoner_s, rho, hamming
//! - `learner.csv`: one row per learner call, with the best-buffer episodes it saw
//! - `hypothesis_<batch>.lp`: hypothesis after each batch (`hypothesis_0.lp` is the bootstrap)
//! - `weights_<batch>.txt`: Q-weights after each batch
//! - `actions.txt`: one line of `N`/`S`/`E`/`W`/`X` letters per episode
//!
//! plus `manifest.json` at the run root.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{sha256_hex, MapSource, TrainConfig};
use super::run::{Outcome, TrainLog};
use super::TrainError;
use crate::gridworld::Action;

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: TrainConfig,
    pub map_sha256: String,
    pub code_version: String,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    pub fn new(config: TrainConfig, map: &MapSource, seeds: Vec<u64>, out_dir: PathBuf) -> Self {
        RunManifest {
            config,
            map_sha256: map.sha256(),
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            seeds,
            out_dir,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, TrainError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| TrainError::Io(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }

    /// Reads a manifest from a file or from a run directory.
    pub fn read(path: &Path) -> Result<Self, TrainError> {
        let file = if path.is_dir() {
            path.join(MANIFEST_FILE)
        } else {
            path.to_path_buf()
        };
        let text = fs::read_to_string(&file)
            .map_err(|e| TrainError::Io(format!("{}: {e}", file.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| TrainError::Config(format!("{}: {e}", file.display())))
    }

    /// Loads the map and checks it is the one the manifest was written for.
    pub fn load_map(&self) -> Result<MapSource, TrainError> {
        let map = MapSource::load(&self.config.map)?;
        if map.sha256() != self.map_sha256 {
            return Err(TrainError::Map(format!(
                "{}: contents changed since the run (sha256 {} != {})",
                self.config.map,
                map.sha256(),
                self.map_sha256
            )));
        }
        Ok(map)
    }

    /// The configuration of one seed's run.
    pub fn config_for(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            ..self.config.clone()
        }
    }
}

pub fn seed_dir(root: &Path, seed: u64) -> PathBuf {
    root.join(format!("seed_{seed}"))
}

#[derive(Serialize)]
struct EpisodeRow {
    seed: u64,
    episode: usize,
    #[serde(rename = "return")]
    ret: f64,
    length: u32,
    outcome: Outcome,
}

#[derive(Serialize)]
struct BatchRow {
    seed: u64,
    batch: usize,
    mean_return: f64,
    total_s: f64,
    learner_s: f64,
    reasoner_s: f64,
    rho: Option<f64>,
    hamming: Option<f64>,
}

#[derive(Serialize)]
struct LearnerRow {
    seed: u64,
    batch: usize,
    after_episode: usize,
    best_episodes: String,
    best_returns: String,
    examples: usize,
    merged_examples: usize,
    candidates: usize,
    score: u64,
    nodes: u64,
    exhaustive: bool,
    seconds: f64,
}

fn csv_err(e: csv::Error) -> TrainError {
    TrainError::Io(e.to_string())
}

fn write_csv<T: Serialize>(
    path: &Path,
    rows: impl IntoIterator<Item = T>,
) -> Result<(), TrainError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn actions_line(actions: &[Action]) -> String {
    actions.iter().map(|a| a.letter()).collect()
}

pub fn parse_actions_line(line: &str) -> Result<Vec<Action>, TrainError> {
    line.trim()
        .chars()
        .map(|c| {
            Action::from_letter(c)
                .ok_or_else(|| TrainError::Replay(format!("bad action letter `{c}`")))
        })
        .collect()
}

/// Writes one seed's logs into `seed_dir(root, seed)`; returns that directory.
pub fn write_seed_logs(root: &Path, log: &TrainLog) -> Result<PathBuf, TrainError> {
    let seed = log.config.seed;
    let dir = seed_dir(root, seed);
    fs::create_dir_all(&dir)?;

    write_csv(
        &dir.join("episodes.csv"),
        log.episodes.iter().map(|e| EpisodeRow {
            seed,
            episode: e.episode,
            ret: e.ret,
            length: e.length,
            outcome: e.outcome,
        }),
    )?;
    write_csv(
        &dir.join("batches.csv"),
        log.batches.iter().map(|b| BatchRow {
            seed,
            batch: b.batch,
            mean_return: b.mean_return,
            total_s: b.total_s,
            learner_s: b.learner_s,
            reasoner_s: b.reasoner_s,
            rho: b.rho,
            hamming: b.hamming,
        }),
    )?;
    write_csv(
        &dir.join("learner.csv"),
        log.learner_calls.iter().map(|c| LearnerRow {
            seed,
            batch: c.batch,
            after_episode: c.after_episode,
            best_episodes: c
                .best
                .iter()
                .map(|(e, _)| e.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            best_returns: c
                .best
                .iter()
                .map(|(_, r)| format!("{r:?}"))
                .collect::<Vec<_>>()
                .join(" "),
            examples: c.examples,
            merged_examples: c.merged_examples,
            candidates: c.candidates,
            score: c.score,
            nodes: c.nodes,
            exhaustive: c.exhaustive,
            seconds: c.seconds,
        }),
    )?;

    if let Some(boot) = log.learner_calls.iter().find(|c| c.batch == 0) {
        fs::write(dir.join("hypothesis_0.lp"), boot.hypothesis.to_string())?;
    }
    let names: Vec<&str> = log.feature_names.iter().map(String::as_str).collect();
    for b in &log.batches {
        if let Some(h) = &b.hypothesis {
            fs::write(
                dir.join(format!("hypothesis_{}.lp", b.batch)),
                h.to_string(),
            )?;
        }
        fs::write(
            dir.join(format!("weights_{}.txt", b.batch)),
            b.weights.to_text(&names),
        )?;
    }

    let mut actions = String::new();
    for a in &log.actions {
        actions.push_str(&actions_line(a));
        actions.push('\n');
    }
    fs::write(dir.join("actions.txt"), actions)?;
    Ok(dir)
}

/// SHA-256 of a file, hex encoded.
pub fn file_sha256(path: &Path) -> Result<String, TrainError> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Best-buffer episodes the learner saw at `batch`, read back from
/// `learner.csv`.
pub fn read_learner_best(
    seed_dir: &Path,
    batch: usize,
) -> Result<Option<Vec<(usize, f64)>>, TrainError> {
    let path = seed_dir.join("learner.csv");
    let mut r = csv::Reader::from_path(&path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TrainError::Io(format!("{}: no `{name}` column", path.display())))
    };
    let (c_batch, c_eps, c_rets) = (col("batch")?, col("best_episodes")?, col("best_returns")?);
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.get(c_batch).and_then(|b| b.parse::<usize>().ok()) != Some(batch) {
            continue;
        }
        let bad = || {
            TrainError::Io(format!(
                "{}: malformed row for batch {batch}",
                path.display()
            ))
        };
        let eps: Vec<usize> = rec[c_eps]
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let rets: Vec<f64> = rec[c_rets]
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        if eps.len() != rets.len() {
            return Err(bad());
        }
        return Ok(Some(eps.into_iter().zip(rets).collect()));
    }
    Ok(None)
}

/// Action lists of every episode, from `actions.txt`.
pub fn read_actions(seed_dir: &Path) -> Result<Vec<Vec<Action>>, TrainError> {
    let text = fs::read_to_string(seed_dir.join("actions.txt"))?;
    text.lines().map(parse_actions_line).collect()
}
