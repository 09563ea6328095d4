use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::best::{BestEpisodes, EpisodeTrace};
use super::config::{Algorithm, MapSource, TrainConfig};
use super::metrics::{compute_rho, discounted_return, hamming_convergence, RunningMean};
use super::select::{select_with_table, Reasoner};
use super::TrainError;
use crate::gridworld::{Action, GameState, Layout, PacmanEnv, Terminal, Transition};
use crate::ilp::{build_wcdpis, generate_search_space, LearnResult, Learner};
use crate::qlearner::{QLearner, QWeights};
use crate::symbolic::Hypothesis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Won,
    Lost,
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based.
    pub episode: usize,
    /// Discounted return.
    pub ret: f64,
    pub length: u32,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRecord {
    /// 1-based.
    pub batch: usize,
    pub first_episode: usize,
    pub last_episode: usize,
    pub mean_return: f64,
    pub total_s: f64,
    pub learner_s: f64,
    pub reasoner_s: f64,
    /// ρ in force at the batch's last episode; `None` without the symbolic path.
    pub rho: Option<f64>,
    /// Hypothesis in force after the batch (after its learner call, if any).
    pub hypothesis: Option<Hypothesis>,
    /// Distance of `hypothesis` to the run's final hypothesis.
    pub hamming: Option<f64>,
    pub weights: QWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerCall {
    /// 0 for the bootstrap call after the first episode.
    pub batch: usize,
    pub after_episode: usize,
    /// `(episode, return)` of each best-buffer entry, best first.
    pub best: Vec<(usize, f64)>,
    pub examples: usize,
    pub merged_examples: usize,
    pub candidates: usize,
    pub score: u64,
    pub nodes: u64,
    pub exhaustive: bool,
    pub seconds: f64,
    pub hypothesis: Hypothesis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub config: TrainConfig,
    pub feature_names: Vec<String>,
    pub search_space_size: Option<usize>,
    pub episodes: Vec<EpisodeRecord>,
    pub batches: Vec<BatchRecord>,
    pub learner_calls: Vec<LearnerCall>,
    /// Actions taken, per episode.
    pub actions: Vec<Vec<Action>>,
    pub final_weights: QWeights,
    pub final_hypothesis: Option<Hypothesis>,
    pub warnings: Vec<String>,
}

/// Agent-side randomness (ε draws, exploration picks) for a run.
pub fn agent_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Environment randomness for one episode. Each episode has its own stream,
/// so any episode can be replayed from its action list alone.
pub fn episode_rng(seed: u64, episode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode as u64);
    rng
}

/// Re-executes a logged episode, returning the state before each action and
/// the transition it produced.
pub fn replay_episode(
    env: &PacmanEnv,
    seed: u64,
    episode: usize,
    actions: &[Action],
) -> Result<Vec<(GameState, Action, Transition)>, TrainError> {
    let mut rng = episode_rng(seed, episode);
    let mut s = env.reset();
    let mut out = Vec::with_capacity(actions.len());
    for (t, &a) in actions.iter().enumerate() {
        if !s.is_running() || !env.legal_actions(&s).contains(a) {
            return Err(TrainError::Replay(format!(
                "episode {episode}, step {t}: action {a} cannot be applied"
            )));
        }
        let tr = env.step(&s, a, &mut rng);
        let next = tr.state.clone();
        out.push((s, a, tr));
        s = next;
    }
    Ok(out)
}

struct Symbolic {
    learner: Learner,
    best: BestEpisodes,
    staged: BestEpisodes,
    hypothesis: Hypothesis,
    reasoner: Reasoner,
    /// Reasoner time of hypotheses already replaced in this batch.
    reasoner_s: f64,
    /// Best-buffer episodes and result of the previous call. The learner is
    /// a function of its examples, so an unchanged buffer reuses the result.
    last: Option<(Vec<usize>, LearnResult, usize)>,
}

impl Symbolic {
    fn relearn(&mut self, layout: &Layout, batch: usize, after_episode: usize) -> LearnerCall {
        let start = Instant::now();
        let ids: Vec<usize> = self.best.entries().iter().map(|e| e.episode).collect();
        let (res, n_examples) = match self.last.take() {
            Some((prev, res, n)) if prev == ids => (res, n),
            _ => {
                let examples = build_wcdpis(
                    layout,
                    self.best
                        .entries()
                        .iter()
                        .map(|e| (e.steps.as_slice(), e.ret)),
                );
                (self.learner.learn(&examples), examples.len())
            }
        };
        if res.hypothesis != self.hypothesis {
            self.hypothesis = res.hypothesis.clone();
            self.reasoner_s += self.reasoner.take_elapsed().as_secs_f64();
            self.reasoner = Reasoner::new(&self.hypothesis);
        }
        self.last = Some((ids, res.clone(), n_examples));
        LearnerCall {
            batch,
            after_episode,
            best: self
                .best
                .entries()
                .iter()
                .map(|e| (e.episode, e.ret))
                .collect(),
            examples: n_examples,
            merged_examples: res.examples,
            candidates: res.candidates,
            score: res.score,
            nodes: res.nodes,
            exhaustive: res.exhaustive,
            seconds: start.elapsed().as_secs_f64(),
            hypothesis: res.hypothesis,
        }
    }
}

/// Loads the configured map and trains.
pub fn run_training(cfg: &TrainConfig) -> Result<TrainLog, TrainError> {
    let map = MapSource::load(&cfg.map)?;
    run_training_on(cfg, Arc::new(map.layout))
}

/// The training loop: ε-greedy approximate Q-learning whose exploration is
/// biased by a hypothesis relearned after the first episode and after every
/// full batch.
pub fn run_training_on(cfg: &TrainConfig, layout: Arc<Layout>) -> Result<TrainLog, TrainError> {
    let warnings = cfg.validate()?;
    let env = PacmanEnv::new(layout.clone(), cfg.env);
    let mut q = QLearner::with_default_features(cfg.alpha, cfg.gamma);
    let mut rng = agent_rng(cfg.seed);

    let mut sym = match cfg.algorithm {
        Algorithm::Approxq => None,
        Algorithm::Neuroq => {
            let space = generate_search_space(&cfg.bias)?;
            let learner = Learner::new(space, cfg.learner.clone())
                .map_err(|e| TrainError::Config(format!("learner: {e}")))?;
            Some(Symbolic {
                learner,
                best: BestEpisodes::new(cfg.sigma),
                staged: BestEpisodes::new(cfg.sigma),
                hypothesis: Hypothesis::empty(),
                reasoner: Reasoner::new(&Hypothesis::empty()),
                reasoner_s: 0.0,
                last: None,
            })
        }
    };
    let search_space_size = sym.as_ref().map(|s| s.learner.space().len());

    let mut log = TrainLog {
        config: cfg.clone(),
        feature_names: q.feature_names().iter().map(|s| s.to_string()).collect(),
        search_space_size,
        episodes: Vec::with_capacity(cfg.episodes),
        batches: Vec::new(),
        learner_calls: Vec::new(),
        actions: Vec::with_capacity(cfg.episodes),
        final_weights: QWeights::zeros(0),
        final_hypothesis: None,
        warnings,
    };

    let mut running = RunningMean::default();
    let mut batch_start = Instant::now();
    let mut batch_learner_s = 0.0;
    let mut batch_returns = RunningMean::default();
    let mut rho = cfg.rho_max;

    for episode in 1..=cfg.episodes {
        if let Some(s) = &sym {
            rho = match s.best.mean_return() {
                Some(m) => compute_rho(m, running.get(), cfg.rho_min, cfg.rho_max),
                None => cfg.rho_max,
            };
        }
        let reasoner = sym.as_ref().map(|s| &s.reasoner);

        let mut env_rng = episode_rng(cfg.seed, episode);
        let mut s = env.reset();
        let mut legal = env.legal_actions(&s);
        let mut table = q.action_features(&s, legal, &layout);
        let mut rewards = Vec::new();
        let mut actions = Vec::new();
        let outcome = loop {
            let a = select_with_table(
                &q,
                &table,
                &s,
                &layout,
                legal,
                reasoner,
                cfg.epsilon,
                rho,
                &mut rng,
            );
            let f_sa = table
                .iter()
                .find(|(b, _)| *b == a)
                .map(|(_, f)| f.clone())
                .expect("selected action is legal");
            let tr = env.step(&s, a, &mut env_rng);
            let (next_legal, next_table, next_max) = if tr.state.is_running() {
                let l = env.legal_actions(&tr.state);
                let t = q.action_features(&tr.state, l, &layout);
                let m = q.max_in(&t);
                (l, t, m)
            } else {
                (legal, Vec::new(), 0.0)
            };
            q.update_with(&f_sa, tr.reward, next_max, s.tick)
                .map_err(|source| TrainError::Diverged { episode, source })?;
            rewards.push(tr.reward);
            actions.push(a);
            if tr.done {
                break match tr.state.terminal {
                    Terminal::Won => Outcome::Won,
                    Terminal::Lost => Outcome::Lost,
                    Terminal::Running => Outcome::Truncated,
                };
            }
            s = tr.state;
            legal = next_legal;
            table = next_table;
        };

        let ret = discounted_return(&rewards, cfg.gamma);
        running.push(ret);
        batch_returns.push(ret);
        log.episodes.push(EpisodeRecord {
            episode,
            ret,
            length: rewards.len() as u32,
            outcome,
        });
        if let Some(sym) = &mut sym {
            if sym.staged.would_accept(ret) {
                // States are not kept during the episode; the few that make
                // the buffer are rebuilt from their actions.
                let steps = replay_episode(&env, cfg.seed, episode, &actions)?
                    .into_iter()
                    .map(|(s, a, _)| (s, a))
                    .collect();
                sym.staged.offer(EpisodeTrace {
                    episode,
                    ret,
                    steps,
                });
            }
            if episode == 1 {
                sym.best = sym.staged.clone();
                let call = sym.relearn(&layout, 0, episode);
                batch_learner_s += call.seconds;
                log.learner_calls.push(call);
            }
        }
        log.actions.push(actions);

        let batch_full = episode % cfg.batch_size == 0;
        if batch_full || episode == cfg.episodes {
            let batch = episode.div_ceil(cfg.batch_size);
            if let Some(sym) = &mut sym {
                if batch_full {
                    sym.best = sym.staged.clone();
                    let call = sym.relearn(&layout, batch, episode);
                    batch_learner_s += call.seconds;
                    log.learner_calls.push(call);
                }
            }
            let reasoner_s = sym.as_mut().map_or(0.0, |s| {
                std::mem::take(&mut s.reasoner_s) + s.reasoner.take_elapsed().as_secs_f64()
            });
            log.batches.push(BatchRecord {
                batch,
                first_episode: (batch - 1) * cfg.batch_size + 1,
                last_episode: episode,
                mean_return: batch_returns.get().unwrap_or(0.0),
                total_s: batch_start.elapsed().as_secs_f64(),
                learner_s: batch_learner_s,
                reasoner_s,
                rho: sym.as_ref().map(|_| rho),
                hypothesis: sym.as_ref().map(|s| s.hypothesis.clone()),
                hamming: None,
                weights: q.weights.clone(),
            });
            batch_start = Instant::now();
            batch_learner_s = 0.0;
            batch_returns = RunningMean::default();
        }
    }

    log.final_weights = q.weights.clone();
    log.final_hypothesis = sym.map(|s| s.hypothesis);
    if let Some(fin) = &log.final_hypothesis {
        for b in &mut log.batches {
            b.hamming = b.hypothesis.as_ref().map(|h| hamming_convergence(h, fin));
        }
    }
    Ok(log)
}
