use std::cell::Cell;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::gridworld::{Action, ActionSet, Direction, GameState, Layout};
use crate::grounding::{ground_features, StateSummary};
use crate::qlearner::{ActionFeatures, QLearner};
use crate::symbolic::{DirLiteral, DirMask, Hypothesis, RuleMatcher};

/// A hypothesis compiled for per-step queries, with a running tally of the
/// time spent answering them.
#[derive(Debug, Clone)]
pub struct Reasoner {
    matchers: Vec<RuleMatcher>,
    elapsed: Cell<Duration>,
    calls: Cell<u64>,
}

impl Reasoner {
    pub fn new(h: &Hypothesis) -> Self {
        Reasoner {
            matchers: h.rules().iter().map(RuleMatcher::new).collect(),
            elapsed: Cell::new(Duration::ZERO),
            calls: Cell::new(0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.matchers.is_empty()
    }

    /// Moves the hypothesis derives in `s`, as actions.
    pub fn suggest(&self, s: &GameState, layout: &Layout) -> ActionSet {
        let start = Instant::now();
        let mask = if self.matchers.iter().all(|m| m.dir_literals().is_some()) {
            let summary = StateSummary::of(s, layout);
            self.matchers
                .iter()
                .map(|m| fire_on_summary(m.dir_literals().expect("checked"), &summary))
                .fold(DirMask::default(), |a, b| a | b)
        } else {
            let ctx = ground_features(s, layout).closure();
            self.matchers
                .iter()
                .map(|m| m.fire(&ctx))
                .fold(DirMask::default(), |a, b| a | b)
        };
        let out = mask.iter().map(Action::from_direction).collect();
        self.elapsed.set(self.elapsed.get() + start.elapsed());
        self.calls.set(self.calls.get() + 1);
        out
    }

    /// Total time spent in [`Reasoner::suggest`] since the last reset.
    pub fn take_elapsed(&self) -> Duration {
        self.elapsed.replace(Duration::ZERO)
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }
}

/// Same answer as grounding the state and firing the rule, without
/// materialising any atoms.
fn fire_on_summary(lits: &[DirLiteral], summary: &StateSummary) -> DirMask {
    let mut mask = DirMask::default();
    for d in Direction::ALL {
        if lits
            .iter()
            .all(|l| summary.holds(l.predicate, d, &l.consts) != l.negated)
        {
            mask.insert(d);
        }
    }
    mask
}

fn uniform<R: Rng + ?Sized>(set: ActionSet, rng: &mut R) -> Action {
    set.nth(rng.random_range(0..set.len()))
        .expect("index below set length")
}

/// Exploration draw: with probability `rho` a suggested action, otherwise a
/// legal unsuggested one. With no usable suggestion (none legal, or every
/// legal action suggested) the draw is uniform over `legal`.
pub fn explore<R: Rng + ?Sized>(
    legal: ActionSet,
    suggested: ActionSet,
    rho: f64,
    rng: &mut R,
) -> Action {
    let good = suggested.intersection(legal);
    if good.is_empty() || good == legal {
        return uniform(legal, rng);
    }
    if rng.random_bool(rho) {
        uniform(good, rng)
    } else {
        uniform(legal.difference(good), rng)
    }
}

/// ε-greedy selection whose exploratory branch is biased towards the moves
/// `reasoner` suggests. Without a reasoner (or with an empty hypothesis)
/// this is plain ε-greedy.
#[allow(clippy::too_many_arguments)]
pub fn select_action<R: Rng + ?Sized>(
    q: &QLearner,
    s: &GameState,
    layout: &Layout,
    legal: ActionSet,
    reasoner: Option<&Reasoner>,
    epsilon: f64,
    rho: f64,
    rng: &mut R,
) -> Action {
    let table = q.action_features(s, legal, layout);
    select_with_table(q, &table, s, layout, legal, reasoner, epsilon, rho, rng)
}

/// [`select_action`] with the features of `legal` already computed.
#[allow(clippy::too_many_arguments)]
pub fn select_with_table<R: Rng + ?Sized>(
    q: &QLearner,
    table: &ActionFeatures,
    s: &GameState,
    layout: &Layout,
    legal: ActionSet,
    reasoner: Option<&Reasoner>,
    epsilon: f64,
    rho: f64,
    rng: &mut R,
) -> Action {
    if rng.random::<f64>() >= epsilon {
        return q.greedy_in(table);
    }
    let suggested = match reasoner {
        Some(r) if !r.is_empty() => r.suggest(s, layout),
        _ => ActionSet::empty(),
    };
    explore(legal, suggested, rho, rng)
}
