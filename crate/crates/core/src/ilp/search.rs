use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bias::SearchSpace;
use super::coverage::CoverageMatrix;
use super::examples::Wcdpi;
use crate::grounding::GroundContext;
use crate::symbolic::{DirMask, Hypothesis, RuleMatcher};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnerError {
    #[error("the search space is empty")]
    EmptySpace,
    #[error("max_rules must be at least 1")]
    ZeroRules,
    #[error("node_budget must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    /// Largest hypothesis, in rules.
    pub max_rules: usize,
    /// Branch-and-bound nodes before falling back to local search.
    pub node_budget: u64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            max_rules: 4,
            node_budget: 2_000_000,
            restarts: 8,
            seed: 0,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        if self.max_rules == 0 {
            return Err(LearnerError::ZeroRules);
        }
        if self.node_budget == 0 {
            return Err(LearnerError::ZeroBudget);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnResult {
    pub hypothesis: Hypothesis,
    /// Indices into the search space, ascending.
    pub rule_indices: Vec<usize>,
    pub score: u64,
    /// False when the node budget ran out and local search finished the job.
    pub exhaustive: bool,
    pub nodes: u64,
    /// Examples left after merging duplicates and dropping zero penalties.
    pub examples: usize,
    /// Rules left after dominance pruning.
    pub candidates: usize,
}

/// Hypothesis search over a fixed space. Rule firings are cached per
/// context, so repeated calls on overlapping example sets are cheap; the
/// result of a call does not depend on what was cached before.
#[derive(Debug)]
pub struct Learner {
    space: SearchSpace,
    matchers: Vec<RuleMatcher>,
    cfg: LearnerConfig,
    cache: HashMap<GroundContext, Vec<DirMask>>,
}

impl Learner {
    pub fn new(space: SearchSpace, cfg: LearnerConfig) -> Result<Self, LearnerError> {
        if space.is_empty() {
            return Err(LearnerError::EmptySpace);
        }
        cfg.validate()?;
        let matchers = space.rules().iter().map(RuleMatcher::new).collect();
        Ok(Learner {
            space,
            matchers,
            cfg,
            cache: HashMap::new(),
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }

    fn ensure_cached(&mut self, ctx: &GroundContext) {
        if !self.cache.contains_key(ctx) {
            let closed = ctx.closure();
            let masks = self.matchers.iter().map(|m| m.fire(&closed)).collect();
            self.cache.insert(ctx.clone(), masks);
        }
    }

    /// Coverage of every space rule over `examples`.
    pub fn coverage(&mut self, examples: &[Wcdpi]) -> CoverageMatrix {
        for e in examples {
            self.ensure_cached(&e.context);
        }
        let fired: Vec<&[DirMask]> = examples
            .iter()
            .map(|e| self.cache[&e.context].as_slice())
            .collect();
        CoverageMatrix::from_fired(examples, &fired, self.space.len())
    }

    pub fn learn(&mut self, examples: &[Wcdpi]) -> LearnResult {
        let merged = merge_examples(examples);
        let matrix = self.coverage(&merged);
        let weights: Vec<u64> = merged.iter().map(|e| e.penalty).collect();
        let lens: Vec<u64> = self.space.rules().iter().map(|r| r.len() as u64).collect();
        let mut search = Search::new(&matrix, &weights, &lens, &self.cfg);
        let (best, exhaustive) = search.run();
        let rules = best
            .rules
            .iter()
            .map(|&r| self.space.rules()[r].clone())
            .collect();
        LearnResult {
            hypothesis: Hypothesis::new(rules).expect("space rules are distinct"),
            rule_indices: best.rules,
            score: best.score,
            exhaustive,
            nodes: search.nodes,
            examples: merged.len(),
            candidates: search.cands.len(),
        }
    }
}

/// One-shot convenience wrapper around [`Learner`].
pub fn learn(
    space: &SearchSpace,
    examples: &[Wcdpi],
    cfg: &LearnerConfig,
) -> Result<LearnResult, LearnerError> {
    Ok(Learner::new(space.clone(), cfg.clone())?.learn(examples))
}

/// Sums the penalties of examples with the same inclusion set and context and
/// drops examples whose penalty is zero. Neither step changes any score.
pub fn merge_examples(examples: &[Wcdpi]) -> Vec<Wcdpi> {
    let mut index: HashMap<(DirMask, &GroundContext), usize> = HashMap::new();
    let mut out: Vec<Wcdpi> = Vec::new();
    for e in examples.iter().filter(|e| e.penalty > 0) {
        match index.get(&(e.inc_mask(), &e.context)) {
            Some(&i) => out[i].penalty += e.penalty,
            None => {
                index.insert((e.inc_mask(), &e.context), out.len());
                out.push(e.clone());
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Best {
    score: u64,
    lits: u64,
    /// Space indices, ascending.
    rules: Vec<usize>,
}

impl Best {
    fn key(&self) -> (u64, u64, &[usize]) {
        (self.score, self.lits, &self.rules)
    }
}

struct Search<'a> {
    weights: &'a [u64],
    lens: &'a [u64],
    max_rules: usize,
    budget: u64,
    restarts: usize,
    seed: u64,
    /// Surviving rules as space indices, ascending.
    cands: Vec<usize>,
    inc: Vec<&'a FixedBitSet>,
    exc: Vec<&'a FixedBitSet>,
    /// Examples a rule covers without also killing them.
    good: Vec<FixedBitSet>,
    total: u64,
    n: usize,
    nodes: u64,
    best: Best,
}

fn weight_of(bits: &FixedBitSet, weights: &[u64]) -> u64 {
    bits.ones().map(|e| weights[e]).sum()
}

/// Total weight of `a \ b`, word by word.
fn weight_of_difference(a: &FixedBitSet, b: &FixedBitSet, weights: &[u64]) -> u64 {
    let bits = usize::BITS as usize;
    let mut total = 0;
    for (i, (&wa, &wb)) in a.as_slice().iter().zip(b.as_slice()).enumerate() {
        let mut word = wa & !wb;
        while word != 0 {
            let t = word.trailing_zeros() as usize;
            total += weights[i * bits + t];
            word &= word - 1;
        }
    }
    total
}

impl<'a> Search<'a> {
    fn new(
        m: &'a CoverageMatrix,
        weights: &'a [u64],
        lens: &'a [u64],
        cfg: &LearnerConfig,
    ) -> Self {
        let n = weights.len();
        let total = weights.iter().sum();
        let good_all: Vec<FixedBitSet> = (0..m.n_rules())
            .map(|r| {
                let mut g = m.fires_inc[r].clone();
                g.difference_with(&m.fires_exc[r]);
                g
            })
            .collect();

        // A rule whose clean coverage is worth no more than its length never
        // appears in an optimal hypothesis: dropping it cannot raise the
        // score and strictly shortens the hypothesis.
        let useful: Vec<usize> = (0..m.n_rules())
            .filter(|&r| weight_of(&good_all[r], weights) > lens[r])
            .collect();

        // Rule a dominates rule b if it fires the included atom wherever b
        // does, overfires nowhere b does not, and is shorter, or equally long
        // and earlier in canonical order. Swapping b for a never makes a
        // hypothesis worse under the tie-broken objective.
        let dominates = |a: usize, b: usize| {
            (lens[a] < lens[b] || (lens[a] == lens[b] && a < b))
                && m.fires_inc[b].is_subset(&m.fires_inc[a])
                && m.fires_exc[a].is_subset(&m.fires_exc[b])
        };
        let cands: Vec<usize> = useful
            .iter()
            .copied()
            .filter(|&b| !useful.iter().any(|&a| a != b && dominates(a, b)))
            .collect();

        let inc = cands.iter().map(|&r| &m.fires_inc[r]).collect();
        let exc = cands.iter().map(|&r| &m.fires_exc[r]).collect();
        let good = cands.iter().map(|&r| good_all[r].clone()).collect();
        Search {
            weights,
            lens,
            max_rules: cfg.max_rules,
            budget: cfg.node_budget,
            restarts: cfg.restarts,
            seed: cfg.seed,
            cands,
            inc,
            exc,
            good,
            total,
            n,
            nodes: 0,
            best: Best {
                score: total,
                lits: 0,
                rules: Vec::new(),
            },
        }
    }

    fn len_of(&self, c: usize) -> u64 {
        self.lens[self.cands[c]]
    }

    /// Score of a subset given as candidate positions.
    fn score_of(&self, subset: &[usize]) -> (u64, u64) {
        let mut covered = FixedBitSet::with_capacity(self.n);
        let mut killed = FixedBitSet::with_capacity(self.n);
        let mut lits = 0;
        for &c in subset {
            covered.union_with(self.inc[c]);
            killed.union_with(self.exc[c]);
            lits += self.len_of(c);
        }
        covered.difference_with(&killed);
        (lits + self.total - weight_of(&covered, self.weights), lits)
    }

    fn offer(&mut self, subset: &[usize], score: u64, lits: u64) {
        let mut rules: Vec<usize> = subset.iter().map(|&c| self.cands[c]).collect();
        rules.sort_unstable();
        let cand = Best { score, lits, rules };
        if cand.key() < self.best.key() {
            self.best = cand;
        }
    }

    fn run(&mut self) -> (Best, bool) {
        if self.cands.is_empty() {
            return (self.best.clone(), true);
        }
        self.greedy();
        let all: Vec<usize> = (0..self.cands.len()).collect();
        let mut prefix = Vec::new();
        let covered = FixedBitSet::with_capacity(self.n);
        let killed = FixedBitSet::with_capacity(self.n);
        let exhaustive = self.dfs(&mut prefix, &covered, &killed, 0, self.total, &all);
        if !exhaustive {
            self.local_search();
        }
        (self.best.clone(), exhaustive)
    }

    /// Adds the most improving rule until nothing improves.
    fn greedy(&mut self) {
        let mut chosen: Vec<usize> = Vec::new();
        let (mut score, mut lits) = (self.total, 0);
        while chosen.len() < self.max_rules {
            let mut step: Option<(u64, u64, usize)> = None;
            for c in 0..self.cands.len() {
                if chosen.contains(&c) {
                    continue;
                }
                chosen.push(c);
                let (s, l) = self.score_of(&chosen);
                chosen.pop();
                if (s, l) < (score, lits) && step.is_none_or(|(bs, bl, _)| (s, l) < (bs, bl)) {
                    step = Some((s, l, c));
                }
            }
            let Some((s, l, c)) = step else { break };
            chosen.push(c);
            score = s;
            lits = l;
        }
        self.offer(&chosen.clone(), score, lits);
    }

    /// Whether every extension of `prefix` (candidate positions, ascending)
    /// is lexicographically after the incumbent's rule list.
    fn extensions_after_best(&self, prefix: &[usize]) -> bool {
        for (i, &c) in prefix.iter().enumerate() {
            let Some(&b) = self.best.rules.get(i) else {
                return true;
            };
            let r = self.cands[c];
            if r != b {
                return r > b;
            }
        }
        false
    }

    /// Depth-first branch and bound over ascending candidate sequences.
    /// `viable` lists the positions after the prefix that could still improve
    /// it. Returns false if the node budget ran out.
    fn dfs(
        &mut self,
        prefix: &mut Vec<usize>,
        covered: &FixedBitSet,
        killed: &FixedBitSet,
        lits: u64,
        score: u64,
        viable: &[usize],
    ) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let slots = self.max_rules - prefix.len();
        if slots == 0 || viable.is_empty() {
            return true;
        }

        // Upper bound on what rule j can add: penalties of examples it
        // cleanly covers that are neither covered nor killed yet, minus its
        // length. A subset gains at most the sum of its members' bounds, and
        // a member whose bound is not positive can be dropped without loss.
        let mut blocked = covered.clone();
        blocked.union_with(killed);
        let mut gains: Vec<(usize, u64)> = Vec::new();
        for &j in viable {
            let w = weight_of_difference(&self.good[j], &blocked, self.weights);
            let len = self.len_of(j);
            if w > len {
                gains.push((j, w - len));
            }
        }
        if gains.is_empty() {
            return true;
        }
        let mut top: Vec<u64> = gains.iter().map(|g| g.1).collect();
        top.sort_unstable_by(|a, b| b.cmp(a));
        let bound = score.saturating_sub(top.iter().take(slots).sum());
        let min_len = gains
            .iter()
            .map(|&(j, _)| self.len_of(j))
            .min()
            .unwrap_or(0);
        if self.pruned(prefix, bound, lits + min_len) {
            return true;
        }

        let next: Vec<usize> = gains.iter().map(|g| g.0).collect();
        for (i, &j) in next.iter().enumerate() {
            let mut cov = covered.clone();
            cov.union_with(self.inc[j]);
            let mut kill = killed.clone();
            kill.union_with(self.exc[j]);
            let mut acc = cov.clone();
            acc.difference_with(&kill);
            let child_lits = lits + self.len_of(j);
            let child_score = child_lits + self.total - weight_of(&acc, self.weights);
            prefix.push(j);
            self.offer(&prefix.clone(), child_score, child_lits);
            let ok = self.dfs(prefix, &cov, &kill, child_lits, child_score, &next[i + 1..]);
            prefix.pop();
            if !ok {
                return false;
            }
            // Re-check against a possibly improved incumbent.
            if self.pruned(prefix, bound, lits + min_len) {
                return true;
            }
        }
        true
    }

    fn pruned(&self, prefix: &[usize], bound: u64, lits_bound: u64) -> bool {
        bound > self.best.score
            || (bound == self.best.score
                && (lits_bound > self.best.lits
                    || (lits_bound == self.best.lits && self.extensions_after_best(prefix))))
    }

    /// Add/remove/swap hill climbing from the incumbent and from random
    /// seeded starts.
    fn local_search(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.cands.len();
        let pos_of = |this: &Self, r: usize| this.cands.binary_search(&r).ok();
        let start: Vec<usize> = self
            .best
            .rules
            .iter()
            .filter_map(|&r| pos_of(self, r))
            .collect();
        let mut starts = vec![start];
        for _ in 0..self.restarts {
            let k = rng.random_range(1..=self.max_rules.min(n));
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            all.truncate(k);
            starts.push(all);
        }
        for mut cur in starts {
            cur.sort_unstable();
            let (mut score, mut lits) = self.score_of(&cur);
            loop {
                let mut moved = false;
                for cand in self.neighbours(&cur) {
                    let (s, l) = self.score_of(&cand);
                    if (s, l) < (score, lits) {
                        cur = cand;
                        score = s;
                        lits = l;
                        moved = true;
                        break;
                    }
                }
                if !moved {
                    break;
                }
            }
            self.offer(&cur, score, lits);
        }
    }

    fn neighbours(&self, cur: &[usize]) -> Vec<Vec<usize>> {
        let n = self.cands.len();
        let mut out = Vec::new();
        for i in 0..cur.len() {
            let mut v = cur.to_vec();
            v.remove(i);
            out.push(v);
        }
        if cur.len() < self.max_rules {
            for c in (0..n).filter(|c| !cur.contains(c)) {
                let mut v = cur.to_vec();
                v.push(c);
                v.sort_unstable();
                out.push(v);
            }
        }
        for i in 0..cur.len() {
            for c in (0..n).filter(|c| !cur.contains(c)) {
                let mut v = cur.to_vec();
                v[i] = c;
                v.sort_unstable();
                out.push(v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::Direction;
    use crate::ilp::{generate_search_space, score, BiasConfig};
    use crate::symbolic::{parse_ground_atom, parse_rule};

    fn ctx(list: &[&str]) -> GroundContext {
        GroundContext::from_atoms(list.iter().map(|s| parse_ground_atom(s).unwrap()))
    }

    fn small_space() -> SearchSpace {
        SearchSpace::from_rules(
            [
                "move(Dir) :- food_dist_leq(Dir,Dist,1).",
                "move(Dir) :- food_dist_leq(Dir,Dist,2).",
                "move(Dir) :- not wall(Dir), food_dist_leq(Dir,Dist,2).",
                "move(Dir) :- ghost_dist_geq(Dir,Dist,4).",
            ]
            .map(|t| parse_rule(t).unwrap()),
        )
    }

    #[test]
    fn no_examples_gives_empty_hypothesis() {
        let r = learn(&small_space(), &[], &LearnerConfig::default()).unwrap();
        assert!(r.hypothesis.is_empty());
        assert_eq!(r.score, 0);
        assert!(r.exhaustive);
    }

    #[test]
    fn picks_the_short_rule_that_does_not_overfire() {
        let ex = vec![
            Wcdpi::for_move(
                "a",
                20,
                Direction::East,
                ctx(&["food(east,1)", "food(west,2)"]),
            ),
            Wcdpi::for_move(
                "b",
                20,
                Direction::North,
                ctx(&["food(north,1)", "food(south,2)"]),
            ),
        ];
        let r = learn(&small_space(), &ex, &LearnerConfig::default()).unwrap();
        assert_eq!(
            r.hypothesis.to_string(),
            "move(Dir) :- food_dist_leq(Dir,Dist,1).\n"
        );
        assert_eq!(r.score, 2);
        assert_eq!(score(&r.hypothesis, &ex), r.score);
    }

    #[test]
    fn cheap_examples_are_not_worth_a_rule() {
        let ex = vec![Wcdpi::for_move(
            "a",
            2,
            Direction::East,
            ctx(&["food(east,1)"]),
        )];
        let r = learn(&small_space(), &ex, &LearnerConfig::default()).unwrap();
        // Rule costs 2, leaving the example uncovered also costs 2; the
        // shorter hypothesis wins the tie.
        assert!(r.hypothesis.is_empty());
        assert_eq!(r.score, 2);
    }

    #[test]
    fn duplicates_merge_and_zero_penalties_drop() {
        let a = Wcdpi::for_move("a", 3, Direction::East, ctx(&["food(east,1)"]));
        let b = Wcdpi::for_move("b", 4, Direction::East, ctx(&["food(east,1)"]));
        let z = Wcdpi::for_move("z", 0, Direction::West, ctx(&["food(west,1)"]));
        let merged = merge_examples(&[a, b, z]);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].penalty, 7);
    }

    #[test]
    fn budget_fallback_still_returns_a_scored_hypothesis() {
        let space = generate_search_space(&BiasConfig::default()).unwrap();
        let ex = vec![
            Wcdpi::for_move(
                "a",
                50,
                Direction::East,
                ctx(&["food(east,1)", "food(west,3)"]),
            ),
            Wcdpi::for_move(
                "b",
                50,
                Direction::West,
                ctx(&["food(west,1)", "ghost(east,2)"]),
            ),
        ];
        let cfg = LearnerConfig {
            node_budget: 1,
            ..LearnerConfig::default()
        };
        let r = learn(&space, &ex, &cfg).unwrap();
        assert!(!r.exhaustive);
        assert_eq!(score(&r.hypothesis, &ex), r.score);
        let exact = learn(&space, &ex, &LearnerConfig::default()).unwrap();
        assert!(exact.exhaustive);
        assert!(exact.score <= r.score);
    }

    #[test]
    fn config_errors() {
        assert_eq!(
            Learner::new(SearchSpace::from_rules([]), LearnerConfig::default()).unwrap_err(),
            LearnerError::EmptySpace
        );
        let cfg = LearnerConfig {
            max_rules: 0,
            ..LearnerConfig::default()
        };
        assert_eq!(
            Learner::new(small_space(), cfg).unwrap_err(),
            LearnerError::ZeroRules
        );
    }
}
