use crate::gridworld::{Action, GameState};

/// One recorded episode: its 1-based index, discounted return, and the
/// state-action pairs it visited.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub episode: usize,
    pub ret: f64,
    pub steps: Vec<(GameState, Action)>,
}

/// The up-to-σ highest-return episodes seen so far, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct BestEpisodes {
    sigma: usize,
    entries: Vec<EpisodeTrace>,
}

impl BestEpisodes {
    pub fn new(sigma: usize) -> Self {
        assert!(sigma >= 1, "sigma must be at least 1");
        BestEpisodes {
            sigma,
            entries: Vec::with_capacity(sigma),
        }
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn entries(&self) -> &[EpisodeTrace] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether an episode with return `ret` would be kept.
    pub fn would_accept(&self, ret: f64) -> bool {
        self.entries.len() < self.sigma || self.entries.last().is_some_and(|m| ret > m.ret)
    }

    /// Inserts `ep` if there is room or it strictly beats the current
    /// minimum; ties keep the incumbent. Returns whether it was kept.
    pub fn offer(&mut self, ep: EpisodeTrace) -> bool {
        if !self.would_accept(ep.ret) {
            return false;
        }
        if self.entries.len() == self.sigma {
            self.entries.pop();
        }
        // After equal returns, so earlier episodes rank first among ties.
        let at = self.entries.partition_point(|e| e.ret >= ep.ret);
        self.entries.insert(at, ep);
        true
    }

    pub fn mean_return(&self) -> Option<f64> {
        if self.entries.is_empty() {
            None
        } else {
            Some(self.entries.iter().map(|e| e.ret).sum::<f64>() / self.entries.len() as f64)
        }
    }
}
