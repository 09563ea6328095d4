use std::collections::BTreeMap;

use crate::symbolic::Hypothesis;

/// `Σ_t γ^t r_t`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut discount = 1.0;
    for r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    total
}

/// Probability of following a suggestion: mean best-episode return over the
/// running mean return of all training so far, clamped to
/// `[rho_min, rho_max]`. A non-positive or missing running mean gives
/// `rho_max`.
pub fn compute_rho(best_mean: f64, running_mean: Option<f64>, rho_min: f64, rho_max: f64) -> f64 {
    match running_mean {
        Some(m) if m > 0.0 => (best_mean / m).clamp(rho_min, rho_max),
        _ => rho_max,
    }
}

/// Incremental mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMean {
    n: u64,
    mean: f64,
}

impl RunningMean {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.mean += (x - self.mean) / self.n as f64;
    }

    pub fn get(&self) -> Option<f64> {
        (self.n > 0).then_some(self.mean)
    }

    pub fn count(&self) -> u64 {
        self.n
    }
}

fn pairs(h: &Hypothesis) -> BTreeMap<(String, String), i64> {
    let mut out = BTreeMap::new();
    for r in h.rules() {
        let r = r.canonical();
        let head = r.head().to_string();
        for l in r.body() {
            *out.entry((head.clone(), l.to_string())).or_insert(0) += 1;
        }
    }
    out
}

/// Size of the symmetric difference between the (head, body literal)
/// multisets of `h_t` and `h_final`, over the body-literal count of
/// `h_final`. An empty `h_final` gives the literal count of `h_t`.
pub fn hamming_convergence(h_t: &Hypothesis, h_final: &Hypothesis) -> f64 {
    let denom = h_final.body_literal_count();
    if h_final.is_empty() || denom == 0 {
        return h_t.literal_count() as f64;
    }
    let a = pairs(h_t);
    let b = pairs(h_final);
    let mut diff = 0;
    for key in a
        .keys()
        .chain(b.keys())
        .collect::<std::collections::BTreeSet<_>>()
    {
        diff += (a.get(key).copied().unwrap_or(0) - b.get(key).copied().unwrap_or(0)).abs();
    }
    diff as f64 / denom as f64
}
