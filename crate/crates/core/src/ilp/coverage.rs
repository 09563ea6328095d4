use fixedbitset::FixedBitSet;

use super::examples::Wcdpi;
use crate::symbolic::DirMask;

/// Per-rule example bitsets: `fires_inc[r]` holds the examples whose included
/// atom rule `r` derives, `fires_exc[r]` those where it derives an excluded
/// atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMatrix {
    pub fires_inc: Vec<FixedBitSet>,
    pub fires_exc: Vec<FixedBitSet>,
}

impl CoverageMatrix {
    /// `fired[e][r]` is the set of directions rule `r` derives in the context
    /// of example `e`.
    pub fn from_fired(examples: &[Wcdpi], fired: &[&[DirMask]], n_rules: usize) -> Self {
        assert_eq!(examples.len(), fired.len());
        let n = examples.len();
        let mut fires_inc = vec![FixedBitSet::with_capacity(n); n_rules];
        let mut fires_exc = vec![FixedBitSet::with_capacity(n); n_rules];
        for (e, (ex, masks)) in examples.iter().zip(fired).enumerate() {
            let inc = ex.inc_mask();
            let exc = ex.exc_mask();
            for (r, &m) in masks.iter().enumerate() {
                // Inclusion sets are singletons, so "fires the included atom"
                // and "covers every inclusion" coincide.
                if !inc.is_empty() && (m & inc) == inc {
                    fires_inc[r].insert(e);
                }
                if !(m & exc).is_empty() {
                    fires_exc[r].insert(e);
                }
            }
        }
        CoverageMatrix {
            fires_inc,
            fires_exc,
        }
    }

    pub fn n_rules(&self) -> usize {
        self.fires_inc.len()
    }

    pub fn n_examples(&self) -> usize {
        self.fires_inc.first().map_or(0, |b| b.len())
    }

    /// Examples accepted by the rule subset `rules`.
    pub fn accepted(&self, rules: &[usize]) -> FixedBitSet {
        let n = self.n_examples();
        let mut covered = FixedBitSet::with_capacity(n);
        let mut killed = FixedBitSet::with_capacity(n);
        for &r in rules {
            covered.union_with(&self.fires_inc[r]);
            killed.union_with(&self.fires_exc[r]);
        }
        covered.difference_with(&killed);
        covered
    }
}
