use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::gridworld::{Action, Direction, GameState, Layout};
use crate::grounding::{ground_action, ground_features, GroundContext};
use crate::symbolic::{evaluate, DirMask, GroundAtom, Hypothesis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExampleError {
    #[error("inclusion and exclusion sets overlap on {0}")]
    Overlap(String),
    #[error("inclusion and exclusion sets must partition the four move atoms")]
    NotAPartition,
    #[error("{0} is not a move/1 atom")]
    NotAMove(String),
}

/// A weighted context-dependent partial interpretation: the move taken in
/// `context` should be derived (`inc`) and every other move should not
/// (`exc`). Not accepting the example costs `penalty`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Wcdpi {
    pub id: String,
    pub penalty: u64,
    inc: BTreeSet<GroundAtom>,
    exc: BTreeSet<GroundAtom>,
    pub context: GroundContext,
}

impl Wcdpi {
    pub fn new(
        id: impl Into<String>,
        penalty: u64,
        inc: BTreeSet<GroundAtom>,
        exc: BTreeSet<GroundAtom>,
        context: GroundContext,
    ) -> Result<Self, ExampleError> {
        if let Some(a) = inc
            .iter()
            .chain(&exc)
            .find(|a| a.move_direction().is_none())
        {
            return Err(ExampleError::NotAMove(a.to_string()));
        }
        if let Some(a) = inc.intersection(&exc).next() {
            return Err(ExampleError::Overlap(a.to_string()));
        }
        if inc.len() + exc.len() != Direction::ALL.len() {
            return Err(ExampleError::NotAPartition);
        }
        Ok(Wcdpi {
            id: id.into(),
            penalty,
            inc,
            exc,
            context,
        })
    }

    /// Example for taking `dir` in `context`; every other move is excluded.
    pub fn for_move(
        id: impl Into<String>,
        penalty: u64,
        dir: Direction,
        context: GroundContext,
    ) -> Self {
        let inc: BTreeSet<_> = [GroundAtom::move_to(dir)].into();
        let exc = Direction::ALL
            .into_iter()
            .filter(|d| *d != dir)
            .map(GroundAtom::move_to)
            .collect();
        Wcdpi {
            id: id.into(),
            penalty,
            inc,
            exc,
            context,
        }
    }

    pub fn inc(&self) -> &BTreeSet<GroundAtom> {
        &self.inc
    }

    pub fn exc(&self) -> &BTreeSet<GroundAtom> {
        &self.exc
    }

    pub fn inc_mask(&self) -> DirMask {
        DirMask::from_move_atoms(&self.inc)
    }

    pub fn exc_mask(&self) -> DirMask {
        DirMask::from_move_atoms(&self.exc)
    }
}

fn braced(atoms: &BTreeSet<GroundAtom>) -> String {
    let items: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// `#example id penalty {inc} {exc} {ctx}`
impl fmt::Display for Wcdpi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "#example {} {} {} {} {}",
            self.id,
            self.penalty,
            braced(&self.inc),
            braced(&self.exc),
            braced(self.context.atoms())
        )
    }
}

/// Penalties are non-negative integers: negative returns clip to zero.
pub fn penalty_from_return(ret: f64) -> u64 {
    if ret.is_finite() && ret > 0.0 {
        ret.round() as u64
    } else {
        0
    }
}

/// One example per non-`stop` step of each episode. The penalty of every
/// example is the clipped, rounded return of its episode.
pub fn build_wcdpis<'a, I>(layout: &Layout, episodes: I) -> Vec<Wcdpi>
where
    I: IntoIterator<Item = (&'a [(GameState, Action)], f64)>,
{
    let mut out = Vec::new();
    for (e, (steps, ret)) in episodes.into_iter().enumerate() {
        let penalty = penalty_from_return(ret);
        for (t, (state, action)) in steps.iter().enumerate() {
            let Ok(atom) = ground_action(*action) else {
                continue;
            };
            let dir = atom.move_direction().expect("move atom");
            out.push(Wcdpi::for_move(
                format!("e{e}_t{t}"),
                penalty,
                dir,
                ground_features(state, layout),
            ));
        }
    }
    out
}

/// Whether the model of `h` in the example's context contains every
/// included atom and no excluded one.
pub fn accepted(h: &Hypothesis, e: &Wcdpi) -> bool {
    let model = evaluate(h, &e.context.closure());
    e.inc.is_subset(&model) && e.exc.is_disjoint(&model)
}

/// Hypothesis length plus the penalties of the examples it does not accept.
pub fn score(h: &Hypothesis, examples: &[Wcdpi]) -> u64 {
    let missed: u64 = examples
        .iter()
        .filter(|e| !accepted(h, e))
        .map(|e| e.penalty)
        .sum();
    h.literal_count() as u64 + missed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{parse_ground_atom, parse_hypothesis};

    fn ctx(list: &[&str]) -> GroundContext {
        GroundContext::from_atoms(list.iter().map(|s| parse_ground_atom(s).unwrap()))
    }

    fn rule_2a() -> Hypothesis {
        parse_hypothesis("move(Dir) :- food_dist_leq(Dir,Dist,1).").unwrap()
    }

    fn eq1_example() -> Wcdpi {
        Wcdpi::for_move(
            "eq1",
            50,
            Direction::East,
            ctx(&["wall(north)", "wall(south)", "food(east,1)", "food(west,1)"]),
        )
    }

    #[test]
    fn example_text_matches_the_worked_example() {
        assert_eq!(
            eq1_example().to_string(),
            "#example eq1 50 {move(east)} {move(north),move(south),move(west)} \
             {wall(north),wall(south),food(east,1),food(west,1)}"
        );
    }

    #[test]
    fn overfiring_rule_is_not_accepted() {
        // The rule also derives move(west), which is excluded.
        let e = eq1_example();
        let model = evaluate(&rule_2a(), &e.context.closure());
        assert!(model.contains(&GroundAtom::move_to(Direction::West)));
        assert!(!accepted(&rule_2a(), &e));
    }

    #[test]
    fn empty_hypothesis_accepts_nothing_with_inclusions() {
        assert!(!accepted(&Hypothesis::empty(), &eq1_example()));
    }

    #[test]
    fn single_firing_rule_is_accepted() {
        let e = Wcdpi::for_move("e", 1, Direction::East, ctx(&["food(east,1)"]));
        assert!(accepted(&rule_2a(), &e));
    }

    #[test]
    fn scores() {
        let a = Wcdpi::for_move("a", 50, Direction::East, ctx(&["food(east,1)"]));
        let b = Wcdpi::for_move("b", 30, Direction::North, ctx(&["food(north,1)"]));
        assert_eq!(score(&Hypothesis::empty(), &[a.clone(), b.clone()]), 80);
        assert_eq!(score(&rule_2a(), &[a, b]), 2);
    }

    #[test]
    fn penalties_clip_and_round() {
        assert_eq!(penalty_from_return(50.4), 50);
        assert_eq!(penalty_from_return(49.5), 50);
        assert_eq!(penalty_from_return(-120.0), 0);
        assert_eq!(penalty_from_return(f64::NAN), 0);
    }

    #[test]
    fn constructor_checks_partition() {
        let east: BTreeSet<_> = [GroundAtom::move_to(Direction::East)].into();
        assert_eq!(
            Wcdpi::new("x", 1, east.clone(), east.clone(), GroundContext::default()),
            Err(ExampleError::Overlap("move(east)".into()))
        );
        assert_eq!(
            Wcdpi::new("x", 1, east, BTreeSet::new(), GroundContext::default()),
            Err(ExampleError::NotAPartition)
        );
    }
}
