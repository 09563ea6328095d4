//! Feature map from game states to ground atoms, and the action map between
//! moves and `move/1` atoms.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::gridworld::{Action, Direction, GameState, Layout, Pos};
use crate::symbolic::{
    derive_distance_atoms, parse_ground_atom, AtomSet, Const, DirMask, GroundAtom, ObjectClass,
    ParseError, Predicate, D_CONST_RANGE,
};

/// Distances are saturated at this value.
pub const MAX_DIST: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundingError {
    #[error("the stop action has no atom")]
    StopHasNoAtom,
    #[error("{0} is not a move/1 atom")]
    NotAMove(String),
}

/// Base-predicate atoms describing one state: `wall/1`, `food/2`, `ghost/2`,
/// `capsule/2`, with at most one object atom per class and direction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundContext {
    atoms: BTreeSet<GroundAtom>,
}

impl GroundContext {
    pub fn atoms(&self) -> &BTreeSet<GroundAtom> {
        &self.atoms
    }

    /// The context closed under the distance-bound rules.
    pub fn closure(&self) -> AtomSet {
        derive_distance_atoms(&self.atoms)
    }

    /// Builds a context from arbitrary base atoms (used when reading logs).
    pub fn from_atoms(atoms: impl IntoIterator<Item = GroundAtom>) -> Self {
        GroundContext {
            atoms: atoms.into_iter().collect(),
        }
    }

    /// Parses the one-atom-per-line format written by `Display`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut atoms = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let atom = parse_ground_atom(line).map_err(|e| ParseError::Line {
                line: i + 1,
                source: Box::new(e),
            })?;
            atoms.insert(atom);
        }
        Ok(GroundContext { atoms })
    }
}

impl fmt::Display for GroundContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.atoms {
            writeln!(f, "{a}.")?;
        }
        Ok(())
    }
}

/// Directions an object at relative offset `(dx, dy)` belongs to: east if
/// `dx > 0`, west if `dx < 0`, north if `dy > 0`, south if `dy < 0`. Off-axis
/// objects belong to two directions.
pub fn directions_of(dx: i32, dy: i32) -> impl Iterator<Item = Direction> {
    [
        (dy > 0).then_some(Direction::North),
        (dy < 0).then_some(Direction::South),
        (dx > 0).then_some(Direction::East),
        (dx < 0).then_some(Direction::West),
    ]
    .into_iter()
    .flatten()
}

fn nearest_per_direction(agent: Pos, objects: impl Iterator<Item = Pos>) -> [Option<u32>; 4] {
    let mut best = [None; 4];
    for p in objects {
        let dist = agent.manhattan(p).min(MAX_DIST);
        for d in directions_of(p.x - agent.x, p.y - agent.y) {
            let slot = &mut best[d.index()];
            if slot.is_none_or(|b| dist < b) {
                *slot = Some(dist);
            }
        }
    }
    best
}

/// Everything the feature map reads from a state: blocked neighbours and,
/// per object class and direction, the nearest distance (clamped).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StateSummary {
    pub walls: DirMask,
    /// Indexed by `ObjectClass::ALL` position, then `Direction::index`.
    pub nearest: [[Option<u32>; 4]; 3],
}

impl StateSummary {
    pub fn of(s: &GameState, layout: &Layout) -> Self {
        let mut walls = DirMask::default();
        for d in Direction::ALL {
            if layout.is_wall(s.agent.step(d)) {
                walls.insert(d);
            }
        }
        StateSummary {
            walls,
            nearest: [
                nearest_per_direction(s.agent, s.food.iter()),
                nearest_per_direction(
                    s.agent,
                    s.ghosts.iter().filter(|g| !g.is_scared()).map(|g| g.pos),
                ),
                nearest_per_direction(s.agent, s.capsules.iter()),
            ],
        }
    }

    fn nearest_of(&self, class: ObjectClass, d: Direction) -> Option<i64> {
        let c = ObjectClass::ALL
            .iter()
            .position(|x| *x == class)
            .expect("listed class");
        self.nearest[c][d.index()].map(i64::from)
    }

    pub fn context(&self) -> GroundContext {
        let mut atoms = BTreeSet::new();
        for d in self.walls.iter() {
            atoms.insert(GroundAtom::wall(d));
        }
        for class in ObjectClass::ALL {
            for d in Direction::ALL {
                if let Some(dist) = self.nearest_of(class, d) {
                    atoms.insert(GroundAtom::object(class, d, dist));
                }
            }
        }
        GroundContext { atoms }
    }

    /// Whether some atom `predicate(d, args..)` is in the closed context,
    /// where `None` arguments match anything.
    pub fn holds(&self, predicate: Predicate, d: Direction, args: &[Option<Const>]) -> bool {
        let matches = |arg: Option<&Option<Const>>, v: i64| match arg {
            None | Some(None) => true,
            Some(Some(c)) => *c == Const::Int(v),
        };
        if predicate == Predicate::Wall {
            return args.is_empty() && self.walls.contains(d);
        }
        if let Some(class) = ObjectClass::from_base(predicate) {
            return args.len() == 1
                && self
                    .nearest_of(class, d)
                    .is_some_and(|dist| matches(args.first(), dist));
        }
        let Some(class) = ObjectClass::ALL
            .into_iter()
            .find(|c| c.geq() == predicate || c.leq() == predicate)
        else {
            return false;
        };
        let Some(dist) = self.nearest_of(class, d) else {
            return false;
        };
        if args.len() != 2 || !matches(args.first(), dist) {
            return false;
        }
        let geq = class.geq() == predicate;
        D_CONST_RANGE
            .filter(|&bound| matches(args.get(1), bound))
            .any(|bound| if geq { dist >= bound } else { dist <= bound })
    }
}

/// Feature map: `wall(d)` for each blocked neighbour and, per object class
/// (food, non-scared ghost, capsule) and direction, the Manhattan distance to
/// the nearest object in that direction, clamped to [`MAX_DIST`].
pub fn ground_features(s: &GameState, layout: &Layout) -> GroundContext {
    StateSummary::of(s, layout).context()
}

pub fn ground_action(a: Action) -> Result<GroundAtom, GroundingError> {
    a.direction()
        .map(GroundAtom::move_to)
        .ok_or(GroundingError::StopHasNoAtom)
}

pub fn inverse_action(atom: &GroundAtom) -> Result<Action, GroundingError> {
    atom.move_direction()
        .map(Action::from_direction)
        .ok_or_else(|| GroundingError::NotAMove(atom.to_string()))
}
