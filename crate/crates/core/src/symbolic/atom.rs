use std::collections::BTreeSet;
use std::fmt;

use arrayvec::ArrayVec;

use crate::gridworld::Direction;

/// Every predicate the fragment knows about. Declaration order fixes the
/// canonical order of body literals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Wall,
    Food,
    Ghost,
    Capsule,
    FoodDistGeq,
    FoodDistLeq,
    GhostDistGeq,
    GhostDistLeq,
    CapsDistGeq,
    CapsDistLeq,
    Move,
    DConst,
}

impl Predicate {
    pub const COUNT: usize = 12;

    pub const ALL: [Predicate; Predicate::COUNT] = [
        Predicate::Wall,
        Predicate::Food,
        Predicate::Ghost,
        Predicate::Capsule,
        Predicate::FoodDistGeq,
        Predicate::FoodDistLeq,
        Predicate::GhostDistGeq,
        Predicate::GhostDistLeq,
        Predicate::CapsDistGeq,
        Predicate::CapsDistLeq,
        Predicate::Move,
        Predicate::DConst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Wall => "wall",
            Predicate::Food => "food",
            Predicate::Ghost => "ghost",
            Predicate::Capsule => "capsule",
            Predicate::FoodDistGeq => "food_dist_geq",
            Predicate::FoodDistLeq => "food_dist_leq",
            Predicate::GhostDistGeq => "ghost_dist_geq",
            Predicate::GhostDistLeq => "ghost_dist_leq",
            Predicate::CapsDistGeq => "caps_dist_geq",
            Predicate::CapsDistLeq => "caps_dist_leq",
            Predicate::Move => "move",
            Predicate::DConst => "d_const",
        }
    }

    pub fn from_name(name: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Predicate::Wall | Predicate::Move | Predicate::DConst => 1,
            Predicate::Food | Predicate::Ghost | Predicate::Capsule => 2,
            _ => 3,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Predicates that may appear in a per-step context.
    pub fn is_base_feature(self) -> bool {
        matches!(
            self,
            Predicate::Wall | Predicate::Food | Predicate::Ghost | Predicate::Capsule
        )
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Object classes with a distance feature. The capsule class uses the base
/// predicate `capsule` but the derived prefix `caps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectClass {
    Food,
    Ghost,
    Caps,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 3] = [ObjectClass::Food, ObjectClass::Ghost, ObjectClass::Caps];

    pub fn base(self) -> Predicate {
        match self {
            ObjectClass::Food => Predicate::Food,
            ObjectClass::Ghost => Predicate::Ghost,
            ObjectClass::Caps => Predicate::Capsule,
        }
    }

    pub fn geq(self) -> Predicate {
        match self {
            ObjectClass::Food => Predicate::FoodDistGeq,
            ObjectClass::Ghost => Predicate::GhostDistGeq,
            ObjectClass::Caps => Predicate::CapsDistGeq,
        }
    }

    pub fn leq(self) -> Predicate {
        match self {
            ObjectClass::Food => Predicate::FoodDistLeq,
            ObjectClass::Ghost => Predicate::GhostDistLeq,
            ObjectClass::Caps => Predicate::CapsDistLeq,
        }
    }

    pub fn from_base(p: Predicate) -> Option<ObjectClass> {
        ObjectClass::ALL.into_iter().find(|c| c.base() == p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    Dir(Direction),
    Int(i64),
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Dir(d) => d.fmt(f),
            Const::Int(n) => n.fmt(f),
        }
    }
}

pub type Args<T> = ArrayVec<T, 3>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: Predicate,
    pub args: Args<Const>,
}

impl GroundAtom {
    /// Panics when the argument count does not match the predicate's arity.
    pub fn new(predicate: Predicate, args: &[Const]) -> Self {
        assert_eq!(
            args.len(),
            predicate.arity(),
            "{predicate} takes {} arguments",
            predicate.arity()
        );
        GroundAtom {
            predicate,
            args: args.iter().copied().collect(),
        }
    }

    pub fn wall(d: Direction) -> Self {
        GroundAtom::new(Predicate::Wall, &[Const::Dir(d)])
    }

    pub fn object(class: ObjectClass, d: Direction, dist: i64) -> Self {
        GroundAtom::new(class.base(), &[Const::Dir(d), Const::Int(dist)])
    }

    pub fn move_to(d: Direction) -> Self {
        GroundAtom::new(Predicate::Move, &[Const::Dir(d)])
    }

    pub fn d_const(n: i64) -> Self {
        GroundAtom::new(Predicate::DConst, &[Const::Int(n)])
    }

    /// The direction of a `move/1` atom.
    pub fn move_direction(&self) -> Option<Direction> {
        match (self.predicate, self.args.first()) {
            (Predicate::Move, Some(Const::Dir(d))) => Some(*d),
            _ => None,
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            a.fmt(f)?;
        }
        f.write_str(")")
    }
}

/// A 4-bit set of directions, bit `i` for `Direction::ALL[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct DirMask(pub u8);

impl DirMask {
    pub const FULL: DirMask = DirMask(0b1111);

    pub fn contains(self, d: Direction) -> bool {
        self.0 & d.bit() != 0
    }

    pub fn insert(&mut self, d: Direction) {
        self.0 |= d.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Direction> {
        Direction::ALL
            .into_iter()
            .filter(move |d| self.contains(*d))
    }

    pub fn move_atoms(self) -> BTreeSet<GroundAtom> {
        self.iter().map(GroundAtom::move_to).collect()
    }

    pub fn from_move_atoms<'a>(atoms: impl IntoIterator<Item = &'a GroundAtom>) -> DirMask {
        let mut m = DirMask::default();
        for d in atoms.into_iter().filter_map(GroundAtom::move_direction) {
            m.insert(d);
        }
        m
    }
}

impl std::ops::BitOr for DirMask {
    type Output = DirMask;
    fn bitor(self, rhs: DirMask) -> DirMask {
        DirMask(self.0 | rhs.0)
    }
}

impl std::ops::BitAnd for DirMask {
    type Output = DirMask;
    fn bitand(self, rhs: DirMask) -> DirMask {
        DirMask(self.0 & rhs.0)
    }
}

/// A set of ground atoms indexed by predicate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomSet {
    atoms: BTreeSet<GroundAtom>,
    by_predicate: [Vec<GroundAtom>; Predicate::COUNT],
}

impl AtomSet {
    pub fn new() -> Self {
        AtomSet::default()
    }

    pub fn insert(&mut self, atom: GroundAtom) -> bool {
        if self.atoms.contains(&atom) {
            return false;
        }
        self.by_predicate[atom.predicate.index()].push(atom.clone());
        self.atoms.insert(atom)
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn with_predicate(&self, p: Predicate) -> &[GroundAtom] {
        &self.by_predicate[p.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroundAtom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn as_set(&self) -> &BTreeSet<GroundAtom> {
        &self.atoms
    }

    pub fn into_set(self) -> BTreeSet<GroundAtom> {
        self.atoms
    }
}

impl FromIterator<GroundAtom> for AtomSet {
    fn from_iter<I: IntoIterator<Item = GroundAtom>>(iter: I) -> Self {
        let mut set = AtomSet::new();
        for a in iter {
            set.insert(a);
        }
        set
    }
}

impl Extend<GroundAtom> for AtomSet {
    fn extend<I: IntoIterator<Item = GroundAtom>>(&mut self, iter: I) {
        for a in iter {
            self.insert(a);
        }
    }
}
