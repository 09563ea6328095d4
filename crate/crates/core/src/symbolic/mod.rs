//! The answer-set fragment used for policy heuristics: ground atoms, normal
//! rules with negation as failure, and single-pass model evaluation.

mod atom;
mod derive;
mod eval;
mod parse;
mod rule;

pub use atom::{AtomSet, Const, DirMask, GroundAtom, ObjectClass, Predicate};
pub use derive::{background_program, derive_distance_atoms, D_CONST_RANGE};
pub use eval::{evaluate, suggested_directions, DirLiteral, RuleMatcher};
pub use parse::{parse_atom_group, parse_ground_atom, parse_hypothesis, parse_rule, ParseError};
pub use rule::{Hypothesis, Literal, Rule, RuleError, SchemaAtom, Term};
