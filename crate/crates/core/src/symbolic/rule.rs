use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::atom::{Args, Const, Predicate};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(Const),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_owned())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => c.fmt(f),
        }
    }
}

/// An atom whose arguments may be variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemaAtom {
    pub predicate: Predicate,
    pub args: Args<Term>,
}

impl SchemaAtom {
    pub fn new(predicate: Predicate, args: Vec<Term>) -> Result<Self, RuleError> {
        if args.len() != predicate.arity() {
            return Err(RuleError::Arity {
                predicate: predicate.name(),
                expected: predicate.arity(),
                found: args.len(),
            });
        }
        Ok(SchemaAtom {
            predicate,
            args: args.into_iter().collect(),
        })
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_var)
    }
}

impl fmt::Display for SchemaAtom {
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

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: SchemaAtom,
    /// Negation as failure.
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: SchemaAtom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: SchemaAtom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }

    fn sort_key(&self) -> (Predicate, bool, &Args<Term>) {
        (self.atom.predicate, !self.negated, &self.atom.args)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        self.atom.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("{predicate} takes {expected} arguments, got {found}")]
    Arity {
        predicate: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("rule head must be a move/1 atom, got {0}")]
    Head(String),
    #[error("body literal {0} is recursive (move/1 may only appear in heads)")]
    Recursive(String),
    #[error("variable {0} does not occur in a positive body literal")]
    Unsafe(String),
    #[error("duplicate rule {0}")]
    Duplicate(String),
}

/// A normal rule `move(..) :- l1, ..., ln.`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    head: SchemaAtom,
    body: Vec<Literal>,
}

impl Rule {
    /// Checks the head predicate, non-recursion, and safety.
    pub fn new(head: SchemaAtom, body: Vec<Literal>) -> Result<Rule, RuleError> {
        if head.predicate != Predicate::Move {
            return Err(RuleError::Head(head.to_string()));
        }
        if let Some(l) = body.iter().find(|l| l.atom.predicate == Predicate::Move) {
            return Err(RuleError::Recursive(l.to_string()));
        }
        let bound: BTreeSet<&str> = body
            .iter()
            .filter(|l| !l.negated)
            .flat_map(|l| l.atom.vars())
            .collect();
        let needed = head.vars().chain(
            body.iter()
                .filter(|l| l.negated)
                .flat_map(|l| l.atom.vars()),
        );
        for v in needed {
            if !bound.contains(v) {
                return Err(RuleError::Unsafe(v.to_owned()));
            }
        }
        Ok(Rule { head, body })
    }

    pub fn head(&self) -> &SchemaAtom {
        &self.head
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }

    /// Number of atoms: the head plus every body literal.
    pub fn len(&self) -> usize {
        1 + self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same rule with body literals in canonical order.
    pub fn canonical(&self) -> Rule {
        let mut body = self.body.clone();
        body.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Rule {
            head: self.head.clone(),
            body,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.head.fmt(f)?;
        for (i, l) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            l.fmt(f)?;
        }
        f.write_str(".")
    }
}

/// An ordered, duplicate-free set of rules.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    rules: Vec<Rule>,
}

impl Hypothesis {
    pub fn empty() -> Self {
        Hypothesis::default()
    }

    pub fn new(rules: Vec<Rule>) -> Result<Self, RuleError> {
        let mut h = Hypothesis::empty();
        for r in rules {
            if !h.push(r.clone()) {
                return Err(RuleError::Duplicate(r.to_string()));
            }
        }
        Ok(h)
    }

    /// Appends `rule` unless an identical rule is present.
    pub fn push(&mut self, rule: Rule) -> bool {
        if self.rules.contains(&rule) {
            return false;
        }
        self.rules.push(rule);
        true
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Total number of atoms over all rules.
    pub fn literal_count(&self) -> usize {
        self.rules.iter().map(Rule::len).sum()
    }

    pub fn body_literal_count(&self) -> usize {
        self.rules.iter().map(|r| r.body.len()).sum()
    }
}

/// One rule per line.
impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
