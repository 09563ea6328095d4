use std::collections::BTreeSet;

use super::atom::{AtomSet, Const, DirMask, GroundAtom, Predicate};
use super::rule::{Hypothesis, Rule, SchemaAtom, Term};

#[derive(Debug, Clone, Copy)]
enum Slot {
    Var(usize),
    Const(Const),
}

#[derive(Debug, Clone)]
struct Pattern {
    predicate: Predicate,
    slots: Vec<Slot>,
}

/// One literal of a rule whose only shared variable is the head direction:
/// it holds for direction `d` iff some atom `predicate(d, _, .., consts)`
/// is in the context.
#[derive(Debug, Clone)]
pub struct DirLiteral {
    pub predicate: Predicate,
    /// Constant required at each argument position after the first.
    pub consts: Vec<Option<Const>>,
    pub negated: bool,
}

/// A rule compiled for repeated evaluation: variables are numbered and
/// positive literals are matched before negated ones.
#[derive(Debug, Clone)]
pub struct RuleMatcher {
    head: Pattern,
    positive: Vec<Pattern>,
    negative: Vec<Pattern>,
    n_vars: usize,
    /// Set when every literal can be evaluated per direction independently,
    /// which turns firing into an intersection of direction masks.
    by_dir: Option<Vec<DirLiteral>>,
}

impl RuleMatcher {
    pub fn new(rule: &Rule) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut compile = |atom: &SchemaAtom| -> Pattern {
            let slots = atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => Slot::Const(*c),
                    Term::Var(v) => {
                        let i = match names.iter().position(|n| n == v) {
                            Some(i) => i,
                            None => {
                                names.push(v.clone());
                                names.len() - 1
                            }
                        };
                        Slot::Var(i)
                    }
                })
                .collect();
            Pattern {
                predicate: atom.predicate,
                slots,
            }
        };
        let head = compile(rule.head());
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for l in rule.body() {
            let p = compile(&l.atom);
            if l.negated {
                negative.push(p);
            } else {
                positive.push(p);
            }
        }
        let n_vars = names.len();
        RuleMatcher {
            by_dir: dir_literals(rule),
            head,
            positive,
            negative,
            n_vars,
        }
    }

    /// Directions `d` for which some ground instance of the rule derives
    /// `move(d)` in `ctx`.
    /// The per-direction literals, when the rule has that shape.
    pub fn dir_literals(&self) -> Option<&[DirLiteral]> {
        self.by_dir.as_deref()
    }

    pub fn fire(&self, ctx: &AtomSet) -> DirMask {
        match &self.by_dir {
            Some(lits) => fire_by_dir(lits, ctx),
            None => self.fire_by_search(ctx),
        }
    }

    fn fire_by_search(&self, ctx: &AtomSet) -> DirMask {
        let mut binding = vec![None; self.n_vars];
        let mut mask = DirMask::default();
        self.search(0, ctx, &mut binding, &mut mask);
        mask
    }

    fn search(&self, i: usize, ctx: &AtomSet, binding: &mut [Option<Const>], mask: &mut DirMask) {
        if *mask == DirMask::FULL {
            return;
        }
        if i == self.positive.len() {
            for n in &self.negative {
                if ctx.contains(&instantiate(n, binding)) {
                    return;
                }
            }
            if let Some(d) = instantiate(&self.head, binding).move_direction() {
                mask.insert(d);
            }
            return;
        }
        let pat = &self.positive[i];
        let mut newly = [usize::MAX; 3];
        for atom in ctx.with_predicate(pat.predicate) {
            let mut ok = true;
            let mut n_new = 0;
            for (slot, value) in pat.slots.iter().zip(atom.args.iter()) {
                match *slot {
                    Slot::Const(c) => ok = c == *value,
                    Slot::Var(v) => match binding[v] {
                        Some(b) => ok = b == *value,
                        None => {
                            binding[v] = Some(*value);
                            newly[n_new] = v;
                            n_new += 1;
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.search(i + 1, ctx, binding, mask);
            }
            for &v in &newly[..n_new] {
                binding[v] = None;
            }
        }
    }
}

/// Recognises `move(X) :- ...` where every body literal has `X` first and
/// otherwise only constants and variables occurring nowhere else in the rule.
fn dir_literals(rule: &Rule) -> Option<Vec<DirLiteral>> {
    let head_var = match rule.head().args.as_slice() {
        [Term::Var(v)] => v.as_str(),
        _ => return None,
    };
    let mut counts: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for l in rule.body() {
        for v in l.atom.vars() {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    let mut out = Vec::with_capacity(rule.body().len());
    for l in rule.body() {
        let args = &l.atom.args;
        match args.first() {
            Some(Term::Var(v)) if v == head_var => {}
            _ => return None,
        }
        let mut consts = Vec::with_capacity(args.len() - 1);
        for t in &args[1..] {
            match t {
                Term::Const(c) => consts.push(Some(*c)),
                Term::Var(v) if v != head_var && counts[v.as_str()] == 1 && !l.negated => {
                    consts.push(None)
                }
                Term::Var(_) => return None,
            }
        }
        out.push(DirLiteral {
            predicate: l.atom.predicate,
            consts,
            negated: l.negated,
        });
    }
    out.iter().any(|l| !l.negated).then_some(out)
}

fn fire_by_dir(lits: &[DirLiteral], ctx: &AtomSet) -> DirMask {
    let mut mask = DirMask::FULL;
    for l in lits {
        let mut holds = DirMask::default();
        for atom in ctx.with_predicate(l.predicate) {
            let Const::Dir(d) = atom.args[0] else {
                continue;
            };
            if l.consts
                .iter()
                .zip(&atom.args[1..])
                .all(|(c, a)| c.is_none_or(|c| c == *a))
            {
                holds.insert(d);
            }
        }
        mask = if l.negated {
            mask & DirMask(!holds.0 & DirMask::FULL.0)
        } else {
            mask & holds
        };
        if mask.is_empty() {
            break;
        }
    }
    mask
}

/// Safety guarantees every variable is bound once positives are matched.
fn instantiate(p: &Pattern, binding: &[Option<Const>]) -> GroundAtom {
    let args: Vec<Const> = p
        .slots
        .iter()
        .map(|s| match *s {
            Slot::Const(c) => c,
            Slot::Var(v) => binding[v].expect("rule safety violated"),
        })
        .collect();
    GroundAtom::new(p.predicate, &args)
}

/// Directions suggested by `h` in `ctx`, as a mask.
pub fn suggested_directions(h: &Hypothesis, ctx: &AtomSet) -> DirMask {
    h.rules()
        .iter()
        .map(|r| RuleMatcher::new(r).fire(ctx))
        .fold(DirMask::default(), |a, b| a | b)
}

/// The `move/1` atoms of the unique stable model of `h ∪ ctx`.
///
/// Rules are non-recursive and negation only touches context predicates, so
/// a single pass over ground instances is exact. `ctx` must already be
/// closed under [`derive_distance_atoms`](super::derive_distance_atoms).
pub fn evaluate(h: &Hypothesis, ctx: &AtomSet) -> BTreeSet<GroundAtom> {
    suggested_directions(h, ctx).move_atoms()
}
