//! Independent oracles shared by the integration tests. Nothing here calls
//! the crate's evaluator, closure, or learner.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use neuroq_core::gridworld::Direction;
use neuroq_core::grounding::GroundContext;
use neuroq_core::ilp::Wcdpi;
use neuroq_core::symbolic::{Const, GroundAtom, Hypothesis, ObjectClass, Predicate, Rule, Term};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Distance-bound closure written out from the background rules.
pub fn oracle_closure(base: &BTreeSet<GroundAtom>) -> BTreeSet<GroundAtom> {
    let mut out = base.clone();
    for a in base {
        let class = match a.predicate {
            Predicate::Food => ObjectClass::Food,
            Predicate::Ghost => ObjectClass::Ghost,
            Predicate::Capsule => ObjectClass::Caps,
            _ => continue,
        };
        let (Const::Dir(dir), Const::Int(dist)) = (a.args[0], a.args[1]) else {
            continue;
        };
        for d in 0..=4 {
            let args = [Const::Dir(dir), Const::Int(dist), Const::Int(d)];
            if dist >= d {
                out.insert(GroundAtom::new(class.geq(), &args));
            }
            if dist <= d {
                out.insert(GroundAtom::new(class.leq(), &args));
            }
        }
    }
    out
}

struct Ground {
    head: GroundAtom,
    pos: Vec<GroundAtom>,
    neg: Vec<GroundAtom>,
}

fn ground_rule(rule: &Rule, ints: &BTreeSet<i64>) -> Vec<Ground> {
    // A variable in first position ranges over directions, anywhere else
    // over the integers of the Herbrand universe.
    let mut vars: BTreeMap<String, bool> = BTreeMap::new();
    for atom in std::iter::once(rule.head()).chain(rule.body().iter().map(|l| &l.atom)) {
        for (i, t) in atom.args.iter().enumerate() {
            if let Term::Var(v) = t {
                vars.insert(v.clone(), i == 0);
            }
        }
    }
    let names: Vec<(String, bool)> = vars.into_iter().collect();
    let mut out = Vec::new();
    let mut binding: BTreeMap<String, Const> = BTreeMap::new();
    fn rec(
        i: usize,
        names: &[(String, bool)],
        ints: &BTreeSet<i64>,
        binding: &mut BTreeMap<String, Const>,
        rule: &Rule,
        out: &mut Vec<Ground>,
    ) {
        if i == names.len() {
            let inst = |atom: &neuroq_core::symbolic::SchemaAtom| {
                let args: Vec<Const> = atom
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => binding[v],
                        Term::Const(c) => *c,
                    })
                    .collect();
                GroundAtom::new(atom.predicate, &args)
            };
            let mut g = Ground {
                head: inst(rule.head()),
                pos: Vec::new(),
                neg: Vec::new(),
            };
            for l in rule.body() {
                if l.negated {
                    g.neg.push(inst(&l.atom));
                } else {
                    g.pos.push(inst(&l.atom));
                }
            }
            out.push(g);
            return;
        }
        let (name, is_dir) = &names[i];
        let values: Vec<Const> = if *is_dir {
            Direction::ALL.iter().map(|&d| Const::Dir(d)).collect()
        } else {
            ints.iter().map(|&n| Const::Int(n)).collect()
        };
        for v in values {
            binding.insert(name.clone(), v);
            rec(i + 1, names, ints, binding, rule, out);
        }
        binding.remove(name);
    }
    rec(0, &names, ints, &mut binding, rule, &mut out);
    out
}

/// Every stable model of `h ∪ closure(base)`, each given by its move atoms,
/// found by checking all 2⁴ candidate sets of move atoms against the
/// Gelfond–Lifschitz reduct.
pub fn stable_move_sets(h: &Hypothesis, base: &BTreeSet<GroundAtom>) -> Vec<BTreeSet<Direction>> {
    let closed = oracle_closure(base);
    let mut ints: BTreeSet<i64> = closed
        .iter()
        .flat_map(|a| a.args.iter().copied())
        .filter_map(|c| match c {
            Const::Int(n) => Some(n),
            _ => None,
        })
        .collect();
    for r in h.rules() {
        for l in r.body() {
            for t in l.atom.args.iter() {
                if let Term::Const(Const::Int(n)) = t {
                    ints.insert(*n);
                }
            }
        }
    }
    let grounds: Vec<Ground> = h
        .rules()
        .iter()
        .flat_map(|r| ground_rule(r, &ints))
        .collect();

    let mut models = Vec::new();
    for bits in 0u8..16 {
        let m: BTreeSet<Direction> = Direction::ALL
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, &d)| d)
            .collect();
        let mut interp = closed.clone();
        interp.extend(m.iter().map(|&d| GroundAtom::move_to(d)));
        // Least model of the reduct: facts plus heads of ground rules whose
        // negative body is false in the candidate and whose positive body
        // holds. No move atom occurs in a body, so one pass reaches the
        // fixpoint.
        let mut least = closed.clone();
        for g in &grounds {
            if g.neg.iter().all(|a| !interp.contains(a)) && g.pos.iter().all(|a| closed.contains(a))
            {
                least.insert(g.head.clone());
            }
        }
        if least == interp {
            models.push(m);
        }
    }
    models
}

pub fn random_context<R: Rng>(rng: &mut R) -> GroundContext {
    let mut atoms = Vec::new();
    for &d in &Direction::ALL {
        if rng.random_bool(0.4) {
            atoms.push(GroundAtom::wall(d));
        }
        for class in ObjectClass::ALL {
            for _ in 0..rng.random_range(0..=2) {
                if rng.random_bool(0.5) {
                    atoms.push(GroundAtom::object(class, d, rng.random_range(1..=10)));
                }
            }
        }
    }
    GroundContext::from_atoms(atoms)
}

pub fn random_hypothesis<R: Rng>(rng: &mut R, space: &[Rule], max: usize) -> Hypothesis {
    let k = rng.random_range(0..=max);
    let rules: Vec<Rule> = space.choose_multiple(rng, k).cloned().collect();
    Hypothesis::new(rules).unwrap()
}

/// Directions suggested by `h`, from the oracle. Panics unless there is
/// exactly one stable model.
pub fn oracle_moves(h: &Hypothesis, ctx: &GroundContext) -> BTreeSet<Direction> {
    let mut models = stable_move_sets(h, ctx.atoms());
    assert_eq!(
        models.len(),
        1,
        "expected a unique stable model for\n{h}in {ctx}"
    );
    models.pop().unwrap()
}

pub fn oracle_accepts(model: &BTreeSet<Direction>, e: &Wcdpi) -> bool {
    let inc = e
        .inc()
        .iter()
        .all(|a| model.contains(&a.move_direction().unwrap()));
    let exc = e
        .exc()
        .iter()
        .all(|a| !model.contains(&a.move_direction().unwrap()));
    inc && exc
}

fn mask(dirs: impl IntoIterator<Item = Direction>) -> u8 {
    dirs.into_iter()
        .map(|d| 1u8 << Direction::ALL.iter().position(|&x| x == d).unwrap())
        .fold(0, |a, b| a | b)
}

/// Minimum of literal count plus missed penalties over every subset of
/// `rules` with at most `max_rules` members. Move atoms never occur in rule
/// bodies, so the model of a set of rules is the union of the rules' single
/// models; each rule goes through the stable-model oracle once.
pub fn brute_force_min(rules: &[Rule], examples: &[Wcdpi], max_rules: usize) -> u64 {
    assert!(rules.len() <= 20);
    let fired: Vec<Vec<u8>> = rules
        .iter()
        .map(|r| {
            let h = Hypothesis::new(vec![r.clone()]).unwrap();
            examples
                .iter()
                .map(|e| mask(oracle_moves(&h, &e.context)))
                .collect()
        })
        .collect();
    let inc: Vec<u8> = examples
        .iter()
        .map(|e| mask(e.inc().iter().map(|a| a.move_direction().unwrap())))
        .collect();
    let exc: Vec<u8> = examples
        .iter()
        .map(|e| mask(e.exc().iter().map(|a| a.move_direction().unwrap())))
        .collect();
    let lens: Vec<u64> = rules.iter().map(|r| r.len() as u64).collect();
    let mut best = u64::MAX;
    for subset in 0u32..(1 << rules.len()) {
        if subset.count_ones() as usize > max_rules {
            continue;
        }
        let members: Vec<usize> = (0..rules.len()).filter(|r| subset >> r & 1 == 1).collect();
        let mut total: u64 = members.iter().map(|&r| lens[r]).sum();
        for (i, e) in examples.iter().enumerate() {
            let model = members.iter().fold(0u8, |m, &r| m | fired[r][i]);
            if model & inc[i] != inc[i] || model & exc[i] != 0 {
                total += e.penalty;
            }
        }
        best = best.min(total);
    }
    best
}
