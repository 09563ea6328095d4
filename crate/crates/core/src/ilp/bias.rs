use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolic::{
    Const, Literal, ObjectClass, Predicate, Rule, SchemaAtom, Term, D_CONST_RANGE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BiasError {
    #[error("the mode bias lists no body predicates")]
    NoPredicates,
    #[error("{0} cannot appear in a rule body")]
    NotABodyPredicate(&'static str),
    #[error("max_body must be at least 1")]
    ZeroBody,
    #[error("empty distance range {0}..={1}")]
    EmptyRange(i64, i64),
}

/// Mode bias: which literals may appear in rule bodies.
///
/// Heads are always `move(Dir)`. Bodies draw from `wall(Dir)` (the only
/// predicate allowed under `not`) and the distance-bound predicates
/// `X_dist_{geq,leq}(Dir,Dist,D)` with constant `D`. A body holds at most one
/// wall literal and at most one literal per object class, and each distance
/// literal gets its own `Dist` variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasConfig {
    pub max_body: usize,
    pub d_min: i64,
    pub d_max: i64,
    /// Body predicate names.
    pub predicates: Vec<String>,
}

impl Default for BiasConfig {
    fn default() -> Self {
        let mut predicates = vec![Predicate::Wall.name().to_owned()];
        for class in ObjectClass::ALL {
            predicates.push(class.geq().name().to_owned());
            predicates.push(class.leq().name().to_owned());
        }
        BiasConfig {
            max_body: 2,
            d_min: *D_CONST_RANGE.start(),
            d_max: *D_CONST_RANGE.end(),
            predicates,
        }
    }
}

/// Candidate rules in a fixed canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    rules: Vec<Rule>,
}

impl SearchSpace {
    /// Wraps an explicit rule list; duplicates after canonicalisation are
    /// dropped, first occurrence wins.
    pub fn from_rules(rules: impl IntoIterator<Item = Rule>) -> Self {
        let mut seen = std::collections::HashSet::new();
        let rules = rules
            .into_iter()
            .map(|r| r.canonical())
            .filter(|r| seen.insert(r.clone()))
            .collect();
        SearchSpace { rules }
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

    pub fn contains(&self, rule: &Rule) -> bool {
        self.position(rule).is_some()
    }

    pub fn position(&self, rule: &Rule) -> Option<usize> {
        let canonical = rule.canonical();
        self.rules.iter().position(|r| *r == canonical)
    }
}

/// Which group a body literal belongs to; at most one literal per group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Wall,
    Class(ObjectClass),
}

fn group_of(p: Predicate) -> Option<Group> {
    match p {
        Predicate::Wall => Some(Group::Wall),
        _ => ObjectClass::ALL
            .into_iter()
            .find(|c| c.geq() == p || c.leq() == p)
            .map(Group::Class),
    }
}

fn dir() -> Term {
    Term::var("Dir")
}

/// Enumerates every rule the bias admits, smallest bodies first.
pub fn generate_search_space(cfg: &BiasConfig) -> Result<SearchSpace, BiasError> {
    if cfg.predicates.is_empty() {
        return Err(BiasError::NoPredicates);
    }
    if cfg.max_body == 0 {
        return Err(BiasError::ZeroBody);
    }
    if cfg.d_min > cfg.d_max {
        return Err(BiasError::EmptyRange(cfg.d_min, cfg.d_max));
    }

    // Literal templates; the distance variable is filled in per rule.
    let mut pool: Vec<(Group, Predicate, bool, Option<i64>)> = Vec::new();
    for name in &cfg.predicates {
        let p = Predicate::from_name(name).ok_or(BiasError::NotABodyPredicate("unknown"))?;
        let group = group_of(p).ok_or(BiasError::NotABodyPredicate(p.name()))?;
        match group {
            Group::Wall => {
                pool.push((group, p, false, None));
                pool.push((group, p, true, None));
            }
            Group::Class(_) => {
                for d in cfg.d_min..=cfg.d_max {
                    pool.push((group, p, false, Some(d)));
                }
            }
        }
    }

    let mut rules = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    for size in 1..=cfg.max_body {
        combos(&pool, size, 0, &mut chosen, &mut |idx| {
            let mut body = Vec::with_capacity(idx.len());
            let mut n_dist = 0;
            for &i in idx {
                let (_, p, negated, d) = pool[i];
                let args = match d {
                    None => vec![dir()],
                    Some(d) => {
                        n_dist += 1;
                        let var = if n_dist == 1 {
                            "Dist".to_owned()
                        } else {
                            format!("Dist{n_dist}")
                        };
                        vec![dir(), Term::Var(var), Term::Const(Const::Int(d))]
                    }
                };
                let atom = SchemaAtom::new(p, args).expect("arity fixed by construction");
                body.push(Literal { atom, negated });
            }
            let head = SchemaAtom::new(Predicate::Move, vec![dir()]).expect("move/1");
            // `not wall(Dir)` alone is unsafe and is skipped here.
            if let Ok(rule) = Rule::new(head, body) {
                rules.push(rule);
            }
        });
    }
    Ok(SearchSpace::from_rules(rules))
}

fn combos<F: FnMut(&[usize])>(
    pool: &[(Group, Predicate, bool, Option<i64>)],
    size: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    emit: &mut F,
) {
    if chosen.len() == size {
        emit(chosen);
        return;
    }
    for i in start..pool.len() {
        let group = pool[i].0;
        if chosen.iter().any(|&c| pool[c].0 == group) {
            continue;
        }
        chosen.push(i);
        combos(pool, size, i + 1, chosen, emit);
        chosen.pop();
    }
}
