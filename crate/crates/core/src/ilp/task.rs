//! Plain-text ILP task dump.
//!
//! ```text
//! % comment
//! #background d_const(0..4).
//! #background food_dist_geq(Dir,Dist,D) :- food(Dir,Dist), Dist >= D, d_const(D).
//! #rule move(Dir) :- food_dist_leq(Dir,Dist,1).
//! #example e0_t3 50 {move(east)} {move(north),move(south),move(west)} {wall(north),food(east,1)}
//! ```
//!
//! Background lines are carried verbatim. Rules appear in search-space order.

use std::fmt;

use thiserror::Error;

use super::bias::SearchSpace;
use super::examples::{ExampleError, Wcdpi};
use crate::grounding::GroundContext;
use crate::symbolic::{background_program, parse_atom_group, parse_rule, ParseError};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("line {line}: {source}")]
    Example {
        line: usize,
        #[source]
        source: ExampleError,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpTask {
    pub background: Vec<String>,
    pub space: SearchSpace,
    pub examples: Vec<Wcdpi>,
}

impl IlpTask {
    pub fn new(space: SearchSpace, examples: Vec<Wcdpi>) -> Self {
        IlpTask {
            background: background_program().lines().map(str::to_owned).collect(),
            space,
            examples,
        }
    }

    pub fn parse(text: &str) -> Result<Self, TaskError> {
        let mut background = Vec::new();
        let mut rules = Vec::new();
        let mut examples = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('%') {
                continue;
            }
            if let Some(rest) = s.strip_prefix("#background ") {
                background.push(rest.trim().to_owned());
            } else if let Some(rest) = s.strip_prefix("#rule ") {
                rules.push(parse_rule(rest).map_err(|source| TaskError::Parse { line, source })?);
            } else if let Some(rest) = s.strip_prefix("#example ") {
                examples.push(parse_example(rest, line)?);
            } else {
                return Err(TaskError::Format {
                    line,
                    message: format!("unrecognised directive `{s}`"),
                });
            }
        }
        Ok(IlpTask {
            background,
            space: SearchSpace::from_rules(rules),
            examples,
        })
    }
}

fn parse_example(rest: &str, line: usize) -> Result<Wcdpi, TaskError> {
    let format = |message: &str| TaskError::Format {
        line,
        message: message.to_owned(),
    };
    let parse = |source| TaskError::Parse { line, source };
    let mut fields = rest.trim_start().splitn(3, ' ');
    let id = fields.next().ok_or_else(|| format("missing example id"))?;
    let penalty = fields
        .next()
        .and_then(|p| p.parse::<u64>().ok())
        .ok_or_else(|| format("missing or bad penalty"))?;
    let groups = fields.next().ok_or_else(|| format("missing atom groups"))?;
    let (inc, groups) = parse_atom_group(groups).map_err(parse)?;
    let (exc, groups) = parse_atom_group(groups).map_err(parse)?;
    let (ctx, groups) = parse_atom_group(groups).map_err(parse)?;
    if !groups.trim().is_empty() {
        return Err(format("trailing input after context"));
    }
    Wcdpi::new(
        id,
        penalty,
        inc.into_iter().collect(),
        exc.into_iter().collect(),
        GroundContext::from_atoms(ctx),
    )
    .map_err(|source| TaskError::Example { line, source })
}

impl fmt::Display for IlpTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.background {
            writeln!(f, "#background {b}")?;
        }
        for r in self.space.rules() {
            writeln!(f, "#rule {r}")?;
        }
        for e in &self.examples {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}
