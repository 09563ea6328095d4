//! Parser for the rule fragment:
//!
//! ```text
//! rule    := atom [ ":-" literal { "," literal } ] "."
//! literal := [ "not" ] atom
//! atom    := name "(" term { "," term } ")"
//! term    := Variable | direction | integer
//! ```

use thiserror::Error;

use super::atom::{Const, GroundAtom, Predicate};
use super::rule::{Hypothesis, Literal, Rule, RuleError, SchemaAtom, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("column {column}: unknown predicate `{name}`")]
    UnknownPredicate { column: usize, name: String },
    #[error("column {column}: expected a ground atom, found variable `{name}`")]
    NotGround { column: usize, name: String },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<ParseError>,
    },
    #[error(transparent)]
    Rule(#[from] RuleError),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn column(&self) -> usize {
        self.src[..self.pos].chars().count() + 1
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            column: self.column(),
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            let found = self.rest().chars().next();
            match found {
                Some(c) => self.error(format!("expected `{token}`, found `{c}`")),
                None => self.error(format!("expected `{token}`, found end of input")),
            }
        }
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_alphanumeric() || c == '_' || (i == 0 && c == '-')))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        let Some(w) = self.word() else {
            return self.error("expected a term");
        };
        let first = w.chars().next().unwrap_or(' ');
        if first.is_ascii_uppercase() {
            return Ok(Term::Var(w.to_owned()));
        }
        if first.is_ascii_digit() || first == '-' {
            return match w.parse::<i64>() {
                Ok(n) => Ok(Term::Const(Const::Int(n))),
                Err(_) => {
                    self.pos = start;
                    self.error(format!("bad integer `{w}`"))
                }
            };
        }
        match w.parse() {
            Ok(d) => Ok(Term::Const(Const::Dir(d))),
            Err(_) => {
                self.pos = start;
                self.skip_ws();
                self.error(format!("unknown constant `{w}`"))
            }
        }
    }

    fn schema_atom(&mut self) -> Result<SchemaAtom, ParseError> {
        self.skip_ws();
        let column = self.column();
        let Some(name) = self.word() else {
            return self.error("expected a predicate name");
        };
        let predicate = Predicate::from_name(name).ok_or_else(|| ParseError::UnknownPredicate {
            column,
            name: name.to_owned(),
        })?;
        self.expect("(")?;
        let mut args = vec![self.term()?];
        while self.eat(",") {
            args.push(self.term()?);
        }
        self.expect(")")?;
        Ok(SchemaAtom::new(predicate, args)?)
    }

    fn ground_atom(&mut self) -> Result<GroundAtom, ParseError> {
        self.skip_ws();
        let column = self.column();
        let atom = self.schema_atom()?;
        let mut args = Vec::with_capacity(atom.args.len());
        for t in &atom.args {
            match t {
                Term::Const(c) => args.push(*c),
                Term::Var(v) => {
                    return Err(ParseError::NotGround {
                        column,
                        name: v.clone(),
                    })
                }
            }
        }
        Ok(GroundAtom::new(atom.predicate, &args))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        self.skip_ws();
        let negated = self.rest().starts_with("not")
            && self.rest()[3..].starts_with(|c: char| c.is_whitespace());
        if negated {
            self.pos += 3;
        }
        let atom = self.schema_atom()?;
        Ok(Literal { atom, negated })
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let head = self.schema_atom()?;
        let mut body = Vec::new();
        if self.eat(":-") {
            body.push(self.literal()?);
            while self.eat(",") {
                body.push(self.literal()?);
            }
        }
        self.expect(".")?;
        Ok(Rule::new(head, body)?)
    }
}

/// Parses one rule, e.g. `move(Dir) :- not wall(Dir), food_dist_leq(Dir,Dist,2).`
pub fn parse_rule(text: &str) -> Result<Rule, ParseError> {
    let mut p = Parser::new(text);
    let rule = p.rule()?;
    if !p.at_end() {
        return p.error("trailing input after rule");
    }
    Ok(rule)
}

/// Parses a single ground atom such as `food(east,1)`, with an optional
/// trailing period.
pub fn parse_ground_atom(text: &str) -> Result<GroundAtom, ParseError> {
    let mut p = Parser::new(text);
    let atom = p.ground_atom()?;
    p.eat(".");
    if !p.at_end() {
        return p.error("trailing input after atom");
    }
    Ok(atom)
}

/// Parses a braced atom list such as `{move(east), wall(north)}` at the start
/// of `text`, returning the atoms and the remaining input.
pub fn parse_atom_group(text: &str) -> Result<(Vec<GroundAtom>, &str), ParseError> {
    let mut p = Parser::new(text);
    p.expect("{")?;
    let mut atoms = Vec::new();
    if !p.eat("}") {
        atoms.push(p.ground_atom()?);
        while p.eat(",") {
            atoms.push(p.ground_atom()?);
        }
        p.expect("}")?;
    }
    Ok((atoms, &text[p.pos..]))
}

/// Parses a hypothesis file: one rule per line, blank lines and `%` comments
/// ignored.
pub fn parse_hypothesis(text: &str) -> Result<Hypothesis, ParseError> {
    let mut h = Hypothesis::empty();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let rule = parse_rule(line).map_err(|e| ParseError::Line {
            line: i + 1,
            source: Box::new(e),
        })?;
        if !h.push(rule.clone()) {
            return Err(ParseError::Line {
                line: i + 1,
                source: Box::new(RuleError::Duplicate(rule.to_string()).into()),
            });
        }
    }
    Ok(h)
}
