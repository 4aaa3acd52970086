//! The `.esn` text language: parsing, validation and serialization.
//!
//! Grammar summary (the full reference lives in `docs/esn-language.md`):
//! statements end with `.`; `:-` separates a rule head from its body; body
//! literals are separated by `,`; `not` is negation as failure;
//! lowercase-initial identifiers are symbols and functors,
//! uppercase-initial ones are variables; strings are double-quoted; `%`
//! starts a line comment; `#show f/n.` declares a shown predicate.

mod ast;
mod grammar;
mod lexer;
mod plan;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::datamodel::PredSig;

pub use ast::{BinOp, CmpOp, Directive, Expr, Literal, Program, Rule, RuleId};
pub use grammar::{parse_units, ParsedUnits};
pub use plan::{plan_rule, PlanStep, RulePlan};

/// Errors raised while loading ESN source.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ParseError {
    /// Lexical or grammatical error; line and column point inside the
    /// offending token (1-based).
    Syntax { line: u32, column: u32, expected: String },
    /// Range-restriction violation: `variable` has no finite binding source.
    Safety { rule: String, variable: String },
    /// A predicate occurs both as a fact and as a rule head.
    MixedPredicate { sig: PredSig },
    /// A query must declare at least one `#show`.
    MissingShow,
    /// A directive that this kind of file does not accept.
    UnexpectedDirective { directive: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, column, expected } => {
                write!(f, "syntax error at {line}:{column}: {expected}")
            }
            ParseError::Safety { rule, variable } => {
                write!(f, "unsafe rule (variable {variable} has no binding source): {rule}")
            }
            ParseError::MixedPredicate { sig } => {
                write!(f, "predicate {sig} is both extensional (facts) and intensional (rule head)")
            }
            ParseError::MissingShow => write!(f, "query declares no shown predicate"),
            ParseError::UnexpectedDirective { directive } => {
                write!(f, "directive `#{directive}` is not allowed here")
            }
        }
    }
}

impl core::error::Error for ParseError {}

/// Check program-level invariants: every rule is safe and no predicate is
/// both extensional and intensional. Predicate identity is semantic: the
/// inner functor counts for `holds`/`occurs`-wrapped atoms.
pub fn validate_program(program: &Program) -> Result<(), ParseError> {
    for rule in &program.rules {
        plan_rule(rule)?;
    }
    let heads = program.intensional_sigs();
    for fact in &program.facts {
        let sig = fact.semantic_sig();
        if heads.contains(&sig) {
            return Err(ParseError::MixedPredicate { sig });
        }
    }
    Ok(())
}

/// Parse a complete ESN program. Only `#show` directives are accepted.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let units = parse_units(source)?;
    let mut shows = Vec::new();
    for d in units.directives {
        match d {
            Directive::Show(sig) => shows.push(sig),
            Directive::Allow(_) => {
                return Err(ParseError::UnexpectedDirective { directive: "allow".into() })
            }
            Directive::Deny(_) => {
                return Err(ParseError::UnexpectedDirective { directive: "deny".into() })
            }
            Directive::Remove(_) => {
                return Err(ParseError::UnexpectedDirective { directive: "remove".into() })
            }
            Directive::Rebind(..) => {
                return Err(ParseError::UnexpectedDirective { directive: "rebind".into() })
            }
        }
    }
    let program = Program { facts: units.facts, rules: units.rules, shows };
    validate_program(&program)?;
    Ok(program)
}

/// Parse a query: a program fragment that must declare at least one `#show`.
pub fn parse_query(source: &str) -> Result<Program, ParseError> {
    let program = parse_program(source)?;
    if program.shows.is_empty() {
        return Err(ParseError::MissingShow);
    }
    Ok(program)
}

/// Parse a single rule, mainly for building patches and tests.
pub fn parse_rule_text(source: &str) -> Result<Rule, ParseError> {
    let units = parse_units(source)?;
    if units.rules.len() == 1 && units.facts.is_empty() && units.directives.is_empty() {
        let rule = units.rules.into_iter().next().unwrap();
        plan_rule(&rule)?;
        Ok(rule)
    } else {
        Err(ParseError::Syntax {
            line: 1,
            column: 1,
            expected: "exactly one rule".into(),
        })
    }
}

/// Serialize a program so that parsing the output reproduces it.
pub fn format_program(program: &Program) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for fact in &program.facts {
        let _ = writeln!(out, "{fact}.");
    }
    for (i, rule) in program.rules.iter().enumerate() {
        if i > 0 || !program.facts.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "{rule}");
    }
    if !program.shows.is_empty() && !(program.facts.is_empty() && program.rules.is_empty()) {
        out.push('\n');
    }
    for sig in &program.shows {
        let _ = writeln!(out, "#show {sig}.");
    }
    out
}
