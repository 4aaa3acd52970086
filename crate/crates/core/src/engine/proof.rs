//! Proof trees: the derivation record behind every derived fact.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::datamodel::{apply, Fact, FactBase, Substitution, Term};
use crate::parser::{CmpOp, Literal, Program};

use super::expr::{eval_comparison, eval_term};

/// A satisfied side condition recorded during rule firing, fully ground.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Check {
    Comparison { lhs: Term, op: CmpOp, rhs: Term },
    Negation { atom: Term },
    Assignment { var: String, value: Term },
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Comparison { lhs, op, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Check::Negation { atom } => write!(f, "not {atom}"),
            Check::Assignment { var, value } => write!(f, "{var} = {value}"),
        }
    }
}

/// Internal per-fact derivation record; proof trees are materialized from
/// these on demand so shared subderivations are stored once.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub rule_index: usize,
    pub sub: Substitution,
    pub children: Vec<Fact>,
    pub checks: Vec<Check>,
}

/// Rule identifier used for extensional leaves.
pub const EXTENSIONAL: &str = "extensional";

/// The derivation of one fact: the rule that fired, the substitution it
/// fired under, one subtree per positive body literal, and every satisfied
/// comparison, assignment and negation check in body order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProofTree {
    pub root: Fact,
    pub rule_id: String,
    pub substitution: Substitution,
    pub children: Vec<ProofTree>,
    pub checks: Vec<Check>,
}

impl ProofTree {
    pub fn is_extensional(&self) -> bool {
        self.rule_id == EXTENSIONAL
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ProofTree::depth).max().unwrap_or(0)
    }

    /// Deterministic indented rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        use core::fmt::Write;
        for _ in 0..depth {
            out.push_str("  ");
        }
        let _ = writeln!(out, "{}  [{}]", self.root, self.rule_id);
        for check in &self.checks {
            for _ in 0..depth + 1 {
                out.push_str("  ");
            }
            let _ = writeln!(out, "check: {check}");
        }
        for child in &self.children {
            child.render_into(out, depth + 1);
        }
    }

    /// Re-derive the root from the recorded rule, substitution and
    /// children, confirming the proof really supports the fact.
    pub fn replay(&self, program: &Program, derived: &FactBase) -> Result<(), ReplayError> {
        let fail = |what: &str| {
            Err(ReplayError {
                fact: self.root.clone(),
                reason: String::from(what),
            })
        };
        if self.is_extensional() {
            if !self.children.is_empty() || !self.checks.is_empty() {
                return fail("extensional leaf with children or checks");
            }
            return Ok(());
        }
        let Some(index) = program
            .rule_ids()
            .iter()
            .position(|id| alloc::format!("{id}") == self.rule_id)
        else {
            return fail("rule id not found in program");
        };
        let rule = &program.rules[index];
        if apply(&self.substitution, &rule.head) != *self.root.atom() {
            return fail("substituted head does not reproduce the fact");
        }
        let positives: Vec<&Term> = rule
            .body
            .iter()
            .filter_map(|l| match l {
                Literal::Positive(t) => Some(t),
                _ => None,
            })
            .collect();
        if positives.len() != self.children.len() {
            return fail("child count differs from positive body literals");
        }
        for (pattern, child) in positives.iter().zip(&self.children) {
            if apply(&self.substitution, pattern) != *child.root.atom() {
                return fail("substituted body literal does not match child root");
            }
            child.replay(program, derived)?;
        }
        // Re-evaluate the recorded side conditions under the substitution.
        let mut check_iter = self.checks.iter();
        for lit in &rule.body {
            match lit {
                Literal::Comparison(l, op, r) => {
                    let Some(Check::Comparison { lhs, rhs, op: rec_op }) = check_iter.next() else {
                        return fail("missing comparison check");
                    };
                    match eval_comparison(l, *op, r, &self.substitution) {
                        Ok((true, lv, rv)) => {
                            if lv != *lhs || rv != *rhs || rec_op != op {
                                return fail("comparison check values differ");
                            }
                        }
                        _ => return fail("comparison no longer holds"),
                    }
                }
                Literal::Assignment(var, expr) => {
                    let Some(Check::Assignment { var: rec_var, value }) = check_iter.next() else {
                        return fail("missing assignment check");
                    };
                    if rec_var != var {
                        return fail("assignment check names a different variable");
                    }
                    match eval_term(expr, &self.substitution) {
                        Ok(v) if v == *value => {}
                        _ => return fail("assignment value differs"),
                    }
                    if self.substitution.get(var) != Some(value) {
                        return fail("substitution disagrees with assignment");
                    }
                }
                Literal::Negative(atom) => {
                    let Some(Check::Negation { atom: rec }) = check_iter.next() else {
                        return fail("missing negation check");
                    };
                    let ground = apply(&self.substitution, atom);
                    if ground != *rec {
                        return fail("negation check names a different atom");
                    }
                    if derived.contains_atom(&ground) {
                        return fail("negated atom is derivable");
                    }
                }
                Literal::Positive(_) => {}
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ReplayError {
    pub fact: Fact,
    pub reason: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "proof replay failed for {}: {}", self.fact, self.reason)
    }
}

impl core::error::Error for ReplayError {}
