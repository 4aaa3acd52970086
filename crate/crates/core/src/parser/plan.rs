//! Range-restriction (safety) analysis.
//!
//! Every rule is compiled to an evaluation plan before it is accepted. The
//! plan is a literal ordering in which data flows forward: positive
//! literals bind by matching, assignments bind their target once their
//! expression is evaluable, and comparisons and negative literals run only
//! over bound variables.
//!
//! A variable that no positive literal or assignment can bind is still
//! accepted when it occurs in a comparison or assignment expression: the
//! engine enumerates it over the finite set of numeric constants in the
//! program and fact base (the active domain). This is what makes rules
//! like the braking-window rule evaluable bottom-up, where the window
//! start appears only in arithmetic. A variable with no such occurrence
//! has no finite range and the rule is rejected.

use alloc::string::String;
use alloc::vec::Vec;

use super::ast::{Literal, Rule};
use super::ParseError;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PlanStep {
    /// Match positive body literal `lit` against the fact base.
    Match { lit: usize },
    /// Instantiate a variable from the numeric active domain.
    Enumerate { var: String },
    /// Evaluate the assignment at body index `lit`, binding its target.
    Assign { lit: usize },
    /// Evaluate the comparison at body index `lit`.
    CheckCmp { lit: usize },
    /// Ground the negative literal at body index `lit` and test absence.
    CheckNeg { lit: usize },
}

/// A safety-checked evaluation order for one rule.
#[derive(Clone, Debug)]
pub struct RulePlan {
    pub steps: Vec<PlanStep>,
    /// Textual indices of the positive body literals, in body order. These
    /// become the children of the rule's proof nodes.
    pub positive: Vec<usize>,
    /// True when at least one variable is domain-enumerated.
    pub enumerates: bool,
}

fn expr_vars(lit: &Literal) -> Vec<String> {
    let mut vars = Vec::new();
    match lit {
        Literal::Comparison(l, _, r) => {
            l.collect_vars(&mut vars);
            r.collect_vars(&mut vars);
        }
        Literal::Assignment(_, e) => e.collect_vars(&mut vars),
        _ => {}
    }
    vars
}

/// Compute the evaluation plan for a rule, or reject it as unsafe.
pub fn plan_rule(rule: &Rule) -> Result<RulePlan, ParseError> {
    let unsafe_var = |var: &str| ParseError::Safety {
        rule: alloc::format!("{rule}"),
        variable: String::from(var),
    };

    // Variables eligible for active-domain enumeration: those occurring in
    // some comparison or assignment expression.
    let mut enumerable: Vec<String> = Vec::new();
    for lit in &rule.body {
        for v in expr_vars(lit) {
            if !enumerable.contains(&v) {
                enumerable.push(v);
            }
        }
    }

    let mut bound: Vec<String> = Vec::new();
    let mut done = alloc::vec![false; rule.body.len()];
    let mut steps = Vec::new();
    let mut enumerates = false;

    let feasible = |lit: &Literal, bound: &[String]| -> bool {
        match lit {
            Literal::Positive(_) => true,
            Literal::Negative(t) => {
                let mut vars = Vec::new();
                t.collect_vars(&mut vars);
                vars.iter().all(|v| bound.contains(v))
            }
            Literal::Comparison(..) | Literal::Assignment(..) => {
                expr_vars(lit).iter().all(|v| bound.contains(v))
            }
        }
    };

    while done.iter().any(|d| !d) {
        let next = rule
            .body
            .iter()
            .enumerate()
            .find(|(i, lit)| !done[*i] && feasible(lit, &bound));
        match next {
            Some((i, lit)) => {
                done[i] = true;
                match lit {
                    Literal::Positive(t) => {
                        steps.push(PlanStep::Match { lit: i });
                        t.collect_vars(&mut bound);
                    }
                    Literal::Negative(_) => steps.push(PlanStep::CheckNeg { lit: i }),
                    Literal::Comparison(..) => steps.push(PlanStep::CheckCmp { lit: i }),
                    Literal::Assignment(v, _) => {
                        steps.push(PlanStep::Assign { lit: i });
                        if !bound.contains(v) {
                            bound.push(v.clone());
                        }
                    }
                }
            }
            None => {
                // Stuck: enumerate the first eligible unbound variable.
                let candidate = enumerable.iter().find(|v| !bound.contains(v));
                match candidate {
                    Some(v) => {
                        steps.push(PlanStep::Enumerate { var: v.clone() });
                        bound.push(v.clone());
                        enumerates = true;
                    }
                    None => {
                        // Name the first variable that blocks progress.
                        let blocking = rule
                            .body
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| !done[*i])
                            .flat_map(|(_, lit)| {
                                let mut vars = Vec::new();
                                lit.collect_vars(&mut vars);
                                vars
                            })
                            .find(|v| !bound.contains(v));
                        return Err(unsafe_var(&blocking.unwrap_or_default()));
                    }
                }
            }
        }
    }

    // Every head variable must now be bound.
    let mut head_vars = Vec::new();
    rule.head.collect_vars(&mut head_vars);
    if let Some(v) = head_vars.iter().find(|v| !bound.contains(v)) {
        return Err(unsafe_var(v));
    }

    let positive = rule
        .body
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, Literal::Positive(_)))
        .map(|(i, _)| i)
        .collect();

    Ok(RulePlan { steps, positive, enumerates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_rule_text;

    #[test]
    fn textual_order_plan_for_bound_before_use() {
        let rule = parse_rule_text(
            "distance(V1, V2, T, D) :- holds(position(V1, X1, Y1, Z1), T), \
             holds(position(V2, X2, Y2, Z2), T), D = sqrt((X2-X1)^2 + (Y2-Y1)^2 + (Z2-Z1)^2).",
        )
        .unwrap();
        let plan = plan_rule(&rule).unwrap();
        assert_eq!(
            plan.steps,
            alloc::vec![
                PlanStep::Match { lit: 0 },
                PlanStep::Match { lit: 1 },
                PlanStep::Assign { lit: 2 },
            ]
        );
        assert!(!plan.enumerates);
    }

    #[test]
    fn braking_window_rule_enumerates_window_start() {
        let rule = parse_rule_text(
            "ego_braked_in_window(Ego, T_start) :- Deadline = T_start + 5, \
             occurs(brake_pedal_pressed(Ego), T_brake), T_brake > T_start, T_brake <= Deadline.",
        )
        .unwrap();
        let plan = plan_rule(&rule).unwrap();
        assert_eq!(
            plan.steps,
            alloc::vec![
                PlanStep::Match { lit: 1 },
                PlanStep::Enumerate { var: "T_start".into() },
                PlanStep::Assign { lit: 0 },
                PlanStep::CheckCmp { lit: 2 },
                PlanStep::CheckCmp { lit: 3 },
            ]
        );
        assert!(plan.enumerates);
    }

    #[test]
    fn unbound_head_variable_is_rejected() {
        let rule = parse_rule_text("p(X) :- q(Y).").unwrap();
        let err = plan_rule(&rule).unwrap_err();
        assert!(matches!(err, ParseError::Safety { variable, .. } if variable == "X"));
    }

    #[test]
    fn unbound_negation_variable_is_rejected() {
        let rule = parse_rule_text("p(X) :- q(X), not r(Z).").unwrap();
        let err = plan_rule(&rule).unwrap_err();
        assert!(matches!(err, ParseError::Safety { variable, .. } if variable == "Z"));
    }
}
