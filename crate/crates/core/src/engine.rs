//! Stratified bottom-up evaluation with proof recording.
//!
//! `evaluate` computes the unique perfect model of a safety-checked,
//! stratifiable program over a base of extensional facts. Negation is
//! stratified, evaluation within a stratum is semi-naive (delta driven),
//! iteration order is deterministic, and the first derivation of every
//! fact is recorded for `explain`.

mod eval;
mod expr;
mod proof;
mod stratify;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::datamodel::{ArithmeticKind, Fact, FactBase, Numeric, PredSig, Substitution, Term};
use crate::parser::{Expr, ParseError, Program};

pub use eval::evaluate;
pub use expr::{eval_comparison, eval_numeric, eval_term};
pub use proof::{Check, Derivation, ProofTree, ReplayError, EXTENSIONAL};
pub use stratify::{stratify, Polarity, Stratification};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EngineError {
    /// A negative dependency lies on a cycle; names the offending
    /// predicates.
    Unstratifiable { cycle: Vec<PredSig> },
    /// A recursive rule contains an assignment and could invent numbers
    /// forever.
    NonTerminatingRisk { rule: String },
    /// Arithmetic failure, with the deriving rule and the offending ground
    /// literal.
    Arithmetic { kind: ArithmeticKind, rule: String, detail: String },
    /// A rule head predicate already occurs as extensional facts.
    MixedPredicate { sig: PredSig },
    /// A query redefines a predicate of the program it runs against.
    Conflict { sig: PredSig },
    /// `explain` was asked about a fact that is not in the model.
    NotDerived { atom: Term },
    /// The program failed load-time validation.
    Invalid(ParseError),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Unstratifiable { cycle } => {
                write!(f, "program is not stratifiable; negation cycle through ")?;
                for (i, sig) in cycle.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{sig}")?;
                }
                Ok(())
            }
            EngineError::NonTerminatingRisk { rule } => {
                write!(f, "recursive rule {rule} contains an assignment and may not terminate")
            }
            EngineError::Arithmetic { kind, rule, detail } => {
                write!(f, "arithmetic error in rule {rule}: {kind} in `{detail}`")
            }
            EngineError::MixedPredicate { sig } => {
                write!(f, "predicate {sig} is both extensional and intensional")
            }
            EngineError::Conflict { sig } => {
                write!(f, "query redefines predicate {sig} of the base program")
            }
            EngineError::NotDerived { atom } => write!(f, "fact not derived: {atom}"),
            EngineError::Invalid(e) => write!(f, "invalid program: {e}"),
        }
    }
}

impl core::error::Error for EngineError {}

impl From<ParseError> for EngineError {
    fn from(e: ParseError) -> EngineError {
        EngineError::Invalid(e)
    }
}

/// Counters describing one evaluation run.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct EvalStats {
    pub iterations_per_stratum: Vec<usize>,
    pub facts_derived: usize,
    pub rule_firings: usize,
}

/// The least fixpoint plus the recorded derivations.
#[derive(Clone, Debug)]
pub struct EvalResult {
    derived: FactBase,
    derivations: BTreeMap<Fact, Derivation>,
    program: Program,
    pub stats: EvalStats,
}

impl EvalResult {
    /// Extensional and derived facts together: the perfect model.
    pub fn derived(&self) -> &FactBase {
        &self.derived
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// True when the fact was derived by a rule (not extensional).
    pub fn is_intensional(&self, fact: &Fact) -> bool {
        self.derivations.contains_key(fact)
    }
}

/// Materialize the recorded proof of `fact`.
pub fn explain(result: &EvalResult, fact: &Fact) -> Result<ProofTree, EngineError> {
    if !result.derived.contains(fact) {
        return Err(EngineError::NotDerived { atom: fact.atom().clone() });
    }
    Ok(build_proof(result, fact))
}

fn build_proof(result: &EvalResult, fact: &Fact) -> ProofTree {
    match result.derivations.get(fact) {
        None => ProofTree {
            root: fact.clone(),
            rule_id: String::from(EXTENSIONAL),
            substitution: Substitution::new(),
            children: Vec::new(),
            checks: Vec::new(),
        },
        Some(derivation) => ProofTree {
            root: fact.clone(),
            rule_id: alloc::format!("{}", result.program.rule_id(derivation.rule_index)),
            substitution: derivation.sub.clone(),
            children: derivation
                .children
                .iter()
                .map(|child| build_proof(result, child))
                .collect(),
            checks: derivation.checks.clone(),
        },
    }
}

/// Evaluate `expr` under `sub`; all variables must be bound to numbers.
pub fn eval_expr(expr: &Expr, sub: &Substitution) -> Result<Numeric, EngineError> {
    expr::eval_numeric(expr, sub).map_err(|kind| EngineError::Arithmetic {
        kind,
        rule: String::from("<expression>"),
        detail: alloc::format!("{}", expr::substituted(expr, sub)),
    })
}

/// A query run: the shown facts plus the full evaluation behind them.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub shown: Vec<Fact>,
    pub result: EvalResult,
}

/// Evaluate `program` extended by `query` over `base` and return the facts
/// of the query's `#show` predicates, sorted. An empty list means no
/// counterexample exists.
pub fn solve(program: &Program, query: &Program, base: &FactBase) -> Result<Vec<Fact>, EngineError> {
    solve_full(program, query, base).map(|o| o.shown)
}

/// As [`solve`], also returning the evaluation for proof extraction.
pub fn solve_full(
    program: &Program,
    query: &Program,
    base: &FactBase,
) -> Result<SolveOutcome, EngineError> {
    let program_heads = program.intensional_sigs();
    for sig in query.intensional_sigs() {
        if program_heads.contains(&sig) {
            return Err(EngineError::Conflict { sig });
        }
    }
    let merged = program.merged(query);
    let result = evaluate(&merged, base)?;
    let mut shown: Vec<Fact> = Vec::new();
    let mut seen = alloc::collections::BTreeSet::new();
    for sig in &query.shows {
        if seen.insert(sig.clone()) {
            shown.extend(result.derived().with_sig(sig).cloned());
        }
    }
    shown.sort();
    Ok(SolveOutcome { shown, result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::Term;
    use crate::parser::{parse_program, parse_query};
    use alloc::string::ToString;
    use alloc::vec;

    const FIG2: &str = r#"
holds(position(car_01, 15.2, 45.8, 0.5), 1622541987.1).
holds(velocity(car_01, 25.5, 0.0, 0.0), 1622541987.1).
holds(position(car_02, 18.7, 45.8, 0.5), 1622541987.1).
holds(velocity(car_02, 30.2, 0.0, 0.0), 1622541987.1).
holds(traffic_light_state(lane_001, red), 1622541987.1).
holds(driver_state(car_01, attentive), 1622541987.1).
occurs(brake_light_on(car_02), 1622541987.2).

is_following(V1, V2, T) :-
    holds(position(V1, X1, Y1, Z1), T),
    holds(position(V2, X2, Y1, Z1), T),
    X1 < X2,
    distance(V1, V2, T, D),
    D < 50.0.

distance(V1, V2, T, D) :-
    holds(position(V1, X1, Y1, Z1), T),
    holds(position(V2, X2, Y2, Z2), T),
    D = sqrt((X2-X1)^2 + (Y2-Y1)^2 + (Z2-Z1)^2).
"#;

    const FIG3_QUERY: &str = r#"
violation(Ego, T_light) :-
    is_following(Ego, Lead, T_light),
    occurs(brake_light_on(Lead), T_light),
    holds(ttc_deci(Ego, Lead, TTC_deci), T_light),
    TTC_deci < 30,
    not ego_braked_in_window(Ego, T_light).

ego_braked_in_window(Ego, T_start) :-
    Deadline = T_start + 5,
    occurs(brake_pedal_pressed(Ego), T_brake),
    T_brake > T_start,
    T_brake <= Deadline.

#show violation/2.
"#;

    fn atom(src: &str) -> Term {
        let p = parse_program(&alloc::format!("{src}.")).unwrap();
        p.facts[0].atom().clone()
    }

    fn fact(src: &str) -> Fact {
        Fact::new(atom(src)).unwrap()
    }

    /// Base satisfying the Fig. 3 body at T_light = 100 with TTC 25 deci
    /// and no brake input.
    fn braking_base() -> FactBase {
        let mut fb = FactBase::new();
        for src in [
            "is_following(ego, lead, 100)",
            "occurs(brake_light_on(lead), 100)",
            "holds(ttc_deci(ego, lead, 25), 100)",
            "holds(position(ego, 0.0, 0.0, 0.0), 100)",
            "holds(position(lead, 12.5, 0.0, 0.0), 100)",
            "object_property(ego, class, car)",
        ] {
            fb.insert(fact(src));
        }
        fb
    }

    #[test]
    fn fig2_evaluation_derives_distance_and_following() {
        let program = parse_program(FIG2).unwrap();
        let result = evaluate(&program, &FactBase::new()).unwrap();
        // hand arithmetic: sqrt((18.7-15.2)^2) = 3.5 < 50, and 15.2 < 18.7
        assert!(result
            .derived()
            .contains(&fact("distance(car_01, car_02, 1622541987.1, 3.5)")));
        assert!(result
            .derived()
            .contains(&fact("is_following(car_01, car_02, 1622541987.1)")));
        // the symmetric distance and the zero self-distances also exist
        assert!(result
            .derived()
            .contains(&fact("distance(car_02, car_01, 1622541987.1, 3.5)")));
        assert!(result
            .derived()
            .contains(&fact("distance(car_01, car_01, 1622541987.1, 0)")));
        // but car_02 is not following car_01 (not behind it)
        assert!(!result
            .derived()
            .contains(&fact("is_following(car_02, car_01, 1622541987.1)")));
    }

    #[test]
    fn empty_program_over_empty_base() {
        let result = evaluate(&Program::default(), &FactBase::new()).unwrap();
        assert_eq!(result.derived().len(), 0);
        assert_eq!(result.stats.facts_derived, 0);
    }

    #[test]
    fn fig3_finds_the_violation() {
        let query = parse_query(FIG3_QUERY).unwrap();
        let shown = solve(&Program::default(), &query, &braking_base()).unwrap();
        assert_eq!(shown, vec![fact("violation(ego, 100)")]);
    }

    #[test]
    fn braking_within_window_blocks_the_violation() {
        let query = parse_query(FIG3_QUERY).unwrap();
        let mut base = braking_base();
        base.insert(fact("occurs(brake_pedal_pressed(ego), 103)"));
        let shown = solve(&Program::default(), &query, &base).unwrap();
        assert!(shown.is_empty(), "3 <= 5, so ego braked in the window");
    }

    #[test]
    fn braking_after_deadline_still_violates() {
        let query = parse_query(FIG3_QUERY).unwrap();
        let mut base = braking_base();
        base.insert(fact("occurs(brake_pedal_pressed(ego), 108)"));
        let shown = solve(&Program::default(), &query, &base).unwrap();
        assert_eq!(shown, vec![fact("violation(ego, 100)")]);
    }

    #[test]
    fn show_of_never_derived_predicate_is_empty() {
        let query = parse_query("#show nothing/1.").unwrap();
        let shown = solve(&Program::default(), &query, &braking_base()).unwrap();
        assert!(shown.is_empty());
    }

    #[test]
    fn conflicting_query_is_rejected() {
        let program = parse_program("p(X) :- e(X).\ne(a).").unwrap();
        let query = parse_query("p(X) :- e(X).\n#show p/1.").unwrap();
        let err = solve(&program, &query, &FactBase::new()).unwrap_err();
        assert_eq!(err, EngineError::Conflict { sig: PredSig::new("p", 1) });
    }

    #[test]
    fn explain_violation_cites_checks_and_children() {
        let query = parse_query(FIG3_QUERY).unwrap();
        let outcome = solve_full(&Program::default(), &query, &braking_base()).unwrap();
        let violation = &outcome.shown[0];
        let proof = explain(&outcome.result, violation).unwrap();
        assert_eq!(proof.rule_id, "violation/2@0");
        assert_eq!(proof.children.len(), 3);
        assert!(proof.children.iter().all(ProofTree::is_extensional));
        let checks: Vec<String> = proof.checks.iter().map(|c| c.to_string()).collect();
        assert_eq!(checks, vec!["25 < 30", "not ego_braked_in_window(ego, 100)"]);
        proof.replay(outcome.result.program(), outcome.result.derived()).unwrap();
    }

    #[test]
    fn explain_extensional_fact_is_a_leaf() {
        let program = parse_program("e(a).").unwrap();
        let result = evaluate(&program, &FactBase::new()).unwrap();
        let proof = explain(&result, &fact("e(a)")).unwrap();
        assert!(proof.is_extensional());
        assert!(proof.children.is_empty());
    }

    #[test]
    fn explain_unknown_fact_errors() {
        let program = parse_program("e(a).").unwrap();
        let result = evaluate(&program, &FactBase::new()).unwrap();
        let err = explain(&result, &fact("e(b)")).unwrap_err();
        assert!(matches!(err, EngineError::NotDerived { .. }));
    }

    #[test]
    fn transitive_closure_reaches_fixpoint() {
        let program = parse_program(
            "edge(a, b).\nedge(b, c).\nedge(c, d).\n\
             path(X, Y) :- edge(X, Y).\npath(X, Z) :- path(X, Y), edge(Y, Z).",
        )
        .unwrap();
        let result = evaluate(&program, &FactBase::new()).unwrap();
        let paths: Vec<&Fact> = result.derived().with_sig(&PredSig::new("path", 2)).collect();
        assert_eq!(paths.len(), 6);
        assert!(result.derived().contains(&fact("path(a, d)")));
        // every path has a replayable proof
        for p in paths {
            let proof = explain(&result, p).unwrap();
            proof.replay(result.program(), result.derived()).unwrap();
        }
    }

    #[test]
    fn division_by_zero_is_reported_with_context() {
        let program = parse_program("e(4, 0).\nr(D) :- e(A, B), D = A / B.").unwrap();
        let err = evaluate(&program, &FactBase::new()).unwrap_err();
        match err {
            EngineError::Arithmetic { kind, rule, detail } => {
                assert_eq!(kind, ArithmeticKind::DivideByZero);
                assert_eq!(rule, "r/1@0");
                assert_eq!(detail, "D = 4 / 0");
            }
            other => panic!("expected arithmetic error, got {other:?}"),
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        let program = parse_program(FIG2).unwrap();
        let a = evaluate(&program, &FactBase::new()).unwrap();
        let b = evaluate(&program, &FactBase::new()).unwrap();
        assert_eq!(a.derived(), b.derived());
        assert_eq!(a.stats, b.stats);
        let dump = |r: &EvalResult| {
            let mut s = String::new();
            for f in r.derived().iter() {
                if r.is_intensional(f) {
                    s.push_str(&explain(r, f).unwrap().render());
                }
            }
            s
        };
        assert_eq!(dump(&a), dump(&b));
    }

    #[test]
    fn base_facts_colliding_with_rule_heads_are_rejected() {
        let program = parse_program("p(X) :- e(X).\ne(a).").unwrap();
        let mut base = FactBase::new();
        base.insert(fact("p(b)"));
        let err = evaluate(&program, &base).unwrap_err();
        assert_eq!(err, EngineError::MixedPredicate { sig: PredSig::new("p", 1) });
    }

    #[test]
    fn eval_expr_requires_numeric_bindings() {
        let rule = crate::parser::parse_rule_text("p(D) :- q(X), D = X + 1.").unwrap();
        let crate::parser::Literal::Assignment(_, expr) = &rule.body[1] else {
            panic!("expected assignment");
        };
        let mut sub = Substitution::new();
        sub.bind("X", Term::Number("41".parse().unwrap()));
        assert_eq!(eval_expr(expr, &sub).unwrap(), "42".parse().unwrap());
        sub.bind("X", Term::sym("a"));
        assert!(matches!(
            eval_expr(expr, &sub),
            Err(EngineError::Arithmetic { kind: ArithmeticKind::NonNumericOperand, .. })
        ));
    }
}
