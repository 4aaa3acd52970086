//! Semi-naive bottom-up evaluation to the least fixpoint, stratum by
//! stratum, with first-derivation recording for proofs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::datamodel::{apply, match_term, Fact, FactBase, Numeric, Substitution, Term};
use crate::parser::{plan_rule, validate_program, Expr, Literal, PlanStep, Program, Rule, RulePlan};

use super::expr::{describe_literal, eval_comparison, eval_term};
use super::proof::{Check, Derivation};
use super::stratify::stratify;
use super::{EngineError, EvalResult, EvalStats};

fn collect_rule_numerics(rule: &Rule, out: &mut BTreeSet<Numeric>) {
    fn walk_term(t: &Term, out: &mut BTreeSet<Numeric>) {
        match t {
            Term::Number(n) => {
                out.insert(*n);
            }
            Term::Compound(_, args) => args.iter().for_each(|a| walk_term(a, out)),
            _ => {}
        }
    }
    walk_term(&rule.head, out);
    for lit in &rule.body {
        match lit {
            Literal::Positive(t) | Literal::Negative(t) => walk_term(t, out),
            Literal::Comparison(l, _, r) => {
                l.collect_numerics(out);
                r.collect_numerics(out);
            }
            Literal::Assignment(_, e) => e.collect_numerics(out),
        }
    }
}

/// One rule firing pass: enumerate all body matches and push new ground
/// heads (with their derivations) into `out`.
struct Firing<'a> {
    rule: &'a Rule,
    rule_index: usize,
    plan: &'a RulePlan,
    db: &'a FactBase,
    delta: &'a FactBase,
    /// Textual index of the positive literal that must match the delta,
    /// or `None` for an unrestricted pass.
    restriction: Option<usize>,
    domain: &'a [Numeric],
    rule_id: String,
    firings: usize,
    out: Vec<(Fact, Derivation)>,
    seen: BTreeSet<Fact>,
}

impl<'a> Firing<'a> {
    fn arithmetic(&self, kind: crate::datamodel::ArithmeticKind, lit: &Literal, sub: &Substitution) -> EngineError {
        EngineError::Arithmetic {
            kind,
            rule: self.rule_id.clone(),
            detail: describe_literal(lit, sub),
        }
    }

    fn run(&mut self, step: usize, sub: &Substitution, checks: &mut Vec<(usize, Check)>) -> Result<(), EngineError> {
        let Some(s) = self.plan.steps.get(step) else {
            return self.derive(sub, checks);
        };
        match s.clone() {
            PlanStep::Match { lit } => {
                let Literal::Positive(pattern) = &self.rule.body[lit] else {
                    unreachable!("plan Match points at a positive literal");
                };
                let bound_pattern = apply(sub, pattern);
                let from_delta = self.restriction == Some(lit);
                let exclude_delta =
                    self.restriction.is_some_and(|r| lit < r) && !self.delta.is_empty();
                let source = if from_delta { self.delta } else { self.db };
                // Candidates come back sorted, which keeps first derivations
                // deterministic.
                let facts: Vec<Fact> = source
                    .candidates(&bound_pattern)
                    .filter(|f| !(exclude_delta && self.delta.contains(f)))
                    .cloned()
                    .collect();
                for fact in facts {
                    if let Some(next) = match_term(&bound_pattern, fact.atom(), sub) {
                        self.run(step + 1, &next, checks)?;
                    }
                }
                Ok(())
            }
            PlanStep::Enumerate { var } => {
                for n in self.domain {
                    let mut next = sub.clone();
                    next.bind(var.clone(), Term::Number(*n));
                    self.run(step + 1, &next, checks)?;
                }
                Ok(())
            }
            PlanStep::Assign { lit } => {
                let Literal::Assignment(var, expr) = &self.rule.body[lit] else {
                    unreachable!("plan Assign points at an assignment");
                };
                let value = eval_term(expr, sub)
                    .map_err(|k| self.arithmetic(k, &self.rule.body[lit], sub))?;
                let mut next = sub.clone();
                next.bind(var.clone(), value.clone());
                checks.push((lit, Check::Assignment { var: var.clone(), value }));
                self.run(step + 1, &next, checks)?;
                checks.pop();
                Ok(())
            }
            PlanStep::CheckCmp { lit } => {
                let Literal::Comparison(l, op, r) = &self.rule.body[lit] else {
                    unreachable!("plan CheckCmp points at a comparison");
                };
                let (holds, lv, rv) = eval_comparison(l, *op, r, sub)
                    .map_err(|k| self.arithmetic(k, &self.rule.body[lit], sub))?;
                if holds {
                    checks.push((lit, Check::Comparison { lhs: lv, op: *op, rhs: rv }));
                    self.run(step + 1, sub, checks)?;
                    checks.pop();
                }
                Ok(())
            }
            PlanStep::CheckNeg { lit } => {
                let Literal::Negative(atom) = &self.rule.body[lit] else {
                    unreachable!("plan CheckNeg points at a negative literal");
                };
                let ground = apply(sub, atom);
                debug_assert!(ground.is_ground(), "negation over unbound variables");
                if !self.db.contains_atom(&ground) {
                    checks.push((lit, Check::Negation { atom: ground }));
                    self.run(step + 1, sub, checks)?;
                    checks.pop();
                }
                Ok(())
            }
        }
    }

    fn derive(&mut self, sub: &Substitution, checks: &mut [(usize, Check)]) -> Result<(), EngineError> {
        self.firings += 1;
        let head = apply(sub, &self.rule.head);
        let fact = Fact::new(head).expect("safety guarantees ground heads");
        if self.db.contains(&fact) || self.seen.contains(&fact) {
            return Ok(());
        }
        self.seen.insert(fact.clone());
        let children: Vec<Fact> = self
            .plan
            .positive
            .iter()
            .map(|&i| {
                let Literal::Positive(t) = &self.rule.body[i] else { unreachable!() };
                Fact::new(apply(sub, t)).expect("matched literals are ground")
            })
            .collect();
        let mut sorted: Vec<(usize, Check)> = checks.to_vec();
        sorted.sort_by_key(|(i, _)| *i);
        let derivation = Derivation {
            rule_index: self.rule_index,
            sub: sub.clone(),
            children,
            checks: sorted.into_iter().map(|(_, c)| c).collect(),
        };
        self.out.push((fact, derivation));
        Ok(())
    }
}

/// Compute the unique perfect model of a stratified program over a base of
/// extensional facts, recording one derivation per derived fact.
pub fn evaluate(program: &Program, base: &FactBase) -> Result<EvalResult, EngineError> {
    validate_program(program).map_err(EngineError::Invalid)?;
    let stratification = stratify(program)?;

    let head_sigs = program.intensional_sigs();
    for sig in &head_sigs {
        if base.count_sig(sig) > 0 {
            return Err(EngineError::MixedPredicate { sig: sig.clone() });
        }
    }

    let mut db = base.clone();
    for fact in &program.facts {
        db.insert(fact.clone());
    }

    // The active domain is fixed up front: numerics already derivable by
    // assignments do not extend it, which keeps enumeration finite.
    let mut domain_set = BTreeSet::new();
    db.numeric_constants(&mut domain_set);
    for rule in &program.rules {
        collect_rule_numerics(rule, &mut domain_set);
    }
    let domain: Vec<Numeric> = domain_set.into_iter().collect();

    let mut plans = Vec::with_capacity(program.rules.len());
    for rule in &program.rules {
        plans.push(plan_rule(rule).map_err(EngineError::Invalid)?);
    }

    let mut derivations: BTreeMap<Fact, Derivation> = BTreeMap::new();
    let mut stats = EvalStats::default();

    for stratum in &stratification.strata {
        let rule_idxs: Vec<usize> = (0..program.rules.len())
            .filter(|&i| stratum.contains(&program.rules[i].head_sig()))
            .collect();
        let mut iterations = 0usize;

        // Initial pass: fire every rule of the stratum over the current db.
        let mut delta = FactBase::new();
        iterations += 1;
        let empty = FactBase::new();
        for &ri in &rule_idxs {
            let mut firing = Firing {
                rule: &program.rules[ri],
                rule_index: ri,
                plan: &plans[ri],
                db: &db,
                delta: &empty,
                restriction: None,
                domain: &domain,
                rule_id: alloc::format!("{}", program.rule_id(ri)),
                firings: 0,
                out: Vec::new(),
                seen: BTreeSet::new(),
            };
            firing.run(0, &Substitution::new(), &mut Vec::new())?;
            stats.rule_firings += firing.firings;
            for (fact, derivation) in firing.out {
                if db.insert(fact.clone()) {
                    delta.insert(fact.clone());
                    derivations.insert(fact, derivation);
                    stats.facts_derived += 1;
                }
            }
        }

        // Delta-driven passes: re-fire only where a same-stratum positive
        // literal can bind a newly derived fact.
        while !delta.is_empty() {
            iterations += 1;
            let mut new_delta = FactBase::new();
            for &ri in &rule_idxs {
                let rule = &program.rules[ri];
                let positions: Vec<usize> = plans[ri]
                    .positive
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let Literal::Positive(t) = &rule.body[i] else { unreachable!() };
                        t.sig().is_some_and(|s| stratum.contains(&s))
                    })
                    .collect();
                if positions.is_empty() {
                    continue;
                }
                for &pos in &positions {
                    let mut firing = Firing {
                        rule,
                        rule_index: ri,
                        plan: &plans[ri],
                        db: &db,
                        delta: &delta,
                        restriction: Some(pos),
                        domain: &domain,
                        rule_id: alloc::format!("{}", program.rule_id(ri)),
                        firings: 0,
                        out: Vec::new(),
                        seen: BTreeSet::new(),
                    };
                    firing.run(0, &Substitution::new(), &mut Vec::new())?;
                    stats.rule_firings += firing.firings;
                    for (fact, derivation) in firing.out {
                        if db.insert(fact.clone()) {
                            new_delta.insert(fact.clone());
                            derivations.insert(fact, derivation);
                            stats.facts_derived += 1;
                        }
                    }
                }
            }
            delta = new_delta;
        }

        stats.iterations_per_stratum.push(iterations);
    }

    Ok(EvalResult {
        derived: db,
        derivations,
        program: program.clone(),
        stats,
    })
}
