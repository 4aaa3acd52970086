//! Stratification of negation.
//!
//! Intensional predicates are layered so that negation only ever looks at
//! predicates whose extension is already complete. A negative dependency
//! inside a dependency cycle has no such layering and is rejected.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::datamodel::PredSig;
use crate::parser::{Literal, Program};

use super::EngineError;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Polarity {
    Positive,
    Negative,
}

/// The computed layering: `strata[0]` is evaluated first.
#[derive(Clone, Debug)]
pub struct Stratification {
    pub strata: Vec<BTreeSet<PredSig>>,
    /// Dependency edges (body predicate, head predicate, polarity) over
    /// intensional predicates.
    pub edges: BTreeSet<(PredSig, PredSig, Polarity)>,
}

impl Stratification {
    pub fn stratum_of(&self, sig: &PredSig) -> Option<usize> {
        self.strata.iter().position(|s| s.contains(sig))
    }
}

/// Strongly connected components in reverse topological order (callees
/// before callers), Tarjan's algorithm with an explicit stack.
fn sccs(nodes: &[PredSig], succ: &BTreeMap<PredSig, BTreeSet<PredSig>>) -> Vec<Vec<PredSig>> {
    struct State {
        index: BTreeMap<PredSig, usize>,
        low: BTreeMap<PredSig, usize>,
        on_stack: BTreeSet<PredSig>,
        stack: Vec<PredSig>,
        next: usize,
        out: Vec<Vec<PredSig>>,
    }

    fn visit(
        v: &PredSig,
        succ: &BTreeMap<PredSig, BTreeSet<PredSig>>,
        st: &mut State,
    ) {
        st.index.insert(v.clone(), st.next);
        st.low.insert(v.clone(), st.next);
        st.next += 1;
        st.stack.push(v.clone());
        st.on_stack.insert(v.clone());

        if let Some(ws) = succ.get(v) {
            for w in ws {
                if !st.index.contains_key(w) {
                    visit(w, succ, st);
                    let wl = st.low[w];
                    let vl = st.low.get_mut(v).unwrap();
                    *vl = (*vl).min(wl);
                } else if st.on_stack.contains(w) {
                    let wi = st.index[w];
                    let vl = st.low.get_mut(v).unwrap();
                    *vl = (*vl).min(wi);
                }
            }
        }

        if st.low[v] == st.index[v] {
            let mut comp = Vec::new();
            while let Some(w) = st.stack.pop() {
                st.on_stack.remove(&w);
                let done = w == *v;
                comp.push(w);
                if done {
                    break;
                }
            }
            comp.sort();
            st.out.push(comp);
        }
    }

    let mut st = State {
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        on_stack: BTreeSet::new(),
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in nodes {
        if !st.index.contains_key(v) {
            visit(v, succ, &mut st);
        }
    }
    st.out
}

/// The intensional predicates a body atom may depend on. A `holds`/`occurs`
/// pattern with a variable payload can match any wrapped derived fact, so
/// it conservatively depends on all of them.
fn body_deps(
    atom: &crate::datamodel::Term,
    intensional: &BTreeSet<PredSig>,
    wrapped: &BTreeSet<PredSig>,
) -> Vec<PredSig> {
    use crate::datamodel::Term;
    match atom {
        Term::Compound(f, args) if (f == "holds" || f == "occurs") && args.len() == 2 => {
            match args[0].sig() {
                Some(inner) => {
                    if intensional.contains(&inner) {
                        alloc::vec![inner]
                    } else {
                        Vec::new()
                    }
                }
                None => wrapped.iter().cloned().collect(),
            }
        }
        _ => match atom.sig() {
            Some(sig) if intensional.contains(&sig) => alloc::vec![sig],
            _ => Vec::new(),
        },
    }
}

pub fn stratify(program: &Program) -> Result<Stratification, EngineError> {
    let intensional = program.intensional_sigs();
    // Predicates defined through a holds/occurs wrapper.
    let wrapped: BTreeSet<PredSig> = program
        .rules
        .iter()
        .filter(|r| {
            matches!(&r.head, crate::datamodel::Term::Compound(f, args)
                if (f == "holds" || f == "occurs") && args.len() == 2)
        })
        .map(Rule::head_sig)
        .collect();

    let mut edges: BTreeSet<(PredSig, PredSig, Polarity)> = BTreeSet::new();
    for rule in &program.rules {
        let head = rule.head_sig();
        for lit in &rule.body {
            let (atom, polarity) = match lit {
                Literal::Positive(t) => (t, Polarity::Positive),
                Literal::Negative(t) => (t, Polarity::Negative),
                _ => continue,
            };
            for sig in body_deps(atom, &intensional, &wrapped) {
                edges.insert((sig, head.clone(), polarity));
            }
        }
    }

    let nodes: Vec<PredSig> = intensional.iter().cloned().collect();
    let mut succ: BTreeMap<PredSig, BTreeSet<PredSig>> = BTreeMap::new();
    for (from, to, _) in &edges {
        succ.entry(from.clone()).or_default().insert(to.clone());
    }

    let components = sccs(&nodes, &succ);
    let mut component_of: BTreeMap<PredSig, usize> = BTreeMap::new();
    for (i, comp) in components.iter().enumerate() {
        for sig in comp {
            component_of.insert(sig.clone(), i);
        }
    }

    // A negative edge inside a component means cyclic negation.
    for (from, to, polarity) in &edges {
        if *polarity == Polarity::Negative && component_of[from] == component_of[to] {
            return Err(EngineError::Unstratifiable {
                cycle: components[component_of[from]].clone(),
            });
        }
    }

    // Assignments invent new numbers; inside a recursive component that
    // has no finite bound, so such rules are rejected.
    for (i, rule) in program.rules.iter().enumerate() {
        let has_assignment = rule.body.iter().any(|l| matches!(l, Literal::Assignment(..)));
        if !has_assignment {
            continue;
        }
        let head = rule.head_sig();
        let recursive = rule.body.iter().any(|l| match l {
            Literal::Positive(t) => t
                .sig()
                .is_some_and(|s| component_of.get(&s) == component_of.get(&head) && component_of.contains_key(&s)),
            _ => false,
        });
        if recursive {
            return Err(EngineError::NonTerminatingRisk {
                rule: alloc::format!("{}", program.rule_id(i)),
            });
        }
    }

    // Level assignment: positive edges stay level, negative edges step up.
    // Cycles with negative edges were rejected, so this converges.
    let mut level: BTreeMap<PredSig, usize> = nodes.iter().map(|n| (n.clone(), 0)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for (from, to, polarity) in &edges {
            let need = level[from] + usize::from(*polarity == Polarity::Negative);
            if level[to] < need {
                level.insert(to.clone(), need);
                changed = true;
            }
        }
    }

    let max_level = level.values().copied().max().unwrap_or(0);
    let mut strata: Vec<BTreeSet<PredSig>> = alloc::vec![BTreeSet::new(); max_level + 1];
    for (sig, l) in level {
        strata[l].insert(sig);
    }
    strata.retain(|s| !s.is_empty());
    if strata.is_empty() {
        strata.push(BTreeSet::new());
    }

    Ok(Stratification { strata, edges })
}
