//! Ground and non-ground terms, substitutions, and pattern matching.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::numeric::Numeric;

/// A predicate signature: functor name plus arity. Arity is part of
/// identity, so `position/4` and `position/3` are unrelated predicates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredSig {
    pub name: String,
    pub arity: usize,
}

impl PredSig {
    pub fn new(name: impl Into<String>, arity: usize) -> PredSig {
        PredSig { name: name.into(), arity }
    }
}

impl fmt::Display for PredSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Debug for PredSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A term of the ESN language.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Lowercase identifier, e.g. `car_01`.
    Symbol(String),
    /// Fixed-point number.
    Number(Numeric),
    /// Double-quoted string, e.g. `"downtown_la"`.
    Text(String),
    /// Uppercase identifier; only occurs in rules and queries.
    Variable(String),
    /// Functor applied to arguments; arity 0 atoms like `p` are compounds
    /// with an empty argument list.
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn sym(name: impl Into<String>) -> Term {
        Term::Symbol(name.into())
    }

    pub fn num(n: Numeric) -> Term {
        Term::Number(n)
    }

    pub fn int(v: i64) -> Term {
        Term::Number(Numeric::from_scaled(v.saturating_mul(1000)))
    }

    pub fn text(s: impl Into<String>) -> Term {
        Term::Text(s.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Variable(name.into())
    }

    pub fn app(functor: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Compound(functor.into(), args)
    }

    /// True when no variable occurs at any depth.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// The signature of a compound term, if this is one.
    pub fn sig(&self) -> Option<PredSig> {
        match self {
            Term::Compound(f, args) => Some(PredSig::new(f.clone(), args.len())),
            _ => None,
        }
    }

    /// The signature that identifies the predicate semantically: the inner
    /// functor for `holds`/`occurs` wrappers with a compound payload, the
    /// top functor otherwise. `holds(position(..), T)` and a rule head
    /// `holds(in_region(..), T)` are the predicates `position/4` and
    /// `in_region/2`, not `holds/2`.
    pub fn semantic_sig(&self) -> Option<PredSig> {
        match self {
            Term::Compound(f, args) if (f == "holds" || f == "occurs") && args.len() == 2 => {
                args[0].sig().or_else(|| self.sig())
            }
            _ => self.sig(),
        }
    }

    /// Collect the names of all variables, in first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Variable(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
            _ => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Symbol(s) => write!(f, "{s}"),
            Term::Number(n) => write!(f, "{n}"),
            Term::Text(t) => {
                write!(f, "\"")?;
                for c in t.chars() {
                    match c {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        '\n' => write!(f, "\\n")?,
                        '\t' => write!(f, "\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"")
            }
            Term::Variable(v) => write!(f, "{v}"),
            Term::Compound(functor, args) => {
                write!(f, "{functor}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A finite map from variable names to ground terms.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.bindings.contains_key(var)
    }

    /// Bind `var`; the value must be ground.
    pub fn bind(&mut self, var: impl Into<String>, value: Term) {
        debug_assert!(value.is_ground());
        self.bindings.insert(var.into(), value);
    }

    pub fn remove(&mut self, var: &str) {
        self.bindings.remove(var);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

/// Match `pattern` against the ground term `ground`, extending `seed`.
///
/// Returns the minimal extension of `seed` that makes the pattern equal to
/// the ground term, or `None` if they are incompatible. Repeated variables
/// must bind consistently.
pub fn match_term(pattern: &Term, ground: &Term, seed: &Substitution) -> Option<Substitution> {
    debug_assert!(ground.is_ground());
    let mut sub = seed.clone();
    if match_into(pattern, ground, &mut sub) {
        Some(sub)
    } else {
        None
    }
}

fn match_into(pattern: &Term, ground: &Term, sub: &mut Substitution) -> bool {
    match pattern {
        Term::Variable(v) => match sub.get(v) {
            Some(bound) => bound == ground,
            None => {
                sub.bind(v.clone(), ground.clone());
                true
            }
        },
        Term::Compound(f, args) => match ground {
            Term::Compound(g, gargs) if f == g && args.len() == gargs.len() => {
                args.iter().zip(gargs).all(|(p, g)| match_into(p, g, sub))
            }
            _ => false,
        },
        _ => pattern == ground,
    }
}

/// Apply a substitution structurally. Unbound variables pass through.
pub fn apply(sub: &Substitution, term: &Term) -> Term {
    match term {
        Term::Variable(v) => match sub.get(v) {
            Some(bound) => bound.clone(),
            None => term.clone(),
        },
        Term::Compound(f, args) => {
            Term::Compound(f.clone(), args.iter().map(|a| apply(sub, a)).collect())
        }
        _ => term.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn n(s: &str) -> Term {
        Term::Number(s.parse().unwrap())
    }

    fn fig2_position_fact() -> Term {
        // holds(position(car_01, 15.2, 45.8, 0.5), 1622541987.1)
        Term::app(
            "holds",
            vec![
                Term::app("position", vec![Term::sym("car_01"), n("15.2"), n("45.8"), n("0.5")]),
                n("1622541987.1"),
            ],
        )
    }

    #[test]
    fn match_binds_variables_in_nested_terms() {
        let pattern = Term::app(
            "position",
            vec![Term::var("V"), Term::var("X"), n("45.8"), n("0.5")],
        );
        let ground = Term::app(
            "position",
            vec![Term::sym("car_01"), n("15.2"), n("45.8"), n("0.5")],
        );
        let sub = match_term(&pattern, &ground, &Substitution::new()).unwrap();
        assert_eq!(sub.get("V"), Some(&Term::sym("car_01")));
        assert_eq!(sub.get("X"), Some(&n("15.2")));
        assert_eq!(sub.len(), 2);
    }

    #[test]
    fn repeated_variables_must_agree() {
        let pat = Term::app("f", vec![Term::var("X"), Term::var("X")]);
        let same = Term::app("f", vec![Term::sym("a"), Term::sym("a")]);
        let diff = Term::app("f", vec![Term::sym("a"), Term::sym("b")]);
        let sub = match_term(&pat, &same, &Substitution::new()).unwrap();
        assert_eq!(sub.get("X"), Some(&Term::sym("a")));
        assert!(match_term(&pat, &diff, &Substitution::new()).is_none());
    }

    #[test]
    fn arity_is_part_of_identity() {
        let pat = Term::app("position", vec![Term::var("A"), Term::var("B"), Term::var("C")]);
        let ground = Term::app(
            "position",
            vec![Term::sym("car_01"), n("15.2"), n("45.8"), n("0.5")],
        );
        assert!(match_term(&pat, &ground, &Substitution::new()).is_none());
    }

    #[test]
    fn apply_reconstructs_matched_term() {
        // soundness: match(p, g) = s implies apply(s, p) = g
        let pattern = Term::app(
            "holds",
            vec![
                Term::app(
                    "position",
                    vec![Term::var("V"), Term::var("X"), n("45.8"), n("0.5")],
                ),
                Term::var("T"),
            ],
        );
        let ground = fig2_position_fact();
        let sub = match_term(&pattern, &ground, &Substitution::new()).unwrap();
        assert_eq!(apply(&sub, &pattern), ground);
    }

    #[test]
    fn apply_is_identity_on_ground_terms() {
        let g = fig2_position_fact();
        assert_eq!(apply(&Substitution::new(), &g), g);
    }

    #[test]
    fn apply_leaves_unbound_variables() {
        let mut sub = Substitution::new();
        sub.bind("V", Term::sym("car_01"));
        let t = Term::app("brake_light_on", vec![Term::var("V")]);
        assert_eq!(
            apply(&sub, &t),
            Term::app("brake_light_on", vec![Term::sym("car_01")])
        );
        let u = Term::app("f", vec![Term::var("W")]);
        assert_eq!(apply(&sub, &u), u);
    }

    #[test]
    fn display_matches_source_syntax() {
        assert_eq!(
            fig2_position_fact().to_string(),
            "holds(position(car_01, 15.2, 45.8, 0.5), 1622541987.1)"
        );
        assert_eq!(Term::app("p", vec![]).to_string(), "p");
        assert_eq!(Term::text("downtown_la").to_string(), "\"downtown_la\"");
    }
}
