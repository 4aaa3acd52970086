//! Ground facts and the deduplicated, indexed fact store.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use super::numeric::Numeric;
use super::term::{PredSig, Term};

/// A ground compound term asserted as true. Dynamic state (`holds`),
/// instantaneous events (`occurs`) and timeless static facts all share this
/// one representation; the distinction is carried by the functor alone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    atom: Term,
}

/// Attempt to build a fact from a term that is not a ground compound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactError {
    NonGround(Term),
    NotCompound(Term),
}

impl fmt::Display for FactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactError::NonGround(t) => write!(f, "non-ground fact: {t}"),
            FactError::NotCompound(t) => write!(f, "fact is not a compound atom: {t}"),
        }
    }
}

impl core::error::Error for FactError {}

impl Fact {
    pub fn new(atom: Term) -> Result<Fact, FactError> {
        if !matches!(atom, Term::Compound(_, _)) {
            return Err(FactError::NotCompound(atom));
        }
        if !atom.is_ground() {
            return Err(FactError::NonGround(atom));
        }
        Ok(Fact { atom })
    }

    pub fn atom(&self) -> &Term {
        &self.atom
    }

    pub fn into_atom(self) -> Term {
        self.atom
    }

    pub fn sig(&self) -> PredSig {
        self.atom.sig().expect("facts are compounds")
    }

    /// The signature identifying the fact's predicate semantically (and for
    /// export policies): the inner functor for `holds`/`occurs` wrappers,
    /// the top functor otherwise.
    pub fn semantic_sig(&self) -> PredSig {
        self.atom.semantic_sig().expect("facts are compounds")
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)
    }
}

/// Key of the temporal index: `holds`/`occurs` facts whose payload is a
/// compound and whose second argument is a number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct TemporalKey {
    outer: PredSig,
    inner: PredSig,
    at: Numeric,
}

fn temporal_key(atom: &Term) -> Option<TemporalKey> {
    match atom {
        Term::Compound(f, args) if (f == "holds" || f == "occurs") && args.len() == 2 => {
            let inner = args[0].sig()?;
            let at = match &args[1] {
                Term::Number(n) => *n,
                _ => return None,
            };
            Some(TemporalKey { outer: PredSig::new(f.clone(), 2), inner, at })
        }
        _ => None,
    }
}

/// A deduplicated set of ground facts indexed by predicate signature, by
/// wrapped-payload signature for `holds`/`occurs`, and by timestamp.
///
/// Construction is single-writer; once built, a `FactBase` is a plain
/// immutable value that any number of readers may share.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct FactBase {
    by_sig: BTreeMap<PredSig, BTreeSet<Fact>>,
    by_inner: BTreeMap<(PredSig, PredSig), BTreeSet<Fact>>,
    by_time: BTreeMap<TemporalKey, BTreeSet<Fact>>,
    len: usize,
}

impl FactBase {
    pub fn new() -> FactBase {
        FactBase::default()
    }

    /// Insert a fact; returns true iff it was newly added.
    pub fn insert(&mut self, fact: Fact) -> bool {
        let sig = fact.sig();
        let added = self.by_sig.entry(sig.clone()).or_default().insert(fact.clone());
        if !added {
            return false;
        }
        self.len += 1;
        if let Term::Compound(f, args) = fact.atom() {
            if (f == "holds" || f == "occurs") && args.len() == 2 {
                if let Some(inner) = args[0].sig() {
                    self.by_inner
                        .entry((sig, inner))
                        .or_default()
                        .insert(fact.clone());
                }
            }
        }
        if let Some(key) = temporal_key(fact.atom()) {
            self.by_time.entry(key).or_default().insert(fact);
        }
        true
    }

    /// Insert a raw term, validating groundness first.
    pub fn insert_term(&mut self, atom: Term) -> Result<bool, FactError> {
        Ok(self.insert(Fact::new(atom)?))
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.by_sig.get(&fact.sig()).is_some_and(|set| set.contains(fact))
    }

    pub fn contains_atom(&self, atom: &Term) -> bool {
        match atom.sig() {
            Some(sig) => self
                .by_sig
                .get(&sig)
                .is_some_and(|set| set.iter().any(|f| f.atom() == atom)),
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// All facts in canonical (sorted) order.
    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.by_sig.values().flatten()
    }

    /// Facts of one predicate in canonical order.
    pub fn with_sig(&self, sig: &PredSig) -> impl Iterator<Item = &Fact> {
        self.by_sig.get(sig).into_iter().flatten()
    }

    pub fn sigs(&self) -> impl Iterator<Item = &PredSig> {
        self.by_sig.keys()
    }

    pub fn count_sig(&self, sig: &PredSig) -> usize {
        self.by_sig.get(sig).map_or(0, BTreeSet::len)
    }

    /// True when any stored fact has this semantic signature, whether bare
    /// or wrapped in `holds`/`occurs`.
    pub fn has_semantic_sig(&self, sig: &PredSig) -> bool {
        if self.by_sig.contains_key(sig) {
            return true;
        }
        for outer in ["holds", "occurs"] {
            if self
                .by_inner
                .contains_key(&(PredSig::new(outer, 2), sig.clone()))
            {
                return true;
            }
        }
        false
    }

    /// Candidate facts for a match against `pattern`, using the narrowest
    /// available index. The pattern must be a compound term; candidates come
    /// back in canonical order and are a superset of the true matches.
    pub fn candidates<'a>(&'a self, pattern: &Term) -> Box<dyn Iterator<Item = &'a Fact> + 'a> {
        let Some(sig) = pattern.sig() else {
            return Box::new(core::iter::empty());
        };
        if let Term::Compound(f, args) = pattern {
            if (f == "holds" || f == "occurs") && args.len() == 2 {
                if let Some(inner) = args[0].sig() {
                    if let Term::Number(at) = &args[1] {
                        let key = TemporalKey { outer: sig, inner, at: *at };
                        return Box::new(self.by_time.get(&key).into_iter().flatten());
                    }
                    return Box::new(self.by_inner.get(&(sig, inner)).into_iter().flatten());
                }
            }
        }
        Box::new(self.with_sig(&sig))
    }

    /// Every distinct numeric constant occurring anywhere in the stored
    /// facts. This is the enumeration domain for arithmetic-constrained
    /// rule variables.
    pub fn numeric_constants(&self, out: &mut BTreeSet<Numeric>) {
        fn walk(t: &Term, out: &mut BTreeSet<Numeric>) {
            match t {
                Term::Number(n) => {
                    out.insert(*n);
                }
                Term::Compound(_, args) => {
                    for a in args {
                        walk(a, out);
                    }
                }
                _ => {}
            }
        }
        for fact in self.iter() {
            walk(fact.atom(), out);
        }
    }

    /// Union in all facts from `other`.
    pub fn absorb(&mut self, other: &FactBase) {
        for fact in other.iter() {
            self.insert(fact.clone());
        }
    }

    pub fn to_vec(&self) -> Vec<Fact> {
        self.iter().cloned().collect()
    }
}

impl fmt::Debug for FactBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FactBase({} facts)", self.len)
    }
}

impl FromIterator<Fact> for FactBase {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> FactBase {
        let mut fb = FactBase::new();
        for fact in iter {
            fb.insert(fact);
        }
        fb
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn n(s: &str) -> Term {
        Term::Number(s.parse().unwrap())
    }

    fn driver_state_fact() -> Fact {
        Fact::new(Term::app(
            "holds",
            vec![
                Term::app("driver_state", vec![Term::sym("car_01"), Term::sym("attentive")]),
                n("1622541987.1"),
            ],
        ))
        .unwrap()
    }

    #[test]
    fn insert_is_idempotent() {
        let mut fb = FactBase::new();
        assert!(fb.insert(driver_state_fact()));
        assert!(!fb.insert(driver_state_fact()));
        assert_eq!(fb.len(), 1);
    }

    #[test]
    fn non_ground_atoms_are_rejected() {
        let mut fb = FactBase::new();
        let atom = Term::app(
            "holds",
            vec![
                Term::app("position", vec![Term::var("V"), n("1"), n("2"), n("3")]),
                n("10"),
            ],
        );
        assert!(matches!(fb.insert_term(atom), Err(FactError::NonGround(_))));
    }

    #[test]
    fn cardinality_is_insertion_order_independent() {
        let facts = vec![
            Fact::new(Term::app("p", vec![Term::sym("a")])).unwrap(),
            Fact::new(Term::app("p", vec![Term::sym("b")])).unwrap(),
            Fact::new(Term::app("q", vec![n("1"), n("2")])).unwrap(),
        ];
        let mut fwd = FactBase::new();
        let mut rev = FactBase::new();
        for f in &facts {
            fwd.insert(f.clone());
        }
        for f in facts.iter().rev() {
            rev.insert(f.clone());
            rev.insert(f.clone());
        }
        assert_eq!(fwd.len(), rev.len());
        assert_eq!(fwd, rev);
        assert_eq!(fwd.to_vec(), rev.to_vec());
    }

    #[test]
    fn temporal_index_narrows_candidates() {
        let mut fb = FactBase::new();
        for (id, x, t) in [("car_01", "15.2", "1"), ("car_02", "18.7", "1"), ("car_01", "16.0", "2")] {
            fb.insert_term(Term::app(
                "holds",
                vec![
                    Term::app("position", vec![Term::sym(id), n(x), n("45.8"), n("0.5")]),
                    n(t),
                ],
            ))
            .unwrap();
        }
        fb.insert_term(Term::app(
            "holds",
            vec![
                Term::app("velocity", vec![Term::sym("car_01"), n("25.5"), n("0"), n("0")]),
                n("1"),
            ],
        ))
        .unwrap();

        let pat_t1 = Term::app(
            "holds",
            vec![
                Term::app("position", vec![Term::var("V"), Term::var("X"), Term::var("Y"), Term::var("Z")]),
                n("1"),
            ],
        );
        assert_eq!(fb.candidates(&pat_t1).count(), 2);

        let pat_any = Term::app(
            "holds",
            vec![
                Term::app("position", vec![Term::var("V"), Term::var("X"), Term::var("Y"), Term::var("Z")]),
                Term::var("T"),
            ],
        );
        assert_eq!(fb.candidates(&pat_any).count(), 3);
    }

    #[test]
    fn semantic_sig_unwraps_holds_and_occurs() {
        assert_eq!(driver_state_fact().semantic_sig(), PredSig::new("driver_state", 2));
        let static_fact = Fact::new(Term::app(
            "map_lane",
            vec![Term::sym("lane_001"), n("0"), n("3.5"), n("0"), n("100"), n("13.411")],
        ))
        .unwrap();
        assert_eq!(static_fact.semantic_sig(), PredSig::new("map_lane", 6));
        let mut fb = FactBase::new();
        fb.insert(driver_state_fact());
        assert!(fb.has_semantic_sig(&PredSig::new("driver_state", 2)));
        assert!(!fb.has_semantic_sig(&PredSig::new("position", 4)));
    }
}
