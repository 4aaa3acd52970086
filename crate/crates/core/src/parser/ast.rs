//! Abstract syntax of the ESN language: rules, body literals, arithmetic
//! expressions, and whole programs.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::datamodel::{Fact, Numeric, PredSig, Term};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

/// An arithmetic expression tree. Constants may also be symbols or text,
/// which only the term-equality operators `=`/`!=` accept.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Const(Term),
    Var(String),
    Binary(BinOp, alloc::boxed::Box<Expr>, alloc::boxed::Box<Expr>),
    Neg(alloc::boxed::Box<Expr>),
    Sqrt(alloc::boxed::Box<Expr>),
}

impl Expr {
    pub fn num(n: Numeric) -> Expr {
        Expr::Const(Term::Number(n))
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Neg(e) | Expr::Sqrt(e) => e.collect_vars(out),
        }
    }

    pub fn collect_numerics(&self, out: &mut alloc::collections::BTreeSet<Numeric>) {
        match self {
            Expr::Const(Term::Number(n)) => {
                out.insert(*n);
            }
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Binary(_, l, r) => {
                l.collect_numerics(out);
                r.collect_numerics(out);
            }
            Expr::Neg(e) | Expr::Sqrt(e) => e.collect_numerics(out),
        }
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, _, _) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, _, _) => 2,
        Expr::Neg(_) => 3,
        Expr::Binary(BinOp::Pow, _, _) => 4,
        Expr::Const(_) | Expr::Var(_) | Expr::Sqrt(_) => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if precedence(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(t) => write!(f, "{t}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Binary(op, l, r) => {
                let p = precedence(self);
                // Sub/Div are left-associative, Pow is right-associative.
                let (lmin, rmin) = match op {
                    BinOp::Pow => (p + 1, p),
                    BinOp::Add | BinOp::Mul => (p, p),
                    BinOp::Sub | BinOp::Div => (p, p + 1),
                };
                child(f, l, lmin)?;
                write!(f, " {} ", op.symbol())?;
                child(f, r, rmin)
            }
            Expr::Neg(e) => {
                write!(f, "-")?;
                child(f, e, precedence(self))
            }
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
        }
    }
}

/// A body literal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Literal {
    Positive(Term),
    Negative(Term),
    Comparison(Expr, CmpOp, Expr),
    /// `V = expr` where `V` is unbound at this point in body order.
    Assignment(String, Expr),
}

impl Literal {
    /// Variables mentioned by this literal, in occurrence order (the
    /// assignment target comes after its expression, mirroring data flow).
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Literal::Positive(t) | Literal::Negative(t) => t.collect_vars(out),
            Literal::Comparison(l, _, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Literal::Assignment(v, e) => {
                e.collect_vars(out);
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Positive(t) => write!(f, "{t}"),
            Literal::Negative(t) => write!(f, "not {t}"),
            Literal::Comparison(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
            Literal::Assignment(v, e) => write!(f, "{v} = {e}"),
        }
    }
}

/// A rule `head :- body.` The head may be non-ground; safety guarantees
/// every head variable is bound when the body succeeds.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub head: Term,
    pub body: Vec<Literal>,
}

impl Rule {
    /// The predicate this rule defines: the semantic signature of its head,
    /// so `holds(in_region(V, R), T) :- ...` defines `in_region/2`.
    pub fn head_sig(&self) -> PredSig {
        self.head.semantic_sig().expect("rule heads are compounds")
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :-", self.head)?;
        for (i, lit) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "\n    {lit}")?;
        }
        write!(f, ".")
    }
}

/// Identifier of a rule inside a program: head signature plus the 0-based
/// index among rules sharing that head, written `functor/arity@k`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct RuleId {
    pub sig: PredSig,
    pub index: usize,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.sig, self.index)
    }
}

/// Directives accepted by the parser. Plain programs only use `#show`;
/// policy files add `#allow`/`#deny` and patch files `#remove`/`#rebind`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Directive {
    Show(PredSig),
    Allow(PredSig),
    Deny(PredSig),
    Remove(RuleId),
    Rebind(String, Numeric),
}

/// Facts plus rules plus `#show` directives.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Program {
    pub facts: Vec<Fact>,
    pub rules: Vec<Rule>,
    pub shows: Vec<PredSig>,
}

impl Program {
    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.rules.is_empty() && self.shows.is_empty()
    }

    /// The identifier of rule `index`, derived from its position among
    /// rules sharing the same head signature.
    pub fn rule_id(&self, index: usize) -> RuleId {
        let sig = self.rules[index].head_sig();
        let nth = self.rules[..index]
            .iter()
            .filter(|r| r.head_sig() == sig)
            .count();
        RuleId { sig, index: nth }
    }

    pub fn rule_ids(&self) -> Vec<RuleId> {
        (0..self.rules.len()).map(|i| self.rule_id(i)).collect()
    }

    /// Index of the rule with the given identifier, if present.
    pub fn find_rule(&self, id: &RuleId) -> Option<usize> {
        (0..self.rules.len()).find(|&i| self.rule_id(i) == *id)
    }

    /// Signatures defined by rules (intensional predicates).
    pub fn intensional_sigs(&self) -> alloc::collections::BTreeSet<PredSig> {
        self.rules.iter().map(Rule::head_sig).collect()
    }

    /// Merge two programs into one, appending the other's statements.
    pub fn merged(&self, other: &Program) -> Program {
        let mut facts = self.facts.clone();
        facts.extend(other.facts.iter().cloned());
        let mut rules = self.rules.clone();
        rules.extend(other.rules.iter().cloned());
        let mut shows = self.shows.clone();
        for s in &other.shows {
            if !shows.contains(s) {
                shows.push(s.clone());
            }
        }
        Program { facts, rules, shows }
    }
}
