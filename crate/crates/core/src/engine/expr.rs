//! Evaluation of arithmetic expressions and comparisons under a
//! substitution.

use alloc::boxed::Box;
use alloc::string::String;

use crate::datamodel::{ArithmeticKind, Numeric, Substitution, Term};
use crate::parser::{BinOp, CmpOp, Expr};

/// Evaluate to a ground term. Arithmetic operators demand numbers; bare
/// constants and variables may also yield symbols or text, which only the
/// term-equality comparisons accept.
pub fn eval_term(expr: &Expr, sub: &Substitution) -> Result<Term, ArithmeticKind> {
    match expr {
        Expr::Const(t) => Ok(t.clone()),
        Expr::Var(v) => match sub.get(v) {
            Some(t) => Ok(t.clone()),
            None => Err(ArithmeticKind::UnboundVariable),
        },
        Expr::Binary(op, l, r) => {
            let l = eval_numeric(l, sub)?;
            let r = eval_numeric(r, sub)?;
            let v = match op {
                BinOp::Add => l.checked_add(r)?,
                BinOp::Sub => l.checked_sub(r)?,
                BinOp::Mul => l.checked_mul(r)?,
                BinOp::Div => l.checked_div(r)?,
                BinOp::Pow => l.checked_pow(r)?,
            };
            Ok(Term::Number(v))
        }
        Expr::Neg(e) => Ok(Term::Number(eval_numeric(e, sub)?.checked_neg()?)),
        Expr::Sqrt(e) => Ok(Term::Number(eval_numeric(e, sub)?.checked_sqrt()?)),
    }
}

/// Evaluate and require a numeric result.
pub fn eval_numeric(expr: &Expr, sub: &Substitution) -> Result<Numeric, ArithmeticKind> {
    match eval_term(expr, sub)? {
        Term::Number(n) => Ok(n),
        _ => Err(ArithmeticKind::NonNumericOperand),
    }
}

/// Evaluate a comparison. The ordering operators are numeric-only; `=` and
/// `!=` compare ground terms, so symbols and strings may be tested for
/// (in)equality.
pub fn eval_comparison(
    lhs: &Expr,
    op: CmpOp,
    rhs: &Expr,
    sub: &Substitution,
) -> Result<(bool, Term, Term), ArithmeticKind> {
    let l = eval_term(lhs, sub)?;
    let r = eval_term(rhs, sub)?;
    let outcome = match op {
        CmpOp::Eq => l == r,
        CmpOp::Ne => l != r,
        CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
            let (Term::Number(a), Term::Number(b)) = (&l, &r) else {
                return Err(ArithmeticKind::NonNumericOperand);
            };
            match op {
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
                _ => unreachable!(),
            }
        }
    };
    Ok((outcome, l, r))
}

/// Replace bound variables in an expression, for error messages and
/// proof rendering.
pub fn substituted(expr: &Expr, sub: &Substitution) -> Expr {
    match expr {
        Expr::Const(_) => expr.clone(),
        Expr::Var(v) => match sub.get(v) {
            Some(t) => Expr::Const(t.clone()),
            None => expr.clone(),
        },
        Expr::Binary(op, l, r) => Expr::Binary(
            *op,
            Box::new(substituted(l, sub)),
            Box::new(substituted(r, sub)),
        ),
        Expr::Neg(e) => Expr::Neg(Box::new(substituted(e, sub))),
        Expr::Sqrt(e) => Expr::Sqrt(Box::new(substituted(e, sub))),
    }
}

/// Render a literal with the substitution applied, for diagnostics.
pub fn describe_literal(lit: &crate::parser::Literal, sub: &Substitution) -> String {
    use crate::datamodel::apply;
    use crate::parser::Literal;
    match lit {
        Literal::Positive(t) => alloc::format!("{}", apply(sub, t)),
        Literal::Negative(t) => alloc::format!("not {}", apply(sub, t)),
        Literal::Comparison(l, op, r) => {
            alloc::format!("{} {} {}", substituted(l, sub), op.symbol(), substituted(r, sub))
        }
        Literal::Assignment(v, e) => alloc::format!("{v} = {}", substituted(e, sub)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_rule_text;
    use crate::parser::Literal;

    fn n(s: &str) -> Numeric {
        s.parse().unwrap()
    }

    /// Pull the assignment expression out of a one-rule program.
    fn expr_of(rule_src: &str) -> Expr {
        let rule = parse_rule_text(rule_src).unwrap();
        for lit in rule.body {
            if let Literal::Assignment(_, e) = lit {
                return e;
            }
        }
        panic!("no assignment in {rule_src}");
    }

    #[test]
    fn fig2_distance_expression() {
        // sqrt((18.7-15.2)^2 + (45.8-45.8)^2 + (0.5-0.5)^2) = 3.500
        let e = expr_of("d(D) :- p(X1, Y1, Z1, X2, Y2, Z2), D = sqrt((X2-X1)^2 + (Y2-Y1)^2 + (Z2-Z1)^2).");
        let mut sub = Substitution::new();
        for (v, val) in [
            ("X1", "15.2"),
            ("Y1", "45.8"),
            ("Z1", "0.5"),
            ("X2", "18.7"),
            ("Y2", "45.8"),
            ("Z2", "0.5"),
        ] {
            sub.bind(v, Term::Number(n(val)));
        }
        assert_eq!(eval_numeric(&e, &sub).unwrap(), n("3.5"));
    }

    #[test]
    fn identity_addition_on_timestamps() {
        let e = expr_of("d(D) :- p(T), D = T + 0.");
        let mut sub = Substitution::new();
        sub.bind("T", Term::Number(n("1622541987.1")));
        assert_eq!(eval_numeric(&e, &sub).unwrap(), n("1622541987.1"));
    }

    #[test]
    fn sqrt_two_rounds_to_nearest_milli() {
        let e = expr_of("d(D) :- p(X), D = sqrt(X).");
        let mut sub = Substitution::new();
        sub.bind("X", Term::Number(n("2")));
        assert_eq!(eval_numeric(&e, &sub).unwrap(), n("1.414"));
    }

    #[test]
    fn term_equality_handles_symbols() {
        let rule = parse_rule_text("p(L1, L2) :- q(L1, L2), L1 != L2.").unwrap();
        let Literal::Comparison(l, op, r) = &rule.body[1] else {
            panic!("expected comparison")
        };
        let mut sub = Substitution::new();
        sub.bind("L1", Term::sym("lane_001"));
        sub.bind("L2", Term::sym("lane_002"));
        let (outcome, _, _) = eval_comparison(l, *op, r, &sub).unwrap();
        assert!(outcome);
        sub.bind("L2", Term::sym("lane_001"));
        let (outcome, _, _) = eval_comparison(l, *op, r, &sub).unwrap();
        assert!(!outcome);
    }

    #[test]
    fn ordering_on_symbols_is_an_error() {
        let rule = parse_rule_text("p(L1, L2) :- q(L1, L2), L1 < L2.").unwrap();
        let Literal::Comparison(l, op, r) = &rule.body[1] else {
            panic!("expected comparison")
        };
        let mut sub = Substitution::new();
        sub.bind("L1", Term::sym("a"));
        sub.bind("L2", Term::sym("b"));
        assert_eq!(
            eval_comparison(l, *op, r, &sub).unwrap_err(),
            ArithmeticKind::NonNumericOperand
        );
    }
}
