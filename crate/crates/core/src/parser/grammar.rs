//! Recursive-descent parser over the token stream.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::datamodel::{Fact, Numeric, PredSig, Term};

use super::ast::{BinOp, CmpOp, Directive, Expr, Literal, Rule, RuleId};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Raw parse result before program-level validation: statements in source
/// order, with directives kept separate.
#[derive(Clone, Default, Debug)]
pub struct ParsedUnits {
    pub facts: Vec<Fact>,
    pub rules: Vec<Rule>,
    pub directives: Vec<Directive>,
}

pub fn parse_units(source: &str) -> Result<ParsedUnits, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut units = ParsedUnits::default();
    loop {
        if p.peek_is(&Tok::Eof) {
            return Ok(units);
        }
        if let Tok::Directive(_) = p.peek().tok {
            units.directives.push(p.directive()?);
            continue;
        }
        let head = p.atom()?;
        if p.eat(&Tok::Dot) {
            match Fact::new(head) {
                Ok(fact) => units.facts.push(fact),
                Err(err) => {
                    // A fact with variables is an unsafe empty-body rule.
                    let atom = match err {
                        crate::datamodel::FactError::NonGround(t)
                        | crate::datamodel::FactError::NotCompound(t) => t,
                    };
                    let mut vars = Vec::new();
                    atom.collect_vars(&mut vars);
                    return Err(ParseError::Safety {
                        rule: alloc::format!("{atom}."),
                        variable: vars.into_iter().next().unwrap_or_default(),
                    });
                }
            }
        } else if p.eat(&Tok::ColonDash) {
            let body = p.body()?;
            p.expect(&Tok::Dot)?;
            units.rules.push(Rule { head, body });
        } else {
            return Err(p.unexpected("`.` or `:-`"));
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_is(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek_is(t) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<Token, ParseError> {
        if self.peek_is(t) {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let tok = self.peek();
        ParseError::Syntax {
            line: tok.line,
            column: tok.column,
            expected: alloc::format!("expected {expected}, found {}", tok.tok.describe()),
        }
    }

    /// `name` or `name(term, ...)`; `not` and `sqrt` are reserved.
    fn atom(&mut self) -> Result<Term, ParseError> {
        let tok = self.peek().clone();
        let Tok::Ident(name) = tok.tok else {
            return Err(self.unexpected("a predicate name"));
        };
        if name == "not" || name == "sqrt" {
            return Err(ParseError::Syntax {
                line: tok.line,
                column: tok.column,
                expected: alloc::format!("a predicate name (`{name}` is reserved)"),
            });
        }
        self.advance();
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.term()?);
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(&Tok::RParen)?;
                break;
            }
        }
        Ok(Term::Compound(name, args))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Ident(name) => {
                if name == "not" || name == "sqrt" {
                    return Err(ParseError::Syntax {
                        line: tok.line,
                        column: tok.column,
                        expected: alloc::format!("a term (`{name}` is reserved)"),
                    });
                }
                self.advance();
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    loop {
                        args.push(self.term()?);
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(&Tok::RParen)?;
                        break;
                    }
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Symbol(name))
                }
            }
            Tok::Var(name) => {
                self.advance();
                Ok(Term::Variable(name))
            }
            Tok::Num(n) => {
                self.advance();
                Ok(Term::Number(n))
            }
            Tok::Minus => {
                self.advance();
                let tok = self.peek().clone();
                match tok.tok {
                    Tok::Num(n) => {
                        self.advance();
                        let neg = n.checked_neg().map_err(|_| ParseError::Syntax {
                            line: tok.line,
                            column: tok.column,
                            expected: "numeric literal in range".to_string(),
                        })?;
                        Ok(Term::Number(neg))
                    }
                    _ => Err(self.unexpected("a number after `-`")),
                }
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Term::Text(s))
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn body(&mut self) -> Result<Vec<Literal>, ParseError> {
        let mut body = Vec::new();
        // Variables bound so far by positive literals or assignment
        // targets; decides whether `V = e` is an assignment or an equality.
        let mut bound: Vec<String> = Vec::new();
        loop {
            let lit = self.literal(&bound)?;
            match &lit {
                Literal::Positive(t) => t.collect_vars(&mut bound),
                Literal::Assignment(v, _) => {
                    if !bound.iter().any(|x| x == v) {
                        bound.push(v.clone());
                    }
                }
                _ => {}
            }
            body.push(lit);
            if self.eat(&Tok::Comma) {
                continue;
            }
            return Ok(body);
        }
    }

    fn literal(&mut self, bound: &[String]) -> Result<Literal, ParseError> {
        let tok = self.peek().clone();
        match &tok.tok {
            Tok::Ident(name) if name == "not" => {
                self.advance();
                Ok(Literal::Negative(self.atom()?))
            }
            Tok::Ident(name) if name != "sqrt" => {
                // An atom, unless a comparison operator follows a bare
                // symbol, in which case the symbol is an expression operand.
                let atom = self.atom()?;
                if let Some(op) = self.peek_cmp_op() {
                    match &atom {
                        Term::Compound(f, args) if args.is_empty() => {
                            let lhs = Expr::Const(Term::Symbol(f.clone()));
                            self.advance();
                            let rhs = self.expr()?;
                            Ok(Literal::Comparison(lhs, op, rhs))
                        }
                        _ => Err(self.unexpected("`,` or `.` after an atom")),
                    }
                } else {
                    Ok(Literal::Positive(atom))
                }
            }
            _ => {
                let lhs = self.expr()?;
                let Some(op) = self.peek_cmp_op() else {
                    return Err(self.unexpected("a comparison operator"));
                };
                self.advance();
                let rhs = self.expr()?;
                if op == CmpOp::Eq {
                    if let Expr::Var(v) = &lhs {
                        if !bound.iter().any(|x| x == v) {
                            return Ok(Literal::Assignment(v.clone(), rhs));
                        }
                    }
                }
                Ok(Literal::Comparison(lhs, op, rhs))
            }
        }
    }

    fn peek_cmp_op(&self) -> Option<CmpOp> {
        match self.peek().tok {
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Gt => Some(CmpOp::Gt),
            Tok::Ge => Some(CmpOp::Ge),
            Tok::Eq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_mul()?;
        loop {
            let op = if self.eat(&Tok::Plus) {
                BinOp::Add
            } else if self.eat(&Tok::Minus) {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.expr_mul()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn expr_mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_unary()?;
        loop {
            let op = if self.eat(&Tok::Star) {
                BinOp::Mul
            } else if self.eat(&Tok::Slash) {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.expr_unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    /// `^` binds tighter than unary minus: `-X^2` is `-(X^2)`.
    fn expr_unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            let inner = self.expr_unary()?;
            // Fold a negated numeric constant into the literal so the
            // formatter round-trips.
            if let Expr::Const(Term::Number(n)) = inner {
                let tok = self.peek().clone();
                let neg = n.checked_neg().map_err(|_| ParseError::Syntax {
                    line: tok.line,
                    column: tok.column,
                    expected: "numeric literal in range".to_string(),
                })?;
                return Ok(Expr::Const(Term::Number(neg)));
            }
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.expr_power()
    }

    fn expr_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.expr_primary()?;
        if self.eat(&Tok::Caret) {
            let exp = self.expr_unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn expr_primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Num(n) => {
                self.advance();
                Ok(Expr::num(n))
            }
            Tok::Var(v) => {
                self.advance();
                Ok(Expr::Var(v))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::Const(Term::Text(s)))
            }
            Tok::Ident(name) if name == "sqrt" => {
                self.advance();
                self.expect(&Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::Sqrt(Box::new(inner)))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.peek_is(&Tok::LParen) {
                    return Err(ParseError::Syntax {
                        line: tok.line,
                        column: tok.column,
                        expected: "a value (compound terms are not expressions)".to_string(),
                    });
                }
                Ok(Expr::Const(Term::Symbol(name)))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn directive(&mut self) -> Result<Directive, ParseError> {
        let tok = self.advance();
        let Tok::Directive(name) = tok.tok else {
            unreachable!("caller checked for a directive token");
        };
        let directive = match name.as_str() {
            "show" => Directive::Show(self.pred_sig()?),
            "allow" => Directive::Allow(self.pred_sig()?),
            "deny" => Directive::Deny(self.pred_sig()?),
            "remove" => {
                let sig = self.pred_sig()?;
                self.expect(&Tok::At)?;
                let index = self.small_uint()?;
                Directive::Remove(RuleId { sig, index })
            }
            "rebind" => {
                let param = match self.advance() {
                    Token { tok: Tok::Ident(s), .. } => s,
                    _ => return Err(self.unexpected("a parameter name")),
                };
                let value = self.signed_number()?;
                Directive::Rebind(param, value)
            }
            other => {
                return Err(ParseError::Syntax {
                    line: tok.line,
                    column: tok.column,
                    expected: alloc::format!("a known directive (`#{other}` is not one)"),
                })
            }
        };
        self.expect(&Tok::Dot)?;
        Ok(directive)
    }

    fn pred_sig(&mut self) -> Result<PredSig, ParseError> {
        let name = match self.peek().tok.clone() {
            Tok::Ident(s) => {
                self.advance();
                s
            }
            _ => return Err(self.unexpected("a predicate name")),
        };
        self.expect(&Tok::Slash)?;
        let arity = self.small_uint()?;
        Ok(PredSig::new(name, arity))
    }

    fn small_uint(&mut self) -> Result<usize, ParseError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Num(n) if n.is_integer() && n.to_integer() >= 0 => {
                self.advance();
                Ok(n.to_integer() as usize)
            }
            _ => Err(self.unexpected("a non-negative integer")),
        }
    }

    fn signed_number(&mut self) -> Result<Numeric, ParseError> {
        let neg = self.eat(&Tok::Minus);
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Num(n) => {
                self.advance();
                if neg {
                    n.checked_neg().map_err(|_| ParseError::Syntax {
                        line: tok.line,
                        column: tok.column,
                        expected: "numeric literal in range".to_string(),
                    })
                } else {
                    Ok(n)
                }
            }
            _ => Err(self.unexpected("a number")),
        }
    }
}
