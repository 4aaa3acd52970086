//! Tokenizer for the ESN text language.

use alloc::string::String;
use alloc::vec::Vec;

use crate::datamodel::Numeric;

use super::ParseError;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    /// Lowercase-initial identifier (symbol / functor / keyword).
    Ident(String),
    /// Uppercase-initial identifier (variable).
    Var(String),
    Num(Numeric),
    Str(String),
    /// `#name` directive keyword.
    Directive(String),
    ColonDash,
    LParen,
    RParen,
    Comma,
    Dot,
    Slash,
    At,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Plus,
    Minus,
    Star,
    Caret,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        use alloc::string::ToString;
        match self {
            Tok::Ident(s) => alloc::format!("identifier `{s}`"),
            Tok::Var(s) => alloc::format!("variable `{s}`"),
            Tok::Num(n) => alloc::format!("number `{n}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::Directive(s) => alloc::format!("`#{s}`"),
            Tok::ColonDash => "`:-`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::Slash => "`/`".to_string(),
            Tok::At => "`@`".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Le => "`<=`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Ge => "`>=`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Ne => "`!=`".to_string(),
            Tok::Plus => "`+`".to_string(),
            Tok::Minus => "`-`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Caret => "`^`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

/// A token with the line/column of its first character (1-based).
#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub column: u32,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = source.chars().peekable();
    let mut line: u32 = 1;
    let mut column: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    loop {
        // Skip whitespace and % comments.
        loop {
            match chars.peek() {
                Some(c) if c.is_whitespace() => {
                    bump!();
                }
                Some('%') => {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump!();
                    }
                }
                _ => break,
            }
        }
        let (tline, tcol) = (line, column);
        let Some(&c) = chars.peek() else {
            out.push(Token { tok: Tok::Eof, line: tline, column: tcol });
            return Ok(out);
        };

        let tok = match c {
            'a'..='z' | 'A'..='Z' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                    Tok::Var(name)
                } else {
                    Tok::Ident(name)
                }
            }
            '0'..='9' => {
                let mut lit = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        lit.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                // A dot is part of the number only when a digit follows;
                // otherwise it terminates the statement.
                let mut probe = chars.clone();
                if probe.next() == Some('.') && probe.next().is_some_and(|c| c.is_ascii_digit()) {
                    lit.push('.');
                    bump!();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            lit.push(c);
                            bump!();
                        } else {
                            break;
                        }
                    }
                }
                match lit.parse::<Numeric>() {
                    Ok(n) => Tok::Num(n),
                    Err(e) => {
                        return Err(ParseError::Syntax {
                            line: tline,
                            column: tcol,
                            expected: alloc::format!("valid numeric literal ({e})"),
                        })
                    }
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            _ => {
                                return Err(ParseError::Syntax {
                                    line: tline,
                                    column: tcol,
                                    expected: "valid string escape".into(),
                                })
                            }
                        },
                        Some('\n') | None => {
                            return Err(ParseError::Syntax {
                                line: tline,
                                column: tcol,
                                expected: "closing `\"`".into(),
                            })
                        }
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            '#' => {
                bump!();
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(ParseError::Syntax {
                        line: tline,
                        column: tcol,
                        expected: "directive name after `#`".into(),
                    });
                }
                Tok::Directive(name)
            }
            ':' => {
                bump!();
                if chars.peek() == Some(&'-') {
                    bump!();
                    Tok::ColonDash
                } else {
                    return Err(ParseError::Syntax {
                        line: tline,
                        column: tcol,
                        expected: "`:-`".into(),
                    });
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '!' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::Ne
                } else {
                    return Err(ParseError::Syntax {
                        line: tline,
                        column: tcol,
                        expected: "`!=`".into(),
                    });
                }
            }
            '=' => {
                bump!();
                Tok::Eq
            }
            '(' => {
                bump!();
                Tok::LParen
            }
            ')' => {
                bump!();
                Tok::RParen
            }
            ',' => {
                bump!();
                Tok::Comma
            }
            '.' => {
                bump!();
                Tok::Dot
            }
            '/' => {
                bump!();
                Tok::Slash
            }
            '@' => {
                bump!();
                Tok::At
            }
            '+' => {
                bump!();
                Tok::Plus
            }
            '-' => {
                bump!();
                Tok::Minus
            }
            '*' => {
                bump!();
                Tok::Star
            }
            '^' => {
                bump!();
                Tok::Caret
            }
            other => {
                return Err(ParseError::Syntax {
                    line: tline,
                    column: tcol,
                    expected: alloc::format!("valid token (found `{other}`)"),
                })
            }
        };
        out.push(Token { tok, line: tline, column: tcol });
    }
}
