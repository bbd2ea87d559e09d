//! Recursive-descent parser for polynomial expressions.
//!
//! Grammar, with the usual precedence and right-associative `^`:
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary | unary)*      juxtaposition multiplies
//! unary := ("+" | "-") unary | power
//! power := atom ("^" unary)?                       exponent: constant integer >= 0
//! atom  := number | identifier | "(" expr ")"
//! ```
//!
//! `i` is the imaginary unit. Division is only allowed by nonzero constants.

use thiserror::Error;

use super::{BivariatePoly, Complex, MultivariatePoly, PolyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable '{name}' at position {pos}")]
    UnknownVariable { pos: usize, name: String },
    #[error("polynomial has z-degree 0")]
    ZeroZDegree,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let ch = bytes[k] as char;
        if ch.is_ascii_whitespace() {
            k += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = k;
            while k < bytes.len() && (bytes[k].is_ascii_digit() || bytes[k] == b'.') {
                k += 1;
            }
            // exponent part, only if followed by digits so "2e" stays 2*e
            if k < bytes.len() && (bytes[k] == b'e' || bytes[k] == b'E') {
                let mut j = k + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    k = j;
                }
            }
            let text = &src[start..k];
            let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("malformed number '{text}'"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = k;
            while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                k += 1;
            }
            out.push((start, Tok::Ident(src[start..k].to_string())));
        } else if "+-*/^()".contains(ch) {
            out.push((k, Tok::Op(ch)));
            k += 1;
        } else {
            return Err(ParseError::Syntax {
                pos: k,
                msg: format!("unexpected character '{}'", src[k..].chars().next().unwrap_or(ch)),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<MultivariatePoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultivariatePoly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    match d.as_constant() {
                        Some(c) if c.norm() > 0.0 => acc = acc.scale(c.inv()),
                        Some(_) => {
                            return Err(ParseError::Syntax {
                                pos,
                                msg: "division by zero".into(),
                            })
                        }
                        None => {
                            return Err(ParseError::Syntax {
                                pos,
                                msg: "division by a non-constant".into(),
                            })
                        }
                    }
                }
                Tok::Num(_) | Tok::Ident(_) | Tok::Op('(') => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<MultivariatePoly, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultivariatePoly, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let e = self.unary()?;
        let bad = |msg: &str| ParseError::Syntax {
            pos,
            msg: msg.to_string(),
        };
        let c = e.as_constant().ok_or_else(|| bad("exponent must be a constant"))?;
        if c.im != 0.0 || c.re < 0.0 || c.re.fract() != 0.0 || c.re > u32::MAX as f64 {
            return Err(bad("exponent must be a nonnegative integer"));
        }
        Ok(base.pow(c.re as u32))
    }

    fn atom(&mut self) -> Result<MultivariatePoly, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(MultivariatePoly::constant(self.nvars(), Complex::new(v, 0.0))),
            Tok::Ident(name) => self.identifier(pos, &name),
            Tok::Op('(') => {
                let inner = self.expr()?;
                if self.bump() != Tok::Op(')') {
                    return Err(ParseError::Syntax {
                        pos: self.toks[self.at.saturating_sub(1)].0,
                        msg: "expected ')'".into(),
                    });
                }
                Ok(inner)
            }
            Tok::End => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            Tok::Op(c) => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected '{c}'"),
            }),
        }
    }

    /// A variable, the unit `i`, or a run of single-letter variables such
    /// as `zt`.
    fn identifier(&self, pos: usize, name: &str) -> Result<MultivariatePoly, ParseError> {
        let single = |s: &str| -> Option<MultivariatePoly> {
            if s == "i" {
                return Some(MultivariatePoly::constant(self.nvars(), Complex::new(0.0, 1.0)));
            }
            self.vars
                .iter()
                .position(|v| *v == s)
                .map(|k| MultivariatePoly::variable(self.nvars(), k))
        };
        if let Some(p) = single(name) {
            return Ok(p);
        }
        let mut acc = MultivariatePoly::constant(self.nvars(), Complex::new(1.0, 0.0));
        for (k, ch) in name.char_indices() {
            match single(&name[k..k + ch.len_utf8()]) {
                Some(p) => acc = acc.mul(&p),
                None => {
                    return Err(ParseError::UnknownVariable {
                        pos,
                        name: name.to_string(),
                    })
                }
            }
        }
        Ok(acc)
    }
}

/// Parses an expression in the given variables. The first variable plays
/// the role of `z`.
pub fn parse_multivariate(source: &str, vars: &[&str]) -> Result<MultivariatePoly, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        at: 0,
        vars,
    };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax("unexpected trailing input");
    }
    Ok(out)
}

/// Parses a curve `f(z, t)`.
pub fn parse_poly(source: &str) -> Result<BivariatePoly, ParseError> {
    let m = parse_multivariate(source, &["z", "t"])?;
    if m.degree_in(0) == 0 {
        return Err(ParseError::ZeroZDegree);
    }
    Ok(m.to_bivariate()?)
}
