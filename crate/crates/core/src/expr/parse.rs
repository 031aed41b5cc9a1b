//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | func '(' expr ')' | '(' expr ')'
//! ```

use std::sync::Arc;

use thiserror::Error;

use super::{diff, Expr, Func, Node};

/// Parse failure. `pos` is a byte offset into the input.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable `{name}` at {pos} is not allowed here (allowed: {allowed})")]
    DisallowedVariable {
        name: String,
        pos: usize,
        allowed: String,
    },
}

impl ParseError {
    pub fn pos(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::DisallowedVariable { pos, .. } => *pos,
        }
    }
}

/// Names that are recognised as variables even when a slot does not allow
/// them, so the error can say "wrong slot" rather than "unknown".
const KNOWN_VARIABLES: &[&str] = &["t", "x"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let start = self.pos;
            let Some(&c) = self.bytes.get(self.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            if c.is_ascii_digit() || c == b'.' {
                out.push((Tok::Num(self.number()?), start));
            } else if c.is_ascii_alphabetic() || c == b'_' {
                while self
                    .bytes
                    .get(self.pos)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    self.pos += 1;
                }
                out.push((Tok::Ident(self.src[start..self.pos].to_string()), start));
            } else if b"+-*/^()".contains(&c) {
                self.pos += 1;
                out.push((Tok::Op(c as char), start));
            } else {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.bytes.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError::Syntax {
                pos: start,
                msg: "malformed number".into(),
            });
        }
        // exponent only when followed by digits, so `2*e` style input still lexes
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })?;
        if !v.is_finite() {
            return Err(ParseError::Syntax {
                pos: start,
                msg: format!("number `{text}` is not finite"),
            });
        }
        Ok(v)
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Op(o) if *o == c => {
                self.bump();
                Ok(())
            }
            other => Err(ParseError::Syntax {
                pos: self.pos(),
                msg: format!("expected `{c}`, found {}", describe(other)),
            }),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = diff::fold_binary(super::BinOp::Add, lhs, self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = diff::fold_binary(super::BinOp::Sub, lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = diff::fold_binary(super::BinOp::Mul, lhs, self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = diff::fold_binary(super::BinOp::Div, lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(diff::fold_unary(Func::Neg, self.unary()?))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let pos = self.pos();
            let exp = self.unary()?;
            let Node::Const(p) = exp else {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "exponent must be a constant".into(),
                });
            };
            return Ok(diff::fold_pow(base, p));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(diff::fold_unary(func, arg));
                }
                match name.as_str() {
                    "pi" => return Ok(Node::Const(std::f64::consts::PI)),
                    "e" => return Ok(Node::Const(std::f64::consts::E)),
                    _ => {}
                }
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(k));
                }
                if KNOWN_VARIABLES.contains(&name.as_str()) {
                    Err(ParseError::DisallowedVariable {
                        name,
                        pos,
                        allowed: self.vars.join(", "),
                    })
                } else {
                    Err(ParseError::UnknownIdentifier { name, pos })
                }
            }
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected {}", describe(&other)),
            }),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parses `text` as an expression over the variables `allowed_vars`.
pub fn parse_expression(text: &str, allowed_vars: &[&str]) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser {
        toks,
        at: 0,
        vars: allowed_vars,
    };
    let node = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            msg: format!("unexpected {}", describe(p.peek())),
        });
    }
    let vars: Arc<[String]> = allowed_vars.iter().map(|s| s.to_string()).collect();
    Ok(Expr::from_node(node, vars))
}
