//! Abstract syntax of the kernel language, de Bruijn style, plus the
//! s-expression reader and printer.

use std::fmt;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::nat::Nat;

/// A term of the kernel language. Variables are de Bruijn indices; numerals
/// are canonically `Succ^n(Zero)` and are stored collapsed as `Num(n)` so
/// that large numerals cost O(log n) memory instead of n nodes.
///
/// `Num(0)` is the canonical `Zero`; `succ` on a numeral folds into `Num`.
/// A `Succ` node therefore only ever carries a non-numeral child in
/// canonical terms, though decode may produce any shape the code dictates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Var(Nat),
    Lam(Arc<Expr>),
    App(Arc<Expr>, Arc<Expr>),
    /// Canonical numeral `Succ^n(Zero)`.
    Num(Nat),
    Succ(Arc<Expr>),
    Case(Arc<Expr>, Arc<Expr>, Arc<Expr>),
    Fix(Arc<Expr>),
    Query(Arc<Expr>),
    Run(Arc<Expr>, Arc<Expr>),
}

pub fn var(i: u64) -> Expr {
    Expr::Var(Nat::from(i))
}

pub fn lam(body: Expr) -> Expr {
    Expr::Lam(Arc::new(body))
}

pub fn app(f: Expr, a: Expr) -> Expr {
    Expr::App(Arc::new(f), Arc::new(a))
}

pub fn zero() -> Expr {
    Expr::Num(Nat::zero())
}

pub fn num(n: impl Into<Nat>) -> Expr {
    Expr::Num(n.into())
}

/// Successor; collapses onto numerals so canonical terms stay small.
pub fn succ(e: Expr) -> Expr {
    match e {
        Expr::Num(k) => Expr::Num(k + 1u32),
        other => Expr::Succ(Arc::new(other)),
    }
}

pub fn case(scrut: Expr, zero_branch: Expr, succ_branch: Expr) -> Expr {
    Expr::Case(Arc::new(scrut), Arc::new(zero_branch), Arc::new(succ_branch))
}

pub fn fix(body: Expr) -> Expr {
    Expr::Fix(Arc::new(body))
}

pub fn query(e: Expr) -> Expr {
    Expr::Query(Arc::new(e))
}

pub fn run(code: Expr, arg: Expr) -> Expr {
    Expr::Run(Arc::new(code), Arc::new(arg))
}

/// Apply a curried function to several arguments.
pub fn apps(f: Expr, args: &[Expr]) -> Expr {
    let mut acc = f;
    for a in args {
        acc = app(acc, a.clone());
    }
    acc
}

impl Expr {
    /// Size in nodes, counting a collapsed numeral as one node.
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Num(_) => 1,
            Expr::Lam(b) | Expr::Fix(b) | Expr::Query(b) | Expr::Succ(b) => 1 + b.node_count(),
            Expr::App(f, a) | Expr::Run(f, a) => 1 + f.node_count() + a.node_count(),
            Expr::Case(s, z, b) => 1 + s.node_count() + z.node_count() + b.node_count(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen(usize),
    RParen(usize),
    Atom(usize, String),
    Number(usize, Nat),
}

impl Token {
    fn pos(&self) -> usize {
        match self {
            Token::LParen(p) | Token::RParen(p) | Token::Atom(p, _) | Token::Number(p, _) => *p,
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            tokens.push(Token::LParen(i));
            i += 1;
        } else if c == ')' {
            tokens.push(Token::RParen(i));
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let digits = &text[start..i];
            let n = digits.parse::<Nat>().map_err(|_| ParseError {
                pos: start,
                msg: format!("bad number `{digits}`"),
            })?;
            tokens.push(Token::Number(start, n));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_alphabetic() {
                i += 1;
            }
            tokens.push(Token::Atom(start, text[start..i].to_string()));
        } else {
            return Err(ParseError {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let t = self.tokens.get(self.at).cloned().ok_or(ParseError {
            pos: self.end,
            msg: "unexpected end of input".into(),
        })?;
        self.at += 1;
        Ok(t)
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.next()? {
            Token::RParen(_) => Ok(()),
            t => Err(ParseError {
                pos: t.pos(),
                msg: "expected `)`".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<Nat, ParseError> {
        match self.next()? {
            Token::Number(_, n) => Ok(n),
            t => Err(ParseError {
                pos: t.pos(),
                msg: "expected a number".into(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.next()? {
            Token::Atom(pos, a) => match a.as_str() {
                "zero" => Ok(zero()),
                other => Err(ParseError {
                    pos,
                    msg: format!("unknown atom `{other}`"),
                }),
            },
            Token::LParen(_) => {
                let head = self.next()?;
                let (pos, name) = match head {
                    Token::Atom(p, a) => (p, a),
                    t => {
                        return Err(ParseError {
                            pos: t.pos(),
                            msg: "expected a form name".into(),
                        })
                    }
                };
                let e = match name.as_str() {
                    "var" => Expr::Var(self.number()?),
                    "lam" => lam(self.expr()?),
                    "app" => {
                        let f = self.expr()?;
                        let a = self.expr()?;
                        app(f, a)
                    }
                    "succ" => succ(self.expr()?),
                    "case" => {
                        let s = self.expr()?;
                        let z = self.expr()?;
                        let b = self.expr()?;
                        case(s, z, b)
                    }
                    "fix" => fix(self.expr()?),
                    "query" => query(self.expr()?),
                    "run" => {
                        let c = self.expr()?;
                        let a = self.expr()?;
                        run(c, a)
                    }
                    // Compact numeral form, accepted on input so large canonical
                    // numerals survive a print/parse round trip.
                    "nat" => Expr::Num(self.number()?),
                    other => {
                        return Err(ParseError {
                            pos,
                            msg: format!("unknown form `{other}`"),
                        })
                    }
                };
                self.expect_rparen()?;
                Ok(e)
            }
            t => Err(ParseError {
                pos: t.pos(),
                msg: "expected an expression".into(),
            }),
        }
    }
}

/// Parse a term from its s-expression text.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        at: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ParseError {
            pos: t.pos(),
            msg: "trailing input after expression".into(),
        });
    }
    Ok(e)
}

/// Numerals up to this bound print as nested `succ`; larger ones use `(nat N)`.
const PRINT_SUCC_LIMIT: u64 = 16;

/// Render a term back to s-expression text; `parse(print(e)) == e`.
pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    print_into(e, &mut out);
    out
}

fn print_into(e: &Expr, out: &mut String) {
    match e {
        Expr::Var(i) => {
            out.push_str("(var ");
            out.push_str(&i.to_string());
            out.push(')');
        }
        Expr::Lam(b) => {
            out.push_str("(lam ");
            print_into(b, out);
            out.push(')');
        }
        Expr::App(f, a) => {
            out.push_str("(app ");
            print_into(f, out);
            out.push(' ');
            print_into(a, out);
            out.push(')');
        }
        Expr::Num(n) => {
            if n.is_zero() {
                out.push_str("zero");
            } else if n.to_u64().is_some_and(|v| v <= PRINT_SUCC_LIMIT) {
                let v = n.to_u64().unwrap();
                for _ in 0..v {
                    out.push_str("(succ ");
                }
                out.push_str("zero");
                for _ in 0..v {
                    out.push(')');
                }
            } else {
                out.push_str("(nat ");
                out.push_str(&n.to_string());
                out.push(')');
            }
        }
        Expr::Succ(b) => {
            out.push_str("(succ ");
            print_into(b, out);
            out.push(')');
        }
        Expr::Case(s, z, b) => {
            out.push_str("(case ");
            print_into(s, out);
            out.push(' ');
            print_into(z, out);
            out.push(' ');
            print_into(b, out);
            out.push(')');
        }
        Expr::Fix(b) => {
            out.push_str("(fix ");
            print_into(b, out);
            out.push(')');
        }
        Expr::Query(b) => {
            out.push_str("(query ");
            print_into(b, out);
            out.push(')');
        }
        Expr::Run(c, a) => {
            out.push_str("(run ");
            print_into(c, out);
            out.push(' ');
            print_into(a, out);
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}
