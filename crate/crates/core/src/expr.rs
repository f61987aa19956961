//! Small expression language for constraint, graph and modulus definitions.
//!
//! Grammar (lowest precedence first):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | name | name '(' expr ')' | '(' expr ')' | '|' expr '|'
//! ```
//!
//! Functions: `abs re im conj exp log sqrt`. Constants: `pi`, `e`, `i`.
//! Variable names are fixed when the expression is compiled.
//! Values are complex; real inputs stay on a real fast path so that, for
//! example, `exp(-1/x^2)` evaluates to 0 at `x = 0`.

use crate::error::{Error, Result};
use crate::point::C64;

/// Arguments of `abs` and `sqrt` at or below this modulus mark the
/// evaluation as non-smooth.
const KINK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Abs,
    Re,
    Im,
    Conj,
    Exp,
    Log,
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Const(C64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
    arity: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("bad number '{text}'"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Name(src[start..i].to_string())));
        } else if "+-*/^()|,".contains(ch) {
            out.push((i, Tok::Sym(ch)));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character '{ch}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, ch: char) -> bool {
        if self.peek() == Some(&Tok::Sym(ch)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        if self.eat(ch) {
            Ok(())
        } else {
            self.err(format!("expected '{ch}'"))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Node::Const(C64::new(v, 0.0)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym('|')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect('|')?;
                Ok(Node::Call(Func::Abs, Box::new(e)))
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let f = match name.as_str() {
                        "abs" => Func::Abs,
                        "re" | "Re" => Func::Re,
                        "im" | "Im" => Func::Im,
                        "conj" => Func::Conj,
                        "exp" => Func::Exp,
                        "log" | "ln" => Func::Log,
                        "sqrt" => Func::Sqrt,
                        other => return self.err(format!("unknown function '{other}'")),
                    };
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(k));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Const(C64::new(std::f64::consts::PI, 0.0))),
                    "e" => Ok(Node::Const(C64::new(std::f64::consts::E, 0.0))),
                    "i" => Ok(Node::Const(C64::new(0.0, 1.0))),
                    other => self.err(format!("unknown name '{other}'")),
                }
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

fn is_real(z: C64) -> bool {
    z.im == 0.0
}

fn eval_node(node: &Node, vals: &[C64], smooth: &mut bool) -> C64 {
    match node {
        Node::Const(v) => *v,
        Node::Var(k) => vals[*k],
        Node::Neg(a) => -eval_node(a, vals, smooth),
        Node::Bin(op, a, b) => {
            let x = eval_node(a, vals, smooth);
            let y = eval_node(b, vals, smooth);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => {
                    if is_real(x) && is_real(y) {
                        C64::new(x.re * y.re, 0.0)
                    } else {
                        x * y
                    }
                }
                BinOp::Div => {
                    if is_real(x) && is_real(y) {
                        C64::new(x.re / y.re, 0.0)
                    } else {
                        x / y
                    }
                }
                BinOp::Pow => pow(x, y),
            }
        }
        Node::Call(f, a) => {
            let x = eval_node(a, vals, smooth);
            match f {
                Func::Abs => {
                    let r = x.norm();
                    if r <= KINK {
                        *smooth = false;
                    }
                    C64::new(r, 0.0)
                }
                Func::Re => C64::new(x.re, 0.0),
                Func::Im => C64::new(x.im, 0.0),
                Func::Conj => x.conj(),
                Func::Exp => {
                    if is_real(x) {
                        C64::new(x.re.exp(), 0.0)
                    } else {
                        x.exp()
                    }
                }
                Func::Log => {
                    if is_real(x) && x.re > 0.0 {
                        C64::new(x.re.ln(), 0.0)
                    } else {
                        x.ln()
                    }
                }
                Func::Sqrt => {
                    if x.norm() <= KINK {
                        *smooth = false;
                    }
                    if is_real(x) && x.re >= 0.0 {
                        C64::new(x.re.sqrt(), 0.0)
                    } else {
                        x.sqrt()
                    }
                }
            }
        }
    }
}

fn pow(x: C64, y: C64) -> C64 {
    if is_real(y) {
        let p = y.re;
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            if is_real(x) {
                return C64::new(x.re.powi(p as i32), 0.0);
            }
            return x.powi(p as i32);
        }
        if is_real(x) && x.re >= 0.0 {
            return C64::new(x.re.powf(p), 0.0);
        }
        return x.powf(p);
    }
    x.powc(y)
}

impl Expr {
    /// Compiles `src` with the given variable names, bound in order.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let toks = lex(src)?;
        let mut p = Parser {
            toks,
            pos: 0,
            vars,
            end: src.len(),
        };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(Expr {
            root,
            source: src.to_string(),
            arity: vars.len(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, vals: &[C64]) -> C64 {
        let mut smooth = true;
        eval_node(&self.root, vals, &mut smooth)
    }

    /// Value plus a flag that is false when a kink of `abs` or `sqrt` was hit.
    pub fn eval_tracked(&self, vals: &[C64]) -> (C64, bool) {
        let mut smooth = true;
        let v = eval_node(&self.root, vals, &mut smooth);
        (v, smooth)
    }

    pub fn eval_real(&self, vals: &[f64]) -> f64 {
        let cv: Vec<C64> = vals.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.eval(&cv).re
    }

    pub fn eval_real_tracked(&self, vals: &[f64]) -> (f64, bool) {
        let cv: Vec<C64> = vals.iter().map(|&x| C64::new(x, 0.0)).collect();
        let (v, s) = self.eval_tracked(&cv);
        (v.re, s)
    }
}

/// Variable names `z1..zn`.
pub fn complex_var_names(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("z{k}")).collect()
}

/// Variable names `x1..xm`.
pub fn real_var_names(m: usize) -> Vec<String> {
    (1..=m).map(|k| format!("x{k}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, vars: &[&str], vals: &[C64]) -> C64 {
        Expr::parse(src, vars).unwrap().eval(vals)
    }

    #[test]
    fn precedence_and_associativity() {
        let v = ev("1 + 2*3^2 - 4/2", &[], &[]);
        assert_eq!(v.re, 1.0 + 18.0 - 2.0);
        let v = ev("2^3^2", &[], &[]);
        assert_eq!(v.re, 512.0);
        let v = ev("-2^2", &[], &[]);
        assert_eq!(v.re, -4.0);
    }

    #[test]
    fn bars_and_functions() {
        let vars = ["z1", "z2"];
        let z = [C64::new(0.6, 0.8), C64::new(0.0, -0.5)];
        let v = ev("|z1|^2 + |z2| - 1", &vars, &z);
        assert!((v.re - 0.5).abs() < 1e-15);
        let v = ev("re(z1) + im(z2) + abs(z2)", &vars, &z);
        assert!((v.re - 0.6).abs() < 1e-15);
        let v = ev("exp(i*pi)", &[], &[]);
        assert!((v.re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_function_is_zero_at_origin() {
        let e = Expr::parse("exp(-1/x1^2)", &["x1"]).unwrap();
        assert_eq!(e.eval_real(&[0.0]), 0.0);
        let x: f64 = 0.5;
        assert!((e.eval_real(&[x]) - (-1.0 / (x * x)).exp()).abs() < 1e-18);
    }

    #[test]
    fn kinks_are_reported() {
        let e = Expr::parse("|z1| + |z2| - 1", &["z1", "z2"]).unwrap();
        let (_, s) = e.eval_tracked(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(!s);
        let (_, s) = e.eval_tracked(&[C64::new(0.5, 0.0), C64::new(0.1, 0.0)]);
        assert!(s);
    }

    #[test]
    fn errors_carry_positions() {
        match Expr::parse("1 + foo(2)", &[]) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 8),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("(1 + 2", &[]).is_err());
        assert!(Expr::parse("1 2", &[]).is_err());
        assert!(Expr::parse("w", &["z1"]).is_err());
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(ev("1e-3*2", &[], &[]).re, 2e-3);
        assert_eq!(ev("2.5E2", &[], &[]).re, 250.0);
    }
}
