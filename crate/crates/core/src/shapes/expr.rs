//! Arithmetic expressions in `x`, `y`, `z` with exact gradients by forward
//! mode automatic differentiation.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::boundary::Vec3;
use crate::error::{RegulusError, Result};
use crate::normal_field::ImplicitField;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    v: f64,
    g: Vec3,
}

impl Dual {
    fn c(v: f64) -> Self {
        Self { v, g: Vec3::zeros() }
    }

    /// Applies `f` with derivative `df` at the value.
    fn chain(self, v: f64, df: f64) -> Self {
        Self { v, g: self.g * df }
    }

    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }

    fn powf(self, e: Dual) -> Self {
        if e.g == Vec3::zeros() {
            let p = e.v;
            return self.chain(self.v.powf(p), p * self.v.powf(p - 1.0));
        }
        let v = self.v.powf(e.v);
        Self {
            v,
            g: (e.g * self.v.ln() + self.g * (e.v / self.v)) * v,
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            g: self.g + o.g,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            g: self.g - o.g,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            g: self.g * o.v + o.g * self.v,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual {
            v: self.v / o.v,
            g: (self.g * o.v - o.g * self.v) / (o.v * o.v),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, g: -self.g }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sqrt,
    Abs,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Atan,
    Min,
    Max,
    Atan2,
    Pow,
    Hypot,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "exp" => (Func::Exp, 1),
            "ln" | "log" => (Func::Ln, 1),
            "atan" => (Func::Atan, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "atan2" => (Func::Atan2, 2),
            "pow" => (Func::Pow, 2),
            "hypot" => (Func::Hypot, 2),
            _ => return None,
        })
    }

    fn apply(self, a: &[Dual]) -> Dual {
        let x = a[0];
        match self {
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.chain(x.v.abs(), if x.v < 0.0 { -1.0 } else { 1.0 }),
            Func::Sin => x.chain(x.v.sin(), x.v.cos()),
            Func::Cos => x.chain(x.v.cos(), -x.v.sin()),
            Func::Tan => {
                let t = x.v.tan();
                x.chain(t, 1.0 + t * t)
            }
            Func::Exp => {
                let e = x.v.exp();
                x.chain(e, e)
            }
            Func::Ln => x.chain(x.v.ln(), 1.0 / x.v),
            Func::Atan => x.chain(x.v.atan(), 1.0 / (1.0 + x.v * x.v)),
            Func::Min => {
                if a[1].v < x.v {
                    a[1]
                } else {
                    x
                }
            }
            Func::Max => {
                if a[1].v > x.v {
                    a[1]
                } else {
                    x
                }
            }
            Func::Atan2 => {
                let (y, x) = (a[0], a[1]);
                let d = x.v * x.v + y.v * y.v;
                Dual {
                    v: y.v.atan2(x.v),
                    g: (y.g * x.v - x.g * y.v) / d,
                }
            }
            Func::Pow => x.powf(a[1]),
            Func::Hypot => (x * x + a[1] * a[1]).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, p: &Vec3) -> Dual {
        match self {
            Node::Num(v) => Dual::c(*v),
            Node::Var(k) => {
                let mut g = Vec3::zeros();
                g[*k] = 1.0;
                Dual { v: p[*k], g }
            }
            Node::Neg(a) => -a.eval(p),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(p), b.eval(p));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    _ => a.powf(b),
                }
            }
            Node::Call(f, args) => {
                let vals: Vec<Dual> = args.iter().map(|a| a.eval(p)).collect();
                f.apply(&vals)
            }
        }
    }
}

/// Parsed expression; usable directly as an implicit field.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    /// Parses `+ - * / ^`, parentheses, the variables `x y z`, the constants
    /// `pi` and `e`, and the functions `sqrt abs sin cos tan exp ln atan`
    /// (one argument) and `min max atan2 pow hypot` (two).
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(RegulusError::InvalidInput(format!(
                "unexpected {:?} in expression {src:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(Self {
            source: src.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, p: &Vec3) -> f64 {
        self.root.eval(p).v
    }

    pub fn eval_grad(&self, p: &Vec3) -> (f64, Vec3) {
        let d = self.root.eval(p);
        (d.v, d.g)
    }
}

impl ImplicitField for Expr {
    fn value(&self, p: &Vec3) -> f64 {
        self.eval(p)
    }

    fn gradient(&self, p: &Vec3) -> Vec3 {
        self.eval_grad(p).1
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse()
                .map_err(|_| RegulusError::InvalidInput(format!("bad number {text:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(RegulusError::InvalidInput(format!(
                "unexpected character {c:?} in expression"
            )));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(RegulusError::InvalidInput(format!(
                "expected '{c}' at token {}",
                self.pos
            )))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| RegulusError::InvalidInput("expression ends early".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op(c) => Err(RegulusError::InvalidInput(format!("unexpected '{c}'"))),
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Node::Var(0)),
                "y" => Ok(Node::Var(1)),
                "z" => Ok(Node::Var(2)),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                _ => {
                    let (f, arity) = Func::lookup(&name)
                        .ok_or_else(|| RegulusError::InvalidInput(format!("unknown name {name:?}")))?;
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.peek_op() == Some(',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(RegulusError::InvalidInput(format!(
                            "{name} takes {arity} argument(s), got {}",
                            args.len()
                        )));
                    }
                    Ok(Node::Call(f, args))
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec3 {
        Vec3::new(x, y, 0.0)
    }

    #[test]
    fn precedence_and_values() {
        let e = Expr::parse("1 + 2 * 3 ^ 2 - -4 / 2").unwrap();
        assert_eq!(e.eval(&Vec3::zeros()), 1.0 + 18.0 + 2.0);
        assert_eq!(Expr::parse("-2^2").unwrap().eval(&Vec3::zeros()), -4.0);
        assert_eq!(Expr::parse("2^3^2").unwrap().eval(&Vec3::zeros()), 512.0);
        assert_eq!(Expr::parse("1.5e1").unwrap().eval(&Vec3::zeros()), 15.0);
        assert!((Expr::parse("pi").unwrap().eval(&Vec3::zeros()) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn gradients() {
        let e = Expr::parse("sqrt(x^2 + y^2) - 1").unwrap();
        let (f, g) = e.eval_grad(&v(3.0, 4.0));
        assert_eq!(f, 4.0);
        assert!((g - v(0.6, 0.8)).norm() < 1e-15);
        let e = Expr::parse("x^2/4 + y^2 - 1").unwrap();
        let (_, g) = e.eval_grad(&v(2.0, 0.0));
        assert!((g - v(1.0, 0.0)).norm() < 1e-15);
        let e = Expr::parse("max(abs(x), hypot(y, 1)) * sin(x) + atan2(y, x) + pow(x, y)").unwrap();
        let p = v(0.7, 0.3);
        let (_, g) = e.eval_grad(&p);
        let h = 1e-6;
        for k in 0..2 {
            let mut d = Vec3::zeros();
            d[k] = h;
            let fd = (e.eval(&(p + d)) - e.eval(&(p - d))) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("min(x)").is_err());
        assert!(Expr::parse("(x").is_err());
        assert!(Expr::parse("x $ y").is_err());
        assert!(Expr::parse("x y").is_err());
    }
}
