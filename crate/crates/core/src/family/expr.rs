//! Entry expressions: a small complex-arithmetic language over named real
//! parameters.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-a^2` is
//! `-(a^2)` and `2^3^2` is `2^9`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Sqrt,
    Abs,
    Conj,
    Re,
    Im,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "conj" => Func::Conj,
            "re" => Func::Re,
            "im" => Func::Im,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Conj => "conj",
            Func::Re => "re",
            Func::Im => "im",
        }
    }

    fn apply(self, z: C64) -> C64 {
        match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Exp => z.exp(),
            Func::Sqrt => principal(z).sqrt(),
            Func::Abs => C64::new(z.norm(), 0.0),
            Func::Conj => z.conj(),
            Func::Re => C64::new(z.re, 0.0),
            Func::Im => C64::new(z.im, 0.0),
        }
    }
}

/// Names that are always bound.
pub const BUILTIN_CONSTANTS: [&str; 2] = ["i", "pi"];

pub fn is_reserved(name: &str) -> bool {
    BUILTIN_CONSTANTS.contains(&name) || Func::from_name(name).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Ident(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Signed zeros in the imaginary part would select the wrong side of the
// branch cut.
fn principal(z: C64) -> C64 {
    C64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im })
}

fn pow(base: C64, exp: C64) -> C64 {
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= 64.0 {
        return base.powi(exp.re as i32);
    }
    if base == C64::new(0.0, 0.0) {
        return if exp.re > 0.0 {
            base
        } else {
            C64::new(f64::NAN, f64::NAN)
        };
    }
    (exp * principal(base).ln()).exp()
}

impl Expr {
    pub fn eval(&self, env: &BTreeMap<String, f64>) -> Result<C64> {
        Ok(match self {
            Expr::Num(x) => C64::new(*x, 0.0),
            Expr::Ident(name) => match name.as_str() {
                "i" => C64::new(0.0, 1.0),
                "pi" => C64::new(std::f64::consts::PI, 0.0),
                _ => env
                    .get(name)
                    .map(|&x| C64::new(x, 0.0))
                    .ok_or_else(|| Error::UnknownIdentifier(name.clone()))?,
            },
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(env)?, r.eval(env)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => pow(l, r),
                }
            }
            Expr::Call(f, arg) => f.apply(arg.eval(env)?),
        })
    }

    /// Free identifiers other than the built-in constants, sorted.
    pub fn identifiers(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Num(_) => {}
                Expr::Ident(n) => {
                    if !BUILTIN_CONSTANTS.contains(&n.as_str()) && !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                Expr::Neg(e) | Expr::Call(_, e) => walk(e, out),
                Expr::Bin(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized, so the output reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Ident(n) => write!(f, "{n}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l}{sym}{r})")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start).map(|x| (Tok::Num(x), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .src
                .get(self.pos)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
            {
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            return Ok((Tok::Ident(s.to_string()), start));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c as char), start));
        }
        Err(Error::Syntax {
            offset: start,
            expected: expected(&["number", "identifier", "(", "-"]),
        })
    }

    fn number(&mut self, start: usize) -> Result<f64> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(Error::Syntax {
                offset: start,
                expected: expected(&["digit"]),
            });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2e` followed by something else: not an exponent
                self.pos = save;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        s.parse::<f64>().map_err(|_| Error::Syntax {
            offset: start,
            expected: expected(&["number"]),
        })
    }
}

fn expected(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<()> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn fail<T>(&self, exp: &[&str]) -> Result<T> {
        Err(Error::Syntax {
            offset: self.at,
            expected: expected(exp),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.tok == Tok::Sym('^') {
            self.bump()?;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(x) => {
                self.bump()?;
                Ok(Expr::Num(x))
            }
            Tok::Ident(name) => {
                self.bump()?;
                if self.tok == Tok::Sym('(') {
                    let Some(func) = Func::from_name(&name) else {
                        return self.fail(&["operator", ")", "end of input"]);
                    };
                    self.bump()?;
                    let arg = self.expr()?;
                    self.expect_close()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                Ok(Expr::Ident(name))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect_close()?;
                Ok(e)
            }
            _ => self.fail(&["number", "identifier", "(", "-"]),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        if self.tok != Tok::Sym(')') {
            return self.fail(&[")", "operator"]);
        }
        self.bump()
    }
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            expected: expected(&["expression"]),
        });
    }
    let mut p = Parser {
        lexer: Lexer {
            src: src.as_bytes(),
            pos: 0,
        },
        tok: Tok::End,
        at: 0,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

pub fn eval_expr(e: &Expr, env: &BTreeMap<String, f64>) -> Result<C64> {
    e.eval(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn env(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn ev(src: &str, pairs: &[(&str, f64)]) -> C64 {
        parse_expr(src).unwrap().eval(&env(pairs)).unwrap()
    }

    #[test]
    fn path_two_parametrization() {
        let z = ev("1+sqrt(2)*cos(t)", &[("t", PI)]);
        assert!((z - C64::new(1.0 - SQRT_2, 0.0)).norm() < 1e-15);
        assert!((z.re + 0.41421).abs() < 1e-5);
    }

    #[test]
    fn example1_entry() {
        assert_eq!(ev("-7*i + a", &[("a", 1.0)]), C64::new(1.0, -7.0));
        let z = ev("4 - i*(1+sqrt(2)*cos(t))", &[("t", PI)]);
        assert!((z - C64::new(4.0, -(1.0 - SQRT_2))).norm() < 1e-15);
    }

    #[test]
    fn simple_evaluations() {
        assert_eq!(ev("i*b", &[("b", 2.0)]), C64::new(0.0, 2.0));
        assert_eq!(ev("conj(1+2*i)", &[]), C64::new(1.0, -2.0));
        assert_eq!(ev("re(3-4*i) + im(3-4*i)", &[]), C64::new(-1.0, 0.0));
        assert_eq!(ev("abs(3-4*i)", &[]), C64::new(5.0, 0.0));
        assert_eq!(ev("1.5e1 - 2E-1", &[]), C64::new(14.8, 0.0));
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("2^3^2", &[]), C64::new(512.0, 0.0));
        assert_eq!(ev("-a^2", &[("a", 3.0)]), C64::new(-9.0, 0.0));
        assert_eq!(ev("2^-1", &[]), C64::new(0.5, 0.0));
        assert_eq!(ev("1-2-3", &[]), C64::new(-4.0, 0.0));
        assert_eq!(ev("8/4/2", &[]), C64::new(1.0, 0.0));
        assert_eq!(ev("1+2*3", &[]), C64::new(7.0, 0.0));
        assert_eq!(ev("--2", &[]), C64::new(2.0, 0.0));
    }

    #[test]
    fn principal_branches() {
        let z = ev("sqrt(-4)", &[]);
        assert!((z - C64::new(0.0, 2.0)).norm() < 1e-15);
        let z = ev("(-1)^0.5", &[]);
        assert!((z - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(ev("(-2)^2", &[]), C64::new(4.0, 0.0));
    }

    #[test]
    fn syntax_errors_report_offsets() {
        match parse_expr("((") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        match parse_expr("1 + * 2") {
            Err(Error::Syntax { offset, expected }) => {
                assert_eq!(offset, 4);
                assert!(expected.iter().any(|e| e == "number"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_expr("1 $ 2"),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            parse_expr("foo(1)"),
            Err(Error::Syntax { offset: 3, .. })
        ));
        assert!(matches!(
            parse_expr("(1"),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            parse_expr("1 2"),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(parse_expr("").is_err());
    }

    #[test]
    fn unknown_identifier_is_deferred_to_eval() {
        let e = parse_expr("x + 1").unwrap();
        assert_eq!(
            e.eval(&BTreeMap::new()),
            Err(Error::UnknownIdentifier("x".into()))
        );
        assert_eq!(e.identifiers(), vec!["x".to_string()]);
    }

    #[test]
    fn identifiers_skip_constants() {
        let e = parse_expr("b - c*i + pi*a + sin(a)").unwrap();
        assert_eq!(e.identifiers(), vec!["a", "b", "c"]);
    }

    #[test]
    fn display_reparses() {
        let e = parse_expr("-a^2 + 3*sin(t)/(1-i) ^ 2").unwrap();
        let again = parse_expr(&e.to_string()).unwrap();
        assert_eq!(e, again);
    }
}
