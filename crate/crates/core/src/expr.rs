//! A small expression language for coefficient functions, target functions
//! and vector fields in configuration files.
//!
//! Syntax: real literals, variables `t`, `x` (or `x1..xk`), binary `+ - * / ^`,
//! unary `-`, and the functions `sin cos exp log sqrt abs tanh min max pow`.
//! Precedence is `^` above unary minus above `* /` above `+ -`; the binary
//! operators associate left except `^`, which associates right. Whitespace is
//! insignificant.
//!
//! Evaluation follows IEEE arithmetic, except that an operation which would
//! produce NaN from non-NaN inputs (log or sqrt of a negative number, `0/0`,
//! a negative base raised to a fractional power) reports a domain error naming
//! the offending sub-expression instead of propagating NaN.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;

/// Variable slot: `t` or the i-th state component (`x` is component 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
    Min,
    Max,
    Pow,
}

impl Func {
    fn from_name(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            "log" => (Func::Log, 1),
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "tanh" => (Func::Tanh, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
            Func::Min => "min",
            Func::Max => "max",
            Func::Pow => "pow",
        }
    }
}

/// Abstract syntax tree of a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Parse `source` into an expression tree.
    pub fn parse(source: &str) -> Result<Expr> {
        let tokens = tokenize(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.expr()?;
        if parser.pos < parser.tokens.len() {
            let (tok, off) = &parser.tokens[parser.pos];
            return Err(Error::Parse {
                offset: *off,
                msg: format!("unexpected trailing token `{tok}`"),
            });
        }
        Ok(expr)
    }

    /// Evaluate with `t` (optional) and state vector `x` bound.
    pub fn eval(&self, t: Option<f64>, x: &[f64]) -> Result<f64> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(Var::T) => t.ok_or_else(|| Error::input("unbound variable `t`")),
            Expr::Var(Var::X(i)) => x.get(*i).copied().ok_or_else(|| {
                Error::input(format!("unbound variable `{}`", var_name(Var::X(*i))))
            }),
            Expr::Neg(e) => Ok(-e.eval(t, x)?),
            Expr::Bin(op, a, b) => {
                let va = a.eval(t, x)?;
                let vb = b.eval(t, x)?;
                let out = match op {
                    BinOp::Add => va + vb,
                    BinOp::Sub => va - vb,
                    BinOp::Mul => va * vb,
                    BinOp::Div => va / vb,
                    BinOp::Pow => va.powf(vb),
                };
                self.check_domain(out, va.is_nan() || vb.is_nan())
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(t, x)?;
                match f {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Exp => Ok(a.exp()),
                    Func::Tanh => Ok(a.tanh()),
                    Func::Abs => Ok(a.abs()),
                    Func::Log => {
                        if a <= 0.0 {
                            Err(self.domain_error(format!("log of non-positive value {a}")))
                        } else {
                            Ok(a.ln())
                        }
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            Err(self.domain_error(format!("sqrt of negative value {a}")))
                        } else {
                            Ok(a.sqrt())
                        }
                    }
                    Func::Min | Func::Max | Func::Pow => {
                        let b = args[1].eval(t, x)?;
                        let out = match f {
                            Func::Min => a.min(b),
                            Func::Max => a.max(b),
                            Func::Pow => a.powf(b),
                            _ => unreachable!(),
                        };
                        self.check_domain(out, a.is_nan() || b.is_nan())
                    }
                }
            }
        }
    }

    fn check_domain(&self, out: f64, input_was_nan: bool) -> Result<f64> {
        if out.is_nan() && !input_was_nan {
            Err(self.domain_error("result is undefined (NaN)".to_string()))
        } else {
            Ok(out)
        }
    }

    fn domain_error(&self, msg: String) -> Error {
        Error::Domain {
            context: self.print(),
            msg,
        }
    }

    /// Evaluate with a name -> value map. `x` and `x1` both bind component 0.
    pub fn eval_map(&self, bindings: &HashMap<String, f64>) -> Result<f64> {
        let t = bindings.get("t").copied();
        let max_x = self.max_state_index();
        let mut x = Vec::new();
        if let Some(max) = max_x {
            for i in 0..=max {
                let v = bindings
                    .get(&format!("x{}", i + 1))
                    .or_else(|| if i == 0 { bindings.get("x") } else { None })
                    .copied()
                    .ok_or_else(|| {
                        Error::input(format!("unbound variable `{}`", var_name(Var::X(i))))
                    })?;
                x.push(v);
            }
        }
        self.eval(t, &x)
    }

    fn max_state_index(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(Var::T) => None,
            Expr::Var(Var::X(i)) => Some(*i),
            Expr::Neg(e) => e.max_state_index(),
            Expr::Bin(_, a, b) => opt_max(a.max_state_index(), b.max_state_index()),
            Expr::Call(_, args) => args
                .iter()
                .fold(None, |acc, e| opt_max(acc, e.max_state_index())),
        }
    }

    /// True iff the expression mentions `t`.
    pub fn uses_time(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == Var::T,
            Expr::Neg(e) => e.uses_time(),
            Expr::Bin(_, a, b) => a.uses_time() || b.uses_time(),
            Expr::Call(_, args) => args.iter().any(|e| e.uses_time()),
        }
    }

    /// Canonical fully parenthesized form; re-parsing it reproduces the tree.
    pub fn print(&self) -> String {
        let mut s = String::new();
        self.print_into(&mut s);
        s
    }

    fn print_into(&self, s: &mut String) {
        use std::fmt::Write;
        match self {
            Expr::Num(v) => {
                let _ = write!(s, "{v:?}");
            }
            Expr::Var(v) => s.push_str(&var_name(*v)),
            Expr::Neg(e) => {
                s.push_str("(-");
                e.print_into(s);
                s.push(')');
            }
            Expr::Bin(op, a, b) => {
                s.push('(');
                a.print_into(s);
                s.push_str(match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => " * ",
                    BinOp::Div => " / ",
                    BinOp::Pow => " ^ ",
                });
                b.print_into(s);
                s.push(')');
            }
            Expr::Call(f, args) => {
                s.push_str(f.name());
                s.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    a.print_into(s);
                }
                s.push(')');
            }
        }
    }
}

fn var_name(v: Var) -> String {
    match v {
        Var::T => "t".to_string(),
        Var::X(0) => "x".to_string(),
        Var::X(i) => format!("x{}", i + 1),
    }
}

fn opt_max(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::Caret => write!(f, "^"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::Comma => write!(f, ","),
        }
    }
}

fn tokenize(source: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push((Token::Plus, i));
                i += 1;
            }
            '-' => {
                tokens.push((Token::Minus, i));
                i += 1;
            }
            '*' => {
                tokens.push((Token::Star, i));
                i += 1;
            }
            '/' => {
                tokens.push((Token::Slash, i));
                i += 1;
            }
            '^' => {
                tokens.push((Token::Caret, i));
                i += 1;
            }
            '(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            ',' => {
                tokens.push((Token::Comma, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    msg: format!("invalid number literal `{text}`"),
                })?;
                tokens.push((Token::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(source[start..i].to_string()), start));
            }
            other => {
                return Err(Error::Parse {
                    offset: i,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or_else(|| self.tokens.last().map(|(_, o)| o + 1).unwrap_or(0))
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        let off = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(Error::Parse {
                offset: off,
                msg: format!("expected {what}, found `{t}`"),
            }),
            None => Err(Error::Parse {
                offset: off,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            // Right associativity; the exponent may start with unary minus.
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                if matches!(self.peek(), Some(Token::LParen)) {
                    let (func, arity) = Func::from_name(&name).ok_or_else(|| Error::Parse {
                        offset: off,
                        msg: format!("unknown function `{name}`"),
                    })?;
                    self.bump(); // consume '('
                    let mut args = vec![self.expr()?];
                    while matches!(self.peek(), Some(Token::Comma)) {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Token::RParen, "`)`")?;
                    if args.len() != arity {
                        return Err(Error::Parse {
                            offset: off,
                            msg: format!(
                                "`{name}` takes {arity} argument(s), found {}",
                                args.len()
                            ),
                        });
                    }
                    Ok(Expr::Call(func, args))
                } else {
                    parse_var(&name).map(Expr::Var).ok_or_else(|| Error::Parse {
                        offset: off,
                        msg: format!("unknown identifier `{name}`"),
                    })
                }
            }
            Some(t) => Err(Error::Parse {
                offset: off,
                msg: format!("expected expression, found `{t}`"),
            }),
            None => Err(Error::Parse {
                offset: off,
                msg: "expected expression, found end of input".to_string(),
            }),
        }
    }
}

fn parse_var(name: &str) -> Option<Var> {
    match name {
        "t" => Some(Var::T),
        "x" => Some(Var::X(0)),
        _ => {
            let rest = name.strip_prefix('x')?;
            let idx: usize = rest.parse().ok()?;
            if idx >= 1 {
                Some(Var::X(idx - 1))
            } else {
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(src: &str, x: f64) -> f64 {
        Expr::parse(src).unwrap().eval(None, &[x]).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(eval1("2+3*4", 0.0), 14.0);
        assert_eq!(eval1("2*3^2", 0.0), 18.0);
        assert_eq!(eval1("-2^2", 0.0), -4.0); // ^ binds tighter than unary -
        assert_eq!(eval1("2^-1", 0.0), 0.5);
        assert_eq!(eval1("2^3^2", 0.0), 512.0); // right associative
        assert_eq!(eval1("8-4-2", 0.0), 2.0); // left associative
        assert_eq!(eval1("8/4/2", 0.0), 1.0);
    }

    #[test]
    fn basic_examples() {
        assert_eq!(eval1("sin(x)+0.5*x", 0.0), 0.0);
        assert_eq!(eval1("min(1, max(x, -1))", 5.0), 1.0);
        assert_eq!(eval1("exp(-x)", 0.0), 1.0);
        assert_eq!(eval1("abs(x)^0.5", -4.0), 2.0);
    }

    #[test]
    fn sqrt_negative_is_domain_error() {
        let e = Expr::parse("sqrt(x)").unwrap();
        match e.eval(None, &[-1.0]) {
            Err(Error::Domain { context, .. }) => assert!(context.contains("sqrt")),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn log_non_positive_is_domain_error() {
        let e = Expr::parse("log(x)").unwrap();
        assert!(e.eval(None, &[-2.0]).is_err());
        assert!(e.eval(None, &[0.0]).is_err());
        assert!((e.eval(None, &[1.0]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn fractional_power_of_negative_is_domain_error() {
        let e = Expr::parse("x^0.5").unwrap();
        match e.eval(None, &[-4.0]) {
            Err(Error::Domain { .. }) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn ieee_division() {
        // Division by zero keeps IEEE semantics (infinity, not an error).
        assert!(eval1("1/x", 0.0).is_infinite());
        // 0/0 is NaN and therefore a domain error.
        assert!(Expr::parse("x/x").unwrap().eval(None, &[0.0]).is_err());
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match Expr::parse("2 + (3 * 4") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("expected parse error, got {other:?}"),
        }
        match Expr::parse("2 + foo") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        match Expr::parse("min(1)") {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("2 argument")),
            other => panic!("expected arity error, got {other:?}"),
        }
        match Expr::parse("sin(x) @") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("expected tokenizer error, got {other:?}"),
        }
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let e = Expr::parse("t + x2").unwrap();
        assert!(e.eval(None, &[1.0, 2.0]).is_err()); // t unbound
        assert!(e.eval(Some(0.0), &[1.0]).is_err()); // x2 unbound
        assert_eq!(e.eval(Some(1.0), &[0.0, 2.0]).unwrap(), 3.0);
    }

    #[test]
    fn eval_map_binds_by_name() {
        let e = Expr::parse("t * x").unwrap();
        let mut m = HashMap::new();
        m.insert("t".to_string(), 2.0);
        m.insert("x".to_string(), 3.0);
        assert_eq!(e.eval_map(&m).unwrap(), 6.0);
        // x1 is an alias for x.
        let e = Expr::parse("x1 + 1").unwrap();
        assert_eq!(e.eval_map(&m).unwrap(), 4.0);
    }

    #[test]
    fn print_parse_fixpoint() {
        for src in [
            "2+3*4",
            "sin(5*x)",
            "min(1, max(x, -1))",
            "-x^2 + t/3",
            "abs(x)^0.5",
            "pow(x, 2) - sqrt(abs(t))",
        ] {
            let tree = Expr::parse(src).unwrap();
            let printed = tree.print();
            let reparsed = Expr::parse(&printed).unwrap();
            assert_eq!(tree, reparsed, "fixpoint failed for `{src}` -> `{printed}`");
        }
    }
}
