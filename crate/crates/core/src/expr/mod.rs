//! Scalar expression language used to declare model data.
//!
//! Every coordinate function of a model (metric entries, potential, forces,
//! constraint forms) is an [`Expr`]. Expressions can be parsed from text,
//! printed back, differentiated exactly and evaluated either against an
//! [`Env`] or, after [`Expr::compile`], against a flat slot vector.

mod diff;
mod parse;
mod print;
mod program;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use parse::parse;
pub use program::Program;

/// One-argument operators. `Neg` is prefix minus, the rest are functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    /// Looks up a function by its DSL name.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "exp" => Self::Exp,
            "log" => Self::Log,
            "sqrt" => Self::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Neg => "-",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }
}

/// Expression tree over named real symbols.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Symbol(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Symbol bindings for [`Expr::eval`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env {
    values: HashMap<String, f64>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Env {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Self {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            Self::Syntax { offset, .. } | Self::UnknownFunction { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: &'static str },
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Self::Constant(value)
    }

    pub fn symbol(name: impl Into<String>) -> Self {
        Self::Symbol(name.into())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Constant(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Self::Constant(c) if *c == 1.0)
    }

    /// Free symbols, sorted.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Self::Constant(_) => {}
            Self::Symbol(s) => {
                out.insert(s.clone());
            }
            Self::Unary(_, a) => a.collect_symbols(out),
            Self::Binary(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Self::Constant(_) => false,
            Self::Symbol(s) => s == name,
            Self::Unary(_, a) => a.depends_on(name),
            Self::Binary(_, a, b) => a.depends_on(name) || b.depends_on(name),
        }
    }

    /// Replaces every occurrence of symbol `name` by `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Self::Symbol(s) if s == name => with.clone(),
            Self::Constant(_) | Self::Symbol(_) => self.clone(),
            Self::Unary(op, a) => unary(*op, a.substitute(name, with)),
            Self::Binary(op, a, b) => binary(*op, a.substitute(name, with), b.substitute(name, with)),
        }
    }

    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        match self {
            Self::Constant(c) => Ok(*c),
            Self::Symbol(s) => env.get(s).ok_or_else(|| EvalError::Unbound(s.clone())),
            Self::Unary(op, a) => {
                let x = a.eval(env)?;
                apply_unary(*op, x).map_err(|reason| EvalError::Domain {
                    expr: self.to_string(),
                    reason,
                })
            }
            Self::Binary(op, a, b) => {
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                apply_binary(*op, x, y).map_err(|reason| EvalError::Domain {
                    expr: self.to_string(),
                    reason,
                })
            }
        }
    }

    /// Exact partial derivative with respect to `name`, constant folded.
    pub fn diff(&self, name: &str) -> Expr {
        diff::diff(self, name)
    }

    /// Constant folding plus 0/1 identity elimination.
    pub fn fold(&self) -> Expr {
        match self {
            Self::Constant(_) | Self::Symbol(_) => self.clone(),
            Self::Unary(op, a) => unary(*op, a.fold()),
            Self::Binary(op, a, b) => binary(*op, a.fold(), b.fold()),
        }
    }

    /// Resolves symbols against `slots` and flattens the tree for fast
    /// repeated evaluation.
    pub fn compile(&self, slots: &[String]) -> Result<Program, EvalError> {
        Program::compile(self, slots)
    }
}

pub(crate) fn apply_unary(op: UnaryOp, x: f64) -> Result<f64, &'static str> {
    Ok(match op {
        UnaryOp::Neg => -x,
        UnaryOp::Sin => x.sin(),
        UnaryOp::Cos => x.cos(),
        UnaryOp::Tan => x.tan(),
        UnaryOp::Exp => x.exp(),
        UnaryOp::Log => {
            if x <= 0.0 {
                return Err("log of non-positive value");
            }
            x.ln()
        }
        UnaryOp::Sqrt => {
            if x < 0.0 {
                return Err("sqrt of negative value");
            }
            x.sqrt()
        }
    })
}

pub(crate) fn apply_binary(op: BinaryOp, x: f64, y: f64) -> Result<f64, &'static str> {
    Ok(match op {
        BinaryOp::Add => x + y,
        BinaryOp::Sub => x - y,
        BinaryOp::Mul => x * y,
        BinaryOp::Div => {
            if y == 0.0 {
                return Err("division by zero");
            }
            x / y
        }
        BinaryOp::Pow => {
            if x < 0.0 && y.fract() != 0.0 {
                return Err("negative base with fractional exponent");
            }
            if x == 0.0 && y < 0.0 {
                return Err("zero raised to negative power");
            }
            x.powf(y)
        }
    })
}

/// Smart constructor: folds constants and drops trivial identities.
pub fn unary(op: UnaryOp, a: Expr) -> Expr {
    if let Expr::Constant(c) = a {
        if let Ok(v) = apply_unary(op, c) {
            if v.is_finite() {
                return Expr::Constant(v);
            }
        }
    }
    if op == UnaryOp::Neg {
        if let Expr::Unary(UnaryOp::Neg, inner) = a {
            return *inner;
        }
    }
    Expr::Unary(op, Box::new(a))
}

/// Smart constructor: folds constants and drops 0/1 identities.
pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
    use BinaryOp::*;
    if let (Expr::Constant(x), Expr::Constant(y)) = (&a, &b) {
        if let Ok(v) = apply_binary(op, *x, *y) {
            if v.is_finite() {
                return Expr::Constant(v);
            }
        }
    }
    match op {
        Add if a.is_zero() => b,
        Add | Sub if b.is_zero() => a,
        Sub if a.is_zero() => unary(UnaryOp::Neg, b),
        Mul if a.is_zero() || b.is_zero() => Expr::Constant(0.0),
        Mul if a.is_one() => b,
        Mul | Div if b.is_one() => a,
        Div if a.is_zero() && !b.is_zero() => Expr::Constant(0.0),
        Pow if b.is_zero() => Expr::Constant(1.0),
        Pow if b.is_one() => a,
        Pow if a.is_one() => Expr::Constant(1.0),
        _ => Expr::Binary(op, Box::new(a), Box::new(b)),
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Constant(v)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        binary(BinaryOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        binary(BinaryOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        binary(BinaryOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        binary(BinaryOp::Div, self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        unary(UnaryOp::Neg, self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
