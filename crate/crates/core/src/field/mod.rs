//! Scalar fields `u: Rⁿ → R` given as expression trees.
//!
//! The grammar has no division and only non-negative integer powers, so every
//! field is an entire smooth function. See `docs/grammar.md` for the text form.

mod builtin;
mod parse;

use std::fmt;

pub use builtin::{Builtin, BuiltinFamily};
pub use parse::parse;

use crate::error::{Error, Result};

/// Expression node. Variables are stored 0-based and printed 1-based (`x1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Exp(Box<Node>),
    /// `⟨c, x⟩` for a constant vector `c` of length `n`.
    Dot(Vec<f64>),
}

impl Node {
    pub fn var(i: usize) -> Self {
        Node::Var(i)
    }

    pub fn add(a: Node, b: Node) -> Self {
        Node::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Node, b: Node) -> Self {
        Node::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Node, b: Node) -> Self {
        Node::Mul(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Node, k: u32) -> Self {
        Node::Pow(Box::new(a), k)
    }

    pub fn exp(a: Node) -> Self {
        Node::Exp(Box::new(a))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Node) -> Self {
        Node::Neg(Box::new(a))
    }

    /// Left-associated sum `t0 + t1 + ...`; `None` for an empty iterator.
    pub fn sum<I: IntoIterator<Item = Node>>(terms: I) -> Option<Node> {
        terms.into_iter().reduce(Node::add)
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) | Node::Dot(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    fn dot_lengths_ok(&self, n: usize) -> bool {
        match self {
            Node::Dot(c) => c.len() == n,
            Node::Const(_) | Node::Var(_) => true,
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) => a.dot_lengths_ok(n),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => a.dot_lengths_ok(n) && b.dot_lengths_ok(n),
        }
    }

    fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => p[*i],
            Node::Neg(a) => -a.eval(p),
            Node::Add(a, b) => a.eval(p) + b.eval(p),
            Node::Sub(a, b) => a.eval(p) - b.eval(p),
            Node::Mul(a, b) => a.eval(p) * b.eval(p),
            Node::Pow(a, k) => powi(a.eval(p), *k),
            Node::Exp(a) => a.eval(p).exp(),
            Node::Dot(c) => c.iter().zip(p).map(|(ci, xi)| ci * xi).sum(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Const(c) if c.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// `x^k` by repeated multiplication, so `jet` and `evaluate` agree bitwise
/// on the value component.
pub(crate) fn powi(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..k {
        acc *= x;
    }
    acc
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if c.is_sign_negative() => write!(f, "-{:?}", -c),
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(a) => {
                f.write_str("-")?;
                a.fmt_child(f, 4)
            }
            Node::Add(a, b) => {
                a.fmt_child(f, 1)?;
                f.write_str(" + ")?;
                b.fmt_child(f, 2)
            }
            Node::Sub(a, b) => {
                a.fmt_child(f, 1)?;
                f.write_str(" - ")?;
                b.fmt_child(f, 2)
            }
            Node::Mul(a, b) => {
                a.fmt_child(f, 2)?;
                f.write_str("*")?;
                b.fmt_child(f, 3)
            }
            Node::Pow(a, k) => {
                a.fmt_child(f, 5)?;
                write!(f, "^{k}")
            }
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Dot(c) => {
                f.write_str("dot(")?;
                for (i, ci) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{ci:?}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A scalar field on `Rⁿ`: an immutable expression tree plus its dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    dim: usize,
    root: Node,
}

impl ScalarField {
    /// Wraps a tree, checking variable indices and `dot` lengths against `dim`.
    pub fn new(dim: usize, root: Node) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameters("dimension must be positive".into()));
        }
        if let Some(i) = root.max_var() {
            if i >= dim {
                return Err(Error::VariableOutOfRange { index: i + 1, dim });
            }
        }
        if !root.dot_lengths_ok(dim) {
            return Err(Error::InvalidParameters(format!("dot() coefficient vector must have length {dim}")));
        }
        Ok(Self { dim, root })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        Ok(())
    }

    pub fn evaluate(&self, p: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        Ok(self.root.eval(p))
    }

    /// Evaluation without the dimension check, for hot loops that already
    /// validated the point.
    pub(crate) fn eval_unchecked(&self, p: &[f64]) -> f64 {
        self.root.eval(p)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
