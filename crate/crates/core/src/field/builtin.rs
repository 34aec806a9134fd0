use serde::{Deserialize, Serialize};

use super::{Node, ScalarField};
use crate::error::{Error, Result};

/// The named example families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinFamily {
    /// `(x1² + … + x_r²)(α_{r+1}x_{r+1} + … + α_n x_n)`
    ProductDegenerate,
    /// `x1² + … + x_n²`
    Paraboloid,
    /// `⟨V, x⟩ + b`
    Affine,
    /// `⟨V, x⟩ + exp(−|x|²)`
    AffinePlusGaussian,
}

impl BuiltinFamily {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "product-degenerate" => Some(Self::ProductDegenerate),
            "paraboloid" => Some(Self::Paraboloid),
            "affine" => Some(Self::Affine),
            "affine-plus-gaussian" => Some(Self::AffinePlusGaussian),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ProductDegenerate => "product-degenerate",
            Self::Paraboloid => "paraboloid",
            Self::Affine => "affine",
            Self::AffinePlusGaussian => "affine-plus-gaussian",
        }
    }
}

/// Family parameters. Fields a family does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Builtin {
    pub family: BuiltinFamily,
    pub n: usize,
    /// Split index of the product-degenerate family.
    pub r: usize,
    /// Coefficients `α_{r+1}..α_n` (length `n − r`).
    pub alpha: Vec<f64>,
    /// Linear part `V` of the affine families (length `n`).
    pub v: Vec<f64>,
    /// Offset `b` of the affine family.
    pub b: f64,
}

impl Builtin {
    pub fn build(&self) -> Result<ScalarField> {
        match self.family {
            BuiltinFamily::ProductDegenerate => Self::product_degenerate(self.n, self.r, self.alpha.clone()),
            BuiltinFamily::Paraboloid => Self::paraboloid(self.n),
            BuiltinFamily::Affine => Self::affine(self.v.clone(), self.b),
            BuiltinFamily::AffinePlusGaussian => Self::affine_plus_gaussian(self.v.clone()),
        }
    }

    pub fn paraboloid(n: usize) -> Result<ScalarField> {
        let root = Node::sum((0..n).map(|i| Node::pow(Node::var(i), 2)))
            .ok_or_else(|| Error::InvalidParameters("paraboloid needs n >= 1".into()))?;
        ScalarField::new(n, root)
    }

    pub fn product_degenerate(n: usize, r: usize, alpha: Vec<f64>) -> Result<ScalarField> {
        if n < 2 || r < 1 || r > n - 1 {
            return Err(Error::InvalidParameters(format!("product-degenerate needs 1 <= r <= n-1 (n = {n}, r = {r})")));
        }
        if alpha.len() != n - r {
            return Err(Error::InvalidParameters(format!(
                "product-degenerate needs {} coefficients alpha, got {}",
                n - r,
                alpha.len()
            )));
        }
        if alpha.iter().all(|&a| a == 0.0) {
            return Err(Error::InvalidParameters("alpha must not be all zero".into()));
        }
        let squares = Node::sum((0..r).map(|i| Node::pow(Node::var(i), 2))).unwrap();
        let linear =
            Node::sum(alpha.iter().enumerate().map(|(k, &a)| Node::mul(Node::Const(a), Node::var(r + k)))).unwrap();
        ScalarField::new(n, Node::mul(squares, linear))
    }

    pub fn affine(v: Vec<f64>, b: f64) -> Result<ScalarField> {
        let n = v.len();
        if n == 0 {
            return Err(Error::InvalidParameters("affine needs a non-empty V".into()));
        }
        ScalarField::new(n, Node::add(Node::Dot(v), Node::Const(b)))
    }

    pub fn affine_plus_gaussian(v: Vec<f64>) -> Result<ScalarField> {
        let n = v.len();
        if n == 0 {
            return Err(Error::InvalidParameters("affine-plus-gaussian needs a non-empty V".into()));
        }
        let r2 = Node::sum((0..n).map(|i| Node::pow(Node::var(i), 2))).unwrap();
        ScalarField::new(n, Node::add(Node::Dot(v), Node::exp(Node::neg(r2))))
    }
}
