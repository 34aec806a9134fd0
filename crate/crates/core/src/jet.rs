//! Second-order jets `(u, ∇u, Hess u)` by forward propagation through the
//! expression tree, plus a central finite-difference oracle.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{powi, Node, ScalarField};

/// Symmetric `n × n` matrix stored as its packed upper triangle (row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, upper: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j);
        self.upper[k] = v;
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn packed(&self) -> &[f64] {
        &self.upper
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { n: self.n, upper: self.upper.iter().map(|&x| f(x)).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self { n: self.n, upper: self.upper.iter().zip(&other.upper).map(|(&a, &b)| f(a, b)).collect() }
    }

    /// `self + c · (a bᵀ + b aᵀ)`, upper triangle only.
    fn add_sym_outer(&mut self, c: f64, a: &[f64], b: &[f64]) {
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                self.upper[k] += c * (a[i] * b[j] + b[i] * a[j]);
                k += 1;
            }
        }
    }

    /// `self + c · a aᵀ`.
    fn add_outer(&mut self, c: f64, a: &[f64]) {
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                self.upper[k] += c * a[i] * a[j];
                k += 1;
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.upper.iter().zip(&other.upper).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Second-order jet of a scalar field at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub point: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SymMatrix,
}

impl Jet2 {
    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn gradient_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.gradient)
    }

    pub fn hessian_matrix(&self) -> DMatrix<f64> {
        self.hessian.to_matrix()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.packed().iter().all(|h| h.is_finite())
    }

    /// Largest absolute difference over gradient and Hessian entries.
    pub fn max_derivative_diff(&self, other: &Jet2) -> f64 {
        let g = self.gradient.iter().zip(&other.gradient).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        g.max(self.hessian.max_abs_diff(&other.hessian))
    }

    pub fn max_gradient_diff(&self, other: &Jet2) -> f64 {
        self.gradient.iter().zip(&other.gradient).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone)]
struct Triple {
    v: f64,
    g: Vec<f64>,
    h: SymMatrix,
}

impl Triple {
    fn constant(n: usize, v: f64) -> Self {
        Self { v, g: vec![0.0; n], h: SymMatrix::zeros(n) }
    }

    fn scale(&self, c: f64) -> Self {
        Self { v: c * self.v, g: self.g.iter().map(|x| c * x).collect(), h: self.h.map(|x| c * x) }
    }

    fn combine(&self, o: &Self, f: impl Fn(f64, f64) -> f64 + Copy) -> Self {
        Self { v: f(self.v, o.v), g: self.g.iter().zip(&o.g).map(|(&a, &b)| f(a, b)).collect(), h: self.h.zip(&o.h, f) }
    }
}

fn propagate(node: &Node, p: &[f64]) -> Triple {
    let n = p.len();
    match node {
        Node::Const(c) => Triple::constant(n, *c),
        Node::Var(i) => {
            let mut t = Triple::constant(n, p[*i]);
            t.g[*i] = 1.0;
            t
        }
        Node::Dot(c) => {
            let mut t = Triple::constant(n, c.iter().zip(p).map(|(a, b)| a * b).sum());
            t.g.copy_from_slice(c);
            t
        }
        Node::Neg(a) => {
            let a = propagate(a, p);
            Triple { v: -a.v, g: a.g.iter().map(|x| -x).collect(), h: a.h.map(|x| -x) }
        }
        Node::Add(a, b) => propagate(a, p).combine(&propagate(b, p), |x, y| x + y),
        Node::Sub(a, b) => propagate(a, p).combine(&propagate(b, p), |x, y| x - y),
        Node::Mul(a, b) => {
            let a = propagate(a, p);
            let b = propagate(b, p);
            let mut h = a.h.zip(&b.h, |ha, hb| b.v * ha + a.v * hb);
            h.add_sym_outer(1.0, &a.g, &b.g);
            Triple { v: a.v * b.v, g: a.g.iter().zip(&b.g).map(|(ga, gb)| b.v * ga + a.v * gb).collect(), h }
        }
        Node::Pow(a, k) => {
            let a = propagate(a, p);
            match *k {
                0 => Triple::constant(n, 1.0),
                1 => a,
                k => {
                    let d1 = k as f64 * powi(a.v, k - 1);
                    let d2 = (k * (k - 1)) as f64 * powi(a.v, k - 2);
                    let mut t = a.scale(d1);
                    t.v = powi(a.v, k);
                    t.h.add_outer(d2, &a.g);
                    t
                }
            }
        }
        Node::Exp(a) => {
            let a = propagate(a, p);
            let e = a.v.exp();
            let mut t = a.scale(e);
            t.v = e;
            t.h.add_outer(e, &a.g);
            t
        }
    }
}

/// Exact value, gradient and Hessian of `u` at `p`.
pub fn jet2(u: &ScalarField, p: &[f64]) -> Result<Jet2> {
    u.check_point(p)?;
    let t = propagate(u.root(), p);
    Ok(Jet2 { point: p.to_vec(), value: t.v, gradient: t.g, hessian: t.h })
}

/// Central second-order finite-difference estimate of the jet.
pub fn fd_jet2(u: &ScalarField, p: &[f64], h: f64) -> Result<Jet2> {
    u.check_point(p)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameters(format!("step must be positive, got {h}")));
    }
    let n = p.len();
    let f0 = u.eval_unchecked(p);
    let mut q = p.to_vec();
    let mut eval_at = |shifts: &[(usize, f64)]| {
        q.copy_from_slice(p);
        for &(i, s) in shifts {
            q[i] += s;
        }
        u.eval_unchecked(&q)
    };
    let mut gradient = vec![0.0; n];
    let mut hessian = SymMatrix::zeros(n);
    for i in 0..n {
        let fp = eval_at(&[(i, h)]);
        let fm = eval_at(&[(i, -h)]);
        gradient[i] = (fp - fm) / (2.0 * h);
        hessian.set(i, i, (fp - 2.0 * f0 + fm) / (h * h));
        for j in i + 1..n {
            let fpp = eval_at(&[(i, h), (j, h)]);
            let fpm = eval_at(&[(i, h), (j, -h)]);
            let fmp = eval_at(&[(i, -h), (j, h)]);
            let fmm = eval_at(&[(i, -h), (j, -h)]);
            hessian.set(i, j, (fpp - fpm - fmp + fmm) / (4.0 * h * h));
        }
    }
    Ok(Jet2 { point: p.to_vec(), value: f0, gradient, hessian })
}

/// Value and gradient only; cheaper than [`jet2`] for quadrature loops.
pub(crate) fn gradient(u: &ScalarField, p: &[f64]) -> (f64, Vec<f64>) {
    fn walk(node: &Node, p: &[f64]) -> (f64, Vec<f64>) {
        let n = p.len();
        match node {
            Node::Const(c) => (*c, vec![0.0; n]),
            Node::Var(i) => {
                let mut g = vec![0.0; n];
                g[*i] = 1.0;
                (p[*i], g)
            }
            Node::Dot(c) => (c.iter().zip(p).map(|(a, b)| a * b).sum(), c.clone()),
            Node::Neg(a) => {
                let (v, g) = walk(a, p);
                (-v, g.into_iter().map(|x| -x).collect())
            }
            Node::Add(a, b) | Node::Sub(a, b) => {
                let s = if matches!(node, Node::Add(..)) { 1.0 } else { -1.0 };
                let (va, ga) = walk(a, p);
                let (vb, gb) = walk(b, p);
                (va + s * vb, ga.iter().zip(&gb).map(|(x, y)| x + s * y).collect())
            }
            Node::Mul(a, b) => {
                let (va, ga) = walk(a, p);
                let (vb, gb) = walk(b, p);
                (va * vb, ga.iter().zip(&gb).map(|(x, y)| vb * x + va * y).collect())
            }
            Node::Pow(a, k) => {
                if *k == 0 {
                    return (1.0, vec![0.0; n]);
                }
                let (v, g) = walk(a, p);
                let d = *k as f64 * powi(v, k - 1);
                (powi(v, *k), g.into_iter().map(|x| d * x).collect())
            }
            Node::Exp(a) => {
                let (v, g) = walk(a, p);
                let e = v.exp();
                (e, g.into_iter().map(|x| e * x).collect())
            }
        }
    }
    walk(u.root(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{parse, Builtin};
    use rand::{Rng, SeedableRng};

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn paraboloid_jets() {
        let u = Builtin::paraboloid(2).unwrap();
        let j = jet2(&u, &[0.0, 0.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.gradient, vec![0.0, 0.0]);
        assert_eq!(j.hessian_matrix(), DMatrix::identity(2, 2) * 2.0);
        let j = jet2(&u, &[1.0, 1.0]).unwrap();
        assert_eq!(j.value, 2.0);
        assert_eq!(j.gradient, vec![2.0, 2.0]);
        assert_eq!(j.hessian_matrix(), DMatrix::identity(2, 2) * 2.0);
    }

    #[test]
    fn product_degenerate_hand_derivatives() {
        // x1²(x2 + x3): ∂1 = 2x1(x2+x3), ∂2 = ∂3 = x1², ∂11 = 2(x2+x3), ∂12 = ∂13 = 2x1
        let u = Builtin::product_degenerate(3, 1, vec![1.0, 1.0]).unwrap();
        let j = jet2(&u, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(j.gradient, vec![4.0, 1.0, 1.0]);
        let expected = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 2.0, 2.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert_eq!(j.hessian_matrix(), expected);
    }

    #[test]
    fn affine_jet_is_flat() {
        let v = vec![0.5, -1.0, 2.0];
        let u = Builtin::affine(v.clone(), 3.0).unwrap();
        let j = jet2(&u, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(j.gradient, v);
        assert!(j.hessian.packed().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn fd_examples() {
        let u = Builtin::paraboloid(2).unwrap();
        let j = fd_jet2(&u, &[1.0, 1.0], 1e-4).unwrap();
        assert!(approx(j.gradient[0], 2.0, 1e-7) && approx(j.gradient[1], 2.0, 1e-7));

        let u = Builtin::affine(vec![1.0, 2.0], 0.0).unwrap();
        let j = fd_jet2(&u, &[0.7, -1.3], 1e-3).unwrap();
        assert!(j.hessian.packed().iter().all(|h| h.abs() <= 1e-8));

        let u = Builtin::affine_plus_gaussian(vec![3.0]).unwrap();
        let j = fd_jet2(&u, &[0.0], 1e-4).unwrap();
        assert!(approx(j.hessian.get(0, 0), -2.0, 1e-6));
    }

    #[test]
    fn errors() {
        let u = Builtin::paraboloid(2).unwrap();
        assert!(matches!(jet2(&u, &[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(fd_jet2(&u, &[1.0, 1.0], 0.0), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn sum_node_jet_is_exact_sum_of_child_jets() {
        let a = parse("x1^3*x2 + exp(x1*x2)", 2).unwrap();
        let b = parse("dot(0.3, -2)*x2^2", 2).unwrap();
        let s = ScalarField::new(2, Node::add(a.root().clone(), b.root().clone())).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let (ja, jb, js) = (jet2(&a, &p).unwrap(), jet2(&b, &p).unwrap(), jet2(&s, &p).unwrap());
            assert_eq!(js.value, ja.value + jb.value);
            for i in 0..2 {
                assert_eq!(js.gradient[i], ja.gradient[i] + jb.gradient[i]);
            }
            for (k, h) in js.hessian.packed().iter().enumerate() {
                assert_eq!(*h, ja.hessian.packed()[k] + jb.hessian.packed()[k]);
            }
        }
    }

    #[test]
    fn gradient_only_path_matches_jet() {
        let u = Builtin::affine_plus_gaussian(vec![1.0, -2.0, 0.5]).unwrap();
        let p = [0.3, -0.7, 1.1];
        let j = jet2(&u, &p).unwrap();
        let (v, g) = gradient(&u, &p);
        assert_eq!(v, j.value);
        for i in 0..3 {
            assert!(approx(g[i], j.gradient[i], 1e-15));
        }
    }

    #[test]
    fn packed_indexing_is_symmetric() {
        let mut m = SymMatrix::zeros(4);
        for i in 0..4 {
            for j in i..4 {
                m.set(i, j, (10 * i + j) as f64);
            }
        }
        let d = m.to_matrix();
        assert_eq!(d.clone(), d.transpose());
        assert_eq!(m.get(3, 1), 13.0);
    }
}
