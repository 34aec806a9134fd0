//! Integration over balls, annuli and spheres in `Rⁿ`.
//!
//! For `n ≤ 4` the rules are tensor products of Gauss–Legendre panels in
//! hyperspherical coordinates; for `5 ≤ n ≤ 8` a fixed-seed Monte Carlo rule
//! is used instead. Both produce nonnegative weights, so integrals of
//! nonnegative functions over nested balls are non-decreasing.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Seed of every Monte Carlo rule.
pub const MONTE_CARLO_SEED: u64 = 0x5EED_C0DE;

/// Highest dimension handled by tensor-product quadrature.
pub const MAX_TENSOR_DIM: usize = 4;
/// Highest dimension handled at all.
pub const MAX_DIM: usize = 8;

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton on `P_m`).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let lo = a + k as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * width * (xi + 1.0), 0.5 * width * wi));
        }
    }
    out
}

/// Weighted directions on the unit sphere `S^{n−1}`; weights sum to its area.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<(Vec<f64>, f64)>,
}

impl SphereRule {
    /// Tensor rule in hyperspherical angles for `n ≤ 4`, or `samples` fixed-seed
    /// random directions for larger `n`.
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        check_dim(dim)?;
        let nodes = if dim == 1 {
            vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]
        } else if dim <= MAX_TENSOR_DIM {
            tensor_sphere(dim, order)
        } else {
            let count = 256 * order;
            let area = sphere_area(dim);
            let mut rng = ChaCha8Rng::seed_from_u64(MONTE_CARLO_SEED ^ dim as u64);
            (0..count).map(|_| (random_direction(&mut rng, dim), area / count as f64)).collect()
        };
        Ok(Self { dim, nodes })
    }

    /// `∫_{|x| = R} F dS`.
    pub fn integrate_sphere<F>(&self, radius: f64, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let scale = radius.powi(self.dim as i32 - 1);
        let vals: Vec<f64> = self
            .nodes
            .par_iter()
            .map(|(w_dir, w)| {
                let x: Vec<f64> = w_dir.iter().map(|c| c * radius).collect();
                w * f(&x)
            })
            .collect();
        scale * vals.iter().sum::<f64>()
    }

    /// `sup_{|x| = R} F` over the rule's directions.
    pub fn sup_on_sphere<F>(&self, radius: f64, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let vals: Vec<f64> = self
            .nodes
            .par_iter()
            .map(|(dir, _)| {
                let x: Vec<f64> = dir.iter().map(|c| c * radius).collect();
                f(&x)
            })
            .collect();
        vals.into_iter().fold(0.0, f64::max)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::DimensionUnsupported(dim));
    }
    Ok(())
}

pub fn sphere_area(dim: usize) -> f64 {
    // |S^{n−1}| = 2 π^{n/2} / Γ(n/2)
    let half = dim as f64 / 2.0;
    2.0 * PI.powf(half) / gamma_half_integer(dim)
}

/// `Γ(k/2)` for positive integers `k`.
fn gamma_half_integer(k: usize) -> f64 {
    if k == 1 {
        PI.sqrt()
    } else if k == 2 {
        1.0
    } else {
        (k as f64 / 2.0 - 1.0) * gamma_half_integer(k - 2)
    }
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        // Box–Muller normals
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn tensor_sphere(dim: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    // x = (cos φ1, sin φ1 cos φ2, …, sin φ1…sin φ_{n−2} cos θ, … sin θ),
    // φ_k ∈ [0, π] with weight sin^{n−1−k} φ_k, θ ∈ [0, 2π].
    let polar = composite_rule(0.0, PI, 4, order);
    let azimuth = composite_rule(0.0, 2.0 * PI, 8, order);
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    let n_polar = dim - 2;
    let mut idx = vec![0usize; n_polar];
    loop {
        let mut prefix = Vec::with_capacity(dim);
        let mut sin_prod = 1.0;
        let mut weight = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            let (phi, w) = polar[i];
            prefix.push(sin_prod * phi.cos());
            weight *= w * phi.sin().powi((dim - 2 - k) as i32);
            sin_prod *= phi.sin();
        }
        for &(theta, w) in &azimuth {
            let mut x = prefix.clone();
            x.push(sin_prod * theta.cos());
            x.push(sin_prod * theta.sin());
            out.push((x, weight * w));
        }
        // odometer over polar indices
        let mut k = 0;
        loop {
            if k == n_polar {
                return out;
            }
            idx[k] += 1;
            if idx[k] < polar.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Rule for `∫_{a ≤ |x| ≤ b} F dx`.
#[derive(Debug, Clone)]
pub struct BallRule {
    pub dim: usize,
    pub order: usize,
    sphere: SphereRule,
}

impl BallRule {
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameters("quadrature order must be positive".into()));
        }
        Ok(Self { dim, order, sphere: SphereRule::new(dim, order)? })
    }

    pub fn sphere(&self) -> &SphereRule {
        &self.sphere
    }

    /// `∫_{a ≤ |x| ≤ b} F dx`; cells are evaluated in parallel and reduced in
    /// index order.
    pub fn integrate_annulus<F>(&self, a: f64, b: f64, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        if b <= a {
            return 0.0;
        }
        if self.dim <= MAX_TENSOR_DIM {
            let panels = ((b - a) / 0.5).ceil().max(1.0) as usize;
            let radial = composite_rule(a, b, panels, self.order);
            let cells: Vec<f64> = radial
                .par_iter()
                .map(|&(rho, w)| {
                    w * rho.powi(self.dim as i32 - 1)
                        * self.sphere.integrate_sphere(1.0, |d| {
                            let x: Vec<f64> = d.iter().map(|c| c * rho).collect();
                            f(&x)
                        })
                })
                .collect();
            cells.iter().sum()
        } else {
            self.monte_carlo_annulus(a, b, f)
        }
    }

    fn monte_carlo_annulus<F>(&self, a: f64, b: f64, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let n = self.dim as i32;
        let count = 2000 * self.order;
        let volume = sphere_area(self.dim) * (b.powi(n) - a.powi(n)) / n as f64;
        let seed = MONTE_CARLO_SEED ^ a.to_bits().rotate_left(7) ^ b.to_bits();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<f64>> = (0..count)
            .map(|_| {
                let t: f64 = rng.random();
                let rho = (a.powi(n) + t * (b.powi(n) - a.powi(n))).powf(1.0 / n as f64);
                random_direction(&mut rng, self.dim).into_iter().map(|c| c * rho).collect()
            })
            .collect();
        let vals: Vec<f64> = points.par_iter().map(|x| f(x)).collect();
        volume * vals.iter().sum::<f64>() / count as f64
    }

    /// Truncated integrals over the nested balls `|x| ≤ R_k`.
    pub fn nested_ball_integrals<F>(&self, radii: &[f64], f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let mut acc = 0.0;
        let mut prev = 0.0;
        radii
            .iter()
            .map(|&r| {
                acc += self.integrate_annulus(prev, r, &f);
                prev = r;
                acc
            })
            .collect()
    }
}
