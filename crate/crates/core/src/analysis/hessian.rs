use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::jet2;
use crate::quadrature::MONTE_CARLO_SEED;

/// Grids with more points than this are replaced by seeded random samples
/// plus the coordinate axes.
pub const MAX_GRID_POINTS: usize = 250_000;
const RANDOM_SAMPLES: usize = 50_000;
/// Relative change in the sup below which a level counts as stable.
pub const STABLE_TOL: f64 = 0.05;
/// Growth factor per level above which the sup counts as unbounded.
pub const GROWTH_FACTOR: f64 = 1.5;

/// Axis-aligned cube `center + [−halfWidth, halfWidth]ⁿ` with a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleBox {
    pub center: Vec<f64>,
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl SampleBox {
    pub fn centered(n: usize, half_width: f64, points_per_axis: usize) -> Self {
        SampleBox { center: vec![0.0; n], half_width, points_per_axis }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.center.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.center.len() });
        }
        if !(self.half_width > 0.0) || self.points_per_axis < 2 {
            return Err(Error::InvalidParameters(
                "sample box needs a positive half width and at least 2 points per axis".into(),
            ));
        }
        Ok(())
    }

    /// Box `k` of the refinement ladder: half width doubled `k` times with the
    /// grid spacing unchanged, so every level contains the previous grid.
    pub fn level(&self, k: u32) -> SampleBox {
        let f = 1usize << k;
        SampleBox {
            center: self.center.clone(),
            half_width: self.half_width * f as f64,
            points_per_axis: (self.points_per_axis - 1) * f + 1,
        }
    }

    fn axis_coordinate(&self, i: usize) -> f64 {
        -self.half_width + 2.0 * self.half_width * i as f64 / (self.points_per_axis - 1) as f64
    }

    /// Grid points, or seeded random points plus the grid on each coordinate
    /// axis through the center when the full grid is too large.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let n = self.center.len();
        let m = self.points_per_axis;
        let total = m.checked_pow(n as u32).filter(|&t| t <= MAX_GRID_POINTS);
        match total {
            Some(total) => (0..total)
                .map(|mut idx| {
                    (0..n)
                        .map(|d| {
                            let i = idx % m;
                            idx /= m;
                            self.center[d] + self.axis_coordinate(i)
                        })
                        .collect()
                })
                .collect(),
            None => {
                let mut pts = Vec::with_capacity(RANDOM_SAMPLES + n * m);
                for d in 0..n {
                    for i in 0..m {
                        let mut p = self.center.clone();
                        p[d] += self.axis_coordinate(i);
                        pts.push(p);
                    }
                }
                let mut rng = ChaCha8Rng::seed_from_u64(MONTE_CARLO_SEED);
                for _ in 0..RANDOM_SAMPLES {
                    pts.push(
                        self.center.iter().map(|c| c + rng.random_range(-self.half_width..=self.half_width)).collect(),
                    );
                }
                pts
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HessianVerdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HessianLevel {
    pub half_width: f64,
    pub points: usize,
    pub sup_ratio: f64,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HessianBoundReport {
    /// Sup of `‖Hess u‖²_F / (1 + |∇u|²)` over the finest level.
    pub sup_ratio: f64,
    pub levels: Vec<HessianLevel>,
    pub verdict: HessianVerdict,
    /// The sup, when the verdict is bounded.
    pub reported_c: Option<f64>,
    pub candidate_c: Option<f64>,
    /// Whether the candidate dominates every sample.
    pub candidate_holds: Option<bool>,
}

/// `‖Hess u‖²_F / (1 + |∇u|²)` at one point.
pub fn hessian_ratio(u: &ScalarField, x: &[f64]) -> Result<f64> {
    let j = jet2(u, x)?;
    let h = j.hessian_matrix();
    let g2: f64 = j.gradient.iter().map(|g| g * g).sum();
    Ok(h.norm_squared() / (1.0 + g2))
}

fn relative_change(prev: f64, next: f64) -> f64 {
    if prev == next {
        0.0
    } else {
        (next - prev).abs() / prev.abs().max(next.abs())
    }
}

/// Sup of the Hessian ratio over three nested boxes (the given one and two
/// doublings). Bounded when the sup is stable across both refinements,
/// unbounded when it grows by at least [`GROWTH_FACTOR`] at each.
pub fn hessian_bound(u: &ScalarField, domain: &SampleBox, candidate_c: Option<f64>) -> Result<HessianBoundReport> {
    domain.validate(u.dim())?;
    let mut levels = Vec::with_capacity(3);
    for k in 0..3 {
        let b = domain.level(k);
        let pts = b.points();
        let ratios: Vec<f64> = pts.par_iter().map(|p| hessian_ratio(u, p)).collect::<Result<_>>()?;
        let (imax, sup) =
            ratios.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        if !sup.is_finite() {
            return Err(Error::Internal("non-finite Hessian ratio".into()));
        }
        levels.push(HessianLevel {
            half_width: b.half_width,
            points: pts.len(),
            sup_ratio: sup,
            argmax: pts[imax].clone(),
        });
    }
    let s: Vec<f64> = levels.iter().map(|l| l.sup_ratio).collect();
    let verdict = if relative_change(s[0], s[1]) <= STABLE_TOL && relative_change(s[1], s[2]) <= STABLE_TOL {
        HessianVerdict::Bounded
    } else if s[1] >= GROWTH_FACTOR * s[0] && s[2] >= GROWTH_FACTOR * s[1] && s[2] > 0.0 {
        HessianVerdict::Unbounded
    } else {
        HessianVerdict::Inconclusive
    };
    let sup_ratio = s[2];
    Ok(HessianBoundReport {
        sup_ratio,
        levels,
        verdict,
        reported_c: (verdict == HessianVerdict::Bounded).then_some(sup_ratio),
        candidate_c,
        candidate_holds: candidate_c.map(|c| sup_ratio <= c),
    })
}
