use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{graph_frame, ShapeSign};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::jet2;

/// Default relative rank tolerance: singular values below
/// `1e-8 · max(1, ‖A‖)` count as zero.
pub const DEFAULT_TOL_RANK: f64 = 1e-8;
/// `|S_j|` at or below this counts as vanishing.
pub const CASCADE_TOL: f64 = 1e-12;
/// Cascade tolerance is `CASCADE_SLACK · CASCADE_TOL · max(1, normBound)`.
pub const CASCADE_SLACK: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ShapeNullity {
    pub rank: usize,
    pub nullity: usize,
    /// Least `j ≥ 1` with `|S_k| ≤ tol` for every `k ≥ j`; `n + 1` if `S_n ≠ 0`.
    pub cascade_index: usize,
    /// `|S_{r+1}|` and `|S_{r+2}|` are both below tolerance.
    pub cascade_applies: bool,
    /// `|S_j| ≤ tol'` for all `j ≥ r+1`; vacuously true when the cascade does
    /// not apply.
    pub cascade_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NullitySample {
    pub point: Vec<f64>,
    #[serde(flatten)]
    pub shape: ShapeNullity,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NullityReport {
    pub r: usize,
    pub tol_rank: f64,
    pub samples: Vec<NullitySample>,
    /// Minimum nullity over the samples.
    pub verdict_nullity_lower_bound: usize,
    pub cascade_holds: bool,
}

/// Numerical rank of `a`: singular values above `tol_rank · max(1, σ_max)`.
pub fn shape_rank(a: &DMatrix<f64>, tol_rank: f64) -> usize {
    let sv = a.singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    let cut = tol_rank * top.max(1.0);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Rank, nullity and vanishing cascade of one shape operator with
/// symmetric functions `s = (S_0, …, S_n)`.
pub fn analyse_shape(a: &DMatrix<f64>, s: &[f64], norm_bound: f64, r: usize, tol_rank: f64) -> ShapeNullity {
    let n = a.nrows();
    let rank = shape_rank(a, tol_rank);
    let s_at = |k: usize| s.get(k).copied().unwrap_or(0.0);
    let mut cascade_index = n + 1;
    while cascade_index > 1 && s_at(cascade_index - 1).abs() <= CASCADE_TOL {
        cascade_index -= 1;
    }
    let cascade_applies = s_at(r + 1).abs() <= CASCADE_TOL && s_at(r + 2).abs() <= CASCADE_TOL;
    let tol_prime = CASCADE_SLACK * CASCADE_TOL * norm_bound.max(1.0);
    let cascade_holds = !cascade_applies || (r + 1..=n).all(|j| s_at(j).abs() <= tol_prime);
    ShapeNullity { rank, nullity: n - rank, cascade_index, cascade_applies, cascade_holds }
}

/// Nullity of the graph's shape operator at each sample point.
pub fn nullity_report(u: &ScalarField, samples: &[Vec<f64>], tol_rank: f64, r: usize) -> Result<NullityReport> {
    let n = u.dim();
    if r >= n {
        return Err(Error::IndexOutOfRange { r, n });
    }
    if !(tol_rank > 0.0) {
        return Err(Error::InvalidParameters(format!("rank tolerance must be positive, got {tol_rank}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameters("at least one sample point is required".into()));
    }
    let out: Vec<NullitySample> = samples
        .par_iter()
        .map(|p| {
            u.check_point(p)?;
            let fr = graph_frame(&jet2(u, p)?)?;
            let st = fr.newton_stack(ShapeSign::MinusDN);
            let shape = analyse_shape(&fr.shape, &st.s, st.norm_bound, r, tol_rank);
            Ok(NullitySample { point: p.clone(), shape, s: st.s })
        })
        .collect::<Result<_>>()?;
    let verdict_nullity_lower_bound = out.iter().map(|s| s.shape.nullity).min().unwrap_or(n);
    let cascade_holds = out.iter().all(|s| s.shape.cascade_holds);
    Ok(NullityReport { r, tol_rank, samples: out, verdict_nullity_lower_bound, cascade_holds })
}
