//! The leaf and ambient divergence identities for `P_r X`:
//!
//! `div_L(P_r X) = σ ā tr P_r + tr(A² P_r) + ⟨X, P_r X⟩ − N(S_{r+1})` in a
//! space form of curvature `ā`, and
//! `div_M̄(P_r X) = div_L(P_r X) − ⟨P_r X, X⟩`.

use serde::{Deserialize, Serialize};

use super::families::{ambient_chart, field_data, leaf_chart, singular_distance, Chart};
use super::{chart_components, sample, FoliationSample, FoliationSpec, Orientation, SINGULAR_GUARD};
use crate::error::{Error, Result};
use crate::linalg::coordinate_divergence;

/// Sign `σ` of the curvature term, as fixed by [`calibrate_sigma`].
pub const CURVATURE_SIGN: f64 = 1.0;

fn check_r(n: usize, r: usize) -> Result<()> {
    if r >= n {
        return Err(Error::IndexOutOfRange { r, n });
    }
    Ok(())
}

/// Terms of the closed-form right-hand side of the leaf identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LeafIdentityRhs {
    /// `σ ā tr P_r`
    pub curvature_term: f64,
    /// `tr(A² P_r)`
    pub trace_a2p: f64,
    /// `⟨X, P_r X⟩`
    pub x_p_x: f64,
    /// `N(S_{r+1})`
    pub normal_derivative: f64,
    pub total: f64,
}

pub fn leaf_identity_rhs(s: &FoliationSample, r: usize, sigma: f64) -> Result<LeafIdentityRhs> {
    check_r(s.n(), r)?;
    let p = &s.stack.p[r];
    let curvature_term = sigma * s.ambient_curvature * p.trace();
    let trace_a2p = s.stack.trace_a2p(r);
    let x_p_x = s.x_chart.dot(&(&s.metric * (p * &s.x_chart)));
    let normal_derivative = s.normal_derivative_s[r];
    Ok(LeafIdentityRhs {
        curvature_term,
        trace_a2p,
        x_p_x,
        normal_derivative,
        total: curvature_term + trace_a2p + x_p_x - normal_derivative,
    })
}

/// `(1/√g) ∂_i(√g Z^i)` in `chart`, for `Z = P_r X` of the foliation.
fn chart_divergence(spec: &FoliationSpec, chart: &Chart, dim: usize, r: usize, h: f64) -> Result<f64> {
    coordinate_divergence(dim, h, |c| {
        let (q, e) = chart(c)?;
        let data = field_data(spec, q.as_slice())?;
        let z = data.newton_apply(r, &data.x);
        let (_, sqrt_det, comps) = chart_components(&e, &z)?;
        Ok((sqrt_det, comps))
    })
}

/// `div_L(P_r X)` by central differences with step `h` in the leaf chart.
pub fn leaf_identity_lhs(spec: &FoliationSpec, point: &[f64], r: usize, h: f64) -> Result<f64> {
    super::families::check_point(spec, point)?;
    check_r(spec.n, r)?;
    let chart = leaf_chart(spec, point)?;
    chart_divergence(spec, &chart, spec.n, r, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AmbientIdentityCheck {
    pub ambient_divergence: f64,
    pub leaf_divergence: f64,
    /// `⟨P_r X, X⟩`
    pub p_x_dot_x: f64,
    /// `|ambientDivergence − (leafDivergence − pXDotX)|`
    pub residual: f64,
}

/// Compares the ambient divergence of the foliation field `P_r X` with
/// `div_L(P_r X) − ⟨P_r X, X⟩`, both discretized with step `h`.
pub fn ambient_identity_check(spec: &FoliationSpec, point: &[f64], r: usize, h: f64) -> Result<AmbientIdentityCheck> {
    let leaf_divergence = leaf_identity_lhs(spec, point, r, h)?;
    if let Some(distance) = singular_distance(spec, point) {
        // the ambient stencil moves off the leaf by up to h
        if distance <= h + SINGULAR_GUARD {
            return Err(Error::SingularSet { distance });
        }
    }
    let chart = ambient_chart(spec, point);
    let ambient_divergence = chart_divergence(spec, &chart, spec.n + 1, r, h)?;
    let data = field_data(spec, point)?;
    let p_x_dot_x = data.newton_apply(r, &data.x).dot(&data.x);
    Ok(AmbientIdentityCheck {
        ambient_divergence,
        leaf_divergence,
        p_x_dot_x,
        residual: (ambient_divergence - (leaf_divergence - p_x_dot_x)).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SigmaCalibration {
    pub sigma: f64,
    /// Worst `|lhs − rhs|` on geodesic spheres with `σ = +1`.
    pub residual_plus: f64,
    /// Worst `|lhs − rhs|` on geodesic spheres with `σ = −1`.
    pub residual_minus: f64,
}

/// Fixes `σ` on the geodesic-sphere foliation of `S^3` and `S^4` at
/// `t ∈ {π/6, π/4, π/3}` and every `r`, in both orientations.
pub fn calibrate_sigma() -> Result<SigmaCalibration> {
    use std::f64::consts::PI;
    let mut worst = [0.0f64; 2];
    for n in [2, 3] {
        for orientation in [Orientation::Outward, Orientation::Inward] {
            let spec = FoliationSpec::geodesic_spheres(n, orientation)?;
            for t in [PI / 6.0, PI / 4.0, PI / 3.0] {
                let mut omega = vec![0.0; n + 1];
                omega[0] = 1.0;
                let p = FoliationSpec::sphere_point(t, &omega);
                let s = sample(&spec, &p)?;
                for r in 0..n {
                    let lhs = leaf_identity_lhs(&spec, &p, r, 1e-3)?;
                    for (k, sigma) in [1.0, -1.0].into_iter().enumerate() {
                        let rhs = leaf_identity_rhs(&s, r, sigma)?.total;
                        worst[k] = worst[k].max((lhs - rhs).abs());
                    }
                }
            }
        }
    }
    let sigma = if worst[0] <= worst[1] { 1.0 } else { -1.0 };
    Ok(SigmaCalibration { sigma, residual_plus: worst[0], residual_minus: worst[1] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// Leaf divergence against the closed form.
    Leaf,
    /// Ambient divergence against the leaf divergence.
    Ambient,
}

/// One row of a step-size sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub family: String,
    pub point: Vec<f64>,
    pub r: usize,
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `log(res_{k−1}/res_k) / log(h_{k−1}/h_k)` from the previous row.
    pub order_estimate: Option<f64>,
}

pub fn convergence_order(h0: f64, res0: f64, h1: f64, res1: f64) -> Option<f64> {
    (res0 > 0.0 && res1 > 0.0).then(|| (res0 / res1).ln() / (h0 / h1).ln())
}

/// Residuals of one identity at `point` over the steps `hs`, in order.
pub fn residual_sweep(
    spec: &FoliationSpec,
    point: &[f64],
    r: usize,
    hs: &[f64],
    identity: Identity,
    sigma: f64,
) -> Result<Vec<SweepRow>> {
    let s = sample(spec, point)?;
    let rhs_leaf = leaf_identity_rhs(&s, r, sigma)?.total;
    let mut rows: Vec<SweepRow> = Vec::with_capacity(hs.len());
    for &h in hs {
        let (lhs, rhs) = match identity {
            Identity::Leaf => (leaf_identity_lhs(spec, point, r, h)?, rhs_leaf),
            Identity::Ambient => {
                let c = ambient_identity_check(spec, point, r, h)?;
                (c.ambient_divergence, c.leaf_divergence - c.p_x_dot_x)
            }
        };
        let residual = (lhs - rhs).abs();
        let order_estimate = rows.last().and_then(|prev| convergence_order(prev.h, prev.residual, h, residual));
        rows.push(SweepRow {
            family: spec.family_name().to_string(),
            point: point.to_vec(),
            r,
            h,
            lhs,
            rhs,
            residual,
            order_estimate,
        });
    }
    Ok(rows)
}
