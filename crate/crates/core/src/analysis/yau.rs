use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::integrability::{analyse_tail, check_schedule, IntegrabilityVerdict};
use crate::curvature::{graph_frame, intrinsic_gradient, ShapeSign};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::jet2;
use crate::quadrature::BallRule;

/// A flux below this (times `max(1, ‖X‖_{L¹})`) counts as decayed.
pub const FLUX_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YauVerdict {
    /// `|X|` is integrable and the boundary flux decays.
    FluxDecayConsistent,
    /// `|X|` is integrable but the flux does not decay on the schedule.
    FluxDecayInconsistent,
    /// `|X|` is not observed to be integrable; no claim on the flux.
    HypothesisNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct YauReport {
    pub radii: Vec<f64>,
    /// `∫_{∂B_R} ⟨X, ν⟩`, equal to `∫_{B_R} div X dM`.
    pub fluxes: Vec<f64>,
    /// `∫_{B_R} |X| dM`.
    pub l1_norms: Vec<f64>,
    /// `∫_{∂B_R} |X|`, an upper bound for `|flux|`.
    pub boundary_norms: Vec<f64>,
    pub l1_verdict: IntegrabilityVerdict,
    pub verdict: YauVerdict,
    pub shape_sign: ShapeSign,
}

struct FieldPoint {
    x: DVector<f64>,
    metric: DMatrix<f64>,
    w: f64,
}

/// `X = P_r ∇g` at chart point `p`.
fn field_at(u: &ScalarField, v: &DVector<f64>, r: usize, sign: ShapeSign, p: &[f64]) -> Result<FieldPoint> {
    let fr = graph_frame(&jet2(u, p)?)?;
    let stack = fr.newton_stack(sign);
    let grad_g = intrinsic_gradient(&fr.metric, &(&fr.gradient - v));
    Ok(FieldPoint { x: &stack.p[r] * grad_g, metric: fr.metric, w: fr.w })
}

/// Flux and `L¹` diagnostics of `X = P_r ∇g` over expanding chart balls.
///
/// In the graph chart `∫_{B_R} div X dM = ∫_{|x|=R} W ⟨X, x/R⟩_eucl dS`, and
/// `|W ⟨X, n⟩| ≤ W |X| √(nᵀG⁻¹n)` bounds it by the boundary norm.
pub fn yau_flux_diagnostic(
    u: &ScalarField,
    v: &[f64],
    r: usize,
    radii: &[f64],
    quadrature_order: usize,
    sign: ShapeSign,
) -> Result<YauReport> {
    let n = u.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if r >= n {
        return Err(Error::IndexOutOfRange { r, n });
    }
    check_schedule(radii)?;
    let rule = BallRule::new(n, quadrature_order)?;
    let vv = DVector::from_column_slice(v);
    let eval = |p: &[f64]| field_at(u, &vv, r, sign, p);
    let density = |p: &[f64]| match eval(p) {
        Ok(fp) => (fp.x.dot(&(&fp.metric * &fp.x))).sqrt() * fp.w,
        Err(_) => f64::NAN,
    };
    let l1_norms = rule.nested_ball_integrals(radii, density);
    let sphere = rule.sphere();
    let mut fluxes = Vec::with_capacity(radii.len());
    let mut boundary_norms = Vec::with_capacity(radii.len());
    let mut sups = Vec::with_capacity(radii.len());
    for &rad in radii {
        fluxes.push(sphere.integrate_sphere(rad, |p| match eval(p) {
            Ok(fp) => fp.w * p.iter().zip(fp.x.iter()).map(|(a, b)| a * b).sum::<f64>() / rad,
            Err(_) => f64::NAN,
        }));
        boundary_norms.push(sphere.integrate_sphere(rad, |p| match eval(p) {
            Ok(fp) => {
                let nrm = DVector::from_iterator(n, p.iter().map(|c| c / rad));
                let gin = intrinsic_gradient(&fp.metric, &nrm);
                density(p) * nrm.dot(&gin).sqrt()
            }
            Err(_) => f64::NAN,
        }));
        sups.push(sphere.sup_on_sphere(rad, density));
    }
    let all = l1_norms.iter().chain(&fluxes).chain(&boundary_norms).chain(&sups);
    if all.into_iter().any(|x| !x.is_finite()) {
        return Err(Error::Internal("non-finite value in the flux diagnostic".into()));
    }
    let tail = analyse_tail(radii, &l1_norms, &sups, n);
    let verdict = match tail.limit {
        Some(limit) => {
            let last = fluxes[fluxes.len() - 1].abs();
            if last <= FLUX_TOL * limit.max(1.0) {
                YauVerdict::FluxDecayConsistent
            } else {
                YauVerdict::FluxDecayInconsistent
            }
        }
        None => YauVerdict::HypothesisNotMet,
    };
    Ok(YauReport {
        radii: radii.to_vec(),
        fluxes,
        l1_norms,
        boundary_norms,
        l1_verdict: tail.verdict,
        verdict,
        shape_sign: sign,
    })
}
