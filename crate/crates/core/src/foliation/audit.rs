use serde::{Deserialize, Serialize};

use super::{sample, FoliationFamily, FoliationSpec};
use crate::analysis::{shape_rank, DEFAULT_TOL_RANK};
use crate::error::{Error, Result};

/// Tolerance of the vanishing checks.
pub const AUDIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditSample {
    pub point: Vec<f64>,
    pub radius: f64,
    pub s_r: f64,
    pub s_r_plus_1: f64,
    pub x_norm: f64,
    /// `max |λ_i|`, expected `1/ρ`.
    pub shape_norm: f64,
    pub trace_a2p: f64,
    pub nullity: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RMinimalAudit {
    pub r: usize,
    pub n: usize,
    pub samples: Vec<AuditSample>,
    pub s_r_single_signed: bool,
    pub passed: bool,
}

/// Checks r-minimality (`S_{r+1} = 0`), the sign of `S_r`, `X = 0`,
/// `‖A‖ = 1/ρ`, `tr(A² P_r) = 0` and `ν = n − r` on cylinder leaves.
pub fn r_minimal_audit(spec: &FoliationSpec, r: usize, points: &[Vec<f64>]) -> Result<RMinimalAudit> {
    match spec.family {
        FoliationFamily::ConcentricCylinders { r: index } if index == r => {}
        _ => {
            return Err(Error::InvalidParameters(format!(
                "the audit needs the concentric-cylinder family with index {r}"
            )))
        }
    }
    if points.is_empty() {
        return Err(Error::InvalidParameters("at least one sample point is required".into()));
    }
    let n = spec.n;
    let mut samples = Vec::with_capacity(points.len());
    for p in points {
        let s = sample(spec, p)?;
        let radius = s.leaf_parameter;
        let s_r = s.stack.s_at(r);
        let s_r_plus_1 = s.stack.s_at(r + 1);
        let x_norm = s.x.norm();
        let shape_norm = s.principal_curvatures.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let trace_a2p = s.stack.trace_a2p(r);
        let nullity = n - shape_rank(&s.shape, DEFAULT_TOL_RANK);
        let passed = s_r_plus_1.abs() <= AUDIT_TOL
            && x_norm <= AUDIT_TOL
            && (shape_norm - 1.0 / radius).abs() <= AUDIT_TOL * shape_norm.max(1.0)
            && trace_a2p.abs() <= AUDIT_TOL
            && nullity == n - r;
        samples.push(AuditSample {
            point: p.clone(),
            radius,
            s_r,
            s_r_plus_1,
            x_norm,
            shape_norm,
            trace_a2p,
            nullity,
            passed,
        });
    }
    let s_r_single_signed = samples.iter().all(|s| s.s_r > AUDIT_TOL) || samples.iter().all(|s| s.s_r < -AUDIT_TOL);
    let passed = s_r_single_signed && samples.iter().all(|s| s.passed);
    Ok(RMinimalAudit { r, n, samples, s_r_single_signed, passed })
}
