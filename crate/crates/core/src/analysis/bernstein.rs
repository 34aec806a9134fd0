use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hessian::{hessian_bound, HessianBoundReport, HessianVerdict, SampleBox};
use super::integrability::{l1_integrability, IntegrabilityReport, IntegrabilityVerdict};
use super::nullity::{analyse_shape, DEFAULT_TOL_RANK};
use crate::curvature::{graph_frame, ShapeSign};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::jet2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BernsteinConfig {
    pub radii: Vec<f64>,
    pub quadrature_order: usize,
    pub hessian_box: SampleBox,
    /// Points where `S_1`, `S_2` and the nullity are sampled.
    pub sign_box: SampleBox,
    pub tol_rank: f64,
    /// `|S_k|` at or below this counts as zero when sampling signs.
    pub sign_tol: f64,
    /// Index of the nullity bound `ν ≥ n − r`.
    pub r: usize,
}

impl BernsteinConfig {
    pub fn default_for(n: usize) -> Self {
        BernsteinConfig {
            radii: vec![1.0, 2.0, 4.0, 8.0],
            quadrature_order: 6,
            hessian_box: SampleBox::centered(n, 2.0, 9),
            sign_box: SampleBox::centered(n, 2.0, 5),
            tol_rank: DEFAULT_TOL_RANK,
            sign_tol: 1e-12,
            r: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    HyperplaneOrthogonalToU,
    NullityBoundOnly,
    HypothesesNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SignSummary {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    pub sign_change: bool,
    pub statement: String,
}

impl SignSummary {
    fn from_values(name: &str, values: &[f64], tol: f64) -> Self {
        let positive = values.iter().filter(|&&v| v > tol).count();
        let negative = values.iter().filter(|&&v| v < -tol).count();
        let zero = values.len() - positive - negative;
        let sign_change = positive > 0 && negative > 0;
        let statement = if sign_change {
            format!("{name} changes sign on {} samples", values.len())
        } else {
            format!("no sign change of {name} observed on {} samples", values.len())
        };
        SignSummary { positive, negative, zero, sign_change, statement }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BernsteinReport {
    pub classification: Classification,
    /// `(−V, 1)/|(−V, 1)|` for the hyperplane classification.
    pub normal: Option<Vec<f64>>,
    pub integrability: IntegrabilityReport,
    pub hessian: HessianBoundReport,
    pub s1_sign: SignSummary,
    pub s2_sign: SignSummary,
    pub min_nullity: usize,
    pub nullity_bound_holds: bool,
    pub samples_checked: usize,
    /// Failed hypotheses, in checking order.
    pub reasons: Vec<String>,
}

/// Runs the integrability, Hessian-growth and curvature-sign checks and
/// classifies the graph.
pub fn bernstein_classify(u: &ScalarField, v: &[f64], config: &BernsteinConfig) -> Result<BernsteinReport> {
    let n = u.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if config.r >= n {
        return Err(Error::IndexOutOfRange { r: config.r, n });
    }
    let integrability = l1_integrability(u, v, &config.radii, config.quadrature_order)?;
    let hessian = hessian_bound(u, &config.hessian_box, None)?;
    if config.sign_box.center.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: config.sign_box.center.len() });
    }
    let points = config.sign_box.points();
    let sampled: Vec<(f64, f64, usize)> = points
        .par_iter()
        .map(|p| {
            let fr = graph_frame(&jet2(u, p)?)?;
            let st = fr.newton_stack(ShapeSign::MinusDN);
            let sh = analyse_shape(&fr.shape, &st.s, st.norm_bound, 0, config.tol_rank);
            Ok((st.s_at(1), st.s_at(2), sh.nullity))
        })
        .collect::<Result<_>>()?;
    let s1: Vec<f64> = sampled.iter().map(|t| t.0).collect();
    let s2: Vec<f64> = sampled.iter().map(|t| t.1).collect();
    let min_nullity = sampled.iter().map(|t| t.2).min().unwrap_or(n);
    let s1_sign = SignSummary::from_values("S_1", &s1, config.sign_tol);
    let s2_sign = SignSummary::from_values("S_2", &s2, config.sign_tol);

    let mut reasons = Vec::new();
    if integrability.verdict != IntegrabilityVerdict::Converged {
        reasons.push(format!("|grad u - V| integrability verdict is {:?}", integrability.verdict).to_lowercase());
    }
    if hessian.verdict != HessianVerdict::Bounded {
        reasons.push(format!("Hessian growth verdict is {:?}", hessian.verdict).to_lowercase());
    }
    for s in [&s1_sign, &s2_sign] {
        if s.sign_change {
            reasons.push(s.statement.clone());
        }
    }
    let nullity_bound_holds = min_nullity >= n - config.r;
    let classification = if !reasons.is_empty() {
        Classification::HypothesesNotMet
    } else if min_nullity == n {
        Classification::HyperplaneOrthogonalToU
    } else {
        Classification::NullityBoundOnly
    };
    let normal = (classification == Classification::HyperplaneOrthogonalToU).then(|| {
        let norm = (1.0 + v.iter().map(|c| c * c).sum::<f64>()).sqrt();
        v.iter().map(|c| -c / norm).chain(std::iter::once(1.0 / norm)).collect()
    });
    Ok(BernsteinReport {
        classification,
        normal,
        integrability,
        hessian,
        s1_sign,
        s2_sign,
        min_nullity,
        nullity_bound_holds,
        samples_checked: points.len(),
        reasons,
    })
}
