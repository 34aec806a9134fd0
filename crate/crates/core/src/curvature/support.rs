use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::frame::{graph_frame, GraphFrame};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::jet2;

/// Support functions `f = ⟨N, U⟩`, `g = ⟨x, U⟩` for `U = (−V, 1)` and the
/// tangential part `U⊤ = U − ⟨U, N⟩ N`.
#[derive(Debug, Clone)]
pub struct SupportData {
    pub u_vec: DVector<f64>,
    pub f: f64,
    pub g: f64,
    pub utan_ambient: DVector<f64>,
    /// Chart components of `U⊤`.
    pub utan_chart: DVector<f64>,
    /// `|U⊤|` in the induced metric.
    pub utan_norm: f64,
    /// `|∇u − V| / W`.
    pub displayed_bound: f64,
    /// `|U⊤| ≤ |∇u − V| / W + 1e-12`. Holds whenever `V ∥ ∇u` but not in
    /// general: `W²|U⊤|² = |∇u − V|² + |V|²|∇u|² − ⟨∇u, V⟩²`.
    pub displayed_bound_holds: bool,
    pub f_sign: i8,
}

pub fn support_data(frame: &GraphFrame, p: &[f64], u_value: f64, v: &[f64]) -> Result<SupportData> {
    let n = frame.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let vv = DVector::from_column_slice(v);
    let mut u_vec = DVector::zeros(n + 1);
    for i in 0..n {
        u_vec[i] = -v[i];
    }
    u_vec[n] = 1.0;
    let f = (1.0 + frame.gradient.dot(&vv)) / frame.w;
    let g = u_value - DVector::from_column_slice(p).dot(&vv);
    let utan_ambient = &u_vec - &frame.normal * f;
    let utan_chart = utan_ambient.rows(0, n).into_owned();
    let utan_norm = utan_ambient.norm();
    let displayed_bound = (&frame.gradient - &vv).norm() / frame.w;
    let f_sign = if f > 0.0 {
        1
    } else if f < 0.0 {
        -1
    } else {
        0
    };
    Ok(SupportData {
        u_vec,
        f,
        g,
        utan_ambient,
        utan_chart,
        utan_norm,
        displayed_bound,
        displayed_bound_holds: utan_norm <= displayed_bound + 1e-12,
        f_sign,
    })
}

/// The two readings of the gradient formulas for `f` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientReading {
    /// `∇f = U⊤`, `∇g = −A(U⊤)`.
    AsPrinted,
    /// `∇f = −A(U⊤)`, `∇g = U⊤`.
    Swapped,
}

/// Outcome of matching finite-difference gradients of `f` and `g` against
/// the candidates `{U⊤, −A(U⊤)}` at one point.
#[derive(Debug, Clone)]
pub struct GradientResolution {
    pub reading: GradientReading,
    /// `[[|∇f − U⊤|, |∇f + AU⊤|], [|∇g − U⊤|, |∇g + AU⊤|]]` in the induced metric.
    pub residuals: [[f64; 2]; 2],
    /// Worst residual of the chosen reading.
    pub residual: f64,
    /// Both readings fit within 1e-6 (e.g. where `U⊤ = −A(U⊤)`).
    pub ambiguous: bool,
    pub fd_grad_f: DVector<f64>,
    pub fd_grad_g: DVector<f64>,
}

/// Intrinsic gradient `G⁻¹ dφ` from a chart differential.
pub(crate) fn intrinsic_gradient(metric: &DMatrix<f64>, d: &DVector<f64>) -> DVector<f64> {
    metric.clone().cholesky().expect("induced metric is positive definite").solve(d)
}

/// Resolves the gradient assignment by central differences of `f` and `g`
/// in the graph chart.
pub fn resolve_gradient_assignment(u: &ScalarField, p: &[f64], v: &[f64], h: f64) -> Result<GradientResolution> {
    u.check_point(p)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameters(format!("step must be positive, got {h}")));
    }
    let n = u.dim();
    let fg_at = |q: &[f64]| -> Result<(f64, f64)> {
        let j = jet2(u, q)?;
        let fr = graph_frame(&j)?;
        let s = support_data(&fr, q, j.value, v)?;
        Ok((s.f, s.g))
    };
    let mut df = DVector::zeros(n);
    let mut dg = DVector::zeros(n);
    let mut q = p.to_vec();
    for i in 0..n {
        q[i] = p[i] + h;
        let (fp, gp) = fg_at(&q)?;
        q[i] = p[i] - h;
        let (fm, gm) = fg_at(&q)?;
        q[i] = p[i];
        df[i] = (fp - fm) / (2.0 * h);
        dg[i] = (gp - gm) / (2.0 * h);
    }
    let j = jet2(u, p)?;
    let frame = graph_frame(&j)?;
    let support = support_data(&frame, p, j.value, v)?;
    let grad_f = intrinsic_gradient(&frame.metric, &df);
    let grad_g = intrinsic_gradient(&frame.metric, &dg);
    let cand = [support.utan_chart.clone(), -(&frame.shape * &support.utan_chart)];
    let dist = |a: &DVector<f64>, b: &DVector<f64>| frame.metric_norm(&(a - b));
    let residuals =
        [[dist(&grad_f, &cand[0]), dist(&grad_f, &cand[1])], [dist(&grad_g, &cand[0]), dist(&grad_g, &cand[1])]];
    let as_printed = residuals[0][0].max(residuals[1][1]);
    let swapped = residuals[0][1].max(residuals[1][0]);
    let (reading, residual) = if swapped <= as_printed {
        (GradientReading::Swapped, swapped)
    } else {
        (GradientReading::AsPrinted, as_printed)
    };
    Ok(GradientResolution {
        reading,
        residuals,
        residual,
        ambiguous: as_printed.max(swapped) <= 1e-6,
        fd_grad_f: grad_f,
        fd_grad_g: grad_g,
    })
}

/// Intrinsic gradients of `f` and `g` (chart components) under a reading.
#[derive(Debug, Clone)]
pub struct FgGradients {
    pub grad_f: DVector<f64>,
    pub grad_g: DVector<f64>,
    pub reading: GradientReading,
}

pub fn gradients_fg(frame: &GraphFrame, support: &SupportData, reading: GradientReading) -> FgGradients {
    let utan = support.utan_chart.clone();
    let a_utan = -(&frame.shape * &utan);
    let (grad_f, grad_g) = match reading {
        GradientReading::AsPrinted => (utan, a_utan),
        GradientReading::Swapped => (a_utan, utan),
    };
    FgGradients { grad_f, grad_g, reading }
}
