//! Closed forms of `L_r f` and `L_r g` and their check against a discretized
//! divergence `div_M(P_r ∇φ)`.
//!
//! The closed forms hold for `S_r`, `P_r` built from the operator `+D̄N`;
//! [`resolve_lr_shape_sign`] determines this with the divergence oracle.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::frame::{graph_frame, GraphFrame, ShapeSign};
use super::newton::NewtonStack;
use super::support::{intrinsic_gradient, support_data, SupportData};
use crate::error::{Error, Result};
use crate::field::{Builtin, ScalarField};
use crate::jet::{jet2, Jet2};
use crate::linalg::{coordinate_divergence, richardson_derivative};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunction {
    /// `f = ⟨N, U⟩`
    F,
    /// `g = ⟨x, U⟩`
    G,
}

fn check_r(n: usize, r: usize) -> Result<()> {
    if r >= n {
        return Err(Error::IndexOutOfRange { r, n });
    }
    Ok(())
}

/// `L_r g = −(r+1) S_{r+1} f`.
pub fn lr_g(frame: &GraphFrame, stack: &NewtonStack, support: &SupportData, r: usize) -> Result<f64> {
    check_r(frame.dim(), r)?;
    Ok(-((r + 1) as f64) * stack.s_at(r + 1) * support.f)
}

/// `S_{r+1}` at chart point `q` for the given convention.
fn s_at_point(u: &ScalarField, q: &[f64], k: usize, sign: ShapeSign) -> Result<f64> {
    let fr = graph_frame(&jet2(u, q)?)?;
    Ok(fr.newton_stack(sign).s_at(k))
}

/// `L_r f = −(S_1 S_{r+1} − (r+2) S_{r+2}) f + U⊤(S_{r+1})`.
///
/// `U⊤(S_{r+1})` is a Richardson-extrapolated central difference of
/// `S_{r+1}` along the chart direction of `U⊤` with step `h`.
pub fn lr_f(
    u: &ScalarField,
    frame: &GraphFrame,
    stack: &NewtonStack,
    support: &SupportData,
    r: usize,
    h: f64,
    sign: ShapeSign,
) -> Result<f64> {
    let n = frame.dim();
    check_r(n, r)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameters(format!("step must be positive, got {h}")));
    }
    let s = |k| stack.s_at(k);
    let algebraic = -(s(1) * s(r + 1) - (r + 2) as f64 * s(r + 2)) * support.f;
    let dir = &support.utan_chart;
    let derivative = if dir.amax() == 0.0 {
        0.0
    } else {
        let p = &frame.base_point;
        richardson_derivative(h, |t| {
            let q: Vec<f64> = (0..n).map(|i| p[i] + t * dir[i]).collect();
            s_at_point(u, &q, r + 1, sign)
        })?
    };
    Ok(algebraic + derivative)
}

/// Exact chart differential of `f` or `g` from the jet.
fn differential(jet: &Jet2, frame: &GraphFrame, v: &DVector<f64>, which: TestFunction) -> DVector<f64> {
    match which {
        TestFunction::G => &frame.gradient - v,
        TestFunction::F => {
            let hess = jet.hessian_matrix();
            let w = frame.w;
            let num = 1.0 + frame.gradient.dot(v);
            &hess * v / w - (&hess * &frame.gradient) * (num / (w * w * w))
        }
    }
}

/// Result of [`lr_divergence_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCheck {
    /// `div_M(P_r ∇φ)` by central differences in the graph chart.
    pub discretized: f64,
    /// `L_r φ` from the closed form.
    pub closed_form: f64,
    /// `|discretized − closed_form|`.
    pub residual: f64,
}

/// Compares `div_M(P_r ∇φ)` against the closed form of `L_r φ` at `p`.
///
/// At each stencil point the frame, Newton stack and intrinsic gradient
/// `G⁻¹ dφ` are rebuilt from the exact jet; the metric divergence is
/// `(1/√det G) ∂_i(√det G (P_r∇φ)^i)`.
pub fn lr_divergence_check(
    u: &ScalarField,
    p: &[f64],
    v: &[f64],
    r: usize,
    which: TestFunction,
    h: f64,
    sign: ShapeSign,
) -> Result<DivergenceCheck> {
    u.check_point(p)?;
    let n = u.dim();
    check_r(n, r)?;
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    let vv = DVector::from_column_slice(v);
    let discretized = coordinate_divergence(n, h, |c| {
        let q: Vec<f64> = (0..n).map(|i| p[i] + c[i]).collect();
        let jet = jet2(u, &q)?;
        let fr = graph_frame(&jet)?;
        let stack = fr.newton_stack(sign);
        let grad = intrinsic_gradient(&fr.metric, &differential(&jet, &fr, &vv, which));
        Ok((fr.sqrt_det_metric(), &stack.p[r] * grad))
    })?;
    let jet = jet2(u, p)?;
    let frame = graph_frame(&jet)?;
    let stack = frame.newton_stack(sign);
    let support = support_data(&frame, p, jet.value, v)?;
    let closed_form = match which {
        TestFunction::G => lr_g(&frame, &stack, &support, r)?,
        TestFunction::F => lr_f(u, &frame, &stack, &support, r, h, sign)?,
    };
    Ok(DivergenceCheck { discretized, closed_form, residual: (discretized - closed_form).abs() })
}

/// Which shape-operator sign makes the closed forms agree with the
/// divergence oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSignResolution {
    pub sign: ShapeSign,
    /// Worst residual over the calibration cases with `A = −D̄N`.
    pub residual_minus_dn: f64,
    /// Worst residual over the calibration cases with `A = +D̄N`.
    pub residual_plus_dn: f64,
}

/// Calibrates the convention on the paraboloid `n = 2` at `(0.4, −0.3)` with
/// `V = (0.2, 0.1)`, for `r ∈ {0, 1}` and both test functions, `h = 1e-3`.
pub fn resolve_lr_shape_sign() -> Result<LrSignResolution> {
    let u = Builtin::paraboloid(2)?;
    let p = [0.4, -0.3];
    let v = [0.2, 0.1];
    let worst = |sign| -> Result<f64> {
        let mut w: f64 = 0.0;
        for r in 0..2 {
            for which in [TestFunction::F, TestFunction::G] {
                w = w.max(lr_divergence_check(&u, &p, &v, r, which, 1e-3, sign)?.residual);
            }
        }
        Ok(w)
    };
    let minus = worst(ShapeSign::MinusDN)?;
    let plus = worst(ShapeSign::PlusDN)?;
    let sign = if plus <= minus { ShapeSign::PlusDN } else { ShapeSign::MinusDN };
    Ok(LrSignResolution { sign, residual_minus_dn: minus, residual_plus_dn: plus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse;

    fn at(u: &ScalarField, p: &[f64], v: &[f64], sign: ShapeSign) -> (GraphFrame, NewtonStack, SupportData) {
        let j = jet2(u, p).unwrap();
        let fr = graph_frame(&j).unwrap();
        let st = fr.newton_stack(sign);
        let s = support_data(&fr, p, j.value, v).unwrap();
        (fr, st, s)
    }

    #[test]
    fn calibration_selects_plus_dn() {
        let res = resolve_lr_shape_sign().unwrap();
        assert_eq!(res.sign, ShapeSign::PlusDN);
        assert!(res.residual_plus_dn < 1e-4);
        assert!(res.residual_minus_dn > 0.1);
    }

    #[test]
    fn frame_convention_gives_opposite_sign_for_g() {
        // With A = −D̄N the oracle sees div(P_r ∇g) = +(r+1) S_{r+1} f.
        let u = Builtin::paraboloid(2).unwrap();
        let p = [0.5, 0.2];
        for r in 0..2 {
            let c = lr_divergence_check(&u, &p, &[0.0, 0.0], r, TestFunction::G, 1e-3, ShapeSign::MinusDN).unwrap();
            assert!((c.discretized + c.closed_form).abs() < 1e-4, "{c:?}");
        }
    }

    #[test]
    fn paraboloid_origin_values() {
        let u = Builtin::paraboloid(2).unwrap();
        for sign in [ShapeSign::MinusDN, ShapeSign::PlusDN] {
            let (fr, st, s) = at(&u, &[0.0, 0.0], &[0.0, 0.0], sign);
            assert!((lr_g(&fr, &st, &s, 1).unwrap() + 8.0).abs() < 1e-12);
            assert!((lr_f(&u, &fr, &st, &s, 0, 1e-3, sign).unwrap() + 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_operators_vanish() {
        let u = Builtin::affine(vec![0.7, -0.2, 1.0], 2.0).unwrap();
        let p = [1.0, -2.0, 0.5];
        let v = [0.7, -0.2, 1.0];
        let (fr, st, s) = at(&u, &p, &v, ShapeSign::PlusDN);
        for r in 0..3 {
            assert_eq!(lr_g(&fr, &st, &s, r).unwrap(), 0.0);
            assert_eq!(lr_f(&u, &fr, &st, &s, r, 1e-3, ShapeSign::PlusDN).unwrap(), 0.0);
            let c = lr_divergence_check(&u, &p, &v, r, TestFunction::F, 1e-3, ShapeSign::PlusDN).unwrap();
            assert!(c.residual <= 1e-10);
        }
    }

    #[test]
    fn parabola_lr_f_agrees_with_divergence() {
        let u = parse("x1^2", 1).unwrap();
        let (fr, st, s) = at(&u, &[1.0], &[0.0], ShapeSign::PlusDN);
        let closed = lr_f(&u, &fr, &st, &s, 0, 1e-3, ShapeSign::PlusDN).unwrap();
        let c = lr_divergence_check(&u, &[1.0], &[0.0], 0, TestFunction::F, 1e-3, ShapeSign::PlusDN).unwrap();
        assert!((closed - c.discretized).abs() <= 5e-4);
    }

    #[test]
    fn paraboloid_origin_divergence_residual() {
        let u = Builtin::paraboloid(2).unwrap();
        let c = lr_divergence_check(&u, &[0.0, 0.0], &[0.0, 0.0], 0, TestFunction::G, 1e-3, ShapeSign::PlusDN).unwrap();
        assert!(c.residual <= 1e-4, "{c:?}");
    }

    #[test]
    fn second_order_convergence() {
        let u = Builtin::paraboloid(2).unwrap();
        let p = [0.5, 0.5];
        let r1 = lr_divergence_check(&u, &p, &[0.0, 0.0], 1, TestFunction::G, 2e-3, ShapeSign::PlusDN).unwrap();
        let r2 = lr_divergence_check(&u, &p, &[0.0, 0.0], 1, TestFunction::G, 1e-3, ShapeSign::PlusDN).unwrap();
        let ratio = r1.residual / r2.residual;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn r_out_of_range() {
        let u = Builtin::paraboloid(2).unwrap();
        let (fr, st, s) = at(&u, &[0.0, 0.0], &[0.0, 0.0], ShapeSign::PlusDN);
        assert_eq!(lr_g(&fr, &st, &s, 2), Err(Error::IndexOutOfRange { r: 2, n: 2 }));
        assert!(lr_divergence_check(&u, &[0.0, 0.0], &[0.0, 0.0], 2, TestFunction::F, 1e-3, ShapeSign::PlusDN).is_err());
    }
}
