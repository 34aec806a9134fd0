//! Pointwise data of each foliation family and charts of leaves and of the
//! ambient space. Points and vectors live in the embedding space: `R^{n+1}`
//! for flat ambients, `R^{n+2}` for the unit sphere `S^{n+1}`.

use nalgebra::{DMatrix, DVector};

use super::{FoliationFamily, FoliationSpec, SINGULAR_GUARD};
use crate::curvature::graph_frame;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::{gradient, jet2};
use crate::linalg::{elementary_symmetric, orthonormal_complement, richardson_derivative};

/// Step of the Richardson difference for `N(S_k)` on graph-translates.
pub const NORMAL_DERIVATIVE_STEP: f64 = 1e-3;

/// Normal, `X = D̄_N N` and shape operator at one ambient point, already in
/// the foliation's orientation.
#[derive(Debug, Clone)]
pub(crate) struct FieldData {
    pub normal: DVector<f64>,
    pub x: DVector<f64>,
    /// `A = −D̄N` as a map on the embedding space; only its action on
    /// leaf-tangent vectors is meaningful.
    pub shape: DMatrix<f64>,
    /// Ascending principal curvatures.
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
    pub leaf_parameter: f64,
}

impl FieldData {
    /// `P_r v = Σ_j (−1)^j S_{r−j} A^j v` for tangent `v`.
    pub fn newton_apply(&self, r: usize, v: &DVector<f64>) -> DVector<f64> {
        let mut out = v * self.s[r];
        let mut power = v.clone();
        for j in 1..=r {
            power = &self.shape * power;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            out += &power * (sign * self.s[r - j]);
        }
        out
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn oriented(
    spec: &FoliationSpec,
    normal: DVector<f64>,
    x: DVector<f64>,
    shape: DMatrix<f64>,
    lambda: Vec<f64>,
    t: f64,
) -> FieldData {
    let o = spec.orientation.sign();
    let mut lambda: Vec<f64> = lambda.into_iter().map(|l| l * o).collect();
    lambda.sort_by(f64::total_cmp);
    let s = elementary_symmetric(&lambda);
    FieldData { normal: normal * o, x, shape: shape * o, lambda, s, leaf_parameter: t }
}

pub(crate) fn check_point(spec: &FoliationSpec, q: &[f64]) -> Result<()> {
    let m = spec.ambient_dim();
    if q.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: q.len() });
    }
    if q.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameters("point has non-finite coordinates".into()));
    }
    if matches!(spec.family, FoliationFamily::GeodesicSpheres) {
        let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameters(format!("point is not on the unit sphere (|p| = {norm})")));
        }
    }
    Ok(())
}

/// Outward-oriented data, then the foliation's orientation applied.
pub(crate) fn field_data(spec: &FoliationSpec, q: &[f64]) -> Result<FieldData> {
    let n = spec.n;
    match &spec.family {
        FoliationFamily::GraphTranslates(u) => {
            let (normal, x, shape, lambda, t) = graph_data(u, q)?;
            Ok(oriented(spec, normal, x, shape, lambda, t))
        }
        FoliationFamily::ConcentricCylinders { r } => {
            let r = *r;
            let rho = q[..=r].iter().map(|c| c * c).sum::<f64>().sqrt();
            if rho <= SINGULAR_GUARD {
                return Err(Error::SingularSet { distance: rho });
            }
            let mut normal = DVector::zeros(n + 1);
            for i in 0..=r {
                normal[i] = q[i] / rho;
            }
            let mut shape = DMatrix::zeros(n + 1, n + 1);
            for i in 0..=r {
                for j in 0..=r {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    shape[(i, j)] = -(delta - normal[i] * normal[j]) / rho;
                }
            }
            let lambda: Vec<f64> = (0..n).map(|i| if i < r { -1.0 / rho } else { 0.0 }).collect();
            Ok(oriented(spec, normal, DVector::zeros(n + 1), shape, lambda, rho))
        }
        FoliationFamily::GeodesicSpheres => {
            let (t, p, normal) = sphere_frame(n, q)?;
            let cot = t.cos() / t.sin();
            let proj = DMatrix::identity(n + 2, n + 2) - &p * p.transpose() - &normal * normal.transpose();
            Ok(oriented(spec, normal, DVector::zeros(n + 2), proj * (-cot), vec![-cot; n], t))
        }
    }
}

/// Distance of `q` from the singular set, if the family has one.
pub(crate) fn singular_distance(spec: &FoliationSpec, q: &[f64]) -> Option<f64> {
    match spec.family {
        FoliationFamily::GraphTranslates(_) => None,
        FoliationFamily::ConcentricCylinders { r } => Some(q[..=r].iter().map(|c| c * c).sum::<f64>().sqrt()),
        FoliationFamily::GeodesicSpheres => {
            let norm = q.iter().map(|c| c * c).sum::<f64>().sqrt();
            let t = (q[spec.n + 1] / norm).clamp(-1.0, 1.0).acos();
            Some(t.min(std::f64::consts::PI - t))
        }
    }
}

/// `(t, P, ∂_t)` for a point of `S^{n+1}` at geodesic distance `t` from the
/// pole `e_{n+2}`.
fn sphere_frame(n: usize, q: &[f64]) -> Result<(f64, DVector<f64>, DVector<f64>)> {
    let p = DVector::from_column_slice(q).normalize();
    let t = p[n + 1].clamp(-1.0, 1.0).acos();
    let distance = t.min(std::f64::consts::PI - t);
    if distance <= SINGULAR_GUARD {
        return Err(Error::SingularSet { distance });
    }
    let (sin, cos) = t.sin_cos();
    let mut normal = DVector::zeros(n + 2);
    for i in 0..=n {
        normal[i] = cos * p[i] / sin;
    }
    normal[n + 1] = -sin;
    Ok((t, p, normal))
}

type GraphData = (DVector<f64>, DVector<f64>, DMatrix<f64>, Vec<f64>, f64);

fn graph_data(u: &ScalarField, q: &[f64]) -> Result<GraphData> {
    let n = u.dim();
    let jet = jet2(u, &q[..n])?;
    let fr = graph_frame(&jet)?;
    let h = jet.hessian_matrix();
    let grad = &fr.gradient;
    let w = fr.w;
    let hg = &h * grad;
    let w3 = w * w * w;
    // X = Σ_i N^i ∂_i N with ∂_i N = (−H e_i, 0)/W − (−∇u, 1)(H∇u)_i/W³
    let mut x = DVector::zeros(n + 1);
    for i in 0..n {
        let ni = -grad[i] / w;
        for a in 0..n {
            x[a] += ni * (-h[(a, i)] / w + grad[a] * hg[i] / w3);
        }
        x[n] += ni * (-hg[i] / w3);
    }
    let e = graph_tangents(grad);
    let ginv_et = fr
        .metric
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigenFailure("metric is not positive definite".into()))?
        .solve(&e.transpose());
    let shape = &e * &fr.shape * ginv_et;
    Ok((fr.normal.clone(), x, shape, fr.principal_curvatures.clone(), q[n] - jet.value))
}

fn graph_tangents(grad: &DVector<f64>) -> DMatrix<f64> {
    let n = grad.len();
    let mut e = DMatrix::zeros(n + 1, n);
    for i in 0..n {
        e[(i, i)] = 1.0;
        e[(n, i)] = grad[i];
    }
    e
}

/// `N(S_k)` for `k = 1..=n`, in the foliation's orientation.
pub(crate) fn normal_derivatives(spec: &FoliationSpec, q: &[f64], data: &FieldData) -> Result<Vec<f64>> {
    let n = spec.n;
    let o = spec.orientation.sign();
    let outward: Vec<f64> = match &spec.family {
        FoliationFamily::GraphTranslates(u) => {
            // S_k depends on x only; differentiate along the x-part of N.
            let dir: Vec<f64> = (0..n).map(|i| data.normal[i] * o).collect();
            if dir.iter().all(|d| *d == 0.0) {
                vec![0.0; n]
            } else {
                let mut out = Vec::with_capacity(n);
                for k in 1..=n {
                    out.push(richardson_derivative(NORMAL_DERIVATIVE_STEP, |s| {
                        let xs: Vec<f64> = (0..n).map(|i| q[i] + s * dir[i]).collect();
                        let fr = graph_frame(&jet2(u, &xs)?)?;
                        Ok(elementary_symmetric(&fr.principal_curvatures)[k])
                    })?);
                }
                out
            }
        }
        FoliationFamily::ConcentricCylinders { r } => {
            let rho = data.leaf_parameter;
            // S_k = C(r,k) (−1/ρ)^k
            (1..=n)
                .map(|k| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    -(k as f64) * binomial(*r, k) * sign * rho.powi(-(k as i32) - 1)
                })
                .collect()
        }
        FoliationFamily::GeodesicSpheres => {
            let t = data.leaf_parameter;
            let cot = t.cos() / t.sin();
            let csc2 = 1.0 / (t.sin() * t.sin());
            // S_k = C(n,k) (−cot t)^k
            (1..=n).map(|k| binomial(n, k) * k as f64 * (-cot).powi(k as i32 - 1) * csc2).collect()
        }
    };
    // N'(S'_k) = o^{k+1} N(S_k) for N' = oN
    Ok(outward.into_iter().enumerate().map(|(i, v)| if o < 0.0 && (i + 1) % 2 == 0 { -v } else { v }).collect())
}

/// A chart `c ↦ (point, tangent vectors as columns)`.
pub(crate) type Chart = Box<dyn Fn(&[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> + Sync>;

/// Chart of the leaf through `p`, centred at `p`.
pub(crate) fn leaf_chart(spec: &FoliationSpec, p: &[f64]) -> Result<Chart> {
    let n = spec.n;
    match &spec.family {
        FoliationFamily::GraphTranslates(u) => {
            let u = u.clone();
            let x0: Vec<f64> = p[..n].to_vec();
            let t0 = p[n] - u.evaluate(&x0)?;
            Ok(Box::new(move |c| {
                let x: Vec<f64> = (0..n).map(|i| x0[i] + c[i]).collect();
                let (val, grad) = gradient(&u, &x);
                let mut q = DVector::zeros(n + 1);
                q.rows_mut(0, n).copy_from_slice(&x);
                q[n] = val + t0;
                Ok((q, graph_tangents(&DVector::from_vec(grad))))
            }))
        }
        FoliationFamily::ConcentricCylinders { r } => {
            let r = *r;
            let y0 = DVector::from_column_slice(&p[..=r]);
            let rho = y0.norm();
            if rho <= SINGULAR_GUARD {
                return Err(Error::SingularSet { distance: rho });
            }
            let yhat = &y0 / rho;
            let b = orthonormal_complement(&yhat);
            let z0: Vec<f64> = p[r + 1..].to_vec();
            Ok(Box::new(move |c| {
                let (q_y, e_y) = projected_sphere(&yhat, &b, &c[..r], rho);
                let mut q = DVector::zeros(n + 1);
                q.rows_mut(0, r + 1).copy_from(&q_y);
                let mut e = DMatrix::zeros(n + 1, n);
                e.view_mut((0, 0), (r + 1, r)).copy_from(&e_y);
                for k in 0..n - r {
                    q[r + 1 + k] = z0[k] + c[r + k];
                    e[(r + 1 + k, r + k)] = 1.0;
                }
                Ok((q, e))
            }))
        }
        FoliationFamily::GeodesicSpheres => {
            let (t, pp, _) = sphere_frame(n, p)?;
            let (sin, cos) = t.sin_cos();
            let omega = DVector::from_iterator(n + 1, (0..=n).map(|i| pp[i] / sin)).normalize();
            let b = orthonormal_complement(&omega);
            Ok(Box::new(move |c| {
                let (q_w, e_w) = projected_sphere(&omega, &b, c, sin);
                let mut q = DVector::zeros(n + 2);
                q.rows_mut(0, n + 1).copy_from(&q_w);
                q[n + 1] = cos;
                let mut e = DMatrix::zeros(n + 2, n);
                e.view_mut((0, 0), (n + 1, n)).copy_from(&e_w);
                Ok((q, e))
            }))
        }
    }
}

/// `ρ (ŵ)` with `w = center + Bθ`, and its derivatives `ρ (I − ŵŵᵀ) B / |w|`.
fn projected_sphere(center: &DVector<f64>, b: &DMatrix<f64>, theta: &[f64], rho: f64) -> (DVector<f64>, DMatrix<f64>) {
    let w = center + b * DVector::from_column_slice(theta);
    let len = w.norm();
    let what = &w / len;
    let m = center.len();
    let proj = DMatrix::identity(m, m) - &what * what.transpose();
    (what * rho, proj * b * (rho / len))
}

/// Chart of the ambient space centred at `p`.
pub(crate) fn ambient_chart(spec: &FoliationSpec, p: &[f64]) -> Chart {
    let m = spec.ambient_dim();
    let p = DVector::from_column_slice(p);
    if spec.ambient_curvature() == 0.0 {
        Box::new(move |c| Ok((&p + DVector::from_column_slice(c), DMatrix::identity(m, m))))
    } else {
        let pn = p.normalize();
        let t = orthonormal_complement(&pn);
        Box::new(move |c| {
            let (q, j) = projected_sphere(&pn, &t, c, 1.0);
            Ok((q, j))
        })
    }
}
