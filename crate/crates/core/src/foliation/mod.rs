//! Codimension-one foliations of space forms and the divergence identities
//! for `P_r X`, `X = D̄_N N`.
//!
//! Three families are provided: vertical translates of a graph in `R^{n+1}`,
//! concentric cylinders `S^r_ρ × R^{n−r}` in `R^{n+1}`, and geodesic spheres
//! about the pole `e_{n+2}` of the unit sphere `S^{n+1} ⊂ R^{n+2}`.

mod audit;
mod families;
mod identities;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curvature::{newton_stack, NewtonStack};
use crate::error::{Error, Result};
use crate::field::ScalarField;

pub use audit::{r_minimal_audit, AuditSample, RMinimalAudit};
pub use families::NORMAL_DERIVATIVE_STEP;
pub use identities::{
    ambient_identity_check, calibrate_sigma, convergence_order, leaf_identity_lhs, leaf_identity_rhs, residual_sweep,
    AmbientIdentityCheck, Identity, LeafIdentityRhs, SigmaCalibration, SweepRow, CURVATURE_SIGN,
};

/// Minimum distance from the singular set of a foliation.
pub const SINGULAR_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `N` points toward increasing leaf parameter.
    #[default]
    Outward,
    Inward,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Outward => 1.0,
            Orientation::Inward => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FoliationFamily {
    GraphTranslates(ScalarField),
    ConcentricCylinders { r: usize },
    GeodesicSpheres,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoliationSpec {
    pub family: FoliationFamily,
    /// Leaf dimension.
    pub n: usize,
    pub orientation: Orientation,
}

impl FoliationSpec {
    pub fn graph_translates(u: ScalarField, orientation: Orientation) -> Self {
        let n = u.dim();
        FoliationSpec { family: FoliationFamily::GraphTranslates(u), n, orientation }
    }

    /// `S^r_ρ × R^{n−r}` with `1 ≤ r ≤ n − 1`.
    pub fn concentric_cylinders(n: usize, r: usize, orientation: Orientation) -> Result<Self> {
        if r == 0 || r >= n {
            return Err(Error::InvalidParameters(format!(
                "cylinder index must satisfy 1 <= r <= n-1, got r={r}, n={n}"
            )));
        }
        Ok(FoliationSpec { family: FoliationFamily::ConcentricCylinders { r }, n, orientation })
    }

    pub fn geodesic_spheres(n: usize, orientation: Orientation) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters("leaf dimension must be positive".into()));
        }
        Ok(FoliationSpec { family: FoliationFamily::GeodesicSpheres, n, orientation })
    }

    pub fn ambient_curvature(&self) -> f64 {
        match self.family {
            FoliationFamily::GeodesicSpheres => 1.0,
            _ => 0.0,
        }
    }

    /// Dimension of the embedding space of the ambient.
    pub fn ambient_dim(&self) -> usize {
        match self.family {
            FoliationFamily::GeodesicSpheres => self.n + 2,
            _ => self.n + 1,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            FoliationFamily::GraphTranslates(_) => "graph-translates",
            FoliationFamily::ConcentricCylinders { .. } => "concentric-cylinders",
            FoliationFamily::GeodesicSpheres => "geodesic-spheres",
        }
    }

    /// Point of the geodesic sphere at distance `t` in unit direction `ω ⊥ e_{n+2}`.
    pub fn sphere_point(t: f64, omega: &[f64]) -> Vec<f64> {
        let len = omega.iter().map(|c| c * c).sum::<f64>().sqrt();
        omega.iter().map(|c| t.sin() * c / len).chain(std::iter::once(t.cos())).collect()
    }
}

/// Normal, `X` and leaf curvature data at a regular point.
#[derive(Debug, Clone)]
pub struct FoliationSample {
    pub point: Vec<f64>,
    /// Translate `t`, radius `ρ` or geodesic distance `t`.
    pub leaf_parameter: f64,
    pub ambient_curvature: f64,
    pub normal: DVector<f64>,
    pub x: DVector<f64>,
    /// Leaf-chart tangent vectors at the point, as columns.
    pub tangent_basis: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    /// Chart components of `X`.
    pub x_chart: DVector<f64>,
    /// Shape operator `A = −D̄N` in the chart basis.
    pub shape: DMatrix<f64>,
    pub principal_curvatures: Vec<f64>,
    pub stack: NewtonStack,
    /// Entry `r` is `N(S_{r+1})`.
    pub normal_derivative_s: Vec<f64>,
}

impl FoliationSample {
    pub fn n(&self) -> usize {
        self.principal_curvatures.len()
    }

    /// `⟨X, N⟩`.
    pub fn x_dot_normal(&self) -> f64 {
        self.x.dot(&self.normal)
    }

    pub fn normal_norm(&self) -> f64 {
        self.normal.norm()
    }

    pub fn report(&self) -> SampleReport {
        let rows = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        SampleReport {
            point: self.point.clone(),
            leaf_parameter: self.leaf_parameter,
            ambient_curvature: self.ambient_curvature,
            normal: self.normal.iter().copied().collect(),
            x: self.x.iter().copied().collect(),
            shape: rows(&self.shape),
            principal_curvatures: self.principal_curvatures.clone(),
            s: self.stack.s.clone(),
            normal_derivative_s: self.normal_derivative_s.clone(),
            x_dot_normal: self.x_dot_normal(),
            normal_norm: self.normal_norm(),
        }
    }
}

/// Serializable view of a [`FoliationSample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleReport {
    pub point: Vec<f64>,
    pub leaf_parameter: f64,
    pub ambient_curvature: f64,
    pub normal: Vec<f64>,
    pub x: Vec<f64>,
    pub shape: Vec<Vec<f64>>,
    pub principal_curvatures: Vec<f64>,
    pub s: Vec<f64>,
    pub normal_derivative_s: Vec<f64>,
    pub x_dot_normal: f64,
    pub normal_norm: f64,
}

/// Chart components `g⁻¹ Eᵀ v` of an ambient vector in the basis `E`, with
/// `g = EᵀE` and `√det g`.
pub(crate) fn chart_components(e: &DMatrix<f64>, v: &DVector<f64>) -> Result<(DMatrix<f64>, f64, DVector<f64>)> {
    let g = e.transpose() * e;
    let chol =
        g.clone().cholesky().ok_or_else(|| Error::EigenFailure("chart metric is not positive definite".into()))?;
    let sqrt_det = chol.l().diagonal().product();
    let comps = chol.solve(&(e.transpose() * v));
    Ok((g, sqrt_det, comps))
}

pub fn sample(spec: &FoliationSpec, point: &[f64]) -> Result<FoliationSample> {
    families::check_point(spec, point)?;
    let data = families::field_data(spec, point)?;
    let chart = families::leaf_chart(spec, point)?;
    let (_, e) = chart(&vec![0.0; spec.n])?;
    let (metric, _, x_chart) = chart_components(&e, &data.x)?;
    let ginv =
        metric.clone().cholesky().ok_or_else(|| Error::EigenFailure("chart metric is not positive definite".into()))?;
    let shape = ginv.solve(&(e.transpose() * &data.shape * &e));
    let stack = newton_stack(&shape, &data.lambda)?;
    let normal_derivative_s = families::normal_derivatives(spec, point, &data)?;
    Ok(FoliationSample {
        point: point.to_vec(),
        leaf_parameter: data.leaf_parameter,
        ambient_curvature: spec.ambient_curvature(),
        normal: data.normal,
        x: data.x,
        tangent_basis: e,
        metric,
        x_chart,
        shape,
        principal_curvatures: data.lambda,
        stack,
        normal_derivative_s,
    })
}
