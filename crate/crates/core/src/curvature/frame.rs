use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::newton::{newton_stack, NewtonStack};
use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::linalg::generalized_symmetric_eigen;

/// Sign convention of the shape operator relative to the unit normal `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeSign {
    /// `A X = −D̄_X N`. Frames are always built in this convention.
    #[serde(rename = "minus-dn")]
    MinusDN,
    /// `A X = +D̄_X N`.
    #[serde(rename = "plus-dn")]
    PlusDN,
}

impl ShapeSign {
    /// Factor relative to the frame convention.
    pub fn factor(self) -> f64 {
        match self {
            ShapeSign::MinusDN => 1.0,
            ShapeSign::PlusDN => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ShapeSign::MinusDN => "A = -D_X N",
            ShapeSign::PlusDN => "A = +D_X N",
        }
    }
}

/// Geometry of the graph `{(x, u(x))}` at one point, in the graph chart.
///
/// Tangent vectors are represented by chart components `ξ ∈ Rⁿ`, whose
/// ambient image is `(ξ, ⟨∇u, ξ⟩)`. The shape operator is `A = −D̄N` for the
/// upward normal, i.e. `A = G⁻¹B` with `B = Hess u / W`.
#[derive(Debug, Clone)]
pub struct GraphFrame {
    pub base_point: Vec<f64>,
    pub gradient: DVector<f64>,
    pub w: f64,
    pub normal: DVector<f64>,
    pub metric: DMatrix<f64>,
    pub second_ff: DMatrix<f64>,
    pub shape: DMatrix<f64>,
    /// Ascending eigenvalues of `B v = λ G v`.
    pub principal_curvatures: Vec<f64>,
    /// `G`-orthonormal principal directions (columns) in chart components.
    pub principal_directions: DMatrix<f64>,
}

pub fn graph_frame(jet: &Jet2) -> Result<GraphFrame> {
    if !jet.is_finite() {
        return Err(Error::InvalidParameters("jet has non-finite entries".into()));
    }
    let n = jet.dim();
    let grad = jet.gradient_vector();
    let w = (1.0 + grad.norm_squared()).sqrt();
    let mut normal = DVector::zeros(n + 1);
    for i in 0..n {
        normal[i] = -grad[i] / w;
    }
    normal[n] = 1.0 / w;
    let metric = DMatrix::identity(n, n) + &grad * grad.transpose();
    let second_ff = jet.hessian_matrix() / w;
    let shape = metric
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigenFailure("metric is not positive definite".into()))?
        .solve(&second_ff);
    let eig = generalized_symmetric_eigen(&second_ff, &metric)?;
    Ok(GraphFrame {
        base_point: jet.point.clone(),
        gradient: grad,
        w,
        normal,
        metric,
        second_ff,
        shape,
        principal_curvatures: eig.values,
        principal_directions: eig.vectors,
    })
}

impl GraphFrame {
    pub fn dim(&self) -> usize {
        self.base_point.len()
    }

    /// Shape operator in the requested convention.
    pub fn shape_operator(&self, sign: ShapeSign) -> DMatrix<f64> {
        &self.shape * sign.factor()
    }

    /// Ascending principal curvatures in the requested convention.
    pub fn principal_curvatures_with(&self, sign: ShapeSign) -> Vec<f64> {
        let mut l: Vec<f64> = self.principal_curvatures.iter().map(|x| x * sign.factor()).collect();
        l.sort_by(f64::total_cmp);
        l
    }

    pub fn newton_stack(&self, sign: ShapeSign) -> NewtonStack {
        newton_stack(&self.shape_operator(sign), &self.principal_curvatures_with(sign))
            .expect("frame shape and curvatures have matching dimension")
    }

    /// `√det G`; equals `W` for a graph.
    pub fn sqrt_det_metric(&self) -> f64 {
        self.w
    }

    pub fn to_ambient(&self, xi: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut out = DVector::zeros(n + 1);
        out.rows_mut(0, n).copy_from(xi);
        out[n] = self.gradient.dot(xi);
        out
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.metric * b))
    }

    pub fn metric_norm(&self, xi: &DVector<f64>) -> f64 {
        self.inner(xi, xi).max(0.0).sqrt()
    }

    /// `max_k ‖B v_k − λ_k G v_k‖`.
    pub fn eigen_residual(&self) -> f64 {
        (0..self.dim())
            .map(|k| {
                let v = self.principal_directions.column(k);
                (&self.second_ff * v - (&self.metric * v) * self.principal_curvatures[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `‖GA − (GA)ᵀ‖_max`, zero when `A` is self-adjoint for the induced metric.
    pub fn self_adjointness_defect(&self) -> f64 {
        let ga = &self.metric * &self.shape;
        (&ga - ga.transpose()).amax()
    }
}
