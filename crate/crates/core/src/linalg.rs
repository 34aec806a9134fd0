//! Small dense linear-algebra and differencing helpers shared by the
//! curvature, analysis and foliation modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `S_0..S_n` of `λ`, from the coefficients of `Π (1 + t λ_i)`.
pub fn elementary_symmetric(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &l) in lambda.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += l * e[k - 1];
        }
    }
    e
}

/// Solution of `B v = λ G v` with `G` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `G`-orthonormal eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<f64>,
}

/// Reduces `B v = λ G v` to a standard symmetric problem through the
/// Cholesky factor `G = L Lᵀ`: `C = L⁻¹ B L⁻ᵀ`, `v = L⁻ᵀ y`.
pub fn generalized_symmetric_eigen(b: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<GeneralizedEigen> {
    let n = b.nrows();
    let chol = g.clone().cholesky().ok_or_else(|| Error::EigenFailure("metric is not positive definite".into()))?;
    let l = chol.l();
    let linv_b = l.solve_lower_triangular(b).ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&linv_b.transpose())
        .ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        values.push(eig.eigenvalues[i]);
        let y = eig.eigenvectors.column(i).into_owned();
        let v = lt.solve_upper_triangular(&y).ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
        vectors.set_column(k, &v);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    Ok(GeneralizedEigen { values, vectors })
}

/// Orthonormal basis of `v⊥` in `R^m` (columns), from a Householder reflector.
pub fn orthonormal_complement(v: &DVector<f64>) -> DMatrix<f64> {
    let m = v.len();
    let unit = v.normalize();
    // H = I − 2wwᵀ maps e_1 to ±unit; its remaining columns span unit⊥.
    let sign = if unit[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = unit.clone() * sign;
    w[0] -= 1.0;
    let norm = w.norm();
    let h = if norm < 1e-300 {
        DMatrix::identity(m, m)
    } else {
        let w = w / norm;
        DMatrix::identity(m, m) - (&w * w.transpose()) * 2.0
    };
    h.columns(1, m - 1).into_owned()
}

/// Coordinate divergence `(1/√g) ∂_i (√g Y^i)` at the chart origin by central
/// differences. `field(c)` returns `(√g, Y)` at chart coordinates `c`.
pub fn coordinate_divergence<F>(dim: usize, h: f64, field: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<(f64, DVector<f64>)>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameters(format!("step must be positive, got {h}")));
    }
    let origin = vec![0.0; dim];
    let (sqrt_g0, _) = field(&origin)?;
    let mut c = origin.clone();
    let mut total = 0.0;
    for i in 0..dim {
        c[i] = h;
        let (jp, yp) = field(&c)?;
        c[i] = -h;
        let (jm, ym) = field(&c)?;
        c[i] = 0.0;
        total += (jp * yp[i] - jm * ym[i]) / (2.0 * h);
    }
    Ok(total / sqrt_g0)
}

/// Central difference `[φ(h) − φ(−h)] / 2h` with one Richardson step.
pub fn richardson_derivative<F>(h: f64, phi: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let d = |s: f64| -> Result<f64> { Ok((phi(s)? - phi(-s)?) / (2.0 * s)) };
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}
