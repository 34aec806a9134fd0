use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::elementary_symmetric;

/// `S_0..S_n` and the Newton tensors `P_0..P_n` of one shape operator.
#[derive(Debug, Clone)]
pub struct NewtonStack {
    /// The operator the stack was built from.
    pub shape: DMatrix<f64>,
    /// `S_0 = 1, S_1, …, S_n`.
    pub s: Vec<f64>,
    /// `P_0 = I, P_1, …, P_n`.
    pub p: Vec<DMatrix<f64>>,
    /// `max_r ‖P_r‖` in the metric for which `A` is self-adjoint.
    pub norm_bound: f64,
}

/// Builds the stack with `S_r` from the eigenvalues and `P_r = S_r I − A P_{r−1}`.
pub fn newton_stack(a: &DMatrix<f64>, lambda: &[f64]) -> Result<NewtonStack> {
    let n = a.nrows();
    if a.ncols() != n || lambda.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: lambda.len() });
    }
    let s = elementary_symmetric(lambda);
    let id = DMatrix::<f64>::identity(n, n);
    let mut p = Vec::with_capacity(n + 1);
    p.push(id.clone());
    for r in 1..=n {
        let next = &id * s[r] - a * &p[r - 1];
        p.push(next);
    }
    let norm_bound = (0..=n).map(|r| newton_tensor_norm(lambda, r)).fold(0.0, f64::max);
    Ok(NewtonStack { shape: a.clone(), s, p, norm_bound })
}

/// Operator norm of `P_r` for a self-adjoint `A` with eigenvalues `λ`:
/// `P_r` shares the eigenvectors of `A` and acts on the `i`-th one by
/// `S_r(λ with λ_i removed)`.
pub fn newton_tensor_norm(lambda: &[f64], r: usize) -> f64 {
    if r == 0 {
        return 1.0;
    }
    (0..lambda.len())
        .map(|i| {
            let rest: Vec<f64> = lambda.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &l)| l).collect();
            elementary_symmetric(&rest).get(r).copied().unwrap_or(0.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Residuals of the trace identities at one index `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceResiduals {
    /// `tr P_r − (n−r) S_r`
    pub trace_p: f64,
    /// `tr(A P_r) − (r+1) S_{r+1}`
    pub trace_ap: f64,
    /// `tr(A² P_r) − (S_1 S_{r+1} − (r+2) S_{r+2})`
    pub trace_a2p: f64,
    /// Scale the residuals should be compared against (≥ 1).
    pub scale: f64,
}

impl TraceResiduals {
    pub fn max_relative(&self) -> f64 {
        self.trace_p.abs().max(self.trace_ap.abs()).max(self.trace_a2p.abs()) / self.scale
    }
}

impl NewtonStack {
    pub fn n(&self) -> usize {
        self.s.len() - 1
    }

    /// `S_k`, with `S_k = 0` for `k > n`.
    pub fn s_at(&self, k: usize) -> f64 {
        self.s.get(k).copied().unwrap_or(0.0)
    }

    /// `Σ_{j=0}^{r} (−1)^j S_{r−j} A^j`.
    pub fn polynomial_form(&self, r: usize) -> DMatrix<f64> {
        let n = self.n();
        let mut power = DMatrix::<f64>::identity(n, n);
        let mut out = DMatrix::<f64>::zeros(n, n);
        for j in 0..=r {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            out += &power * (sign * self.s[r - j]);
            power = &power * &self.shape;
        }
        out
    }

    /// `max_r max_ij |P_r − polynomial_form(r)|`.
    pub fn polynomial_form_defect(&self) -> f64 {
        (0..=self.n()).map(|r| (&self.p[r] - self.polynomial_form(r)).amax()).fold(0.0, f64::max)
    }

    /// `tr(A² P_r)`.
    pub fn trace_a2p(&self, r: usize) -> f64 {
        (&self.shape * &self.shape * &self.p[r]).trace()
    }

    pub fn trace_residuals(&self, r: usize) -> TraceResiduals {
        let n = self.n();
        let a = &self.shape;
        let p = &self.p[r];
        let tp = p.trace();
        let tap = (a * p).trace();
        let ta2p = self.trace_a2p(r);
        let s = |k| self.s_at(k);
        let rhs_p = (n - r) as f64 * s(r);
        let rhs_ap = (r + 1) as f64 * s(r + 1);
        let t1 = s(1) * s(r + 1);
        let t2 = (r + 2) as f64 * s(r + 2);
        let scale = [1.0, tp.abs(), rhs_p.abs(), tap.abs(), rhs_ap.abs(), ta2p.abs(), t1.abs(), t2.abs()]
            .into_iter()
            .fold(0.0, f64::max);
        TraceResiduals { trace_p: tp - rhs_p, trace_ap: tap - rhs_ap, trace_a2p: ta2p - (t1 - t2), scale }
    }

    /// `max_ij |P_n|` relative to `max(1, max_r ‖P_r‖_max)`.
    pub fn cayley_hamilton_defect(&self) -> f64 {
        let scale = self.p.iter().map(|m| m.amax()).fold(1.0, f64::max);
        self.p[self.n()].amax() / scale
    }
}
