use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::jet::gradient;
use crate::quadrature::{BallRule, MAX_TENSOR_DIM, MONTE_CARLO_SEED};

/// Successive truncated-integral increments below this (times `max(1, I)`)
/// count as converged.
pub const INCREMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrabilityVerdict {
    Converged,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegrabilityReport {
    pub radii: Vec<f64>,
    pub truncated_integrals: Vec<f64>,
    /// `sup_{|x| = R} |∇u − V|` at each radius.
    pub sphere_sups: Vec<f64>,
    /// `a` in `sup ~ R^{−a}`, fitted over the last three radii.
    pub fitted_decay_exponent: Option<f64>,
    /// The sphere sups vanish (or underflow) in the tail.
    pub tail_vanishes: bool,
    pub verdict: IntegrabilityVerdict,
    pub limit_estimate: Option<f64>,
    pub mode: String,
    pub quadrature_order: usize,
    pub seed: Option<u64>,
}

pub(crate) fn check_schedule(radii: &[f64]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::ScheduleTooShort { min: 3 });
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameters("radius schedule must be positive and increasing".into()));
    }
    Ok(())
}

/// Decay fit and verdict shared by the integrability and flux diagnostics.
pub(crate) struct TailAnalysis {
    pub exponent: Option<f64>,
    pub tail_vanishes: bool,
    pub verdict: IntegrabilityVerdict,
    pub limit: Option<f64>,
}

pub(crate) fn analyse_tail(radii: &[f64], integrals: &[f64], sups: &[f64], n: usize) -> TailAnalysis {
    let k = radii.len();
    let tail = k - 3..k;
    let positive: Vec<(f64, f64)> =
        tail.clone().filter(|&i| sups[i] > 0.0).map(|i| (radii[i].ln(), sups[i].ln())).collect();
    let last_positive = sups[k - 1] > 0.0;
    let tail_vanishes = !last_positive;
    let exponent = if positive.len() >= 2 && last_positive {
        let m = positive.len() as f64;
        let mx = positive.iter().map(|p| p.0).sum::<f64>() / m;
        let my = positive.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = positive.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = positive.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(-sxy / sxx)
    } else {
        None
    };

    let last = integrals[k - 1];
    let tol = INCREMENT_TOL * last.abs().max(1.0);
    let inc_last = integrals[k - 1] - integrals[k - 2];
    let inc_prev = integrals[k - 2] - integrals[k - 3];
    let decays = tail_vanishes || exponent.is_some_and(|a| a > n as f64);
    let slope_last = inc_last / (radii[k - 1] - radii[k - 2]);
    let slope_prev = inc_prev / (radii[k - 2] - radii[k - 3]);

    let verdict = if inc_last <= tol && inc_prev <= tol && decays {
        IntegrabilityVerdict::Converged
    } else if slope_last > tol && slope_last > slope_prev * (1.0 + 1e-3) {
        // superlinear growth in R
        IntegrabilityVerdict::Diverging
    } else if slope_last > tol && slope_last >= slope_prev * (1.0 - 1e-9) && exponent.is_some_and(|a| a <= n as f64) {
        // at least linear growth with a non-integrable power-law tail
        IntegrabilityVerdict::Diverging
    } else {
        IntegrabilityVerdict::Inconclusive
    };
    TailAnalysis {
        exponent,
        tail_vanishes,
        verdict,
        limit: (verdict == IntegrabilityVerdict::Converged).then_some(last),
    }
}

/// Truncated integrals `∫_{|x| ≤ R_k} |∇u − V| dx` over a radius schedule.
pub fn l1_integrability(
    u: &ScalarField,
    v: &[f64],
    radii: &[f64],
    quadrature_order: usize,
) -> Result<IntegrabilityReport> {
    let n = u.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    check_schedule(radii)?;
    let rule = BallRule::new(n, quadrature_order)?;
    let integrand = |x: &[f64]| -> f64 {
        let (_, g) = gradient(u, x);
        g.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    };
    let truncated_integrals = rule.nested_ball_integrals(radii, integrand);
    let sphere_sups: Vec<f64> = radii.iter().map(|&r| rule.sphere().sup_on_sphere(r, integrand)).collect();
    let tail = analyse_tail(radii, &truncated_integrals, &sphere_sups, n);
    let tensor = n <= MAX_TENSOR_DIM;
    Ok(IntegrabilityReport {
        radii: radii.to_vec(),
        truncated_integrals,
        sphere_sups,
        fitted_decay_exponent: tail.exponent,
        tail_vanishes: tail.tail_vanishes,
        verdict: tail.verdict,
        limit_estimate: tail.limit,
        mode: if tensor { "tensor-gauss-legendre".into() } else { "monte-carlo".into() },
        quadrature_order,
        seed: (!tensor).then_some(MONTE_CARLO_SEED),
    })
}
