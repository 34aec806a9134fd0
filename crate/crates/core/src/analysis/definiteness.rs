use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::elementary_symmetric;

/// Below this `S_1` or `S_2` counts as zero.
pub const DEFINITENESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DefinitenessReport {
    pub is_positive_definite: bool,
    /// The eigenvalues were negated to make `S_1 ≥ 0`.
    pub orientation_flipped: bool,
    pub s1: f64,
    pub s2: f64,
    /// Eigenvalues `S_1 − λ_i` of `P_1` after orientation.
    pub p1_eigenvalues: Vec<f64>,
    /// Index of the smallest `P_1` eigenvalue.
    pub witness_index: usize,
    pub witness_value: f64,
}

/// Whether `P_1 = S_1 I − A` is positive definite, after choosing the
/// orientation (`orientation_sign · λ`, flipped if needed) so that `S_1 ≥ 0`.
///
/// When `S_2 > 0`, `S_1² = |A|² + 2S_2 > λ_i²` forces a positive answer;
/// anything else is reported as an internal error.
pub fn p1_definiteness(lambda: &[f64], orientation_sign: f64) -> Result<DefinitenessReport> {
    if lambda.is_empty() {
        return Err(Error::InvalidParameters("eigenvalue vector is empty".into()));
    }
    if orientation_sign != 1.0 && orientation_sign != -1.0 {
        return Err(Error::InvalidParameters(format!("orientation sign must be ±1, got {orientation_sign}")));
    }
    let mut lam: Vec<f64> = lambda.iter().map(|l| l * orientation_sign).collect();
    let mut s1: f64 = lam.iter().sum();
    let orientation_flipped = s1 < 0.0;
    if orientation_flipped {
        lam.iter_mut().for_each(|l| *l = -*l);
        s1 = -s1;
    }
    let s2 = elementary_symmetric(&lam).get(2).copied().unwrap_or(0.0);
    let scale = lam.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let p1_eigenvalues: Vec<f64> = lam.iter().map(|l| s1 - l).collect();
    let (witness_index, witness_value) = p1_eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let is_positive_definite = witness_value > 0.0;
    let s2_positive = s2 > DEFINITENESS_TOL * scale * scale;
    if s2_positive && s1 <= DEFINITENESS_TOL * scale {
        return Err(Error::Internal(format!("S_1 = {s1} with S_2 = {s2} > 0 violates S_1² ≥ 2S_2")));
    }
    if s2_positive && !is_positive_definite {
        return Err(Error::Internal(format!(
            "S_2 = {s2} > 0 but P_1 has eigenvalue {witness_value} at index {witness_index}"
        )));
    }
    Ok(DefinitenessReport {
        is_positive_definite,
        orientation_flipped,
        s1,
        s2,
        p1_eigenvalues,
        witness_index,
        witness_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_example() {
        let rep = p1_definiteness(&[1.0, 2.0], 1.0).unwrap();
        assert!(rep.is_positive_definite);
        assert_eq!(rep.s2, 2.0);
        assert_eq!(rep.p1_eigenvalues, vec![2.0, 1.0]);
        assert!(!rep.orientation_flipped);
    }

    #[test]
    fn indefinite_example() {
        let rep = p1_definiteness(&[1.0, -1.0], 1.0).unwrap();
        assert!(!rep.is_positive_definite);
        assert_eq!(rep.s2, -1.0);
        assert_eq!((rep.witness_index, rep.witness_value), (0, -1.0));
    }

    #[test]
    fn orientation_is_normalised() {
        let rep = p1_definiteness(&[-1.0, -2.0], 1.0).unwrap();
        assert!(rep.orientation_flipped);
        assert_eq!(rep.s1, 3.0);
        assert!(rep.is_positive_definite);
        let same = p1_definiteness(&[1.0, 2.0], -1.0).unwrap();
        assert_eq!(same.s1, 3.0);
        assert!(same.orientation_flipped);
    }

    #[test]
    fn zero_vector_is_not_definite() {
        let rep = p1_definiteness(&[0.0, 0.0, 0.0], 1.0).unwrap();
        assert!(!rep.is_positive_definite);
    }

    #[test]
    fn bad_inputs() {
        assert!(p1_definiteness(&[], 1.0).is_err());
        assert!(p1_definiteness(&[1.0], 0.5).is_err());
    }
}
