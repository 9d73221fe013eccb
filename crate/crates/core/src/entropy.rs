//! Entanglement entropies in natural-log units.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Weights (Schmidt probabilities or density-matrix eigenvalues) at or
/// below this value are dropped before any entropy is evaluated.
pub const WEIGHT_CUTOFF: f64 = 1e-12;

/// Binary entropy `-x ln x - (1-x) ln(1-x)` with `0 ln 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let mut s = 0.0;
    if x > 0.0 && x < 1.0 {
        s -= x * x.ln();
        s -= (1.0 - x) * (-x).ln_1p();
    }
    s
}

/// Rényi entropy of a single two-level spectrum `{x, 1-x}`.
pub fn binary_renyi(x: f64, alpha: f64) -> f64 {
    (x.powf(alpha) + (1.0 - x).powf(alpha)).ln() / (1.0 - alpha)
}

/// Checks a list of Rényi orders: each must be positive, finite and != 1.
pub fn validate_alphas(alphas: &[f64]) -> Result<()> {
    for &a in alphas {
        if !(a.is_finite() && a > 0.0) {
            return invalid(format!("Rényi order must be positive and finite, got {a}"));
        }
        if a == 1.0 {
            return invalid("Rényi order 1 requested; use the von Neumann field instead");
        }
    }
    Ok(())
}

/// Von Neumann and Rényi entropies of one bipartition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    /// Von Neumann entropy, nats.
    pub vn: f64,
    /// `(alpha, S_alpha)` in the order requested.
    pub renyi: Vec<(f64, f64)>,
    /// Number of Schmidt weights above [`WEIGHT_CUTOFF`].
    pub schmidt_count: u64,
}

impl EntropyResult {
    /// Entropies of a normalized probability list. Weights below the cutoff
    /// are ignored.
    pub fn from_weights(weights: &[f64], alphas: &[f64]) -> Self {
        let kept: Vec<f64> = weights
            .iter()
            .copied()
            .filter(|&p| p > WEIGHT_CUTOFF)
            .collect();
        let vn = kept.iter().map(|&p| -p * p.ln()).sum::<f64>().max(0.0);
        let renyi = alphas
            .iter()
            .map(|&a| {
                let s: f64 = kept.iter().map(|&p| p.powf(a)).sum();
                (a, (s.ln() / (1.0 - a)).max(0.0))
            })
            .collect();
        Self {
            vn,
            renyi,
            schmidt_count: kept.len() as u64,
        }
    }

    /// Entropies of a tensor product of two-level spectra `{x_j, 1-x_j}`.
    pub fn from_mode_occupations(lambdas: &[f64], alphas: &[f64]) -> Self {
        let vn = lambdas.iter().map(|&x| binary_entropy(x)).sum();
        let renyi = alphas
            .iter()
            .map(|&a| (a, lambdas.iter().map(|&x| binary_renyi(x, a)).sum()))
            .collect();
        let mut count = 1u64;
        for &x in lambdas {
            if x > WEIGHT_CUTOFF && 1.0 - x > WEIGHT_CUTOFF {
                count = count.saturating_mul(2);
            }
        }
        Self {
            vn,
            renyi,
            schmidt_count: count,
        }
    }

    pub fn renyi_at(&self, alpha: f64) -> Option<f64> {
        self.renyi
            .iter()
            .find(|(a, _)| *a == alpha)
            .map(|(_, s)| *s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - LN_2).abs() < 1e-15);
        // H2(1/4) = ln 4 - (3/4) ln 3
        let expected = 4f64.ln() - 0.75 * 3f64.ln();
        assert!((binary_entropy(0.25) - expected).abs() < 1e-15);
        assert!((binary_entropy(0.25) - 0.562335).abs() < 1e-6);
    }

    #[test]
    fn renyi_order_one_rejected() {
        assert!(validate_alphas(&[2.0, 1.0]).is_err());
        assert!(validate_alphas(&[0.0]).is_err());
        assert!(validate_alphas(&[0.5, 2.0, 3.0]).is_ok());
    }

    #[test]
    fn weights_and_occupations_agree() {
        // product of two qubits with populations 0.3 and 0.1
        let w = [0.3 * 0.1, 0.3 * 0.9, 0.7 * 0.1, 0.7 * 0.9];
        let a = EntropyResult::from_weights(&w, &[2.0, 0.5]);
        let b = EntropyResult::from_mode_occupations(&[0.3, 0.1], &[2.0, 0.5]);
        assert!((a.vn - b.vn).abs() < 1e-14);
        for (x, y) in a.renyi.iter().zip(&b.renyi) {
            assert!((x.1 - y.1).abs() < 1e-14);
        }
        assert_eq!(a.schmidt_count, 4);
        assert_eq!(b.schmidt_count, 4);
    }
}
