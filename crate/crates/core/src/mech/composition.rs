use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

use super::MechanismConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionLedger {
    pub k: usize,
    pub lambda_max: f64,
    pub c_gamma: f64,
    /// (Δ²/2) λ (1 − cγ)^(i−1) for layer i = 1..k.
    pub per_layer: Vec<f64>,
    pub total: f64,
    /// Sequential composition k (Δ²/2) λ (1 − cγ).
    pub eps_seq: f64,
    /// ε_seq / total.
    pub ratio: f64,
}

/// k-layer accounting under contracting QFI. With cγ = 0 nothing contracts
/// and the ledger degenerates to sequential composition with ratio 1.
pub fn compose_qfi(k: usize, lambda_max: f64, cfg: &MechanismConfig) -> Result<CompositionLedger> {
    cfg.validate()?;
    if k == 0 {
        return Err(domain("layer count must be at least 1"));
    }
    if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
        return Err(domain(format!("λ_max = {lambda_max} must be finite and nonnegative")));
    }
    let base = cfg.half_delta_sq() * lambda_max;
    let cg = cfg.c_gamma();
    if cg == 0.0 {
        let eps_seq = k as f64 * base;
        return Ok(CompositionLedger {
            k,
            lambda_max,
            c_gamma: 0.0,
            per_layer: vec![base; k],
            total: eps_seq,
            eps_seq,
            ratio: 1.0,
        });
    }
    let q = 1.0 - cg;
    let per_layer = (0..k).map(|i| base * q.powi(i as i32)).collect();
    let total = base * (1.0 - q.powi(k as i32)) / cg;
    let eps_seq = k as f64 * base * q;
    Ok(CompositionLedger { k, lambda_max, c_gamma: cg, per_layer, total, eps_seq, ratio: ratio_k(k, cg) })
}

/// R(k) = k cγ (1 − cγ) / (1 − (1 − cγ)^k)
pub fn ratio_k(k: usize, c_gamma: f64) -> f64 {
    if c_gamma == 0.0 {
        return 1.0;
    }
    let q = 1.0 - c_gamma;
    k as f64 * c_gamma * q / (1.0 - q.powi(k as i32))
}

/// (Δ²/2) λ / (cγ), the k → ∞ limit of the total.
pub fn saturation(lambda_max: f64, cfg: &MechanismConfig) -> f64 {
    let cg = cfg.c_gamma();
    if cg == 0.0 {
        f64::INFINITY
    } else {
        cfg.half_delta_sq() * lambda_max / cg
    }
}

/// Smallest k ≤ k_max with R(k) ≥ target.
pub fn crossover_k(c_gamma: f64, target: f64, k_max: usize) -> Option<usize> {
    (1..=k_max).find(|&k| ratio_k(k, c_gamma) >= target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(gamma: f64) -> MechanismConfig {
        MechanismConfig::new(1.0, 1.0, gamma).unwrap()
    }

    #[test]
    fn ratios() {
        assert!((ratio_k(100, 0.1) - 9.0).abs() < 0.05);
        assert!((ratio_k(20, 0.1) - 2.0).abs() < 0.05);
        assert!((ratio_k(1, 0.1) - 0.9).abs() < 1e-15);
        assert_eq!(crossover_k(0.01, 2.0, 1000), Some(163));
    }

    #[test]
    fn single_layer() {
        let l = compose_qfi(1, 9.0, &cfg(0.1)).unwrap();
        assert_eq!(l.per_layer, vec![4.5]);
        assert!((l.total - 4.5).abs() < 1e-12);
        assert!((l.eps_seq - 4.05).abs() < 1e-12);
    }

    #[test]
    fn saturates() {
        let c = cfg(0.1);
        assert!((saturation(9.0, &c) - 45.0).abs() < 1e-12);
        let l = compose_qfi(2000, 9.0, &c).unwrap();
        assert!((l.total - 45.0).abs() < 1e-9);
    }

    #[test]
    fn no_contraction_mode() {
        let l = compose_qfi(5, 2.0, &cfg(0.0)).unwrap();
        assert_eq!(l.ratio, 1.0);
        assert_eq!(l.total, 5.0);
        assert!(compose_qfi(0, 2.0, &cfg(0.1)).is_err());
    }

    proptest! {
        #[test]
        fn ledger_invariants(k in 1usize..300, lambda in 0.01f64..20.0, gamma in 0.001f64..0.9) {
            let c = cfg(gamma);
            let l = compose_qfi(k, lambda, &c).unwrap();
            let sum: f64 = l.per_layer.iter().sum();
            prop_assert!((sum - l.total).abs() <= 1e-9 * l.total.max(1.0));
            for w in l.per_layer.windows(2) {
                prop_assert!((w[1] / w[0] - (1.0 - gamma)).abs() < 1e-9);
            }
            let next = compose_qfi(k + 1, lambda, &c).unwrap();
            prop_assert!(next.total >= l.total);
            prop_assert!(l.total <= saturation(lambda, &c) * (1.0 + 1e-12));
        }
    }
}
