use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    /// Sensitivity radius Δ in data units.
    pub delta: f64,
    pub c: f64,
    pub gamma: f64,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        Self { delta: 1.0, c: 1.0, gamma: 0.01 }
    }
}

impl MechanismConfig {
    pub fn new(delta: f64, c: f64, gamma: f64) -> Result<Self> {
        let cfg = Self { delta, c, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(domain(format!("sensitivity {} must be positive", self.delta)));
        }
        if !(self.c > 0.0 && self.c <= 2.0) {
            return Err(domain(format!("calibration constant {} outside (0, 2]", self.c)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(domain(format!("noise budget {} outside [0, 1)", self.gamma)));
        }
        if self.c * self.gamma >= 1.0 {
            return Err(domain(format!("cγ = {} must be below 1", self.c * self.gamma)));
        }
        Ok(())
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.delta, self.c, gamma)
    }

    pub fn c_gamma(&self) -> f64 {
        self.c * self.gamma
    }

    /// Δ²/2
    pub fn half_delta_sq(&self) -> f64 {
        0.5 * self.delta * self.delta
    }
}

/// ln(1 + d(1 − F_min)/(γ(1 − γ)))
pub fn eps_isotropic(d: usize, f_min: f64, gamma: f64) -> Result<f64> {
    if d < 2 {
        return Err(domain(format!("dimension {d} must be at least 2")));
    }
    if !(0.0..=1.0).contains(&f_min) {
        return Err(domain(format!("minimum fidelity {f_min} outside [0, 1]")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("depolarizing strength {gamma} outside (0, 1)")));
    }
    Ok((d as f64 * (1.0 - f_min) / (gamma * (1.0 - gamma))).ln_1p())
}

/// (Δ²/2) λ₁ (1 − cγ)
pub fn eps_optimal(lambda1: f64, cfg: &MechanismConfig) -> Result<f64> {
    cfg.validate()?;
    if !(lambda1 >= 0.0) || !lambda1.is_finite() {
        return Err(domain(format!("λ₁ = {lambda1} must be finite and nonnegative")));
    }
    Ok(cfg.half_delta_sq() * lambda1 * (1.0 - cfg.c_gamma()))
}

/// ε_iso / ε*; infinite when ε* vanishes.
pub fn advantage_ratio(eps_iso: f64, eps_opt: f64) -> f64 {
    if eps_opt == 0.0 {
        f64::INFINITY
    } else {
        eps_iso / eps_opt
    }
}

/// Worst-mode cost (Δ²/2) max_k λ_k (1 − cγ p_k) of an arbitrary allocation.
pub fn eps_for_allocation(lambdas: &[f64], weights: &[f64], cfg: &MechanismConfig) -> Result<f64> {
    cfg.validate()?;
    if lambdas.len() != weights.len() {
        return Err(crate::Error::Shape { expected: lambdas.len(), got: weights.len() });
    }
    Ok(cfg.half_delta_sq() * super::allocation::minimax_value(lambdas, weights, cfg.c_gamma()))
}

/// Cost of the linear allocation p_k ∝ λ_k.
pub fn eps_linear(lambdas: &[f64], cfg: &MechanismConfig) -> Result<f64> {
    eps_for_allocation(lambdas, &linear_weights(lambdas)?, cfg)
}

pub fn linear_weights(lambdas: &[f64]) -> Result<Vec<f64>> {
    if lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(domain("spectrum must be nonnegative"));
    }
    let total: f64 = lambdas.iter().sum();
    if !(total > 0.0) {
        return Err(domain("all-zero spectrum"));
    }
    Ok(lambdas.iter().map(|l| l / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn config_validation() {
        assert!(MechanismConfig::new(1.0, 1.0, 0.01).is_ok());
        assert!(MechanismConfig::new(0.0, 1.0, 0.01).is_err());
        assert!(MechanismConfig::new(1.0, 2.5, 0.01).is_err());
        assert!(MechanismConfig::new(1.0, 2.0, 0.5).is_err());
        assert!(MechanismConfig::new(1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn isotropic_values() {
        assert_eq!(eps_isotropic(16, 1.0, 0.3).unwrap(), 0.0);
        assert!((eps_isotropic(16, 0.0, 0.5).unwrap() - 65f64.ln()).abs() < 1e-12);
        let v = eps_isotropic(16, 1.0 / 16.0, 0.01).unwrap();
        assert!((v - 7.32).abs() < 0.01, "{v}");
        assert!(eps_isotropic(16, 0.5, 0.0).is_err());
        assert!(eps_isotropic(16, 0.5, 1.0).is_err());
        assert!(eps_isotropic(1, 0.5, 0.5).is_err());
    }

    #[test]
    fn optimal_values() {
        let cfg = MechanismConfig::new(1.0, 1.0, 0.01).unwrap();
        assert_eq!(eps_optimal(0.0, &cfg).unwrap(), 0.0);
        assert!((eps_optimal(0.25, &cfg).unwrap() - 0.12375).abs() < 1e-15);
        assert!((eps_optimal(9.0, &cfg).unwrap() - 4.455).abs() < 1e-12);
        let r = advantage_ratio(eps_isotropic(16, 1.0 / 16.0, 0.01).unwrap(), 0.12375);
        assert!((r - 59.2).abs() < 0.5, "{r}");
    }

    proptest! {
        #[test]
        fn optimal_beats_linear(
            raw in proptest::collection::vec(0.01f64..20.0, 2..6),
            gamma in 0.001f64..0.9,
        ) {
            let mut l = raw;
            l.sort_by(|a, b| b.total_cmp(a));
            let cfg = MechanismConfig::new(1.3, 1.0, gamma).unwrap();
            prop_assert!(eps_optimal(l[0], &cfg).unwrap() < eps_linear(&l, &cfg).unwrap());
        }
    }
}
