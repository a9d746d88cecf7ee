use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageProfile {
    /// ½ ln(1 + λ_k Var(s)/ε) per mode, in nats.
    pub per_mode: Vec<f64>,
    pub fractions: Vec<f64>,
    pub total: f64,
}

pub fn leakage_profile(lambdas: &[f64], var_s: f64, eps: f64) -> Result<LeakageProfile> {
    if !(var_s > 0.0) || !(eps > 0.0) {
        return Err(domain("signal variance and ε must be positive"));
    }
    if lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(domain("spectrum must be nonnegative"));
    }
    let per_mode: Vec<f64> = lambdas.iter().map(|l| 0.5 * (l * var_s / eps).ln_1p()).collect();
    let total: f64 = per_mode.iter().sum();
    let fractions = per_mode.iter().map(|i| if total > 0.0 { i / total } else { 0.0 }).collect();
    Ok(LeakageProfile { per_mode, fractions, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_spectrum() {
        let p = leakage_profile(&[11.2, 1.0, 0.09, 0.01], 1.0, 1.0).unwrap();
        assert!((p.per_mode[0] - 0.5 * 12.2f64.ln()).abs() < 1e-15);
        assert!((p.per_mode[0] - 1.2509).abs() < 1e-3);
        assert!((p.fractions[0] - 0.760).abs() < 0.005);
        assert!((p.fractions[3] - 0.003).abs() < 0.001);
        assert!((p.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_and_degenerate_modes() {
        let p = leakage_profile(&[1.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(p.per_mode[1], 0.0);
        let p = leakage_profile(&[2.0, 2.0], 1.0, 1.0).unwrap();
        assert_eq!(p.fractions, vec![0.5, 0.5]);
        assert!(leakage_profile(&[1.0], 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_lambda(a in 0.0f64..50.0, b in 0.0f64..50.0, v in 0.01f64..5.0, e in 0.01f64..5.0) {
            let p = leakage_profile(&[a, b], v, e).unwrap();
            if a >= b {
                prop_assert!(p.per_mode[0] >= p.per_mode[1]);
            }
            prop_assert!(p.per_mode.iter().all(|i| *i >= 0.0));
        }
    }
}
