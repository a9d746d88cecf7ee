use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::qfi::QfiMatrix;

use super::MechanismConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyCheck {
    /// ε (1 − F_min)
    pub lhs: f64,
    /// (Δ²/2) Tr F / d
    pub rhs: f64,
    pub holds: bool,
}

impl UncertaintyCheck {
    /// lhs/rhs; infinite when rhs vanishes.
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            f64::INFINITY
        } else {
            self.lhs / self.rhs
        }
    }
}

pub fn uncertainty_check(
    eps: f64,
    min_channel_fidelity: f64,
    f: &QfiMatrix,
    cfg: &MechanismConfig,
    d: usize,
) -> Result<UncertaintyCheck> {
    if d == 0 {
        return Err(domain("Hilbert dimension must be positive"));
    }
    let lhs = eps * (1.0 - min_channel_fidelity);
    let rhs = cfg.half_delta_sq() * f.trace() / d as f64;
    Ok(UncertaintyCheck { lhs, rhs, holds: lhs >= rhs - 1e-9 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMat;

    #[test]
    fn zero_qfi_always_holds() {
        let f = QfiMatrix::new(RMat::zeros(3, 3), vec![0.0; 3]);
        let c = uncertainty_check(0.0, 1.0, &f, &MechanismConfig::default(), 8).unwrap();
        assert_eq!(c.rhs, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn values() {
        let f = QfiMatrix::new(RMat::diag(&[9.0, 1.0]), vec![0.0; 2]);
        let c = uncertainty_check(2.0, 0.5, &f, &MechanismConfig::default(), 4).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert_eq!(c.rhs, 1.25);
        assert!(!c.holds);
        assert!((c.ratio() - 0.8).abs() < 1e-15);
    }
}
