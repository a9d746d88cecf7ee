use serde::{Deserialize, Serialize};

use crate::embed::{embed_pure, EmbeddingSpec};
use crate::error::{domain, Result};
use crate::qfi::QfiSpectrum;
use crate::qstate::fidelity_pure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvasionReport {
    pub direction_min: Vec<f64>,
    pub direction_max: Vec<f64>,
    /// (ε_adv²/2) λ along each direction, in nats.
    pub d_inf_min: f64,
    pub d_inf_max: f64,
    /// d_inf_max / d_inf_min; infinite when λ_min = 0.
    pub ratio: f64,
    pub ratio_infinite: bool,
}

/// Distinguishability of a perturbation of size ε_adv along the least and
/// most sensitive QFI eigendirections.
pub fn evasion_analysis(f: &QfiSpectrum, eps_adv: f64) -> Result<EvasionReport> {
    if f.dim() == 0 {
        return Err(crate::Error::Empty("spectrum"));
    }
    if !(eps_adv >= 0.0) {
        return Err(domain(format!("perturbation size {eps_adv} must be nonnegative")));
    }
    let p = f.dim();
    let half = 0.5 * eps_adv * eps_adv;
    let d_inf_max = half * f.lambda_max();
    let d_inf_min = half * f.lambda_min().max(0.0);
    let ratio_infinite = !(f.lambda_min() > 0.0);
    let ratio = if ratio_infinite { f64::INFINITY } else { f.lambda_max() / f.lambda_min() };
    Ok(EvasionReport {
        direction_min: f.vector(p - 1),
        direction_max: f.vector(0),
        d_inf_min,
        d_inf_max,
        ratio,
        ratio_infinite,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectCheck {
    /// −ln |⟨ψ(x)|ψ(x+δ)⟩|²
    pub direct: f64,
    /// ¼ δᵀ F δ
    pub quadratic: f64,
}

impl DirectCheck {
    pub fn relative_error(&self) -> f64 {
        (self.direct - self.quadratic).abs() / self.quadratic.abs().max(f64::MIN_POSITIVE)
    }
}

/// Compares the QFI prediction for the shift δ = ε_adv u_k with the exact
/// infidelity of the embedded states.
pub fn evasion_direct(x: &[f64], spec: &EmbeddingSpec, f: &QfiSpectrum, k: usize, eps_adv: f64) -> Result<DirectCheck> {
    if k >= f.dim() {
        return Err(crate::Error::Index { index: k, n: f.dim() });
    }
    let u = f.vector(k);
    let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + eps_adv * b).collect();
    let fid = fidelity_pure(&embed_pure(x, spec)?, &embed_pure(&y, spec)?)?;
    Ok(DirectCheck { direct: -fid.ln(), quadratic: 0.25 * eps_adv * eps_adv * f.values[k] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfi::{qfi_pure, spectral, QfiOptions};
    use proptest::prelude::*;

    #[test]
    fn isotropic_and_degenerate() {
        let r = evasion_analysis(&QfiSpectrum::diagonal(&[2.0; 4]), 0.1).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-15);
        let r = evasion_analysis(&QfiSpectrum::diagonal(&[9.0, 9.0, 0.09, 0.09]), 0.1).unwrap();
        assert!((r.ratio - 100.0).abs() < 1e-9);
        assert!((r.d_inf_max - 0.045).abs() < 1e-15);
        let r = evasion_analysis(&QfiSpectrum::diagonal(&[1.0, 0.0]), 0.1).unwrap();
        assert!(r.ratio_infinite);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quadratic_form_matches_fidelity(
            x in proptest::collection::vec(-1.5f64..1.5, 4),
            eps in 0.005f64..0.05,
        ) {
            let spec = EmbeddingSpec::anisotropic();
            let s = spectral(&qfi_pure(&x, &spec, QfiOptions::default()).unwrap()).unwrap();
            for k in 0..4 {
                let c = evasion_direct(&x, &spec, &s, k, eps).unwrap();
                if c.quadratic > 1e-8 {
                    prop_assert!(c.relative_error() < 0.1, "mode {k}: {c:?}");
                }
            }
        }
    }
}
