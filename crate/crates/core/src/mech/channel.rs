use serde::{Deserialize, Serialize};

use crate::embed::{embed_pure, EmbeddingSpec};
use crate::error::{domain, Result};
use crate::qfi::{qfi_mixed, qfi_pure, spectral, QfiMatrix, QfiOptions, QfiSpectrum, DEFAULT_STEP};
use crate::qstate::MixedState;

use super::{eps_optimal, optimal_allocation, MechanismConfig, NoiseAllocation};

/// Residual above which the contraction fit is flagged.
pub const FIT_WARN: f64 = 0.10;

/// Mixture of the embedded state with states embedded at inputs shifted
/// along QFI eigendirections. Directions and shift sizes are fixed at
/// calibration and reused for every input.
#[derive(Debug, Clone)]
pub struct MetricChannel {
    pub spec: EmbeddingSpec,
    pub cfg: MechanismConfig,
    pub spectrum: QfiSpectrum,
    pub allocation: NoiseAllocation,
    pub eps_target: f64,
}

impl MetricChannel {
    /// Uses the QFI spectrum at `x` and the optimal allocation.
    pub fn calibrate(x: &[f64], spec: &EmbeddingSpec, cfg: &MechanismConfig) -> Result<Self> {
        let spectrum = spectral(&qfi_pure(x, spec, QfiOptions::default())?)?;
        let alloc = if cfg.c_gamma() > 0.0 {
            optimal_allocation(&spectrum.values, cfg.c_gamma())?
        } else {
            NoiseAllocation::concentrated(&spectrum.values, 0.0)?
        };
        Self::from_spectrum(spectrum, alloc, spec, cfg)
    }

    /// ε_target = ε*(λ₁); η_k from the calibration rule.
    pub fn from_spectrum(
        spectrum: QfiSpectrum,
        alloc: NoiseAllocation,
        spec: &EmbeddingSpec,
        cfg: &MechanismConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if spectrum.dim() != spec.n_qubits() || alloc.weights.len() != spectrum.dim() {
            return Err(crate::Error::Shape { expected: spec.n_qubits(), got: spectrum.dim() });
        }
        let eps_target = eps_optimal(spectrum.lambda_max(), cfg)?;
        let allocation = alloc.calibrate_etas(&spectrum.values, eps_target, cfg.delta)?;
        Ok(Self { spec: spec.clone(), cfg: *cfg, spectrum, allocation, eps_target })
    }

    pub fn shifted_input(&self, y: &[f64], k: usize) -> Vec<f64> {
        let u = self.spectrum.vector(k);
        let eta = self.allocation.etas[k];
        y.iter().zip(&u).map(|(a, b)| a + eta * b).collect()
    }

    /// (1−γ)|ψ(y)⟩⟨ψ(y)| + γ Σ_k p_k |ψ(y + η_k u_k)⟩⟨ψ(y + η_k u_k)|
    pub fn apply(&self, y: &[f64]) -> Result<MixedState> {
        let base = embed_pure(y, &self.spec)?.to_density();
        let gamma = self.cfg.gamma;
        if gamma == 0.0 {
            return Ok(base);
        }
        let shifted: Vec<(f64, MixedState)> = self
            .allocation
            .active_set
            .iter()
            .map(|&k| {
                Ok((
                    gamma * self.allocation.weights[k],
                    embed_pure(&self.shifted_input(y, k), &self.spec)?.to_density(),
                ))
            })
            .collect::<Result<_>>()?;
        let mut parts: Vec<(f64, &MixedState)> = vec![(1.0 - gamma, &base)];
        parts.extend(shifted.iter().map(|(w, s)| (*w, s)));
        MixedState::mixture(&parts)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveQfi {
    pub f_eff: QfiMatrix,
    /// u_kᵀ F_eff u_k / λ_k per input mode.
    pub mode_factors: Vec<f64>,
    /// 1 − cγ p_k with the configured c.
    pub predicted: Vec<f64>,
    /// Least-squares c from 1 − f_k ≈ c γ p_k; `None` when γ = 0.
    pub fitted_c: Option<f64>,
    /// Largest relative deviation of the fitted contraction on active modes.
    pub residual: f64,
    pub warning: bool,
}

/// SLD QFI of the channel-output family at `x`, with per-mode contraction fit.
pub fn effective_qfi(channel: &MetricChannel, x: &[f64]) -> Result<EffectiveQfi> {
    let dec = qfi_mixed(x, &|y| channel.apply(y), DEFAULT_STEP)?;
    let f_eff = dec.f_total;
    let spec = &channel.spectrum;
    let gamma = channel.cfg.gamma;
    let w = &channel.allocation.weights;
    let mode_factors: Vec<f64> = (0..spec.dim())
        .map(|k| {
            let u = spec.vector(k);
            if spec.values[k] > 0.0 {
                f_eff.entries.bilinear(&u, &u) / spec.values[k]
            } else {
                1.0
            }
        })
        .collect();
    let predicted = w.iter().map(|p| 1.0 - channel.cfg.c_gamma() * p).collect();
    let (num, den) = (0..spec.dim()).fold((0.0, 0.0), |(n, d), k| {
        let g = gamma * w[k];
        (n + g * (1.0 - mode_factors[k]), d + g * g)
    });
    let fitted_c = if den > 0.0 { Some(num / den) } else { None };
    let residual = match fitted_c {
        Some(c) => channel
            .allocation
            .active_set
            .iter()
            .map(|&k| {
                let expect = c * gamma * w[k];
                ((1.0 - mode_factors[k]) - expect).abs() / expect.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max),
        None => 0.0,
    };
    let warning = residual > FIT_WARN || fitted_c.is_some_and(|c| !(c > 0.0 && c <= 2.0));
    if warning {
        log::warn!("contraction fit residual {residual:.3} (c = {fitted_c:?})");
    }
    Ok(EffectiveQfi { f_eff, mode_factors, predicted, fitted_c, residual, warning })
}

/// ⟨ψ|ρ|ψ⟩ for the embedded state at each point, minimized.
pub fn min_channel_fidelity(
    points: &[Vec<f64>],
    spec: &EmbeddingSpec,
    channel: &dyn Fn(&[f64]) -> Result<MixedState>,
) -> Result<f64> {
    if points.is_empty() {
        return Err(crate::Error::Empty("point list"));
    }
    let mut best = f64::INFINITY;
    for x in points {
        let psi = embed_pure(x, spec)?;
        let rho = channel(x)?;
        let v = psi.amplitudes();
        let f = crate::linalg::inner(v, &rho.matrix().mat_vec(v)).re;
        if !f.is_finite() {
            return Err(domain("non-finite channel fidelity"));
        }
        best = best.min(f.clamp(0.0, 1.0));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{eig_hermitian, purity};

    #[test]
    fn zero_gamma_is_identity() {
        let spec = EmbeddingSpec::anisotropic();
        let x = [0.3, -0.2, 0.5, 0.1];
        let cfg = MechanismConfig::new(1.0, 1.0, 0.0).unwrap();
        let ch = MetricChannel::calibrate(&x, &spec, &cfg).unwrap();
        assert!((purity(&ch.apply(&x).unwrap()) - 1.0).abs() < 1e-12);
        let eff = effective_qfi(&ch, &x).unwrap();
        let f_in = qfi_pure(&x, &spec, QfiOptions::default()).unwrap();
        assert!(eff.f_eff.entries.max_abs_diff(&f_in.entries) / f_in.entries.max_abs() < 1e-6);
        assert!(eff.fitted_c.is_none());
    }

    #[test]
    fn single_mode_output_has_rank_two() {
        let spec = EmbeddingSpec::anisotropic();
        let x = [0.3, -0.2, 0.5, 0.1];
        let cfg = MechanismConfig::new(1.0, 1.0, 0.1).unwrap();
        let ch = MetricChannel::calibrate(&x, &spec, &cfg).unwrap();
        assert_eq!(ch.allocation.active_set, vec![0]);
        let rho = ch.apply(&x).unwrap();
        let eig = eig_hermitian(rho.matrix()).unwrap();
        assert!(eig.values.iter().filter(|v| **v > 1e-10).count() <= 2);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn leading_mode_contracts() {
        let spec = EmbeddingSpec::isotropic(4);
        let x = [0.4, 0.7, -0.3, 0.2];
        let cfg = MechanismConfig::new(1.0, 1.0, 0.1).unwrap();
        let ch = MetricChannel::calibrate(&x, &spec, &cfg).unwrap();
        let eff = effective_qfi(&ch, &x).unwrap();
        assert!((eff.mode_factors[0] - 0.9).abs() < 0.02, "{:?}", eff.mode_factors);
        for f in &eff.mode_factors[1..] {
            assert!((f - 1.0).abs() < 0.05, "{:?}", eff.mode_factors);
        }
        let c = eff.fitted_c.unwrap();
        assert!(c > 0.0 && c <= 2.0);
    }
}
