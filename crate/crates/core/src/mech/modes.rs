//! Privacy modes behind a common trait, looked up by name.

use std::fmt::Debug;
use std::sync::Arc;

use rayon::prelude::*;

use crate::embed::{embed_pure, EmbeddingSpec};
use crate::error::{Error, Result};
use crate::qfi::{qfi_pure, spectral, QfiOptions, QfiSpectrum};
use crate::qstate::{depolarize, MixedState};

use super::{
    eps_for_allocation, eps_isotropic, eps_optimal, linear_weights, optimal_allocation, subspace_project,
    MechanismConfig, MetricChannel, NoiseAllocation,
};

/// Everything a mode needs to price and apply itself.
#[derive(Debug, Clone)]
pub struct ModeContext {
    pub spec: EmbeddingSpec,
    pub cfg: MechanismConfig,
    /// Worst-case spectrum over the reference points.
    pub spectrum: QfiSpectrum,
    pub centroid: Vec<f64>,
    /// Minimum pairwise fidelity for the isotropic bound.
    pub f_min: f64,
    pub tau: f64,
}

impl ModeContext {
    /// Picks the point with the largest λ_max as the reference spectrum.
    pub fn from_points(
        points: &[Vec<f64>],
        spec: &EmbeddingSpec,
        cfg: &MechanismConfig,
        f_min: Option<f64>,
        tau: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("reference points"));
        }
        let mut spectra: Vec<QfiSpectrum> =
            points.par_iter().map(|x| spectral(&qfi_pure(x, spec, QfiOptions::default())?)).collect::<Result<_>>()?;
        let mut best = 0;
        for (i, s) in spectra.iter().enumerate() {
            if s.lambda_max() > spectra[best].lambda_max() {
                best = i;
            }
        }
        let dim = points[0].len();
        let centroid = (0..dim).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / points.len() as f64).collect();
        let d = 1usize << spec.n_qubits();
        Ok(Self {
            spec: spec.clone(),
            cfg: *cfg,
            spectrum: spectra.swap_remove(best),
            centroid,
            f_min: f_min.unwrap_or(1.0 / d as f64),
            tau,
        })
    }

    pub fn hilbert_dim(&self) -> usize {
        1usize << self.spec.n_qubits()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Ok(Self { cfg: self.cfg.with_gamma(gamma)?, ..self.clone() })
    }
}

pub trait PrivacyMechanism: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn epsilon(&self, ctx: &ModeContext) -> Result<f64>;
    fn apply(&self, x: &[f64], ctx: &ModeContext) -> Result<MixedState>;
}

/// No noise; pays the full sensitivity (Δ²/2) λ_max.
#[derive(Debug, Clone, Copy, Default)]
pub struct Baseline;

impl PrivacyMechanism for Baseline {
    fn name(&self) -> &'static str {
        "baseline"
    }

    fn epsilon(&self, ctx: &ModeContext) -> Result<f64> {
        Ok(ctx.cfg.half_delta_sq() * ctx.spectrum.lambda_max())
    }

    fn apply(&self, x: &[f64], ctx: &ModeContext) -> Result<MixedState> {
        Ok(embed_pure(x, &ctx.spec)?.to_density())
    }
}

/// Global depolarizing noise.
#[derive(Debug, Clone, Copy, Default)]
pub struct Isotropic;

impl PrivacyMechanism for Isotropic {
    fn name(&self) -> &'static str {
        "isotropic"
    }

    fn epsilon(&self, ctx: &ModeContext) -> Result<f64> {
        eps_isotropic(ctx.hilbert_dim(), ctx.f_min, ctx.cfg.gamma)
    }

    fn apply(&self, x: &[f64], ctx: &ModeContext) -> Result<MixedState> {
        depolarize(&embed_pure(x, &ctx.spec)?.to_density(), ctx.cfg.gamma)
    }
}

fn metric_channel(ctx: &ModeContext, alloc: NoiseAllocation) -> Result<MetricChannel> {
    MetricChannel::from_spectrum(ctx.spectrum.clone(), alloc, &ctx.spec, &ctx.cfg)
}

/// Metric channel with weights proportional to the eigenvalues.
#[derive(Debug, Clone, Copy, Default)]
pub struct Geometric;

impl Geometric {
    fn allocation(ctx: &ModeContext) -> Result<NoiseAllocation> {
        NoiseAllocation::from_weights(&ctx.spectrum.values, linear_weights(&ctx.spectrum.values)?, ctx.cfg.c_gamma())
    }
}

impl PrivacyMechanism for Geometric {
    fn name(&self) -> &'static str {
        "geometric"
    }

    fn epsilon(&self, ctx: &ModeContext) -> Result<f64> {
        eps_for_allocation(&ctx.spectrum.values, &linear_weights(&ctx.spectrum.values)?, &ctx.cfg)
    }

    fn apply(&self, x: &[f64], ctx: &ModeContext) -> Result<MixedState> {
        metric_channel(ctx, Self::allocation(ctx)?)?.apply(x)
    }
}

/// Metric channel with the active-set optimal allocation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Optimal;

impl Optimal {
    fn allocation(ctx: &ModeContext) -> Result<NoiseAllocation> {
        if ctx.cfg.c_gamma() > 0.0 {
            optimal_allocation(&ctx.spectrum.values, ctx.cfg.c_gamma())
        } else {
            NoiseAllocation::concentrated(&ctx.spectrum.values, 0.0)
        }
    }
}

impl PrivacyMechanism for Optimal {
    fn name(&self) -> &'static str {
        "optimal"
    }

    fn epsilon(&self, ctx: &ModeContext) -> Result<f64> {
        eps_optimal(ctx.spectrum.lambda_max(), &ctx.cfg)
    }

    fn apply(&self, x: &[f64], ctx: &ModeContext) -> Result<MixedState> {
        metric_channel(ctx, Self::allocation(ctx)?)?.apply(x)
    }
}

/// Noise-free projection onto the modes with λ_k ≤ τ.
#[derive(Debug, Clone, Copy, Default)]
pub struct Subspace;

impl PrivacyMechanism for Subspace {
    fn name(&self) -> &'static str {
        "subspace"
    }

    fn epsilon(&self, ctx: &ModeContext) -> Result<f64> {
        Ok(super::subspace_accounting(&ctx.spectrum.values, ctx.tau, &ctx.cfg)?.0)
    }

    fn apply(&self, x: &[f64], ctx: &ModeContext) -> Result<MixedState> {
        let r = subspace_project(x, &ctx.spectrum, ctx.tau, &ctx.centroid, &ctx.spec, &ctx.cfg)?;
        Ok(r.state.to_density())
    }
}

pub fn privacy_modes() -> Vec<Arc<dyn PrivacyMechanism>> {
    vec![Arc::new(Baseline), Arc::new(Isotropic), Arc::new(Geometric), Arc::new(Optimal), Arc::new(Subspace)]
}

pub fn privacy_mode(name: &str) -> Result<Arc<dyn PrivacyMechanism>> {
    privacy_modes()
        .into_iter()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::Unknown { kind: "privacy mode", name: name.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::gen_dataset;

    fn ctx(gamma: f64) -> ModeContext {
        let data = gen_dataset(20, 1.5, 0.6, 42).unwrap();
        let cfg = MechanismConfig::new(1.0, 1.0, gamma).unwrap();
        ModeContext::from_points(&data.points, &EmbeddingSpec::anisotropic(), &cfg, None, 0.05).unwrap()
    }

    #[test]
    fn registry_lookup() {
        let names: Vec<&str> = privacy_modes().iter().map(|m| m.name()).collect();
        assert_eq!(names, ["baseline", "isotropic", "geometric", "optimal", "subspace"]);
        assert_eq!(privacy_mode("optimal").unwrap().name(), "optimal");
        assert!(matches!(privacy_mode("nope"), Err(Error::Unknown { .. })));
    }

    #[test]
    fn ordering_at_small_gamma() {
        let c = ctx(0.01);
        let eps = |n: &str| privacy_mode(n).unwrap().epsilon(&c).unwrap();
        assert!(eps("subspace") <= eps("optimal"));
        assert!(eps("optimal") < eps("geometric"));
        assert!(eps("geometric") < eps("baseline"));
    }

    #[test]
    fn outputs_are_states() {
        let c = ctx(0.1);
        let x = c.centroid.clone();
        for m in privacy_modes() {
            let rho = m.apply(&x, &c).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-10, "{}", m.name());
        }
    }
}
