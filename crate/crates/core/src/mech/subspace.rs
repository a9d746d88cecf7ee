use crate::embed::{embed_pure, EmbeddingSpec};
use crate::error::{domain, Error, Result};
use crate::linalg::dot;
use crate::qfi::QfiSpectrum;
use crate::qstate::PureState;

use super::MechanismConfig;

#[derive(Debug, Clone)]
pub struct SubspaceProjection {
    pub state: PureState,
    pub projected_x: Vec<f64>,
    /// (Δ²/2) τ
    pub eps: f64,
    /// Fraction of QFI trace discarded, Σ_{λ_k>τ} λ_k / Tr F.
    pub utility_loss: f64,
    /// Indices of the frozen modes.
    pub discarded: Vec<usize>,
}

/// ε and η_τ of the cutoff τ without embedding anything.
pub fn subspace_accounting(values: &[f64], tau: f64, cfg: &MechanismConfig) -> Result<(f64, f64, Vec<usize>)> {
    cfg.validate()?;
    if !(tau > 0.0) {
        return Err(domain(format!("cutoff τ = {tau} must be positive")));
    }
    let discarded: Vec<usize> = (0..values.len()).filter(|&k| values[k] > tau).collect();
    if discarded.len() == values.len() {
        return Err(Error::EmptySignal { tau });
    }
    let tr: f64 = values.iter().sum();
    let lost: f64 = discarded.iter().map(|&k| values[k]).sum();
    let eta = if tr > 0.0 { lost / tr } else { 0.0 };
    Ok((cfg.half_delta_sq() * tau, eta, discarded))
}

/// Freezes the coordinates of x along eigendirections with λ_k > τ at their
/// centroid values and re-embeds: x' = x − Σ_{λ_k>τ} u_k u_kᵀ (x − c).
pub fn subspace_project(
    x: &[f64],
    spectrum: &QfiSpectrum,
    tau: f64,
    centroid: &[f64],
    spec: &EmbeddingSpec,
    cfg: &MechanismConfig,
) -> Result<SubspaceProjection> {
    if x.len() != spectrum.dim() || centroid.len() != x.len() {
        return Err(Error::Shape { expected: spectrum.dim(), got: x.len() });
    }
    let (eps, utility_loss, discarded) = subspace_accounting(&spectrum.values, tau, cfg)?;
    let diff: Vec<f64> = x.iter().zip(centroid).map(|(a, b)| a - b).collect();
    let mut projected_x = x.to_vec();
    let mut kept_sq = dot(&diff, &diff);
    for &k in &discarded {
        let u = spectrum.vector(k);
        let coef = dot(&u, &diff);
        kept_sq -= coef * coef;
        projected_x.iter_mut().zip(&u).for_each(|(p, ui)| *p -= coef * ui);
    }
    if kept_sq.max(0.0).sqrt() <= 1e-6 {
        log::warn!("projected variation is below 1e-6; output equals the centroid embedding");
    }
    let state = embed_pure(&projected_x, spec)?;
    Ok(SubspaceProjection { state, projected_x, eps, utility_loss, discarded })
}
