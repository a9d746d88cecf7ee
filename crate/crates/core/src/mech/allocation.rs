use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Slack on p_k ≥ 0 and on the inactive-mode condition.
const FEAS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Active set is the top `size` modes.
    pub size: usize,
    pub t: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseAllocation {
    pub weights: Vec<f64>,
    /// Shift magnitudes η_k; zero until calibrated and for inactive modes.
    pub etas: Vec<f64>,
    pub active_set: Vec<usize>,
    pub t: f64,
    pub candidates: Vec<Candidate>,
}

impl NoiseAllocation {
    /// Arbitrary simplex weights; `t` is the worst-mode value max_k λ_k(1 − cγ p_k).
    pub fn from_weights(lambdas: &[f64], weights: Vec<f64>, c_gamma: f64) -> Result<Self> {
        if lambdas.len() != weights.len() {
            return Err(crate::Error::Shape { expected: lambdas.len(), got: weights.len() });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(domain(format!("allocation weights must lie on the simplex (sum {sum})")));
        }
        let active_set = (0..weights.len()).filter(|&k| weights[k] > 0.0).collect();
        let t = minimax_value(lambdas, &weights, c_gamma);
        Ok(Self { etas: vec![0.0; weights.len()], weights, active_set, t, candidates: Vec::new() })
    }

    /// All weight on the leading mode.
    pub fn concentrated(lambdas: &[f64], c_gamma: f64) -> Result<Self> {
        let mut w = vec![0.0; lambdas.len()];
        *w.first_mut().ok_or(crate::Error::Empty("spectrum"))? = 1.0;
        Self::from_weights(lambdas, w, c_gamma)
    }

    /// η_k = sqrt(2 ε_target / (Δ² λ_k)) on active modes.
    pub fn calibrate_etas(mut self, lambdas: &[f64], eps_target: f64, delta: f64) -> Result<Self> {
        for &k in &self.active_set {
            if !(lambdas[k] > 0.0) {
                return Err(domain(format!("active mode {k} has λ = {}, shift undefined", lambdas[k])));
            }
            self.etas[k] = (2.0 * eps_target / (delta * delta * lambdas[k])).sqrt();
        }
        Ok(self)
    }
}

/// max_k λ_k (1 − cγ p_k)
pub fn minimax_value(lambdas: &[f64], weights: &[f64], c_gamma: f64) -> f64 {
    lambdas.iter().zip(weights).map(|(l, p)| l * (1.0 - c_gamma * p)).fold(f64::NEG_INFINITY, f64::max)
}

fn check_spectrum(lambdas: &[f64], c_gamma: f64) -> Result<()> {
    if lambdas.is_empty() {
        return Err(crate::Error::Empty("spectrum"));
    }
    if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(domain("spectrum must be finite and nonnegative"));
    }
    if lambdas.windows(2).any(|w| w[1] > w[0]) {
        return Err(domain("spectrum must be sorted in descending order"));
    }
    if !(lambdas[0] > 0.0) {
        return Err(domain("all-zero spectrum"));
    }
    if !(c_gamma > 0.0 && c_gamma < 1.0) {
        return Err(domain(format!("cγ = {c_gamma} outside (0, 1)")));
    }
    Ok(())
}

/// t_A and weights for the prefix active set of the given size.
fn prefix(lambdas: &[f64], size: usize, c_gamma: f64) -> Option<(f64, Vec<f64>)> {
    if lambdas[..size].iter().any(|l| *l <= 0.0) {
        return None;
    }
    let inv: f64 = lambdas[..size].iter().map(|l| 1.0 / l).sum();
    let t = (size as f64 - c_gamma) / inv;
    let mut w = vec![0.0; lambdas.len()];
    for k in 0..size {
        w[k] = (1.0 - t / lambdas[k]) / c_gamma;
    }
    Some((t, w))
}

fn clean(mut w: Vec<f64>) -> Vec<f64> {
    w.iter_mut().for_each(|p| *p = p.max(0.0));
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|p| *p /= s);
    w
}

fn solve(lambdas: &[f64], c_gamma: f64, check_inactive: bool) -> Result<NoiseAllocation> {
    check_spectrum(lambdas, c_gamma)?;
    let mut candidates = Vec::with_capacity(lambdas.len());
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for size in 1..=lambdas.len() {
        let Some((t, w)) = prefix(lambdas, size, c_gamma) else {
            candidates.push(Candidate { size, t: f64::NAN, feasible: false });
            continue;
        };
        let mut feasible = w[..size].iter().all(|p| *p >= -FEAS_TOL);
        if check_inactive {
            feasible &= lambdas[size..].iter().all(|l| *l <= t + FEAS_TOL * t.max(1.0));
        }
        candidates.push(Candidate { size, t, feasible });
        if feasible && best.as_ref().is_none_or(|b| t < b.0) {
            best = Some((t, size, w));
        }
    }
    let (t, size, w) = best.ok_or_else(|| domain("no feasible active set"))?;
    let weights = clean(w);
    Ok(NoiseAllocation { etas: vec![0.0; lambdas.len()], weights, active_set: (0..size).collect(), t, candidates })
}

/// Active-set solver over top-|A| prefixes: t_A = (|A| − cγ)/Σ_{k∈A} 1/λ_k,
/// p_k = (1 − t_A/λ_k)/cγ. Keeps sets with p_k ≥ 0 on A and returns the one
/// with the smallest t; ties go to the smaller set.
pub fn optimal_allocation(lambdas: &[f64], c_gamma: f64) -> Result<NoiseAllocation> {
    solve(lambdas, c_gamma, false)
}

/// As [`optimal_allocation`], but a set is feasible only if every inactive
/// mode also satisfies λ_k ≤ t_A. The result minimizes max_k λ_k(1 − cγ p_k)
/// over the whole simplex.
pub fn minimax_allocation(lambdas: &[f64], c_gamma: f64) -> Result<NoiseAllocation> {
    solve(lambdas, c_gamma, true)
}
