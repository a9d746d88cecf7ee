use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{embed_pure, EmbeddingSpec};
use crate::error::{domain, Error, Result};
use crate::qstate::{dephase, measure_probs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitiveGrid {
    /// Fixed coordinates; the sensitive one is overwritten by the grid.
    pub anchor: Vec<f64>,
    pub feature: usize,
    pub lo: f64,
    pub hi: f64,
    pub size: usize,
}

impl Default for SensitiveGrid {
    fn default() -> Self {
        Self { anchor: vec![0.75, 0.525, 0.0, 0.0], feature: 0, lo: -1.5, hi: 1.5, size: 32 }
    }
}

impl SensitiveGrid {
    fn validate(&self) -> Result<()> {
        if self.size < 8 {
            return Err(domain(format!("grid size {} below 8", self.size)));
        }
        if !(self.hi > self.lo) {
            return Err(domain("degenerate grid range"));
        }
        if self.feature >= self.anchor.len() {
            return Err(Error::Index { index: self.feature, n: self.anchor.len() });
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.size - 1) as f64;
        (0..self.size).map(|i| self.lo + step * i as f64).collect()
    }
}

/// I(s; M) in nats for a uniform prior over the grid, Z-basis readout after
/// dephasing with strength γ in the basis rotated by θ.
pub fn dephasing_mi(theta: f64, gamma: f64, spec: &EmbeddingSpec, grid: &SensitiveGrid) -> Result<f64> {
    grid.validate()?;
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(domain(format!("θ = {theta} outside [0, π/2]")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(domain(format!("γ = {gamma} outside [0, 1]")));
    }
    let rows: Vec<Vec<f64>> = grid
        .values()
        .into_iter()
        .map(|s| {
            let mut x = grid.anchor.clone();
            x[grid.feature] = s;
            let rho = embed_pure(&x, spec)?.to_density();
            let rho = if gamma > 0.0 { dephase(&rho, gamma, theta)? } else { rho };
            Ok(measure_probs(&rho).probs)
        })
        .collect::<Result<_>>()?;
    let g = rows.len() as f64;
    let m = rows[0].len();
    let marginal: Vec<f64> = (0..m).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / g).collect();
    let mut mi = 0.0;
    for r in &rows {
        for k in 0..m {
            if r[k] > 0.0 {
                mi += r[k] * (r[k] / marginal[k]).ln() / g;
            }
        }
    }
    Ok(mi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingCurve {
    pub thetas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// mi_values[g][t] for gammas[g], thetas[t].
    pub mi_values: Vec<Vec<f64>>,
    /// No channel applied.
    pub baseline_mi: f64,
}

impl DephasingCurve {
    /// I_θ − I_0 cos²θ at the given grid position.
    pub fn residual(&self, g: usize, t: usize) -> f64 {
        let i0 = self.baseline_mi;
        self.mi_values[g][t] - i0 * self.thetas[t].cos().powi(2)
    }
}

pub fn dephasing_curve(
    thetas: &[f64],
    gammas: &[f64],
    spec: &EmbeddingSpec,
    grid: &SensitiveGrid,
) -> Result<DephasingCurve> {
    let baseline_mi = dephasing_mi(0.0, 0.0, spec, grid)?;
    let mi_values = gammas
        .par_iter()
        .map(|&g| thetas.iter().map(|&t| dephasing_mi(t, g, spec, grid)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    Ok(DephasingCurve { thetas: thetas.to_vec(), gammas: gammas.to_vec(), mi_values, baseline_mi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn no_channel_is_theta_independent() {
        let spec = EmbeddingSpec::anisotropic();
        let g = SensitiveGrid::default();
        let a = dephasing_mi(0.0, 0.0, &spec, &g).unwrap();
        for t in [0.3, 0.9, FRAC_PI_2] {
            assert_eq!(dephasing_mi(t, 0.0, &spec, &g).unwrap(), a);
        }
    }

    #[test]
    fn bounded_and_monotone_at_right_angle() {
        let spec = EmbeddingSpec::anisotropic();
        let g = SensitiveGrid::default();
        let mut prev = f64::INFINITY;
        for gamma in [0.0, 0.2, 0.4, 0.6, 0.8] {
            let v = dephasing_mi(FRAC_PI_2, gamma, &spec, &g).unwrap();
            assert!(v >= -1e-9 && v <= (g.size as f64).ln());
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn z_dephasing_keeps_z_information() {
        let spec = EmbeddingSpec::anisotropic();
        let g = SensitiveGrid::default();
        let base = dephasing_mi(0.0, 0.0, &spec, &g).unwrap();
        assert!(dephasing_mi(0.0, 0.6, &spec, &g).unwrap() >= base - 1e-12);
    }

    #[test]
    fn rejects_bad_grid() {
        let spec = EmbeddingSpec::anisotropic();
        let g = SensitiveGrid { size: 4, ..SensitiveGrid::default() };
        assert!(dephasing_mi(0.0, 0.1, &spec, &g).is_err());
        let g = SensitiveGrid { lo: 1.0, hi: 1.0, ..SensitiveGrid::default() };
        assert!(dephasing_mi(0.0, 0.1, &spec, &g).is_err());
    }
}
