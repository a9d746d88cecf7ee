use crate::embed::{embed_pure, EmbeddingSpec};
use crate::error::{domain, Result};
use crate::qstate::fidelity_pure;

use super::{qfi_pure, QfiOptions};

/// |(1 − F(x, x + h v)) − ¼ h² vᵀ F v| for each step h.
pub fn expansion_residuals(x: &[f64], spec: &EmbeddingSpec, v: &[f64], steps: &[f64]) -> Result<Vec<f64>> {
    let f = qfi_pure(x, spec, QfiOptions { richardson: true, ..QfiOptions::default() })?;
    let q = f.entries.bilinear(v, v);
    let psi = embed_pure(x, spec)?;
    steps
        .iter()
        .map(|&h| {
            let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
            let infid = 1.0 - fidelity_pure(&psi, &embed_pure(&y, spec)?)?;
            Ok((infid - 0.25 * h * h * q).abs())
        })
        .collect()
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(domain("need at least two matching points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(domain("log-log fit needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(3)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 3.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn residual_is_higher_order() {
        let spec = EmbeddingSpec::anisotropic();
        let steps: Vec<f64> = (0..5).map(|i| 0.1 / 2f64.powi(i)).collect();
        let v = [0.6, 0.8, 0.0, 0.0];
        let r = expansion_residuals(&[0.75, 0.525, 0.0, 0.0], &spec, &v, &steps).unwrap();
        assert!(loglog_slope(&steps, &r).unwrap() >= 2.5);
    }
}
