use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{embed_pure, EmbeddingSpec};
use crate::error::{domain, Error, Result};
use crate::linalg::norm;
use crate::qfi::lambda_max_at;
use crate::qstate::{measure_probs, Distribution};

use super::transport::transport;

pub const MAX_W1_DIM: usize = 64;

/// W1 between bitstring distributions under the Hamming ground metric.
pub fn w1_diag(p: &Distribution, q: &Distribution) -> Result<f64> {
    let d = p.dim();
    if q.dim() != d {
        return Err(Error::Shape { expected: d, got: q.dim() });
    }
    if d > MAX_W1_DIM {
        return Err(domain(format!("dimension {d} exceeds {MAX_W1_DIM}")));
    }
    let cost: Vec<f64> = (0..d * d).map(|c| ((c / d) ^ (c % d)).count_ones() as f64).collect();
    Ok(transport(&cost, &p.probs, &q.probs)?.cost)
}

pub fn z_distribution(x: &[f64], spec: &EmbeddingSpec) -> Result<Distribution> {
    Ok(measure_probs(&embed_pure(x, spec)?.to_density()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairW1 {
    pub distance: f64,
    pub w1: f64,
    pub ratio: f64,
}

impl PairW1 {
    /// ε(x, x') ≤ L_W ‖x − x'‖ / γ
    pub fn global_bound(&self, l_w: f64, gamma: f64) -> f64 {
        l_w * self.distance / gamma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WassersteinReport {
    /// max over pairs of W1/‖x − x'‖
    pub l_w_sup: f64,
    /// mean over pairs of W1/‖x − x'‖
    pub l_w_mean: f64,
    /// sqrt of the largest λ_max over pair endpoints
    pub sqrt_lambda_max: f64,
    pub gap_sup: f64,
    pub gap_mean: f64,
    pub pairs: Vec<PairW1>,
}

pub fn wasserstein_lipschitz(pairs: &[(Vec<f64>, Vec<f64>)], spec: &EmbeddingSpec) -> Result<WassersteinReport> {
    if pairs.is_empty() {
        return Err(Error::Empty("pair list"));
    }
    let rows: Vec<(PairW1, f64)> = pairs
        .par_iter()
        .map(|(a, b)| {
            let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            let distance = norm(&diff);
            if !(distance > 1e-6) {
                return Err(domain(format!("pair distance {distance:e} not above 1e-6")));
            }
            let w1 = w1_diag(&z_distribution(a, spec)?, &z_distribution(b, spec)?)?;
            let lam = lambda_max_at(a, spec)?.max(lambda_max_at(b, spec)?);
            Ok((PairW1 { distance, w1, ratio: w1 / distance }, lam))
        })
        .collect::<Result<_>>()?;
    let l_w_sup = rows.iter().map(|r| r.0.ratio).fold(0.0, f64::max);
    let l_w_mean = rows.iter().map(|r| r.0.ratio).sum::<f64>() / rows.len() as f64;
    let sqrt_lambda_max = rows.iter().map(|r| r.1).fold(0.0, f64::max).sqrt();
    let gap = |l: f64| if l > 0.0 { sqrt_lambda_max / l } else { f64::INFINITY };
    Ok(WassersteinReport {
        l_w_sup,
        l_w_mean,
        sqrt_lambda_max,
        gap_sup: gap(l_w_sup),
        gap_mean: gap(l_w_mean),
        pairs: rows.into_iter().map(|r| r.0).collect(),
    })
}
