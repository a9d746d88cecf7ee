use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::embed::{Dataset, EmbeddingSpec};
use crate::error::{domain, Result};
use crate::qfi::{lambda_max_at, lambda_max_samples, median};
use crate::rng::substream;

const POISON_STREAM: u64 = 0x9015;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoisonReport {
    pub beta: f64,
    pub poisoned: Vec<usize>,
    pub clean_mean: f64,
    pub poisoned_mean: f64,
    pub clean_median: f64,
    pub poisoned_median: f64,
    /// Poisoned centroid minus clean centroid.
    pub centroid_shift: Vec<f64>,
}

impl PoisonReport {
    pub fn mean_error(&self) -> f64 {
        (self.poisoned_mean - self.clean_mean).abs() / self.clean_mean
    }

    pub fn median_error(&self) -> f64 {
        (self.poisoned_median - self.clean_median).abs() / self.clean_median
    }
}

/// Clean per-sample λ_max cached for repeated poisoning runs.
#[derive(Debug, Clone)]
pub struct PoisonSetup {
    pub points: Vec<Vec<f64>>,
    pub spec: EmbeddingSpec,
    clean_samples: Vec<f64>,
    clean_centroid: Vec<f64>,
    clean_mean: f64,
    clean_median: f64,
}

fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    (0..d).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / points.len() as f64).collect()
}

impl PoisonSetup {
    pub fn new(data: &Dataset, spec: &EmbeddingSpec) -> Result<Self> {
        if data.is_empty() {
            return Err(crate::Error::Empty("dataset"));
        }
        let clean_samples = lambda_max_samples(&data.points, spec)?;
        let clean_centroid = centroid(&data.points);
        Ok(Self {
            clean_mean: lambda_max_at(&clean_centroid, spec)?,
            clean_median: median(&clean_samples)?,
            points: data.points.clone(),
            spec: spec.clone(),
            clean_samples,
            clean_centroid,
        })
    }

    /// Shifts ⌊βn⌋ seeded points by δx and re-estimates λ_max both ways.
    pub fn run(&self, beta: f64, delta_x: &[f64], seed: u64) -> Result<PoisonReport> {
        let n = self.points.len();
        if !(0.0..0.5).contains(&beta) {
            return Err(domain(format!("poison fraction {beta} outside [0, 0.5)")));
        }
        if delta_x.len() != self.points[0].len() {
            return Err(crate::Error::Shape { expected: self.points[0].len(), got: delta_x.len() });
        }
        let k = (beta * n as f64).floor() as usize;
        if beta > 0.0 && k == 0 {
            return Err(domain(format!("β n = {} poisons no point", beta * n as f64)));
        }
        let mut chosen = sample(&mut substream(seed, POISON_STREAM), n, k).into_vec();
        chosen.sort_unstable();
        let mut points = self.points.clone();
        for &i in &chosen {
            points[i].iter_mut().zip(delta_x).for_each(|(p, d)| *p += d);
        }
        let moved: Vec<Vec<f64>> = chosen.iter().map(|&i| points[i].clone()).collect();
        let moved_lambda = lambda_max_samples(&moved, &self.spec)?;
        let mut samples = self.clean_samples.clone();
        for (&i, l) in chosen.iter().zip(moved_lambda) {
            samples[i] = l;
        }
        let c = centroid(&points);
        let centroid_shift = c.iter().zip(&self.clean_centroid).map(|(a, b)| a - b).collect();
        let (poisoned_mean, poisoned_median) = if k == 0 {
            (self.clean_mean, self.clean_median)
        } else {
            (lambda_max_at(&c, &self.spec)?, median(&samples)?)
        };
        Ok(PoisonReport {
            beta,
            poisoned: chosen,
            clean_mean: self.clean_mean,
            poisoned_mean,
            clean_median: self.clean_median,
            poisoned_median,
            centroid_shift,
        })
    }
}

pub fn poison_experiment(
    data: &Dataset,
    beta: f64,
    delta_x: &[f64],
    spec: &EmbeddingSpec,
    seed: u64,
) -> Result<PoisonReport> {
    PoisonSetup::new(data, spec)?.run(beta, delta_x, seed)
}
