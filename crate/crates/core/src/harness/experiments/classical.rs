use rand::Rng;
use std::sync::Arc;

use rayon::prelude::*;

use crate::embed::{kernel_matrix, mixed_kernel};
use crate::error::Result;
use crate::linalg::{eig_symmetric, RMat};
use crate::mech::{privacy_mode, ModeContext, PrivacyMechanism};
use crate::qstate::MixedState;
use crate::rng::{substream, Gaussian, SeededRng};
use crate::row;

use super::{split_accuracy, Split};
use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

const NOISE_STREAM: u64 = 0xC1A5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelNoise {
    Gaussian {
        sigma: f64,
    },
    /// Scale b; variance 2b².
    Laplace {
        b: f64,
    },
}

impl KernelNoise {
    fn sample(&self, rng: &mut SeededRng, g: &mut Gaussian) -> f64 {
        match *self {
            KernelNoise::Gaussian { sigma } => sigma * g.sample(rng),
            KernelNoise::Laplace { b } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    }
}

/// Adds symmetric noise to every entry on and above the diagonal.
pub fn noisy_kernel(k: &RMat, noise: KernelNoise, rng: &mut SeededRng) -> RMat {
    let n = k.rows();
    let mut g = Gaussian::new();
    let mut out = k.clone();
    for i in 0..n {
        for j in i..n {
            let v = k[(i, j)] + noise.sample(rng, &mut g);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Projects onto the PSD cone by zeroing negative eigenvalues.
pub fn clamp_psd(k: &RMat) -> Result<RMat> {
    let (vals, vecs) = eig_symmetric(k)?;
    if vals.iter().all(|v| *v >= 0.0) {
        return Ok(k.clone());
    }
    let n = k.rows();
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.0).collect();
    Ok(RMat::from_fn(n, n, |i, j| keep.iter().map(|&m| vals[m] * vecs[(i, m)] * vecs[(j, m)]).sum()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRow {
    pub gamma: f64,
    /// RMS off-diagonal kernel perturbation of the quantum channel.
    pub sigma: f64,
    pub eps_quantum: f64,
    pub eps_gaussian: f64,
    pub eps_laplace: f64,
    pub acc_clean: f64,
    pub acc_quantum: f64,
    pub acc_gaussian: f64,
    pub acc_laplace: f64,
}

impl ClassicalRow {
    pub fn gap(&self) -> f64 {
        self.eps_gaussian / self.eps_quantum
    }
}

struct Prepared {
    mode: Arc<dyn PrivacyMechanism>,
    split: Split,
    k_clean: RMat,
    ctx: ModeContext,
    acc_clean: f64,
    dp_delta: f64,
    seed: u64,
}

impl Prepared {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let split = Split::new(cfg)?;
        let spec = cfg.embedding()?;
        let ctx = ModeContext::from_points(&split.points, &spec, &cfg.mechanism(cfg.gammas[0])?, cfg.f_min, cfg.tau)?;
        let k_clean = kernel_matrix(&split.points, &spec)?;
        let acc_clean = split_accuracy(&k_clean, &split)?;
        Ok(Self {
            mode: privacy_mode(&cfg.mode)?,
            split,
            k_clean,
            ctx,
            acc_clean,
            dp_delta: cfg.dp_delta,
            seed: cfg.seed,
        })
    }

    fn row(&self, gamma: f64) -> Result<ClassicalRow> {
        let ctx = self.ctx.with_gamma(gamma)?;
        let outputs =
            self.split.points.iter().map(|x| self.mode.apply(x, &ctx)).collect::<Result<Vec<MixedState>>>()?;
        let k_q = mixed_kernel(&outputs, &outputs);
        let n = self.split.len();
        let (mut ss, mut cnt) = (0.0, 0usize);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = k_q[(i, j)] - self.k_clean[(i, j)];
                ss += d * d;
                cnt += 1;
            }
        }
        let sigma = (ss / cnt as f64).sqrt();
        // Replacing one record moves one kernel row and column.
        let l2 = (2.0 * (n - 1) as f64).sqrt();
        let l1 = 2.0 * (n - 1) as f64;
        let eps_gaussian = l2 * (2.0 * (1.25 / self.dp_delta).ln()).sqrt() / sigma;
        let b = sigma / std::f64::consts::SQRT_2;
        let eps_laplace = l1 / b;

        let mut rng = substream(self.seed, NOISE_STREAM ^ gamma.to_bits());
        let k_g = clamp_psd(&noisy_kernel(&self.k_clean, KernelNoise::Gaussian { sigma }, &mut rng))?;
        let k_l = clamp_psd(&noisy_kernel(&self.k_clean, KernelNoise::Laplace { b }, &mut rng))?;
        Ok(ClassicalRow {
            gamma,
            sigma,
            eps_quantum: self.mode.epsilon(&ctx)?,
            eps_gaussian,
            eps_laplace,
            acc_clean: self.acc_clean,
            acc_quantum: split_accuracy(&k_q, &self.split)?,
            acc_gaussian: split_accuracy(&k_g, &self.split)?,
            acc_laplace: split_accuracy(&k_l, &self.split)?,
        })
    }
}

/// Quantum (configured mode) versus classical kernel-noise ε at matched noise power.
pub fn classical_gap(cfg: &ExperimentConfig, gamma: f64) -> Result<ClassicalRow> {
    Prepared::new(cfg)?.row(gamma)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicalExp;

impl Experiment for ClassicalExp {
    fn name(&self) -> &'static str {
        "classical"
    }

    fn description(&self) -> &'static str {
        "Gaussian and Laplace kernel-noise baselines at matched noise power"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let prep = Prepared::new(cfg)?;
        let rows = cfg.gammas.par_iter().map(|&g| prep.row(g)).collect::<Result<Vec<_>>>()?;
        let mut t = Table::new(
            "baseline",
            &[
                "gamma",
                "sigma",
                "eps_quantum",
                "eps_gaussian",
                "eps_laplace",
                "gap",
                "acc_clean",
                "acc_quantum",
                "acc_gaussian",
                "acc_laplace",
                "seed",
            ],
        );
        for r in &rows {
            t.push(row![
                r.gamma,
                r.sigma,
                r.eps_quantum,
                r.eps_gaussian,
                r.eps_laplace,
                r.gap(),
                r.acc_clean,
                r.acc_quantum,
                r.acc_gaussian,
                r.acc_laplace,
                cfg.seed
            ]);
        }
        out.tables.push(t);
        let reference = match rows.iter().find(|r| r.gamma == 0.01) {
            Some(r) => *r,
            None => prep.row(0.01)?,
        };
        out.set("mode", &cfg.mode);
        out.set("gap_gamma0.01", reference.gap());
        out.set("eps_quantum_gamma0.01", reference.eps_quantum);
        out.set("eps_gaussian_gamma0.01", reference.eps_gaussian);
        out.set("accuracy_clean", prep.acc_clean);
        out.check("gaussian_gap", reference.gap() >= 1e3, format!("ε_G/ε_Q at γ = 0.01: {:.1}", reference.gap()));
        let ordered = rows.iter().all(|r| r.eps_laplace >= r.eps_gaussian);
        out.check("laplace_above_gaussian", ordered, "ε_L ≥ ε_G at every γ");
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_matches_clean_accuracy() {
        let cfg = ExperimentConfig { n: 40, ..ExperimentConfig::default() };
        let split = Split::new(&cfg).unwrap();
        let k = kernel_matrix(&split.points, &cfg.embedding().unwrap()).unwrap();
        let mut rng = substream(1, 2);
        for noise in [KernelNoise::Gaussian { sigma: 0.0 }, KernelNoise::Laplace { b: 0.0 }] {
            let kn = clamp_psd(&noisy_kernel(&k, noise, &mut rng)).unwrap();
            assert_eq!(split_accuracy(&kn, &split).unwrap(), split_accuracy(&k, &split).unwrap());
        }
    }

    #[test]
    fn laplace_variance() {
        let mut rng = substream(7, 0);
        let mut g = Gaussian::new();
        let noise = KernelNoise::Laplace { b: 0.5 };
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng, &mut g)).collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var - 0.5).abs() < 0.01, "{var}");
    }

    #[test]
    fn clamp_removes_negative_spectrum() {
        let k = RMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let c = clamp_psd(&k).unwrap();
        let (vals, _) = eig_symmetric(&c).unwrap();
        assert!(vals.iter().all(|v| *v > -1e-12));
        assert!((c[(0, 0)] - 1.5).abs() < 1e-12 && (c[(0, 1)] - 1.5).abs() < 1e-12);
    }
}
