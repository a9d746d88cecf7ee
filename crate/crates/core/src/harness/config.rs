use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::{gen_dataset, Dataset, EmbeddingSpec, ANISOTROPIC_ALPHA, DEFAULT_RZ_FACTOR};
use crate::error::{Error, Result};
use crate::mech::MechanismConfig;

fn d_alpha() -> Vec<f64> {
    ANISOTROPIC_ALPHA.to_vec()
}
fn d_rz() -> f64 {
    DEFAULT_RZ_FACTOR
}
fn d_one() -> f64 {
    1.0
}
fn d_gammas() -> Vec<f64> {
    vec![0.001, 0.005, 0.01, 0.05, 0.1, 0.2]
}
fn d_seed() -> u64 {
    42
}
fn d_n() -> usize {
    200
}
fn d_sep() -> f64 {
    1.5
}
fn d_sigma() -> f64 {
    0.6
}
fn d_mode() -> String {
    "optimal".into()
}
fn d_train() -> f64 {
    0.7
}
fn d_tau() -> f64 {
    0.05
}
fn d_out() -> String {
    "results".into()
}
fn d_pareto() -> Vec<f64> {
    vec![0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5]
}
fn d_eff() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}
fn d_w1_pairs() -> usize {
    50
}
fn d_hw_pairs() -> usize {
    50
}
fn d_cgs() -> Vec<f64> {
    vec![0.01, 0.05, 0.1]
}
fn d_kmax() -> usize {
    200
}
fn d_lambda_ref() -> f64 {
    9.0
}
fn d_leak() -> Vec<f64> {
    vec![11.2, 1.0, 0.09, 0.01]
}
fn d_eps_adv() -> f64 {
    0.05
}
fn d_beta() -> f64 {
    0.1
}
fn d_shift() -> Vec<f64> {
    vec![2.0, 2.0, 0.0, 0.0]
}
fn d_trials20() -> usize {
    20
}
fn d_batches() -> usize {
    10
}
fn d_batch() -> usize {
    20
}
fn d_ema_beta() -> f64 {
    0.9
}
fn d_adaptive_gamma() -> f64 {
    0.4
}
fn d_thetas() -> usize {
    7
}
fn d_deph_gammas() -> Vec<f64> {
    vec![0.0, 0.2, 0.4, 0.6, 0.8]
}
fn d_grid() -> usize {
    32
}
fn d_dp_delta() -> f64 {
    1e-5
}
fn d_audit_n() -> usize {
    100
}
fn d_ratio() -> f64 {
    0.12
}
fn d_fraud() -> f64 {
    0.8
}
fn d_audit_trials() -> usize {
    200
}
fn d_honest_trials() -> usize {
    100
}
fn d_fraud_rate() -> f64 {
    0.1
}
fn d_audit_gamma() -> f64 {
    0.01
}

/// Flat key/value run configuration; every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Per-qubit embedding strengths.
    #[serde(default = "d_alpha")]
    pub alpha: Vec<f64>,
    #[serde(default = "d_rz")]
    pub rz_factor: f64,
    #[serde(default = "d_one")]
    pub delta: f64,
    #[serde(default = "d_one")]
    pub c: f64,
    #[serde(default = "d_gammas")]
    pub gammas: Vec<f64>,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default = "d_sep")]
    pub separation: f64,
    #[serde(default = "d_sigma")]
    pub sigma: f64,
    /// Quantum mode compared against the classical baselines.
    #[serde(default = "d_mode")]
    pub mode: String,
    #[serde(default = "d_train")]
    pub train_frac: f64,
    /// Subspace cutoff.
    #[serde(default = "d_tau")]
    pub tau: f64,
    /// Minimum pairwise fidelity for the isotropic bound; 1/d when absent.
    #[serde(default)]
    pub f_min: Option<f64>,
    #[serde(default = "d_out")]
    pub out_dir: String,

    #[serde(default = "d_pareto")]
    pub pareto_gammas: Vec<f64>,
    #[serde(default = "d_eff")]
    pub effective_gammas: Vec<f64>,
    #[serde(default = "d_w1_pairs")]
    pub w1_pairs: usize,
    #[serde(default = "d_hw_pairs")]
    pub hw_pairs: usize,
    #[serde(default = "d_cgs")]
    pub compose_c_gammas: Vec<f64>,
    #[serde(default = "d_kmax")]
    pub compose_k_max: usize,
    #[serde(default = "d_lambda_ref")]
    pub compose_lambda: f64,
    #[serde(default = "d_leak")]
    pub leakage_lambdas: Vec<f64>,
    #[serde(default = "d_one")]
    pub leakage_var: f64,
    #[serde(default = "d_one")]
    pub leakage_eps: f64,
    #[serde(default = "d_eps_adv")]
    pub evasion_eps: f64,
    #[serde(default = "d_beta")]
    pub poison_beta: f64,
    #[serde(default = "d_shift")]
    pub poison_shift: Vec<f64>,
    #[serde(default = "d_trials20")]
    pub poison_trials: usize,
    #[serde(default = "d_batches")]
    pub adaptive_batches: usize,
    #[serde(default = "d_batch")]
    pub adaptive_batch_size: usize,
    #[serde(default = "d_ema_beta")]
    pub adaptive_beta: f64,
    #[serde(default = "d_adaptive_gamma")]
    pub adaptive_gamma: f64,
    #[serde(default = "d_thetas")]
    pub dephasing_thetas: usize,
    #[serde(default = "d_deph_gammas")]
    pub dephasing_gammas: Vec<f64>,
    #[serde(default = "d_grid")]
    pub dephasing_grid: usize,
    #[serde(default = "d_dp_delta")]
    pub dp_delta: f64,
    #[serde(default = "d_audit_n")]
    pub audit_n: usize,
    #[serde(default = "d_ratio")]
    pub audit_ratio: f64,
    #[serde(default = "d_fraud")]
    pub audit_fraud_factor: f64,
    /// Chance that each record is forged in a fraud trial.
    #[serde(default = "d_fraud_rate")]
    pub audit_fraud_rate: f64,
    #[serde(default = "d_audit_trials")]
    pub audit_trials: usize,
    #[serde(default = "d_honest_trials")]
    pub audit_honest_trials: usize,
    /// Noise level used to price the committed records.
    #[serde(default = "d_audit_gamma")]
    pub audit_gamma: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.gammas.is_empty() || self.pareto_gammas.is_empty() || self.dephasing_gammas.is_empty() {
            return bad("sweep grids must be nonempty".into());
        }
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return bad(format!("n = {} must be even and at least 4", self.n));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return bad(format!("train_frac {} outside (0, 1)", self.train_frac));
        }
        if !(self.audit_fraud_rate > 0.0 && self.audit_fraud_rate <= 1.0) {
            return bad(format!("audit_fraud_rate {} outside (0, 1]", self.audit_fraud_rate));
        }
        self.embedding()?;
        self.mechanism(self.gammas[0])?;
        crate::mech::privacy_mode(&self.mode)?;
        Ok(())
    }

    pub fn embedding(&self) -> Result<EmbeddingSpec> {
        EmbeddingSpec::new(self.alpha.clone(), self.rz_factor)
    }

    pub fn mechanism(&self, gamma: f64) -> Result<MechanismConfig> {
        MechanismConfig::new(self.delta, self.c, gamma)
    }

    pub fn dataset(&self) -> Result<Dataset> {
        gen_dataset(self.n, self.separation, self.sigma, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let d = ExperimentConfig::default();
        assert_eq!(d.seed, 42);
        assert_eq!(d.alpha, vec![3.0, 1.0, 0.3, 0.1]);
        let c = ExperimentConfig::from_toml("seed = 7\ngammas = [0.1]\n").unwrap();
        assert_eq!((c.seed, c.gammas.clone()), (7, vec![0.1]));
        assert!(ExperimentConfig::from_toml("sede = 7").is_err());
        assert!(ExperimentConfig::from_toml("mode = \"nope\"").is_err());
        let back = ExperimentConfig::from_toml(&d.to_toml().unwrap()).unwrap();
        assert_eq!(back, d);
    }
}
