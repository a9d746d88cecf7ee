//! Angle embeddings of classical feature vectors into qubit registers.
//!
//! Circuit, applied to |0…0⟩: RY(α_i x_i) on every qubit, a CZ ladder on
//! neighbouring pairs, then RZ(r·α_i x_i) on every qubit with r the RZ factor.

mod dataset;
mod kernel;
mod svm;

pub use dataset::{class_centres, gen_dataset, read_csv, train_test_split, write_csv, Dataset, DATA_DIM};
pub use kernel::{cross_kernel, kernel_from_states, kernel_matrix, mixed_kernel};
pub use svm::{accuracy, svm_fit, svm_predict, SvmModel, SvmParams};

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::qstate::gates::{apply_1q, ry_matrix, rz_matrix};
use crate::qstate::{dephase, thermal_noise, MixedState, NoiseRegime, PureState};

pub const ANISOTROPIC_ALPHA: [f64; 4] = [3.0, 1.0, 0.3, 0.1];
pub const DEFAULT_RZ_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub alpha: Vec<f64>,
    pub rz_factor: f64,
}

impl EmbeddingSpec {
    pub fn new(alpha: Vec<f64>, rz_factor: f64) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Empty("alpha"));
        }
        if alpha.iter().chain(std::iter::once(&rz_factor)).any(|a| !a.is_finite()) {
            return Err(domain("embedding strengths must be finite"));
        }
        Ok(Self { alpha, rz_factor })
    }

    pub fn anisotropic() -> Self {
        Self { alpha: ANISOTROPIC_ALPHA.to_vec(), rz_factor: DEFAULT_RZ_FACTOR }
    }

    pub fn isotropic(p: usize) -> Self {
        Self { alpha: vec![1.0; p], rz_factor: DEFAULT_RZ_FACTOR }
    }

    pub fn n_qubits(&self) -> usize {
        self.alpha.len()
    }

    /// CZ pairs of the entangling ladder.
    pub fn cz_pairs(&self) -> Vec<(usize, usize)> {
        (1..self.n_qubits()).map(|i| (i - 1, i)).collect()
    }
}

pub fn embed_pure(x: &[f64], spec: &EmbeddingSpec) -> Result<PureState> {
    let n = spec.n_qubits();
    if x.len() != n {
        return Err(Error::Shape { expected: n, got: x.len() });
    }
    let mut state = PureState::zero(n);
    let amps = state.amps_mut();
    for (q, (&a, &xi)) in spec.alpha.iter().zip(x).enumerate() {
        apply_1q(amps, &ry_matrix(a * xi), q, n);
    }
    for (a, b) in spec.cz_pairs() {
        let (ma, mb) = (1usize << (n - 1 - a), 1usize << (n - 1 - b));
        for (i, amp) in amps.iter_mut().enumerate() {
            if i & ma != 0 && i & mb != 0 {
                *amp = -*amp;
            }
        }
    }
    for (q, (&a, &xi)) in spec.alpha.iter().zip(x).enumerate() {
        apply_1q(amps, &rz_matrix(spec.rz_factor * a * xi), q, n);
    }
    Ok(state)
}

/// Noise component σ(x) of a mixed embedding.
pub trait SigmaRule: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn sigma(&self, x: &[f64], spec: &EmbeddingSpec) -> Result<MixedState>;
}

/// Full X-basis dephasing of the embedding at x + shift·1.
#[derive(Debug, Clone, Copy)]
pub struct DephasedShifted {
    pub shift: f64,
}

impl Default for DephasedShifted {
    fn default() -> Self {
        Self { shift: 0.3 }
    }
}

impl SigmaRule for DephasedShifted {
    fn name(&self) -> &'static str {
        "dephased-shifted"
    }

    fn sigma(&self, x: &[f64], spec: &EmbeddingSpec) -> Result<MixedState> {
        let shifted: Vec<f64> = x.iter().map(|v| v + self.shift).collect();
        let rho = embed_pure(&shifted, spec)?.to_density();
        dephase(&rho, 1.0, std::f64::consts::FRAC_PI_2)
    }
}

/// The embedding at x passed through a hardware noise regime.
#[derive(Debug, Clone, Copy)]
pub struct Thermal {
    pub regime: NoiseRegime,
}

impl Default for Thermal {
    fn default() -> Self {
        Self { regime: NoiseRegime::high() }
    }
}

impl SigmaRule for Thermal {
    fn name(&self) -> &'static str {
        "thermal"
    }

    fn sigma(&self, x: &[f64], spec: &EmbeddingSpec) -> Result<MixedState> {
        let rho = embed_pure(x, spec)?.to_density();
        thermal_noise(&rho, &self.regime, &spec.cz_pairs())
    }
}

pub fn sigma_rules() -> Vec<Arc<dyn SigmaRule>> {
    vec![Arc::new(DephasedShifted::default()), Arc::new(Thermal::default())]
}

pub fn sigma_rule(name: &str) -> Result<Arc<dyn SigmaRule>> {
    sigma_rules()
        .into_iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| Error::Unknown { kind: "sigma rule", name: name.to_string() })
}

#[derive(Debug, Clone)]
pub struct MixedEmbeddingSpec {
    pub base: EmbeddingSpec,
    pub pure_weight: f64,
    pub noise_weight: f64,
    pub sigma_rule: Arc<dyn SigmaRule>,
}

impl MixedEmbeddingSpec {
    pub fn new(base: EmbeddingSpec, pure_weight: f64, sigma_rule: Arc<dyn SigmaRule>) -> Result<Self> {
        if !(0.0..=1.0).contains(&pure_weight) {
            return Err(domain(format!("pure weight {pure_weight} outside [0, 1]")));
        }
        Ok(Self { base, pure_weight, noise_weight: 1.0 - pure_weight, sigma_rule })
    }

    pub fn standard(base: EmbeddingSpec) -> Self {
        Self { base, pure_weight: 0.6, noise_weight: 0.4, sigma_rule: Arc::new(DephasedShifted::default()) }
    }
}

/// ρ(x) = w_pure |ψ(x)⟩⟨ψ(x)| + w_noise σ(x)
pub fn embed_mixed(x: &[f64], spec: &MixedEmbeddingSpec) -> Result<MixedState> {
    let pure = embed_pure(x, &spec.base)?.to_density();
    if spec.noise_weight == 0.0 {
        return Ok(pure);
    }
    let sigma = spec.sigma_rule.sigma(x, &spec.base)?;
    MixedState::mixture(&[(spec.pure_weight, &pure), (spec.noise_weight, &sigma)])
}
