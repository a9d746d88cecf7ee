mod adaptive;
mod adversary;
mod audit;
mod classical;
mod compose;
mod dephasing;
mod hwnoise;
mod spectrum;
mod tradeoff;

pub use adaptive::AdaptiveExp;
pub use adversary::AdversaryExp;
pub use audit::AuditExp;
pub use classical::{classical_gap, ClassicalExp};
pub use compose::ComposeExp;
pub use dephasing::DephasingExp;
pub use hwnoise::HwNoiseExp;
pub use spectrum::SpectrumExp;
pub use tradeoff::{mode_sweep, ParetoExp, SweepRow, TradeoffExp};

use crate::embed::{svm_fit, svm_predict, train_test_split, Dataset, SvmParams};
use crate::error::Result;
use crate::linalg::RMat;
use crate::qstate::{MixedState, PureState};

use super::ExperimentConfig;

/// Training rows first, then test rows.
pub(crate) struct Split {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub n_train: usize,
}

impl Split {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Self::from_dataset(&cfg.dataset()?, cfg.train_frac, cfg.seed)
    }

    pub fn from_dataset(data: &Dataset, train_frac: f64, seed: u64) -> Result<Self> {
        let (train, test) = train_test_split(data, train_frac, seed)?;
        let n_train = train.len();
        let mut points = train.points;
        points.extend(test.points);
        let mut labels = train.labels;
        labels.extend(test.labels);
        Ok(Self { points, labels, n_train })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// SVM test accuracy from a full kernel over train ++ test rows.
pub(crate) fn split_accuracy(k: &RMat, split: &Split) -> Result<f64> {
    let (nt, n) = (split.n_train, split.len());
    let k_train = RMat::from_fn(nt, nt, |i, j| k[(i, j)]);
    let k_test = RMat::from_fn(n - nt, nt, |i, j| k[(nt + i, j)]);
    let model = svm_fit(&k_train, &split.labels[..nt], &SvmParams::default())?;
    let pred = svm_predict(&model, &k_test)?;
    Ok(crate::embed::accuracy(&pred, &split.labels[nt..]))
}

/// ⟨ψ|ρ|ψ⟩ clamped to [0, 1].
pub(crate) fn overlap(psi: &PureState, rho: &MixedState) -> f64 {
    let v = psi.amplitudes();
    crate::linalg::inner(v, &rho.matrix().mat_vec(v)).re.clamp(0.0, 1.0)
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}
