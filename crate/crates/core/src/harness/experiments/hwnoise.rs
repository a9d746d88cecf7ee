use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::embed::embed_pure;
use crate::error::Result;
use crate::qstate::{fidelity, thermal_noise, MixedState, NoiseRegime};
use crate::rng::substream;
use crate::row;

use super::mean;
use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

const HW_STREAM: u64 = 0x4E01;
/// Reference value and tolerance for the high-noise pair perturbation.
const HIGH_DF: (f64, f64) = (0.041, 0.02);

#[derive(Debug, Clone, Copy, Default)]
pub struct HwNoiseExp;

impl Experiment for HwNoiseExp {
    fn name(&self) -> &'static str {
        "hwnoise"
    }

    fn description(&self) -> &'static str {
        "fidelity perturbation under thermal-relaxation noise regimes"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let spec = cfg.embedding()?;
        let p = spec.n_qubits();
        let mut rng = substream(cfg.seed, HW_STREAM);
        let mut draw = || (0..p).map(|_| rng.random_range(-PI..PI)).collect::<Vec<f64>>();
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.hw_pairs).map(|_| (draw(), draw())).collect();
        let clean = pairs
            .par_iter()
            .map(|(a, b)| Ok((embed_pure(a, &spec)?.to_density(), embed_pure(b, &spec)?.to_density())))
            .collect::<Result<Vec<(MixedState, MixedState)>>>()?;
        let cz = spec.cz_pairs();

        let mut t = Table::new(
            "regimes",
            &["regime", "t1_us", "t2_us", "eps_1q", "eps_2q", "gate_time_us", "delta_f", "state_loss", "pairs"],
        );
        let mut dfs = Vec::new();
        for (name, reg) in NoiseRegime::presets() {
            let per_pair = clean
                .par_iter()
                .map(|(a, b)| {
                    let na = thermal_noise(a, &reg, &cz)?;
                    let nb = thermal_noise(b, &reg, &cz)?;
                    let df = (fidelity(a, b)? - fidelity(&na, &nb)?).abs();
                    Ok((df, 1.0 - fidelity(a, &na)?))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let df = mean(&per_pair.iter().map(|v| v.0).collect::<Vec<_>>());
            let loss = mean(&per_pair.iter().map(|v| v.1).collect::<Vec<_>>());
            t.push(row![name, reg.t1_us, reg.t2_us, reg.eps_1q, reg.eps_2q, reg.gate_time_us, df, loss, cfg.hw_pairs]);
            out.set(&format!("delta_f_{name}"), df);
            dfs.push(df);
        }
        out.tables.push(t);
        let increasing = dfs.windows(2).all(|w| w[1] > w[0]);
        out.check("regime_ordering", increasing, format!("ΔF = {dfs:.4?}"));
        let high = dfs[3];
        out.check(
            "high_regime",
            (high - HIGH_DF.0).abs() <= HIGH_DF.1,
            format!("high ΔF = {high:.4}, reference {} ± {}", HIGH_DF.0, HIGH_DF.1),
        );
        Ok(out)
    }
}
