use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::adversary::{dephasing_curve, dephasing_mi, SensitiveGrid};
use crate::embed::{embed_mixed, MixedEmbeddingSpec};
use crate::error::Result;
use crate::qfi::{qfi_mixed, QfiDecomposition, DEFAULT_STEP};
use crate::qstate::dephase;
use crate::row;

use super::linspace;
use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

/// Midpoint of the two class centres at the default separation.
const MIXED_POINT: [f64; 4] = [0.75, 0.525, 0.0, 0.0];

#[derive(Debug, Clone, Copy, Default)]
pub struct DephasingExp;

impl Experiment for DephasingExp {
    fn name(&self) -> &'static str {
        "dephasing"
    }

    fn description(&self) -> &'static str {
        "rotated-basis dephasing leakage and the classical/quantum QFI split"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let spec = cfg.embedding()?;
        let grid = SensitiveGrid { size: cfg.dephasing_grid, ..SensitiveGrid::default() };
        let thetas = linspace(0.0, FRAC_PI_2, cfg.dephasing_thetas);
        let curve = dephasing_curve(&thetas, &cfg.dephasing_gammas, &spec, &grid)?;
        let mut t = Table::new("mi", &["gamma", "theta", "mi_nats", "baseline_nats", "residual"]);
        for (g, gamma) in curve.gammas.iter().enumerate() {
            for (k, theta) in curve.thetas.iter().enumerate() {
                t.push(row![*gamma, *theta, curve.mi_values[g][k], curve.baseline_mi, curve.residual(g, k)]);
            }
        }
        out.tables.push(t);

        let mut t = Table::new("amplification", &["gamma", "mi_theta0", "mi_theta_pi2", "ratio"]);
        for &g in &cfg.dephasing_gammas {
            let (a, b) = (dephasing_mi(0.0, g, &spec, &grid)?, dephasing_mi(FRAC_PI_2, g, &spec, &grid)?);
            t.push(row![g, a, b, a / b]);
        }
        out.tables.push(t);
        let i0_06 = dephasing_mi(0.0, 0.6, &spec, &grid)?;
        let amp_08 = dephasing_mi(0.0, 0.8, &spec, &grid)? / dephasing_mi(FRAC_PI_2, 0.8, &spec, &grid)?;
        out.set("baseline_mi", curve.baseline_mi);
        out.set("mi_theta0_gamma0.6", i0_06);
        out.set("amplification_gamma0.8", amp_08);
        out.check(
            "theta0_retains_baseline",
            i0_06 >= curve.baseline_mi,
            format!("I(θ=0, γ=0.6) = {i0_06:.6} vs baseline {:.6}", curve.baseline_mi),
        );
        out.check("amplification", amp_08 >= 1e3, format!("I(0)/I(π/2) at γ = 0.8: {amp_08:.3}"));

        // Classical/quantum split of the dephased mixed embedding.
        let mspec = MixedEmbeddingSpec::standard(spec.clone());
        let decs = cfg
            .dephasing_gammas
            .par_iter()
            .map(|&g| qfi_mixed(&MIXED_POINT, &|y| dephase(&embed_mixed(y, &mspec)?, g, 0.0), DEFAULT_STEP))
            .collect::<Result<Vec<QfiDecomposition>>>()?;
        let mut t = Table::new(
            "mixed",
            &["gamma", "quantum_fraction", "lambda_max_total", "lambda_max_classical", "lambda_max_quantum"],
        );
        let mut fractions = Vec::new();
        let mut classical = Vec::new();
        for (g, d) in cfg.dephasing_gammas.iter().zip(&decs) {
            let (lt, lc, lq) = (d.f_total.lambda_max()?, d.f_class.lambda_max()?, d.f_quant.lambda_max()?);
            t.push(row![*g, d.quantum_fraction, lt, lc, lq]);
            fractions.push(d.quantum_fraction);
            classical.push(lc);
        }
        out.tables.push(t);
        let decreasing = fractions.windows(2).all(|w| w[1] < w[0]);
        let (first, last) = (fractions[0], *fractions.last().expect("nonempty grid"));
        let growth = classical.last().expect("nonempty grid") / classical[0];
        out.set("quantum_fractions", &fractions);
        out.set("classical_lambda_growth", growth);
        out.check(
            "quantum_fraction_decay",
            decreasing && first >= 0.85 && last < 0.2,
            format!("fractions {fractions:.3?}"),
        );
        out.check("classical_growth", growth >= 5.0, format!("classical λ_max grows {growth:.2}×"));
        Ok(out)
    }
}
