use crate::error::Result;
use crate::mech::{compose_qfi, crossover_k, ratio_k, saturation, MechanismConfig};
use crate::row;

use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

#[derive(Debug, Clone, Copy, Default)]
pub struct ComposeExp;

impl Experiment for ComposeExp {
    fn name(&self) -> &'static str {
        "compose"
    }

    fn description(&self) -> &'static str {
        "multi-layer accounting under QFI contraction versus sequential composition"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let lam = cfg.compose_lambda;
        let mut t = Table::new("ledger", &["c_gamma", "k", "last_layer", "total", "eps_seq", "ratio", "saturation"]);
        let mut monotone = true;
        let mut bounded = true;
        for &cg in &cfg.compose_c_gammas {
            let mc = cfg.mechanism(cg / cfg.c)?;
            let sat = saturation(lam, &mc);
            let mut prev = 0.0;
            for k in 1..=cfg.compose_k_max {
                let l = compose_qfi(k, lam, &mc)?;
                monotone &= l.total >= prev;
                bounded &= l.total <= sat * (1.0 + 1e-12);
                prev = l.total;
                let last = *l.per_layer.last().expect("k ≥ 1");
                t.push(row![cg, k, last, l.total, l.eps_seq, l.ratio, sat]);
            }
        }
        out.tables.push(t);

        let (r20, r100) = (ratio_k(20, 0.1), ratio_k(100, 0.1));
        let sat = saturation(9.0, &MechanismConfig::new(1.0, 1.0, 0.1)?);
        let cross = crossover_k(0.01, 2.0, 1000);
        out.set("ratio_k20_cg0.1", r20);
        out.set("ratio_k100_cg0.1", r100);
        out.set("ratio_k1_cg0.1", ratio_k(1, 0.1));
        out.set("saturation_lambda9_cg0.1", sat);
        out.set("crossover_cg0.01", cross);
        out.check("ratio_k20", (r20 - 2.0).abs() <= 0.05, format!("R(20) = {r20:.4}"));
        out.check("ratio_k100", (r100 - 9.0).abs() <= 0.05, format!("R(100) = {r100:.4}"));
        out.check("total_monotone_bounded", monotone && bounded, format!("monotone {monotone}, bounded {bounded}"));
        out.check("saturation", (sat - 45.0).abs() < 1e-9, format!("{sat}"));
        out.check(
            "crossover",
            cross.is_some_and(|k| k.abs_diff(163) <= 5),
            match cross {
                Some(k) => format!("first k with R ≥ 2 at cγ = 0.01: {k}"),
                None => "R < 2 up to k = 1000 at cγ = 0.01".to_string(),
            },
        );
        Ok(out)
    }
}
