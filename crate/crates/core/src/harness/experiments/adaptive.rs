use rand::seq::SliceRandom;

use crate::error::{domain, Result};
use crate::qfi::{adaptive_epsilon, lambda_max_samples, EmaTracker};
use crate::rng::substream;
use crate::row;

use super::mean;
use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

const SHUFFLE_STREAM: u64 = 0xADA;
/// Relative distance to the population mean that counts as converged.
const CONVERGED: f64 = 0.10;

#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptiveExp;

impl Experiment for AdaptiveExp {
    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn description(&self) -> &'static str {
        "online λ_max tracking over batches and the resulting adaptive ε"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let spec = cfg.embedding()?;
        let data = cfg.dataset()?;
        let needed = cfg.adaptive_batches * cfg.adaptive_batch_size;
        if needed == 0 || needed > data.len() {
            return Err(domain(format!("{needed} batch samples requested from {} points", data.len())));
        }
        let lam = lambda_max_samples(&data.points, &spec)?;
        let population = mean(&lam);
        let worst = lam.iter().copied().fold(0.0, f64::max);

        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut substream(cfg.seed, SHUFFLE_STREAM));

        let mut running = EmaTracker::running_mean();
        let mut fixed = EmaTracker::new(cfg.adaptive_beta)?;
        let mut t = Table::new(
            "batches",
            &["batch", "batch_mean", "running_mean", "ema_fixed", "rel_err_running", "rel_err_fixed", "eps_adaptive"],
        );
        let mut errs = Vec::new();
        for (b, chunk) in order[..needed].chunks(cfg.adaptive_batch_size).enumerate() {
            let obs = mean(&chunk.iter().map(|&i| lam[i]).collect::<Vec<_>>());
            running = running.update(obs)?;
            fixed = fixed.update(obs)?;
            let (er, ef) =
                ((running.value - population).abs() / population, (fixed.value - population).abs() / population);
            let eps = adaptive_epsilon(&running, cfg.delta, cfg.c, cfg.adaptive_gamma)?;
            t.push(row![b + 1, obs, running.value, fixed.value, er, ef, eps]);
            errs.push(er);
        }
        out.tables.push(t);
        // First batch after which the running tracker stays within tolerance.
        let converged_at = (0..errs.len()).find(|&b| errs[b..].iter().all(|e| *e <= CONVERGED)).map(|b| b + 1);

        let eps_worst = 0.5 * cfg.delta * cfg.delta * worst;
        let eps_adapt = adaptive_epsilon(&running, cfg.delta, cfg.c, cfg.adaptive_gamma)?;
        let ratio = eps_worst / eps_adapt;
        out.set("population_mean", population);
        out.set("worst_case_lambda", worst);
        out.set("final_running", running.value);
        out.set("final_fixed", fixed.value);
        out.set("converged_batch", converged_at);
        out.set("eps_worst_case", eps_worst);
        out.set("eps_adaptive", eps_adapt);
        out.set("eps_ratio", ratio);
        out.check(
            "ema_convergence",
            converged_at.is_some_and(|b| b <= cfg.adaptive_batches),
            match converged_at {
                Some(b) => format!("within {:.0}% from batch {b}", CONVERGED * 100.0),
                None => format!("not within {:.0}% by the last batch", CONVERGED * 100.0),
            },
        );
        out.check("adaptive_ratio", ratio >= 1.5, format!("worst-case/adaptive ε = {ratio:.3}"));
        Ok(out)
    }
}
