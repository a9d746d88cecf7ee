use rayon::prelude::*;

use crate::adversary::{evasion_analysis, evasion_direct, leakage_profile, PoisonReport, PoisonSetup};
use crate::embed::gen_dataset;
use crate::error::Result;
use crate::qfi::{qfi_pure, spectral, QfiOptions, QfiSpectrum};
use crate::row;

use super::mean;
use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

/// Median-based error must be at most this fraction of the mean-based error.
const ROBUSTNESS_FACTOR: f64 = 0.6;

#[derive(Debug, Clone, Copy, Default)]
pub struct AdversaryExp;

impl Experiment for AdversaryExp {
    fn name(&self) -> &'static str {
        "adversary"
    }

    fn description(&self) -> &'static str {
        "mode-resolved leakage, directional evasion and λ_max poisoning"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let spec = cfg.embedding()?;

        let leak = leakage_profile(&cfg.leakage_lambdas, cfg.leakage_var, cfg.leakage_eps)?;
        let mut t = Table::new("leakage", &["k", "lambda", "info_nats", "fraction"]);
        for (k, l) in cfg.leakage_lambdas.iter().enumerate() {
            t.push(row![k, *l, leak.per_mode[k], leak.fractions[k]]);
        }
        out.tables.push(t);
        out.set("leakage_total", leak.total);
        out.set("leakage_top_info", leak.per_mode.first().copied());
        out.set("leakage_top_fraction", leak.fractions.first().copied());

        // Evasion at every dataset point.
        let data = cfg.dataset()?;
        let eps = cfg.evasion_eps;
        let rows = data
            .points
            .par_iter()
            .map(|x| {
                let s = spectral(&qfi_pure(x, &spec, QfiOptions::default())?)?;
                let r = evasion_analysis(&s, eps)?;
                let hi = evasion_direct(x, &spec, &s, 0, eps)?;
                let lo = evasion_direct(x, &spec, &s, s.dim() - 1, eps)?;
                Ok((s, r, hi, lo))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut t = Table::new(
            "evasion",
            &[
                "point",
                "lambda_max",
                "lambda_min",
                "ratio",
                "d_inf_max",
                "d_inf_min",
                "direct_max",
                "quadratic_max",
                "rel_err_max",
                "rel_err_min",
            ],
        );
        let mut ratio_ok = true;
        let mut worst_rel: f64 = 0.0;
        for (i, (s, r, hi, lo)) in rows.iter().enumerate() {
            ratio_ok &= r.ratio_infinite || (r.ratio - s.lambda_max() / s.lambda_min()).abs() <= 1e-12 * r.ratio;
            worst_rel = worst_rel.max(hi.relative_error());
            t.push(row![
                i,
                s.lambda_max(),
                s.lambda_min(),
                r.ratio,
                r.d_inf_max,
                r.d_inf_min,
                hi.direct,
                hi.quadratic,
                hi.relative_error(),
                lo.relative_error()
            ]);
        }
        out.tables.push(t);
        let iso = evasion_analysis(&QfiSpectrum::diagonal(&vec![1.0; spec.n_qubits()]), eps)?;
        out.set("isotropic_ratio", iso.ratio);
        out.set("evasion_ratio_median", crate::qfi::median(&rows.iter().map(|r| r.1.ratio).collect::<Vec<_>>())?);
        out.set("evasion_direct_worst_rel_err", worst_rel);
        out.check("evasion_ratio", ratio_ok && iso.ratio == 1.0, "ratio = λ_max/λ_min; isotropic ratio 1");
        out.check("evasion_direct", worst_rel <= 0.05, format!("worst relative error {worst_rel:.4}"));

        // Poisoning over seeded dataset realizations.
        let reports = (0..cfg.poison_trials as u64)
            .into_par_iter()
            .map(|t| {
                let s = cfg.seed + t;
                let d = gen_dataset(cfg.n, cfg.separation, cfg.sigma, s)?;
                PoisonSetup::new(&d, &spec)?.run(cfg.poison_beta, &cfg.poison_shift, s)
            })
            .collect::<Result<Vec<PoisonReport>>>()?;
        let mut t = Table::new(
            "poison",
            &[
                "trial",
                "beta",
                "clean_mean",
                "poisoned_mean",
                "mean_error",
                "clean_median",
                "poisoned_median",
                "median_error",
            ],
        );
        for (i, r) in reports.iter().enumerate() {
            t.push(row![
                i,
                r.beta,
                r.clean_mean,
                r.poisoned_mean,
                r.mean_error(),
                r.clean_median,
                r.poisoned_median,
                r.median_error()
            ]);
        }
        out.tables.push(t);
        let me = mean(&reports.iter().map(PoisonReport::mean_error).collect::<Vec<_>>());
        let md = mean(&reports.iter().map(PoisonReport::median_error).collect::<Vec<_>>());
        out.set("poison_mean_error", me);
        out.set("poison_median_error", md);
        out.check(
            "poison_robustness",
            md <= ROBUSTNESS_FACTOR * me,
            format!("median error {md:.4} vs mean error {me:.4}"),
        );
        Ok(out)
    }
}
