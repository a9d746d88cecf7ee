use rayon::prelude::*;

use crate::embed::{embed_pure, mixed_kernel, EmbeddingSpec};
use crate::error::Result;
use crate::mech::{
    eps_isotropic, eps_optimal, privacy_modes, uncertainty_check, MechanismConfig, ModeContext, Optimal,
    PrivacyMechanism, UncertaintyCheck,
};
use crate::qfi::QfiMatrix;
use crate::qstate::MixedState;
use crate::row;

use super::{mean, overlap, split_accuracy, Split};
use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: &'static str,
    pub gamma: f64,
    pub epsilon: f64,
    /// Mean ⟨ψ|Φ(ψ)|ψ⟩ over test points.
    pub fidelity: f64,
    /// Minimum over all points.
    pub f_min: f64,
    pub accuracy: f64,
    pub uncertainty: UncertaintyCheck,
}

fn sweep_cell(mode: &dyn PrivacyMechanism, ctx: &ModeContext, split: &Split, f_ref: &QfiMatrix) -> Result<SweepRow> {
    let states = split.points.iter().map(|x| embed_pure(x, &ctx.spec)).collect::<Result<Vec<_>>>()?;
    let outputs = split.points.iter().map(|x| mode.apply(x, ctx)).collect::<Result<Vec<MixedState>>>()?;
    let fids: Vec<f64> = states.iter().zip(&outputs).map(|(s, r)| overlap(s, r)).collect();
    let epsilon = mode.epsilon(ctx)?;
    let f_min = fids.iter().copied().fold(1.0, f64::min);
    let accuracy = split_accuracy(&mixed_kernel(&outputs, &outputs), split)?;
    let uncertainty = uncertainty_check(epsilon, f_min, f_ref, &ctx.cfg, ctx.hilbert_dim())?;
    Ok(SweepRow {
        mode: mode.name(),
        gamma: ctx.cfg.gamma,
        epsilon,
        fidelity: mean(&fids[split.n_train..]),
        f_min,
        accuracy,
        uncertainty,
    })
}

/// Every registered mode at every γ, ordered mode-major.
pub fn mode_sweep(cfg: &ExperimentConfig, gammas: &[f64]) -> Result<Vec<SweepRow>> {
    let split = Split::new(cfg)?;
    let spec = cfg.embedding()?;
    let base = ModeContext::from_points(&split.points, &spec, &cfg.mechanism(gammas[0])?, cfg.f_min, cfg.tau)?;
    let f_ref = QfiMatrix::new(base.spectrum.reconstruct(), base.centroid.clone());
    let modes = privacy_modes();
    let cells: Vec<(usize, f64)> = (0..modes.len()).flat_map(|m| gammas.iter().map(move |&g| (m, g))).collect();
    cells.par_iter().map(|&(m, g)| sweep_cell(modes[m].as_ref(), &base.with_gamma(g)?, &split, &f_ref)).collect()
}

/// lhs/rhs of the uncertainty relation for the optimal channel on the
/// degenerate (all-ones) embedding.
fn degenerate_ratio(cfg: &ExperimentConfig, gamma: f64) -> Result<UncertaintyCheck> {
    let split = Split::new(cfg)?;
    let spec = EmbeddingSpec::isotropic(cfg.alpha.len());
    let ctx = ModeContext::from_points(&split.points, &spec, &cfg.mechanism(gamma)?, cfg.f_min, cfg.tau)?;
    let f_ref = QfiMatrix::new(ctx.spectrum.reconstruct(), ctx.centroid.clone());
    Ok(sweep_cell(&Optimal, &ctx, &split, &f_ref)?.uncertainty)
}

fn sweep_table(name: &str, rows: &[SweepRow], seed: u64) -> Table {
    let mut t = Table::new(
        name,
        &["mode", "gamma", "epsilon", "fidelity", "f_min", "accuracy", "unc_lhs", "unc_rhs", "unc_holds", "seed"],
    );
    for r in rows {
        t.push(row![
            r.mode,
            r.gamma,
            r.epsilon,
            r.fidelity,
            r.f_min,
            r.accuracy,
            r.uncertainty.lhs,
            r.uncertainty.rhs,
            r.uncertainty.holds,
            seed
        ]);
    }
    t
}

fn find<'a>(rows: &'a [SweepRow], mode: &str, gamma: f64) -> Option<&'a SweepRow> {
    rows.iter().find(|r| r.mode == mode && r.gamma == gamma)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TradeoffExp;

impl Experiment for TradeoffExp {
    fn name(&self) -> &'static str {
        "tradeoff"
    }

    fn description(&self) -> &'static str {
        "privacy-utility sweep over modes and noise levels"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let rows = mode_sweep(cfg, &cfg.gammas)?;
        out.tables.push(sweep_table("sweep", &rows, cfg.seed));

        // Reference numbers for the degenerate λ = 0.25 spectrum, d = 16.
        let ref_cfg = MechanismConfig::new(cfg.delta, cfg.c, 0.01)?;
        let iso = eps_isotropic(16, 1.0 / 16.0, 0.01)?;
        let opt = eps_optimal(0.25, &ref_cfg)?;
        out.set("reference_eps_isotropic", iso);
        out.set("reference_eps_optimal", opt);
        out.set("reference_advantage", iso / opt);
        out.check("reference_isotropic", (iso - 7.32).abs() <= 0.01, format!("{iso:.4}"));
        out.check("reference_optimal", (opt - 0.124).abs() <= 0.001, format!("{opt:.5}"));
        out.check("reference_advantage", (iso / opt - 59.2).abs() <= 0.5, format!("{:.2}", iso / opt));

        let g0 = cfg.gammas.iter().copied().fold(f64::INFINITY, f64::min);
        let eps = |m: &str| find(&rows, m, g0).map(|r| r.epsilon).unwrap_or(f64::NAN);
        let (sub, opt_e, iso_e) = (eps("subspace"), eps("optimal"), eps("isotropic"));
        out.check(
            "mode_ordering",
            sub <= opt_e && opt_e <= iso_e,
            format!("γ = {g0}: subspace {sub:.4} ≤ optimal {opt_e:.4} ≤ isotropic {iso_e:.4}"),
        );
        let geo_ok = cfg.gammas.iter().all(|&g| {
            match (find(&rows, "optimal", g), find(&rows, "geometric", g), find(&rows, "baseline", g)) {
                (Some(o), Some(m), Some(b)) => o.epsilon < m.epsilon && m.epsilon <= b.epsilon,
                _ => false,
            }
        });
        out.check("geometric_between", geo_ok, "optimal < geometric ≤ baseline at every γ");

        let valid = rows.iter().all(|r| r.epsilon.is_finite() && r.epsilon >= 0.0 && (0.0..=1.0).contains(&r.fidelity));
        out.check("row_ranges", valid, "ε finite and nonnegative, fidelity in [0, 1]");

        let failing: Vec<String> =
            rows.iter().filter(|r| !r.uncertainty.holds).map(|r| format!("{}@{}", r.mode, r.gamma)).collect();
        out.set("uncertainty_failures", &failing);
        out.check(
            "uncertainty_sweep",
            failing.is_empty(),
            format!("{} of {} cells violate", failing.len(), rows.len()),
        );

        let deg = degenerate_ratio(cfg, 0.01)?;
        out.set("degenerate_uncertainty_lhs", deg.lhs);
        out.set("degenerate_uncertainty_rhs", deg.rhs);
        out.set("degenerate_uncertainty_ratio", deg.ratio());
        out.check(
            "uncertainty_degenerate",
            (0.5..=2.0).contains(&deg.ratio()),
            format!("lhs/rhs = {:.4}", deg.ratio()),
        );
        Ok(out)
    }
}

/// Non-dominated rows: no other row has ε ≤ and accuracy ≥ with one strict.
fn front_flags(rows: &[SweepRow]) -> Vec<bool> {
    rows.iter()
        .map(|r| {
            !rows.iter().any(|o| {
                o.epsilon <= r.epsilon && o.accuracy >= r.accuracy && (o.epsilon < r.epsilon || o.accuracy > r.accuracy)
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParetoExp;

impl Experiment for ParetoExp {
    fn name(&self) -> &'static str {
        "pareto"
    }

    fn description(&self) -> &'static str {
        "dense noise sweep with Pareto-front flags"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let rows = mode_sweep(cfg, &cfg.pareto_gammas)?;
        let front = front_flags(&rows);
        let mut t = Table::new("front", &["mode", "gamma", "epsilon", "accuracy", "fidelity", "on_front", "seed"]);
        for (r, f) in rows.iter().zip(&front) {
            t.push(row![r.mode, r.gamma, r.epsilon, r.accuracy, r.fidelity, *f, cfg.seed]);
        }
        out.tables.push(t);

        // Every isotropic point is matched or beaten by an optimal point at
        // no larger ε.
        let iso: Vec<&SweepRow> = rows.iter().filter(|r| r.mode == "isotropic").collect();
        let opt: Vec<&SweepRow> = rows.iter().filter(|r| r.mode == "optimal").collect();
        let dominated =
            iso.iter().filter(|i| opt.iter().any(|o| o.epsilon <= i.epsilon && o.accuracy >= i.accuracy)).count();
        out.set("isotropic_points_dominated", dominated);
        out.set("front_size", front.iter().filter(|f| **f).count());
        out.check(
            "optimal_dominates_isotropic",
            dominated == iso.len(),
            format!("{dominated} of {} isotropic points weakly dominated", iso.len()),
        );
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(eps: f64, acc: f64) -> SweepRow {
        SweepRow {
            mode: "x",
            gamma: 0.1,
            epsilon: eps,
            fidelity: 1.0,
            f_min: 1.0,
            accuracy: acc,
            uncertainty: UncertaintyCheck { lhs: 0.0, rhs: 0.0, holds: true },
        }
    }

    #[test]
    fn pareto_front() {
        let rows = [row(1.0, 0.9), row(2.0, 0.8), row(0.5, 0.7), row(1.0, 0.9)];
        assert_eq!(front_flags(&rows), vec![true, false, true, true]);
    }

    #[test]
    fn small_sweep_is_well_formed() {
        let cfg = ExperimentConfig { n: 40, ..ExperimentConfig::default() };
        let rows = mode_sweep(&cfg, &[0.05]).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(
            rows.iter().map(|r| r.mode).collect::<Vec<_>>(),
            ["baseline", "isotropic", "geometric", "optimal", "subspace"]
        );
        let base = &rows[0];
        assert!(base.f_min > 1.0 - 1e-12);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.accuracy)));
    }
}
