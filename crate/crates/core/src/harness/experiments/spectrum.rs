use rand::seq::index::sample;
use rayon::prelude::*;

use crate::embed::EmbeddingSpec;
use crate::error::Result;
use crate::mech::{effective_qfi, wasserstein_lipschitz, EffectiveQfi, MetricChannel};
use crate::qfi::{expansion_residuals, loglog_slope, qfi_pure, spectral, QfiOptions};
use crate::rng::substream;
use crate::row;

use super::Split;
use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

const PAIR_STREAM: u64 = 0x5731;
/// Halvings of the expansion step, starting at h = 0.1.
const EXPANSION_STEPS: usize = 6;
/// Relative agreement required between fitted and predicted contraction.
const CONTRACTION_TOL: f64 = 0.10;

/// `count` distinct index pairs (i < j) drawn without replacement.
fn sample_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let total = n * (n - 1) / 2;
    let mut picks = sample(&mut substream(seed, PAIR_STREAM), total, count.min(total)).into_vec();
    picks.sort_unstable();
    picks
        .into_iter()
        .map(|mut r| {
            let mut i = 0;
            while r >= n - 1 - i {
                r -= n - 1 - i;
                i += 1;
            }
            (i, i + 1 + r)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SpectrumExp;

impl Experiment for SpectrumExp {
    fn name(&self) -> &'static str {
        "spectrum"
    }

    fn description(&self) -> &'static str {
        "QFI spectra, effective QFI under the metric channel, expansion order and W1 gap"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let spec = cfg.embedding()?;
        let data = cfg.dataset()?;
        let centroid = data.centroid();

        let spectra = data
            .points
            .par_iter()
            .map(|x| spectral(&qfi_pure(x, &spec, QfiOptions::default())?))
            .collect::<Result<Vec<_>>>()?;
        let mut t = Table::new("points", &["point", "label", "k", "lambda"]);
        for (i, s) in spectra.iter().enumerate() {
            for (k, l) in s.values.iter().enumerate() {
                t.push(row![i, data.labels[i] as usize, k, *l]);
            }
        }
        out.tables.push(t);
        let lmax: Vec<f64> = spectra.iter().map(|s| s.lambda_max()).collect();
        out.set("lambda_max_worst", lmax.iter().copied().fold(0.0, f64::max));
        out.set("lambda_max_median", crate::qfi::median(&lmax)?);

        let f_c = qfi_pure(&centroid, &spec, QfiOptions::default())?;
        let s_c = f_c.spectrum()?;
        out.set("centroid", &centroid);
        out.set("centroid_eigenvalues", &s_c.values);
        out.set("centroid_condition", s_c.lambda_max() / s_c.lambda_min());
        out.files.push(("spectrum_centroid_qfi.csv".into(), f_c.to_csv()));
        out.files.push(("spectrum_centroid_qfi.json".into(), serde_json::to_string_pretty(&f_c.to_json()?)?));

        // Effective QFI on the degenerate and the configured embedding.
        let embeddings = [("isotropic", EmbeddingSpec::isotropic(spec.n_qubits())), ("configured", spec.clone())];
        let cells: Vec<(usize, f64)> = (0..2).flat_map(|e| cfg.effective_gammas.iter().map(move |&g| (e, g))).collect();
        let results = cells
            .par_iter()
            .map(|&(e, g)| {
                let ch = MetricChannel::calibrate(&centroid, &embeddings[e].1, &cfg.mechanism(g)?)?;
                Ok((ch.clone(), effective_qfi(&ch, &centroid)?))
            })
            .collect::<Result<Vec<(MetricChannel, EffectiveQfi)>>>()?;
        let mut t = Table::new(
            "effective",
            &["embedding", "gamma", "k", "lambda", "weight", "active", "factor", "predicted", "fitted_c", "residual"],
        );
        let mut contraction_ok = true;
        let mut worst_dev: f64 = 0.0;
        for ((e, g), (ch, eff)) in cells.iter().zip(&results) {
            let c = eff.fitted_c.unwrap_or(f64::NAN);
            contraction_ok &= c > 0.0 && c <= 2.0;
            for k in 0..ch.spectrum.dim() {
                let active = ch.allocation.active_set.contains(&k);
                if active && *g <= 0.2 {
                    let dev = (eff.mode_factors[k] - eff.predicted[k]).abs() / eff.predicted[k];
                    worst_dev = worst_dev.max(dev);
                }
                t.push(row![
                    embeddings[*e].0,
                    *g,
                    k,
                    ch.spectrum.values[k],
                    ch.allocation.weights[k],
                    active,
                    eff.mode_factors[k],
                    eff.predicted[k],
                    c,
                    eff.residual
                ]);
            }
        }
        out.tables.push(t);
        out.set("contraction_worst_deviation", worst_dev);
        out.check(
            "effective_contraction",
            worst_dev <= CONTRACTION_TOL && contraction_ok,
            format!("worst relative deviation {worst_dev:.4}, fitted c in (0, 2]: {contraction_ok}"),
        );

        // Expansion residual along the leading eigendirection.
        let steps: Vec<f64> = (0..EXPANSION_STEPS).map(|i| 0.1 / f64::powi(2.0, i as i32)).collect();
        let res = expansion_residuals(&centroid, &spec, &s_c.vector(0), &steps)?;
        let slope = loglog_slope(&steps, &res)?;
        let mut t = Table::new("expansion", &["h", "residual"]);
        for (h, r) in steps.iter().zip(&res) {
            t.push(row![*h, *r]);
        }
        out.tables.push(t);
        out.set("expansion_slope", slope);
        out.check("expansion_order", slope >= 2.5, format!("log-log slope {slope:.3}"));

        // W1 of Z-basis readouts against input distance.
        let split = Split::from_dataset(&data, cfg.train_frac, cfg.seed)?;
        let idx = sample_pairs(split.len(), cfg.w1_pairs, cfg.seed);
        let pairs: Vec<(Vec<f64>, Vec<f64>)> =
            idx.iter().map(|&(i, j)| (split.points[i].clone(), split.points[j].clone())).collect();
        let w = wasserstein_lipschitz(&pairs, &spec)?;
        let mut t = Table::new("w1", &["i", "j", "distance", "w1", "ratio"]);
        for ((i, j), p) in idx.iter().zip(&w.pairs) {
            t.push(row![*i, *j, p.distance, p.w1, p.ratio]);
        }
        out.tables.push(t);
        out.set("w1_lipschitz_sup", w.l_w_sup);
        out.set("w1_lipschitz_mean", w.l_w_mean);
        out.set("sqrt_lambda_max", w.sqrt_lambda_max);
        out.set("w1_gap_sup", w.gap_sup);
        out.set("w1_gap_mean", w.gap_mean);
        out.check("w1_gap", w.gap_mean >= 5.0, format!("√λ_max / mean L_W = {:.3}", w.gap_mean));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_unranking_is_exhaustive() {
        let all = sample_pairs(6, 100, 1);
        assert_eq!(all.len(), 15);
        let mut expect = Vec::new();
        for i in 0..6 {
            for j in (i + 1)..6 {
                expect.push((i, j));
            }
        }
        assert_eq!(all, expect);
        let some = sample_pairs(50, 10, 3);
        assert!(some.iter().all(|&(i, j)| i < j && j < 50));
        assert_eq!(some, sample_pairs(50, 10, 3));
    }
}
