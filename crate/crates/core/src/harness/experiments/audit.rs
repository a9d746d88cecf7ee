use rand::Rng;
use rayon::prelude::*;

use crate::audit::{
    challenge, challenge_size, commit, hypergeometric_detection, respond, soundness_error, verify, AuditRecord,
    AuditTranscript, ChallengeMode, MerkleTree,
};
use crate::error::{domain, Result};
use crate::mech::MechanismConfig;
use crate::qfi::lambda_max_samples;
use crate::rng::substream;
use crate::row;

use crate::harness::{Experiment, ExperimentConfig, RunOutput, Table};

const AUDIT_STREAM: u64 = 0xA0D1;
const FRAUD_STREAM: u64 = 0xF4A0;
/// Slack allowed below the (1 − f̂)^k detection bound.
const DETECTION_SLACK: f64 = 0.05;

/// Honest records for the first `n` dataset points.
pub fn honest_records(cfg: &ExperimentConfig) -> Result<(Vec<AuditRecord>, MechanismConfig)> {
    let data = cfg.dataset()?;
    if cfg.audit_n == 0 || cfg.audit_n > data.len() {
        return Err(domain(format!("audit size {} outside 1..={}", cfg.audit_n, data.len())));
    }
    let mc = cfg.mechanism(cfg.audit_gamma)?;
    let lam = lambda_max_samples(&data.points[..cfg.audit_n], &cfg.embedding()?)?;
    let records = lam.iter().enumerate().map(|(i, l)| AuditRecord::honest(i, *l, &mc)).collect::<Result<_>>()?;
    Ok((records, mc))
}

/// Forges each record with probability `rate` by reporting `factor` × its
/// true ε. Returns the committed records and the number forged.
pub fn fraudulent_records(honest: &[AuditRecord], factor: f64, rate: f64, seed: u64) -> (Vec<AuditRecord>, usize) {
    let mut rng = substream(seed, FRAUD_STREAM);
    let mut forged = 0;
    let records = honest
        .iter()
        .map(|r| {
            if rng.random::<f64>() < rate {
                forged += 1;
                AuditRecord { epsilon: factor * r.epsilon, ..*r }
            } else {
                *r
            }
        })
        .collect();
    (records, forged)
}

fn run_trial(
    tree: &MerkleTree,
    records: &[AuditRecord],
    eps_claimed: f64,
    ratio: f64,
    seed: u64,
    mc: &MechanismConfig,
) -> Result<AuditTranscript> {
    let set = challenge(records.len(), ratio, ChallengeMode::Interactive { seed })?;
    verify(&tree.root, eps_claimed, &set, &respond(tree, records, &set)?, mc)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AuditExp;

impl Experiment for AuditExp {
    fn name(&self) -> &'static str {
        "audit"
    }

    fn description(&self) -> &'static str {
        "commit-challenge-verify audit of per-sample ε records"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = RunOutput::new(self.name());
        let (honest, mc) = honest_records(cfg)?;
        let n = honest.len();
        let k = challenge_size(n, cfg.audit_ratio)?;
        let (tree, eps_claimed) = commit(&honest)?;

        let mut rng = substream(cfg.seed, AUDIT_STREAM);
        let honest_seeds: Vec<u64> = (0..cfg.audit_honest_trials).map(|_| rng.random()).collect();
        let fraud_seeds: Vec<u64> = (0..cfg.audit_trials).map(|_| rng.random()).collect();

        let honest_runs = honest_seeds
            .par_iter()
            .map(|&s| run_trial(&tree, &honest, eps_claimed, cfg.audit_ratio, s, &mc))
            .collect::<Result<Vec<_>>>()?;

        let fraud_runs = fraud_seeds
            .par_iter()
            .map(|&s| {
                let (forged, m) = fraudulent_records(&honest, cfg.audit_fraud_factor, cfg.audit_fraud_rate, s);
                let (ftree, claim) = commit(&forged)?;
                Ok((run_trial(&ftree, &forged, claim, cfg.audit_ratio, s, &mc)?, m))
            })
            .collect::<Result<Vec<(AuditTranscript, usize)>>>()?;
        let forged_total: usize = fraud_runs.iter().map(|r| r.1).sum();
        let fraud_runs: Vec<AuditTranscript> = fraud_runs.into_iter().map(|r| r.0).collect();

        let mut t = Table::new("trials", &["kind", "trial", "accepted", "rejections"]);
        for (kind, runs) in [("honest", &honest_runs), ("fraud", &fraud_runs)] {
            for (i, r) in runs.iter().enumerate() {
                t.push(row![kind, i, r.accepted(), r.reject_reasons.len()]);
            }
        }
        out.tables.push(t);

        let accepted = honest_runs.iter().filter(|r| r.accepted()).count();
        let rejected = fraud_runs.iter().filter(|r| !r.accepted()).count();
        let f_hat = forged_total as f64 / (n * fraud_runs.len().max(1)) as f64;
        let bound = 1.0 - soundness_error(f_hat, k as u32)?.error;
        let rate = rejected as f64 / fraud_runs.len().max(1) as f64;
        out.set("records", n);
        out.set("challenge_size", k);
        out.set("eps_claimed_honest", eps_claimed);
        out.set("fraud_fraction", f_hat);
        out.set("honest_accepted", accepted);
        out.set("fraud_rejected", rejected);
        out.set("fraud_rejection_rate", rate);
        out.set("detection_bound", bound);
        out.set("detection_exact", hypergeometric_detection(n, (f_hat * n as f64).round() as usize, k)?);
        out.set("soundness_half_30", soundness_error(0.5, 30)?.error);

        // Non-interactive transcripts as artifacts.
        let fs = |tree: &MerkleTree, recs: &[AuditRecord], eps: f64| -> Result<AuditTranscript> {
            let set = challenge(n, cfg.audit_ratio, ChallengeMode::FiatShamir { root: tree.root, eps_claimed: eps })?;
            verify(&tree.root, eps, &set, &respond(tree, recs, &set)?, &mc)
        };
        let commitment = serde_json::json!({
            "root": tree.root,
            "eps_claimed": eps_claimed,
            "records": n,
            "gamma": cfg.audit_gamma,
        });
        out.files.push(("audit_records.json".into(), serde_json::to_string_pretty(&honest)?));
        out.files.push(("audit_commitment.json".into(), serde_json::to_string_pretty(&commitment)?));
        out.files.push(("audit_transcript_honest.json".into(), fs(&tree, &honest, eps_claimed)?.to_json()?));
        let (forged, _) = fraudulent_records(&honest, cfg.audit_fraud_factor, cfg.audit_fraud_rate, cfg.seed);
        let (ftree, claim) = commit(&forged)?;
        out.files.push(("audit_transcript_fraud.json".into(), fs(&ftree, &forged, claim)?.to_json()?));

        out.check(
            "honest_accept",
            accepted == honest_runs.len(),
            format!("{accepted}/{} honest transcripts accepted", honest_runs.len()),
        );
        out.check(
            "fraud_detection",
            rate >= bound - DETECTION_SLACK,
            format!("rejection rate {rate:.3} vs bound {bound:.3} (f̂ = {f_hat:.3}, k = {k})"),
        );
        Ok(out)
    }
}
