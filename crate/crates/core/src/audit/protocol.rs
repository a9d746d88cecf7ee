use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{domain, Error, Result};
use crate::mech::{eps_optimal, MechanismConfig};
use crate::rng::seeded;

use super::merkle::{Digest, InclusionProof, MerkleTree};

/// Relative tolerance of the ε formula check.
pub const FORMULA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub index: usize,
    pub lambda_max: f64,
    pub epsilon: f64,
}

impl AuditRecord {
    pub fn honest(index: usize, lambda_max: f64, cfg: &MechanismConfig) -> Result<Self> {
        Ok(Self { index, lambda_max, epsilon: eps_optimal(lambda_max, cfg)? })
    }

    pub fn leaf_string(&self) -> String {
        format!("{}|{}|{}", self.index, sci12(self.lambda_max), sci12(self.epsilon))
    }

    pub fn leaf_hash(&self) -> Digest {
        Digest::of(self.leaf_string().as_bytes())
    }
}

/// Scientific notation with 12 fractional digits and a signed two-digit
/// exponent, as printf's `%.12e`.
pub fn sci12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.12e}");
    let (m, e) = s.split_once('e').expect("exponent marker");
    let e: i32 = e.parse().expect("integer exponent");
    format!("{m}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

pub fn commit(records: &[AuditRecord]) -> Result<(MerkleTree, f64)> {
    if records.is_empty() {
        return Err(Error::Empty("audit records"));
    }
    let tree = MerkleTree::build(records.iter().map(AuditRecord::leaf_hash).collect())?;
    let eps_claimed = records.iter().map(|r| r.epsilon).fold(f64::NEG_INFINITY, f64::max);
    Ok((tree, eps_claimed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChallengeMode {
    Interactive { seed: u64 },
    FiatShamir { root: Digest, eps_claimed: f64 },
}

pub fn challenge_size(n: usize, ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(domain(format!("challenge ratio {ratio} outside (0, 1]")));
    }
    // guard against 0.12·100 = 12.000000000000002
    Ok(((ratio * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize)
}

/// ⌈ratio·n⌉ distinct indices, sorted.
pub fn challenge(n: usize, ratio: f64, mode: ChallengeMode) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Empty("record set"));
    }
    let k = challenge_size(n, ratio)?;
    let mut set = match mode {
        ChallengeMode::Interactive { seed } => sample(&mut seeded(seed), n, k).into_vec(),
        ChallengeMode::FiatShamir { root, eps_claimed } => {
            let eps = sci12(eps_claimed);
            let mut taken = vec![false; n];
            let mut out = Vec::with_capacity(k);
            let mut counter: u64 = 0;
            while out.len() < k {
                let mut h = Sha256::new();
                h.update(root.0);
                h.update(eps.as_bytes());
                h.update(counter.to_be_bytes());
                let digest = h.finalize();
                let v = u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"));
                let i = (v % n as u64) as usize;
                if !taken[i] {
                    taken[i] = true;
                    out.push(i);
                }
                counter += 1;
            }
            out
        }
    };
    set.sort_unstable();
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub record: AuditRecord,
    pub proof: InclusionProof,
}

pub fn respond(tree: &MerkleTree, records: &[AuditRecord], set: &[usize]) -> Result<Vec<Response>> {
    set.iter()
        .map(|&i| {
            let record = *records.get(i).ok_or(Error::Index { index: i, n: records.len() })?;
            Ok(Response { record, proof: tree.prove(i)? })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReasonCode {
    BadProof,
    EpsExceedsClaim,
    EpsFormulaMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub code: ReasonCode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditTranscript {
    pub root: Digest,
    pub eps_claimed: f64,
    pub challenge: Vec<usize>,
    pub responses: Vec<Response>,
    pub verdict: Verdict,
    pub reject_reasons: Vec<Rejection>,
}

impl AuditTranscript {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Runs the proof, claim and formula checks on each challenged response.
pub fn verify(
    root: &Digest,
    eps_claimed: f64,
    challenge: &[usize],
    responses: &[Response],
    cfg: &MechanismConfig,
) -> Result<AuditTranscript> {
    let mut reasons = Vec::new();
    if responses.len() != challenge.len() {
        for &i in challenge.iter().filter(|i| !responses.iter().any(|r| r.proof.leaf_index == **i)) {
            reasons.push(Rejection { index: i, code: ReasonCode::BadProof });
        }
    }
    for (pos, r) in responses.iter().enumerate() {
        let index = r.proof.leaf_index;
        if challenge.get(pos) != Some(&index) || !r.proof.verify(root, &r.record.leaf_hash()) {
            reasons.push(Rejection { index, code: ReasonCode::BadProof });
        }
        if r.record.epsilon > eps_claimed {
            reasons.push(Rejection { index, code: ReasonCode::EpsExceedsClaim });
        }
        let formula_ok = eps_optimal(r.record.lambda_max, cfg)
            .map(|e| (r.record.epsilon - e).abs() <= FORMULA_TOL * e.abs().max(f64::MIN_POSITIVE))
            .unwrap_or(false);
        if !formula_ok {
            reasons.push(Rejection { index, code: ReasonCode::EpsFormulaMismatch });
        }
    }
    Ok(AuditTranscript {
        root: *root,
        eps_claimed,
        challenge: challenge.to_vec(),
        responses: responses.to_vec(),
        verdict: if reasons.is_empty() { Verdict::Accept } else { Verdict::Reject },
        reject_reasons: reasons,
    })
}

/// Re-checks a stored transcript from scratch.
pub fn verify_transcript(t: &AuditTranscript, cfg: &MechanismConfig) -> Result<AuditTranscript> {
    verify(&t.root, t.eps_claimed, &t.challenge, &t.responses, cfg)
}
