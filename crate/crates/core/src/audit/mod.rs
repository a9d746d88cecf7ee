//! Verifiable audit of per-sample privacy records.

mod merkle;
mod protocol;
mod soundness;

pub use merkle::{Digest, InclusionProof, MerkleTree, Side, PAD_LEAF};
pub use protocol::{
    challenge, challenge_size, commit, respond, sci12, verify, verify_transcript, AuditRecord, AuditTranscript,
    ChallengeMode, ReasonCode, Rejection, Response, Verdict, FORMULA_TOL,
};
pub use soundness::{hypergeometric_detection, soundness_error, Soundness};
