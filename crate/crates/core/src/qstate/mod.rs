//! Dense state-vector and density-matrix simulation for a handful of qubits.
//!
//! Bit ordering: qubit 0 is the most significant bit of a basis index, so
//! basis index `i` prints as a bitstring whose leftmost character is qubit 0.

mod channels;
pub(crate) mod gates;
mod metrics;

pub use channels::{
    amplitude_damping, dephase, depolarize, depolarize_qubits, phase_damping, thermal_noise, NoiseRegime,
};
pub use gates::{apply_gate, Gate};
pub use metrics::{fidelity, fidelity_pure, hellinger, measure_probs, purity, trace_distance_pure};

pub use crate::linalg::{eig_hermitian, HermitianEigen};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};

pub const STATE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

fn qubits_for_dim(d: usize) -> Result<usize> {
    if d == 0 || !d.is_power_of_two() {
        return Err(domain(format!("dimension {d} is not a power of two")));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Bit of `index` that belongs to `qubit` in an `n`-qubit register.
#[inline]
pub fn qubit_bit(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

pub fn bitstring(index: usize, n: usize) -> String {
    (0..n).map(|q| if qubit_bit(index, q, n) == 1 { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// |0…0⟩
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Self { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= 1 << n {
            return Err(Error::Index { index, n });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_dim(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(domain(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { n, amps })
    }

    /// Rescales to unit norm; fails only on the zero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_dim(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { n, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn inner(&self, other: &Self) -> C64 {
        crate::linalg::inner(&self.amps, &other.amps)
    }

    /// Multiplies by e^{iφ}.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let ph = C64::from_polar(1.0, phi);
        Self { n: self.n, amps: self.amps.iter().map(|a| a * ph).collect() }
    }

    pub fn to_density(&self) -> MixedState {
        MixedState { n: self.n, rho: CMat::outer(&self.amps) }
    }

    pub fn apply(&self, gate: Gate) -> Result<Self> {
        apply_gate(self, gate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    n: usize,
    rho: CMat,
}

impl MixedState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(rho: CMat) -> Result<Self> {
        let n = qubits_for_dim(rho.dim())?;
        let herr = rho.hermiticity_error();
        if herr > STATE_TOL {
            return Err(domain(format!("density matrix not Hermitian (deviation {herr:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(domain(format!("density matrix trace {tr} differs from 1")));
        }
        let eig = eig_hermitian(&rho)?;
        if let Some(&min) = eig.values.first() {
            if min < -PSD_TOL {
                return Err(domain(format!("density matrix has eigenvalue {min:e} < 0")));
            }
        }
        Ok(Self { n, rho })
    }

    /// Internal constructor for outputs of trace-preserving maps.
    pub(crate) fn from_matrix_unchecked(rho: CMat) -> Self {
        let n = rho.dim().trailing_zeros() as usize;
        Self { n, rho }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        Self { n, rho: CMat::identity(d).scale(1.0 / d as f64) }
    }

    /// Convex combination Σ w_i ρ_i. Weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, &MixedState)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("mixture components"))?;
        let d = first.1.dim();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > STATE_TOL {
            return Err(domain(format!("mixture weights must be a probability vector (sum {total})")));
        }
        let mut acc = CMat::zeros(d);
        for (w, s) in parts {
            if s.dim() != d {
                return Err(Error::Shape { expected: d, got: s.dim() });
            }
            acc = CMat::axpby(1.0, &acc, *w, &s.rho);
        }
        Ok(Self { n: first.1.n, rho: acc })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn into_matrix(self) -> CMat {
        self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// U ρ U†
    pub fn evolve(&self, u: &CMat) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got: u.dim() });
        }
        Ok(Self { n: self.n, rho: self.rho.conjugate_by(u) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub n: usize,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let n = qubits_for_dim(probs.len())?;
        if probs.iter().any(|p| !p.is_finite() || *p < -STATE_TOL) {
            return Err(domain("probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { n, probs: probs.into_iter().map(|p| p.max(0.0)).collect() })
    }

    pub fn point_mass(n: usize, index: usize) -> Result<Self> {
        if index >= 1 << n {
            return Err(Error::Index { index, n });
        }
        let mut probs = vec![0.0; 1 << n];
        probs[index] = 1.0;
        Ok(Self { n, probs })
    }

    pub fn uniform(n: usize) -> Self {
        let d = 1usize << n;
        Self { n, probs: vec![1.0 / d as f64; d] }
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, bits: &str) -> Option<f64> {
        if bits.len() != self.n {
            return None;
        }
        usize::from_str_radix(bits, 2).ok().map(|i| self.probs[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_order_is_msb_first() {
        assert_eq!(bitstring(0b1000, 4), "1000");
        assert_eq!(qubit_bit(0b1000, 0, 4), 1);
        assert_eq!(qubit_bit(0b0001, 3, 4), 1);
    }

    #[test]
    fn rejects_unnormalized_amplitudes() {
        assert!(PureState::from_amplitudes(vec![ONE, ONE]).is_err());
        assert!(PureState::from_amplitudes(vec![ONE, ZERO, ZERO]).is_err());
    }

    #[test]
    fn mixed_state_validation() {
        assert!(MixedState::from_matrix(CMat::identity(4).scale(0.25)).is_ok());
        assert!(MixedState::from_matrix(CMat::identity(4)).is_err());
        let neg = CMat::diag_real(&[1.5, -0.5]);
        assert!(MixedState::from_matrix(neg).is_err());
    }

    #[test]
    fn distribution_lookup() {
        let d = Distribution::point_mass(4, 0).unwrap();
        assert_eq!(d.get("0000"), Some(1.0));
        assert_eq!(d.get("0001"), Some(0.0));
    }
}
