use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{CMat, C64, ZERO};

use super::gates::{ry_matrix, Mat2};
use super::MixedState;

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(domain(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

/// K ρ K† for a single-qubit operator K on qubit `q`.
fn conjugate_1q(rho: &CMat, k: &Mat2, q: usize, n: usize) -> CMat {
    let d = rho.dim();
    let stride = 1usize << (n - 1 - q);
    let mut left = rho.clone();
    for j in 0..d {
        for i0 in 0..d {
            if i0 & stride != 0 {
                continue;
            }
            let i1 = i0 | stride;
            let (a, b) = (rho[(i0, j)], rho[(i1, j)]);
            left[(i0, j)] = k[0][0] * a + k[0][1] * b;
            left[(i1, j)] = k[1][0] * a + k[1][1] * b;
        }
    }
    let mut out = left.clone();
    for i in 0..d {
        for j0 in 0..d {
            if j0 & stride != 0 {
                continue;
            }
            let j1 = j0 | stride;
            let (a, b) = (left[(i, j0)], left[(i, j1)]);
            out[(i, j0)] = a * k[0][0].conj() + b * k[0][1].conj();
            out[(i, j1)] = a * k[1][0].conj() + b * k[1][1].conj();
        }
    }
    out
}

fn kraus_1q(rho: &CMat, ops: &[Mat2], q: usize, n: usize) -> CMat {
    let mut acc = CMat::zeros(rho.dim());
    for k in ops {
        acc = acc.add(&conjugate_1q(rho, k, q, n));
    }
    acc
}

fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q >= n {
        Err(Error::Index { index: q, n })
    } else {
        Ok(())
    }
}

/// (1−γ)ρ + γ I/d
pub fn depolarize(rho: &MixedState, gamma: f64) -> Result<MixedState> {
    check_prob("gamma", gamma)?;
    let d = rho.dim();
    let mixed = CMat::identity(d).scale(gamma / d as f64);
    Ok(MixedState::from_matrix_unchecked(rho.matrix().scale(1.0 - gamma).add(&mixed)))
}

/// Dephasing in the basis obtained by rotating every qubit with RY(θ).
/// θ = 0 is the computational basis, θ = π/2 the X basis.
pub fn dephase(rho: &MixedState, gamma: f64, theta: f64) -> Result<MixedState> {
    check_prob("gamma", gamma)?;
    let n = rho.n_qubits();
    let rotate = |m: &CMat, angle: f64| {
        let k = ry_matrix(angle);
        (0..n).fold(m.clone(), |acc, q| conjugate_1q(&acc, &k, q, n))
    };
    let mut r = if theta == 0.0 { rho.matrix().clone() } else { rotate(rho.matrix(), -theta) };
    let d = r.dim();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                r[(i, j)] *= 1.0 - gamma;
            }
        }
    }
    let out = if theta == 0.0 { r } else { rotate(&r, theta) };
    Ok(MixedState::from_matrix_unchecked(out))
}

pub fn amplitude_damping(rho: &MixedState, p: f64, q: usize) -> Result<MixedState> {
    check_prob("p_amp", p)?;
    check_qubit(q, rho.n_qubits())?;
    let z = ZERO;
    let k0 = [[C64::new(1.0, 0.0), z], [z, C64::new((1.0 - p).sqrt(), 0.0)]];
    let k1 = [[z, C64::new(p.sqrt(), 0.0)], [z, z]];
    Ok(MixedState::from_matrix_unchecked(kraus_1q(rho.matrix(), &[k0, k1], q, rho.n_qubits())))
}

pub fn phase_damping(rho: &MixedState, p: f64, q: usize) -> Result<MixedState> {
    check_prob("p_phase", p)?;
    check_qubit(q, rho.n_qubits())?;
    let z = ZERO;
    let k0 = [[C64::new(1.0, 0.0), z], [z, C64::new((1.0 - p).sqrt(), 0.0)]];
    let k1 = [[z, z], [z, C64::new(p.sqrt(), 0.0)]];
    Ok(MixedState::from_matrix_unchecked(kraus_1q(rho.matrix(), &[k0, k1], q, rho.n_qubits())))
}

/// (1−ε)ρ + ε (I_Q/2^|Q| ⊗ Tr_Q ρ) for the qubit subset Q.
pub fn depolarize_qubits(rho: &MixedState, qubits: &[usize], eps: f64) -> Result<MixedState> {
    check_prob("eps", eps)?;
    let n = rho.n_qubits();
    for &q in qubits {
        check_qubit(q, n)?;
    }
    if eps == 0.0 || qubits.is_empty() {
        return Ok(rho.clone());
    }
    let mask: usize = qubits.iter().map(|&q| 1usize << (n - 1 - q)).fold(0, |a, b| a | b);
    let k = mask.count_ones();
    let weight = 1.0 / f64::from(1u32 << k);
    // Enumerate all assignments of the masked bits.
    let mut subs = Vec::with_capacity(1 << k);
    let mut s = 0usize;
    loop {
        subs.push(s);
        if s == mask {
            break;
        }
        s = (s.wrapping_sub(mask)) & mask;
    }
    let m = rho.matrix();
    let d = m.dim();
    let mut replaced = CMat::zeros(d);
    for i in 0..d {
        for j in 0..d {
            if i & mask != j & mask {
                continue;
            }
            let (ir, jr) = (i & !mask, j & !mask);
            let sum: C64 = subs.iter().map(|&s| m[(ir | s, jr | s)]).sum();
            replaced[(i, j)] = sum * weight;
        }
    }
    Ok(MixedState::from_matrix_unchecked(CMat::axpby(1.0 - eps, m, eps, &replaced)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRegime {
    pub t1_us: f64,
    pub t2_us: f64,
    pub eps_1q: f64,
    pub eps_2q: f64,
    pub gate_time_us: f64,
}

impl NoiseRegime {
    pub const GATE_TIME_US: f64 = 0.1;

    pub fn ideal() -> Self {
        Self { t1_us: f64::INFINITY, t2_us: f64::INFINITY, eps_1q: 0.0, eps_2q: 0.0, gate_time_us: Self::GATE_TIME_US }
    }

    pub fn low() -> Self {
        Self { t1_us: 200.0, t2_us: 150.0, eps_1q: 1e-4, eps_2q: 5e-3, gate_time_us: Self::GATE_TIME_US }
    }

    pub fn moderate() -> Self {
        Self { t1_us: 100.0, t2_us: 70.0, eps_1q: 3e-4, eps_2q: 1e-2, gate_time_us: Self::GATE_TIME_US }
    }

    pub fn high() -> Self {
        Self { t1_us: 50.0, t2_us: 30.0, eps_1q: 1e-3, eps_2q: 3e-2, gate_time_us: Self::GATE_TIME_US }
    }

    pub fn presets() -> [(&'static str, Self); 4] {
        [("ideal", Self::ideal()), ("low", Self::low()), ("moderate", Self::moderate()), ("high", Self::high())]
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Self::presets()
            .into_iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, r)| r)
            .ok_or_else(|| Error::Unknown { kind: "noise regime", name: name.to_string() })
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("eps_1q", self.eps_1q)?;
        check_prob("eps_2q", self.eps_2q)?;
        if !(self.t1_us > 0.0 && self.t2_us > 0.0) {
            return Err(domain("T1 and T2 must be positive"));
        }
        if self.t2_us > 2.0 * self.t1_us {
            return Err(domain(format!("T2 = {} exceeds 2·T1 = {}", self.t2_us, 2.0 * self.t1_us)));
        }
        if !(self.gate_time_us >= 0.0 && self.gate_time_us.is_finite()) {
            return Err(domain("gate time must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn p_amp(&self) -> f64 {
        1.0 - (-self.gate_time_us / self.t1_us).exp()
    }

    pub fn p_phase(&self) -> f64 {
        let rate = 1.0 / self.t2_us - 1.0 / (2.0 * self.t1_us);
        1.0 - (-self.gate_time_us * rate.max(0.0)).exp()
    }
}

/// Per qubit (ascending): amplitude damping, phase damping, single-qubit
/// depolarizing. Then one two-qubit depolarizing step per entry of `cz_pairs`.
pub fn thermal_noise(rho: &MixedState, regime: &NoiseRegime, cz_pairs: &[(usize, usize)]) -> Result<MixedState> {
    regime.validate()?;
    let (pa, pp) = (regime.p_amp(), regime.p_phase());
    let mut out = rho.clone();
    for q in 0..rho.n_qubits() {
        if pa > 0.0 {
            out = amplitude_damping(&out, pa, q)?;
        }
        if pp > 0.0 {
            out = phase_damping(&out, pp, q)?;
        }
        out = depolarize_qubits(&out, &[q], regime.eps_1q)?;
    }
    for &(a, b) in cz_pairs {
        out = depolarize_qubits(&out, &[a, b], regime.eps_2q)?;
    }
    Ok(out)
}
