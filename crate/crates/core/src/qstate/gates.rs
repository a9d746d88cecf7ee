use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::C64;

use super::{qubit_bit, PureState};

pub type Mat2 = [[C64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Ry(f64, usize),
    Rz(f64, usize),
    H(usize),
    Cz(usize, usize),
}

pub fn ry_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

pub fn rz_matrix(theta: f64) -> Mat2 {
    let z = C64::new(0.0, 0.0);
    [[C64::from_polar(1.0, -theta / 2.0), z], [z, C64::from_polar(1.0, theta / 2.0)]]
}

pub fn h_matrix() -> Mat2 {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn check(q: usize, n: usize) -> Result<()> {
    if q >= n {
        Err(Error::Index { index: q, n })
    } else {
        Ok(())
    }
}

/// Applies a 2×2 operator to qubit `q` of an amplitude vector in place.
pub(crate) fn apply_1q(amps: &mut [C64], m: &Mat2, q: usize, n: usize) {
    let stride = 1usize << (n - 1 - q);
    for i in 0..amps.len() {
        if i & stride != 0 {
            continue;
        }
        let j = i | stride;
        let (a, b) = (amps[i], amps[j]);
        amps[i] = m[0][0] * a + m[0][1] * b;
        amps[j] = m[1][0] * a + m[1][1] * b;
    }
}

pub fn apply_gate(state: &PureState, gate: Gate) -> Result<PureState> {
    let n = state.n_qubits();
    let mut out = state.clone();
    match gate {
        Gate::Ry(t, q) => {
            check(q, n)?;
            apply_1q(out.amps_mut(), &ry_matrix(t), q, n);
        }
        Gate::Rz(t, q) => {
            check(q, n)?;
            apply_1q(out.amps_mut(), &rz_matrix(t), q, n);
        }
        Gate::H(q) => {
            check(q, n)?;
            apply_1q(out.amps_mut(), &h_matrix(), q, n);
        }
        Gate::Cz(a, b) => {
            check(a, n)?;
            check(b, n)?;
            if a == b {
                return Err(crate::error::domain("CZ needs two distinct qubits"));
            }
            for (i, amp) in out.amps_mut().iter_mut().enumerate() {
                if qubit_bit(i, a, n) == 1 && qubit_bit(i, b, n) == 1 {
                    *amp = -*amp;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ry_zero_is_identity() {
        let s = PureState::zero(4);
        assert_eq!(apply_gate(&s, Gate::Ry(0.0, 0)).unwrap(), s);
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(&PureState::zero(1), Gate::H(0)).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn ry_pi_flips() {
        let s = apply_gate(&PureState::zero(1), Gate::Ry(PI, 0)).unwrap();
        // [[c,-s],[s,c]]·(1,0) with c = cos(π/2), s = sin(π/2)
        let m = ry_matrix(PI);
        assert!((s.amplitudes()[0] - m[0][0]).norm() < 1e-15);
        assert!(s.amplitudes()[0].norm() < 1e-12);
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_targets_msb_qubit() {
        let s = apply_gate(&PureState::zero(2), Gate::Ry(PI, 0)).unwrap();
        assert!((s.amplitudes()[0b10].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cz_sign() {
        let s = PureState::basis(2, 0b11).unwrap();
        let t = apply_gate(&s, Gate::Cz(0, 1)).unwrap();
        assert_eq!(t.amplitudes()[3].re, -1.0);
    }

    #[test]
    fn out_of_range_qubit() {
        let s = PureState::zero(2);
        assert!(matches!(apply_gate(&s, Gate::H(2)), Err(Error::Index { index: 2, n: 2 })));
        assert!(apply_gate(&s, Gate::Cz(0, 5)).is_err());
    }
}
