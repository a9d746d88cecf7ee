use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, CMat, C64};

use super::{Distribution, MixedState, PureState};

const SUPPORT_TOL: f64 = 1e-14;

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))², clamped to [0, 1].
pub fn fidelity(a: &MixedState, b: &MixedState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape { expected: a.dim(), got: b.dim() });
    }
    // Work on the support of `a` only: square roots of eigenvalues that are
    // zero up to rounding would otherwise add ~1e-8 each to the trace.
    let ea = eig_hermitian(a.matrix())?;
    let support: Vec<usize> = (0..ea.values.len()).filter(|&k| ea.values[k] > SUPPORT_TOL).collect();
    let cols: Vec<Vec<C64>> = support.iter().map(|&k| ea.vectors.column(k)).collect();
    let sigma_cols: Vec<Vec<C64>> = cols.iter().map(|v| b.matrix().mat_vec(v)).collect();
    let r = support.len();
    let inner = CMat::from_fn(r, |k, l| {
        let w = (ea.values[support[k]] * ea.values[support[l]]).sqrt();
        crate::linalg::inner(&cols[k], &sigma_cols[l]) * w
    });
    let inner = inner.add(&inner.adjoint()).scale(0.5);
    let ei = eig_hermitian(&inner)?;
    let root_trace: f64 = ei.values.iter().filter(|&&l| l > SUPPORT_TOL).map(|&l| l.sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// |⟨a|b⟩|²
pub fn fidelity_pure(a: &PureState, b: &PureState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape { expected: a.dim(), got: b.dim() });
    }
    Ok(a.inner(b).norm_sqr().clamp(0.0, 1.0))
}

/// √(1 − F) for pure states.
pub fn trace_distance_pure(a: &PureState, b: &PureState) -> Result<f64> {
    Ok((1.0 - fidelity_pure(a, b)?).max(0.0).sqrt())
}

pub fn purity(rho: &MixedState) -> f64 {
    rho.matrix().trace_product(rho.matrix()).re
}

pub fn measure_probs(rho: &MixedState) -> Distribution {
    let m = rho.matrix();
    let probs = (0..m.dim()).map(|i| m[(i, i)].re.max(0.0)).collect();
    Distribution { n: rho.n_qubits(), probs }
}

/// √(1 − Σ √(p_x q_x))
pub fn hellinger(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::Shape { expected: p.dim(), got: q.dim() });
    }
    let bc: f64 = p.probs.iter().zip(&q.probs).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((1.0 - bc).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::qstate::{dephase, depolarize, Gate};
    use proptest::prelude::*;

    fn pure_from(seed: &[f64], n: usize) -> PureState {
        let amps =
            (0..1usize << n).map(|i| C64::new(seed[i % seed.len()] + 0.05 * i as f64, seed[(2 * i + 1) % seed.len()]));
        PureState::normalized(amps.collect()).unwrap()
    }

    #[test]
    fn fidelity_basics() {
        let z = PureState::zero(1).to_density();
        let o = PureState::basis(1, 1).unwrap().to_density();
        assert!((fidelity(&z, &z).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&z, &o).unwrap() < 1e-12);
        let psi = pure_from(&[0.4, -0.2, 0.9], 4).to_density();
        let f = fidelity(&psi, &MixedState::maximally_mixed(4)).unwrap();
        assert!((f - 0.0625).abs() < 1e-10);
        assert!(fidelity(&z, &psi).is_err());
    }

    #[test]
    fn measurement_examples() {
        let p = measure_probs(&PureState::zero(4).to_density());
        assert_eq!(p.get("0000"), Some(1.0));
        let u = measure_probs(&MixedState::maximally_mixed(4));
        assert!(u.probs.iter().all(|&x| (x - 1.0 / 16.0).abs() < 1e-15));
        let h = PureState::zero(1).apply(Gate::H(0)).unwrap();
        let hp = measure_probs(&h.to_density());
        assert!((hp.probs[0] - 0.5).abs() < 1e-15 && (hp.probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hellinger_examples() {
        let a = Distribution::point_mass(1, 0).unwrap();
        let b = Distribution::point_mass(1, 1).unwrap();
        assert_eq!(hellinger(&a, &a).unwrap(), 0.0);
        assert!((hellinger(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let u = Distribution::uniform(1);
        let expected = (1.0 - 0.5f64.sqrt()).sqrt();
        assert!((hellinger(&u, &a).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.5412).abs() < 1e-4);
    }

    #[test]
    fn pure_trace_distance_convention() {
        let a = pure_from(&[0.1, 0.7], 2);
        let b = pure_from(&[-0.3, 0.2, 0.5], 2);
        let f = fidelity(&a.to_density(), &b.to_density()).unwrap();
        assert!((trace_distance_pure(&a, &b).unwrap() - (1.0 - f).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn purity_of_mixture() {
        let rho = dephase(&PureState::normalized(vec![ONE, ONE]).unwrap().to_density(), 1.0, 0.0).unwrap();
        assert!((purity(&rho) - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn uhlmann_matches_overlap_for_pure(s1 in proptest::collection::vec(-1.0f64..1.0, 4), s2 in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let a = pure_from(&s1, 3);
            let b = pure_from(&s2, 3);
            let fm = fidelity(&a.to_density(), &b.to_density()).unwrap();
            let fp = fidelity_pure(&a, &b).unwrap();
            prop_assert!((fm - fp).abs() < 1e-8);
            let fr = fidelity(&b.to_density(), &a.to_density()).unwrap();
            prop_assert!((fm - fr).abs() < 1e-8);
        }

        #[test]
        fn depolarize_does_not_decrease_fidelity(s1 in proptest::collection::vec(-1.0f64..1.0, 4), s2 in proptest::collection::vec(-1.0f64..1.0, 4), g in 0.0f64..1.0) {
            let a = pure_from(&s1, 2).to_density();
            let b = pure_from(&s2, 2).to_density();
            let before = fidelity(&a, &b).unwrap();
            let after = fidelity(&depolarize(&a, g).unwrap(), &depolarize(&b, g).unwrap()).unwrap();
            prop_assert!(after >= before - 1e-9);
        }

        #[test]
        fn hellinger_triangle(p in proptest::collection::vec(0.01f64..1.0, 4), q in proptest::collection::vec(0.01f64..1.0, 4), r in proptest::collection::vec(0.01f64..1.0, 4)) {
            let norm = |v: Vec<f64>| { let s: f64 = v.iter().sum(); Distribution::new(v.into_iter().map(|x| x / s).collect()).unwrap() };
            let (p, q, r) = (norm(p), norm(q), norm(r));
            let pq = hellinger(&p, &q).unwrap();
            let qr = hellinger(&q, &r).unwrap();
            let pr = hellinger(&p, &r).unwrap();
            prop_assert!(pq <= 1.0 && pr <= pq + qr + 1e-9);
        }
    }
}
