use crate::embed::{embed_pure, EmbeddingSpec};
use crate::error::{domain, Result};
use crate::linalg::{inner, RMat, C64};
use crate::qstate::PureState;

use super::QfiMatrix;

pub const DEFAULT_STEP: f64 = 1e-4;
pub const MIN_STEP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiOptions {
    pub step: f64,
    /// Combine steps h and h/2 as (4·D(h/2) − D(h))/3.
    pub richardson: bool,
}

impl Default for QfiOptions {
    fn default() -> Self {
        Self { step: DEFAULT_STEP, richardson: false }
    }
}

impl QfiOptions {
    pub fn with_step(step: f64) -> Self {
        Self { step, richardson: false }
    }
}

fn argmax_abs(v: &[C64]) -> usize {
    let mut best = 0;
    for (i, a) in v.iter().enumerate() {
        if a.norm() > v[best].norm() {
            best = i;
        }
    }
    best
}

/// Removes the global phase so amplitude `k` is real and positive.
fn align(state: &PureState, k: usize) -> Vec<C64> {
    let a = state.amplitudes()[k];
    let ph = if a.norm() > 0.0 { a.conj() / a.norm() } else { C64::new(1.0, 0.0) };
    state.amplitudes().iter().map(|z| z * ph).collect()
}

fn central_derivatives(
    x: &[f64],
    family: &dyn Fn(&[f64]) -> Result<PureState>,
    h: f64,
    k_ref: usize,
) -> Result<Vec<Vec<C64>>> {
    (0..x.len())
        .map(|k| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let p = align(&family(&xp)?, k_ref);
            let m = align(&family(&xm)?, k_ref);
            Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        })
        .collect()
}

/// Finite-difference QFI of an arbitrary pure-state family.
pub fn qfi_pure_family(x: &[f64], family: &dyn Fn(&[f64]) -> Result<PureState>, opts: QfiOptions) -> Result<QfiMatrix> {
    if !(opts.step >= MIN_STEP) || !opts.step.is_finite() {
        return Err(domain(format!("finite-difference step {} below {MIN_STEP:e}", opts.step)));
    }
    let base = family(x)?;
    let k_ref = argmax_abs(base.amplitudes());
    let psi = align(&base, k_ref);
    let mut d = central_derivatives(x, family, opts.step, k_ref)?;
    if opts.richardson {
        let half = central_derivatives(x, family, opts.step / 2.0, k_ref)?;
        for (full, h) in d.iter_mut().zip(&half) {
            for (a, b) in full.iter_mut().zip(h) {
                *a = (4.0 * b - *a) / 3.0;
            }
        }
    }
    let p = x.len();
    let proj: Vec<C64> = d.iter().map(|di| inner(di, &psi)).collect();
    let mut f = RMat::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let v = inner(&d[i], &d[j]) - proj[i] * proj[j].conj();
            f[(i, j)] = 4.0 * v.re;
        }
    }
    Ok(QfiMatrix::new(f.symmetrized(), x.to_vec()))
}

pub fn qfi_pure(x: &[f64], spec: &EmbeddingSpec, opts: QfiOptions) -> Result<QfiMatrix> {
    qfi_pure_family(x, &|y| embed_pure(y, spec), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfi::spectral;
    use proptest::prelude::*;

    #[test]
    fn single_qubit_ry() {
        let spec = EmbeddingSpec::new(vec![3.0], 0.0).unwrap();
        for x in [0.0, 0.4, -1.3] {
            let f = qfi_pure(&[x], &spec, QfiOptions::default()).unwrap();
            assert!((f.entries[(0, 0)] - 9.0).abs() / 9.0 < 1e-4, "{}", f.entries[(0, 0)]);
        }
    }

    #[test]
    fn constant_family_is_zero() {
        let spec = EmbeddingSpec::new(vec![0.0; 4], 0.5).unwrap();
        let f = qfi_pure(&[0.3, 0.1, -0.2, 0.9], &spec, QfiOptions::default()).unwrap();
        assert!(f.entries.max_abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_step() {
        let spec = EmbeddingSpec::anisotropic();
        assert!(qfi_pure(&[0.0; 4], &spec, QfiOptions::with_step(1e-12)).is_err());
    }

    #[test]
    fn anisotropic_origin_spectrum_is_alpha_squared() {
        let spec = EmbeddingSpec::anisotropic();
        let f = qfi_pure(&[0.0; 4], &spec, QfiOptions::default()).unwrap();
        let s = spectral(&f).unwrap();
        for (l, a) in s.values.iter().zip([9.0, 1.0, 0.09, 0.01]) {
            assert!((l - a).abs() / a < 1e-6, "{l} vs {a}");
        }
    }

    #[test]
    fn richardson_agrees() {
        let spec = EmbeddingSpec::anisotropic();
        let x = [0.4, -0.3, 0.8, 1.1];
        let a = qfi_pure(&x, &spec, QfiOptions::default()).unwrap();
        let b = qfi_pure(&x, &spec, QfiOptions { step: 1e-3, richardson: true }).unwrap();
        assert!(a.entries.max_abs_diff(&b.entries) < 1e-6);
    }

    proptest! {
        #[test]
        fn invariant_under_x_dependent_global_phase(x in proptest::collection::vec(-1.5f64..1.5, 4), w in -3.0f64..3.0) {
            let spec = EmbeddingSpec::anisotropic();
            let plain = qfi_pure(&x, &spec, QfiOptions::default()).unwrap();
            let phased = qfi_pure_family(&x, &|y| Ok(embed_pure(y, &spec)?.with_global_phase(w * y.iter().sum::<f64>())), QfiOptions::default()).unwrap();
            prop_assert!(plain.entries.max_abs_diff(&phased.entries) <= 1e-6);
        }

        #[test]
        fn positive_semidefinite_and_symmetric(x in proptest::collection::vec(-2.0f64..2.0, 4)) {
            let f = qfi_pure(&x, &EmbeddingSpec::anisotropic(), QfiOptions::default()).unwrap();
            prop_assert!(f.entries.asymmetry() < 1e-8);
            let s = spectral(&f).unwrap();
            prop_assert!(*s.values.last().unwrap() >= -1e-6);
        }
    }
}
