use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::RMat;
use crate::qstate::{MixedState, PureState};

use super::{embed_pure, EmbeddingSpec};

fn embed_rows(x: &[Vec<f64>], spec: &EmbeddingSpec) -> Result<Vec<PureState>> {
    x.par_iter().map(|row| embed_pure(row, spec)).collect()
}

/// K_ij = |⟨ψ_i|ψ_j⟩|² for already-embedded states.
pub fn kernel_from_states(states: &[PureState]) -> RMat {
    let n = states.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { states[i].inner(&states[j]).norm_sqr() }).collect())
        .collect();
    let mut k = RMat::from_fn(n, n, |i, j| rows[i][j]);
    // Enforce exact symmetry.
    for i in 0..n {
        for j in (i + 1)..n {
            k[(j, i)] = k[(i, j)];
        }
    }
    k
}

pub fn kernel_matrix(x: &[Vec<f64>], spec: &EmbeddingSpec) -> Result<RMat> {
    Ok(kernel_from_states(&embed_rows(x, spec)?))
}

/// Rows index `a`, columns index `b`.
pub fn cross_kernel(a: &[Vec<f64>], b: &[Vec<f64>], spec: &EmbeddingSpec) -> Result<RMat> {
    let sa = embed_rows(a, spec)?;
    let sb = embed_rows(b, spec)?;
    let rows: Vec<Vec<f64>> = sa.par_iter().map(|s| sb.iter().map(|t| s.inner(t).norm_sqr()).collect()).collect();
    Ok(RMat::from_fn(a.len(), b.len(), |i, j| rows[i][j]))
}

/// K_ij = Tr(ρ_i ρ_j), the Hilbert–Schmidt kernel of mixed states.
pub fn mixed_kernel(a: &[MixedState], b: &[MixedState]) -> RMat {
    let rows: Vec<Vec<f64>> =
        a.par_iter().map(|r| b.iter().map(|s| r.matrix().trace_product(s.matrix()).re).collect()).collect();
    RMat::from_fn(a.len(), b.len(), |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_symmetric;
    use std::f64::consts::PI;

    #[test]
    fn identical_rows_give_ones() {
        let x = vec![vec![0.3, 0.1, -0.2, 0.5]; 3];
        let k = kernel_matrix(&x, &EmbeddingSpec::anisotropic()).unwrap();
        assert!(k.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn orthogonal_points() {
        // RY(π) maps |0⟩ to |1⟩ on a single qubit.
        let spec = EmbeddingSpec::new(vec![1.0], 0.5).unwrap();
        let k = kernel_matrix(&[vec![0.0], vec![PI]], &spec).unwrap();
        assert!(k[(0, 1)].abs() < 1e-15 && k[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn matches_double_loop_and_is_psd() {
        let spec = EmbeddingSpec::anisotropic();
        let x: Vec<Vec<f64>> =
            (0..12).map(|i| (0..4).map(|j| ((i * 7 + j * 3) as f64 * 0.37).sin() * 1.4).collect()).collect();
        let k = kernel_matrix(&x, &spec).unwrap();
        for i in 0..12 {
            assert_eq!(k[(i, i)], 1.0);
            for j in 0..12 {
                let a = embed_pure(&x[i], &spec).unwrap();
                let b = embed_pure(&x[j], &spec).unwrap();
                let direct: f64 = a
                    .amplitudes()
                    .iter()
                    .zip(b.amplitudes())
                    .map(|(p, q)| p.conj() * q)
                    .sum::<crate::linalg::C64>()
                    .norm_sqr();
                assert!((k[(i, j)] - direct).abs() < 1e-12);
                assert!((0.0..=1.0 + 1e-12).contains(&k[(i, j)]));
            }
        }
        assert_eq!(k.asymmetry(), 0.0);
        let (vals, _) = eig_symmetric(&k).unwrap();
        assert!(vals[0] > -1e-8);
        let c = cross_kernel(&x, &x, &spec).unwrap();
        assert!(c.max_abs_diff(&k) < 1e-12);
    }
}
