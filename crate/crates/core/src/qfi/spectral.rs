use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{eig_symmetric, RMat};

use super::{QfiMatrix, SYMMETRY_TOL};

/// Eigenpairs in descending order; `vectors` holds u_k as column k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfiSpectrum {
    pub values: Vec<f64>,
    pub vectors: RMat,
}

impl QfiSpectrum {
    /// Builds a spectrum directly from eigenvalues with the standard basis.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut v: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let p = values.len();
        let vectors = RMat::from_fn(p, p, |i, k| if v[k].1 == i { 1.0 } else { 0.0 });
        Self { values: v.iter().map(|e| e.0).collect(), vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn reconstruct(&self) -> RMat {
        let p = self.dim();
        RMat::from_fn(p, p, |i, j| (0..p).map(|k| self.values[k] * self.vectors[(i, k)] * self.vectors[(j, k)]).sum())
    }
}

pub fn spectral(f: &QfiMatrix) -> Result<QfiSpectrum> {
    let m = &f.entries;
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * m.max_abs().max(1.0) {
        return Err(domain(format!("QFI matrix is not symmetric (deviation {asym:e})")));
    }
    let (vals, vecs) = eig_symmetric(&m.symmetrized())?;
    let p = vals.len();
    let order: Vec<usize> = (0..p).rev().collect();
    let mut vectors = RMat::from_fn(p, p, |i, k| vecs[(i, order[k])]);
    for k in 0..p {
        let mut lead = 0;
        for i in 0..p {
            if vectors[(i, k)].abs() > vectors[(lead, k)].abs() + 1e-12 {
                lead = i;
            }
        }
        if vectors[(lead, k)] < 0.0 {
            for i in 0..p {
                vectors[(i, k)] = -vectors[(i, k)];
            }
        }
    }
    Ok(QfiSpectrum { values: order.iter().map(|&i| vals[i]).collect(), vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};

    fn q(m: RMat) -> QfiMatrix {
        QfiMatrix::new(m, vec![])
    }

    #[test]
    fn diagonal_spectrum() {
        let s = spectral(&q(RMat::diag(&[9.0, 9.0, 0.09, 0.09]))).unwrap();
        for (a, b) in s.values.iter().zip([9.0, 9.0, 0.09, 0.09]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_spectrum() {
        let s = spectral(&q(RMat::identity(3))).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        for a in 0..3 {
            for b in 0..3 {
                let d = dot(&s.vector(a), &s.vector(b));
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_outer_product() {
        let v = [1.0, -2.0, 0.5];
        let m = RMat::from_fn(3, 3, |i, j| v[i] * v[j]);
        let s = spectral(&q(m.clone())).unwrap();
        assert!((s.values[0] - dot(&v, &v)).abs() < 1e-10);
        let u = s.vector(0);
        // Sign fix: largest-magnitude component positive, so u ∝ −v here.
        let cos = dot(&u, &v) / norm(&v);
        assert!((cos + 1.0).abs() < 1e-10);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-7);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = RMat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(spectral(&q(m)).is_err());
    }

    #[test]
    fn diagonal_constructor_sorts() {
        let s = QfiSpectrum::diagonal(&[0.09, 9.0, 1.0]);
        assert_eq!(s.values, vec![9.0, 1.0, 0.09]);
        assert_eq!(s.vector(0), vec![0.0, 1.0, 0.0]);
    }
}
