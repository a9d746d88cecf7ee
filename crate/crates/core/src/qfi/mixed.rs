//! SLD quantum Fisher information of mixed-state families, split into the
//! classical part (eigenvalue motion) and the quantum part (eigenbasis motion).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{eig_hermitian, CMat, RMat};
use crate::qstate::MixedState;

use super::pure::MIN_STEP;
use super::QfiMatrix;

/// Eigenvalues at or below this are treated as outside the support.
pub const EIGEN_FLOOR: f64 = 1e-8;
/// Eigenvalue pairs closer than this count as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;
/// Minimum spectral gap for the crossing check.
const CROSSING_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QfiDecomposition {
    pub f_total: QfiMatrix,
    pub f_class: QfiMatrix,
    pub f_quant: QfiMatrix,
    pub quantum_fraction: f64,
    /// Step actually used after any crossing retries.
    pub step: f64,
}

struct Sample {
    /// ∂_k ρ expressed in the eigenbasis of ρ(x).
    derivs: Vec<CMat>,
    crossing: bool,
}

fn rayleigh_order_broken(values: &[f64], vecs: &CMat, rho: &CMat) -> bool {
    let d = values.len();
    let r: Vec<f64> = (0..d)
        .map(|i| {
            let v = vecs.column(i);
            crate::linalg::inner(&v, &rho.mat_vec(&v)).re
        })
        .collect();
    for i in 0..d {
        if values[i] <= EIGEN_FLOOR {
            continue;
        }
        for j in (i + 1)..d {
            if values[j] - values[i] > CROSSING_GAP && r[j] < r[i] {
                return true;
            }
        }
    }
    false
}

fn sample(
    x: &[f64],
    family: &dyn Fn(&[f64]) -> Result<MixedState>,
    h: f64,
    values: &[f64],
    vecs: &CMat,
) -> Result<Sample> {
    let vdag = vecs.adjoint();
    let mut derivs = Vec::with_capacity(x.len());
    let mut crossing = false;
    for k in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let rp = family(&xp)?;
        let rm = family(&xm)?;
        crossing |= rayleigh_order_broken(values, vecs, rp.matrix());
        crossing |= rayleigh_order_broken(values, vecs, rm.matrix());
        let d = CMat::axpby(0.5 / h, rp.matrix(), -0.5 / h, rm.matrix());
        derivs.push(vdag.matmul(&d).matmul(vecs));
    }
    Ok(Sample { derivs, crossing })
}

/// SLD QFI by central differences of ρ(x).
///
/// Total: Σ_{λ_i+λ_j ≥ 2·floor} 2 Re(∂_kρ_ij ∂_lρ_ji)/(λ_i+λ_j) in the eigenbasis
/// of ρ(x). Quantum part: the same sum over non-degenerate pairs. Classical
/// part: the remainder, i.e. the eigenvalue-derivative terms Σ ∂_kλ_i ∂_lλ_i/λ_i,
/// with degenerate blocks handled basis-independently.
pub fn qfi_mixed(x: &[f64], family: &dyn Fn(&[f64]) -> Result<MixedState>, step: f64) -> Result<QfiDecomposition> {
    if !(step >= MIN_STEP) || !step.is_finite() {
        return Err(domain(format!("finite-difference step {step} below {MIN_STEP:e}")));
    }
    let rho = family(x)?;
    let eig = eig_hermitian(rho.matrix())?;
    let values = eig.values;
    let mut h = step;
    let mut s = sample(x, family, h, &values, &eig.vectors)?;
    if s.crossing {
        h = step / 10.0;
        s = sample(x, family, h, &values, &eig.vectors)?;
        if s.crossing {
            return Err(Error::EigenCrossing { step: h });
        }
    }

    let p = x.len();
    let d = values.len();
    let mut total = RMat::zeros(p, p);
    let mut quant = RMat::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let (da, db) = (&s.derivs[a], &s.derivs[b]);
            let (mut t, mut q) = (0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    let denom = values[i] + values[j];
                    if denom < 2.0 * EIGEN_FLOOR {
                        continue;
                    }
                    let term = 2.0 * (da[(i, j)] * db[(j, i)]).re / denom;
                    t += term;
                    if (values[i] - values[j]).abs() >= DEGENERACY_TOL {
                        q += term;
                    }
                }
            }
            total[(a, b)] = t;
            total[(b, a)] = t;
            quant[(a, b)] = q;
            quant[(b, a)] = q;
        }
    }
    let class = total.sub(&quant);
    let tr = total.trace();
    let quantum_fraction = if tr > 0.0 { quant.trace() / tr } else { 0.0 };
    Ok(QfiDecomposition {
        f_total: QfiMatrix::new(total, x.to_vec()),
        f_class: QfiMatrix::new(class, x.to_vec()),
        f_quant: QfiMatrix::new(quant, x.to_vec()),
        quantum_fraction,
        step: h,
    })
}
