//! Soft-margin SVM on a precomputed kernel, solved in the dual by SMO with
//! maximal-violating-pair working-set selection.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::RMat;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// Stop once the maximal KKT violation drops to this value.
    pub tol: f64,
    /// Pair updates per training point.
    pub max_iter_per_point: usize,
    pub record_trace: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-4, max_iter_per_point: 10_000, record_trace: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    /// y_i α_i per training point.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub gap: f64,
    /// Dual objective Σα − ½αᵀQα after every update, when recorded.
    pub objective_trace: Vec<f64>,
}

impl SvmModel {
    pub fn decision(&self, k_row: &[f64]) -> f64 {
        self.coef.iter().zip(k_row).map(|(c, k)| c * k).sum::<f64>() - self.rho
    }

    pub fn support_count(&self) -> usize {
        self.coef.iter().filter(|c| c.abs() > 0.0).count()
    }
}

fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    // G = Qα − 1, so Σα − ½αᵀQα = ½ Σ α_i (1 − G_i).
    0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>()
}

pub fn svm_fit(k: &RMat, labels: &[u8], params: &SvmParams) -> Result<SvmModel> {
    let n = labels.len();
    if k.rows() != n || k.cols() != n {
        return Err(Error::Shape { expected: n, got: k.rows() });
    }
    if !(params.c > 0.0) {
        return Err(domain("C must be positive"));
    }
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v < 0.0) {
        return Err(domain("training labels contain a single class"));
    }
    let c = params.c;
    let q = |i: usize, j: usize| y[i] * y[j] * k[(i, j)];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = Vec::new();
    let max_iter = params.max_iter_per_point.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut gap;

    loop {
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        let (mut i_sel, mut j_sel) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
            if up && v > g_max {
                g_max = v;
                i_sel = t;
            }
            if low && v < g_min {
                g_min = v;
                j_sel = t;
            }
        }
        gap = g_max - g_min;
        if i_sel == usize::MAX || j_sel == usize::MAX || gap <= params.tol || iterations >= max_iter {
            break;
        }
        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
        iterations += 1;
        if params.record_trace {
            trace.push(dual_objective(&alpha, &grad));
        }
    }

    // Offset from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb, mut sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { 0.5 * (ub + lb) };
    Ok(SvmModel {
        coef: alpha.iter().zip(&y).map(|(a, yy)| a * yy).collect(),
        rho,
        iterations,
        gap,
        objective_trace: trace,
    })
}

/// `k_test` rows are test points, columns training points.
pub fn svm_predict(model: &SvmModel, k_test: &RMat) -> Result<Vec<u8>> {
    if k_test.cols() != model.coef.len() {
        return Err(Error::Shape { expected: model.coef.len(), got: k_test.cols() });
    }
    Ok((0..k_test.rows()).map(|r| u8::from(model.decision(k_test.row(r)) > 0.0)).collect())
}

pub fn accuracy(pred: &[u8], truth: &[u8]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{cross_kernel, gen_dataset, kernel_matrix, train_test_split, EmbeddingSpec};

    fn block_kernel(labels: &[u8]) -> RMat {
        RMat::from_fn(labels.len(), labels.len(), |i, j| if labels[i] == labels[j] { 1.0 } else { 0.0 })
    }

    #[test]
    fn separable_block_kernel() {
        let labels = [0, 0, 1, 1, 0, 1];
        let k = block_kernel(&labels);
        let m = svm_fit(&k, &labels, &SvmParams::default()).unwrap();
        assert_eq!(svm_predict(&m, &k).unwrap(), labels.to_vec());
    }

    #[test]
    fn single_class_is_refused() {
        let k = RMat::identity(3);
        assert!(matches!(svm_fit(&k, &[1, 1, 1], &SvmParams::default()), Err(Error::Domain(_))));
    }

    /// A point strictly outside the margin carries no weight, so a copy of it
    /// leaves the optimum unchanged.
    #[test]
    fn duplicated_point_keeps_decision_function() {
        let spec = EmbeddingSpec::anisotropic();
        let data = gen_dataset(30, 1.2, 0.7, 5).unwrap();
        let params = SvmParams { tol: 1e-10, ..SvmParams::default() };
        let k = kernel_matrix(&data.points, &spec).unwrap();
        let m = svm_fit(&k, &data.labels, &params).unwrap();

        let idle = m.coef.iter().position(|&c| c == 0.0).expect("a non-support point");
        let mut pts = data.points.clone();
        let mut lab = data.labels.clone();
        pts.push(pts[idle].clone());
        lab.push(lab[idle]);
        let k2 = kernel_matrix(&pts, &spec).unwrap();
        let m2 = svm_fit(&k2, &lab, &params).unwrap();

        let probe: Vec<Vec<f64>> = (0..10).map(|i| vec![0.2 * i as f64 - 0.5, 0.1, -0.3, 0.4]).collect();
        let kp = cross_kernel(&probe, &data.points, &spec).unwrap();
        let kp2 = cross_kernel(&probe, &pts, &spec).unwrap();
        for r in 0..probe.len() {
            let (a, b) = (m.decision(kp.row(r)), m2.decision(kp2.row(r)));
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn dual_objective_is_monotone() {
        let spec = EmbeddingSpec::anisotropic();
        let data = gen_dataset(60, 1.0, 0.8, 11).unwrap();
        let k = kernel_matrix(&data.points, &spec).unwrap();
        let m = svm_fit(&k, &data.labels, &SvmParams { record_trace: true, ..SvmParams::default() }).unwrap();
        assert!(!m.objective_trace.is_empty());
        for w in m.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} -> {}", w[0], w[1]);
        }
        assert!(m.gap <= 1e-4);
    }

    #[test]
    fn anisotropic_task_beats_chance() {
        let spec = EmbeddingSpec::anisotropic();
        let data = gen_dataset(200, 1.5, 0.6, 42).unwrap();
        let (tr, te) = train_test_split(&data, 0.8, 42).unwrap();
        let k = kernel_matrix(&tr.points, &spec).unwrap();
        let m = svm_fit(&k, &tr.labels, &SvmParams::default()).unwrap();
        let kt = cross_kernel(&te.points, &tr.points, &spec).unwrap();
        let acc = accuracy(&svm_predict(&m, &kt).unwrap(), &te.labels);
        assert!(acc >= 0.7, "accuracy {acc}");
    }
}
