//! Balanced transportation problem: Vogel start, MODI potentials, Bland pivots.

use std::collections::VecDeque;

use crate::error::{domain, Error, Result};

/// Reduced costs above −OPT_TOL count as nonnegative.
const OPT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub cost: f64,
    /// Row-major m×n plan.
    pub plan: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

struct Problem<'a> {
    m: usize,
    n: usize,
    cost: &'a [f64],
}

impl Problem<'_> {
    fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }
}

/// Two smallest entries; a lone entry is its own penalty.
fn penalty(costs: impl Iterator<Item = f64>) -> f64 {
    let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
    for c in costs {
        if c < a {
            b = a;
            a = c;
        } else if c < b {
            b = c;
        }
    }
    if b.is_finite() {
        b - a
    } else {
        a
    }
}

/// Vogel approximation. Each step retires exactly one line (both on the
/// last), so the m+n−1 basic cells form a spanning tree even when degenerate.
fn vogel(p: &Problem, supply: &[f64], demand: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let (m, n) = (p.m, p.n);
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut row_on = vec![true; m];
    let mut col_on = vec![true; n];
    let (mut rows_left, mut cols_left) = (m, n);
    let mut x = vec![0.0; m * n];
    let mut basic = vec![false; m * n];
    loop {
        if rows_left == 1 && cols_left == 1 {
            let i = row_on.iter().position(|&b| b).unwrap();
            let j = col_on.iter().position(|&b| b).unwrap();
            x[i * n + j] += s[i].max(0.0);
            basic[i * n + j] = true;
            break;
        }
        let mut best: Option<(f64, bool, usize)> = None;
        for i in (0..m).filter(|&i| row_on[i]) {
            let pen = penalty((0..n).filter(|&j| col_on[j]).map(|j| p.c(i, j)));
            if best.is_none_or(|b| pen > b.0) {
                best = Some((pen, true, i));
            }
        }
        for j in (0..n).filter(|&j| col_on[j]) {
            let pen = penalty((0..m).filter(|&i| row_on[i]).map(|i| p.c(i, j)));
            if best.is_none_or(|b| pen > b.0) {
                best = Some((pen, false, j));
            }
        }
        let (_, is_row, line) = best.expect("an active line remains");
        let (i, j) = if is_row {
            let j = (0..n).filter(|&j| col_on[j]).min_by(|&a, &b| p.c(line, a).total_cmp(&p.c(line, b))).unwrap();
            (line, j)
        } else {
            let i = (0..m).filter(|&i| row_on[i]).min_by(|&a, &b| p.c(a, line).total_cmp(&p.c(b, line))).unwrap();
            (i, line)
        };
        let q = s[i].min(d[j]).max(0.0);
        x[i * n + j] += q;
        basic[i * n + j] = true;
        s[i] -= q;
        d[j] -= q;
        let retire_row = if rows_left == 1 {
            false
        } else if cols_left == 1 {
            true
        } else {
            s[i] <= d[j]
        };
        if retire_row {
            row_on[i] = false;
            rows_left -= 1;
        } else {
            col_on[j] = false;
            cols_left -= 1;
        }
    }
    (x, basic)
}

/// u_i + v_j = c_ij on basic cells, u_0 = 0.
fn potentials(p: &Problem, basic: &[bool]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (m, n) = (p.m, p.n);
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut queue = VecDeque::from([(true, 0usize)]);
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            for j in 0..n {
                if basic[k * n + j] && v[j].is_nan() {
                    v[j] = p.c(k, j) - u[k];
                    queue.push_back((false, j));
                }
            }
        } else {
            for i in 0..m {
                if basic[i * n + k] && u[i].is_nan() {
                    u[i] = p.c(i, k) - v[k];
                    queue.push_back((true, i));
                }
            }
        }
    }
    if u.iter().chain(&v).any(|x| x.is_nan()) {
        return Err(domain("basis is not a spanning tree"));
    }
    Ok((u, v))
}

/// Basic cells on the tree path from row `i` to column `j`, in order.
fn tree_path(m: usize, n: usize, basic: &[bool], i: usize, j: usize) -> Result<Vec<(usize, usize)>> {
    // nodes: rows 0..m, columns m..m+n
    let mut prev = vec![usize::MAX; m + n];
    prev[i] = i;
    let mut queue = VecDeque::from([i]);
    while let Some(node) = queue.pop_front() {
        if node == m + j {
            break;
        }
        let next: Vec<usize> = if node < m {
            (0..n).filter(|&c| basic[node * n + c]).map(|c| m + c).collect()
        } else {
            (0..m).filter(|&r| basic[r * n + node - m]).collect()
        };
        for nb in next {
            if prev[nb] == usize::MAX {
                prev[nb] = node;
                queue.push_back(nb);
            }
        }
    }
    if prev[m + j] == usize::MAX {
        return Err(domain("entering cell is not connected to the basis"));
    }
    let mut cells = Vec::new();
    let mut node = m + j;
    while node != i {
        let p = prev[node];
        cells.push(if node < m { (node, p - m) } else { (p, node - m) });
        node = p;
    }
    Ok(cells)
}

/// Minimum-cost plan for row-major costs (m×n) with equal total supply and demand.
pub fn transport(cost: &[f64], supply: &[f64], demand: &[f64]) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::Empty("transport marginals"));
    }
    if cost.len() != m * n {
        return Err(Error::Shape { expected: m * n, got: cost.len() });
    }
    if supply.iter().chain(demand).any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(domain("marginals must be finite and nonnegative"));
    }
    let (ts, td): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (ts - td).abs() > 1e-9 {
        return Err(domain(format!("mass mismatch {:e}", ts - td)));
    }
    let p = Problem { m, n, cost };
    let (mut x, mut basic) = vogel(&p, supply, demand);
    let mut pivots = 0;
    loop {
        let (u, v) = potentials(&p, &basic)?;
        let entering = (0..m * n).find(|&c| !basic[c] && p.c(c / n, c % n) - u[c / n] - v[c % n] < -OPT_TOL);
        let Some(cell) = entering else {
            let sol = TransportSolution { cost: (0..m * n).map(|c| x[c] * cost[c]).sum(), plan: x, u, v, pivots };
            verify(&p, &sol, &basic, supply, demand)?;
            return Ok(sol);
        };
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(domain("transportation simplex did not converge"));
        }
        let (ei, ej) = (cell / n, cell % n);
        // path row ei → column ej; the cycle alternates −, +, − starting at column ej
        let path = tree_path(m, n, &basic, ei, ej)?;
        let minus: Vec<(usize, usize)> = path.iter().copied().step_by(2).collect();
        let theta = minus.iter().map(|&(a, b)| x[a * n + b]).fold(f64::INFINITY, f64::min);
        let leaving = minus
            .iter()
            .filter(|&&(a, b)| x[a * n + b] <= theta)
            .map(|&(a, b)| a * n + b)
            .min()
            .expect("cycle has a decreasing cell");
        for (k, &(a, b)) in path.iter().enumerate() {
            if k % 2 == 0 {
                x[a * n + b] -= theta;
            } else {
                x[a * n + b] += theta;
            }
        }
        x[cell] += theta;
        x[leaving] = 0.0;
        basic[leaving] = false;
        basic[cell] = true;
    }
}

/// Complementary slackness and primal/dual agreement.
fn verify(p: &Problem, sol: &TransportSolution, basic: &[bool], supply: &[f64], demand: &[f64]) -> Result<()> {
    let n = p.n;
    let scale = p.cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    for c in 0..p.m * n {
        let r = p.c(c / n, c % n) - sol.u[c / n] - sol.v[c % n];
        if r < -1e-9 * scale || (basic[c] && r.abs() > 1e-9 * scale) || (sol.plan[c] > 1e-12 && r.abs() > 1e-9 * scale)
        {
            return Err(domain(format!("complementary slackness violated at cell {c} (reduced cost {r:e})")));
        }
        if sol.plan[c] < -1e-12 {
            return Err(domain(format!("negative flow {:e} at cell {c}", sol.plan[c])));
        }
    }
    let dual: f64 = sol.u.iter().zip(supply).map(|(a, b)| a * b).sum::<f64>()
        + sol.v.iter().zip(demand).map(|(a, b)| a * b).sum::<f64>();
    if (dual - sol.cost).abs() > 1e-9 * scale.max(sol.cost.abs()) {
        return Err(domain(format!("duality gap {:e}", dual - sol.cost)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force over the vertices of the 2×2 and 2×3 polytopes via a fine grid.
    fn grid_2xn(cost: &[f64], s: &[f64], d: &[f64]) -> f64 {
        let n = d.len();
        let steps = 400;
        let mut best = f64::INFINITY;
        let mut rec = |first: &[f64]| {
            let second: Vec<f64> = (0..n).map(|j| d[j] - first[j]).collect();
            if second.iter().any(|v| *v < -1e-12) {
                return;
            }
            let c: f64 = (0..n).map(|j| first[j] * cost[j] + second[j] * cost[n + j]).sum();
            best = best.min(c);
        };
        if n == 2 {
            for a in 0..=steps {
                let f0 = s[0] * a as f64 / steps as f64;
                rec(&[f0, s[0] - f0]);
            }
        } else {
            for a in 0..=steps {
                for b in 0..=(steps - a) {
                    let f0 = s[0] * a as f64 / steps as f64;
                    let f1 = s[0] * b as f64 / steps as f64;
                    rec(&[f0, f1, s[0] - f0 - f1]);
                }
            }
        }
        best
    }

    #[test]
    fn classic_instance() {
        // supplies 20/30/25, demands 10/25/15/25
        let cost = [8.0, 6.0, 10.0, 9.0, 9.0, 12.0, 13.0, 7.0, 14.0, 9.0, 16.0, 5.0];
        let sol = transport(&cost, &[20.0, 30.0, 25.0], &[10.0, 25.0, 15.0, 25.0]).unwrap();
        let row: Vec<f64> = (0..3).map(|i| sol.plan[i * 4..i * 4 + 4].iter().sum()).collect();
        assert_eq!(row, vec![20.0, 30.0, 25.0]);
        // reference optimum from an independent LP solve
        assert!((sol.cost - 585.0).abs() < 1e-9, "{}", sol.cost);
    }

    #[test]
    fn degenerate_point_masses() {
        let cost = [0.0, 1.0, 1.0, 0.0];
        let sol = transport(&cost, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(sol.cost, 1.0);
        let sol = transport(&cost, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(sol.cost, 0.0);
    }

    #[test]
    fn rejects_mismatch() {
        assert!(transport(&[0.0; 4], &[1.0, 0.0], &[0.5, 0.4]).is_err());
        assert!(transport(&[0.0; 3], &[1.0, 0.0], &[0.5, 0.5]).is_err());
    }

    proptest! {
        #[test]
        fn matches_grid_on_small_instances(
            n in 2usize..4,
            cost in proptest::collection::vec(0.0f64..5.0, 6),
            a in 0.05f64..0.95,
            dw in proptest::collection::vec(0.05f64..1.0, 3),
        ) {
            let cost = &cost[..2 * n];
            let s = [a, 1.0 - a];
            let dsum: f64 = dw[..n].iter().sum();
            let d: Vec<f64> = dw[..n].iter().map(|w| w / dsum).collect();
            let sol = transport(cost, &s, &d).unwrap();
            let grid = grid_2xn(cost, &s, &d);
            prop_assert!(sol.cost <= grid + 1e-9);
            prop_assert!(grid - sol.cost < 0.05);
        }
    }
}
