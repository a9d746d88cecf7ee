use std::io::{BufRead, BufReader, Read, Write};

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{seeded, substream, Gaussian};

/// Feature dimension of the two-cluster task.
pub const DATA_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub seed: u64,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<u8>, seed: u64) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Shape { expected: points.len(), got: labels.len() });
        }
        if points.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        let p = points[0].len();
        if let Some(bad) = points.iter().find(|r| r.len() != p) {
            return Err(Error::Shape { expected: p, got: bad.len() });
        }
        if points.iter().flatten().any(|v| v.is_nan()) {
            return Err(domain("dataset contains NaN"));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(domain("labels must be 0 or 1"));
        }
        Ok(Self { points, labels, seed })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        for row in &self.points {
            for (acc, v) in c.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let n = self.len() as f64;
        c.iter_mut().for_each(|v| *v /= n);
        c
    }

    pub fn class_mean(&self, label: u8) -> Option<Vec<f64>> {
        let rows: Vec<&Vec<f64>> =
            self.points.iter().zip(&self.labels).filter(|(_, &l)| l == label).map(|(r, _)| r).collect();
        if rows.is_empty() {
            return None;
        }
        let mut c = vec![0.0; self.dim()];
        for r in &rows {
            for (acc, v) in c.iter_mut().zip(r.iter()) {
                *acc += v;
            }
        }
        Some(c.into_iter().map(|v| v / rows.len() as f64).collect())
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            seed: self.seed,
        }
    }
}

/// Class centres μ₀ = 0 and μ₁ = (s, 0.7s, 0, 0).
pub fn class_centres(separation: f64) -> [[f64; DATA_DIM]; 2] {
    [[0.0; DATA_DIM], [separation, 0.7 * separation, 0.0, 0.0]]
}

/// n/2 isotropic Gaussian samples around each centre; class 0 first.
pub fn gen_dataset(n: usize, separation: f64, cluster_sigma: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(domain(format!("dataset size must be positive and even, got {n}")));
    }
    if !(0.8..=1.5).contains(&separation) {
        warn!("separation {separation} outside the usual range [0.8, 1.5]");
    }
    if !(0.6..=0.8).contains(&cluster_sigma) {
        warn!("cluster sigma {cluster_sigma} outside the usual range [0.6, 0.8]");
    }
    let mut rng = seeded(seed);
    let mut gauss = Gaussian::new();
    let centres = class_centres(separation);
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (label, mu) in centres.iter().enumerate() {
        for _ in 0..n / 2 {
            points.push(mu.iter().map(|m| m + cluster_sigma * gauss.sample(&mut rng)).collect());
            labels.push(label as u8);
        }
    }
    Dataset::new(points, labels, seed)
}

/// Seeded shuffle, then the first ⌊train_frac·n⌉ rows train.
pub fn train_test_split(data: &Dataset, train_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&train_frac) || train_frac == 0.0 {
        return Err(domain(format!("train fraction {train_frac} outside (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut substream(seed, 1));
    let n_train = (train_frac * data.len() as f64).round() as usize;
    Ok((data.subset(&idx[..n_train]), data.subset(&idx[n_train..])))
}

pub fn write_csv<W: Write>(data: &Dataset, mut w: W) -> Result<()> {
    let header: Vec<String> = (0..data.dim()).map(|i| format!("x{i}")).chain(["label".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (row, label) in data.points.iter().zip(&data.labels) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{},{label}", cells.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: Read>(r: R, seed: u64) -> Result<Dataset> {
    let mut lines = BufReader::new(r).lines();
    let header = lines.next().ok_or(Error::Empty("csv"))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let p = cols.len().saturating_sub(1);
    let expected: Vec<String> = (0..p).map(|i| format!("x{i}")).chain(["label".to_string()]).collect();
    if cols != expected {
        return Err(Error::Parse(format!("unexpected csv header '{header}'")));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != p + 1 {
            return Err(Error::Parse(format!("line {}: expected {} fields", lineno + 2, p + 1)));
        }
        let row = fields[..p]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2))))
            .collect::<Result<Vec<f64>>>()?;
        let label = fields[p].parse::<u8>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
        points.push(row);
        labels.push(label);
    }
    Dataset::new(points, labels, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(gen_dataset(50, 1.2, 0.7, 9).unwrap(), gen_dataset(50, 1.2, 0.7, 9).unwrap());
        assert_ne!(gen_dataset(50, 1.2, 0.7, 9).unwrap(), gen_dataset(50, 1.2, 0.7, 10).unwrap());
    }

    #[test]
    fn class_mean_within_clt_bound() {
        let n = 200;
        let d = gen_dataset(n, 1.5, 0.6, 42).unwrap();
        let m1 = d.class_mean(1).unwrap();
        let mu1 = class_centres(1.5)[1];
        let bound = 3.0 * 0.6 / ((n / 2) as f64).sqrt();
        for (a, b) in m1.iter().zip(mu1) {
            assert!((a - b).abs() < bound, "{a} vs {b}");
        }
    }

    #[test]
    fn split_sizes() {
        let d = gen_dataset(200, 1.5, 0.6, 42).unwrap();
        let (tr, te) = train_test_split(&d, 0.8, 42).unwrap();
        assert_eq!((tr.len(), te.len()), (160, 40));
        assert!(tr.labels.contains(&0) && tr.labels.contains(&1));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(gen_dataset(0, 1.0, 0.6, 1).is_err());
        assert!(gen_dataset(7, 1.0, 0.6, 1).is_err());
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let d = gen_dataset(20, 1.0, 0.7, 3).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x0,x1,x2,x3,label\n"));
        let back = read_csv(buf.as_slice(), 3).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(read_csv("a,b,label\n1,2,0\n".as_bytes(), 0).is_err());
    }
}
