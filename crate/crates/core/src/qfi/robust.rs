use rayon::prelude::*;

use crate::embed::EmbeddingSpec;
use crate::error::{Error, Result};

use super::{qfi_pure, spectral, QfiOptions};

pub fn lambda_max_at(x: &[f64], spec: &EmbeddingSpec) -> Result<f64> {
    Ok(spectral(&qfi_pure(x, spec, QfiOptions::default())?)?.lambda_max())
}

/// Per-sample λ_max, in input order.
pub fn lambda_max_samples(samples: &[Vec<f64>], spec: &EmbeddingSpec) -> Result<Vec<f64>> {
    samples.par_iter().map(|x| lambda_max_at(x, spec)).collect()
}

/// Median; even counts average the middle two.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median input"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Ok(if v.len().is_multiple_of(2) { 0.5 * (v[m - 1] + v[m]) } else { v[m] })
}

pub fn median_lambda_max(samples: &[Vec<f64>], spec: &EmbeddingSpec) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("sample list"));
    }
    median(&lambda_max_samples(samples, spec)?)
}

/// λ_max of the QFI evaluated at the sample centroid.
pub fn mean_lambda_max(samples: &[Vec<f64>], spec: &EmbeddingSpec) -> Result<f64> {
    let first = samples.first().ok_or(Error::Empty("sample list"))?;
    let mut c = vec![0.0; first.len()];
    for s in samples {
        for (acc, v) in c.iter_mut().zip(s) {
            *acc += v;
        }
    }
    c.iter_mut().for_each(|v| *v /= samples.len() as f64);
    lambda_max_at(&c, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::gen_dataset;

    #[test]
    fn median_rules() {
        assert_eq!(median(&[3.0]).unwrap(), 3.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }

    #[test]
    fn single_sample_median_is_its_lambda() {
        let spec = EmbeddingSpec::anisotropic();
        let x = vec![0.2, 0.4, -0.1, 0.3];
        assert_eq!(median_lambda_max(std::slice::from_ref(&x), &spec).unwrap(), lambda_max_at(&x, &spec).unwrap());
        assert!(median_lambda_max(&[], &spec).is_err());
    }

    #[test]
    fn median_close_to_mean_on_clean_data() {
        let spec = EmbeddingSpec::anisotropic();
        let d = gen_dataset(60, 1.5, 0.6, 42).unwrap();
        let med = median_lambda_max(&d.points, &spec).unwrap();
        let mean = mean_lambda_max(&d.points, &spec).unwrap();
        assert!((med - mean).abs() / mean < 0.15, "{med} vs {mean}");
    }
}
