use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Soundness {
    /// (1 − f)^k
    pub error: f64,
    pub security_bits: f64,
}

pub fn soundness_error(fraud_fraction: f64, challenges: u32) -> Result<Soundness> {
    if !(0.0..=1.0).contains(&fraud_fraction) {
        return Err(domain(format!("fraud fraction {fraud_fraction} outside [0, 1]")));
    }
    let error = (1.0 - fraud_fraction).powi(challenges as i32);
    let security_bits = if error == 0.0 { f64::INFINITY } else { -error.log2() + 0.0 };
    Ok(Soundness { error, security_bits })
}

/// 1 − C(n−m, k)/C(n, k): chance that k draws without replacement from n
/// items hit at least one of the m bad ones.
pub fn hypergeometric_detection(n: usize, m: usize, k: usize) -> Result<f64> {
    if m > n || k > n {
        return Err(domain(format!("need m, k ≤ n (n={n}, m={m}, k={k})")));
    }
    let mut miss = 1.0;
    for i in 0..k {
        if n - m < i + 1 {
            return Ok(1.0);
        }
        miss *= (n - m - i) as f64 / (n - i) as f64;
    }
    Ok(1.0 - miss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let s = soundness_error(0.5, 30).unwrap();
        assert!((s.error - 9.313225746154785e-10).abs() < 1e-24);
        assert!((s.security_bits - 30.0).abs() < 1e-12);
        let s = soundness_error(0.0, 30).unwrap();
        assert_eq!((s.error, s.security_bits), (1.0, 0.0));
        let s = soundness_error(0.3, 30).unwrap();
        assert!((s.error - 2.25e-5).abs() < 0.01e-5);
        assert!((s.security_bits - 15.44).abs() < 0.01);
        assert!(soundness_error(1.5, 3).is_err());
    }

    #[test]
    fn hypergeometric_edges() {
        assert_eq!(hypergeometric_detection(10, 0, 5).unwrap(), 0.0);
        assert_eq!(hypergeometric_detection(10, 6, 5).unwrap(), 1.0);
        // one bad item among 4, draw 2: 1 − C(3,2)/C(4,2) = 1/2
        assert!((hypergeometric_detection(4, 1, 2).unwrap() - 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn monotone(f in 0.0f64..0.99, k in 0u32..200) {
            let a = soundness_error(f, k).unwrap().error;
            prop_assert!(soundness_error(f, k + 1).unwrap().error <= a);
            prop_assert!(soundness_error((f + 0.01).min(1.0), k).unwrap().error <= a);
        }

        #[test]
        fn exact_beats_binomial_bound(n in 1usize..200, mf in 0.0f64..1.0, kf in 0.0f64..1.0) {
            let m = (mf * n as f64) as usize;
            let k = (kf * n as f64) as usize;
            let exact = hypergeometric_detection(n, m, k).unwrap();
            let bound = 1.0 - soundness_error(m as f64 / n as f64, k as u32).unwrap().error;
            prop_assert!(exact >= bound - 1e-12);
        }
    }
}
