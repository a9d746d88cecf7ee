use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::RMat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EmaSchedule {
    Fixed(f64),
    /// β_t = 1 − 1/t, which makes the tracker the running mean.
    RunningMean,
}

impl EmaSchedule {
    fn beta(&self, t: u64) -> f64 {
        match *self {
            EmaSchedule::Fixed(b) => b,
            EmaSchedule::RunningMean => 1.0 - 1.0 / t as f64,
        }
    }
}

/// Scalar λ_max tracker, updated by value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmaTracker {
    pub schedule: EmaSchedule,
    pub value: f64,
    pub steps: u64,
}

impl EmaTracker {
    pub fn new(beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(domain(format!("EMA beta {beta} outside [0, 1)")));
        }
        Ok(Self { schedule: EmaSchedule::Fixed(beta), value: 0.0, steps: 0 })
    }

    pub fn running_mean() -> Self {
        Self { schedule: EmaSchedule::RunningMean, value: 0.0, steps: 0 }
    }

    /// λ̂ ← β λ̂ + (1−β) λ
    pub fn update(self, lambda_max: f64) -> Result<Self> {
        if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
            return Err(domain(format!("λ_max observation {lambda_max} must be finite and nonnegative")));
        }
        let steps = self.steps + 1;
        let beta = self.schedule.beta(steps);
        Ok(Self { value: beta * self.value + (1.0 - beta) * lambda_max, steps, ..self })
    }
}

/// Full-matrix EMA of QFI estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEma {
    pub schedule: EmaSchedule,
    pub value: Option<RMat>,
    pub steps: u64,
}

impl MatrixEma {
    pub fn new(schedule: EmaSchedule) -> Self {
        Self { schedule, value: None, steps: 0 }
    }

    pub fn update(self, f: &RMat) -> Result<Self> {
        let steps = self.steps + 1;
        let beta = self.schedule.beta(steps);
        let value = match self.value {
            None => f.scale(1.0 - beta),
            Some(prev) => {
                if prev.rows() != f.rows() {
                    return Err(Error::Shape { expected: prev.rows(), got: f.rows() });
                }
                prev.scale(beta).add(&f.scale(1.0 - beta))
            }
        };
        Ok(Self { value: Some(value), steps, schedule: self.schedule })
    }
}

/// ε̂ = (Δ²/2) λ̂ (1 − cγ)
pub fn adaptive_epsilon(tracker: &EmaTracker, delta: f64, c: f64, gamma: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(domain("sensitivity must be positive"));
    }
    if c * gamma >= 1.0 {
        return Err(domain(format!("cγ = {} must be below 1", c * gamma)));
    }
    Ok((0.5 * delta * delta * tracker.value * (1.0 - c * gamma)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_tracks_latest() {
        let t = EmaTracker::new(0.0).unwrap().update(3.0).unwrap().update(7.5).unwrap();
        assert_eq!(t.value, 7.5);
        assert_eq!(t.steps, 2);
    }

    #[test]
    fn constant_stream_closed_form() {
        let mut t = EmaTracker::new(0.9).unwrap();
        for step in 1..=30 {
            t = t.update(5.0).unwrap();
            let expected = 5.0 * (1.0 - 0.9f64.powi(step));
            assert!((t.value - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn running_mean_limit() {
        let xs = [3.0, 9.0, 4.5, 10.0, 0.25];
        let mut t = EmaTracker::running_mean();
        for x in xs {
            t = t.update(x).unwrap();
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((t.value - mean).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_observation() {
        assert!(EmaTracker::new(0.5).unwrap().update(-1.0).is_err());
        assert!(EmaTracker::new(1.0).is_err());
    }

    #[test]
    fn adaptive_epsilon_values() {
        let zero = EmaTracker::new(0.9).unwrap();
        assert_eq!(adaptive_epsilon(&zero, 1.0, 1.0, 0.01).unwrap(), 0.0);
        let t = EmaTracker { value: 0.25, ..zero };
        assert!((adaptive_epsilon(&t, 1.0, 1.0, 0.01).unwrap() - 0.12375).abs() < 1e-15);
        assert!(adaptive_epsilon(&t, 1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn matrix_ema_running_mean() {
        let a = RMat::diag(&[1.0, 2.0]);
        let b = RMat::diag(&[3.0, 6.0]);
        let m = MatrixEma::new(EmaSchedule::RunningMean).update(&a).unwrap().update(&b).unwrap();
        assert!(m.value.unwrap().max_abs_diff(&RMat::diag(&[2.0, 4.0])) < 1e-15);
    }
}
