//! Quantum Fisher information of parameterized state families.

mod ema;
mod expansion;
mod mixed;
mod pure;
mod robust;
mod spectral;

pub use ema::{adaptive_epsilon, EmaSchedule, EmaTracker, MatrixEma};
pub use expansion::{expansion_residuals, loglog_slope};
pub use mixed::{qfi_mixed, QfiDecomposition, EIGEN_FLOOR};
pub use pure::{qfi_pure, qfi_pure_family, QfiOptions, DEFAULT_STEP, MIN_STEP};
pub use robust::{lambda_max_at, lambda_max_samples, mean_lambda_max, median, median_lambda_max};
pub use spectral::{spectral, QfiSpectrum};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::RMat;

pub const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfiMatrix {
    pub entries: RMat,
    pub base_point: Vec<f64>,
}

impl QfiMatrix {
    pub fn new(entries: RMat, base_point: Vec<f64>) -> Self {
        Self { entries, base_point }
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn spectrum(&self) -> Result<QfiSpectrum> {
        spectral(self)
    }

    pub fn lambda_max(&self) -> Result<f64> {
        Ok(self.spectrum()?.lambda_max())
    }

    /// ¼ δᵀ F δ, the infinitesimal infidelity along δ.
    pub fn quadratic_form(&self, delta: &[f64]) -> f64 {
        0.25 * self.entries.bilinear(delta, delta)
    }

    /// Row-major CSV, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim() {
            let row: Vec<String> = self.entries.row(i).iter().map(|v| crate::numfmt::fmt_sig(*v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let spec = self.spectrum()?;
        Ok(serde_json::json!({
            "base_point": self.base_point,
            "entries": self.entries.to_rows(),
            "eigenvalues": spec.values,
            "eigenvectors": spec.vectors.to_rows(),
        }))
    }
}
