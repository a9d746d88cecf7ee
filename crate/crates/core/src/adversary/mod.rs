//! Attack-side analyses.

mod dephasing;
mod evasion;
mod leakage;
mod poison;

pub use dephasing::{dephasing_curve, dephasing_mi, DephasingCurve, SensitiveGrid};
pub use evasion::{evasion_analysis, evasion_direct, DirectCheck, EvasionReport};
pub use leakage::{leakage_profile, LeakageProfile};
pub use poison::{poison_experiment, PoisonReport, PoisonSetup};
