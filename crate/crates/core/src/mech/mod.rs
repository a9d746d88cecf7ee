//! Privacy mechanisms and their accounting.

mod allocation;
mod bounds;
mod channel;
mod composition;
mod modes;
mod subspace;
mod transport;
mod uncertainty;
mod wasserstein;

pub use allocation::{minimax_allocation, minimax_value, optimal_allocation, Candidate, NoiseAllocation};
pub use bounds::{
    advantage_ratio, eps_for_allocation, eps_isotropic, eps_linear, eps_optimal, linear_weights, MechanismConfig,
};
pub use channel::{effective_qfi, min_channel_fidelity, EffectiveQfi, MetricChannel, FIT_WARN};
pub use composition::{compose_qfi, crossover_k, ratio_k, saturation, CompositionLedger};
pub use modes::{
    privacy_mode, privacy_modes, Baseline, Geometric, Isotropic, ModeContext, Optimal, PrivacyMechanism, Subspace,
};
pub use subspace::{subspace_accounting, subspace_project, SubspaceProjection};
pub use transport::{transport, TransportSolution};
pub use uncertainty::{uncertainty_check, UncertaintyCheck};
pub use wasserstein::{w1_diag, wasserstein_lipschitz, z_distribution, PairW1, WassersteinReport, MAX_W1_DIM};
