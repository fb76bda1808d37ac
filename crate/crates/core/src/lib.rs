//! Phase estimation from noisy interference fringes.
//!
//! The crate reduces Mach-Zehnder and SU(1,1) interferometer configurations
//! to a common fringe model `N(φ) = n_n + 𝒜(1 − 𝒞 cos φ)`, evaluates the
//! phase uncertainty of the M-step distillation estimator and of operation at
//! the optimal working point, and ships a Fock-space Monte-Carlo oracle that
//! reproduces every closed form from photon-counting samples.
//!
//! Modules:
//! - [`fringe`]: physical configurations, the fringe model, detected mean and variance.
//! - [`uncertainty`]: the distillation estimator and all closed-form variances.
//! - [`working_point`]: numerical working-point search, ratio maps, shot-noise boundary.
//! - [`oracle`]: beam-splitter Fock distributions, samplers and Monte-Carlo experiments.
//! - [`solve`]: scalar minimization and root finding used by the above.

pub mod error;
pub mod fringe;
pub mod oracle;
pub mod solve;
pub mod uncertainty;
pub mod working_point;

pub use error::{Error, Result};
pub use fringe::{
    derive_fringe, detected_variance, fringe_mean, statistics_variance, FringeModel,
    InterferometerSpec, NoiseChannel, PhotonStatistics,
};

pub use uncertainty::{ScanPlan, UncertaintyReport};
pub use working_point::{SweepGrid, WorkingPointResult};
