//! Classification and exact simulation of M/G/∞ queues with heavy-tailed
//! service times.
//!
//! An M/G/∞ queue serves every arriving customer immediately; when the mean
//! service time is infinite the customer count `Y_t` need not stabilize, and
//! individual occupancy states can be transient or recurrent — even both
//! regimes at once, which irreducible Markov chains cannot exhibit. The
//! boundary is the critical state `k0`: the smallest `k` for which
//! `∫ m(t)^k exp(-λ m(t)) dt` diverges, where `m(t) = E(S ∧ t)` is the
//! truncated mean of the service time; `k0` equals the almost-sure liminf of
//! `Y_t`.
//!
//! The crate provides:
//!
//! - [`service_laws`]: built-in service-time distributions with exact tails,
//!   inverse-CDF samplers, and truncated means;
//! - [`quadrature`]: adaptive integration with a divergence detector for
//!   semi-infinite tails;
//! - [`classifier`]: exact symbolic computation of `k0` from certified
//!   log-scale asymptotics, plus a numeric partial-integral diagnostic;
//! - [`simulator`]: exact event-driven simulation of the queue via its
//!   planar Poisson representation, occupation times, and growth checks;
//! - [`analysis`]: seeded Monte Carlo replication with
//!   simulation-vs-quadrature cross-validation and empirical liminf reports;
//! - [`stats`]: the special functions and test statistics the above need.

pub mod analysis;
pub mod classifier;
pub mod quadrature;
pub mod service_laws;
pub mod simulator;
pub mod stats;

pub use analysis::{liminf_estimate, run_experiment, LiminfReport, MonteCarloSummary};
pub use classifier::{
    classify_numeric, classify_symbolic, estimate_profile, ClassificationResult, CriticalState,
    Regime,
};
pub use quadrature::{integrate_finite, integrate_semi_infinite, DecayHint, IntegralEstimate};
pub use service_laws::{AsymptoticProfile, LawError, ServiceLaw};
pub use simulator::{
    chernoff_exponent, chernoff_poisson_bound, growth_check, occupation, simulate,
    simulate_with_initial, GrowthReport, OccupationRecord, QueueConfig, SimError, Trajectory,
};
