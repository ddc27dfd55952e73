//! CDO tranche pricing under a compound Poisson portfolio loss model.
//!
//! The library prices the default and premium legs of CDO tranches two
//! independent ways:
//!
//! * an exact analytic engine built on a series expansion of the
//!   first-passage transform of the default process ([`pricer`]), and
//! * an importance-sampled Monte Carlo engine that simulates under an
//!   altered measure and reweights paths by the likelihood ratio ([`mc`]).
//!
//! Closed-form diagnostics for the reweighted estimator — its exact
//! variance, and the jump-size boundary beyond which that variance is
//! infinite — live in [`reweight`]; parameter sweeps, gain maps and the
//! CPU-cost model in [`sweep`].

pub mod cli;
pub mod config;
pub mod error;
pub mod mc;
pub mod model;
pub mod pricer;
pub mod quad;
pub mod reweight;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{
    fair_spread, log_level, loss_from_default, standard_tranches, Contract, LossSpec, ModelParams,
    Tranche, BP,
};
pub use pricer::{def_pv, phi, phi0, prem_pv_1bp, QuadControl, SeriesControl};
pub use reweight::{
    expected_def, gamma_slice, joint_density, phase_boundary, rn_weight, variance_report,
    weighted_second_moment, MeasurePair, PhaseBoundary, VarianceReport,
};
pub use stats::WeightedStats;
