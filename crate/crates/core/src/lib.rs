//! Analysis toolkit for age-of-information scheduling against a jamming
//! adversary with a limited budget.
//!
//! The base station schedules one of `N` users per slot from a stationary
//! distribution `p` (and, with diversity, picks one of `N_sub` sub-carriers
//! from `q`). The adversary may jam up to `floor(alpha * T)` slots of a
//! horizon of `T` slots, one channel per slot.
//!
//! - [`model`]: configurations, policies and blocking plans.
//! - [`exact`]: finite-horizon expected-age recursions.
//! - [`asymptotic`]: large-horizon closed forms used as game payoffs.
//! - [`montecarlo`]: seeded slot-level simulation.
//! - [`simplex`]: projections and projected descent used by the solvers.
//! - [`best_response`]: both players' best responses and an exhaustive oracle.
//! - [`equilibrium`]: Nash and Stackelberg constructions and checks.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotic;
pub mod best_response;
pub mod equilibrium;
pub mod error;
pub mod exact;
pub mod model;
pub mod montecarlo;
pub mod simplex;

pub use error::{Error, Result};
pub use exact::AgeSeries;
pub use model::{
    BlockingPlan, BudgetSplit, PlanMode, SchedulingPolicy, SubcarrierPolicy, SystemConfig,
};
