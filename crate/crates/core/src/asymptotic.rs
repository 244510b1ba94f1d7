//! Large-horizon closed forms for the time-averaged age, used as the payoff
//! of both players.
//!
//! An unjammed user with scheduling probability `p` averages `1/p`. A user
//! whose channel is jammed for `alpha * T` consecutive slots in the middle
//! of the horizon averages
//!
//! ```text
//! (1 + α)(1 − p)/p + α(1 + αT)/2 + 1
//! ```
//!
//! These approximations need `T * p_i` large. [`regime_warning`] flags
//! inputs where `T * min_i p_i < 100`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::subcarrier_pass_probability;
use crate::model::{BlockingPlan, BudgetSplit, SchedulingPolicy, SubcarrierPolicy, SystemConfig};

/// Minimum `T * min_i p_i` for which the closed forms are trusted.
pub const REGIME_THRESHOLD: f64 = 100.0;

/// Payoff of the no-diversity game with strategy-independent constants
/// removed. Equal to `N` times [`system_age_no_diversity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedGamePayoff {
    pub value: f64,
    /// `Σ_{j≠b} 1/p_j`
    pub unblocked_terms: f64,
    /// `(1 + α)/p_b − α`
    pub blocked_term: f64,
    /// `α(1 + αT)/2`
    pub linear_term: f64,
    /// Set when `T * min_i p_i` is below [`REGIME_THRESHOLD`].
    pub regime_warning: bool,
}

/// True when the horizon is too short for the large-T formulas.
pub fn regime_warning(policy: &SchedulingPolicy, horizon: usize) -> bool {
    let min_p = policy.probs()[policy.argmin()];
    horizon as f64 * min_p < REGIME_THRESHOLD
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

fn check_index(policy: &SchedulingPolicy, index: usize) -> Result<()> {
    if index >= policy.len() {
        return Err(Error::IndexOutOfRange {
            index,
            len: policy.len(),
        });
    }
    Ok(())
}

pub fn unblocked_user_age(p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::NonPositiveProbability(p));
    }
    Ok(1.0 / p)
}

/// Time-averaged age of the user jammed for the middle `alpha * T` slots.
pub fn blocked_user_age(p: f64, alpha: f64, horizon: usize) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::NonPositiveProbability(p));
    }
    check_alpha(alpha)?;
    let t = horizon as f64;
    Ok((1.0 + alpha) * (1.0 - p) / p + alpha * (1.0 + alpha * t) / 2.0 + 1.0)
}

/// System average age when `blocked_user` is jammed in the middle window.
pub fn system_age_no_diversity(
    policy: &SchedulingPolicy,
    blocked_user: usize,
    alpha: f64,
    horizon: usize,
) -> Result<f64> {
    check_index(policy, blocked_user)?;
    let mut total = blocked_user_age(policy.probs()[blocked_user], alpha, horizon)?;
    for (j, &p) in policy.probs().iter().enumerate() {
        if j != blocked_user {
            total += unblocked_user_age(p)?;
        }
    }
    Ok(total / policy.len() as f64)
}

pub fn reduced_objective(
    policy: &SchedulingPolicy,
    blocked_user: usize,
    alpha: f64,
    horizon: usize,
) -> Result<ReducedGamePayoff> {
    check_index(policy, blocked_user)?;
    check_alpha(alpha)?;
    let probs = policy.probs();
    let unblocked_terms: f64 = probs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != blocked_user)
        .map(|(_, &p)| 1.0 / p)
        .sum();
    let blocked_term = (1.0 + alpha) / probs[blocked_user] - alpha;
    let linear_term = alpha * (1.0 + alpha * horizon as f64) / 2.0;
    Ok(ReducedGamePayoff {
        value: unblocked_terms + blocked_term + linear_term,
        unblocked_terms,
        blocked_term,
        linear_term,
        regime_warning: regime_warning(policy, horizon),
    })
}

/// Non-constant part of the relaxed payoff when user `i` is jammed for
/// `alpha_i * T` consecutive slots: `Σ α_i/p_i + Σ α_i² T/2`.
pub fn split_objective(
    policy: &SchedulingPolicy,
    split: &BudgetSplit,
    horizon: usize,
) -> Result<f64> {
    if split.alphas().len() != policy.len() {
        return Err(Error::DimensionMismatch(format!(
            "split has {} entries, policy has {}",
            split.alphas().len(),
            policy.len()
        )));
    }
    let t = horizon as f64;
    Ok(split
        .alphas()
        .iter()
        .zip(policy.probs())
        .map(|(&a, &p)| a / p + a * a * t / 2.0)
        .sum())
}

/// Relaxed reduced payoff of an arbitrary no-diversity plan: each user's
/// jammed slots are treated as one consecutive interior block, with
/// `α_i = (blocked slots of user i) / T`. For a single middle block of
/// length `αT` this equals [`reduced_objective`]; for an empty plan it is
/// `Σ 1/p_i`.
pub fn relaxed_plan_payoff(policy: &SchedulingPolicy, plan: &BlockingPlan) -> Result<f64> {
    if plan.channels() != policy.len() {
        return Err(Error::DimensionMismatch(format!(
            "plan has {} rows, policy has {} users",
            plan.channels(),
            policy.len()
        )));
    }
    let t = plan.horizon() as f64;
    Ok(policy
        .probs()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let a = plan.blocked_on(i) / t;
            (1.0 + a) / p - a + a * (1.0 + a * t) / 2.0
        })
        .sum())
}

/// System average age with diversity when a uniformly chosen sub-carrier is
/// jammed for the middle `alpha * T` slots. Independent of `q`.
pub fn diversity_system_age(
    policy: &SchedulingPolicy,
    alpha: f64,
    num_subcarriers: usize,
) -> Result<f64> {
    if num_subcarriers < 2 {
        return Err(Error::NoDiversity);
    }
    check_alpha(alpha)?;
    let hit = 1.0 - 1.0 / num_subcarriers as f64;
    let total: f64 = policy
        .probs()
        .iter()
        .map(|&p| (1.0 - alpha) / p + alpha / (p * hit))
        .sum();
    Ok(total / policy.len() as f64)
}

/// Large-horizon system age with diversity for an arbitrary plan, treating
/// every slot as locally stationary: user `i` averages `1 / (p_i g(t))`
/// where `g(t)` is the probability that the chosen sub-carrier is clear.
/// Returns infinity if some slot has `g(t) = 0`. Coincides with
/// [`diversity_system_age`] (at `α = B/T`) for the uniform middle block.
pub fn diversity_plan_payoff(
    policy: &SchedulingPolicy,
    subpolicy: &SubcarrierPolicy,
    plan: &BlockingPlan,
) -> Result<f64> {
    if plan.channels() != subpolicy.len() {
        return Err(Error::DimensionMismatch(format!(
            "plan has {} rows, sub-carrier policy has {} entries",
            plan.channels(),
            subpolicy.len()
        )));
    }
    let horizon = plan.horizon();
    let inv_pass: f64 = (0..horizon)
        .map(|s| 1.0 / subcarrier_pass_probability(subpolicy, plan, s))
        .sum::<f64>()
        / horizon as f64;
    let inv_p: f64 = policy.probs().iter().map(|&p| 1.0 / p).sum();
    Ok(inv_pass * inv_p / policy.len() as f64)
}

/// Convenience: payoff at the config's alpha, flagging the asymptotic regime.
pub fn reduced_objective_for(
    policy: &SchedulingPolicy,
    blocked_user: usize,
    config: &SystemConfig,
) -> Result<ReducedGamePayoff> {
    reduced_objective(policy, blocked_user, config.alpha(), config.horizon())
}
