//! Exact expected-age trajectories at finite horizon.
//!
//! With per-slot delivery probability `s_i(t)`, the expected age obeys
//!
//! ```text
//! Δ_i(1) = 1,    Δ_i(t+1) = Δ_i(t) · (1 − s_i(t)) + 1
//! ```
//!
//! which unrolls to `Δ_i(t+1) = Σ_{ℓ≤t} Π_{j=ℓ..t} (1 − s_i(j)) + 1`. The
//! recursion is O(N·T); [`survival_product`] exposes the product form.
//!
//! Without diversity `s_i(t) = p_i (1 − r_i(t))`, where `r_i(t)` is the
//! blocking probability of user `i`'s channel. With diversity the update is
//! lost when the chosen sub-carrier is jammed, so
//! `s_i(t) = p_i Σ_j q_j (1 − r_j(t))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ensure_feasible, BlockingPlan, SchedulingPolicy, SubcarrierPolicy, SystemConfig,
};

/// Expected age per user and slot, with time and user averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeSeries {
    /// `per_user[i][s]` is the expected age of user `i` in slot `s` (0-indexed).
    pub per_user: Vec<Vec<f64>>,
    pub per_user_avg: Vec<f64>,
    pub system_avg: f64,
}

impl AgeSeries {
    pub(crate) fn from_trajectories(per_user: Vec<Vec<f64>>) -> Self {
        let per_user_avg: Vec<f64> = per_user
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect();
        let system_avg = per_user_avg.iter().sum::<f64>() / per_user_avg.len() as f64;
        Self {
            per_user,
            per_user_avg,
            system_avg,
        }
    }

    pub fn num_users(&self) -> usize {
        self.per_user.len()
    }

    pub fn horizon(&self) -> usize {
        self.per_user.first().map_or(0, Vec::len)
    }
}

/// Product of per-slot survival factors `(1 − p)` over slots `start..=end`
/// (0-indexed), where blocked slots contribute a factor of one.
pub fn survival_product(p: f64, blocked: &[bool], start: usize, end: usize) -> Result<f64> {
    if start > end {
        return Err(Error::InvalidRange { start, end });
    }
    if end >= blocked.len() {
        return Err(Error::DimensionMismatch(format!(
            "slot {end} beyond {} recorded slots",
            blocked.len()
        )));
    }
    Ok(blocked[start..=end]
        .iter()
        .map(|&b| if b { 1.0 } else { 1.0 - p })
        .product())
}

/// Runs the age recursion for one user given its per-slot delivery
/// probabilities. The last slot's delivery probability is unused.
pub fn age_recursion(delivery: &[f64]) -> Vec<f64> {
    let mut ages = Vec::with_capacity(delivery.len());
    let mut age = 1.0;
    for (s, &d) in delivery.iter().enumerate() {
        ages.push(age);
        if s + 1 < delivery.len() {
            age = age * (1.0 - d) + 1.0;
        }
    }
    ages
}

/// Expected age trajectory without diversity. Randomized plans are treated
/// as per-slot blocking probabilities.
pub fn expected_age_trajectory(
    policy: &SchedulingPolicy,
    plan: &BlockingPlan,
    config: &SystemConfig,
) -> Result<AgeSeries> {
    check_policy(policy, config)?;
    plan.check_dims(config.num_users(), config.horizon())?;
    ensure_feasible(plan, config)?;
    let per_user = policy
        .probs()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let delivery: Vec<f64> = plan.row(i).iter().map(|&r| p * (1.0 - r)).collect();
            age_recursion(&delivery)
        })
        .collect();
    Ok(AgeSeries::from_trajectories(per_user))
}

/// Probability that an update sent on a sub-carrier drawn from `q` survives
/// slot `slot`. When every sub-carrier has the same blocking probability `r`
/// the result is exactly `1 − r`, independent of `q`.
pub fn subcarrier_pass_probability(q: &SubcarrierPolicy, plan: &BlockingPlan, slot: usize) -> f64 {
    match plan.uniform_in_slot(slot) {
        Some(r) => 1.0 - r,
        None => q
            .probs()
            .iter()
            .enumerate()
            .map(|(j, &qj)| qj * (1.0 - plan.prob(j, slot)))
            .sum(),
    }
}

/// Expected age trajectory with sub-carrier diversity.
pub fn expected_age_trajectory_diversity(
    policy: &SchedulingPolicy,
    subpolicy: &SubcarrierPolicy,
    plan: &BlockingPlan,
    config: &SystemConfig,
) -> Result<AgeSeries> {
    check_policy(policy, config)?;
    if subpolicy.len() != config.num_subcarriers() {
        return Err(Error::DimensionMismatch(format!(
            "sub-carrier policy has {} entries, expected {}",
            subpolicy.len(),
            config.num_subcarriers()
        )));
    }
    plan.check_dims(config.num_subcarriers(), config.horizon())?;
    ensure_feasible(plan, config)?;
    let pass: Vec<f64> = (0..config.horizon())
        .map(|s| subcarrier_pass_probability(subpolicy, plan, s))
        .collect();
    let per_user = policy
        .probs()
        .iter()
        .map(|&p| {
            let delivery: Vec<f64> = pass.iter().map(|&g| p * g).collect();
            age_recursion(&delivery)
        })
        .collect();
    Ok(AgeSeries::from_trajectories(per_user))
}

fn check_policy(policy: &SchedulingPolicy, config: &SystemConfig) -> Result<()> {
    if policy.len() != config.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "policy has {} entries, expected {}",
            policy.len(),
            config.num_users()
        )));
    }
    Ok(())
}
