//! Domain types shared by every solver: system configuration, the base
//! station's stationary policies, and the adversary's blocking plans.
//!
//! Slots are 0-indexed throughout the library. Slot `s` here is slot `s + 1`
//! in the usual 1-indexed presentation of the horizon `1..=T`.
//!
//! A blocking plan stores the probability that a channel is *blocked* in a
//! slot (1 = jammed). In the model without diversity there is one channel per
//! user; with diversity the rows are sub-carriers.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating that a probability vector sums to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Slack used when flooring `alpha * T`, so that e.g. `0.29 * 100` yields 29.
const BUDGET_FLOOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystemConfig", into = "RawSystemConfig")]
pub struct SystemConfig {
    horizon: usize,
    num_users: usize,
    num_subcarriers: usize,
    alpha: f64,
    budget: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystemConfig {
    horizon: usize,
    num_users: usize,
    #[serde(default = "one")]
    num_subcarriers: usize,
    alpha: f64,
}

fn one() -> usize {
    1
}

impl TryFrom<RawSystemConfig> for SystemConfig {
    type Error = Error;

    fn try_from(raw: RawSystemConfig) -> Result<Self> {
        SystemConfig::new(raw.horizon, raw.num_users, raw.num_subcarriers, raw.alpha)
    }
}

impl From<SystemConfig> for RawSystemConfig {
    fn from(c: SystemConfig) -> Self {
        RawSystemConfig {
            horizon: c.horizon,
            num_users: c.num_users,
            num_subcarriers: c.num_subcarriers,
            alpha: c.alpha,
        }
    }
}

impl SystemConfig {
    pub fn new(
        horizon: usize,
        num_users: usize,
        num_subcarriers: usize,
        alpha: f64,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        if num_users == 0 {
            return Err(Error::InvalidConfig("at least one user is required".into()));
        }
        if num_subcarriers == 0 {
            return Err(Error::InvalidConfig(
                "at least one sub-carrier is required".into(),
            ));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let budget = ((alpha * horizon as f64) + BUDGET_FLOOR_SLACK).floor() as usize;
        Ok(Self {
            horizon,
            num_users,
            num_subcarriers,
            alpha,
            budget: budget.min(horizon),
        })
    }

    /// Shorthand for the model without diversity (a single sub-carrier).
    pub fn no_diversity(horizon: usize, num_users: usize, alpha: f64) -> Result<Self> {
        Self::new(horizon, num_users, 1, alpha)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of slots the adversary may block, `floor(alpha * T)`.
    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Fraction of the horizon actually blockable, `B / T`.
    pub fn effective_alpha(&self) -> f64 {
        self.budget as f64 / self.horizon as f64
    }

    pub fn has_diversity(&self) -> bool {
        self.num_subcarriers > 1
    }

    /// Rows of a blocking plan: users without diversity, sub-carriers with it.
    pub fn channels(&self) -> usize {
        if self.has_diversity() {
            self.num_subcarriers
        } else {
            self.num_users
        }
    }

    /// Slots covered by a consecutive block of `B` slots centred in the
    /// horizon. Starts at `ceil((T - B) / 2)` (0-indexed).
    pub fn middle_window(&self) -> Range<usize> {
        let start = (self.horizon - self.budget).div_ceil(2);
        start..start + self.budget
    }
}

/// Stationary per-slot user scheduling distribution. Every entry is positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SchedulingPolicy {
    probs: Vec<f64>,
}

impl SchedulingPolicy {
    /// Validates `raw` and renormalizes it so it sums to one exactly (up to
    /// rounding). Entries must be positive and the sum within 1e-9 of one.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidArgument(
                "policy must have at least one entry".into(),
            ));
        }
        for (index, &value) in raw.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveEntry { index, value });
            }
        }
        let probs = normalize(raw)?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform policy needs at least one user");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the least-scheduled user, lowest index on ties.
    pub fn argmin(&self) -> usize {
        argmin(&self.probs)
    }
}

impl<'de> Deserialize<'de> for SchedulingPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        SchedulingPolicy::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Validates a raw scheduling vector. Alias of [`SchedulingPolicy::new`].
pub fn validate_policy(raw: Vec<f64>) -> Result<SchedulingPolicy> {
    SchedulingPolicy::new(raw)
}

/// Stationary sub-carrier selection distribution. Zero entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SubcarrierPolicy {
    probs: Vec<f64>,
}

impl SubcarrierPolicy {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidArgument(
                "sub-carrier policy must have at least one entry".into(),
            ));
        }
        for (index, &value) in raw.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let probs = normalize(raw)?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform policy needs at least one sub-carrier");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl<'de> Deserialize<'de> for SubcarrierPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        SubcarrierPolicy::new(raw).map_err(serde::de::Error::custom)
    }
}

fn normalize(mut raw: Vec<f64>) -> Result<Vec<f64>> {
    let sum: f64 = raw.iter().sum();
    if !((sum - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::NotNormalized { sum });
    }
    if sum != 1.0 {
        raw.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(raw)
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    /// Entries are 0 or 1.
    Deterministic,
    /// Entries are per-slot blocking probabilities drawn independently each slot.
    Randomized,
}

/// The adversary's schedule: `prob(j, s)` is the probability that channel
/// `j` is blocked in slot `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingPlan {
    mode: PlanMode,
    channels: usize,
    horizon: usize,
    /// Row-major, `channels x horizon`.
    block_prob: Vec<f64>,
}

impl BlockingPlan {
    /// A plan that never blocks anything.
    pub fn empty(channels: usize, horizon: usize) -> Self {
        Self {
            mode: PlanMode::Deterministic,
            channels,
            horizon,
            block_prob: vec![0.0; channels * horizon],
        }
    }

    /// Deterministic plan blocking each `(channel, slot)` pair listed.
    pub fn deterministic(
        channels: usize,
        horizon: usize,
        blocked: &[(usize, usize)],
    ) -> Result<Self> {
        let mut plan = Self::empty(channels, horizon);
        for &(j, s) in blocked {
            if j >= channels {
                return Err(Error::TargetOutOfRange {
                    target: j,
                    channels,
                });
            }
            if s >= horizon {
                return Err(Error::DimensionMismatch(format!(
                    "slot {s} beyond horizon {horizon}"
                )));
            }
            plan.block_prob[j * horizon + s] = 1.0;
        }
        Ok(plan)
    }

    /// Builds a plan from one row per channel. Deterministic plans must hold
    /// only 0/1 entries.
    pub fn from_rows(mode: PlanMode, rows: Vec<Vec<f64>>) -> Result<Self> {
        let channels = rows.len();
        if channels == 0 {
            return Err(Error::DimensionMismatch(
                "plan needs at least one row".into(),
            ));
        }
        let horizon = rows[0].len();
        let mut block_prob = Vec::with_capacity(channels * horizon);
        for (j, row) in rows.into_iter().enumerate() {
            if row.len() != horizon {
                return Err(Error::DimensionMismatch(format!(
                    "row {j} has {} slots, expected {horizon}",
                    row.len()
                )));
            }
            for (s, &v) in row.iter().enumerate() {
                let ok = match mode {
                    PlanMode::Deterministic => v == 0.0 || v == 1.0,
                    PlanMode::Randomized => (0.0..=1.0).contains(&v),
                };
                if !ok {
                    return Err(Error::InfeasiblePlan(format!(
                        "entry ({j}, {s}) = {v} is not valid for a {mode:?} plan"
                    )));
                }
            }
            block_prob.extend(row);
        }
        Ok(Self {
            mode,
            channels,
            horizon,
            block_prob,
        })
    }

    pub fn mode(&self) -> PlanMode {
        self.mode
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn prob(&self, channel: usize, slot: usize) -> f64 {
        self.block_prob[channel * self.horizon + slot]
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        &self.block_prob[channel * self.horizon..(channel + 1) * self.horizon]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.channels).map(|j| self.row(j).to_vec()).collect()
    }

    /// Probability that some channel is blocked in `slot`.
    pub fn slot_load(&self, slot: usize) -> f64 {
        (0..self.channels).map(|j| self.prob(j, slot)).sum()
    }

    /// Expected number of blocked (channel, slot) pairs.
    pub fn total_blocked(&self) -> f64 {
        self.block_prob.iter().sum()
    }

    /// Expected number of blocked slots on one channel.
    pub fn blocked_on(&self, channel: usize) -> f64 {
        self.row(channel).iter().sum()
    }

    /// Slots with a nonzero blocking probability on `channel`.
    pub fn blocked_slots(&self, channel: usize) -> Vec<usize> {
        self.row(channel)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(s, _)| s)
            .collect()
    }

    /// If every channel has the same blocking probability in `slot`, returns it.
    pub fn uniform_in_slot(&self, slot: usize) -> Option<f64> {
        let first = self.prob(0, slot);
        (1..self.channels)
            .all(|j| self.prob(j, slot) == first)
            .then_some(first)
    }

    pub(crate) fn set(&mut self, channel: usize, slot: usize, value: f64) {
        if value != 0.0 && value != 1.0 {
            self.mode = PlanMode::Randomized;
        }
        self.block_prob[channel * self.horizon + slot] = value;
    }

    pub(crate) fn check_dims(&self, channels: usize, horizon: usize) -> Result<()> {
        if self.channels != channels || self.horizon != horizon {
            return Err(Error::DimensionMismatch(format!(
                "plan is {}x{}, expected {channels}x{horizon}",
                self.channels, self.horizon
            )));
        }
        Ok(())
    }
}

/// Deterministic plan jamming `target` for the `B` consecutive slots of the
/// middle window. Empty when the budget is zero.
pub fn make_middle_block(config: &SystemConfig, target: usize) -> Result<BlockingPlan> {
    let channels = config.channels();
    if target >= channels {
        return Err(Error::TargetOutOfRange { target, channels });
    }
    let mut plan = BlockingPlan::empty(channels, config.horizon());
    for s in config.middle_window() {
        plan.set(target, s, 1.0);
    }
    Ok(plan)
}

/// Randomized plan jamming a uniformly chosen sub-carrier in every slot of
/// the middle window.
pub fn make_uniform_subcarrier_block(config: &SystemConfig) -> Result<BlockingPlan> {
    if !config.has_diversity() {
        return Err(Error::NoDiversity);
    }
    let n_sub = config.num_subcarriers();
    let mut plan = BlockingPlan::empty(n_sub, config.horizon());
    let share = 1.0 / n_sub as f64;
    for s in config.middle_window() {
        for j in 0..n_sub {
            plan.set(j, s, share);
        }
    }
    Ok(plan)
}

/// True iff the plan blocks at most `B` slots in expectation and at most one
/// channel per slot.
pub fn blocking_feasible(plan: &BlockingPlan, config: &SystemConfig) -> Result<bool> {
    plan.check_dims(config.channels(), config.horizon())?;
    if plan.total_blocked() > config.budget() as f64 + 1e-9 {
        return Ok(false);
    }
    Ok((0..plan.horizon()).all(|s| plan.slot_load(s) <= 1.0 + 1e-12))
}

pub(crate) fn ensure_feasible(plan: &BlockingPlan, config: &SystemConfig) -> Result<()> {
    if !blocking_feasible(plan, config)? {
        return Err(Error::InfeasiblePlan(format!(
            "expected {} blocked slots with budget {}, or a slot with more than one blocked channel",
            plan.total_blocked(),
            config.budget()
        )));
    }
    Ok(())
}

/// Per-user share of the jamming budget, `sum(alphas) = alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSplit {
    alphas: Vec<f64>,
}

impl BudgetSplit {
    pub fn new(alphas: Vec<f64>, alpha: f64) -> Result<Self> {
        for (index, &value) in alphas.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - alpha).abs() > 1e-12 {
            return Err(Error::InvalidSplit { sum, alpha });
        }
        Ok(Self { alphas })
    }

    /// The whole budget on one user.
    pub fn concentrated(n: usize, user: usize, alpha: f64) -> Self {
        let mut alphas = vec![0.0; n];
        alphas[user] = alpha;
        Self { alphas }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}
