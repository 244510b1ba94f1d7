//! Best responses for both players.
//!
//! Against a fixed plan the base station minimizes `Σ w_i / p_i` over the
//! simplex, where `w_i = 1 + α_i` grows with the share of the horizon user
//! `i` is jammed. The minimizer is `p_i ∝ √w_i`. Against a fixed policy the
//! large-horizon adversary jams the least-scheduled user for one consecutive
//! block in the middle of the horizon. The exhaustive oracle certifies that
//! choice on small instances under the exact age.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::reduced_objective_for;
use crate::error::{Error, Result};
use crate::exact::expected_age_trajectory;
use crate::model::{make_middle_block, BlockingPlan, SchedulingPolicy, SystemConfig};
use crate::simplex::{
    project_ordered_simplex, project_simplex, projected_descent, weighted_inverse_gradient,
    weighted_inverse_sum, DescentOptions, DescentOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseMethod {
    Structured,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryResponse {
    pub plan: BlockingPlan,
    /// Jammed user for structured responses.
    pub target: Option<usize>,
    /// Reduced payoff for [`ResponseMethod::Structured`], exact system
    /// average age for [`ResponseMethod::Exhaustive`].
    pub payoff: f64,
    pub method: ResponseMethod,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Base station's best response when user 0 is jammed for `alpha * T`
/// middle slots: `√(1+α) / (N−1+√(1+α))` for user 0, `1 / (N−1+√(1+α))`
/// for everyone else.
pub fn bs_best_response_single_block(num_users: usize, alpha: f64) -> Result<SchedulingPolicy> {
    single_block_response_for(num_users, alpha, 0)
}

/// As [`bs_best_response_single_block`] with the jammed user at `target`.
pub fn single_block_response_for(
    num_users: usize,
    alpha: f64,
    target: usize,
) -> Result<SchedulingPolicy> {
    if num_users == 0 {
        return Err(Error::InvalidArgument(
            "at least one user is required".into(),
        ));
    }
    check_alpha(alpha)?;
    if target >= num_users {
        return Err(Error::IndexOutOfRange {
            index: target,
            len: num_users,
        });
    }
    let root = (1.0 + alpha).sqrt();
    let denom = num_users as f64 - 1.0 + root;
    let probs = (0..num_users)
        .map(|i| {
            if i == target {
                root / denom
            } else {
                1.0 / denom
            }
        })
        .collect();
    SchedulingPolicy::new(probs)
}

/// `argmin_p Σ w_i / p_i` on the simplex in closed form, `p_i = √w_i / Σ √w_j`.
pub fn closed_form_simplex_minimizer(weights: &[f64]) -> Result<Vec<f64>> {
    check_weights(weights)?;
    let roots: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let total: f64 = roots.iter().sum();
    Ok(roots.into_iter().map(|r| r / total).collect())
}

/// The same minimizer found by projected descent from the uniform point.
pub fn descent_simplex_minimizer(weights: &[f64], opts: &DescentOptions) -> Result<DescentOutcome> {
    check_weights(weights)?;
    let start = vec![1.0 / weights.len() as f64; weights.len()];
    projected_descent(
        |x| weighted_inverse_sum(weights, x),
        |x| weighted_inverse_gradient(weights, x),
        project_simplex,
        &start,
        opts,
    )
}

/// Minimizes `Σ w_i / p_i` on the simplex. Returns the closed form after
/// checking it against projected descent; a disagreement above 1e-8 is
/// reported as [`Error::ConvergenceFailure`].
pub fn numeric_simplex_minimizer(weights: &[f64]) -> Result<SchedulingPolicy> {
    let closed = closed_form_simplex_minimizer(weights)?;
    let descent = descent_simplex_minimizer(weights, &DescentOptions::default())?;
    let gap = max_abs_diff(&closed, &descent.point);
    if gap > 1e-8 {
        return Err(Error::ConvergenceFailure {
            residual: gap,
            iterations: descent.iterations,
        });
    }
    SchedulingPolicy::new(closed)
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("weights must be non-empty".into()));
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    Ok(())
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Large-horizon adversary response: jam the least-scheduled user (lowest
/// index on ties) for the middle `B` slots.
pub fn adversary_best_response(
    policy: &SchedulingPolicy,
    config: &SystemConfig,
) -> Result<AdversaryResponse> {
    if config.has_diversity() {
        return Err(Error::RequiresNoDiversity);
    }
    if policy.len() != config.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "policy has {} entries, expected {}",
            policy.len(),
            config.num_users()
        )));
    }
    let target = policy.argmin();
    let plan = make_middle_block(config, target)?;
    let payoff = reduced_objective_for(policy, target, config)?.value;
    Ok(AdversaryResponse {
        plan,
        target: Some(target),
        payoff,
        method: ResponseMethod::Structured,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Refuse instances with more than this many leaves, `(N+1)^T`.
    pub max_leaves: u64,
    /// Maximizing plans kept in the report (all are counted).
    pub max_reported: usize,
    /// Relative tolerance under which two payoffs are considered tied.
    pub tie_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            max_leaves: 100_000_000,
            max_reported: 256,
            tie_tol: 1e-12,
        }
    }
}

/// Exhaustive search result together with the structured response's exact
/// payoff for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Lexicographically smallest maximizing plan.
    pub best: AdversaryResponse,
    /// Number of plans attaining the maximum (within the tie tolerance).
    pub maximizer_count: u64,
    /// Up to `max_reported` maximizers in lexicographic order.
    pub maximizers: Vec<BlockingPlan>,
    pub leaves: u64,
    /// Exact system age under [`adversary_best_response`]'s plan.
    pub structured_exact_payoff: f64,
    /// `best.payoff − structured_exact_payoff`, never negative.
    pub gap: f64,
}

struct Branch {
    max: f64,
    // choice sequences within tolerance of `max`, lexicographic order
    candidates: Vec<Vec<u8>>,
    count: u64,
    leaves: u64,
}

struct Search<'a> {
    probs: &'a [f64],
    horizon: usize,
    budget: usize,
    opts: OracleOptions,
}

impl Search<'_> {
    fn ties(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.opts.tie_tol * a.abs().max(b.abs()).max(1.0)
    }

    fn offer(&self, branch: &mut Branch, value: f64, choices: &[u8]) {
        branch.leaves += 1;
        if value > branch.max && !self.ties(value, branch.max) {
            branch.max = value;
            branch.candidates.clear();
            branch.count = 0;
        } else if !self.ties(value, branch.max) {
            return;
        } else if value > branch.max {
            branch.max = value;
        }
        branch.count += 1;
        if branch.candidates.len() < self.opts.max_reported {
            branch.candidates.push(choices.to_vec());
        }
    }

    /// `ages` holds every user's expected age in slot `slot`; `acc` sums the
    /// ages of earlier slots.
    fn descend(
        &self,
        slot: usize,
        ages: &[f64],
        acc: f64,
        used: usize,
        choices: &mut Vec<u8>,
        branch: &mut Branch,
    ) {
        let acc = acc + ages.iter().sum::<f64>();
        if slot + 1 == self.horizon {
            // The final slot's choice cannot affect any age in the horizon.
            let value = acc / (self.horizon * self.probs.len()) as f64;
            let n_choices = if used < self.budget {
                self.probs.len() + 1
            } else {
                1
            };
            for c in 0..n_choices {
                choices.push(c as u8);
                self.offer(branch, value, choices);
                choices.pop();
            }
            return;
        }
        let max_choice = if used < self.budget {
            self.probs.len()
        } else {
            0
        };
        let mut next = vec![0.0; ages.len()];
        for c in 0..=max_choice {
            for (i, (n, (&a, &p))) in next.iter_mut().zip(ages.iter().zip(self.probs)).enumerate() {
                *n = if c == i + 1 {
                    a + 1.0
                } else {
                    a * (1.0 - p) + 1.0
                };
            }
            choices.push(c as u8);
            self.descend(
                slot + 1,
                &next,
                acc,
                used + usize::from(c > 0),
                choices,
                branch,
            );
            choices.pop();
        }
    }
}

fn plan_from_choices(choices: &[u8], channels: usize) -> BlockingPlan {
    let blocked: Vec<(usize, usize)> = choices
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| (c as usize - 1, s))
        .collect();
    BlockingPlan::deterministic(channels, choices.len(), &blocked).expect("choices are in range")
}

/// Enumerates every feasible deterministic plan (per slot: idle or jam one
/// user, at most `B` jammed slots) and maximizes the exact system average age.
pub fn adversary_oracle(policy: &SchedulingPolicy, config: &SystemConfig) -> Result<OracleReport> {
    adversary_oracle_with(policy, config, &OracleOptions::default())
}

pub fn adversary_oracle_with(
    policy: &SchedulingPolicy,
    config: &SystemConfig,
    opts: &OracleOptions,
) -> Result<OracleReport> {
    if config.has_diversity() {
        return Err(Error::RequiresNoDiversity);
    }
    let n = config.num_users();
    if policy.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "policy has {} entries, expected {n}",
            policy.len()
        )));
    }
    if n >= u8::MAX as usize {
        return Err(Error::InstanceTooLarge(format!("{n} users")));
    }
    let leaves_bound = (n as u64 + 1)
        .checked_pow(config.horizon() as u32)
        .filter(|&l| l <= opts.max_leaves);
    if leaves_bound.is_none() {
        return Err(Error::InstanceTooLarge(format!(
            "({} + 1)^{} plans exceed the limit of {}",
            n,
            config.horizon(),
            opts.max_leaves
        )));
    }

    let search = Search {
        probs: policy.probs(),
        horizon: config.horizon(),
        budget: config.budget(),
        opts: *opts,
    };
    let first_ages = vec![1.0; n];
    let first_choices: Vec<usize> = if config.horizon() > 1 && config.budget() > 0 {
        (0..=n).collect()
    } else {
        vec![0]
    };

    // Partition by the first slot's choice; merge in lexicographic order.
    let branches: Vec<Branch> = first_choices
        .par_iter()
        .map(|&c| {
            let mut branch = Branch {
                max: f64::NEG_INFINITY,
                candidates: Vec::new(),
                count: 0,
                leaves: 0,
            };
            if config.horizon() == 1 {
                let mut choices = Vec::new();
                search.descend(0, &first_ages, 0.0, 0, &mut choices, &mut branch);
                return branch;
            }
            let acc: f64 = first_ages.iter().sum();
            let next: Vec<f64> = first_ages
                .iter()
                .zip(search.probs)
                .enumerate()
                .map(|(i, (&a, &p))| {
                    if c == i + 1 {
                        a + 1.0
                    } else {
                        a * (1.0 - p) + 1.0
                    }
                })
                .collect();
            let mut choices = vec![c as u8];
            search.descend(1, &next, acc, usize::from(c > 0), &mut choices, &mut branch);
            branch
        })
        .collect();

    let global_max = branches
        .iter()
        .map(|b| b.max)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut maximizers = Vec::new();
    let mut count = 0;
    let mut leaves = 0;
    for b in &branches {
        leaves += b.leaves;
        if search.ties(b.max, global_max) {
            count += b.count;
            for c in &b.candidates {
                if maximizers.len() < opts.max_reported {
                    maximizers.push(plan_from_choices(c, n));
                }
            }
        }
    }
    let best_plan = maximizers[0].clone();
    let payoff = expected_age_trajectory(policy, &best_plan, config)?.system_avg;

    let structured = adversary_best_response(policy, config)?;
    let structured_exact_payoff =
        expected_age_trajectory(policy, &structured.plan, config)?.system_avg;

    Ok(OracleReport {
        best: AdversaryResponse {
            plan: best_plan,
            target: None,
            payoff,
            method: ResponseMethod::Exhaustive,
        },
        maximizer_count: count,
        maximizers,
        leaves,
        structured_exact_payoff,
        gap: (payoff - structured_exact_payoff).max(0.0),
    })
}

/// Leader policy of the no-diversity Stackelberg game: uniform.
pub fn stackelberg_bs_policy(num_users: usize) -> Result<SchedulingPolicy> {
    if num_users == 0 {
        return Err(Error::InvalidArgument(
            "at least one user is required".into(),
        ));
    }
    Ok(SchedulingPolicy::uniform(num_users))
}

/// Minimizes `Σ_{i<N} 1/p_i + (1+α)/p_N` over the ordered simplex
/// `p_1 ≥ … ≥ p_N`, `Σ p_i = 1`, by projected descent with an isotonic
/// projection. The optimum is the uniform policy.
pub fn ordered_kkt_solver(num_users: usize, alpha: f64) -> Result<SchedulingPolicy> {
    ordered_kkt_solver_with(num_users, alpha, &DescentOptions::default()).map(|(p, _)| p)
}

pub fn ordered_kkt_solver_with(
    num_users: usize,
    alpha: f64,
    opts: &DescentOptions,
) -> Result<(SchedulingPolicy, DescentOutcome)> {
    if num_users < 2 {
        return Err(Error::InvalidArgument(
            "ordered solver needs at least two users".into(),
        ));
    }
    check_alpha(alpha)?;
    let mut weights = vec![1.0; num_users];
    weights[num_users - 1] = 1.0 + alpha;
    // strictly decreasing feasible start
    let n = num_users as f64;
    let total: f64 = (0..num_users).map(|i| 2.0 * n - i as f64).sum();
    let start: Vec<f64> = (0..num_users)
        .map(|i| (2.0 * n - i as f64) / total)
        .collect();
    let outcome = projected_descent(
        |x| weighted_inverse_sum(&weights, x),
        |x| weighted_inverse_gradient(&weights, x),
        project_ordered_simplex,
        &start,
        opts,
    )?;
    let policy = SchedulingPolicy::new(outcome.point.clone())?;
    Ok((policy, outcome))
}
