//! Equilibrium constructions and checks.
//!
//! Without diversity there is no Nash equilibrium: the base station's best
//! response to a jammed user raises that user's probability above the
//! others, which moves the adversary's best response to a different user.
//! [`best_response_dynamics`] exhibits the resulting cycle and
//! [`is_nash_no_diversity`] produces a profitable deviation for any
//! candidate pair. The uniform policy is the leader's optimum when the base
//! station commits first ([`stackelberg_equilibrium`]).
//!
//! With diversity, uniform user and sub-carrier distributions against a
//! uniformly split middle-window jammer form a Nash point
//! ([`diversity_nash_point`]); [`verify_diversity_nash`] checks it by
//! sampling deviations for both players.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotic::{diversity_plan_payoff, relaxed_plan_payoff};
use crate::best_response::{
    adversary_best_response, max_abs_diff, numeric_simplex_minimizer, single_block_response_for,
};
use crate::error::{Error, Result};
use crate::exact::expected_age_trajectory_diversity;
use crate::model::{
    ensure_feasible, make_middle_block, make_uniform_subcarrier_block, BlockingPlan,
    SchedulingPolicy, SubcarrierPolicy, SystemConfig,
};

/// Strict-improvement threshold for deviations.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    NashCheck,
    StackelbergPoint,
    NashPoint,
    BrDynamicsTrace,
}

impl ReportKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReportKind::NashCheck => "nash_check",
            ReportKind::StackelbergPoint => "stackelberg_point",
            ReportKind::NashPoint => "nash_point",
            ReportKind::BrDynamicsTrace => "br_dynamics_trace",
        }
    }
}

/// A unilateral deviation that strictly improves the deviating player's payoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "player", rename_all = "snake_case")]
pub enum Witness {
    BaseStation {
        policy: Vec<f64>,
        subcarrier_policy: Option<Vec<f64>>,
        payoff_before: f64,
        payoff_after: f64,
    },
    Adversary {
        description: String,
        target: Option<usize>,
        payoff_before: f64,
        payoff_after: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub policy: Vec<f64>,
    pub blocked_user: usize,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub kind: ReportKind,
    /// `None` when the question does not apply.
    pub holds: Option<bool>,
    pub payoff: Option<f64>,
    pub witness: Option<Witness>,
    pub trace: Vec<TraceEntry>,
    pub samples_checked: usize,
    pub note: Option<String>,
}

impl EquilibriumReport {
    fn new(kind: ReportKind) -> Self {
        Self {
            kind,
            holds: None,
            payoff: None,
            witness: None,
            trace: Vec::new(),
            samples_checked: 0,
            note: None,
        }
    }
}

fn improves_up(after: f64, before: f64) -> bool {
    after > before + IMPROVEMENT_TOL * before.abs().max(1.0)
}

fn improves_down(after: f64, before: f64) -> bool {
    after < before - IMPROVEMENT_TOL * before.abs().max(1.0)
}

/// Uniform random point of the open simplex.
fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n)
        .map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0).ln())
        .collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Checks whether `(policy, plan)` is a Nash pair of the no-diversity game
/// under the large-horizon payoff ([`relaxed_plan_payoff`]).
///
/// Adversary deviations: jamming any single user for the middle window.
/// Base-station deviations: the exact best response to `plan` plus
/// `deviation_budget` random policies. The largest adversary improvement is
/// reported first; otherwise the base station's.
pub fn is_nash_no_diversity(
    policy: &SchedulingPolicy,
    plan: &BlockingPlan,
    config: &SystemConfig,
    deviation_budget: usize,
) -> Result<EquilibriumReport> {
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
    ensure_feasible(plan, config)?;
    let current = relaxed_plan_payoff(policy, plan)?;
    let mut report = EquilibriumReport::new(ReportKind::NashCheck);
    report.payoff = Some(current);

    let mut best_adv: Option<(usize, f64)> = None;
    for target in 0..config.num_users() {
        let alt = relaxed_plan_payoff(policy, &make_middle_block(config, target)?)?;
        report.samples_checked += 1;
        if improves_up(alt, current) && best_adv.is_none_or(|(_, v)| alt > v) {
            best_adv = Some((target, alt));
        }
    }
    if let Some((target, alt)) = best_adv {
        report.holds = Some(false);
        report.witness = Some(Witness::Adversary {
            description: format!("jam user {target} for the middle {} slots", config.budget()),
            target: Some(target),
            payoff_before: current,
            payoff_after: alt,
        });
        return Ok(report);
    }

    let horizon = config.horizon() as f64;
    let weights: Vec<f64> = (0..config.num_users())
        .map(|i| 1.0 + plan.blocked_on(i) / horizon)
        .collect();
    let mut candidates = vec![numeric_simplex_minimizer(&weights)?];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..deviation_budget {
        candidates.push(SchedulingPolicy::new(random_simplex_point(
            &mut rng,
            config.num_users(),
        ))?);
    }
    let mut best_bs: Option<(SchedulingPolicy, f64)> = None;
    for candidate in candidates {
        let alt = relaxed_plan_payoff(&candidate, plan)?;
        report.samples_checked += 1;
        if improves_down(alt, current) && best_bs.as_ref().is_none_or(|(_, v)| alt < *v) {
            best_bs = Some((candidate, alt));
        }
    }
    match best_bs {
        Some((candidate, alt)) => {
            report.holds = Some(false);
            report.witness = Some(Witness::BaseStation {
                policy: candidate.probs().to_vec(),
                subcarrier_policy: None,
                payoff_before: current,
                payoff_after: alt,
            });
        }
        None => report.holds = Some(true),
    }
    Ok(report)
}

/// Alternates the adversary's structured best response and the base
/// station's single-block best response, starting from the uniform policy.
///
/// `holds` reports whether some iterate is a simultaneous fixed point of
/// both maps; `note` records the detected cycle.
pub fn best_response_dynamics(
    num_users: usize,
    alpha: f64,
    horizon: usize,
    max_iter: usize,
) -> Result<EquilibriumReport> {
    if max_iter < 2 {
        return Err(Error::InvalidArgument(
            "best-response dynamics needs at least two iterations".into(),
        ));
    }
    let config = SystemConfig::no_diversity(horizon, num_users, alpha)?;
    let mut report = EquilibriumReport::new(ReportKind::BrDynamicsTrace);
    let mut policy = SchedulingPolicy::uniform(num_users);
    let mut fixed_point = None;
    for iteration in 0..max_iter {
        let response = adversary_best_response(&policy, &config)?;
        let target = response
            .target
            .expect("structured response names its target");
        let reply = single_block_response_for(num_users, alpha, target)?;
        report.trace.push(TraceEntry {
            iteration,
            policy: policy.probs().to_vec(),
            blocked_user: target,
            payoff: response.payoff,
        });
        if fixed_point.is_none() && max_abs_diff(reply.probs(), policy.probs()) <= 1e-12 {
            fixed_point = Some(iteration);
        }
        policy = reply;
    }
    report.holds = Some(fixed_point.is_some());
    report.payoff = report.trace.last().map(|e| e.payoff);
    report.samples_checked = max_iter;
    let changes = report
        .trace
        .windows(2)
        .filter(|w| w[0].blocked_user != w[1].blocked_user)
        .count();
    report.note = Some(match (fixed_point, trace_cycle(&report.trace)) {
        (Some(k), _) => format!("fixed point at iteration {k}"),
        (None, Some(len)) => format!(
            "no fixed point; cycle of length {len}; target changed in {changes} of {} steps",
            max_iter - 1
        ),
        (None, None) => format!(
            "no fixed point; target changed in {changes} of {} steps",
            max_iter - 1
        ),
    });
    Ok(report)
}

/// Smallest period of the trace's tail, if it repeats at least once.
pub fn trace_cycle(trace: &[TraceEntry]) -> Option<usize> {
    let n = trace.len();
    (1..=n / 2).find(|&len| {
        (n - len..n).all(|k| {
            let a = &trace[k];
            let b = &trace[k - len];
            a.blocked_user == b.blocked_user && max_abs_diff(&a.policy, &b.policy) <= 1e-12
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Grid resolution on the simplex (used for `N ≤ 3`).
    pub grid_steps: usize,
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            grid_steps: 40,
            random_samples: 200,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackelbergOutcome {
    pub policy: SchedulingPolicy,
    pub plan: BlockingPlan,
    /// Leader payoff (reduced objective) with the follower best-responding.
    pub payoff: f64,
    pub certification: EquilibriumReport,
}

/// Follower-aware leader payoff: reduced objective at the adversary's best
/// response to `policy`.
pub fn leader_payoff(policy: &SchedulingPolicy, config: &SystemConfig) -> Result<f64> {
    Ok(adversary_best_response(policy, config)?.payoff)
}

/// Uniform leader policy, middle-window jam of user 0, and a sampled
/// certificate that no other policy lowers the leader's payoff.
pub fn stackelberg_equilibrium(config: &SystemConfig) -> Result<StackelbergOutcome> {
    stackelberg_equilibrium_with(config, &CertifyOptions::default())
}

pub fn stackelberg_equilibrium_with(
    config: &SystemConfig,
    opts: &CertifyOptions,
) -> Result<StackelbergOutcome> {
    if config.has_diversity() {
        return Err(Error::RequiresNoDiversity);
    }
    let n = config.num_users();
    let policy = SchedulingPolicy::uniform(n);
    let response = adversary_best_response(&policy, config)?;
    let payoff = response.payoff;

    let mut samples: Vec<Vec<f64>> = Vec::new();
    if n == 2 || n == 3 {
        let k = opts.grid_steps;
        for a in 1..k {
            if n == 2 {
                samples.push(vec![a as f64 / k as f64, (k - a) as f64 / k as f64]);
                continue;
            }
            for b in 1..k - a {
                let c = k - a - b;
                samples.push(vec![
                    a as f64 / k as f64,
                    b as f64 / k as f64,
                    c as f64 / k as f64,
                ]);
            }
        }
    }
    if n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.random_samples {
            let mut p = random_simplex_point(&mut rng, n);
            p.sort_by(|a, b| b.total_cmp(a));
            samples.push(p);
        }
    }

    let mut cert = EquilibriumReport::new(ReportKind::StackelbergPoint);
    cert.payoff = Some(payoff);
    let mut worst: Option<(Vec<f64>, f64)> = None;
    for raw in samples {
        let p = SchedulingPolicy::new(raw)?;
        let alt = leader_payoff(&p, config)?;
        cert.samples_checked += 1;
        if improves_down(alt, payoff) && worst.as_ref().is_none_or(|(_, v)| alt < *v) {
            worst = Some((p.probs().to_vec(), alt));
        }
    }
    cert.holds = Some(worst.is_none());
    cert.witness = worst.map(|(p, alt)| Witness::BaseStation {
        policy: p,
        subcarrier_policy: None,
        payoff_before: payoff,
        payoff_after: alt,
    });

    Ok(StackelbergOutcome {
        policy,
        plan: response.plan,
        payoff,
        certification: cert,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityPoint {
    pub policy: SchedulingPolicy,
    pub subpolicy: SubcarrierPolicy,
    pub plan: BlockingPlan,
}

/// Uniform users, uniform sub-carriers, uniformly split middle-window jam.
pub fn diversity_nash_point(config: &SystemConfig) -> Result<DiversityPoint> {
    if !config.has_diversity() {
        return Err(Error::NoDiversity);
    }
    Ok(DiversityPoint {
        policy: SchedulingPolicy::uniform(config.num_users()),
        subpolicy: SubcarrierPolicy::uniform(config.num_subcarriers()),
        plan: make_uniform_subcarrier_block(config)?,
    })
}

/// Adversary deviation families sampled by [`verify_diversity_nash`], in
/// rotation.
pub const ADVERSARY_FAMILIES: [&str; 6] = [
    "shifted window, uniform split",
    "middle window, single sub-carrier",
    "middle window, random split",
    "shifted window, random split",
    "two windows, uniform split",
    "shortened middle window, uniform split",
];

fn window_plan(start: usize, len: usize, split: &[f64], plan: &mut BlockingPlan) {
    for s in start..start + len {
        for (j, &w) in split.iter().enumerate() {
            plan.set(j, s, w);
        }
    }
}

fn sample_adversary_deviation(
    family: usize,
    config: &SystemConfig,
    rng: &mut ChaCha8Rng,
) -> (String, BlockingPlan) {
    let n_sub = config.num_subcarriers();
    let t = config.horizon();
    let b = config.budget();
    let uniform = vec![1.0 / n_sub as f64; n_sub];
    let middle = config.middle_window().start;
    let mut plan = BlockingPlan::empty(n_sub, t);
    let description = match family {
        0 => {
            let start = rng.gen_range(0..=t - b);
            window_plan(start, b, &uniform, &mut plan);
            format!("{}: slots {start}..{}", ADVERSARY_FAMILIES[0], start + b)
        }
        1 => {
            let j = rng.gen_range(0..n_sub);
            let mut split = vec![0.0; n_sub];
            split[j] = 1.0;
            window_plan(middle, b, &split, &mut plan);
            format!("{}: sub-carrier {j}", ADVERSARY_FAMILIES[1])
        }
        2 => {
            let split = random_simplex_point(rng, n_sub);
            window_plan(middle, b, &split, &mut plan);
            format!("{}: {split:?}", ADVERSARY_FAMILIES[2])
        }
        3 => {
            let start = rng.gen_range(0..=t - b);
            let split = random_simplex_point(rng, n_sub);
            window_plan(start, b, &split, &mut plan);
            format!(
                "{}: slots {start}..{}, {split:?}",
                ADVERSARY_FAMILIES[3],
                start + b
            )
        }
        4 => {
            let first = rng.gen_range(0..=b);
            let second = b - first;
            // place the first block, then the second somewhere after it
            let start1 = rng.gen_range(0..=t - b);
            let start2 = rng.gen_range(start1 + first..=t - second);
            window_plan(start1, first, &uniform, &mut plan);
            window_plan(start2, second, &uniform, &mut plan);
            format!(
                "{}: slots {start1}..{} and {start2}..{}",
                ADVERSARY_FAMILIES[4],
                start1 + first,
                start2 + second
            )
        }
        _ => {
            let len = if b == 0 { 0 } else { rng.gen_range(0..b) };
            let start = (t - len).div_ceil(2);
            window_plan(start, len, &uniform, &mut plan);
            format!("{}: {len} slots", ADVERSARY_FAMILIES[5])
        }
    };
    (description, plan)
}

/// Samples deviations for both players around `point`.
///
/// Base station: the uniform policy and `bs_samples` random or perturbed
/// `(p, q)` pairs, scored by [`diversity_plan_payoff`]. Adversary:
/// `adv_samples` plans drawn in rotation from [`ADVERSARY_FAMILIES`], scored
/// by the exact system age. Any strict improvement is attached as a witness.
pub fn verify_diversity_nash(
    point: &DiversityPoint,
    config: &SystemConfig,
    bs_samples: usize,
    adv_samples: usize,
    seed: u64,
) -> Result<EquilibriumReport> {
    if !config.has_diversity() {
        return Err(Error::NoDiversity);
    }
    ensure_feasible(&point.plan, config)?;
    let n = config.num_users();
    let n_sub = config.num_subcarriers();
    if point.policy.len() != n || point.subpolicy.len() != n_sub {
        return Err(Error::DimensionMismatch(
            "point does not match the configuration".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EquilibriumReport::new(ReportKind::NashPoint);
    report.note = Some(format!(
        "adversary deviations sampled from: {}",
        ADVERSARY_FAMILIES.join("; ")
    ));

    let bs_base = diversity_plan_payoff(&point.policy, &point.subpolicy, &point.plan)?;
    report.payoff = Some(bs_base);
    let mut bs_best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    for k in 0..=bs_samples {
        let (p, q) = if k == 0 {
            (vec![1.0 / n as f64; n], point.subpolicy.probs().to_vec())
        } else {
            match k % 4 {
                0 => (
                    random_simplex_point(&mut rng, n),
                    point.subpolicy.probs().to_vec(),
                ),
                1 => (
                    point.policy.probs().to_vec(),
                    random_simplex_point(&mut rng, n_sub),
                ),
                2 => (
                    random_simplex_point(&mut rng, n),
                    random_simplex_point(&mut rng, n_sub),
                ),
                _ => {
                    let eps = 10f64.powf(rng.gen_range(-6.0..-1.0));
                    let dir = random_simplex_point(&mut rng, n);
                    let p = point
                        .policy
                        .probs()
                        .iter()
                        .zip(&dir)
                        .map(|(a, d)| (1.0 - eps) * a + eps * d)
                        .collect();
                    (p, point.subpolicy.probs().to_vec())
                }
            }
        };
        let alt = diversity_plan_payoff(
            &SchedulingPolicy::new(p.clone())?,
            &SubcarrierPolicy::new(q.clone())?,
            &point.plan,
        )?;
        report.samples_checked += 1;
        if improves_down(alt, bs_base) && bs_best.as_ref().is_none_or(|(_, _, v)| alt < *v) {
            bs_best = Some((p, q, alt));
        }
    }
    if let Some((p, q, alt)) = bs_best {
        report.holds = Some(false);
        report.witness = Some(Witness::BaseStation {
            policy: p,
            subcarrier_policy: Some(q),
            payoff_before: bs_base,
            payoff_after: alt,
        });
        return Ok(report);
    }

    let adv_base =
        expected_age_trajectory_diversity(&point.policy, &point.subpolicy, &point.plan, config)?
            .system_avg;
    let mut adv_best: Option<(String, f64)> = None;
    for k in 0..adv_samples {
        let (description, plan) =
            sample_adversary_deviation(k % ADVERSARY_FAMILIES.len(), config, &mut rng);
        debug_assert!(ensure_feasible(&plan, config).is_ok());
        let alt =
            expected_age_trajectory_diversity(&point.policy, &point.subpolicy, &plan, config)?
                .system_avg;
        report.samples_checked += 1;
        if improves_up(alt, adv_base) && adv_best.as_ref().is_none_or(|(_, v)| alt > *v) {
            adv_best = Some((description, alt));
        }
    }
    match adv_best {
        Some((description, alt)) => {
            report.holds = Some(false);
            report.witness = Some(Witness::Adversary {
                description,
                target: None,
                payoff_before: adv_base,
                payoff_after: alt,
            });
        }
        None => report.holds = Some(true),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotic::diversity_system_age;
    use crate::best_response::bs_best_response_single_block;
    use crate::model::PlanMode;

    #[test]
    fn nash_check_uniform_against_block_finds_bs_witness() {
        let config = SystemConfig::no_diversity(100, 2, 0.5).unwrap();
        let plan = make_middle_block(&config, 0).unwrap();
        let report =
            is_nash_no_diversity(&SchedulingPolicy::uniform(2), &plan, &config, 50).unwrap();
        assert_eq!(report.holds, Some(false));
        match report.witness.unwrap() {
            Witness::BaseStation {
                policy,
                payoff_before,
                payoff_after,
                ..
            } => {
                let r = 1.5f64.sqrt();
                assert!(max_abs_diff(&policy, &[r / (1.0 + r), 1.0 / (1.0 + r)]) < 1e-12);
                assert!(payoff_after < payoff_before - IMPROVEMENT_TOL);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn nash_check_block_response_finds_adversary_witness() {
        let config = SystemConfig::no_diversity(100, 3, 0.5).unwrap();
        let p = bs_best_response_single_block(3, 0.5).unwrap();
        let plan = make_middle_block(&config, 0).unwrap();
        let report = is_nash_no_diversity(&p, &plan, &config, 0).unwrap();
        assert_eq!(report.holds, Some(false));
        match report.witness.unwrap() {
            Witness::Adversary { target, .. } => assert_eq!(target, Some(1)),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn nash_check_zero_budget_holds() {
        let config = SystemConfig::no_diversity(10, 3, 0.05).unwrap();
        assert_eq!(config.budget(), 0);
        let report = is_nash_no_diversity(
            &SchedulingPolicy::uniform(3),
            &BlockingPlan::empty(3, 10),
            &config,
            100,
        )
        .unwrap();
        assert_eq!(report.holds, Some(true));
        assert!(report.witness.is_none());
    }

    #[test]
    fn nash_check_always_breaks_with_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = rng.gen_range(2..6);
            let alpha = rng.gen_range(0.05..0.95);
            let config = SystemConfig::no_diversity(1000, n, alpha).unwrap();
            let p = SchedulingPolicy::new(random_simplex_point(&mut rng, n)).unwrap();
            let plan = adversary_best_response(&p, &config).unwrap().plan;
            let report = is_nash_no_diversity(&p, &plan, &config, 10).unwrap();
            assert_eq!(report.holds, Some(false));
            let ok = match report.witness.unwrap() {
                Witness::BaseStation {
                    payoff_before,
                    payoff_after,
                    ..
                } => payoff_after < payoff_before,
                Witness::Adversary {
                    payoff_before,
                    payoff_after,
                    ..
                } => payoff_after > payoff_before,
            };
            assert!(ok);
        }
    }

    #[test]
    fn dynamics_two_users_cycle() {
        let report = best_response_dynamics(2, 0.5, 1000, 6).unwrap();
        assert_eq!(report.holds, Some(false));
        let targets: Vec<usize> = report.trace.iter().map(|e| e.blocked_user).collect();
        assert_eq!(targets, vec![0, 1, 0, 1, 0, 1]);
        let r = 1.5f64.sqrt();
        assert!(max_abs_diff(&report.trace[1].policy, &[r / (1.0 + r), 1.0 / (1.0 + r)]) < 1e-12);
        assert_eq!(trace_cycle(&report.trace[1..]), Some(2));
    }

    #[test]
    fn dynamics_three_users_never_settle() {
        let report = best_response_dynamics(3, 0.3, 1000, 20).unwrap();
        assert_eq!(report.holds, Some(false));
        assert!(report
            .trace
            .windows(2)
            .all(|w| w[0].blocked_user != w[1].blocked_user));
        for e in &report.trace {
            let reply = single_block_response_for(3, 0.3, e.blocked_user).unwrap();
            assert!(max_abs_diff(reply.probs(), &e.policy) > 1e-6);
        }
    }

    #[test]
    fn dynamics_minimal_trace() {
        let report = best_response_dynamics(2, 0.5, 100, 2).unwrap();
        assert_eq!(report.trace.len(), 2);
        assert!(best_response_dynamics(2, 0.5, 100, 1).is_err());
    }

    #[test]
    fn dynamics_single_user_is_a_fixed_point() {
        let report = best_response_dynamics(1, 0.5, 100, 3).unwrap();
        assert_eq!(report.holds, Some(true));
    }

    #[test]
    fn stackelberg_examples() {
        let config = SystemConfig::no_diversity(100, 2, 0.5).unwrap();
        let out = stackelberg_equilibrium(&config).unwrap();
        assert_eq!(out.policy.probs(), &[0.5, 0.5]);
        assert!((out.payoff - 17.25).abs() < 1e-12);
        assert_eq!(out.plan, make_middle_block(&config, 0).unwrap());
        assert_eq!(out.certification.holds, Some(true));
        assert!(out.certification.samples_checked >= 200);

        let single = SystemConfig::no_diversity(20, 1, 0.5).unwrap();
        let out = stackelberg_equilibrium(&single).unwrap();
        assert_eq!(out.policy.probs(), &[1.0]);
        assert_eq!(
            out.plan.blocked_slots(0),
            vec![5, 6, 7, 8, 9, 10, 11, 12, 13, 14]
        );
    }

    #[test]
    fn stackelberg_payoff_is_sampled_minimum() {
        for n in 2..6 {
            let config = SystemConfig::no_diversity(500, n, 0.35).unwrap();
            let out = stackelberg_equilibrium(&config).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..200 {
                let p = SchedulingPolicy::new(random_simplex_point(&mut rng, n)).unwrap();
                assert!(leader_payoff(&p, &config).unwrap() >= out.payoff - 1e-9);
            }
        }
    }

    #[test]
    fn diversity_point_examples() {
        let config = SystemConfig::new(400, 2, 2, 0.5).unwrap();
        let point = diversity_nash_point(&config).unwrap();
        assert_eq!(point.policy.probs(), &[0.5, 0.5]);
        assert_eq!(point.subpolicy.probs(), &[0.5, 0.5]);
        assert_eq!(point.plan.mode(), PlanMode::Randomized);
        assert_eq!(point.plan.prob(0, 200), 0.5);
        assert!((diversity_system_age(&point.policy, 0.5, 2).unwrap() - 3.0).abs() < 1e-12);

        let tiny = SystemConfig::new(10, 2, 2, 0.05).unwrap();
        let point = diversity_nash_point(&tiny).unwrap();
        assert_eq!(point.plan.total_blocked(), 0.0);

        let flat = SystemConfig::new(10, 2, 1, 0.5).unwrap();
        assert_eq!(diversity_nash_point(&flat), Err(Error::NoDiversity));
    }

    #[test]
    fn verify_holds_at_uniform_point() {
        let config = SystemConfig::new(400, 2, 2, 0.4).unwrap();
        let point = diversity_nash_point(&config).unwrap();
        let report = verify_diversity_nash(&point, &config, 500, 500, 1).unwrap();
        assert_eq!(report.holds, Some(true), "{:?}", report.witness);
        assert_eq!(report.samples_checked, 501 + 500);
    }

    #[test]
    fn verify_rejects_skewed_policy() {
        let config = SystemConfig::new(400, 2, 2, 0.4).unwrap();
        let mut point = diversity_nash_point(&config).unwrap();
        point.policy = SchedulingPolicy::new(vec![0.7, 0.3]).unwrap();
        let report = verify_diversity_nash(&point, &config, 50, 50, 1).unwrap();
        assert_eq!(report.holds, Some(false));
        match report.witness.unwrap() {
            Witness::BaseStation {
                payoff_before,
                payoff_after,
                ..
            } => assert!(payoff_after < payoff_before),
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn q_deviations_are_never_witnesses() {
        let config = SystemConfig::new(200, 3, 4, 0.3).unwrap();
        let point = diversity_nash_point(&config).unwrap();
        let base = diversity_plan_payoff(&point.policy, &point.subpolicy, &point.plan).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let q = SubcarrierPolicy::new(random_simplex_point(&mut rng, 4)).unwrap();
            assert_eq!(
                diversity_plan_payoff(&point.policy, &q, &point.plan).unwrap(),
                base
            );
        }
    }

    #[test]
    fn adversary_samples_are_feasible() {
        let config = SystemConfig::new(50, 2, 3, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..120 {
            let (_, plan) =
                sample_adversary_deviation(k % ADVERSARY_FAMILIES.len(), &config, &mut rng);
            assert!(crate::model::blocking_feasible(&plan, &config).unwrap());
        }
    }
}
