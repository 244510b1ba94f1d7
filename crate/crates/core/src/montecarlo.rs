//! Seeded slot-level simulation of the jammed scheduling system.
//!
//! Each run draws the scheduled user (and sub-carrier) from the base
//! station's stream and, for randomized plans, the jammed channel from an
//! independent adversary stream. A transmission in slot `s` that is not
//! jammed resets the receiver's age to 1 in slot `s + 1`; every other age
//! grows by one. All ages start at 1, matching the expected-age recursion.
//!
//! Run `k` of a batch uses seed `derive_seed(master_seed, k)`, so runs can
//! execute in any order. Per-run results are reduced in run order with
//! compensated summation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ensure_feasible, BlockingPlan, PlanMode, SchedulingPolicy, SubcarrierPolicy, SystemConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_system_age: f64,
    pub per_user_mean: Vec<f64>,
    /// Standard error of `mean_system_age` across runs.
    pub std_error: f64,
    pub runs: usize,
    pub seed: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `master + (index + 1) * γ`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Scenario<'a> {
    user_cdf: Vec<f64>,
    subcarrier_cdf: Option<Vec<f64>>,
    plan: &'a BlockingPlan,
    horizon: usize,
}

impl<'a> Scenario<'a> {
    fn new(
        policy: &SchedulingPolicy,
        subpolicy: Option<&SubcarrierPolicy>,
        plan: &'a BlockingPlan,
        config: &SystemConfig,
    ) -> Result<Self> {
        if policy.len() != config.num_users() {
            return Err(Error::DimensionMismatch(format!(
                "policy has {} entries, expected {}",
                policy.len(),
                config.num_users()
            )));
        }
        let subcarrier_cdf = match (config.has_diversity(), subpolicy) {
            (true, Some(q)) if q.len() == config.num_subcarriers() => Some(cdf(q.probs())),
            (true, Some(q)) => {
                return Err(Error::DimensionMismatch(format!(
                    "sub-carrier policy has {} entries, expected {}",
                    q.len(),
                    config.num_subcarriers()
                )))
            }
            (true, None) => {
                return Err(Error::InvalidArgument(
                    "diversity model needs a sub-carrier policy".into(),
                ))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidArgument(
                    "sub-carrier policy given for a single-carrier model".into(),
                ))
            }
            (false, None) => None,
        };
        ensure_feasible(plan, config)?;
        Ok(Self {
            user_cdf: cdf(policy.probs()),
            subcarrier_cdf,
            plan,
            horizon: config.horizon(),
        })
    }

    fn jammed_channel(&self, slot: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        match self.plan.mode() {
            PlanMode::Deterministic => {
                (0..self.plan.channels()).find(|&j| self.plan.prob(j, slot) == 1.0)
            }
            PlanMode::Randomized => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for j in 0..self.plan.channels() {
                    acc += self.plan.prob(j, slot);
                    if u < acc {
                        return Some(j);
                    }
                }
                None
            }
        }
    }

    /// Calls `visit(slot, ages)` for every slot of one run.
    fn run(&self, seed: u64, mut visit: impl FnMut(usize, &[u32])) {
        let mut bs_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
        let mut adv_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
        let mut ages = vec![1u32; self.user_cdf.len()];
        for s in 0..self.horizon {
            visit(s, &ages);
            if s + 1 == self.horizon {
                break;
            }
            let user = sample(&self.user_cdf, bs_rng.gen());
            let channel = match &self.subcarrier_cdf {
                Some(c) => sample(c, bs_rng.gen()),
                None => user,
            };
            let jammed = self.jammed_channel(s, &mut adv_rng);
            ages.iter_mut().for_each(|a| *a += 1);
            if jammed != Some(channel) {
                ages[user] = 1;
            }
        }
    }
}

fn cdf(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = probs
        .iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

fn sample(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

/// One realization: `ages[i][s]` is user `i`'s age in slot `s`.
pub fn simulate_run(
    policy: &SchedulingPolicy,
    subpolicy: Option<&SubcarrierPolicy>,
    plan: &BlockingPlan,
    config: &SystemConfig,
    seed: u64,
) -> Result<Vec<Vec<u32>>> {
    let scenario = Scenario::new(policy, subpolicy, plan, config)?;
    let mut ages = vec![Vec::with_capacity(config.horizon()); config.num_users()];
    scenario.run(seed, |_, slot_ages| {
        for (row, &a) in ages.iter_mut().zip(slot_ages) {
            row.push(a);
        }
    });
    Ok(ages)
}

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Mean time-averaged age over `runs` independent realizations.
pub fn estimate_average_age(
    policy: &SchedulingPolicy,
    subpolicy: Option<&SubcarrierPolicy>,
    plan: &BlockingPlan,
    config: &SystemConfig,
    runs: usize,
    master_seed: u64,
) -> Result<SimResult> {
    if runs < 2 {
        return Err(Error::InsufficientRuns { min: 2, got: runs });
    }
    let scenario = Scenario::new(policy, subpolicy, plan, config)?;
    let n = config.num_users();
    let horizon = config.horizon() as f64;

    let per_run: Vec<Vec<f64>> = (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let mut totals = vec![0u64; n];
            scenario.run(derive_seed(master_seed, k), |_, ages| {
                for (t, &a) in totals.iter_mut().zip(ages) {
                    *t += u64::from(a);
                }
            });
            totals.into_iter().map(|t| t as f64 / horizon).collect()
        })
        .collect();

    let mut user_sums = vec![CompensatedSum::default(); n];
    let mut system_sum = CompensatedSum::default();
    let mut system_sq = CompensatedSum::default();
    for user_avgs in &per_run {
        let system = user_avgs.iter().sum::<f64>() / n as f64;
        for (acc, &v) in user_sums.iter_mut().zip(user_avgs) {
            acc.add(v);
        }
        system_sum.add(system);
    }
    let r = runs as f64;
    let mean = system_sum.value() / r;
    for user_avgs in &per_run {
        let d = user_avgs.iter().sum::<f64>() / n as f64 - mean;
        system_sq.add(d * d);
    }
    let variance = system_sq.value() / (r - 1.0);

    Ok(SimResult {
        mean_system_age: mean,
        per_user_mean: user_sums.iter().map(|s| s.value() / r).collect(),
        std_error: (variance / r).sqrt(),
        runs,
        seed: master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{expected_age_trajectory, expected_age_trajectory_diversity};
    use crate::model::{make_middle_block, make_uniform_subcarrier_block};
    use rand::Rng;

    #[test]
    fn full_probability_always_delivers() {
        let config = SystemConfig::no_diversity(20, 1, 0.1).unwrap();
        let p = SchedulingPolicy::uniform(1);
        for seed in [0, 1, 99] {
            let ages = simulate_run(&p, None, &BlockingPlan::empty(1, 20), &config, seed).unwrap();
            assert!(ages[0].iter().all(|&a| a == 1));
        }
    }

    #[test]
    fn same_seed_same_run() {
        let config = SystemConfig::no_diversity(50, 3, 0.2).unwrap();
        let p = SchedulingPolicy::new(vec![0.5, 0.3, 0.2]).unwrap();
        let plan = make_middle_block(&config, 2).unwrap();
        let a = simulate_run(&p, None, &plan, &config, 7).unwrap();
        let b = simulate_run(&p, None, &plan, &config, 7).unwrap();
        let c = simulate_run(&p, None, &plan, &config, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for row in &a {
            for (s, &v) in row.iter().enumerate() {
                assert!(v >= 1 && v as usize <= s + 1);
            }
        }
    }

    #[test]
    fn mean_trajectory_matches_recursion() {
        let config = SystemConfig::no_diversity(3, 2, 0.4).unwrap();
        let p = SchedulingPolicy::uniform(2);
        let plan = BlockingPlan::empty(2, 3);
        let runs = 200_000u64;
        let mut sum = [0.0f64; 3];
        let mut sq = [0.0f64; 3];
        for k in 0..runs {
            let ages = simulate_run(&p, None, &plan, &config, derive_seed(42, k)).unwrap();
            for s in 0..3 {
                let a = ages[0][s] as f64;
                sum[s] += a;
                sq[s] += a * a;
            }
        }
        let exact = [1.0, 1.5, 1.75];
        for s in 0..3 {
            let mean = sum[s] / runs as f64;
            let var = sq[s] / runs as f64 - mean * mean;
            let se = (var / runs as f64).sqrt();
            assert!(
                (mean - exact[s]).abs() <= 3.0 * se.max(1e-12),
                "slot {s}: {mean} vs {}",
                exact[s]
            );
        }
    }

    #[test]
    fn estimate_requires_two_runs() {
        let config = SystemConfig::no_diversity(5, 1, 0.1).unwrap();
        let p = SchedulingPolicy::uniform(1);
        assert_eq!(
            estimate_average_age(&p, None, &BlockingPlan::empty(1, 5), &config, 1, 0),
            Err(Error::InsufficientRuns { min: 2, got: 1 })
        );
    }

    #[test]
    fn estimate_is_deterministic() {
        let config = SystemConfig::no_diversity(100, 3, 0.3).unwrap();
        let p = SchedulingPolicy::new(vec![0.5, 0.3, 0.2]).unwrap();
        let plan = make_middle_block(&config, 2).unwrap();
        let a = estimate_average_age(&p, None, &plan, &config, 500, 11).unwrap();
        let b = estimate_average_age(&p, None, &plan, &config, 500, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn std_error_shrinks_like_root_n() {
        let config = SystemConfig::no_diversity(200, 3, 0.3).unwrap();
        let p = SchedulingPolicy::new(vec![0.5, 0.3, 0.2]).unwrap();
        let plan = make_middle_block(&config, 2).unwrap();
        let a = estimate_average_age(&p, None, &plan, &config, 20_000, 3).unwrap();
        let b = estimate_average_age(&p, None, &plan, &config, 40_000, 3).unwrap();
        let ratio = a.std_error / b.std_error;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn unbiased_on_random_small_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..6 {
            let n = rng.gen_range(1..=3);
            let horizon = rng.gen_range(5..40);
            let alpha = rng.gen_range(0.1..0.6);
            let config = SystemConfig::no_diversity(horizon, n, alpha).unwrap();
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let p = SchedulingPolicy::new(raw.iter().map(|v| v / s).collect()).unwrap();
            let plan = make_middle_block(&config, rng.gen_range(0..n)).unwrap();
            let exact = expected_age_trajectory(&p, &plan, &config).unwrap();
            let sim = estimate_average_age(&p, None, &plan, &config, 20_000, case).unwrap();
            let tol = 4.0 * sim.std_error + 1e-12;
            assert!(
                (sim.mean_system_age - exact.system_avg).abs() <= tol,
                "case {case}: {} vs {}",
                sim.mean_system_age,
                exact.system_avg
            );
        }
    }

    #[test]
    fn diversity_simulation_matches_recursion() {
        let config = SystemConfig::new(60, 2, 3, 0.4).unwrap();
        let p = SchedulingPolicy::new(vec![0.6, 0.4]).unwrap();
        let q = SubcarrierPolicy::new(vec![0.5, 0.3, 0.2]).unwrap();
        let plan = make_uniform_subcarrier_block(&config).unwrap();
        let exact = expected_age_trajectory_diversity(&p, &q, &plan, &config).unwrap();
        let sim = estimate_average_age(&p, Some(&q), &plan, &config, 40_000, 5).unwrap();
        assert!((sim.mean_system_age - exact.system_avg).abs() <= 4.0 * sim.std_error);
        assert!(estimate_average_age(&p, None, &plan, &config, 10, 5).is_err());
    }

    #[test]
    fn seed_derivation_spreads() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| derive_seed(0, k)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
