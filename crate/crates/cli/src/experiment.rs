//! Experiment execution and result export.

use std::fmt::Write as _;
use std::path::Path;

use aoijam_core::asymptotic::{
    blocked_user_age, diversity_plan_payoff, diversity_system_age, regime_warning,
    relaxed_plan_payoff, unblocked_user_age,
};
use aoijam_core::best_response::{
    adversary_best_response, adversary_oracle, numeric_simplex_minimizer, ordered_kkt_solver,
    OracleReport,
};
use aoijam_core::equilibrium::{
    best_response_dynamics, is_nash_no_diversity, stackelberg_equilibrium_with,
    verify_diversity_nash, CertifyOptions, DiversityPoint, EquilibriumReport, StackelbergOutcome,
};
use aoijam_core::exact::{expected_age_trajectory, expected_age_trajectory_diversity};
use aoijam_core::model::make_uniform_subcarrier_block;
use aoijam_core::montecarlo::{estimate_average_age, SimResult};
use aoijam_core::{AgeSeries, BlockingPlan, SchedulingPolicy};
use serde::Serialize;

use crate::error::Result;
use crate::export;
use crate::scenario::{Experiment, Model, ScenarioConfig};

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticResult {
    pub per_user_age: Vec<f64>,
    pub system_age: f64,
    /// `N` times the system age; the no-diversity game payoff.
    pub reduced_payoff: Option<f64>,
    /// Closed form for the uniformly split middle block (diversity model).
    pub diversity_closed_form: Option<f64>,
    pub regime_warning: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestResponseResult {
    /// Base station's best policy against the configured plan.
    pub base_station_policy: Vec<f64>,
    pub base_station_payoff: f64,
    /// Adversary's structured best response to the configured policy.
    pub adversary_target: Option<usize>,
    pub adversary_payoff: f64,
    pub adversary_plan: BlockingPlan,
}

#[derive(Debug, Clone, Serialize)]
pub struct StackelbergResult {
    pub outcome: StackelbergOutcome,
    /// Ordered-simplex solver output, absent for a single user.
    pub ordered_solver_policy: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Outcome {
    Exact(AgeSeries),
    Asymptotic(AsymptoticResult),
    Simulate(SimResult),
    BestResponse(BestResponseResult),
    Oracle(OracleReport),
    BrDynamics(EquilibriumReport),
    Stackelberg(StackelbergResult),
    NashVerify(EquilibriumReport),
}

pub fn run(scenario: &ScenarioConfig, experiment: &Experiment) -> Result<Outcome> {
    let sys = &scenario.system;
    let policy = scenario.policy()?;
    let subpolicy = scenario.subcarrier_policy()?;
    let outcome = match experiment {
        Experiment::Exact => {
            let plan = scenario.plan()?;
            Outcome::Exact(match &subpolicy {
                Some(q) => expected_age_trajectory_diversity(&policy, q, &plan, sys)?,
                None => expected_age_trajectory(&policy, &plan, sys)?,
            })
        }
        Experiment::Asymptotic => Outcome::Asymptotic(asymptotic(scenario, &policy)?),
        Experiment::Montecarlo { runs, seed } => {
            let plan = scenario.plan()?;
            Outcome::Simulate(estimate_average_age(
                &policy,
                subpolicy.as_ref(),
                &plan,
                sys,
                *runs,
                *seed,
            )?)
        }
        Experiment::BestResponse => Outcome::BestResponse(best_responses(scenario, &policy)?),
        Experiment::Oracle => Outcome::Oracle(adversary_oracle(&policy, sys)?),
        Experiment::BrDynamics { iterations } => Outcome::BrDynamics(best_response_dynamics(
            sys.num_users(),
            sys.alpha(),
            sys.horizon(),
            *iterations,
        )?),
        Experiment::Stackelberg { samples, seed } => {
            let opts = CertifyOptions {
                random_samples: *samples,
                seed: *seed,
                ..CertifyOptions::default()
            };
            let outcome = stackelberg_equilibrium_with(sys, &opts)?;
            let ordered_solver_policy = if sys.num_users() >= 2 {
                Some(
                    ordered_kkt_solver(sys.num_users(), sys.alpha())?
                        .probs()
                        .to_vec(),
                )
            } else {
                None
            };
            Outcome::Stackelberg(StackelbergResult {
                outcome,
                ordered_solver_policy,
            })
        }
        Experiment::NashVerify {
            bs_samples,
            adv_samples,
            seed,
        } => {
            let plan = scenario.plan()?;
            Outcome::NashVerify(match subpolicy {
                Some(subpolicy) => {
                    let point = DiversityPoint {
                        policy,
                        subpolicy,
                        plan,
                    };
                    verify_diversity_nash(&point, sys, *bs_samples, *adv_samples, *seed)?
                }
                None => is_nash_no_diversity(&policy, &plan, sys, *bs_samples)?,
            })
        }
    };
    Ok(outcome)
}

fn asymptotic(scenario: &ScenarioConfig, policy: &SchedulingPolicy) -> Result<AsymptoticResult> {
    let sys = &scenario.system;
    let plan = scenario.plan()?;
    let warning = regime_warning(policy, sys.horizon());
    match scenario.subcarrier_policy()? {
        None => {
            let t = sys.horizon() as f64;
            let per_user_age = policy
                .probs()
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let a = plan.blocked_on(i) / t;
                    if a == 0.0 {
                        unblocked_user_age(p)
                    } else {
                        blocked_user_age(p, a, sys.horizon())
                    }
                })
                .collect::<aoijam_core::Result<Vec<f64>>>()?;
            let reduced = relaxed_plan_payoff(policy, &plan)?;
            Ok(AsymptoticResult {
                system_age: per_user_age.iter().sum::<f64>() / per_user_age.len() as f64,
                per_user_age,
                reduced_payoff: Some(reduced),
                diversity_closed_form: None,
                regime_warning: warning,
            })
        }
        Some(q) => {
            let system_age = diversity_plan_payoff(policy, &q, &plan)?;
            // user i averages inv_pass / p_i, and the system age is their mean
            let inv_sum: f64 = policy.probs().iter().map(|&p| 1.0 / p).sum();
            let inv_pass = system_age * policy.len() as f64 / inv_sum;
            let per_user_age = policy.probs().iter().map(|&p| inv_pass / p).collect();
            Ok(AsymptoticResult {
                per_user_age,
                system_age,
                reduced_payoff: None,
                diversity_closed_form: Some(diversity_system_age(
                    policy,
                    sys.alpha(),
                    sys.num_subcarriers(),
                )?),
                regime_warning: warning,
            })
        }
    }
}

fn best_responses(
    scenario: &ScenarioConfig,
    policy: &SchedulingPolicy,
) -> Result<BestResponseResult> {
    let sys = &scenario.system;
    let plan = scenario.plan()?;
    match scenario.subcarrier_policy()? {
        None => {
            let t = sys.horizon() as f64;
            let weights: Vec<f64> = (0..sys.num_users())
                .map(|i| 1.0 + plan.blocked_on(i) / t)
                .collect();
            let bs = numeric_simplex_minimizer(&weights)?;
            let adv = adversary_best_response(policy, sys)?;
            Ok(BestResponseResult {
                base_station_payoff: relaxed_plan_payoff(&bs, &plan)?,
                base_station_policy: bs.probs().to_vec(),
                adversary_target: adv.target,
                adversary_payoff: adv.payoff,
                adversary_plan: adv.plan,
            })
        }
        Some(q) => {
            // the large-horizon payoff factors into a q-part and Σ 1/p_i
            let bs = SchedulingPolicy::uniform(sys.num_users());
            let adv_plan = make_uniform_subcarrier_block(sys)?;
            Ok(BestResponseResult {
                base_station_payoff: diversity_plan_payoff(&bs, &q, &plan)?,
                base_station_policy: bs.probs().to_vec(),
                adversary_target: None,
                adversary_payoff: diversity_plan_payoff(policy, &q, &adv_plan)?,
                adversary_plan: adv_plan,
            })
        }
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn holds_word(h: Option<bool>) -> &'static str {
    match h {
        Some(true) => "holds",
        Some(false) => "fails",
        None => "n/a",
    }
}

impl Outcome {
    /// Human-readable summary for standard output.
    pub fn summary(&self, scenario: &ScenarioConfig) -> String {
        let sys = &scenario.system;
        let mut s = format!(
            "N={} T={} alpha={} budget={}{}\n",
            sys.num_users(),
            sys.horizon(),
            sys.alpha(),
            sys.budget(),
            if scenario.model == Model::Diversity {
                format!(" subcarriers={}", sys.num_subcarriers())
            } else {
                String::new()
            }
        );
        match self {
            Outcome::Exact(series) => {
                let _ = writeln!(s, "per-user average age {}", fmt_vec(&series.per_user_avg));
                let _ = writeln!(s, "system average age {:.6}", series.system_avg);
            }
            Outcome::Asymptotic(r) => {
                let _ = writeln!(s, "per-user asymptotic age {}", fmt_vec(&r.per_user_age));
                let _ = writeln!(s, "system asymptotic age {:.6}", r.system_age);
                if let Some(v) = r.reduced_payoff {
                    let _ = writeln!(s, "reduced payoff {v:.6}");
                }
                if let Some(v) = r.diversity_closed_form {
                    let _ = writeln!(s, "uniform-split closed form {v:.6}");
                }
                if r.regime_warning {
                    let _ = writeln!(
                        s,
                        "warning: T * min p is small, large-horizon formulas may be inaccurate"
                    );
                }
            }
            Outcome::Simulate(r) => {
                let _ = writeln!(
                    s,
                    "mean system age {:.6} +/- {:.6} (1 s.e., {} runs, seed {})",
                    r.mean_system_age, r.std_error, r.runs, r.seed
                );
            }
            Outcome::BestResponse(r) => {
                let _ = writeln!(
                    s,
                    "base station best response {} payoff {:.6}",
                    fmt_vec(&r.base_station_policy),
                    r.base_station_payoff
                );
                match r.adversary_target {
                    Some(t) => {
                        let _ = writeln!(
                            s,
                            "adversary jams user {t} payoff {:.6}",
                            r.adversary_payoff
                        );
                    }
                    None => {
                        let _ = writeln!(
                            s,
                            "adversary splits evenly across sub-carriers payoff {:.6}",
                            r.adversary_payoff
                        );
                    }
                }
            }
            Outcome::Oracle(r) => {
                let _ = writeln!(
                    s,
                    "exhaustive maximum {:.9} over {} leaves ({} maximizers)",
                    r.best.payoff, r.leaves, r.maximizer_count
                );
                let _ = writeln!(
                    s,
                    "structured response exact payoff {:.9}",
                    r.structured_exact_payoff
                );
                let _ = writeln!(s, "gap {:.3e}", r.gap);
            }
            Outcome::BrDynamics(r) => {
                for e in &r.trace {
                    let _ = writeln!(
                        s,
                        "iter {:>3} block user {} p={}",
                        e.iteration,
                        e.blocked_user,
                        fmt_vec(&e.policy)
                    );
                }
                let _ = writeln!(
                    s,
                    "fixed point: {}",
                    if r.holds == Some(true) { "yes" } else { "no" }
                );
                if let Some(note) = &r.note {
                    let _ = writeln!(s, "{note}");
                }
            }
            Outcome::Stackelberg(r) => {
                let _ = writeln!(s, "leader policy {}", fmt_vec(r.outcome.policy.probs()));
                let _ = writeln!(s, "leader payoff {:.6}", r.outcome.payoff);
                if let Some(p) = &r.ordered_solver_policy {
                    let _ = writeln!(s, "ordered solver policy {}", fmt_vec(p));
                }
                let _ = writeln!(
                    s,
                    "certificate {} over {} samples",
                    holds_word(r.outcome.certification.holds),
                    r.outcome.certification.samples_checked
                );
            }
            Outcome::NashVerify(r) => {
                let _ = writeln!(
                    s,
                    "equilibrium {} ({} deviations checked)",
                    holds_word(r.holds),
                    r.samples_checked
                );
                if let Some(w) = &r.witness {
                    let _ = writeln!(
                        s,
                        "witness {}",
                        serde_json::to_string(w).expect("witness serializes")
                    );
                }
                if let Some(note) = &r.note {
                    let _ = writeln!(s, "{note}");
                }
            }
        }
        s
    }

    /// Writes the experiment's CSV (if any) and `results.json` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        match self {
            Outcome::Exact(series) => {
                export::write_trajectories(&dir.join(export::TRAJECTORY_FILE), series)?
            }
            Outcome::Simulate(r) => export::write_sim(&dir.join(export::SIM_FILE), r)?,
            Outcome::BrDynamics(r) => export::write_dynamics(&dir.join(export::DYNAMICS_FILE), r)?,
            Outcome::Stackelberg(r) => export::write_equilibrium(
                &dir.join(export::EQUILIBRIUM_FILE),
                &[&r.outcome.certification],
            )?,
            Outcome::NashVerify(r) => {
                export::write_equilibrium(&dir.join(export::EQUILIBRIUM_FILE), &[r])?
            }
            Outcome::Asymptotic(_) | Outcome::BestResponse(_) | Outcome::Oracle(_) => {}
        }
        export::write_json(&dir.join(export::RESULTS_FILE), self)
    }
}
