//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line per criterion to stderr (bypassing output capture), then asserts.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use aoijam::export::{write_dynamics, write_equilibrium, write_sim};
use aoijam_core::asymptotic::blocked_user_age;
use aoijam_core::best_response::{
    adversary_best_response, adversary_oracle, bs_best_response_single_block,
    descent_simplex_minimizer, ordered_kkt_solver,
};
use aoijam_core::equilibrium::{
    best_response_dynamics, diversity_nash_point, stackelberg_equilibrium, verify_diversity_nash,
};
use aoijam_core::exact::{expected_age_trajectory, expected_age_trajectory_diversity};
use aoijam_core::model::{make_middle_block, make_uniform_subcarrier_block};
use aoijam_core::montecarlo::estimate_average_age;
use aoijam_core::simplex::DescentOptions;
use aoijam_core::{BlockingPlan, SchedulingPolicy, SubcarrierPolicy, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Verdict {
    pass: bool,
    detail: String,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let elapsed = start.elapsed();
    if elapsed >= limit {
        v.pass = false;
    }
    v.detail = format!("{} [{:.2?} of {:?}]", v.detail, elapsed, limit);
    v
}

fn closed_form_vs_numeric() -> Verdict {
    let mut worst = 0.0f64;
    for n in [2, 3, 5, 10] {
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let closed = bs_best_response_single_block(n, alpha).unwrap();
            let mut w = vec![1.0; n];
            w[0] = 1.0 + alpha;
            let numeric = descent_simplex_minimizer(&w, &DescentOptions::default()).unwrap();
            worst = worst.max(max_abs_diff(closed.probs(), &numeric.point));
        }
    }
    Verdict {
        pass: worst <= 1e-6,
        detail: format!("max deviation {worst:.2e}"),
    }
}

fn unblocked_asymptote() -> Verdict {
    let config = SystemConfig::no_diversity(100_000, 2, 0.1).unwrap();
    let policy = SchedulingPolicy::new(vec![0.01, 0.99]).unwrap();
    let series =
        expected_age_trajectory(&policy, &BlockingPlan::empty(2, 100_000), &config).unwrap();
    let rel = (series.per_user_avg[0] - 100.0).abs() / 100.0;
    Verdict {
        pass: rel <= 0.01,
        detail: format!(
            "exact {:.4} vs 100, rel err {rel:.2e}",
            series.per_user_avg[0]
        ),
    }
}

fn blocked_asymptote() -> Verdict {
    let config = SystemConfig::no_diversity(10_000, 2, 0.2).unwrap();
    let policy = SchedulingPolicy::new(vec![0.1, 0.9]).unwrap();
    let plan = make_middle_block(&config, 0).unwrap();
    let series = expected_age_trajectory(&policy, &plan, &config).unwrap();
    let formula = blocked_user_age(0.1, 0.2, 10_000).unwrap();
    let rel = (series.per_user_avg[0] - formula).abs() / formula;
    Verdict {
        pass: rel <= 0.02,
        detail: format!(
            "exact {:.4} vs {formula:.4}, rel err {rel:.2e}",
            series.per_user_avg[0]
        ),
    }
}

const MC_SEED: u64 = 2024;

fn mc_setup() -> (SchedulingPolicy, BlockingPlan, SystemConfig) {
    let config = SystemConfig::no_diversity(500, 3, 0.2).unwrap();
    let policy = SchedulingPolicy::new(vec![0.5, 0.3, 0.2]).unwrap();
    let plan = make_middle_block(&config, 2).unwrap();
    (policy, plan, config)
}

fn monte_carlo_vs_exact(csv_dir: &Path) -> Verdict {
    let (policy, plan, config) = mc_setup();
    let exact = expected_age_trajectory(&policy, &plan, &config)
        .unwrap()
        .system_avg;
    let sim = estimate_average_age(&policy, None, &plan, &config, 200_000, MC_SEED).unwrap();
    write_sim(&csv_dir.join("sim.csv"), &sim).unwrap();
    let z = (sim.mean_system_age - exact).abs() / sim.std_error;
    Verdict {
        pass: z <= 3.0,
        detail: format!(
            "mc {:.5} +/- {:.5} vs exact {exact:.5} ({z:.2} s.e.)",
            sim.mean_system_age, sim.std_error
        ),
    }
}

fn nash_nonexistence(csv_dir: &Path) -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [2, 3] {
        for alpha in [0.3, 0.5] {
            let report = best_response_dynamics(n, alpha, 1000, 20).unwrap();
            let changes = report
                .trace
                .windows(2)
                .all(|w| w[0].blocked_user != w[1].blocked_user);
            let no_fixed = report.holds == Some(false) && report.trace.len() == 20;
            ok &= changes && no_fixed;
            notes.push(format!(
                "N={n} a={alpha}:{}",
                if changes && no_fixed {
                    "cycles"
                } else {
                    "SETTLED"
                }
            ));
            write_dynamics(&csv_dir.join(format!("dynamics_{n}_{alpha}.csv")), &report).unwrap();
        }
    }
    Verdict {
        pass: ok,
        detail: notes.join(" "),
    }
}

fn stackelberg(csv_dir: &Path) -> Verdict {
    let mut worst_uniform = 0.0f64;
    let mut certified = true;
    let mut samples = 0;
    for n in 2..=8 {
        for k in 1..=9 {
            let alpha = k as f64 / 10.0;
            let p = ordered_kkt_solver(n, alpha).unwrap();
            worst_uniform = worst_uniform.max(
                p.probs()
                    .iter()
                    .map(|x| (x - 1.0 / n as f64).abs())
                    .fold(0.0, f64::max),
            );
            let config = SystemConfig::no_diversity(1000, n, alpha).unwrap();
            let out = stackelberg_equilibrium(&config).unwrap();
            certified &= out.certification.holds == Some(true);
            samples += out.certification.samples_checked;
            if n == 2 && k == 5 {
                write_equilibrium(&csv_dir.join("stackelberg.csv"), &[&out.certification]).unwrap();
            }
        }
    }
    Verdict {
        pass: worst_uniform <= 1e-6 && certified,
        detail: format!("max distance to uniform {worst_uniform:.2e}, {samples} leader samples, certified={certified}"),
    }
}

fn q_independence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for n_sub in [2, 4] {
        let config = SystemConfig::new(400, 2, n_sub, 0.5).unwrap();
        let policy = SchedulingPolicy::new(vec![0.6, 0.4]).unwrap();
        let plan = make_uniform_subcarrier_block(&config).unwrap();
        let reference = expected_age_trajectory_diversity(
            &policy,
            &SubcarrierPolicy::uniform(n_sub),
            &plan,
            &config,
        )
        .unwrap();
        for _ in 0..20 {
            let raw: Vec<f64> = (0..n_sub).map(|_| rng.gen_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            let q = SubcarrierPolicy::new(raw.into_iter().map(|x| x / s).collect()).unwrap();
            let series = expected_age_trajectory_diversity(&policy, &q, &plan, &config).unwrap();
            for (a, b) in series.per_user.iter().zip(&reference.per_user) {
                worst = worst.max(max_abs_diff(a, b));
            }
        }
    }
    Verdict {
        pass: worst <= 1e-12,
        detail: format!("max trajectory difference {worst:.2e}"),
    }
}

fn diversity_nash(csv_dir: &Path) -> Verdict {
    let mut failures = Vec::new();
    let mut reports = Vec::new();
    for n in [2, 4] {
        for n_sub in [2, 4] {
            for alpha in [0.2, 0.5] {
                let config = SystemConfig::new(400, n, n_sub, alpha).unwrap();
                let point = diversity_nash_point(&config).unwrap();
                let report = verify_diversity_nash(&point, &config, 500, 500, 99).unwrap();
                if report.holds != Some(true) {
                    failures.push(format!("({n},{n_sub},{alpha}): {:?}", report.witness));
                }
                reports.push(report);
            }
        }
    }
    let refs: Vec<_> = reports.iter().collect();
    write_equilibrium(&csv_dir.join("diversity.csv"), &refs).unwrap();
    Verdict {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "8 configurations hold".to_string()
        } else {
            failures.join("; ")
        },
    }
}

fn oracle_certification() -> Verdict {
    let config = SystemConfig::no_diversity(10, 2, 0.3).unwrap();
    assert_eq!(config.budget(), 3);
    let policy = SchedulingPolicy::new(vec![0.7, 0.3]).unwrap();
    let report = adversary_oracle(&policy, &config).unwrap();
    let structured = adversary_best_response(&policy, &config).unwrap();
    let within = report.best.payoff - report.structured_exact_payoff <= report.gap + 1e-12;
    Verdict {
        pass: within && report.gap.is_finite(),
        detail: format!(
            "oracle max {:.9}, structured (jam user {}) {:.9}, gap {:.3e}, {} leaves",
            report.best.payoff,
            structured.target.unwrap(),
            report.structured_exact_payoff,
            report.gap,
            report.leaves
        ),
    }
}

fn same_bytes(a: &Path, b: &Path) -> Vec<String> {
    let mut mismatched = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in names {
        if std::fs::read(a.join(&name)).unwrap() != std::fs::read(b.join(&name)).unwrap() {
            mismatched.push(name.to_string_lossy().into_owned());
        }
    }
    mismatched
}

#[test]
fn acceptance() {
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();

    let mut verdicts: Vec<(u32, &str, Verdict)> = vec![
        (
            1,
            "closed-form vs numeric best response",
            timed(Duration::from_secs(1), closed_form_vs_numeric),
        ),
        (
            2,
            "unblocked-user asymptote",
            timed(Duration::from_secs(1), unblocked_asymptote),
        ),
        (
            3,
            "blocked-user asymptote",
            timed(Duration::from_secs(1), blocked_asymptote),
        ),
        (
            4,
            "Monte Carlo vs exact",
            timed(Duration::from_secs(60), || {
                monte_carlo_vs_exact(first.path())
            }),
        ),
        (
            5,
            "no Nash point without diversity",
            timed(Duration::from_secs(1), || nash_nonexistence(first.path())),
        ),
        (
            6,
            "Stackelberg leader is uniform",
            timed(Duration::from_secs(10), || stackelberg(first.path())),
        ),
        (
            7,
            "sub-carrier policy independence",
            timed(Duration::from_secs(5), q_independence),
        ),
        (
            8,
            "Nash point with diversity",
            timed(Duration::from_secs(60), || diversity_nash(first.path())),
        ),
        (
            9,
            "exhaustive oracle certification",
            timed(Duration::from_secs(60), oracle_certification),
        ),
    ];

    // repeat every randomized run with the same seeds into a second directory
    monte_carlo_vs_exact(second.path());
    nash_nonexistence(second.path());
    stackelberg(second.path());
    diversity_nash(second.path());
    let mismatched = same_bytes(first.path(), second.path());
    let files = std::fs::read_dir(first.path()).unwrap().count();
    verdicts.push((
        10,
        "deterministic CSV output",
        Verdict {
            pass: mismatched.is_empty() && files > 0,
            detail: if mismatched.is_empty() {
                format!("{files} CSV files byte-identical")
            } else {
                format!("differs: {}", mismatched.join(", "))
            },
        },
    ));

    let mut err = std::io::stderr().lock();
    for (id, name, v) in &verdicts {
        let _ = writeln!(
            err,
            "criterion {id:>2} {}: {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    drop(err);
    let failed: Vec<u32> = verdicts
        .iter()
        .filter(|(_, _, v)| !v.pass)
        .map(|(id, _, _)| *id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
