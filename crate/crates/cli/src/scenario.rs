//! Scenario documents: parsing, validation and resolution into model objects.

use std::path::Path;

use aoijam_core::best_response::{adversary_oracle, single_block_response_for};
use aoijam_core::model::{blocking_feasible, make_middle_block, make_uniform_subcarrier_block};
use aoijam_core::{BlockingPlan, PlanMode, SchedulingPolicy, SubcarrierPolicy, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    NoDiversity,
    Diversity,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySource {
    #[default]
    Uniform,
    Explicit {
        probs: Vec<f64>,
    },
    /// Base station's best response to a middle-window jam of `blocked_user`.
    SingleBlockResponse {
        blocked_user: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubcarrierSource {
    #[default]
    Uniform,
    Explicit {
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlanSource {
    #[default]
    None,
    MiddleBlock {
        target: usize,
    },
    UniformSubcarrier,
    /// Either `blocked` `(channel, slot)` pairs (0-indexed) or full `rows` of
    /// blocking probabilities, one row per channel.
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        blocked: Option<Vec<(usize, usize)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<Vec<Vec<f64>>>,
    },
    /// Lexicographically first maximizer of the exhaustive search.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Exact,
    Asymptotic,
    Montecarlo {
        #[serde(default = "default_runs")]
        runs: usize,
        #[serde(default)]
        seed: u64,
    },
    BestResponse,
    Oracle,
    BrDynamics {
        #[serde(default = "default_iterations")]
        iterations: usize,
    },
    Stackelberg {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
    NashVerify {
        #[serde(default = "default_samples")]
        bs_samples: usize,
        #[serde(default = "default_samples")]
        adv_samples: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_runs() -> usize {
    10_000
}

fn default_iterations() -> usize {
    20
}

fn default_samples() -> usize {
    200
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Exact => "exact",
            Experiment::Asymptotic => "asymptotic",
            Experiment::Montecarlo { .. } => "simulate",
            Experiment::BestResponse => "best-response",
            Experiment::Oracle => "oracle",
            Experiment::BrDynamics { .. } => "br-dynamics",
            Experiment::Stackelberg { .. } => "stackelberg",
            Experiment::NashVerify { .. } => "nash-verify",
        }
    }

    pub fn seed_mut(&mut self) -> Option<&mut u64> {
        match self {
            Experiment::Montecarlo { seed, .. }
            | Experiment::Stackelberg { seed, .. }
            | Experiment::NashVerify { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Parameter-free default for an experiment named on the command line.
    pub fn default_for(name: &str) -> Option<Self> {
        Some(match name {
            "exact" => Experiment::Exact,
            "asymptotic" => Experiment::Asymptotic,
            "simulate" => Experiment::Montecarlo {
                runs: default_runs(),
                seed: 0,
            },
            "best-response" => Experiment::BestResponse,
            "oracle" => Experiment::Oracle,
            "br-dynamics" => Experiment::BrDynamics {
                iterations: default_iterations(),
            },
            "stackelberg" => Experiment::Stackelberg {
                samples: default_samples(),
                seed: 0,
            },
            "nash-verify" => Experiment::NashVerify {
                bs_samples: default_samples(),
                adv_samples: default_samples(),
                seed: 0,
            },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub model: Model,
    pub system: SystemConfig,
    #[serde(default)]
    pub policy: PolicySource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcarrier_policy: Option<SubcarrierSource>,
    #[serde(default)]
    pub plan: PlanSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
}

impl ScenarioConfig {
    /// Parses a scenario document; errors carry line, column and field path.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let config: ScenarioConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            CliError::Parse {
                path: path.to_path_buf(),
                line: inner.line(),
                column: inner.column(),
                field,
                message: strip_position(&inner.to_string()),
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks that every source is consistent with the model and dimensions.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::validation(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        let sys = &self.system;
        match (self.model, sys.has_diversity()) {
            (Model::Diversity, false) => {
                return Err(CliError::validation(
                    "system.num_subcarriers",
                    "the diversity model needs at least two sub-carriers",
                ))
            }
            (Model::NoDiversity, true) => {
                return Err(CliError::validation(
                    "system.num_subcarriers",
                    "the no-diversity model has exactly one sub-carrier",
                ))
            }
            _ => {}
        }
        self.policy()?;
        self.subcarrier_policy()?;
        match &self.plan {
            PlanSource::UniformSubcarrier if self.model != Model::Diversity => {
                return Err(CliError::validation(
                    "plan",
                    "uniform_subcarrier requires the diversity model",
                ))
            }
            PlanSource::Oracle if self.model != Model::NoDiversity => {
                return Err(CliError::validation(
                    "plan",
                    "oracle requires the no-diversity model",
                ))
            }
            PlanSource::Oracle => {}
            _ => {
                self.plan()?;
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> Result<SchedulingPolicy> {
        let n = self.system.num_users();
        match &self.policy {
            PolicySource::Uniform => Ok(SchedulingPolicy::uniform(n)),
            PolicySource::Explicit { probs } => {
                if probs.len() != n {
                    return Err(CliError::validation(
                        "policy.probs",
                        format!("has {} entries, expected {n}", probs.len()),
                    ));
                }
                SchedulingPolicy::new(probs.clone())
                    .map_err(|e| CliError::validation("policy.probs", e))
            }
            PolicySource::SingleBlockResponse { blocked_user } => {
                single_block_response_for(n, self.system.alpha(), *blocked_user)
                    .map_err(|e| CliError::validation("policy.blocked_user", e))
            }
        }
    }

    /// `None` for the no-diversity model.
    pub fn subcarrier_policy(&self) -> Result<Option<SubcarrierPolicy>> {
        let n_sub = self.system.num_subcarriers();
        match (self.model, &self.subcarrier_policy) {
            (Model::NoDiversity, None) => Ok(None),
            (Model::NoDiversity, Some(_)) => Err(CliError::validation(
                "subcarrier_policy",
                "only meaningful for the diversity model",
            )),
            (Model::Diversity, None | Some(SubcarrierSource::Uniform)) => {
                Ok(Some(SubcarrierPolicy::uniform(n_sub)))
            }
            (Model::Diversity, Some(SubcarrierSource::Explicit { probs })) => {
                if probs.len() != n_sub {
                    return Err(CliError::validation(
                        "subcarrier_policy.probs",
                        format!("has {} entries, expected {n_sub}", probs.len()),
                    ));
                }
                SubcarrierPolicy::new(probs.clone())
                    .map(Some)
                    .map_err(|e| CliError::validation("subcarrier_policy.probs", e))
            }
        }
    }

    /// Resolves the plan. The oracle source runs the exhaustive search, so
    /// its failures are runtime errors rather than validation errors.
    pub fn plan(&self) -> Result<BlockingPlan> {
        let sys = &self.system;
        let plan = match &self.plan {
            PlanSource::None => BlockingPlan::empty(sys.channels(), sys.horizon()),
            PlanSource::MiddleBlock { target } => make_middle_block(sys, *target)
                .map_err(|e| CliError::validation("plan.target", e))?,
            PlanSource::UniformSubcarrier => {
                make_uniform_subcarrier_block(sys).map_err(|e| CliError::validation("plan", e))?
            }
            PlanSource::Explicit { blocked, rows } => {
                let plan = match (blocked, rows) {
                    (Some(blocked), None) => {
                        BlockingPlan::deterministic(sys.channels(), sys.horizon(), blocked)
                            .map_err(|e| CliError::validation("plan.blocked", e))?
                    }
                    (None, Some(rows)) => {
                        BlockingPlan::from_rows(PlanMode::Randomized, rows.clone())
                            .map_err(|e| CliError::validation("plan.rows", e))?
                    }
                    _ => {
                        return Err(CliError::validation(
                            "plan",
                            "give exactly one of `blocked` or `rows`",
                        ))
                    }
                };
                match blocking_feasible(&plan, sys) {
                    Ok(true) => plan,
                    Ok(false) => {
                        return Err(CliError::validation(
                            "plan",
                            "plan exceeds the blocking budget",
                        ))
                    }
                    Err(e) => return Err(CliError::validation("plan", e)),
                }
            }
            PlanSource::Oracle => adversary_oracle(&self.policy()?, sys)?.best.plan,
        };
        Ok(plan)
    }
}

/// serde_json appends " at line L column C"; the position is reported separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}
