use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::benchmark::Benchmark;
use crate::local_search::LocalSearchParams;
use crate::reef::{Horizon, OptimizerConfig};
use crate::windfarm::{wind_farm_objective, Scenario};
use crate::{Aggregate, AssignmentMode, AssignmentPolicy, BoundedObjective, Error, Metric, OperatorParams, ReefParams, Result, Substrate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "cro-sl")]
    CroSl,
    #[serde(rename = "pcro-sl")]
    PcroSl,
    #[serde(rename = "dpcro-sl")]
    DpcroSl,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::CroSl, Variant::PcroSl, Variant::DpcroSl];

    pub fn mode(self) -> AssignmentMode {
        match self {
            Variant::CroSl => AssignmentMode::Static,
            Variant::PcroSl => AssignmentMode::UniformProbabilistic,
            Variant::DpcroSl => AssignmentMode::Dynamic,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::CroSl => "CRO-SL",
            Variant::PcroSl => "PCRO-SL",
            Variant::DpcroSl => "DPCRO-SL",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Variant::CroSl => "cro-sl",
            Variant::PcroSl => "pcro-sl",
            Variant::DpcroSl => "dpcro-sl",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.key() == lower)
            .ok_or_else(|| Error::argument(format!("unknown variant `{s}` (expected cro-sl, pcro-sl or dpcro-sl)")))
    }
}

/// What to optimize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Benchmark {
        id: Benchmark,
        #[serde(default = "default_dimension")]
        dimension: usize,
        #[serde(default = "default_lower")]
        lower: f64,
        #[serde(default = "default_upper")]
        upper: f64,
    },
    /// Scenario file path, relative to the config file; the built-in 16
    /// turbine case when absent.
    Windfarm {
        #[serde(default)]
        scenario: Option<PathBuf>,
    },
}

fn default_dimension() -> usize {
    30
}
fn default_lower() -> f64 {
    -100.0
}
fn default_upper() -> f64 {
    100.0
}

impl ObjectiveSpec {
    pub fn name(&self) -> String {
        match self {
            ObjectiveSpec::Benchmark { id, .. } => id.to_string(),
            ObjectiveSpec::Windfarm { .. } => "windfarm".to_string(),
        }
    }

    pub fn scenario(&self) -> Result<Option<Scenario>> {
        match self {
            ObjectiveSpec::Benchmark { .. } => Ok(None),
            ObjectiveSpec::Windfarm { scenario: None } => Ok(Some(Scenario::default())),
            ObjectiveSpec::Windfarm { scenario: Some(path) } => Scenario::load(path).map(Some),
        }
    }

    pub fn build(&self) -> Result<BoundedObjective> {
        match self {
            ObjectiveSpec::Benchmark { id, dimension, lower, upper } => id.objective(*dimension, *lower, *upper),
            ObjectiveSpec::Windfarm { .. } => wind_farm_objective(&self.scenario()?.expect("windfarm scenario")),
        }
    }
}

/// Assignment policy knobs; the mode comes from the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub metric: Metric,
    pub aggregate: Aggregate,
    pub temperature: f64,
    pub floor: f64,
    pub update_period: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        let p = AssignmentPolicy::default();
        Self {
            metric: p.metric,
            aggregate: p.aggregate,
            temperature: p.temperature,
            floor: p.floor,
            update_period: p.update_period,
        }
    }
}

impl PolicyConfig {
    pub fn policy(&self, mode: AssignmentMode) -> AssignmentPolicy {
        AssignmentPolicy {
            mode,
            metric: self.metric,
            aggregate: self.aggregate,
            temperature: self.temperature,
            floor: self.floor,
            update_period: self.update_period,
        }
    }
}

/// A complete experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    pub substrates: Vec<Substrate>,
    #[serde(default)]
    pub operators: OperatorParams,
    /// Defaults to a 10x10 reef for benchmarks and 15x15 for wind farms.
    #[serde(default)]
    pub reef: Option<ReefParams>,
    #[serde(default)]
    pub policy: PolicyConfig,
    /// Total objective evaluations per repetition.
    pub budget: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub local_search: Option<LocalSearchParams>,
}

fn default_variant() -> Variant {
    Variant::DpcroSl
}
fn default_repetitions() -> usize {
    10
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file, resolving a scenario path against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let ObjectiveSpec::Windfarm { scenario: Some(s) } = &mut config.objective {
            if s.is_relative() {
                if let Some(dir) = path.parent() {
                    *s = dir.join(&*s);
                }
            }
        }
        Ok(config)
    }

    pub fn reef_params(&self) -> ReefParams {
        self.reef.clone().unwrap_or_else(|| match self.objective {
            ObjectiveSpec::Benchmark { .. } => ReefParams::default(),
            ObjectiveSpec::Windfarm { .. } => ReefParams::with_grid(15, 15),
        })
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            reef: self.reef_params(),
            substrates: self.substrates.clone(),
            operators: self.operators.clone(),
            policy: self.policy.policy(self.variant.mode()),
            horizon: Horizon::Evaluations(self.budget),
            local_search: self.local_search.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.substrates.is_empty() {
            return Err(Error::config("substrate list is empty"));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be at least 1"));
        }
        self.optimizer_config().validate()?;
        self.objective.build().map(drop)
    }
}
