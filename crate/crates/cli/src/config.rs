use std::path::{Path, PathBuf};

use balgraph::graph::BalanceParams;
use balgraph::oracle::DEFAULT_STEP_BUDGET;
use balgraph::random::Budget;
use balgraph::rational::{format_rational, parse_rational};
use balgraph::{Exec, Rational};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One JSON file per run; every field may be omitted. Flags override the
/// file, and the resolved result is embedded in every report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    /// Optional; must square to `epsilon`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(rename = "Delta", skip_serializing_if = "Option::is_none")]
    pub big_delta: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_subsets: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_right_bits: Option<u32>,
    /// Enables the Monte-Carlo fallback when exact checks exceed the budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearity_trials: Option<u64>,
    /// Left node for `amplify`, in hex.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    /// `k` for oracle-generated sets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequential: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Expansion table file; the counter expansion keyed by `seed` is used
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub external_table: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OracleConfig {
    Toy {
        #[serde(default = "default_program_cap")]
        program_cap: u32,
        #[serde(default = "default_step_budget")]
        step_budget: u64,
    },
    Compressor {
        #[serde(default = "default_max_dict")]
        max_dict: usize,
        #[serde(default)]
        offset: u64,
    },
    Explicit {
        sets: Vec<ExplicitSet>,
        #[serde(default)]
        monotone: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSet {
    pub n: u32,
    pub k: u32,
    /// Hex strings.
    pub members: Vec<String>,
}

fn default_program_cap() -> u32 {
    12
}

fn default_step_budget() -> u64 {
    DEFAULT_STEP_BUDGET
}

fn default_max_dict() -> usize {
    1 << 16
}

pub const DEFAULT_MAX_ATTEMPTS: u64 = 100_000;
pub const DEFAULT_LINEARITY_TRIALS: u64 = 64;
/// Leading constant of the seed length `d = ceil(κ log^3 n log^2 (1/ε))`.
pub const DEFAULT_KAPPA: f64 = 1.0 / 64.0;
pub const DEFAULT_C: u32 = 1;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn require<T: Clone>(value: &Option<T>, name: &str) -> Result<T, CliError> {
        value.clone().ok_or_else(|| CliError::usage(format!("missing `{name}` (config or flag)")))
    }

    pub fn epsilon(&self) -> Result<Rational, CliError> {
        let text = Self::require(&self.epsilon, "epsilon")?;
        let eps = parse_rational(&text).map_err(|e| CliError::usage(e.to_string()))?;
        if let Some(delta) = &self.delta {
            let delta = parse_rational(delta).map_err(|e| CliError::usage(e.to_string()))?;
            if delta * delta != eps {
                return Err(CliError::usage(format!(
                    "delta^2 = {} differs from epsilon = {}",
                    format_rational(&(delta * delta)),
                    format_rational(&eps)
                )));
            }
        }
        Ok(eps)
    }

    pub fn params(&self) -> Result<BalanceParams, CliError> {
        let eps = self.epsilon()?;
        Ok(BalanceParams::new(eps, Self::require(&self.big_delta, "Delta")?, Self::require(&self.t, "t")?)?)
    }

    pub fn exec(&self) -> Exec {
        if self.sequential.unwrap_or(false) {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    pub fn budget(&self) -> Budget {
        let base = Budget::default();
        Budget {
            max_subsets: self.max_subsets.map_or(base.max_subsets, u128::from),
            max_right_bits: self.max_right_bits.unwrap_or(base.max_right_bits),
            exec: self.exec(),
        }
    }

    /// Report path: `report`, else `<out>.report.json`.
    pub fn report_path(&self) -> Option<PathBuf> {
        self.report.clone().or_else(|| {
            self.out.as_ref().map(|o| {
                let mut s = o.clone().into_os_string();
                s.push(".report.json");
                PathBuf::from(s)
            })
        })
    }
}
