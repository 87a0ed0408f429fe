//! Run specification: the full set of flags for one run, checked for
//! consistency with the command before anything is computed.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use hypercoarse::{ColumnScaling, CoarsenConfig, MatchCriterion, VisitOrder};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Coarsen,
    Svd,
    Cssp,
    Sparsify,
    VerifyBounds,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Coarsen => "coarsen",
            CommandKind::Svd => "svd",
            CommandKind::Cssp => "cssp",
            CommandKind::Sparsify => "sparsify",
            CommandKind::VerifyBounds => "verify-bounds",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Method {
    #[serde(rename = "coarsen")]
    Coarsen,
    #[serde(rename = "colnorm")]
    Colnorm,
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "leverage")]
    Leverage,
    #[serde(rename = "rand+coarsen")]
    #[value(name = "rand+coarsen")]
    RandCoarsen,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Coarsen => "coarsen",
            Method::Colnorm => "colnorm",
            Method::Uniform => "uniform",
            Method::Leverage => "leverage",
            Method::RandCoarsen => "rand+coarsen",
        }
    }

    pub fn coarsens(self) -> bool {
        matches!(self, Method::Coarsen | Method::RandCoarsen)
    }
}

/// Post-processing of the sketched factors in `svd`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Refine {
    None,
    Subspace,
    ZhaSimon,
    LowRank(usize),
}

impl fmt::Display for Refine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Refine::None => f.write_str("none"),
            Refine::Subspace => f.write_str("subspace"),
            Refine::ZhaSimon => f.write_str("zha-simon"),
            Refine::LowRank(l) => write!(f, "lowrank:{l}"),
        }
    }
}

impl FromStr for Refine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Refine::None),
            "subspace" => Ok(Refine::Subspace),
            "zha-simon" => Ok(Refine::ZhaSimon),
            _ => {
                let l = s
                    .strip_prefix("lowrank:")
                    .ok_or_else(|| format!("unknown refinement `{s}` (none | subspace | zha-simon | lowrank:l)"))?;
                let l: usize = l.parse().map_err(|_| format!("bad rank in `{s}`"))?;
                if l == 0 {
                    return Err("lowrank rank must be at least 1".into());
                }
                Ok(Refine::LowRank(l))
            }
        }
    }
}

impl TryFrom<String> for Refine {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Refine> for String {
    fn from(r: Refine) -> String {
        r.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Angle,
    Heaviest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    Random,
    Natural,
}

/// Flags of one run, as given. Unset flags stay `None` so that
/// inconsistent combinations can be reported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: CommandKind,
    pub input: PathBuf,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub c: Option<usize>,
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub iters: Option<usize>,
    #[serde(default)]
    pub refine: Option<Refine>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub unscaled: bool,
    #[serde(default)]
    pub criterion: Option<Criterion>,
    #[serde(default)]
    pub visit_order: Option<Order>,
    #[serde(default)]
    pub probes: Option<usize>,
    #[serde(default)]
    pub dense_cap: Option<usize>,
    #[serde(default)]
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub integer: bool,
    #[serde(default)]
    pub rank: Option<usize>,
}

pub const DEFAULT_PROBES: usize = 100;
pub const DEFAULT_SUBSPACE_ITERS: usize = 2;
pub const DEFAULT_VERIFY_KS: [usize; 3] = [1, 5, 10];

/// A validated spec with defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub command: CommandKind,
    pub input: PathBuf,
    pub method: Method,
    pub k: Vec<usize>,
    pub c: Option<usize>,
    /// Coarsening schedule; for `verify-bounds` each entry is tried alone.
    pub schedule: Vec<f64>,
    pub iters: usize,
    pub refine: Refine,
    pub seed: u64,
    pub scaling: ColumnScaling,
    pub criterion: MatchCriterion,
    pub visit_order: VisitOrder,
    pub probes: usize,
    pub dense_cap: usize,
    pub reference: Option<PathBuf>,
    pub integer: bool,
    pub rank: Option<usize>,
}

impl Plan {
    pub fn coarsen_config(&self) -> CoarsenConfig {
        let mut cfg = CoarsenConfig::new(self.schedule.clone(), self.seed);
        cfg.scaling = self.scaling;
        cfg.criterion = self.criterion;
        cfg.visit_order = self.visit_order;
        cfg
    }

    pub fn single_k(&self) -> Option<usize> {
        self.k.first().copied()
    }
}

fn reject(cond: bool, flag: &str, command: CommandKind, why: &str) -> CliResult<()> {
    if cond {
        Err(CliError::Config(format!("{flag} {why} for `{}`", command.name())))
    } else {
        Ok(())
    }
}

impl RunSpec {
    pub fn new(command: CommandKind, input: impl Into<PathBuf>) -> Self {
        Self {
            command,
            input: input.into(),
            method: None,
            k: Vec::new(),
            c: None,
            levels: None,
            epsilon: Vec::new(),
            iters: None,
            refine: None,
            seed: 0,
            unscaled: false,
            criterion: None,
            visit_order: None,
            probes: None,
            dense_cap: None,
            reference: None,
            integer: false,
            rank: None,
        }
    }

    /// Checks flag consistency and fills in defaults.
    pub fn resolve(&self) -> CliResult<Plan> {
        use CommandKind as C;
        let cmd = self.command;
        let na = "is not accepted";

        let method = match cmd {
            C::Coarsen | C::VerifyBounds => {
                reject(self.method.is_some_and(|m| m != Method::Coarsen), "--method", cmd, na)?;
                Method::Coarsen
            }
            C::Sparsify => {
                let m = self.method.unwrap_or(Method::Coarsen);
                reject(m == Method::RandCoarsen, "--method rand+coarsen", cmd, na)?;
                m
            }
            C::Svd | C::Cssp => self.method.unwrap_or(Method::Coarsen),
        };

        // sample size
        let needs_c = !method.coarsens();
        if needs_c {
            match self.c {
                None => return Err(CliError::Config(format!("--c is required for method {}", method.name()))),
                Some(0) => return Err(CliError::Config("--c must be at least 1".into())),
                Some(_) => {}
            }
        } else {
            reject(self.c.is_some(), "--c", cmd, "is only used by sampling methods")?;
        }

        // rank(s)
        if self.k.contains(&0) {
            return Err(CliError::Config("--k must be at least 1".into()));
        }
        match cmd {
            C::Svd => {
                if self.k.len() != 1 {
                    return Err(CliError::Config("`svd` needs exactly one --k".into()));
                }
            }
            C::Cssp => {
                if method == Method::Leverage {
                    if self.k.len() != 1 {
                        return Err(CliError::Config("leverage sampling needs exactly one --k".into()));
                    }
                } else {
                    reject(!self.k.is_empty(), "--k", cmd, "is only used by leverage sampling")?;
                }
            }
            C::Sparsify => {
                if method == Method::Leverage {
                    reject(self.k.len() > 1, "more than one --k", cmd, na)?;
                } else {
                    reject(!self.k.is_empty(), "--k", cmd, "is only used by leverage sampling")?;
                }
            }
            C::Coarsen => reject(!self.k.is_empty(), "--k", cmd, na)?,
            C::VerifyBounds => {}
        }

        // coarsening schedule
        let schedule = if method.coarsens() {
            if self.epsilon.is_empty() {
                return Err(CliError::Config(format!("--epsilon is required for `{}`", cmd.name())));
            }
            if cmd == C::VerifyBounds {
                reject(self.levels.is_some(), "--levels", cmd, na)?;
                self.epsilon.clone()
            } else {
                match self.levels {
                    None => self.epsilon.clone(),
                    Some(0) => return Err(CliError::Config("--levels must be at least 1".into())),
                    Some(l) if self.epsilon.len() == 1 => vec![self.epsilon[0]; l],
                    Some(l) if self.epsilon.len() == l => self.epsilon.clone(),
                    Some(l) => {
                        return Err(CliError::Config(format!(
                            "--levels {l} does not match {} epsilon values",
                            self.epsilon.len()
                        )))
                    }
                }
            }
        } else {
            reject(!self.epsilon.is_empty(), "--epsilon", cmd, "is only used by coarsening methods")?;
            reject(self.levels.is_some(), "--levels", cmd, "is only used by coarsening methods")?;
            reject(self.criterion.is_some(), "--criterion", cmd, "is only used by coarsening methods")?;
            reject(self.visit_order.is_some(), "--visit-order", cmd, "is only used by coarsening methods")?;
            Vec::new()
        };
        if cmd == C::VerifyBounds {
            for &e in &schedule {
                CoarsenConfig::new(vec![e], 0).validate()?;
            }
        } else {
            CoarsenConfig::new(schedule.clone(), self.seed).validate()?;
        }

        // refinement
        let refine = self.refine.unwrap_or(Refine::None);
        reject(cmd != C::Svd && self.refine.is_some(), "--refine", cmd, na)?;
        reject(cmd != C::Svd && self.reference.is_some(), "--reference", cmd, na)?;
        reject(
            refine != Refine::Subspace && self.iters.is_some(),
            "--iters",
            cmd,
            "is only used with --refine subspace",
        )?;
        let iters = self.iters.unwrap_or(DEFAULT_SUBSPACE_ITERS);

        reject(cmd != C::Coarsen && self.unscaled, "--unscaled", cmd, na)?;
        reject(cmd != C::Cssp && self.integer, "--integer", cmd, na)?;
        reject(cmd != C::Sparsify && self.rank.is_some(), "--rank", cmd, na)?;
        if self.rank == Some(0) {
            return Err(CliError::Config("--rank must be at least 1".into()));
        }
        let probes = self.probes.unwrap_or(DEFAULT_PROBES);
        if probes == 0 {
            return Err(CliError::Config("--probes must be at least 1".into()));
        }

        let scaling = if self.unscaled || cmd == C::Cssp {
            ColumnScaling::Unscaled
        } else {
            ColumnScaling::Scaled
        };
        let k = if cmd == C::VerifyBounds && self.k.is_empty() {
            DEFAULT_VERIFY_KS.to_vec()
        } else {
            self.k.clone()
        };

        Ok(Plan {
            command: cmd,
            input: self.input.clone(),
            method,
            k,
            c: self.c,
            schedule,
            iters,
            refine,
            seed: self.seed,
            scaling,
            criterion: match self.criterion.unwrap_or(Criterion::Angle) {
                Criterion::Angle => MatchCriterion::Angle,
                Criterion::Heaviest => MatchCriterion::Heaviest,
            },
            visit_order: match self.visit_order.unwrap_or(Order::Random) {
                Order::Random => VisitOrder::Random,
                Order::Natural => VisitOrder::Natural,
            },
            probes,
            dense_cap: self.dense_cap.unwrap_or(hypercoarse::svd::DEFAULT_DENSE_CAP),
            reference: self.reference.clone(),
            integer: self.integer,
            rank: self.rank,
        })
    }
}
