//! Command-line surface and the flat key=value configuration layer.
//!
//! Every tunable has three sources, in priority order: explicit flag,
//! `--config` file entry, built-in default. The file is a flat list of
//! `key = value` lines using the flag spellings (kebab-case; `#` starts a
//! comment). Each experiment reads the keys it understands; keys must
//! belong to the global registry so typos fail loudly. The merged,
//! fully-resolved values are what the report embeds — re-feeding an
//! embedded config as a file reproduces the identical report.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

/// Errors that make a run impossible before any replica starts; these map
/// to exit code 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config line {line} is not `key = value`: {text:?}")]
    BadLine { line: usize, text: String },
    #[error("unknown config key {key:?} (line {line})")]
    UnknownKey { key: String, line: usize },
    #[error("config key {key:?}: cannot parse {value:?} as {ty}")]
    BadValue {
        key: String,
        value: String,
        ty: &'static str,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Every key any experiment understands. Validation is global so a config
/// file written by one experiment (or by `accept-all`) can be fed to
/// another, which simply ignores the keys it does not use.
pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "replicas",
    "budget",
    "k-max",
    "n",
    "reference",
    "seeds",
    "steps-per-seed",
    "eps",
    "k",
    "pairs",
    "ks-draws",
    "log-x",
    "r-end",
    "n-hits",
    "log-targets",
    "step-scale",
    "agreement-replicas",
    "rate-xi",
    "rate-theta",
    "profile",
];

#[derive(Parser, Debug)]
#[command(
    name = "peelab",
    version,
    about = "Monte Carlo laboratory for half-planar exploration limits",
    long_about = "Runs the laboratory's experiments over reproducible per-replica random \
                  streams and emits a report in which every estimate carries its closed-form \
                  target. Exit codes: 0 all checks pass, 1 some check failed (report still \
                  emitted), 2 invalid configuration, 3 step-budget overrun."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Master seed; each replica derives its own independent stream from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of independent replicas (default is experiment-specific).
    #[arg(long, global = true)]
    pub replicas: Option<u32>,
    /// Worker threads for replica-level parallelism (0 = all cores).
    /// Results are independent of this by construction.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Also write the rendered report to this path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report rendering for stdout and --out.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Step budget per replica where the experiment consumes raw steps
    /// (default is experiment-specific).
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Flat key=value file mirroring the flags; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the experiment's documented sample CSV here (only experiments
    /// that document one accept this).
    #[arg(long, global = true)]
    pub dump: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Jump-law checks: first moment and tail-corrected mass.
    PeelMoments {
        /// Largest jump size included in the partial sums.
        #[arg(long)]
        k_max: Option<u64>,
    },
    /// Rescaled walk endpoints vs the stable marginal, predicted-edge policy.
    PeelKs {
        /// Steps per walk.
        #[arg(long)]
        n: Option<usize>,
        /// Reference draws of the stable marginal.
        #[arg(long)]
        reference: Option<usize>,
    },
    /// Rescaled walk endpoints vs the stable marginal, percolation policy.
    PercoKs {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        reference: Option<usize>,
    },
    /// Exact boundary-ledger invariants under randomized walks.
    LedgerFuzz {
        /// Independent seeds; each runs every policy.
        #[arg(long)]
        seeds: Option<u32>,
        /// Steps per seed per policy.
        #[arg(long)]
        steps_per_seed: Option<u64>,
    },
    /// Discrete commuting count at a depth fraction of the boundary.
    Cdis {
        /// Boundary depth (edges) at which the count is read.
        #[arg(long)]
        n: Option<u64>,
        /// Depth fraction defining the threshold edge.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Growth rate of the record cascade's log-depth.
    ChainRate {
        /// Gaps averaged per replica.
        #[arg(long)]
        k: Option<u64>,
    },
    /// Quadrature and sampler self-checks of the record-gap chain.
    ChainChecks {
        /// Random (x, y) pairs for the reversibility identity.
        #[arg(long)]
        pairs: Option<u32>,
        /// Draws per sampler-vs-density comparison.
        #[arg(long)]
        ks_draws: Option<usize>,
    },
    /// Cascade commuting count at a log-depth.
    Comstable {
        /// Log-depth of the target.
        #[arg(long)]
        log_x: Option<f64>,
    },
    /// Mean first crossing time of the interface position.
    #[command(name = "z-t1")]
    ZT1 {},
    /// Long-run average of the inverse gap functional.
    ZErgodic {
        /// Diffusion-time horizon.
        #[arg(long)]
        r_end: Option<f64>,
    },
    /// Alternated-hit rates of the interface position.
    ThetaRate {
        /// Alternated hits per replica.
        #[arg(long)]
        n_hits: Option<u64>,
    },
    /// Commuting counts of the hull process at physical targets.
    Comsle {
        /// Comma-separated log-positions of the targets.
        #[arg(long, value_delimiter = ',')]
        log_targets: Option<Vec<f64>>,
        /// Step resolution: dt = step-scale · gap².
        #[arg(long)]
        step_scale: Option<f64>,
        /// Replicas for the cross-backend first-touch comparison.
        #[arg(long)]
        agreement_replicas: Option<u32>,
    },
    /// Closed-form checks of the stationary law and scale function.
    RhoChecks {},
    /// Combines the two logarithmic rates into the boundary exponent.
    Dimension {
        /// Plug in a record-cascade rate instead of simulating it.
        #[arg(long)]
        rate_xi: Option<f64>,
        /// Plug in an alternated-hit rate instead of simulating it.
        #[arg(long)]
        rate_theta: Option<f64>,
    },
    /// Runs the whole acceptance suite and emits one combined report.
    AcceptAll {
        /// quick: seconds-scale smoke profile; desk: the acceptance scale;
        /// full: criterion-literal scales where desk substitutes (the
        /// discrete count runs at its asymptotic depth — hours).
        #[arg(long, value_enum)]
        profile: Option<Profile>,
    },
}

impl Command {
    /// The experiment name as it appears in reports and config files.
    pub fn name(&self) -> &'static str {
        match self {
            Command::PeelMoments { .. } => "peel-moments",
            Command::PeelKs { .. } => "peel-ks",
            Command::PercoKs { .. } => "perco-ks",
            Command::LedgerFuzz { .. } => "ledger-fuzz",
            Command::Cdis { .. } => "cdis",
            Command::ChainRate { .. } => "chain-rate",
            Command::ChainChecks { .. } => "chain-checks",
            Command::Comstable { .. } => "comstable",
            Command::ZT1 {} => "z-t1",
            Command::ZErgodic { .. } => "z-ergodic",
            Command::ThetaRate { .. } => "theta-rate",
            Command::Comsle { .. } => "comsle",
            Command::RhoChecks {} => "rho-checks",
            Command::Dimension { .. } => "dimension",
            Command::AcceptAll { .. } => "accept-all",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Quick,
    Desk,
    Full,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Quick => "quick",
            Profile::Desk => "desk",
            Profile::Full => "full",
        }
    }
}

impl FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quick" => Ok(Profile::Quick),
            "desk" => Ok(Profile::Desk),
            "full" => Ok(Profile::Full),
            other => Err(format!("unknown profile {other:?}")),
        }
    }
}

impl Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The parsed `--config` file.
#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<FileConfig, ConfigError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        FileConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<FileConfig, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::BadLine {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            // Accept snake_case spellings of the kebab-case keys.
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { key, line: i + 1 });
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { entries })
    }

    fn get<T: FromStr>(&self, key: &str, ty: &'static str) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: v.clone(),
                ty,
            }),
        }
    }
}

/// Three-way merge of one experiment's tunables, recording every resolved
/// value so the report's config is complete and re-runnable.
pub struct Merge<'a> {
    file: &'a FileConfig,
    pub effective: BTreeMap<String, String>,
}

impl<'a> Merge<'a> {
    pub fn new(file: &'a FileConfig) -> Merge<'a> {
        Merge {
            file,
            effective: BTreeMap::new(),
        }
    }

    /// flag > file > default; the winner lands in the effective map.
    pub fn pick<T: FromStr + Display>(
        &mut self,
        key: &'static str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, ConfigError> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered key {key}");
        let value = match flag {
            Some(v) => v,
            None => self.file.get::<T>(key, std::any::type_name::<T>())?.unwrap_or(default),
        };
        self.effective.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Like [`Merge::pick`] for an optional tunable with no default.
    pub fn pick_optional<T: FromStr + Display>(
        &mut self,
        key: &'static str,
        flag: Option<T>,
    ) -> Result<Option<T>, ConfigError> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered key {key}");
        let value = match flag {
            Some(v) => Some(v),
            None => self.file.get::<T>(key, std::any::type_name::<T>())?,
        };
        if let Some(v) = &value {
            self.effective.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    /// Comma-separated list variant (`log-targets`).
    pub fn pick_list(
        &mut self,
        key: &'static str,
        flag: Option<Vec<f64>>,
        default: &[f64],
    ) -> Result<Vec<f64>, ConfigError> {
        let value = match flag {
            Some(v) => v,
            None => match self.file.entries.get(key) {
                None => default.to_vec(),
                Some(raw) => raw
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(|_| ConfigError::BadValue {
                        key: key.to_string(),
                        value: raw.clone(),
                        ty: "comma-separated f64 list",
                    })?,
            },
        };
        let rendered = value
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        self.effective.insert(key.to_string(), rendered);
        Ok(value)
    }
}
