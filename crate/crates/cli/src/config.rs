//! Flags, config files, and the resolved settings echoed into every artifact.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sphereuni::sampling::{AlternativeModel, HeavyTailMarginal};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 20240917;
pub const DEFAULT_LEVEL: f64 = 0.05;
pub const DEFAULT_SCENARIOS: &str = "80x40,100x100,100x120";
pub const DEFAULT_POWER_MARGINALS: &str = "chisq,cauchy,t:1.5";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Any of them may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Sample size (rows)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Dimension (columns)
    #[arg(long, global = true)]
    pub p: Option<usize>,
    /// uniform | alpha-spherical | fvml
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// cauchy | chisq | t:<nu> | pareto:<alpha>; comma-separated list for power-table
    #[arg(long, global = true)]
    pub marginal: Option<String>,
    /// FvML concentration
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// FvML signal strength; kappa = tau p^(3/4) / sqrt(n)
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Monte Carlo replications
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Significance level
    #[arg(long, global = true)]
    pub level: Option<f64>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat JSON config file; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Table scenarios as NxP pairs, e.g. 100x100,100x120
    #[arg(long, global = true)]
    pub scenarios: Option<String>,
}

/// Flat key-value settings. This is both the config-file schema and the
/// shape of the config echoed into outputs, so an echoed config can be fed
/// back through `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Not echoed: results do not depend on it.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    /// Not echoed: where the artifact goes is not part of what it contains.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// `self` wins wherever it has a value.
    pub fn or(self, other: Settings) -> Settings {
        Settings {
            command: self.command.or(other.command),
            kind: self.kind.or(other.kind),
            input: self.input.or(other.input),
            n: self.n.or(other.n),
            p: self.p.or(other.p),
            scenarios: self.scenarios.or(other.scenarios),
            model: self.model.or(other.model),
            marginal: self.marginal.or(other.marginal),
            kappa: self.kappa.or(other.kappa),
            tau: self.tau.or(other.tau),
            reps: self.reps.or(other.reps),
            level: self.level.or(other.level),
            seed: self.seed.or(other.seed),
            format: self.format.or(other.format),
            threads: self.threads.or(other.threads),
            out: self.out.or(other.out),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("settings serialize")
    }
}

impl Flags {
    /// Merges the flags over the config file, if one was given.
    pub fn resolve(self) -> CliResult<Settings> {
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = Settings {
            n: self.n,
            p: self.p,
            scenarios: self.scenarios,
            model: self.model,
            marginal: self.marginal,
            kappa: self.kappa,
            tau: self.tau,
            reps: self.reps,
            level: self.level,
            seed: self.seed,
            format: self.format,
            threads: self.threads,
            out: self.out,
            ..Settings::default()
        };
        Ok(flags.or(file))
    }
}

pub fn parse_marginal(s: &str) -> CliResult<HeavyTailMarginal> {
    let s = s.trim();
    let param = |rest: &str, what: &str| {
        rest.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("marginal `{s}`: `{rest}` is not a valid {what}")))
    };
    let m = match s.split_once(':') {
        None if s == "cauchy" => HeavyTailMarginal::Cauchy,
        None if s == "chisq" => HeavyTailMarginal::CenteredChiSq1,
        Some(("t", rest)) => HeavyTailMarginal::StudentT { nu: param(rest, "nu")? },
        Some(("pareto", rest)) => HeavyTailMarginal::Pareto {
            alpha: param(rest, "alpha")?,
        },
        _ => {
            return Err(CliError::Usage(format!(
                "unknown marginal `{s}`; expected cauchy, chisq, t:<nu> or pareto:<alpha>"
            )))
        }
    };
    m.validate()?;
    Ok(m)
}

pub fn marginal_name(m: &HeavyTailMarginal) -> String {
    match m {
        HeavyTailMarginal::Cauchy => "cauchy".into(),
        HeavyTailMarginal::CenteredChiSq1 => "chisq".into(),
        HeavyTailMarginal::StudentT { nu } => format!("t:{nu}"),
        HeavyTailMarginal::Pareto { alpha } => format!("pareto:{alpha}"),
    }
}

pub fn parse_marginal_list(s: &str) -> CliResult<Vec<HeavyTailMarginal>> {
    let list = s.split(',').map(parse_marginal).collect::<CliResult<Vec<_>>>()?;
    if list.is_empty() {
        return Err(CliError::Usage("empty marginal list".into()));
    }
    Ok(list)
}

pub fn parse_scenarios(s: &str) -> CliResult<Vec<(usize, usize)>> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            item.split_once('x')
                .and_then(|(n, p)| Some((n.trim().parse().ok()?, p.trim().parse().ok()?)))
                .ok_or_else(|| CliError::Usage(format!("scenario `{item}` is not of the form NxP")))
        })
        .collect()
}

/// Builds the model named by `settings.model` (or `default_model`) and
/// records the resolved fields into `echo`.
pub fn resolve_model(
    settings: &Settings,
    default_model: &str,
    n: usize,
    p: usize,
    echo: &mut Settings,
) -> CliResult<AlternativeModel> {
    let name = settings.model.as_deref().unwrap_or(default_model);
    let model = match name {
        "uniform" => AlternativeModel::Uniform,
        "alpha-spherical" => {
            let marginal = parse_marginal(settings.marginal.as_deref().unwrap_or("cauchy"))?;
            echo.marginal = Some(marginal_name(&marginal));
            AlternativeModel::AlphaSpherical { marginal }
        }
        "fvml" => {
            let kappa = match (settings.kappa, settings.tau) {
                (Some(k), _) => k,
                (None, Some(tau)) => tau * (p as f64).powf(0.75) / (n as f64).sqrt(),
                (None, None) => return Err(CliError::Usage("model fvml needs --kappa or --tau".into())),
            };
            echo.kappa = Some(kappa);
            let mut direction = vec![0.0; p];
            if let Some(first) = direction.first_mut() {
                *first = 1.0;
            }
            AlternativeModel::Fvml { kappa, direction }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown model `{other}`; expected uniform, alpha-spherical or fvml"
            )))
        }
    };
    echo.model = Some(name.to_owned());
    model.validate(p)?;
    Ok(model)
}
