use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use serde::Serialize;
use sphereuni::experiments::{
    run_bingham_scaling_diagnostic, run_fvml_packing_blindness, run_independence_diagnostic,
    run_packing_lln_diagnostic, run_rayleigh_blindness_diagnostic, run_rejection_experiment, with_thread_pool,
    DiagnosticConfig, DiagnosticKind, DiagnosticReport, ExperimentPlan, ExperimentResult, DEFAULT_REPLICATIONS,
};
use sphereuni::sampling::{AlternativeModel, SeedSpec};
use sphereuni::statistics::{run_all_tests, TestKind, TestOutcome};

use crate::config::{
    marginal_name, parse_marginal, parse_marginal_list, parse_scenarios, resolve_model, Format, Settings,
    DEFAULT_LEVEL, DEFAULT_POWER_MARGINALS, DEFAULT_SCENARIOS, DEFAULT_SEED,
};
use crate::error::{CliError, CliResult};
use crate::io::{csv_artifact, emit, fmt_data, json_artifact, read_data};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Rayleigh, Bingham, packing and combined tests on a CSV data set
    Test {
        /// CSV file, one observation per row
        input: Option<PathBuf>,
    },
    /// Write a sample from a model as CSV
    Sample,
    /// Empirical sizes under uniformity for each scenario
    SizeTable,
    /// Empirical power under alpha-spherical alternatives
    PowerTable,
    /// Monte Carlo diagnostics of the limiting behaviour of the statistics
    Diagnose {
        #[arg(value_enum)]
        kind: Option<DiagnosticArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DiagnosticArg {
    RayleighBlindness,
    BinghamScaling,
    PackingLln,
    Independence,
    FvmlBlindness,
}

impl From<DiagnosticArg> for DiagnosticKind {
    fn from(a: DiagnosticArg) -> Self {
        match a {
            DiagnosticArg::RayleighBlindness => DiagnosticKind::RayleighBlindness,
            DiagnosticArg::BinghamScaling => DiagnosticKind::BinghamScaling,
            DiagnosticArg::PackingLln => DiagnosticKind::PackingLln,
            DiagnosticArg::Independence => DiagnosticKind::Independence,
            DiagnosticArg::FvmlBlindness => DiagnosticKind::FvmlBlindness,
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Test { .. } => "test",
            Command::Sample => "sample",
            Command::SizeTable => "size-table",
            Command::PowerTable => "power-table",
            Command::Diagnose { .. } => "diagnose",
        }
    }
}

pub fn run(command: Command, settings: Settings) -> CliResult<()> {
    let threads = settings.threads.unwrap_or(0);
    let out = settings.out.clone();
    let bytes = with_thread_pool(threads, || match command {
        Command::Test { ref input } => cmd_test(input.clone(), &settings),
        Command::Sample => cmd_sample(&settings),
        Command::SizeTable => cmd_size_table(&settings),
        Command::PowerTable => cmd_power_table(&settings),
        Command::Diagnose { kind } => cmd_diagnose(kind, &settings),
    })??;
    emit(out.as_deref(), &bytes)
}

/// Echo skeleton: the command name plus the output format.
fn echo_for(command: &Command, format: Format) -> Settings {
    Settings {
        command: Some(command.name().to_owned()),
        format: Some(format),
        ..Settings::default()
    }
}

fn level_of(s: &Settings) -> f64 {
    s.level.unwrap_or(DEFAULT_LEVEL)
}

#[derive(Serialize)]
struct TestArtifact<'a> {
    config: &'a Settings,
    n: usize,
    p: usize,
    normalized_rows: usize,
    outcomes: Vec<TestOutcome>,
}

fn cmd_test(input: Option<PathBuf>, s: &Settings) -> CliResult<Vec<u8>> {
    let format = s.format.unwrap_or(Format::Csv);
    let input = input
        .or_else(|| s.input.clone())
        .ok_or_else(|| CliError::Usage("test needs an input CSV path".into()))?;
    let level = level_of(s);
    let mut echo = echo_for(&Command::Test { input: None }, format);
    echo.input = Some(input.clone());
    echo.level = Some(level);

    let data = read_data(&input)?;
    let outcomes = run_all_tests(&data.sample, level)?;
    match format {
        Format::Json => json_artifact(&TestArtifact {
            config: &echo,
            n: data.sample.n(),
            p: data.sample.p(),
            normalized_rows: data.normalized_rows,
            outcomes,
        }),
        Format::Csv => {
            let header = ["test", "statistic", "p_value", "reject", "level"].map(String::from);
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.test.name().to_owned(),
                        fmt_data(o.statistic),
                        fmt_data(o.p_value),
                        o.reject.to_string(),
                        o.level.to_string(),
                    ]
                })
                .collect();
            csv_artifact(&echo.to_json(), &header, &rows)
        }
    }
}

#[derive(Serialize)]
struct SampleArtifact<'a> {
    config: &'a Settings,
    rows: Vec<&'a [f64]>,
}

fn cmd_sample(s: &Settings) -> CliResult<Vec<u8>> {
    let format = s.format.unwrap_or(Format::Csv);
    let (n, p, seed) = (s.n.unwrap_or(100), s.p.unwrap_or(100), s.seed.unwrap_or(DEFAULT_SEED));
    let mut echo = echo_for(&Command::Sample, format);
    echo.n = Some(n);
    echo.p = Some(p);
    echo.seed = Some(seed);
    let model = resolve_model(s, "uniform", n, p, &mut echo)?;
    let sample = model.sample(n, p, SeedSpec::new(seed, 0))?;
    match format {
        Format::Json => json_artifact(&SampleArtifact {
            config: &echo,
            rows: sample.rows().collect(),
        }),
        Format::Csv => {
            let rows: Vec<Vec<String>> = sample
                .rows()
                .map(|r| r.iter().map(|&x| fmt_data(x)).collect())
                .collect();
            csv_artifact(&echo.to_json(), &[], &rows)
        }
    }
}

struct TableSpec {
    scenarios: Vec<(usize, usize)>,
    reps: u64,
    level: f64,
    seed: u64,
}

fn table_spec(s: &Settings, echo: &mut Settings) -> CliResult<TableSpec> {
    // A bare --n/--p pair selects a single scenario.
    let scenarios = match (&s.scenarios, s.n, s.p) {
        (Some(list), _, _) => list.clone(),
        (None, Some(n), Some(p)) => format!("{n}x{p}"),
        _ => DEFAULT_SCENARIOS.to_owned(),
    };
    let spec = TableSpec {
        scenarios: parse_scenarios(&scenarios)?,
        reps: s.reps.unwrap_or(DEFAULT_REPLICATIONS),
        level: level_of(s),
        seed: s.seed.unwrap_or(DEFAULT_SEED),
    };
    echo.scenarios = Some(scenarios);
    echo.reps = Some(spec.reps);
    echo.level = Some(spec.level);
    echo.seed = Some(spec.seed);
    Ok(spec)
}

impl TableSpec {
    fn columns(&self) -> Vec<String> {
        self.scenarios.iter().map(|(n, p)| format!("n{n}_p{p}")).collect()
    }

    fn run(&self, model: &AlternativeModel) -> CliResult<Vec<ExperimentResult>> {
        self.scenarios
            .iter()
            .map(|&(n, p)| {
                tracing::info!(n, p, ?model, "running scenario");
                let plan = ExperimentPlan::new(n, p, model.clone(), self.level, self.seed).with_replications(self.reps);
                Ok(run_rejection_experiment(&plan)?)
            })
            .collect()
    }
}

#[derive(Serialize)]
struct TableRow {
    test: TestKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    marginal: Option<String>,
    rates: Vec<f64>,
    standard_errors: Vec<f64>,
}

#[derive(Serialize)]
struct TableArtifact<'a> {
    config: &'a Settings,
    columns: Vec<String>,
    rows: Vec<TableRow>,
}

fn table_row(test: TestKind, marginal: Option<String>, results: &[ExperimentResult]) -> TableRow {
    let cells: Vec<_> = results.iter().map(|r| r.get(test).expect("all tests run")).collect();
    TableRow {
        test,
        marginal,
        rates: cells.iter().map(|c| c.rejection_rate).collect(),
        standard_errors: cells.iter().map(|c| c.standard_error).collect(),
    }
}

fn table_artifact(format: Format, echo: &Settings, columns: Vec<String>, rows: Vec<TableRow>) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => json_artifact(&TableArtifact {
            config: echo,
            columns,
            rows,
        }),
        Format::Csv => {
            let with_marginal = rows.iter().any(|r| r.marginal.is_some());
            let mut header = vec!["test".to_owned()];
            if with_marginal {
                header.push("marginal".to_owned());
            }
            header.extend(columns);
            let lines: Vec<Vec<String>> = rows
                .into_iter()
                .map(|r| {
                    let mut line = vec![r.test.name().to_owned()];
                    line.extend(r.marginal);
                    line.extend(r.rates.iter().map(f64::to_string));
                    line
                })
                .collect();
            csv_artifact(&echo.to_json(), &header, &lines)
        }
    }
}

fn cmd_size_table(s: &Settings) -> CliResult<Vec<u8>> {
    let format = s.format.unwrap_or(Format::Csv);
    let mut echo = echo_for(&Command::SizeTable, format);
    let spec = table_spec(s, &mut echo)?;
    let results = spec.run(&AlternativeModel::Uniform)?;
    let order = [
        TestKind::FisherCombination,
        TestKind::Rayleigh,
        TestKind::Packing,
        TestKind::Bingham,
    ];
    let rows = order.into_iter().map(|t| table_row(t, None, &results)).collect();
    table_artifact(format, &echo, spec.columns(), rows)
}

fn cmd_power_table(s: &Settings) -> CliResult<Vec<u8>> {
    let format = s.format.unwrap_or(Format::Csv);
    let mut echo = echo_for(&Command::PowerTable, format);
    let spec = table_spec(s, &mut echo)?;
    let marginals = parse_marginal_list(s.marginal.as_deref().unwrap_or(DEFAULT_POWER_MARGINALS))?;
    let names: Vec<String> = marginals.iter().map(marginal_name).collect();
    echo.marginal = Some(names.join(","));

    let per_marginal = marginals
        .iter()
        .map(|&marginal| spec.run(&AlternativeModel::AlphaSpherical { marginal }))
        .collect::<CliResult<Vec<_>>>()?;
    let order = [
        TestKind::FisherCombination,
        TestKind::Rayleigh,
        TestKind::Bingham,
        TestKind::Packing,
    ];
    let mut rows = Vec::new();
    for t in order {
        for (name, results) in names.iter().zip(&per_marginal) {
            rows.push(table_row(t, Some(name.clone()), results));
        }
    }
    table_artifact(format, &echo, spec.columns(), rows)
}

#[derive(Serialize)]
struct DiagnosticArtifact<'a> {
    config: &'a Settings,
    report: DiagnosticReport,
}

fn cmd_diagnose(kind: Option<DiagnosticArg>, s: &Settings) -> CliResult<Vec<u8>> {
    let kind: DiagnosticKind = match (kind, &s.kind) {
        (Some(k), _) => k.into(),
        (None, Some(name)) => name.parse()?,
        (None, None) => {
            let valid: Vec<_> = DiagnosticKind::ALL.iter().map(|k| k.name()).collect();
            return Err(CliError::Usage(format!(
                "diagnose needs a kind; valid kinds: {}",
                valid.join(", ")
            )));
        }
    };
    let format = s.format.unwrap_or(Format::Json);
    let mut echo = echo_for(&Command::Diagnose { kind: None }, format);
    echo.kind = Some(kind.name().to_owned());
    let cfg = DiagnosticConfig {
        n: s.n.unwrap_or(100),
        p: s.p.unwrap_or(100),
        replications: s.reps.unwrap_or(DEFAULT_REPLICATIONS),
        level: level_of(s),
        master_seed: s.seed.unwrap_or(DEFAULT_SEED),
    };
    echo.n = Some(cfg.n);
    echo.p = Some(cfg.p);
    echo.reps = Some(cfg.replications);
    echo.level = Some(cfg.level);
    echo.seed = Some(cfg.master_seed);

    let report = match kind {
        DiagnosticKind::RayleighBlindness | DiagnosticKind::BinghamScaling => {
            let marginal = parse_marginal(s.marginal.as_deref().unwrap_or("cauchy"))?;
            echo.marginal = Some(marginal_name(&marginal));
            if kind == DiagnosticKind::RayleighBlindness {
                run_rayleigh_blindness_diagnostic(&cfg, marginal)?
            } else {
                run_bingham_scaling_diagnostic(&cfg, marginal)?
            }
        }
        DiagnosticKind::PackingLln => {
            let model = resolve_model(s, "alpha-spherical", cfg.n, cfg.p, &mut echo)?;
            run_packing_lln_diagnostic(&cfg, &model)?
        }
        DiagnosticKind::Independence => run_independence_diagnostic(&cfg)?,
        DiagnosticKind::FvmlBlindness => {
            let tau = s.tau.unwrap_or(1.0);
            echo.tau = Some(tau);
            run_fvml_packing_blindness(&cfg, tau)?
        }
    };
    for w in &report.warnings {
        tracing::warn!("{w}");
    }
    match format {
        Format::Json => json_artifact(&DiagnosticArtifact { config: &echo, report }),
        Format::Csv => {
            let header = ["metric", "value"].map(String::from);
            let rows: Vec<Vec<String>> = report
                .metrics
                .iter()
                .map(|(k, v)| vec![k.clone(), fmt_data(*v)])
                .collect();
            csv_artifact(&echo.to_json(), &header, &rows)
        }
    }
}
