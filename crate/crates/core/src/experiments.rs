//! Seeded Monte Carlo experiments: rejection rates and the asymptotic
//! diagnostics (Rayleigh blindness, Bingham scaling, packing law of large
//! numbers, asymptotic independence, packing blindness under FvML).
//!
//! Replication `i` always draws from `SeedSpec::new(master_seed, i)`, and
//! per-replication records are gathered in index order before aggregation,
//! so results do not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nulldist::NullLaw;
use crate::oracles::null_max_reference;
use crate::sampling::{
    derive_master_seed, random_unit_vector, sample_fvml_with_rng, AlternativeModel, HeavyTailMarginal, SeedSpec,
    SphericalSample,
};
use crate::statistics::{
    bingham_statistic, outcomes_from_summary, packing_statistic, pairwise_summary, rayleigh_statistic, TestKind,
};
use crate::{Error, Result};

/// Replication count used when none is given.
pub const DEFAULT_REPLICATIONS: u64 = 2000;

/// Salt for the independent stream family of matched null runs.
const MATCHED_NULL_SALT: u64 = 0x6e75_6c6c;

// ---------------------------------------------------------------------------
// Plans and per-replication records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n: usize,
    pub p: usize,
    pub model: AlternativeModel,
    pub replications: u64,
    pub level: f64,
    pub master_seed: u64,
    pub tests: Vec<TestKind>,
}

impl ExperimentPlan {
    /// All four tests at the default replication count.
    pub fn new(n: usize, p: usize, model: AlternativeModel, level: f64, master_seed: u64) -> Self {
        Self {
            n,
            p,
            model,
            replications: DEFAULT_REPLICATIONS,
            level,
            master_seed,
            tests: TestKind::ALL.to_vec(),
        }
    }

    pub fn with_replications(mut self, replications: u64) -> Self {
        self.replications = replications;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.n, self.p, self.replications, self.level)?;
        if self.tests.is_empty() {
            return Err(Error::domain("plan selects no tests"));
        }
        self.model.validate(self.p)
    }
}

fn check_common(n: usize, p: usize, replications: u64, level: f64) -> Result<()> {
    if replications == 0 {
        return Err(Error::domain("replications must be >= 1"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1), got {level}")));
    }
    if n < 3 || p == 0 {
        return Err(Error::domain(format!(
            "experiments need n >= 3 and p >= 1, got n={n}, p={p}"
        )));
    }
    Ok(())
}

/// Everything recorded for one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rayleigh: f64,
    pub bingham: f64,
    pub packing: f64,
    /// `C_n`, the smallest of the three p-values.
    pub min_p_value: f64,
    pub max_abs_inner: f64,
    /// Reject flags in `TestKind::ALL` order.
    pub rejects: [bool; 4],
}

impl ReplicationRecord {
    fn statistic(&self, test: TestKind) -> f64 {
        match test {
            TestKind::Rayleigh => self.rayleigh,
            TestKind::Bingham => self.bingham,
            TestKind::Packing => self.packing,
            TestKind::FisherCombination => self.min_p_value,
        }
    }

    fn rejected(&self, test: TestKind) -> bool {
        self.rejects[TestKind::ALL.iter().position(|t| *t == test).expect("listed")]
    }
}

fn record_for(sample: &SphericalSample, level: f64) -> Result<ReplicationRecord> {
    let summary = pairwise_summary(sample)?;
    let outcomes = outcomes_from_summary(&summary, level)?;
    Ok(ReplicationRecord {
        rayleigh: rayleigh_statistic(&summary),
        bingham: bingham_statistic(&summary),
        packing: packing_statistic(&summary)?,
        min_p_value: outcomes[3].statistic,
        max_abs_inner: summary.max_abs_inner,
        rejects: outcomes.map(|o| o.reject),
    })
}

/// Runs `replications` independent replications on the current rayon pool.
///
/// `draw` receives the replication's private generator. Records come back in
/// replication order; the first failure (by index) is reported.
pub fn simulate<F>(replications: u64, master_seed: u64, level: f64, draw: F) -> Result<Vec<ReplicationRecord>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<SphericalSample> + Sync,
{
    let results: Vec<Result<ReplicationRecord>> = (0..replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeedSpec::new(master_seed, i).rng();
            draw(&mut rng)
                .and_then(|s| record_for(&s, level))
                .map_err(|e| Error::Replication {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect();
    results.into_iter().collect()
}

/// Runs `f` on a dedicated pool with `threads` workers (`0` = rayon default).
pub fn with_thread_pool<T, F>(threads: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

// ---------------------------------------------------------------------------
// Small descriptive statistics
// ---------------------------------------------------------------------------

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (denominator `len - 1`); zero for one value.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile of already sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(xs: &[f64], q: f64) -> f64 {
    quantile_sorted(&sorted(xs), q)
}

/// Pearson correlation; zero when either input is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov distance to a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let s = sorted(xs);
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let (a, b) = (sorted(xs), sorted(ys));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov tail `P(K > lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // Series converges slowly here and the tail is 1 to double precision.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Approximate p-value of a one-sample KS distance `d` over `n` points
/// (Stephens' small-sample correction).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

// ---------------------------------------------------------------------------
// Rejection experiments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticSummary {
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
}

impl StatisticSummary {
    fn of(xs: &[f64]) -> Self {
        let s = sorted(xs);
        Self {
            mean: mean(xs),
            sd: std_dev(xs),
            q05: quantile_sorted(&s, 0.05),
            q25: quantile_sorted(&s, 0.25),
            median: quantile_sorted(&s, 0.5),
            q75: quantile_sorted(&s, 0.75),
            q95: quantile_sorted(&s, 0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRejection {
    pub test: TestKind,
    pub rejections: u64,
    pub rejection_rate: f64,
    /// Binomial standard error `sqrt(r (1 - r) / replications)`.
    pub standard_error: f64,
    /// Distribution of the statistic over replications (for the combination,
    /// of the smallest p-value).
    pub statistic: StatisticSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub plan: ExperimentPlan,
    pub replications_completed: u64,
    pub tests: Vec<TestRejection>,
}

impl ExperimentResult {
    pub fn get(&self, test: TestKind) -> Option<&TestRejection> {
        self.tests.iter().find(|t| t.test == test)
    }

    pub fn rate(&self, test: TestKind) -> Option<f64> {
        self.get(test).map(|t| t.rejection_rate)
    }
}

pub fn rejection_standard_error(rate: f64, replications: u64) -> f64 {
    (rate * (1.0 - rate) / replications as f64).sqrt()
}

fn tally(test: TestKind, records: &[ReplicationRecord]) -> TestRejection {
    let reps = records.len() as u64;
    let rejections = records.iter().filter(|r| r.rejected(test)).count() as u64;
    let rate = rejections as f64 / reps as f64;
    let stats: Vec<f64> = records.iter().map(|r| r.statistic(test)).collect();
    TestRejection {
        test,
        rejections,
        rejection_rate: rate,
        standard_error: rejection_standard_error(rate, reps),
        statistic: StatisticSummary::of(&stats),
    }
}

/// Samples the plan's model once per replication and tallies rejections.
pub fn run_rejection_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let (n, p) = (plan.n, plan.p);
    let records = simulate(plan.replications, plan.master_seed, plan.level, |rng| {
        plan.model.sample_with_rng(n, p, rng)
    })?;
    let mut tests: Vec<TestKind> = plan.tests.clone();
    tests.sort();
    tests.dedup();
    Ok(ExperimentResult {
        plan: plan.clone(),
        replications_completed: records.len() as u64,
        tests: tests.into_iter().map(|t| tally(t, &records)).collect(),
    })
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    RayleighBlindness,
    BinghamScaling,
    PackingLln,
    Independence,
    FvmlBlindness,
}

impl DiagnosticKind {
    pub const ALL: [DiagnosticKind; 5] = [
        DiagnosticKind::RayleighBlindness,
        DiagnosticKind::BinghamScaling,
        DiagnosticKind::PackingLln,
        DiagnosticKind::Independence,
        DiagnosticKind::FvmlBlindness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DiagnosticKind::RayleighBlindness => "rayleigh-blindness",
            DiagnosticKind::BinghamScaling => "bingham-scaling",
            DiagnosticKind::PackingLln => "packing-lln",
            DiagnosticKind::Independence => "independence",
            DiagnosticKind::FvmlBlindness => "fvml-blindness",
        }
    }
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiagnosticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DiagnosticKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let valid: Vec<_> = DiagnosticKind::ALL.iter().map(|k| k.name()).collect();
            Error::domain(format!("unknown diagnostic `{s}`; valid kinds: {}", valid.join(", ")))
        })
    }
}

/// Shared Monte Carlo settings of the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticConfig {
    pub n: usize,
    pub p: usize,
    pub replications: u64,
    pub level: f64,
    pub master_seed: u64,
}

impl DiagnosticConfig {
    pub fn new(n: usize, p: usize, replications: u64, master_seed: u64) -> Self {
        Self {
            n,
            p,
            replications,
            level: 0.05,
            master_seed,
        }
    }

    fn validate(&self) -> Result<()> {
        check_common(self.n, self.p, self.replications, self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub kind: DiagnosticKind,
    pub config: DiagnosticConfig,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DiagnosticReport {
    fn new(kind: DiagnosticKind, config: DiagnosticConfig) -> Self {
        Self {
            kind,
            config,
            metrics: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_owned(), value);
    }

    /// Panics if the metric was never set; keys are fixed per kind.
    pub fn metric(&self, key: &str) -> f64 {
        *self
            .metrics
            .get(key)
            .unwrap_or_else(|| panic!("diagnostic {} has no metric `{key}`", self.kind))
    }

    fn finish(self) -> Result<Self> {
        if let Some((k, v)) = self.metrics.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Internal(format!("diagnostic metric `{k}` is not finite: {v}")));
        }
        Ok(self)
    }
}

fn rate_of(records: &[ReplicationRecord], test: TestKind) -> f64 {
    records.iter().filter(|r| r.rejected(test)).count() as f64 / records.len() as f64
}

fn symmetric_index(marginal: &HeavyTailMarginal) -> Result<f64> {
    marginal.validate()?;
    if !marginal.is_symmetric() {
        return Err(Error::domain(
            "this diagnostic needs a symmetric marginal; the centred chi-squared control is asymmetric",
        ));
    }
    Ok(marginal
        .tail_index()
        .expect("symmetric marginals are regularly varying"))
}

fn alpha_model(marginal: HeavyTailMarginal) -> AlternativeModel {
    AlternativeModel::AlphaSpherical { marginal }
}

/// Distribution of `R_n` under a symmetric alpha-spherical law, compared with
/// its uniform-null limit N(0, 1).
pub fn run_rayleigh_blindness_diagnostic(
    cfg: &DiagnosticConfig,
    marginal: HeavyTailMarginal,
) -> Result<DiagnosticReport> {
    cfg.validate()?;
    let alpha = symmetric_index(&marginal)?;
    let model = alpha_model(marginal);
    let records = simulate(cfg.replications, cfg.master_seed, cfg.level, |rng| {
        model.sample_with_rng(cfg.n, cfg.p, rng)
    })?;
    let r: Vec<f64> = records.iter().map(|x| x.rayleigh).collect();
    let d = ks_distance(&r, |x| NullLaw::StandardNormal.cdf(x).unwrap_or(f64::NAN));
    let rate = rate_of(&records, TestKind::Rayleigh);

    let mut rep = DiagnosticReport::new(DiagnosticKind::RayleighBlindness, *cfg);
    rep.set("tail_index", alpha);
    rep.set("ks_distance", d);
    rep.set("ks_p_value", ks_p_value(d, r.len()));
    rep.set("rejection_rate", rate);
    rep.set("rejection_se", rejection_standard_error(rate, cfg.replications));
    rep.set("mean", mean(&r));
    rep.set("sd", std_dev(&r));
    rep.finish()
}

/// Spread of `sqrt(n)/p * B_n` under a symmetric alpha-spherical law against
/// the limiting standard deviation `(2 - alpha) / sqrt(8 gamma)`, `gamma = p/n`.
pub fn run_bingham_scaling_diagnostic(cfg: &DiagnosticConfig, marginal: HeavyTailMarginal) -> Result<DiagnosticReport> {
    cfg.validate()?;
    let alpha = symmetric_index(&marginal)?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!(
            "tail index must lie in (0, 2) for Bingham scaling, got {alpha}"
        )));
    }
    let model = alpha_model(marginal);
    let records = simulate(cfg.replications, cfg.master_seed, cfg.level, |rng| {
        model.sample_with_rng(cfg.n, cfg.p, rng)
    })?;
    let (nf, pf) = (cfg.n as f64, cfg.p as f64);
    let gamma = pf / nf;
    let scaled: Vec<f64> = records.iter().map(|x| nf.sqrt() / pf * x.bingham).collect();
    let sd = std_dev(&scaled);
    let theory = (2.0 - alpha) / (8.0 * gamma).sqrt();
    let rate = rate_of(&records, TestKind::Bingham);

    let mut rep = DiagnosticReport::new(DiagnosticKind::BinghamScaling, *cfg);
    rep.set("tail_index", alpha);
    rep.set("gamma", gamma);
    rep.set("scaled_mean", mean(&scaled));
    rep.set("scaled_mean_se", sd / (scaled.len() as f64).sqrt());
    rep.set("scaled_sd", sd);
    rep.set("theoretical_sd", theory);
    rep.set("sd_ratio", sd / theory);
    rep.set("rejection_rate", rate);
    rep.set("rejection_se", rejection_standard_error(rate, cfg.replications));
    rep.finish()
}

/// Size of the largest `|X_i^T X_j|` under `model`, against the uniform
/// reference `sqrt(4 ln n / p)`.
pub fn run_packing_lln_diagnostic(cfg: &DiagnosticConfig, model: &AlternativeModel) -> Result<DiagnosticReport> {
    cfg.validate()?;
    model.validate(cfg.p)?;
    let records = simulate(cfg.replications, cfg.master_seed, cfg.level, |rng| {
        model.sample_with_rng(cfg.n, cfg.p, rng)
    })?;
    let m: Vec<f64> = records.iter().map(|x| x.max_abs_inner).collect();
    let reference = null_max_reference(cfg.n, cfg.p)?;
    let median = quantile(&m, 0.5);
    let rate = rate_of(&records, TestKind::Packing);

    let mut rep = DiagnosticReport::new(DiagnosticKind::PackingLln, *cfg);
    rep.set("median_max_abs_inner", median);
    rep.set("p10_max_abs_inner", quantile(&m, 0.1));
    rep.set("null_reference", reference);
    rep.set("median_to_reference", median / reference);
    rep.set("packing_rate", rate);
    rep.set("packing_se", rejection_standard_error(rate, cfg.replications));
    rep.finish()
}

/// Dependence between `R_n`, `B_n` and `P_n` under uniformity.
///
/// The joint probability uses each statistic's empirical median as cutoff,
/// so every marginal probability is 1/2 and independence predicts 1/8.
pub fn run_independence_diagnostic(cfg: &DiagnosticConfig) -> Result<DiagnosticReport> {
    cfg.validate()?;
    let records = simulate(cfg.replications, cfg.master_seed, cfg.level, |rng| {
        AlternativeModel::Uniform.sample_with_rng(cfg.n, cfg.p, rng)
    })?;
    let r: Vec<f64> = records.iter().map(|x| x.rayleigh).collect();
    let b: Vec<f64> = records.iter().map(|x| x.bingham).collect();
    let pk: Vec<f64> = records.iter().map(|x| x.packing).collect();
    let (mr, mb, mp) = (quantile(&r, 0.5), quantile(&b, 0.5), quantile(&pk, 0.5));
    let joint = records
        .iter()
        .filter(|x| x.rayleigh <= mr && x.bingham <= mb && x.packing <= mp)
        .count() as f64
        / records.len() as f64;
    let fisher = rate_of(&records, TestKind::FisherCombination);

    let mut rep = DiagnosticReport::new(DiagnosticKind::Independence, *cfg);
    let log_n = (cfg.n as f64).ln();
    if (cfg.p as f64) < 5.0 * log_n * log_n {
        rep.warnings.push(format!(
            "p = {} is below 5 (ln n)^2 = {:.1}; asymptotic independence may be far off",
            cfg.p,
            5.0 * log_n * log_n
        ));
    }
    rep.set("corr_rb", pearson(&r, &b));
    rep.set("corr_rp", pearson(&r, &pk));
    rep.set("corr_bp", pearson(&b, &pk));
    rep.set("joint_probability", joint);
    rep.set("joint_vs_product_gap", joint - 0.125);
    rep.set("fisher_size", fisher);
    rep.set("fisher_se", rejection_standard_error(fisher, cfg.replications));
    rep.finish()
}

/// Packing and Rayleigh rejection rates under FvML at the concentration
/// `kappa = tau p^{3/4} / sqrt(n)`, each against a matched uniform run with
/// the same `(n, p)` and replication count.
///
/// Every replication draws a fresh uniformly random direction.
pub fn run_fvml_packing_blindness(cfg: &DiagnosticConfig, tau: f64) -> Result<DiagnosticReport> {
    cfg.validate()?;
    if cfg.p < 2 {
        return Err(Error::Unsupported("FvML needs p >= 2".into()));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("tau must be finite and >= 0, got {tau}")));
    }
    let (n, p) = (cfg.n, cfg.p);
    let kappa = tau * (p as f64).powf(0.75) / (n as f64).sqrt();
    let alt = simulate(cfg.replications, cfg.master_seed, cfg.level, |rng| {
        let direction = random_unit_vector(p, rng)?;
        sample_fvml_with_rng(n, p, kappa, &direction, rng)
    })?;
    let null_seed = derive_master_seed(cfg.master_seed, MATCHED_NULL_SALT);
    let null = simulate(cfg.replications, null_seed, cfg.level, |rng| {
        AlternativeModel::Uniform.sample_with_rng(n, p, rng)
    })?;

    let pk_alt: Vec<f64> = alt.iter().map(|x| x.packing).collect();
    let pk_null: Vec<f64> = null.iter().map(|x| x.packing).collect();
    let d = ks_two_sample(&pk_alt, &pk_null);
    let m = cfg.replications as f64;
    let eff = (m * m / (2.0 * m)).sqrt();

    let mut rep = DiagnosticReport::new(DiagnosticKind::FvmlBlindness, *cfg);
    let packing_rate = rate_of(&alt, TestKind::Packing);
    let null_packing = rate_of(&null, TestKind::Packing);
    let rayleigh_rate = rate_of(&alt, TestKind::Rayleigh);
    let null_rayleigh = rate_of(&null, TestKind::Rayleigh);
    rep.set("tau", tau);
    rep.set("kappa", kappa);
    rep.set("packing_rate", packing_rate);
    rep.set("null_packing_rate", null_packing);
    rep.set("packing_rate_gap", packing_rate - null_packing);
    rep.set("rayleigh_rate", rayleigh_rate);
    rep.set("null_rayleigh_rate", null_rayleigh);
    rep.set("rayleigh_rate_gap", rayleigh_rate - null_rayleigh);
    rep.set("ks_packing_vs_null", d);
    rep.set(
        "ks_packing_vs_null_p_value",
        kolmogorov_sf((eff + 0.12 + 0.11 / eff) * d),
    );
    rep.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptive_helpers() {
        let xs = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((std_dev(&xs) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(quantile(&xs, 0.5), 2.5);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert!((pearson(&xs, &xs) - 1.0).abs() < 1e-15);
        assert!((pearson(&xs, &[-3.0, -1.0, -2.0, -4.0]) + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&xs, &[1.0; 4]), 0.0);
    }

    #[test]
    fn ks_helpers() {
        // Uniform grid midpoints against the U(0,1) CDF: distance 1/(2n).
        let xs: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert!((ks_distance(&xs, |x| x) - 0.05).abs() < 1e-15);
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
        // P(K > 1.6276) = 0.01.
        assert!((kolmogorov_sf(1.627_6) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn plan_validation() {
        let ok = ExperimentPlan::new(10, 5, AlternativeModel::Uniform, 0.05, 1);
        assert!(ok.validate().is_ok());
        assert!(ok.clone().with_replications(0).validate().is_err());
        assert!(ExperimentPlan {
            level: 1.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentPlan { n: 2, ..ok.clone() }.validate().is_err());
        assert!(ExperimentPlan {
            tests: vec![],
            ..ok.clone()
        }
        .validate()
        .is_err());
        let bad_model = AlternativeModel::AlphaSpherical {
            marginal: HeavyTailMarginal::Pareto { alpha: 3.0 },
        };
        assert!(ExperimentPlan { model: bad_model, ..ok }.validate().is_err());
    }

    #[test]
    fn single_replication_rates_are_binary() {
        let plan = ExperimentPlan::new(20, 10, AlternativeModel::Uniform, 0.05, 3).with_replications(1);
        let res = run_rejection_experiment(&plan).unwrap();
        assert_eq!(res.replications_completed, 1);
        for t in &res.tests {
            assert!(t.rejection_rate == 0.0 || t.rejection_rate == 1.0);
            assert_eq!(t.standard_error, 0.0);
        }
    }

    #[test]
    fn replication_errors_carry_index() {
        let err = simulate(5, 0, 0.05, |_| Err(Error::domain("boom"))).unwrap_err();
        match err {
            Error::Replication { index, .. } => assert_eq!(index, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn diagnostic_kind_parsing() {
        for k in DiagnosticKind::ALL {
            assert_eq!(k.name().parse::<DiagnosticKind>().unwrap(), k);
        }
        let msg = "nope".parse::<DiagnosticKind>().unwrap_err().to_string();
        assert!(msg.contains("fvml-blindness") && msg.contains("independence"));
    }

    #[test]
    fn asymmetric_marginal_is_rejected() {
        let cfg = DiagnosticConfig::new(10, 10, 5, 1);
        assert!(run_rayleigh_blindness_diagnostic(&cfg, HeavyTailMarginal::CenteredChiSq1).is_err());
        assert!(run_bingham_scaling_diagnostic(&cfg, HeavyTailMarginal::CenteredChiSq1).is_err());
        assert!(run_bingham_scaling_diagnostic(&cfg, HeavyTailMarginal::StudentT { nu: 3.0 }).is_err());
    }

    #[test]
    fn degenerate_rayleigh_report() {
        let cfg = DiagnosticConfig::new(3, 4, 20, 1);
        let rep = run_rayleigh_blindness_diagnostic(&cfg, HeavyTailMarginal::Cauchy).unwrap();
        assert!((0.0..=1.0).contains(&rep.metric("ks_distance")));
    }
}
