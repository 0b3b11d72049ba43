//! Rayleigh, Bingham and packing statistics and their minimum-p-value
//! combination.
//!
//! All three statistics are functions of the pairwise inner products
//! `X_i^T X_j`, `i < j`, so a single [`PairwiseSummary`] pass feeds them all.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::dot;
use crate::nulldist::{upper_p_value, NullLaw};
use crate::sampling::SphericalSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Rayleigh,
    Bingham,
    Packing,
    #[serde(rename = "fisher")]
    FisherCombination,
}

impl TestKind {
    pub const ALL: [TestKind; 4] = [
        TestKind::Rayleigh,
        TestKind::Bingham,
        TestKind::Packing,
        TestKind::FisherCombination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Rayleigh => "rayleigh",
            TestKind::Bingham => "bingham",
            TestKind::Packing => "packing",
            TestKind::FisherCombination => "fisher",
        }
    }

    /// Null law of an individual test; `None` for the combination.
    pub fn null_law(self) -> Option<NullLaw> {
        match self {
            TestKind::Rayleigh | TestKind::Bingham => Some(NullLaw::StandardNormal),
            TestKind::Packing => Some(NullLaw::PackingGumbel),
            TestKind::FisherCombination => None,
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown test `{s}`")))
    }
}

/// Kernel sums over the pairs `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseSummary {
    pub n: usize,
    pub p: usize,
    /// Sum of `X_i^T X_j`.
    pub sum_inner: f64,
    /// Sum of `(X_i^T X_j)^2`.
    pub sum_inner_sq: f64,
    /// Max of `|X_i^T X_j|`.
    pub max_abs_inner: f64,
}

impl PairwiseSummary {
    pub fn pair_count(&self) -> f64 {
        let n = self.n as f64;
        n * (n - 1.0) / 2.0
    }

    /// Whether the Gumbel limit of the packing statistic is meaningful
    /// (`n >= 3`).
    pub fn packing_null_applies(&self) -> bool {
        self.n >= 3
    }
}

/// One pass over the upper triangle of the Gram matrix.
///
/// The inner products are sorted before summation, so the sums depend only
/// on their multiset and are bit-identical under any row permutation.
pub fn pairwise_summary(sample: &SphericalSample) -> Result<PairwiseSummary> {
    let (n, p) = (sample.n(), sample.p());
    if n < 2 {
        return Err(Error::domain(format!("pairwise statistics need n >= 2, got {n}")));
    }

    let mut gram = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let xi = sample.row(i);
        for j in (i + 1)..n {
            gram.push(dot(xi, sample.row(j)));
        }
    }
    gram.sort_unstable_by(f64::total_cmp);

    let mut sum_inner = 0.0;
    let mut sum_inner_sq = 0.0;
    for g in &gram {
        sum_inner += g;
        sum_inner_sq += g * g;
    }
    let max_abs_inner = match (gram.first(), gram.last()) {
        (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
        _ => 0.0,
    };

    Ok(PairwiseSummary {
        n,
        p,
        sum_inner,
        sum_inner_sq,
        max_abs_inner,
    })
}

/// `R_n = sqrt(2p)/n * sum_{i<j} X_i^T X_j`.
pub fn rayleigh_statistic(summary: &PairwiseSummary) -> f64 {
    (2.0 * summary.p as f64).sqrt() / summary.n as f64 * summary.sum_inner
}

/// `B_n = p/n * sum_{i<j} [(X_i^T X_j)^2 - 1/p]`.
pub fn bingham_statistic(summary: &PairwiseSummary) -> f64 {
    let p = summary.p as f64;
    (p * summary.sum_inner_sq - summary.pair_count()) / summary.n as f64
}

/// `P_n = p * max_{i<j} (X_i^T X_j)^2 - 4 ln n + ln ln n`.
///
/// Defined for `n >= 2`; at `n = 2` a warning is logged because the Gumbel
/// null does not apply.
pub fn packing_statistic(summary: &PairwiseSummary) -> Result<f64> {
    if summary.n < 2 {
        return Err(Error::domain(format!(
            "packing statistic needs n >= 2, got {}",
            summary.n
        )));
    }
    if !summary.packing_null_applies() {
        tracing::warn!(n = summary.n, "packing statistic at n = 2 has no meaningful null law");
    }
    let n = summary.n as f64;
    let m = summary.max_abs_inner;
    Ok(summary.p as f64 * m * m - 4.0 * n.ln() + n.ln().ln())
}

/// Result of one test at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: TestKind,
    /// For the combination this is `C_n`, the smallest individual p-value.
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub level: f64,
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1), got {level}")));
    }
    Ok(())
}

/// Rejection threshold for the minimum of three p-values:
/// `1 - (1 - level)^{1/3}`.
pub fn fisher_threshold(level: f64) -> Result<f64> {
    check_level(level)?;
    // -expm1(ln(1-level)/3) avoids cancellation for small levels.
    Ok(-((-level).ln_1p() / 3.0).exp_m1())
}

/// Upper-tail outcome of one individual test.
pub fn individual_outcome(test: TestKind, statistic: f64, level: f64) -> Result<TestOutcome> {
    check_level(level)?;
    let law = test
        .null_law()
        .ok_or_else(|| Error::domain("the combination test has no single null law"))?;
    let p_value = upper_p_value(law, statistic)?;
    Ok(TestOutcome {
        test,
        statistic,
        p_value,
        reject: p_value <= level,
        level,
    })
}

/// Minimum-p-value combination of the three individual tests.
///
/// Rejects when `C_n = min(p_R, p_B, p_P) <= 1 - (1 - level)^{1/3}`. The
/// reported p-value is `1 - (1 - C_n)^3`, which is `<= level` exactly when
/// the threshold rule rejects.
pub fn fisher_combination(p_rayleigh: f64, p_bingham: f64, p_packing: f64, level: f64) -> Result<TestOutcome> {
    let threshold = fisher_threshold(level)?;
    let ps = [p_rayleigh, p_bingham, p_packing];
    if let Some(bad) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::domain(format!("p-values must lie in [0, 1], got {bad}")));
    }
    let c = ps.into_iter().fold(1.0, f64::min);
    let p_value = (-(3.0 * (-c).ln_1p()).exp_m1()).clamp(0.0, 1.0);
    Ok(TestOutcome {
        test: TestKind::FisherCombination,
        statistic: c,
        p_value,
        reject: c <= threshold,
        level,
    })
}

/// The four outcomes, in `TestKind::ALL` order, from an existing summary.
pub fn outcomes_from_summary(summary: &PairwiseSummary, level: f64) -> Result<[TestOutcome; 4]> {
    let r = individual_outcome(TestKind::Rayleigh, rayleigh_statistic(summary), level)?;
    let b = individual_outcome(TestKind::Bingham, bingham_statistic(summary), level)?;
    let pk = individual_outcome(TestKind::Packing, packing_statistic(summary)?, level)?;
    let f = fisher_combination(r.p_value, b.p_value, pk.p_value, level)?;
    Ok([r, b, pk, f])
}

/// Computes the pairwise summary once and runs all four tests.
pub fn run_all_tests(sample: &SphericalSample, level: f64) -> Result<Vec<TestOutcome>> {
    check_level(level)?;
    if sample.n() < 3 {
        return Err(Error::domain(format!(
            "running the tests needs n >= 3, got {}",
            sample.n()
        )));
    }
    let summary = pairwise_summary(sample)?;
    Ok(outcomes_from_summary(&summary, level)?.to_vec())
}
