//! Samplers on the unit sphere S^{p-1}.
//!
//! Every sampler is a pure function of its arguments and a [`SeedSpec`].
//! The `*_with_rng` variants draw from a caller-supplied generator so that
//! several draws can share one replication stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, ChiSquared, Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, normalize_in_place};
use crate::{Error, Result};

/// Maximum number of consecutive zero-norm raw vectors tolerated before a
/// marginal is declared broken.
pub const MAX_ZERO_NORM_RETRIES: usize = 100;

const UNIT_NORM_TOL: f64 = 1e-12;
const MAX_FVML_PROPOSALS: usize = 100_000;

/// Identifies one random stream: the `replication_index`-th stream of
/// `master_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replication_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replication_index: u64) -> Self {
        Self {
            master_seed,
            replication_index,
        }
    }

    /// ChaCha8 keyed by the master seed, positioned on stream
    /// `replication_index`. Streams of one key never overlap.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replication_index);
        rng
    }
}

/// Derives an unrelated master seed from `master` and a salt (SplitMix64
/// finalizer). Used when one experiment needs a second, independent family
/// of streams, e.g. a matched null run.
pub fn derive_master_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` points of S^{p-1}, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalSample {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl SphericalSample {
    /// Wraps row-major data, checking shape and that every row has unit norm
    /// within 1e-12.
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::domain(format!("sample shape must be positive, got {n}x{p}")));
        }
        if data.len() != n * p {
            return Err(Error::domain(format!(
                "expected {} values for a {n}x{p} sample, got {}",
                n * p,
                data.len()
            )));
        }
        for (i, row) in data.chunks_exact(p).enumerate() {
            let norm = dot(row, row).sqrt();
            if (norm - 1.0).abs().is_nan() || (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::domain(format!("row {i} has norm {norm}, not 1")));
            }
        }
        Ok(Self { n, p, data })
    }

    /// Builds a sample from raw rows, scaling each to unit length.
    pub fn from_rows_normalized<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        if n == 0 || p == 0 {
            return Err(Error::domain("cannot build a sample from no rows or empty rows"));
        }
        let mut data = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::domain(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            let start = data.len();
            data.extend_from_slice(row);
            if !normalize_in_place(&mut data[start..]) {
                return Err(Error::domain(format!("row {i} has zero or non-finite norm")));
            }
        }
        Ok(Self { n, p, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.data
    }

    /// Reorders rows; `order` must be a permutation of `0..n`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if order.len() != self.n
            || order
                .iter()
                .any(|&i| i >= self.n || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::domain("row order is not a permutation"));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Ok(Self { data, ..*self })
    }
}

/// Coordinate law of an alpha-spherical sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeavyTailMarginal {
    Cauchy,
    /// Student t with `nu` degrees of freedom; regularly varying with index `nu`.
    StudentT {
        nu: f64,
    },
    /// Pareto magnitude `U^{-1/alpha}` with an independent random sign.
    Pareto {
        alpha: f64,
    },
    /// (Z^2 - 1)/sqrt(2): chi-squared(1) centred and scaled to unit variance.
    /// Light (exponential) tail and asymmetric.
    CenteredChiSq1,
}

impl HeavyTailMarginal {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HeavyTailMarginal::StudentT { nu } if !(nu > 0.0 && nu.is_finite()) => {
                Err(Error::domain(format!("Student t requires nu > 0, got {nu}")))
            }
            HeavyTailMarginal::Pareto { alpha } if !(alpha > 0.0 && alpha < 2.0) => {
                Err(Error::domain(format!("Pareto requires alpha in (0, 2), got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    /// Index of regular variation of |X|, or `None` for the light-tailed
    /// control case.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            HeavyTailMarginal::Cauchy => Some(1.0),
            HeavyTailMarginal::StudentT { nu } => Some(nu),
            HeavyTailMarginal::Pareto { alpha } => Some(alpha),
            HeavyTailMarginal::CenteredChiSq1 => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, HeavyTailMarginal::CenteredChiSq1)
    }

    /// One draw. Assumes [`validate`](Self::validate) succeeded.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            HeavyTailMarginal::Cauchy => {
                let u: f64 = Open01.sample(rng);
                (std::f64::consts::PI * (u - 0.5)).tan()
            }
            HeavyTailMarginal::StudentT { nu } => {
                let z: f64 = StandardNormal.sample(rng);
                let chi2 = ChiSquared::new(nu).expect("validated nu").sample(rng);
                z / (chi2 / nu).sqrt()
            }
            HeavyTailMarginal::Pareto { alpha } => {
                let u: f64 = Open01.sample(rng);
                let magnitude = u.powf(-1.0 / alpha);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            HeavyTailMarginal::CenteredChiSq1 => {
                let z: f64 = StandardNormal.sample(rng);
                (z * z - 1.0) / std::f64::consts::SQRT_2
            }
        }
    }
}

/// A data-generating law on S^{p-1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlternativeModel {
    Uniform,
    AlphaSpherical {
        marginal: HeavyTailMarginal,
    },
    /// Fisher-von Mises-Langevin with concentration `kappa` about `direction`.
    Fvml {
        kappa: f64,
        direction: Vec<f64>,
    },
}

impl AlternativeModel {
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            AlternativeModel::Uniform => Ok(()),
            AlternativeModel::AlphaSpherical { marginal } => marginal.validate(),
            AlternativeModel::Fvml { kappa, direction } => validate_fvml(p, *kappa, direction),
        }
    }

    pub fn sample(&self, n: usize, p: usize, seed: SeedSpec) -> Result<SphericalSample> {
        self.sample_with_rng(n, p, &mut seed.rng())
    }

    pub fn sample_with_rng<R: Rng + ?Sized>(&self, n: usize, p: usize, rng: &mut R) -> Result<SphericalSample> {
        match self {
            AlternativeModel::Uniform => sample_uniform_sphere_with_rng(n, p, rng),
            AlternativeModel::AlphaSpherical { marginal } => sample_alpha_spherical_with_rng(n, p, *marginal, rng),
            AlternativeModel::Fvml { kappa, direction } => sample_fvml_with_rng(n, p, *kappa, direction, rng),
        }
    }
}

fn check_shape(n: usize, p: usize) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(Error::domain(format!("n and p must be positive, got n={n}, p={p}")));
    }
    Ok(())
}

fn fill_rows<R, F>(n: usize, p: usize, rng: &mut R, mut draw: F) -> Result<SphericalSample>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> f64,
{
    let mut data = vec![0.0; n * p];
    for row in data.chunks_exact_mut(p) {
        let mut attempts = 0;
        loop {
            for x in row.iter_mut() {
                *x = draw(rng);
            }
            if normalize_in_place(row) {
                break;
            }
            attempts += 1;
            if attempts >= MAX_ZERO_NORM_RETRIES {
                return Err(Error::Internal(format!(
                    "{MAX_ZERO_NORM_RETRIES} consecutive zero-norm draws; the marginal is degenerate"
                )));
            }
        }
    }
    Ok(SphericalSample { n, p, data })
}

/// I.i.d. uniform points: normalized standard Gaussian vectors.
pub fn sample_uniform_sphere(n: usize, p: usize, seed: SeedSpec) -> Result<SphericalSample> {
    sample_uniform_sphere_with_rng(n, p, &mut seed.rng())
}

pub fn sample_uniform_sphere_with_rng<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<SphericalSample> {
    check_shape(n, p)?;
    fill_rows(n, p, rng, |r| StandardNormal.sample(r))
}

/// `count` i.i.d. draws of the marginal.
pub fn draw_marginal(marginal: HeavyTailMarginal, count: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    marginal.validate()?;
    if count == 0 {
        return Err(Error::domain("count must be positive"));
    }
    let mut rng = seed.rng();
    Ok((0..count).map(|_| marginal.draw(&mut rng)).collect())
}

/// Rows are `(X_1, ..., X_p) / |X|` with i.i.d. coordinates from `marginal`.
pub fn sample_alpha_spherical(
    n: usize,
    p: usize,
    marginal: HeavyTailMarginal,
    seed: SeedSpec,
) -> Result<SphericalSample> {
    sample_alpha_spherical_with_rng(n, p, marginal, &mut seed.rng())
}

pub fn sample_alpha_spherical_with_rng<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    marginal: HeavyTailMarginal,
    rng: &mut R,
) -> Result<SphericalSample> {
    check_shape(n, p)?;
    marginal.validate()?;
    fill_rows(n, p, rng, |r| marginal.draw(r))
}

fn validate_fvml(p: usize, kappa: f64, direction: &[f64]) -> Result<()> {
    if p < 2 {
        return Err(Error::Unsupported("FvML sampling needs p >= 2".into()));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::domain(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    if direction.len() != p {
        return Err(Error::domain(format!(
            "direction has length {}, expected {p}",
            direction.len()
        )));
    }
    let norm = dot(direction, direction).sqrt();
    if (norm - 1.0).abs().is_nan() || (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::domain(format!("direction must have unit norm, got {norm}")));
    }
    Ok(())
}

/// FvML(kappa, direction) draws via the tangent-normal decomposition
/// `X = t*mu + sqrt(1 - t^2)*xi`.
///
/// `xi` is uniform on the equator orthogonal to `mu`; `t` has density
/// proportional to `exp(kappa t) (1 - t^2)^{(p-3)/2}` on [-1, 1] and is drawn
/// with Wood's Beta-envelope rejection sampler, which is exact.
pub fn sample_fvml(n: usize, p: usize, kappa: f64, direction: &[f64], seed: SeedSpec) -> Result<SphericalSample> {
    sample_fvml_with_rng(n, p, kappa, direction, &mut seed.rng())
}

pub fn sample_fvml_with_rng<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    kappa: f64,
    direction: &[f64],
    rng: &mut R,
) -> Result<SphericalSample> {
    check_shape(n, p)?;
    validate_fvml(p, kappa, direction)?;
    let cosine = FvmlCosine::new(p, kappa);
    let mut data = vec![0.0; n * p];
    let mut xi = vec![0.0; p];
    for row in data.chunks_exact_mut(p) {
        let t = cosine.sample(rng)?;
        let mut attempts = 0;
        loop {
            for x in xi.iter_mut() {
                *x = StandardNormal.sample(rng);
            }
            let along = dot(&xi, direction);
            for (x, m) in xi.iter_mut().zip(direction) {
                *x -= along * m;
            }
            if normalize_in_place(&mut xi) {
                break;
            }
            attempts += 1;
            if attempts >= MAX_ZERO_NORM_RETRIES {
                return Err(Error::Internal("could not draw a tangent direction".into()));
            }
        }
        let s = (1.0 - t * t).max(0.0).sqrt();
        for ((x, m), e) in row.iter_mut().zip(direction).zip(&xi) {
            *x = t * m + s * e;
        }
        if !normalize_in_place(row) {
            return Err(Error::Internal("FvML draw has zero norm".into()));
        }
    }
    Ok(SphericalSample { n, p, data })
}

/// Rejection sampler for the cosine `t = mu^T X` under FvML.
struct FvmlCosine {
    kappa: f64,
    dim_m1: f64,
    b: f64,
    x0: f64,
    c: f64,
    beta: Beta<f64>,
}

impl FvmlCosine {
    fn new(p: usize, kappa: f64) -> Self {
        let dim_m1 = (p - 1) as f64;
        // Rationalized form of (-2k + sqrt(4k^2 + (p-1)^2)) / (p-1); no cancellation for large kappa.
        let b = dim_m1 / (2.0 * kappa + (4.0 * kappa * kappa + dim_m1 * dim_m1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + dim_m1 * (1.0 - x0 * x0).ln();
        let beta = Beta::new(dim_m1 / 2.0, dim_m1 / 2.0).expect("p >= 2 gives positive shape");
        Self {
            kappa,
            dim_m1,
            b,
            x0,
            c,
            beta,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_FVML_PROPOSALS {
            let z = self.beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = Open01.sample(rng);
            if self.kappa * w + self.dim_m1 * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                return Ok(w.clamp(-1.0, 1.0));
            }
        }
        Err(Error::Internal(
            "FvML cosine sampler exceeded its proposal budget".into(),
        ))
    }
}

/// Uniform unit vector in R^p.
pub fn random_unit_vector<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(sample_uniform_sphere_with_rng(1, p, rng)?.into_inner())
}
