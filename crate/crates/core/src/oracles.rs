//! Closed-form moments and brute-force recomputations used as ground truth.
//!
//! Nothing here shares code with the fast statistics path: the brute-force
//! routine has its own inner-product loop and its own formulas.

use libm::tgamma as gamma;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::orthonormalize_columns;
use crate::sampling::{SeedSpec, SphericalSample};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    /// Valid for every finite dimension.
    Exact,
    /// Leading term of a `(1 + o(1))` expansion as `p -> infinity`.
    AsymptoticLeadingOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: f64,
    pub kind: MomentKind,
    pub description: String,
}

/// `E (X_1^T X_2)^{2 tau}` for independent uniform points on S^{p-1}:
/// `(2 tau - 1)!! / prod_{i=1}^{tau} (p + 2i - 2)`.
pub fn uniform_inner_moment(p: usize, tau: usize) -> Result<MomentValue> {
    if p == 0 || tau == 0 {
        return Err(Error::domain("uniform_inner_moment needs p >= 1 and tau >= 1"));
    }
    // Interleave factors so the running product stays near 1.
    let value = (1..=tau).fold(1.0, |acc, i| acc * (2 * i - 1) as f64 / (p + 2 * i - 2) as f64);
    Ok(MomentValue {
        value,
        kind: MomentKind::Exact,
        description: format!("E(X1'X2)^{} under Unif(S^{})", 2 * tau, p - 1),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    Ok(())
}

fn binomial(p: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (p - i) as f64 / (i + 1) as f64)
}

/// Leading-order mixed even moment `E[X_{i_1}^{2k_1} ... X_{i_r}^{2k_r}]`
/// (distinct coordinates) of a symmetric alpha-spherical law:
///
/// `(alpha/2)^{r-1} prod_j Gamma(k_j - alpha/2) / (r Gamma(1 - alpha/2)^r Gamma(k))`
/// divided by `binom(p, r)`, where `k = sum_j k_j`.
pub fn alpha_mixed_moment(alpha: f64, exponents: &[usize], p: usize) -> Result<MomentValue> {
    check_alpha(alpha)?;
    let r = exponents.len();
    if r == 0 || exponents.contains(&0) {
        return Err(Error::domain("exponents must be a non-empty list of positive integers"));
    }
    if p < r {
        return Err(Error::domain(format!(
            "need p >= r distinct coordinates, got p={p}, r={r}"
        )));
    }
    let half = alpha / 2.0;
    let k: usize = exponents.iter().sum();
    let numerator = half.powi(r as i32 - 1) * exponents.iter().map(|&kj| gamma(kj as f64 - half)).product::<f64>();
    let denominator = r as f64 * gamma(1.0 - half).powi(r as i32) * gamma(k as f64);
    Ok(MomentValue {
        value: numerator / denominator / binomial(p, r),
        kind: MomentKind::AsymptoticLeadingOrder,
        description: format!("mixed moment with exponents {exponents:?}, alpha={alpha}, p={p}"),
    })
}

/// Leading-order `E (X_1^T X_2)^4 = (1/p) ((2 - alpha)/2)^2` under a
/// symmetric alpha-spherical law.
pub fn alpha_fourth_inner_moment(alpha: f64, p: usize) -> Result<MomentValue> {
    check_alpha(alpha)?;
    if p == 0 {
        return Err(Error::domain("p must be positive"));
    }
    let s = (2.0 - alpha) / 2.0;
    Ok(MomentValue {
        value: s * s / p as f64,
        kind: MomentKind::AsymptoticLeadingOrder,
        description: format!("E(X1'X2)^4 under alpha-spherical, alpha={alpha}, p={p}"),
    })
}

/// `(R_n, B_n, P_n)` by a plain double loop over pairs.
pub fn brute_statistics(sample: &SphericalSample) -> Result<(f64, f64, f64)> {
    let (n, p) = (sample.n(), sample.p());
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    let data = sample.as_slice();
    let mut linear = 0.0;
    let mut quad = 0.0;
    let mut max_sq: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut ip = 0.0;
            for k in 0..p {
                ip += data[i * p + k] * data[j * p + k];
            }
            linear += ip;
            quad += ip * ip - 1.0 / p as f64;
            max_sq = max_sq.max(ip * ip);
        }
    }
    let (nf, pf) = (n as f64, p as f64);
    let rayleigh = (2.0 * pf).sqrt() / nf * linear;
    let bingham = pf / nf * quad;
    let packing = pf * max_sq - 4.0 * nf.ln() + nf.ln().ln();
    Ok((rayleigh, bingham, packing))
}

/// `sqrt(4 ln n / p)`, the scale of `max |X_i^T X_j|` under uniformity.
pub fn null_max_reference(n: usize, p: usize) -> Result<f64> {
    if n < 3 || p == 0 {
        return Err(Error::domain(format!("need n >= 3 and p >= 1, got n={n}, p={p}")));
    }
    Ok((4.0 * (n as f64).ln() / p as f64).sqrt())
}

/// A `dim x dim` orthogonal matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl OrthogonalMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Frobenius norm of `Q^T Q - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                let qtq: f64 = (0..d).map(|k| self.get(k, a) * self.get(k, b)).sum();
                let e = qtq - if a == b { 1.0 } else { 0.0 };
                acc += e * e;
            }
        }
        acc.sqrt()
    }

    /// Right-multiplies every row of the sample: `x -> x Q`.
    pub fn rotate(&self, sample: &SphericalSample) -> Result<SphericalSample> {
        if sample.p() != self.dim {
            return Err(Error::domain(format!(
                "rotation has dimension {}, sample has p = {}",
                self.dim,
                sample.p()
            )));
        }
        let d = self.dim;
        let mut out = vec![0.0; sample.n() * d];
        for (row, dst) in sample.rows().zip(out.chunks_exact_mut(d)) {
            for (k, &x) in row.iter().enumerate() {
                let q_row = &self.data[k * d..(k + 1) * d];
                for (o, q) in dst.iter_mut().zip(q_row) {
                    *o += x * q;
                }
            }
        }
        let rows: Vec<&[f64]> = out.chunks_exact(d).collect();
        // Rotation preserves norms up to rounding; renormalize to restore the 1e-12 contract.
        SphericalSample::from_rows_normalized(&rows)
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// triangular factor's diagonal made positive.
pub fn random_rotation(p: usize, seed: SeedSpec) -> Result<OrthogonalMatrix> {
    if p == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let mut rng = seed.rng();
    for _ in 0..crate::sampling::MAX_ZERO_NORM_RETRIES {
        let mut data: Vec<f64> = (0..p * p).map(|_| StandardNormal.sample(&mut rng)).collect();
        if orthonormalize_columns(&mut data, p) {
            return Ok(OrthogonalMatrix { dim: p, data });
        }
    }
    Err(Error::Internal("Gaussian matrix was repeatedly singular".into()))
}
