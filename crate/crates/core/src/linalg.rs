//! Small dense kernels shared by the samplers and the fast statistics path.

/// Dot product with four independent accumulators so the compiler can
/// vectorize the reduction.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail_a = chunks_a.remainder();
    let tail_b = chunks_b.remainder();
    for (x, y) in chunks_a.zip(chunks_b) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in tail_a.iter().zip(tail_b) {
        s += x * y;
    }
    s
}

/// Scales `v` to unit Euclidean norm. Returns `false` (leaving `v` untouched)
/// when the norm is zero or not finite.
pub(crate) fn normalize_in_place(v: &mut [f64]) -> bool {
    let norm = dot(v, v).sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

/// Orthonormalizes the columns of the row-major `dim x dim` matrix in place
/// with modified Gram-Schmidt, running the projection pass twice.
///
/// The implied triangular factor has a positive diagonal, which is the sign
/// convention that makes Q Haar-distributed when the input is Gaussian.
/// Returns `false` if a column collapses to zero.
pub(crate) fn orthonormalize_columns(m: &mut [f64], dim: usize) -> bool {
    debug_assert_eq!(m.len(), dim * dim);
    let col = |m: &[f64], j: usize| -> Vec<f64> { (0..dim).map(|i| m[i * dim + j]).collect() };
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = col(m, j);
        for _ in 0..2 {
            for prev in &q {
                let r = dot(prev, &v);
                for (vi, pi) in v.iter_mut().zip(prev) {
                    *vi -= r * pi;
                }
            }
        }
        if !normalize_in_place(&mut v) {
            return false;
        }
        q.push(v);
    }
    for (j, v) in q.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            m[i * dim + j] = *x;
        }
    }
    true
}
