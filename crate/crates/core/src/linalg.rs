//! Small dense linear-algebra kit used by the rest of the engine.
//!
//! N-D vectors are plain `Vec<f64>` / `&[f64]`; the only fixed-size type is
//! [`Rotation3`], the trackball rotation. SVD work is delegated to nalgebra.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residual norm below which a Gram-Schmidt candidate is considered to lie
/// inside the span of the fixed vectors.
pub const DEGENERACY_EPS: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MathError {
    #[error("candidate vector collapses into the span of the fixed vectors (residual {0:.3e})")]
    DegenerateCandidate(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("requested {k} components from {n}-dimensional data")]
    TooManyComponents { k: usize, n: usize },
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Unit vector in the direction of `a`, or `None` when `a` is (numerically) zero.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n < DEGENERACY_EPS || !n.is_finite() {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

pub fn unit_axis(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Orthonormalizes `candidate` against the orthonormal set `fixed`.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass, so the result
/// stays orthogonal to `fixed` at round-off level even for large N.
pub fn gram_schmidt(fixed: &[Vec<f64>], candidate: &[f64]) -> Result<Vec<f64>, MathError> {
    gram_schmidt_with_residual(fixed, candidate).map(|(v, _)| v)
}

/// Like [`gram_schmidt`], also returning the norm of the residual before
/// normalization.
pub fn gram_schmidt_with_residual(fixed: &[Vec<f64>], candidate: &[f64]) -> Result<(Vec<f64>, f64), MathError> {
    let n = candidate.len();
    for f in fixed {
        if f.len() != n {
            return Err(MathError::DimensionMismatch { expected: n, got: f.len() });
        }
    }
    let mut v = candidate.to_vec();
    for _pass in 0..2 {
        for f in fixed {
            let c = dot(&v, f);
            axpy(&mut v, -c, f);
        }
    }
    let r = norm(&v);
    if r < DEGENERACY_EPS || !r.is_finite() {
        return Err(MathError::DegenerateCandidate(r));
    }
    v.iter_mut().for_each(|x| *x /= r);
    Ok((v, r))
}

/// Orthonormalizes `rows` in order (first row normalized, each later row
/// Gram-Schmidt'd against the earlier results).
pub fn orthonormalize_rows(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, MathError> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for r in rows {
        let v = gram_schmidt(&out, r)?;
        out.push(v);
    }
    Ok(out)
}

/// Completes an orthonormal set to `target` vectors by Gram-Schmidt over the
/// coordinate axes in index order.
pub fn complete_orthonormal(mut set: Vec<Vec<f64>>, n: usize, target: usize) -> Vec<Vec<f64>> {
    for k in 0..n {
        if set.len() >= target {
            break;
        }
        // Axes nearly inside the span give noisy residuals; skip them.
        if let Ok((v, r)) = gram_schmidt_with_residual(&set, &unit_axis(n, k)) {
            if r > 1e-3 {
                set.push(v);
            }
        }
    }
    set
}

/// Maps a point of the unit trackball disk onto the unit hemisphere.
/// Points outside the disk are clamped to the rim.
pub fn sphere_map(x: f64, y: f64) -> [f64; 3] {
    let r2 = x * x + y * y;
    if r2 <= 1.0 {
        [x, y, (1.0 - r2).sqrt()]
    } else {
        let r = r2.sqrt();
        [x / r, y / r, 0.0]
    }
}

#[inline]
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A proper 3×3 rotation, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rotation3 {
    pub m: [[f64; 3]; 3],
}

impl Default for Rotation3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation3 {
    pub const fn identity() -> Self {
        Self { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Rodrigues rotation about the unit `axis` by `angle` radians.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = dot3(axis, axis).sqrt();
        let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Self {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Rotation3) -> Rotation3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Rotation3 { m: out }
    }

    pub fn transpose(&self) -> Rotation3 {
        let m = &self.m;
        Rotation3 {
            m: [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]],
        }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Rotation angle in radians, in [0, π].
    pub fn angle(&self) -> f64 {
        let tr = self.m[0][0] + self.m[1][1] + self.m[2][2];
        ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }

    /// Max-abs deviation of `mᵀm` from the identity.
    pub fn orthogonality_error(&self) -> f64 {
        let p = self.transpose().then_after(self);
        let id = Rotation3::identity();
        let mut e: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                e = e.max((p.m[i][j] - id.m[i][j]).abs());
            }
        }
        e
    }

    pub fn max_abs_diff(&self, other: &Rotation3) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                e = e.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        e
    }
}

/// Smallest rotation taking unit vector `a` onto unit vector `b`.
///
/// Antipodal inputs get a half-turn about the first coordinate axis that is
/// not nearly parallel to `a`, projected orthogonal to `a`.
pub fn rotation_between(a: [f64; 3], b: [f64; 3]) -> Rotation3 {
    if a == b {
        return Rotation3::identity();
    }
    let k = cross(a, b);
    let s2 = dot3(k, k);
    let c = dot3(a, b);
    if c < 0.0 && s2 < 1e-24 {
        let mut axis = [0.0; 3];
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            let d = dot3(e, a);
            let v = [e[0] - d * a[0], e[1] - d * a[1], e[2] - d * a[2]];
            if dot3(v, v) > 0.25 {
                axis = v;
                break;
            }
        }
        return Rotation3::from_axis_angle(axis, std::f64::consts::PI);
    }
    // R = I + [k]x + [k]x^2 / (1 + c), exact for unit a, b with c > -1.
    let f = 1.0 / (1.0 + c);
    let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let kk: f64 = (0..3).map(|l| kx[i][l] * kx[l][j]).sum();
            m[i][j] = if i == j { 1.0 } else { 0.0 } + kx[i][j] + kk * f;
        }
    }
    Rotation3 { m }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    /// Unit, mutually orthogonal, ordered by decreasing variance.
    pub components: Vec<Vec<f64>>,
    /// Sample variances (n − 1 denominator), non-increasing.
    pub variances: Vec<f64>,
}

/// Principal component analysis through the SVD of the centered data matrix.
///
/// Rank-deficient input is fine: the trailing variances come out as zero and
/// the frame is completed to `k` orthonormal directions. Each component is
/// signed so that its largest-magnitude entry is positive.
pub fn pca(points: &[Vec<f64>], k: usize) -> Result<PcaResult, MathError> {
    let n = points.len();
    if n < 2 {
        return Err(MathError::TooFewPoints { needed: 2, got: n });
    }
    let dims = points[0].len();
    if k > dims {
        return Err(MathError::TooManyComponents { k, n: dims });
    }
    let mut mean = vec![0.0; dims];
    for p in points {
        if p.len() != dims {
            return Err(MathError::DimensionMismatch { expected: dims, got: p.len() });
        }
        axpy(&mut mean, 1.0, p);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, dims, |i, j| points[i][j] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let denom = (n - 1) as f64;
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let row: Vec<f64> = v_t.row(i).iter().copied().collect();
        // Re-orthogonalize against earlier components; SVD vectors for tied or
        // zero singular values are only orthogonal to round-off.
        match gram_schmidt(&components, &row) {
            Ok(v) => {
                components.push(v);
                let s = svd.singular_values[i];
                variances.push(s * s / denom);
            }
            Err(_) => break,
        }
    }
    if components.len() < k {
        components = complete_orthonormal(components, dims, k);
        variances.resize(k, 0.0);
    }
    for c in components.iter_mut() {
        let lead = c.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(PcaResult { mean, components, variances })
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j])
}

fn sorted_singular_values(m: DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// Principal angles between the spans of two orthonormal d-frames, ascending.
///
/// Cosines come from the singular values of `A·Bᵀ`, sines from the part of `B`
/// orthogonal to `A`; small angles use the sine so they stay accurate near 0.
pub fn principal_angles(frame_a: &[Vec<f64>], frame_b: &[Vec<f64>]) -> Vec<f64> {
    let d = frame_a.len().min(frame_b.len());
    if d == 0 {
        return Vec::new();
    }
    let a = rows_to_matrix(frame_a);
    let b = rows_to_matrix(frame_b);
    let cross = &a * b.transpose();
    let mut cosines = sorted_singular_values(cross.clone());
    cosines.reverse();
    let b_perp = &b - (&b * a.transpose()) * &a;
    let sines = sorted_singular_values(b_perp);

    (0..d)
        .map(|i| {
            let c = cosines.get(i).copied().unwrap_or(0.0).clamp(0.0, 1.0);
            let s = sines.get(i).copied().unwrap_or(1.0).clamp(0.0, 1.0);
            let angle = if c * c > 0.5 { s.asin() } else { c.acos() };
            angle.clamp(0.0, std::f64::consts::FRAC_PI_2)
        })
        .collect()
}

/// Max-abs deviation of the Gram matrix of `rows` from the identity.
pub fn orthonormality_error(rows: &[Vec<f64>]) -> f64 {
    let mut e: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            e = e.max((dot(a, b) - target).abs());
        }
    }
    e
}
