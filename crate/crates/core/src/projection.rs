//! Projection basis, trackball state and the N-D → 2-D projection itself.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, axpy, dot, gram_schmidt, norm, orthonormality_error, unit_axis, MathError, PcaResult, Rotation3,
};

/// Attempts made to draw a usable random depth axis before giving up.
pub const RANDOM_Z_ATTEMPTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("selected dimensions are colinear and cannot be expressed equally")]
    ColinearSelection,
    #[error("need between 2 and {max} selected dimensions, got {got}")]
    BadSelection { got: usize, max: usize },
    #[error("dimension index {dim} out of range for {n}-dimensional data")]
    DimOutOfRange { dim: usize, n: usize },
}

/// The three orthonormal projection-plane axes (PPA-x/y/z) spanning the current
/// 3-D subspace, plus the origin points are centered at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBasis {
    pub ppa_x: Vec<f64>,
    pub ppa_y: Vec<f64>,
    pub ppa_z: Vec<f64>,
    pub origin: Vec<f64>,
}

impl ProjectionBasis {
    /// Basis spanned by the first three coordinate axes. Two-dimensional data
    /// has no depth axis; `ppa_z` is then all zeros.
    pub fn axis_aligned(n: usize) -> Self {
        if n < 3 {
            return Self { ppa_x: unit_axis(n, 0), ppa_y: unit_axis(n, 1), ppa_z: vec![0.0; n], origin: vec![0.0; n] };
        }
        Self::from_axes(n, 0, 1, 2)
    }

    pub fn from_axes(n: usize, x: usize, y: usize, z: usize) -> Self {
        Self { ppa_x: unit_axis(n, x), ppa_y: unit_axis(n, y), ppa_z: unit_axis(n, z), origin: vec![0.0; n] }
    }

    pub fn dims(&self) -> usize {
        self.ppa_x.len()
    }

    pub fn rows(&self) -> [&[f64]; 3] {
        [&self.ppa_x, &self.ppa_y, &self.ppa_z]
    }

    pub fn orthonormality_error(&self) -> f64 {
        if self.dims() < 3 {
            return orthonormality_error(&[self.ppa_x.clone(), self.ppa_y.clone()]);
        }
        orthonormality_error(&[self.ppa_x.clone(), self.ppa_y.clone(), self.ppa_z.clone()])
    }

    /// Projected 2-D column `(ppa_x[k], ppa_y[k])` of dimension `k`.
    pub fn column(&self, k: usize) -> (f64, f64) {
        (self.ppa_x[k], self.ppa_y[k])
    }

    pub fn with_origin(mut self, origin: Vec<f64>) -> Self {
        self.origin = origin;
        self
    }
}

/// Where the depth axis comes from when a basis is built from an x/y pair.
#[derive(Clone, Debug)]
pub enum ZSource<'a> {
    Random(u64),
    ThirdPc(&'a PcaResult),
    Vector(&'a [f64]),
}

/// Builds a basis from an orthonormal x/y pair, completing the depth axis by
/// Gram-Schmidt against the pair.
pub fn make_basis(xy: (&[f64], &[f64]), z_source: ZSource<'_>) -> Result<ProjectionBasis, ProjectionError> {
    let (x, y) = (xy.0.to_vec(), xy.1.to_vec());
    let n = x.len();
    if y.len() != n {
        return Err(MathError::DimensionMismatch { expected: n, got: y.len() }.into());
    }
    let fixed = [x, y];
    let z = match z_source {
        _ if n < 3 => vec![0.0; n],
        ZSource::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut last = MathError::DegenerateCandidate(0.0);
            let mut found = None;
            for _ in 0..RANDOM_Z_ATTEMPTS {
                let cand: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                match gram_schmidt(&fixed, &cand) {
                    Ok(z) => {
                        found = Some(z);
                        break;
                    }
                    Err(e) => last = e,
                }
            }
            found.ok_or(last)?
        }
        ZSource::ThirdPc(p) => {
            let c = p.components.get(2).ok_or(MathError::TooManyComponents { k: 3, n: p.components.len() })?;
            gram_schmidt(&fixed, c)?
        }
        ZSource::Vector(v) => gram_schmidt(&fixed, v)?,
    };
    let [x, y] = fixed;
    Ok(ProjectionBasis { ppa_x: x, ppa_y: y, ppa_z: z, origin: vec![0.0; n] })
}

/// Trackball rotation `T`, zoom `S = zoom·I` and basis `P`; the compound
/// projection is `M = S·T·P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackballState {
    pub rotation: Rotation3,
    pub zoom: f64,
    pub basis: ProjectionBasis,
}

impl TrackballState {
    pub fn new(basis: ProjectionBasis) -> Self {
        Self { rotation: Rotation3::identity(), zoom: 1.0, basis }
    }

    pub fn dims(&self) -> usize {
        self.basis.dims()
    }

    /// Rows of the 3×N compound matrix `M = S·T·P`.
    pub fn compound(&self) -> [Vec<f64>; 3] {
        let rows = self.basis.rows();
        let t = &self.rotation.m;
        std::array::from_fn(|i| {
            let mut r = vec![0.0; self.dims()];
            for (j, row) in rows.iter().enumerate() {
                axpy(&mut r, self.zoom * t[i][j], row);
            }
            r
        })
    }

    /// Basis with the trackball rotation folded in (`T·P`), no zoom.
    pub fn baked_basis(&self) -> ProjectionBasis {
        if self.rotation.is_identity() {
            return self.basis.clone();
        }
        let rows = self.basis.rows();
        let t = &self.rotation.m;
        let mixed: [Vec<f64>; 3] = std::array::from_fn(|i| {
            let mut r = vec![0.0; self.dims()];
            for (j, row) in rows.iter().enumerate() {
                axpy(&mut r, t[i][j], row);
            }
            r
        });
        let [x, y, z] = mixed;
        ProjectionBasis { ppa_x: x, ppa_y: y, ppa_z: z, origin: self.basis.origin.clone() }
    }
}

/// 2-D screen positions plus depth for a set of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectedCloud {
    pub xy: Vec<[f64; 2]>,
    pub z: Vec<f64>,
    pub point_ids: Vec<usize>,
}

impl ProjectedCloud {
    pub fn len(&self) -> usize {
        self.xy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xy.is_empty()
    }
}

fn project_rows(m: &[Vec<f64>; 3], origin: &[f64], p: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, (&pj, &oj)) in p.iter().zip(origin).enumerate() {
        let c = pj - oj;
        out[0] += m[0][j] * c;
        out[1] += m[1][j] * c;
        out[2] += m[2][j] * c;
    }
    out
}

/// Projects every point through `M` after subtracting the basis origin.
pub fn project(state: &TrackballState, points: &[Vec<f64>]) -> ProjectedCloud {
    project_ids(state, points, &(0..points.len()).collect::<Vec<_>>())
}

/// Projects the points selected by `ids`; `point_ids` of the result echo `ids`.
pub fn project_ids(state: &TrackballState, points: &[Vec<f64>], ids: &[usize]) -> ProjectedCloud {
    let m = state.compound();
    let origin = &state.basis.origin;
    #[cfg(feature = "parallel")]
    let coords: Vec<[f64; 3]> = {
        use rayon::prelude::*;
        if ids.len() >= 4096 {
            ids.par_iter().map(|&i| project_rows(&m, origin, &points[i])).collect()
        } else {
            ids.iter().map(|&i| project_rows(&m, origin, &points[i])).collect()
        }
    };
    #[cfg(not(feature = "parallel"))]
    let coords: Vec<[f64; 3]> = ids.iter().map(|&i| project_rows(&m, origin, &points[i])).collect();

    ProjectedCloud {
        xy: coords.iter().map(|c| [c[0], c[1]]).collect(),
        z: coords.iter().map(|c| c[2]).collect(),
        point_ids: ids.to_vec(),
    }
}

/// Applies a trackball increment: `T ← delta·T`; the basis is untouched.
pub fn rotate(state: &TrackballState, delta: &Rotation3) -> TrackballState {
    TrackballState { rotation: delta.then_after(&state.rotation), zoom: state.zoom, basis: state.basis.clone() }
}

/// Folds `T` into `P` so the on-screen axes coincide with PPA-x/y/z.
///
/// The rows are re-orthonormalized afterwards to stop round-off from
/// accumulating over long interaction sessions.
pub fn bake_rotation(state: &TrackballState) -> TrackballState {
    if state.rotation.is_identity() {
        return state.clone();
    }
    let mut basis = state.baked_basis();
    if let Ok(rows) = linalg::orthonormalize_rows(&[basis.ppa_x.clone(), basis.ppa_y.clone(), basis.ppa_z.clone()]) {
        let [x, y, z]: [Vec<f64>; 3] = rows.try_into().expect("three rows");
        basis.ppa_x = x;
        basis.ppa_y = y;
        basis.ppa_z = z;
    }
    TrackballState { rotation: Rotation3::identity(), zoom: state.zoom, basis }
}

/// Changes how strongly the dimensions loading on PPA-z are emphasized.
///
/// Each `|z_k|` is raised to `p = exp(gain·drag_amount)` (signs kept), the
/// vector is renormalized and re-orthogonalized against PPA-x/y. Positive drags
/// sharpen z toward its dominant dimensions, negative drags flatten it.
pub fn deep_adjust(state: &TrackballState, drag_amount: f64, gain: f64) -> Result<TrackballState, ProjectionError> {
    if drag_amount == 0.0 {
        return Ok(state.clone());
    }
    let baked = bake_rotation(state);
    let p = (gain * drag_amount).exp();
    let z = &baked.basis.ppa_z;
    let powered: Vec<f64> = z.iter().map(|&w| w.signum() * w.abs().powf(p)).collect();
    let powered = linalg::normalized(&powered).ok_or(MathError::DegenerateCandidate(norm(&powered)))?;
    let new_z = gram_schmidt(&[baked.basis.ppa_x.clone(), baked.basis.ppa_y.clone()], &powered)?;
    let mut out = baked;
    out.basis.ppa_z = new_z;
    Ok(out)
}

/// Makes the selected dimensions equally expressed in the x/y plane.
///
/// Selected columns get a common projected length `sqrt(2/m)`, the largest an
/// orthonormal pair allows for `m` equal columns, and all other columns are
/// zeroed. The selected angles start from their current on-screen directions
/// and are moved by the smallest amount that keeps PPA-x and PPA-y orthogonal
/// (the doubled-angle phasors must sum to zero).
pub fn equal_express(state: &TrackballState, dims: &[usize]) -> Result<TrackballState, ProjectionError> {
    let baked = bake_rotation(state);
    let n = baked.dims();
    let mut sel: Vec<usize> = dims.to_vec();
    sel.sort_unstable();
    sel.dedup();
    let m = sel.len();
    if m < 2 || m > n {
        return Err(ProjectionError::BadSelection { got: m, max: n });
    }
    if let Some(&d) = sel.iter().find(|&&d| d >= n) {
        return Err(ProjectionError::DimOutOfRange { dim: d, n });
    }
    let b = &baked.basis;
    let angles: Vec<Option<f64>> = sel
        .iter()
        .map(|&k| {
            let (x, y) = b.column(k);
            (x.hypot(y) > 1e-12).then(|| y.atan2(x))
        })
        .collect();
    let defined: Vec<f64> = angles.iter().flatten().copied().collect();
    let all_coincide = defined.windows(2).all(|w| angle_gap_mod_pi(w[0], w[1]) < 1e-9);
    if all_coincide && m >= n {
        return Err(ProjectionError::ColinearSelection);
    }
    // Undefined directions are seeded evenly after the defined ones.
    let base = defined.first().copied().unwrap_or(0.0);
    let mut seeded: Vec<f64> = Vec::with_capacity(m);
    let mut fill = 1;
    for a in &angles {
        match a {
            Some(v) => seeded.push(*v),
            None => {
                seeded.push(base + std::f64::consts::PI * fill as f64 / m as f64);
                fill += 1;
            }
        }
    }
    let theta = balance_angles(&seeded);
    let len = (2.0 / m as f64).sqrt();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for (&k, &t) in sel.iter().zip(&theta) {
        x[k] = len * t.cos();
        y[k] = len * t.sin();
    }
    let x = linalg::normalized(&x).ok_or(ProjectionError::ColinearSelection)?;
    let y = gram_schmidt(std::slice::from_ref(&x), &y).map_err(|_| ProjectionError::ColinearSelection)?;
    let z = complete_depth(&x, &y, &b.ppa_z)?;
    Ok(TrackballState {
        rotation: Rotation3::identity(),
        zoom: baked.zoom,
        basis: ProjectionBasis { ppa_x: x, ppa_y: y, ppa_z: z, origin: b.origin.clone() },
    })
}

/// Re-derives PPA-z for a new x/y pair, preferring the previous depth axis.
pub(crate) fn complete_depth(x: &[f64], y: &[f64], previous_z: &[f64]) -> Result<Vec<f64>, MathError> {
    if x.len() < 3 {
        return Ok(vec![0.0; x.len()]);
    }
    let fixed = [x.to_vec(), y.to_vec()];
    if let Ok((z, residual)) = linalg::gram_schmidt_with_residual(&fixed, previous_z) {
        if residual > 1e-3 * norm(previous_z) {
            return Ok(z);
        }
    }
    // Coordinate axis least expressed in the x/y plane.
    let k = (0..x.len())
        .min_by(|&a, &b| (x[a] * x[a] + y[a] * y[a]).total_cmp(&(x[b] * x[b] + y[b] * y[b])))
        .ok_or(MathError::DegenerateCandidate(0.0))?;
    gram_schmidt(&fixed, &unit_axis(x.len(), k))
}

fn angle_gap_mod_pi(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}

/// Smallest adjustment of `angles` such that `Σ exp(2iθ) = 0`.
///
/// Damped minimum-norm Gauss-Newton on the two constraint equations; if that
/// fails to converge the angles fall back to an evenly spaced half-turn fan
/// in their original angular order.
fn balance_angles(angles: &[f64]) -> Vec<f64> {
    let m = angles.len();
    let residual = |t: &[f64]| -> (f64, f64) {
        t.iter().fold((0.0, 0.0), |(c, s), a| (c + (2.0 * a).cos(), s + (2.0 * a).sin()))
    };
    let mut t = angles.to_vec();
    // Break exact coincidences, which make the Jacobian rank-deficient.
    for i in 0..m {
        for j in 0..i {
            if angle_gap_mod_pi(t[i], t[j]) < 1e-6 {
                t[i] += 1e-3 * (i as f64);
            }
        }
    }
    for _ in 0..200 {
        let (rc, rs) = residual(&t);
        let r2 = rc * rc + rs * rs;
        if r2.sqrt() < 1e-14 {
            return t;
        }
        // J rows: d(rc)/dθ = -2 sin 2θ, d(rs)/dθ = 2 cos 2θ
        let jc: Vec<f64> = t.iter().map(|a| -2.0 * (2.0 * a).sin()).collect();
        let js: Vec<f64> = t.iter().map(|a| 2.0 * (2.0 * a).cos()).collect();
        let (a11, a12, a22) = (dot(&jc, &jc), dot(&jc, &js), dot(&js, &js));
        let det = a11 * a22 - a12 * a12;
        if det.abs() < 1e-12 {
            break;
        }
        let l1 = (a22 * rc - a12 * rs) / det;
        let l2 = (-a12 * rc + a11 * rs) / det;
        let step: Vec<f64> = (0..m).map(|k| -(jc[k] * l1 + js[k] * l2)).collect();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = t.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            let (tc, ts) = residual(&trial);
            if tc * tc + ts * ts < r2 {
                t = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (rc, rs) = residual(&t);
    if (rc * rc + rs * rs).sqrt() < 1e-12 {
        return t;
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| angles[a].rem_euclid(std::f64::consts::PI).total_cmp(&angles[b].rem_euclid(std::f64::consts::PI)));
    let start = angles[order[0]].rem_euclid(std::f64::consts::PI);
    let mut out = vec![0.0; m];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = start + std::f64::consts::PI * rank as f64 / m as f64;
    }
    out
}

/// Flags points that are well described by the current 3-D subspace: the
/// residual orthogonal to span(PPA-x, PPA-y, PPA-z) must not exceed the
/// `quantile`-th smallest residual.
pub fn membership(basis: &ProjectionBasis, points: &[Vec<f64>], quantile: f64) -> Vec<bool> {
    let residuals = subspace_residuals(basis, points);
    if residuals.is_empty() {
        return Vec::new();
    }
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let q = quantile.clamp(f64::MIN_POSITIVE, 1.0);
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    let threshold = sorted[idx];
    residuals.iter().map(|&r| r <= threshold).collect()
}

/// Distance of each centered point from span(PPA-x, PPA-y, PPA-z).
pub fn subspace_residuals(basis: &ProjectionBasis, points: &[Vec<f64>]) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            let mut c = linalg::sub(p, &basis.origin);
            for row in basis.rows() {
                let w = dot(&c, row);
                axpy(&mut c, -w, row);
            }
            norm(&c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthonormalize_rows, pca, rotation_between};

    fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> TrackballState {
        let rows = orthonormalize_rows(&[gaussian(rng, n), gaussian(rng, n), gaussian(rng, n)]).unwrap();
        let basis = ProjectionBasis {
            ppa_x: rows[0].clone(),
            ppa_y: rows[1].clone(),
            ppa_z: rows[2].clone(),
            origin: vec![0.0; n],
        };
        let a = gaussian(rng, 3);
        let b = gaussian(rng, 3);
        let na = norm(&a);
        let nb = norm(&b);
        let r = rotation_between([a[0] / na, a[1] / na, a[2] / na], [b[0] / nb, b[1] / nb, b[2] / nb]);
        TrackballState { rotation: r, zoom: 1.0, basis }
    }

    #[test]
    fn make_basis_random_z_in_3d() {
        let b = make_basis((&unit_axis(3, 0), &unit_axis(3, 1)), ZSource::Random(4)).unwrap();
        assert!((b.ppa_z[2].abs() - 1.0).abs() < 1e-12);
        assert!(b.ppa_z[0].abs() < 1e-12 && b.ppa_z[1].abs() < 1e-12);
    }

    #[test]
    fn make_basis_third_pc_already_orthogonal() {
        let pc = PcaResult {
            mean: vec![0.0; 5],
            components: vec![unit_axis(5, 0), unit_axis(5, 1), unit_axis(5, 3)],
            variances: vec![3.0, 2.0, 1.0],
        };
        let b = make_basis((&unit_axis(5, 0), &unit_axis(5, 1)), ZSource::ThirdPc(&pc)).unwrap();
        assert_eq!(b.ppa_z, unit_axis(5, 3));
    }

    #[test]
    fn make_basis_random_pair_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..50 {
            let xy = orthonormalize_rows(&[gaussian(&mut rng, 10), gaussian(&mut rng, 10)]).unwrap();
            let b = make_basis((&xy[0], &xy[1]), ZSource::Random(seed)).unwrap();
            assert!(b.orthonormality_error() < 1e-12);
        }
    }

    #[test]
    fn make_basis_in_2d_has_no_depth() {
        let b = make_basis((&unit_axis(2, 0), &unit_axis(2, 1)), ZSource::Random(0)).unwrap();
        assert_eq!(b.ppa_z, vec![0.0, 0.0]);
        assert_eq!(b.orthonormality_error(), 0.0);
    }

    #[test]
    fn make_basis_degenerate_vector_z() {
        let r = make_basis((&unit_axis(3, 0), &unit_axis(3, 1)), ZSource::Vector(&[1.0, 1.0, 0.0]));
        assert!(matches!(r, Err(ProjectionError::Math(MathError::DegenerateCandidate(_)))));
    }

    #[test]
    fn project_axis_aligned_selection() {
        let points = vec![vec![4.0, 5.0, 6.0, 7.0], vec![0.0, 1.0, 2.0, 3.0]];
        let mu = vec![2.0, 3.0, 4.0, 5.0];
        let state = TrackballState::new(ProjectionBasis::axis_aligned(4).with_origin(mu));
        let p = project(&state, &points);
        assert_eq!(p.xy[0], [2.0, 2.0]);
        assert_eq!(p.z[0], 2.0);
        assert_eq!(p.xy[1], [-2.0, -2.0]);
        assert_eq!(p.point_ids, vec![0, 1]);
    }

    #[test]
    fn zoom_scales_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let state = random_state(&mut rng, 7);
        let pts: Vec<Vec<f64>> = (0..30).map(|_| gaussian(&mut rng, 7)).collect();
        let a = project(&state, &pts);
        let mut zoomed = state.clone();
        zoomed.zoom = 2.0;
        let b = project(&zoomed, &pts);
        for (p, q) in a.xy.iter().zip(&b.xy) {
            assert!((2.0 * p[0] - q[0]).abs() < 1e-12 && (2.0 * p[1] - q[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_matches_span_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let state = random_state(&mut rng, 10);
        let pts: Vec<Vec<f64>> = (0..40).map(|_| gaussian(&mut rng, 10)).collect();
        let proj = project(&state, &pts);
        // oracle: explicit projection onto span(P) in N-D
        let span: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| {
                let mut out = vec![0.0; 10];
                for row in state.basis.rows() {
                    axpy(&mut out, dot(p, row), row);
                }
                out
            })
            .collect();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                let d_nd = norm(&linalg::sub(&span[i], &span[j]));
                let d_3d = ((proj.xy[i][0] - proj.xy[j][0]).powi(2)
                    + (proj.xy[i][1] - proj.xy[j][1]).powi(2)
                    + (proj.z[i] - proj.z[j]).powi(2))
                .sqrt();
                assert!((d_nd - d_3d).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rotate_composes() {
        let state = TrackballState::new(ProjectionBasis::axis_aligned(4));
        assert_eq!(rotate(&state, &Rotation3::identity()), state);
        let quarter = Rotation3::from_axis_angle([0.0, 1.0, 0.0], std::f64::consts::FRAC_PI_2);
        let half = Rotation3::from_axis_angle([0.0, 1.0, 0.0], std::f64::consts::PI);
        let twice = rotate(&rotate(&state, &quarter), &quarter);
        assert!(twice.rotation.max_abs_diff(&half) < 1e-15);
        assert_eq!(twice.basis, state.basis);
    }

    #[test]
    fn bake_preserves_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let state = random_state(&mut rng, 8);
            let pts: Vec<Vec<f64>> = (0..25).map(|_| gaussian(&mut rng, 8)).collect();
            let baked = bake_rotation(&state);
            assert!(baked.rotation.is_identity());
            assert!(baked.basis.orthonormality_error() < 1e-14);
            let (a, b) = (project(&state, &pts), project(&baked, &pts));
            for i in 0..pts.len() {
                assert!((a.xy[i][0] - b.xy[i][0]).abs() < 1e-9);
                assert!((a.xy[i][1] - b.xy[i][1]).abs() < 1e-9);
                assert!((a.z[i] - b.z[i]).abs() < 1e-9);
            }
        }
        let plain = TrackballState::new(ProjectionBasis::axis_aligned(3));
        assert_eq!(bake_rotation(&plain), plain);
    }

    #[test]
    fn deep_adjust_examples() {
        let mut state = TrackballState::new(ProjectionBasis::axis_aligned(5));
        assert_eq!(deep_adjust(&state, 0.0, 0.5).unwrap(), state);
        // single nonzero component: unchanged for any drag
        let up = deep_adjust(&state, 0.8, 0.5).unwrap();
        assert!(linalg::sub(&up.basis.ppa_z, &state.basis.ppa_z).iter().all(|d| d.abs() < 1e-15));

        state.basis.ppa_z = vec![0.0, 0.0, 0.8, 0.6, 0.0];
        let up = deep_adjust(&state, 0.5, 0.5).unwrap();
        let r0: f64 = 0.8 / 0.6;
        let r1 = up.basis.ppa_z[2].abs() / up.basis.ppa_z[3].abs();
        // power map oracle: (0.8/0.6)^p with p = exp(0.25)
        assert!((r1 - r0.powf(0.25f64.exp())).abs() < 1e-12);
        assert!(r1 > r0);
        let down = deep_adjust(&up, -0.5, 0.5).unwrap();
        assert!(linalg::sub(&down.basis.ppa_z, &state.basis.ppa_z).iter().all(|d| d.abs() < 1e-12));
        assert_eq!(up.basis.ppa_x, state.basis.ppa_x);
    }

    #[test]
    fn equal_express_two_dims_axis_aligned() {
        let state = TrackballState::new(ProjectionBasis::axis_aligned(3));
        let two = TrackballState::new(ProjectionBasis {
            ppa_x: vec![1.0, 0.0],
            ppa_y: vec![0.0, 1.0],
            ppa_z: vec![0.0, 0.0],
            origin: vec![0.0, 0.0],
        });
        let out = equal_express(&two, &[0, 1]).unwrap();
        assert!((out.basis.ppa_x[0].abs() - 1.0).abs() < 1e-12 && (out.basis.ppa_y[1].abs() - 1.0).abs() < 1e-12);
        assert!(equal_express(&state, &[0]).is_err());
    }

    #[test]
    fn equal_express_tilted_start() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let state = TrackballState::new(ProjectionBasis {
            ppa_x: vec![1.0, 0.0, 0.0],
            ppa_y: vec![0.0, s, s],
            ppa_z: vec![0.0, s, -s],
            origin: vec![0.0; 3],
        });
        let out = equal_express(&state, &[0, 1]).unwrap();
        let l0 = out.basis.ppa_x[0].hypot(out.basis.ppa_y[0]);
        let l1 = out.basis.ppa_x[1].hypot(out.basis.ppa_y[1]);
        let l2 = out.basis.ppa_x[2].hypot(out.basis.ppa_y[2]);
        assert!((l0 - l1).abs() < 1e-6);
        assert!(l0 > l2);
        assert!(out.basis.orthonormality_error() < 1e-12);
        // dim 0 keeps its on-screen direction (angle 0)
        assert!(out.basis.ppa_y[0].atan2(out.basis.ppa_x[0]).abs() < 1e-9);
    }

    #[test]
    fn equal_express_all_dims_is_star_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [3usize, 5, 8, 12] {
            let state = random_state(&mut rng, n);
            let dims: Vec<usize> = (0..n).collect();
            let out = equal_express(&state, &dims).unwrap();
            let uniform = (2.0 / n as f64).sqrt();
            for k in 0..n {
                let l = out.basis.ppa_x[k].hypot(out.basis.ppa_y[k]);
                assert!((l - uniform).abs() < 1e-6, "n={n} k={k} l={l}");
            }
            assert!(out.basis.orthonormality_error() < 1e-10);
        }
    }

    #[test]
    fn equal_express_coincident_full_selection_errors() {
        // every selected dimension points the same way on screen
        let s = 1.0 / 3f64.sqrt();
        let state = TrackballState::new(ProjectionBasis {
            ppa_x: vec![s, s, s],
            ppa_y: vec![0.0, std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
            ppa_z: vec![0.0; 3],
            origin: vec![0.0; 3],
        });
        // dims 1 and 2 are not colinear with 0, so a partial selection works
        assert!(equal_express(&state, &[0, 1]).is_ok());
        let flat = TrackballState::new(ProjectionBasis {
            ppa_x: vec![s, s, s],
            ppa_y: vec![0.0, 0.0, 0.0],
            ppa_z: vec![0.0; 3],
            origin: vec![0.0; 3],
        });
        assert_eq!(equal_express(&flat, &[0, 1, 2]), Err(ProjectionError::ColinearSelection));
    }

    #[test]
    fn membership_examples() {
        let basis = ProjectionBasis::axis_aligned(4);
        let mut pts = Vec::new();
        for i in 0..10 {
            let t = i as f64;
            pts.push(vec![t, -t, 0.5 * t, 0.0]);
            pts.push(vec![t, t, 1.0, 1.0 + t]);
        }
        let flags = membership(&basis, &pts, 0.5);
        for (i, f) in flags.iter().enumerate() {
            assert_eq!(*f, i % 2 == 0);
        }
        assert!(membership(&basis, &pts, 1.0).iter().all(|&f| f));
    }

    #[test]
    fn membership_ignores_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let state = random_state(&mut rng, 6);
        let pts: Vec<Vec<f64>> = (0..100).map(|_| gaussian(&mut rng, 6)).collect();
        let before = membership(&bake_rotation(&state).basis, &pts, 0.7);
        let spun = rotate(&state, &Rotation3::from_axis_angle([1.0, 2.0, 3.0], 0.7));
        let after = membership(&bake_rotation(&spun).basis, &pts, 0.7);
        let changed = before.iter().zip(&after).filter(|(a, b)| a != b).count();
        // rotation only perturbs residuals at round-off level
        assert!(changed <= 1);
    }

    #[test]
    fn pca_basis_via_make_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pts: Vec<Vec<f64>> = (0..200).map(|_| gaussian(&mut rng, 6)).collect();
        let p = pca(&pts, 3).unwrap();
        let b = make_basis((&p.components[0], &p.components[1]), ZSource::ThirdPc(&p)).unwrap();
        assert!(b.orthonormality_error() < 1e-12);
    }
}
