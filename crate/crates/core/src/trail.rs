//! Saved views, their weight-vector embedding and layout, and geodesic
//! interpolation between views along keyframe paths.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, pca, principal_angles, Rotation3};
use crate::projection::{complete_depth, ProjectionBasis, TrackballState};

pub type ViewId = u64;

/// Default number of animation frames when stepping to the next keyframe.
pub const PATH_FRAMES: usize = 30;
pub const MAX_TRAIL_LABELS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrailError {
    #[error("a path needs at least 2 views, got {0}")]
    PathTooShort(usize),
    #[error("unknown view id {0}")]
    UnknownView(ViewId),
    #[error("interpolation parameter {0} outside [0, 1]")]
    BadParameter(f64),
    #[error("views have different dimensionality")]
    DimensionMismatch,
}

/// Projected snapshot of the view at save time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Thumbnail {
    pub xy: Vec<[f64; 2]>,
    pub point_ids: Vec<usize>,
    pub tags: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedView {
    pub view_id: ViewId,
    pub basis: ProjectionBasis,
    pub rotation: Rotation3,
    pub zoom: f64,
    pub name: String,
    pub thumbnail: Thumbnail,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

impl SavedView {
    pub fn state(&self) -> TrackballState {
        TrackballState { rotation: self.rotation, zoom: self.zoom, basis: self.basis.clone() }
    }

    pub fn baked(&self) -> ProjectionBasis {
        self.state().baked_basis()
    }
}

/// Per-dimension L2 norm of the baked basis column.
pub fn view_weight_vector(v: &SavedView) -> Vec<f64> {
    let b = v.baked();
    (0..b.dims()).map(|k| (b.ppa_x[k].powi(2) + b.ppa_y[k].powi(2) + b.ppa_z[k].powi(2)).sqrt()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailLabel {
    pub dim: usize,
    pub pos: [f64; 2],
    /// Loading magnitude relative to the strongest label, in (0, 1].
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrailMapLayout {
    pub positions: Vec<(ViewId, [f64; 2])>,
    pub labels: Vec<TrailLabel>,
    pub paths: Vec<Vec<ViewId>>,
}

impl TrailMapLayout {
    pub fn position(&self, id: ViewId) -> Option<[f64; 2]> {
        self.positions.iter().find(|(v, _)| *v == id).map(|(_, p)| *p)
    }
}

/// PCA layout of the views' weight vectors in the unit square (5% margin,
/// uniform scale), with the most significant dimensions as labels.
pub fn layout(views: &[SavedView], paths: &[Vec<ViewId>]) -> TrailMapLayout {
    let paths = paths.to_vec();
    if views.len() < 2 {
        return TrailMapLayout { positions: views.iter().map(|v| (v.view_id, [0.5, 0.5])).collect(), labels: Vec::new(), paths };
    }
    let s: Vec<Vec<f64>> = views.iter().map(view_weight_vector).collect();
    let n = s[0].len();
    let p = match pca(&s, 2.min(n)) {
        Ok(p) => p,
        Err(_) => {
            return TrailMapLayout { positions: views.iter().map(|v| (v.view_id, [0.5, 0.5])).collect(), labels: Vec::new(), paths }
        }
    };
    let coord = |v: &[f64], c: usize| p.components.get(c).map_or(0.0, |pc| linalg::dot(pc, &linalg::sub(v, &p.mean)));
    let raw: Vec<[f64; 2]> = s.iter().map(|v| [coord(v, 0), coord(v, 1)]).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for r in &raw {
        for a in 0..2 {
            lo[a] = lo[a].min(r[a]);
            hi[a] = hi[a].max(r[a]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 1e-12 { 0.9 / span } else { 0.0 };
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let positions = views
        .iter()
        .zip(&raw)
        .map(|(v, r)| (v.view_id, [0.5 + scale * (r[0] - mid[0]), 0.5 + scale * (r[1] - mid[1])]))
        .collect();

    let labels = if scale > 0.0 { trail_labels(&p.components) } else { Vec::new() };
    TrailMapLayout { positions, labels, paths }
}

fn trail_labels(pcs: &[Vec<f64>]) -> Vec<TrailLabel> {
    let n = pcs[0].len();
    let load = |k: usize| [pcs[0][k], pcs.get(1).map_or(0.0, |p| p[k])];
    let mut dims: Vec<(usize, f64)> = (0..n).map(|k| (k, load(k)[0].hypot(load(k)[1]))).filter(|(_, m)| *m > 1e-12).collect();
    dims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    dims.truncate(MAX_TRAIL_LABELS);
    let Some(&(_, top)) = dims.first() else { return Vec::new() };

    const MIN_SEP: f64 = 0.06;
    let mut placed: Vec<TrailLabel> = Vec::with_capacity(dims.len());
    for (k, m) in dims {
        let l = load(k);
        let dir = [l[0] / m, l[1] / m];
        let mut r = 0.45 * m / top;
        let mut pos = [0.5 + r * dir[0], 0.5 + r * dir[1]];
        for _ in 0..200 {
            let clear = placed.iter().all(|q| (q.pos[0] - pos[0]).hypot(q.pos[1] - pos[1]) >= MIN_SEP);
            if clear {
                break;
            }
            r += 0.01;
            pos = [0.5 + r * dir[0], 0.5 + r * dir[1]];
        }
        placed.push(TrailLabel { dim: k, pos, weight: m / top });
    }
    placed
}

fn frame2(b: &ProjectionBasis) -> [Vec<f64>; 2] {
    [b.ppa_x.clone(), b.ppa_y.clone()]
}

/// Geodesic between the baked 2-frames of two views. `z_hint` seeds the depth
/// axis (defaults to `a`'s).
pub fn interpolate(a: &SavedView, b: &SavedView, t: f64) -> Result<TrackballState, TrailError> {
    interpolate_with_hint(a, b, t, None)
}

pub fn interpolate_with_hint(
    a: &SavedView,
    b: &SavedView,
    t: f64,
    z_hint: Option<&[f64]>,
) -> Result<TrackballState, TrailError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(TrailError::BadParameter(t));
    }
    let ba = a.baked();
    let bb = b.baked();
    if ba.dims() != bb.dims() {
        return Err(TrailError::DimensionMismatch);
    }
    let zoom = a.zoom + t * (b.zoom - a.zoom);
    if t == 0.0 {
        return Ok(TrackballState { rotation: Rotation3::identity(), zoom, basis: ba });
    }
    let [x, y] = geodesic_frame(&frame2(&ba), &frame2(&bb), t);
    let z = complete_depth(&x, &y, z_hint.unwrap_or(&ba.ppa_z)).unwrap_or_else(|_| ba.ppa_z.clone());
    let origin: Vec<f64> = ba.origin.iter().zip(&bb.origin).map(|(p, q)| p + t * (q - p)).collect();
    Ok(TrackballState {
        rotation: Rotation3::identity(),
        zoom,
        basis: ProjectionBasis { ppa_x: x, ppa_y: y, ppa_z: z, origin },
    })
}

/// Moves each principal direction of `a` toward its partner in `b` by the
/// fraction `t` of their principal angle, then undoes the principal-vector
/// rotation so `t = 0` gives back `a`'s own axes.
pub fn geodesic_frame(a: &[Vec<f64>; 2], b: &[Vec<f64>; 2], t: f64) -> [Vec<f64>; 2] {
    let m = Matrix2::from_fn(|i, j| linalg::dot(&a[i], &b[j]));
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let n = a[0].len();
    let mut moved: [Vec<f64>; 2] = [vec![0.0; n], vec![0.0; n]];
    for i in 0..2 {
        let mut ai = vec![0.0; n];
        let mut bi = vec![0.0; n];
        for j in 0..2 {
            linalg::axpy(&mut ai, u[(j, i)], &a[j]);
            linalg::axpy(&mut bi, v_t[(i, j)], &b[j]);
        }
        let sigma = svd.singular_values[i];
        let mut w = bi;
        linalg::axpy(&mut w, -sigma, &ai);
        let s = linalg::norm(&w);
        let theta = s.atan2(sigma);
        let mut f = linalg::scale(&ai, (t * theta).cos());
        if s > 1e-12 {
            linalg::axpy(&mut f, (t * theta).sin() / s, &w);
        }
        moved[i] = f;
    }
    let mut out: [Vec<f64>; 2] = [vec![0.0; n], vec![0.0; n]];
    for r in 0..2 {
        for i in 0..2 {
            linalg::axpy(&mut out[r], u[(r, i)], &moved[i]);
        }
    }
    match linalg::orthonormalize_rows(&out) {
        Ok(rows) => [rows[0].clone(), rows[1].clone()],
        Err(_) => out,
    }
}

/// Geodesic length between consecutive keyframes: sum of principal angles.
pub fn segment_length(a: &SavedView, b: &SavedView) -> f64 {
    principal_angles(&frame2(&a.baked()), &frame2(&b.baked())).iter().sum()
}

/// State at global parameter `t` along a keyframe path, uniform in arc
/// length. Keyframe boundaries return the keyframe itself.
pub fn path_at(views: &[&SavedView], t: f64) -> Result<TrackballState, TrailError> {
    if views.len() < 2 {
        return Err(TrailError::PathTooShort(views.len()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(TrailError::BadParameter(t));
    }
    let lengths: Vec<f64> = views.windows(2).map(|w| segment_length(w[0], w[1])).collect();
    let total: f64 = lengths.iter().sum();
    if total <= 0.0 || t == 0.0 {
        return Ok(keyframe_state(views[0]));
    }
    if t == 1.0 {
        return Ok(keyframe_state(views[views.len() - 1]));
    }
    let s = t * total;
    let mut cum = 0.0;
    for (i, &len) in lengths.iter().enumerate() {
        if s == cum {
            return Ok(keyframe_state(views[i]));
        }
        if s < cum + len {
            return interpolate(views[i], views[i + 1], (s - cum) / len);
        }
        cum += len;
    }
    Ok(keyframe_state(views[views.len() - 1]))
}

fn keyframe_state(v: &SavedView) -> TrackballState {
    TrackballState { rotation: Rotation3::identity(), zoom: v.zoom, basis: v.baked() }
}

/// Animation frames from keyframe `segment` to `segment + 1`, excluding the
/// start and ending on the keyframe itself. Depth axes follow the previous
/// frame for continuity.
pub fn segment_frames(views: &[&SavedView], segment: usize, frames: usize) -> Result<Vec<TrackballState>, TrailError> {
    if views.len() < 2 {
        return Err(TrailError::PathTooShort(views.len()));
    }
    let seg = segment.min(views.len() - 2);
    let (a, b) = (views[seg], views[seg + 1]);
    let frames = frames.max(1);
    let mut out = Vec::with_capacity(frames);
    let mut z = a.baked().ppa_z;
    for k in 1..frames {
        let s = interpolate_with_hint(a, b, k as f64 / frames as f64, Some(&z))?;
        z = s.basis.ppa_z.clone();
        out.push(s);
    }
    out.push(keyframe_state(b));
    Ok(out)
}
