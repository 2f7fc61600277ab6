//! Mouse gestures → basis changes: trackball rotation, cluster chasing into
//! adjacent subspaces, and dragging a single attribute toward a direction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{gram_schmidt, normalized, rotation_between, sphere_map, MathError, Rotation3};
use crate::projection::{bake_rotation, ProjectionBasis, TrackballState};

/// Columns shorter than this have no usable on-screen direction.
const MIN_COLUMN: f64 = 1e-12;
/// Dimensions whose Gaussian weight falls below this are out of reach.
const MIN_WEIGHT: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("no dimension lies within reach of the drag direction")]
    NoAffectedDims,
    #[error("dimension index {dim} out of range for {n}-dimensional data")]
    DimOutOfRange { dim: usize, n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MouseButton {
    Left,
    Right,
    Middle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DragEvent {
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub button: MouseButton,
    #[serde(default)]
    pub pinned_dim: Option<usize>,
}

impl DragEvent {
    pub fn new(from: [f64; 2], to: [f64; 2], button: MouseButton) -> Self {
        Self { from, to, button, pinned_dim: None }
    }

    pub fn pinned(mut self, dim: usize) -> Self {
        self.pinned_dim = Some(dim);
        self
    }

    fn motion(&self) -> [f64; 2] {
        [self.to[0] - self.from[0], self.to[1] - self.from[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChaseConfig {
    /// Speed constant: weight added per unit of drag distance.
    pub k_a: f64,
    /// Gaussian reach (rad⁻²); larger values narrow the set of affected dims.
    pub k_d: f64,
    pub max_affected: usize,
}

impl Default for ChaseConfig {
    fn default() -> Self {
        Self { k_a: 0.5, k_d: 8.0, max_affected: 4 }
    }
}

/// Trackball rotation for a left-button drag.
pub fn drag_to_rotation(ev: &DragEvent) -> Rotation3 {
    rotation_between(sphere_map(ev.from[0], ev.from[1]), sphere_map(ev.to[0], ev.to[1]))
}

fn column_angle(b: &ProjectionBasis, k: usize) -> Option<f64> {
    let (x, y) = b.column(k);
    (x.hypot(y) > MIN_COLUMN).then(|| y.atan2(x))
}

/// Rotates (PPA-x, PPA-y) in-plane by `delta` radians; every column turns by
/// the same angle.
fn rotate_in_plane(b: &mut ProjectionBasis, delta: f64) {
    let (s, c) = delta.sin_cos();
    for k in 0..b.dims() {
        let (x, y) = (b.ppa_x[k], b.ppa_y[k]);
        b.ppa_x[k] = c * x - s * y;
        b.ppa_y[k] = s * x + c * y;
    }
}

/// Normalizes PPA-x, then Gram-Schmidts PPA-y and the previous PPA-z.
fn reorthonormalize(b: &mut ProjectionBasis, previous_z: &[f64]) -> Result<(), NavError> {
    let x = normalized(&b.ppa_x).ok_or(MathError::DegenerateCandidate(0.0))?;
    let y = gram_schmidt(std::slice::from_ref(&x), &b.ppa_y)?;
    let z = crate::projection::complete_depth(&x, &y, previous_z)?;
    b.ppa_x = x;
    b.ppa_y = y;
    b.ppa_z = z;
    Ok(())
}

fn repin(b: &mut ProjectionBasis, dim: usize, angle: f64) {
    if let Some(now) = column_angle(b, dim) {
        rotate_in_plane(b, angle - now);
    }
}

/// Right-button drag: tilts the projection plane toward (or away from) the
/// dimensions whose on-screen directions line up with the mouse motion.
///
/// Each dimension `k` with unit screen direction `u_k` gets a Gaussian weight
/// on its misalignment with the motion line, `exp(-k_d·ψ²)`, and its column
/// moves along `u_k` by `k_a·Δd·w`, outward when the motion points along `u_k`
/// and inward when it points against it. A column never passes through zero.
/// The basis is then re-orthonormalized and, if a dimension is pinned, spun
/// in-plane so that dimension keeps its pre-drag angle.
pub fn chase(state: &TrackballState, ev: &DragEvent, cfg: &ChaseConfig) -> Result<TrackballState, NavError> {
    let motion = ev.motion();
    let dd = motion[0].hypot(motion[1]);
    if dd == 0.0 {
        return Ok(state.clone());
    }
    let baked = bake_rotation(state);
    let n = baked.dims();
    if let Some(p) = ev.pinned_dim {
        if p >= n {
            return Err(NavError::DimOutOfRange { dim: p, n });
        }
    }
    let vm = [motion[0] / dd, motion[1] / dd];
    let b = &baked.basis;

    let mut affected: Vec<(usize, f64, [f64; 2], f64)> = Vec::new();
    for k in 0..n {
        let (x, y) = b.column(k);
        let len = x.hypot(y);
        if len <= MIN_COLUMN {
            continue;
        }
        let u = [x / len, y / len];
        let cos_phi = (vm[0] * u[0] + vm[1] * u[1]).clamp(-1.0, 1.0);
        let phi = cos_phi.acos();
        let misalign = phi.min(std::f64::consts::PI - phi);
        let w = (-cfg.k_d * misalign * misalign).exp();
        if w < MIN_WEIGHT || cos_phi == 0.0 {
            continue;
        }
        affected.push((k, w, u, len * cos_phi.signum()));
    }
    if affected.is_empty() {
        return Err(NavError::NoAffectedDims);
    }
    affected.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    affected.truncate(cfg.max_affected.max(1));

    let pinned_angle = ev.pinned_dim.and_then(|p| column_angle(b, p));
    let mut next = b.clone();
    for &(k, w, u, signed_len) in &affected {
        let outward = signed_len > 0.0;
        let len = signed_len.abs();
        let mut step = cfg.k_a * dd * w;
        if !outward {
            step = -step.min(len);
        }
        next.ppa_x[k] += step * u[0];
        next.ppa_y[k] += step * u[1];
    }
    reorthonormalize(&mut next, &b.ppa_z)?;
    if let (Some(p), Some(a)) = (ev.pinned_dim, pinned_angle) {
        repin(&mut next, p, a);
    }
    Ok(TrackballState { rotation: Rotation3::identity(), zoom: baked.zoom, basis: next })
}

/// Turns dimension `dim`'s on-screen direction toward `target_dir` by the
/// fraction `step` of the angular gap, keeping its projected length.
pub fn align_attribute(
    state: &TrackballState,
    dim: usize,
    target_dir: [f64; 2],
    step: f64,
    _cfg: &ChaseConfig,
) -> Result<TrackballState, NavError> {
    let baked = bake_rotation(state);
    let n = baked.dims();
    if dim >= n {
        return Err(NavError::DimOutOfRange { dim, n });
    }
    let b = &baked.basis;
    let (x, y) = b.column(dim);
    let len = x.hypot(y);
    if len <= MIN_COLUMN {
        return Err(NavError::NoAffectedDims);
    }
    let current = y.atan2(x);
    let target = target_dir[1].atan2(target_dir[0]);
    let gap = wrap_angle(target - current);
    if gap.abs() < 1e-12 {
        return Ok(baked);
    }
    let goal = current + step.clamp(0.0, 1.0) * gap;
    let mut next = b.clone();
    next.ppa_x[dim] = len * goal.cos();
    next.ppa_y[dim] = len * goal.sin();
    reorthonormalize(&mut next, &b.ppa_z)?;
    repin(&mut next, dim, goal);
    Ok(TrackballState { rotation: Rotation3::identity(), zoom: baked.zoom, basis: next })
}

/// Wraps an angle difference into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}
