//! Attribute labels around the trackball rim: angle, size, opacity and
//! angular overlap removal.

use serde::{Deserialize, Serialize};

use crate::projection::ProjectionBasis;

/// Spacing needed next to the vertical axis, where labels stack.
pub const THETA_V: f64 = 24.0;
/// Spacing needed from 45° off vertical onward.
pub const THETA_H: f64 = 4.0;
pub const MIN_FONT_PT: f64 = 8.0;
pub const MAX_FONT_PT: f64 = 18.0;
pub const MIN_OPACITY: f64 = 0.25;
pub const DEFAULT_MAX_LABELS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelPlacement {
    pub dim: usize,
    /// Degrees in [0, 360).
    pub angle: f64,
    pub strength: f64,
    pub display_angle: f64,
    pub visible: bool,
    pub font_size: f64,
    pub opacity: f64,
}

/// Direction and strength of every dimension's projected column.
pub fn base_angles(basis: &ProjectionBasis) -> Vec<LabelPlacement> {
    (0..basis.dims())
        .map(|k| {
            let (wx, wy) = basis.column(k);
            let strength = wx.hypot(wy).clamp(0.0, 1.0);
            let angle = if strength > 0.0 { wy.atan2(wx).to_degrees().rem_euclid(360.0) } else { 0.0 };
            // rem_euclid can round up to exactly 360 for tiny negative angles
            let angle = if angle >= 360.0 { 0.0 } else { angle };
            LabelPlacement {
                dim: k,
                angle,
                strength,
                display_angle: angle,
                visible: strength > 0.0,
                font_size: MIN_FONT_PT + (MAX_FONT_PT - MIN_FONT_PT) * strength,
                opacity: MIN_OPACITY + (1.0 - MIN_OPACITY) * strength,
            }
        })
        .collect()
}

/// Angular distance in degrees from the nearest vertical direction (90° or 270°).
pub fn gamma_of(angle: f64) -> f64 {
    let a = angle.rem_euclid(180.0);
    (a - 90.0).abs()
}

/// Minimum gap in degrees between neighbouring labels at `gamma` degrees from vertical.
pub fn required_spacing(gamma: f64) -> f64 {
    if gamma < 45.0 {
        THETA_V - (THETA_V - THETA_H) * gamma / 45.0
    } else {
        THETA_H
    }
}

fn spacing_at(angle: f64) -> f64 {
    required_spacing(gamma_of(angle))
}

/// Smallest `d >= lo` with `d - prev >= spacing_at(d)`. The left side grows
/// strictly faster than the spacing changes, so bisection applies.
fn push_from(prev: f64, lo: f64) -> f64 {
    let ok = |d: f64| d - prev >= spacing_at(d);
    if ok(lo) {
        return lo;
    }
    let (mut a, mut b) = (lo, prev.max(lo) + THETA_V);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if ok(m) {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// Keeps at most `max_labels` labels visible (user-selected dims first, then
/// by strength) and spreads the visible ones counterclockwise from the
/// strongest so neighbours keep the required spacing. If they cannot all fit
/// around the circle the weakest are hidden. Angles are never changed, only
/// `display_angle` and `visible`.
pub fn resolve_overlaps(placements: &[LabelPlacement], max_labels: usize, selected: &[usize]) -> Vec<LabelPlacement> {
    let mut out = placements.to_vec();
    for p in out.iter_mut() {
        p.display_angle = p.angle;
        p.visible = false;
    }
    let mut keep = priority(&out, selected);
    keep.truncate(max_labels);
    loop {
        if keep.is_empty() {
            return out;
        }
        if let Some(display) = sweep(&out, &keep) {
            for (&i, d) in keep.iter().zip(display) {
                out[i].visible = true;
                out[i].display_angle = d;
            }
            return out;
        }
        keep.pop();
    }
}

/// Visibility only, no displacement (used while the view is being dragged).
pub fn visible_without_adjustment(placements: &[LabelPlacement], max_labels: usize, selected: &[usize]) -> Vec<LabelPlacement> {
    let mut out = placements.to_vec();
    let mut keep = priority(&out, selected);
    keep.truncate(max_labels);
    for (i, p) in out.iter_mut().enumerate() {
        p.display_angle = p.angle;
        p.visible = keep.contains(&i);
    }
    out
}

/// Indices of labels with non-zero strength, most important first.
fn priority(p: &[LabelPlacement], selected: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.len()).filter(|&i| p[i].strength > 0.0).collect();
    idx.sort_by(|&a, &b| {
        let sa = selected.contains(&p[a].dim);
        let sb = selected.contains(&p[b].dim);
        sb.cmp(&sa).then(p[b].strength.total_cmp(&p[a].strength)).then(p[a].dim.cmp(&p[b].dim))
    });
    idx
}

/// Display angles for `keep` (in the same order), or `None` when the labels
/// do not fit around the circle.
fn sweep(p: &[LabelPlacement], keep: &[usize]) -> Option<Vec<f64>> {
    let start = p[keep[0]].angle;
    let rank = |i: usize| keep.iter().position(|&k| k == i).unwrap();
    let unwrap = |a: f64| if a < start { a + 360.0 } else { a };
    let mut order: Vec<usize> = keep.to_vec();
    order.sort_by(|&a, &b| {
        let (ua, ub) = (unwrap(p[a].angle), unwrap(p[b].angle));
        // the strongest label anchors the sweep even when others share its angle
        (a != keep[0]).cmp(&(b != keep[0])).then(ua.total_cmp(&ub)).then(rank(a).cmp(&rank(b)))
    });
    let mut display = vec![0.0; p.len()];
    display[keep[0]] = start;
    let mut prev = start;
    for &i in order.iter().skip(1) {
        let d = push_from(prev, unwrap(p[i].angle).max(prev));
        display[i] = d;
        prev = d;
    }
    if start + 360.0 - prev < spacing_at(start) && keep.len() > 1 {
        return None;
    }
    Some(keep.iter().map(|&i| display[i].rem_euclid(360.0)).collect())
}
