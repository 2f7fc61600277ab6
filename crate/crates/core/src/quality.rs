//! View quality indices scored on a 2-D projection. Higher is better for
//! every kind; stress is reported negated.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Rotation3};
use crate::projection::{project_ids, ProjectedCloud, ProjectionBasis, TrackballState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QualityError {
    #[error("metric `{0}` needs class labels")]
    MissingLabels(&'static str),
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
}

fn default_max_pairs() -> usize {
    20_000
}

fn default_grid() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QualityMetric {
    /// Kruskal stress-1 between N-D and (optimally scaled) 2-D distances.
    Stress {
        #[serde(default = "default_max_pairs")]
        max_pairs: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Fraction of points nearest to their own class centroid.
    DistanceConsistency,
    /// One minus the normalized class entropy over a grid laid along the
    /// principal axes of the projected cloud.
    DistributionConsistency {
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// Between-class scatter over total scatter.
    ClassSeparation,
    Holes,
    CentralMass,
}

impl Default for QualityMetric {
    fn default() -> Self {
        QualityMetric::DistanceConsistency
    }
}

impl QualityMetric {
    pub fn name(&self) -> &'static str {
        match self {
            QualityMetric::Stress { .. } => "stress",
            QualityMetric::DistanceConsistency => "distance_consistency",
            QualityMetric::DistributionConsistency { .. } => "distribution_consistency",
            QualityMetric::ClassSeparation => "class_separation",
            QualityMetric::Holes => "holes",
            QualityMetric::CentralMass => "central_mass",
        }
    }

    /// Parses a kind identifier with default parameters.
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "stress" => QualityMetric::Stress { max_pairs: default_max_pairs(), seed: 0 },
            "distance_consistency" => QualityMetric::DistanceConsistency,
            "distribution_consistency" => QualityMetric::DistributionConsistency { grid: default_grid() },
            "class_separation" => QualityMetric::ClassSeparation,
            "holes" => QualityMetric::Holes,
            "central_mass" => QualityMetric::CentralMass,
            _ => return None,
        })
    }

    pub fn needs_labels(&self) -> bool {
        matches!(
            self,
            QualityMetric::DistanceConsistency
                | QualityMetric::DistributionConsistency { .. }
                | QualityMetric::ClassSeparation
        )
    }
}

/// Scores a projected cloud. `points` and `labels` are indexed by the cloud's
/// `point_ids`.
pub fn score(
    metric: &QualityMetric,
    proj: &ProjectedCloud,
    points: &[Vec<f64>],
    labels: Option<&[usize]>,
) -> Result<f64, QualityError> {
    score_xy(metric, &proj.xy, &proj.point_ids, points, labels)
}

/// Same as [`score`] on raw 2-D coordinates; `ids[i]` names the point at `xy[i]`.
pub fn score_xy(
    metric: &QualityMetric,
    xy: &[[f64; 2]],
    ids: &[usize],
    points: &[Vec<f64>],
    labels: Option<&[usize]>,
) -> Result<f64, QualityError> {
    let n = xy.len();
    if n < 3 {
        return Err(QualityError::TooFewPoints(n));
    }
    let class_of = || -> Result<Vec<usize>, QualityError> {
        let l = labels.ok_or(QualityError::MissingLabels(metric.name()))?;
        Ok(ids.iter().map(|&id| l[id]).collect())
    };
    let moments = Moments::of(xy);
    if moments.is_degenerate(spread_nd(points, ids)) {
        if metric.needs_labels() {
            class_of()?;
        }
        return Ok(f64::NEG_INFINITY);
    }
    Ok(match metric {
        QualityMetric::Stress { max_pairs, seed } => -stress(xy, ids, points, *max_pairs, *seed),
        QualityMetric::DistanceConsistency => distance_consistency(xy, &class_of()?),
        QualityMetric::DistributionConsistency { grid } => {
            distribution_consistency(xy, &class_of()?, (*grid).max(1), &moments)
        }
        QualityMetric::ClassSeparation => class_separation(xy, &class_of()?),
        QualityMetric::Holes => match moments.mean_gaussian_kernel(xy) {
            Some(k) => (1.0 - k) / (1.0 - (-1.0f64).exp()),
            None => f64::NEG_INFINITY,
        },
        QualityMetric::CentralMass => match moments.mean_gaussian_kernel(xy) {
            Some(k) => (k - (-1.0f64).exp()) / (1.0 - (-1.0f64).exp()),
            None => f64::NEG_INFINITY,
        },
    })
}

/// Mean squared distance of the selected N-D points from their centroid.
fn spread_nd(points: &[Vec<f64>], ids: &[usize]) -> f64 {
    if ids.is_empty() {
        return 0.0;
    }
    let d = points[ids[0]].len();
    let mut mean = vec![0.0; d];
    for &i in ids {
        linalg::axpy(&mut mean, 1.0, &points[i]);
    }
    mean.iter_mut().for_each(|m| *m /= ids.len() as f64);
    ids.iter().map(|&i| linalg::sub(&points[i], &mean).iter().map(|x| x * x).sum::<f64>()).sum::<f64>()
        / ids.len() as f64
}

/// First and second moments of a 2-D cloud (population covariance).
struct Moments {
    mean: [f64; 2],
    cxx: f64,
    cxy: f64,
    cyy: f64,
}

impl Moments {
    fn of(xy: &[[f64; 2]]) -> Self {
        let n = xy.len() as f64;
        let mx = xy.iter().map(|p| p[0]).sum::<f64>() / n;
        let my = xy.iter().map(|p| p[1]).sum::<f64>() / n;
        let (mut cxx, mut cxy, mut cyy) = (0.0, 0.0, 0.0);
        for p in xy {
            let (dx, dy) = (p[0] - mx, p[1] - my);
            cxx += dx * dx;
            cxy += dx * dy;
            cyy += dy * dy;
        }
        Self { mean: [mx, my], cxx: cxx / n, cxy: cxy / n, cyy: cyy / n }
    }

    /// Eigenvalues (descending) and the major-axis angle.
    fn eigen(&self) -> (f64, f64, f64) {
        let tr = self.cxx + self.cyy;
        let diff = self.cxx - self.cyy;
        let disc = (diff * diff + 4.0 * self.cxy * self.cxy).sqrt();
        let l1 = 0.5 * (tr + disc);
        let l2 = (0.5 * (tr - disc)).max(0.0);
        let angle = 0.5 * (2.0 * self.cxy).atan2(diff);
        (l1, l2, angle)
    }

    fn is_degenerate(&self, nd_spread: f64) -> bool {
        let tr = self.cxx + self.cyy;
        !tr.is_finite() || tr <= 1e-20 * nd_spread || tr <= f64::MIN_POSITIVE
    }

    /// Mean of `exp(-|z|²/2)` over the sphered cloud; `None` when the cloud is
    /// (numerically) confined to a line.
    fn mean_gaussian_kernel(&self, xy: &[[f64; 2]]) -> Option<f64> {
        let (l1, l2, angle) = self.eigen();
        if l2 <= 1e-12 * l1 {
            return None;
        }
        let (s, c) = angle.sin_cos();
        let total: f64 = xy
            .iter()
            .map(|p| {
                let (dx, dy) = (p[0] - self.mean[0], p[1] - self.mean[1]);
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                (-(u * u / l1 + v * v / l2) / 2.0).exp()
            })
            .sum();
        Some(total / xy.len() as f64)
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Index pairs used for stress: every pair when few enough, otherwise a
/// seeded uniform sample of `max_pairs` distinct-index pairs.
pub fn stress_pairs(n: usize, max_pairs: usize, seed: u64) -> Vec<(usize, usize)> {
    let total = n * (n - 1) / 2;
    if total <= max_pairs {
        let mut out = Vec::with_capacity(total);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push((i, j));
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..max_pairs)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i, j)
        })
        .collect()
}

fn stress(xy: &[[f64; 2]], ids: &[usize], points: &[Vec<f64>], max_pairs: usize, seed: u64) -> f64 {
    let pairs = stress_pairs(xy.len(), max_pairs, seed);
    let (mut sde, mut see, mut sdd) = (0.0, 0.0, 0.0);
    let mut dist = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let d = linalg::norm(&linalg::sub(&points[ids[i]], &points[ids[j]]));
        let e = dist2(xy[i], xy[j]).sqrt();
        sde += d * e;
        see += e * e;
        sdd += d * d;
        dist.push((d, e));
    }
    if sdd == 0.0 {
        return 0.0;
    }
    if see == 0.0 {
        return f64::INFINITY;
    }
    let a = sde / see;
    let resid: f64 = dist.iter().map(|(d, e)| (d - a * e).powi(2)).sum();
    (resid / sdd).sqrt()
}

fn class_centroids(xy: &[[f64; 2]], classes: &[usize]) -> BTreeMap<usize, ([f64; 2], usize)> {
    let mut acc: BTreeMap<usize, ([f64; 2], usize)> = BTreeMap::new();
    for (p, &c) in xy.iter().zip(classes) {
        let e = acc.entry(c).or_insert(([0.0, 0.0], 0));
        e.0[0] += p[0];
        e.0[1] += p[1];
        e.1 += 1;
    }
    for v in acc.values_mut() {
        v.0[0] /= v.1 as f64;
        v.0[1] /= v.1 as f64;
    }
    acc
}

fn distance_consistency(xy: &[[f64; 2]], classes: &[usize]) -> f64 {
    let centroids = class_centroids(xy, classes);
    if centroids.len() < 2 {
        return 1.0;
    }
    let good = xy
        .iter()
        .zip(classes)
        .filter(|(p, c)| {
            let own = dist2(**p, centroids[c].0);
            centroids.iter().all(|(k, (m, _))| k == *c || own <= dist2(**p, *m))
        })
        .count();
    good as f64 / xy.len() as f64
}

fn distribution_consistency(xy: &[[f64; 2]], classes: &[usize], grid: usize, m: &Moments) -> f64 {
    let mut ids: Vec<usize> = classes.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let k = ids.len();
    if k < 2 {
        return 1.0;
    }
    let (_, _, angle) = m.eigen();
    let (s, c) = angle.sin_cos();
    let rotated: Vec<[f64; 2]> = xy.iter().map(|p| [c * p[0] + s * p[1], -s * p[0] + c * p[1]]).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &rotated {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let cell = |v: f64, a: usize| -> usize {
        let w = hi[a] - lo[a];
        if w <= 0.0 {
            return 0;
        }
        (((v - lo[a]) / w * grid as f64) as usize).min(grid - 1)
    };
    let mut counts: BTreeMap<(usize, usize), BTreeMap<usize, usize>> = BTreeMap::new();
    for (p, &cl) in rotated.iter().zip(classes) {
        *counts.entry((cell(p[0], 0), cell(p[1], 1))).or_default().entry(cl).or_default() += 1;
    }
    let n = xy.len() as f64;
    let mut weighted = 0.0;
    for cell_counts in counts.values() {
        let total: usize = cell_counts.values().sum();
        let h: f64 = cell_counts
            .values()
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.log2()
            })
            .sum();
        weighted += total as f64 / n * h;
    }
    1.0 - weighted / (k as f64).log2()
}

fn class_separation(xy: &[[f64; 2]], classes: &[usize]) -> f64 {
    let centroids = class_centroids(xy, classes);
    let n = xy.len() as f64;
    let mean = [xy.iter().map(|p| p[0]).sum::<f64>() / n, xy.iter().map(|p| p[1]).sum::<f64>() / n];
    let between: f64 = centroids.values().map(|(m, c)| *c as f64 * dist2(*m, mean)).sum();
    let within: f64 = xy.iter().zip(classes).map(|(p, c)| dist2(*p, centroids[c].0)).sum();
    if between + within == 0.0 {
        return f64::NEG_INFINITY;
    }
    between / (between + within)
}

/// Orders candidate views by descending score; ties keep candidate order.
pub fn rank_views(
    metric: &QualityMetric,
    candidates: &[(ProjectionBasis, Rotation3)],
    points: &[Vec<f64>],
    ids: &[usize],
    labels: Option<&[usize]>,
) -> Result<Vec<usize>, QualityError> {
    let scores = candidates
        .iter()
        .map(|(basis, rotation)| {
            let state = TrackballState { rotation: *rotation, zoom: 1.0, basis: basis.clone() };
            score(metric, &project_ids(&state, points, ids), points, labels)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    fn cloud(xy: Vec<[f64; 2]>) -> (ProjectedCloud, Vec<Vec<f64>>) {
        let n = xy.len();
        let points = xy.iter().map(|p| vec![p[0], p[1]]).collect();
        (ProjectedCloud { xy, z: vec![0.0; n], point_ids: (0..n).collect() }, points)
    }

    fn rotate_scale(xy: &[[f64; 2]], angle: f64, s: f64) -> Vec<[f64; 2]> {
        let (sn, c) = angle.sin_cos();
        xy.iter().map(|p| [s * (c * p[0] - sn * p[1]), s * (sn * p[0] + c * p[1])]).collect()
    }

    #[test]
    fn stress_zero_for_isometric_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xy: Vec<[f64; 2]> = (0..60).map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)]).collect();
        let (mut proj, points) = cloud(xy.clone());
        proj.xy = rotate_scale(&xy, 0.7, 3.0);
        let m = QualityMetric::from_name("stress").unwrap();
        let s = score(&m, &proj, &points, None).unwrap();
        assert!(s.abs() < 1e-12, "{s}");
    }

    #[test]
    fn distance_consistency_perfect_split() {
        let mut xy = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.05;
            xy.push([-5.0 + t, t]);
            labels.push(0);
            xy.push([5.0 - t, -t]);
            labels.push(1);
        }
        let (proj, points) = cloud(xy);
        let s = score(&QualityMetric::DistanceConsistency, &proj, &points, Some(&labels)).unwrap();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn distance_consistency_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xy: Vec<[f64; 2]> = (0..300).map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)]).collect();
        let labels: Vec<usize> = (0..300).map(|i| if xy[i][0] + 0.5 * rng.sample::<f64, _>(StandardNormal) > 0.0 { 1 } else { 0 }).collect();
        let (proj, points) = cloud(xy.clone());
        let s = score(&QualityMetric::DistanceConsistency, &proj, &points, Some(&labels)).unwrap();
        // brute force: recompute centroids and count directly
        let mut c = [[0.0; 2]; 2];
        let mut n = [0.0; 2];
        for (p, &l) in xy.iter().zip(&labels) {
            c[l][0] += p[0];
            c[l][1] += p[1];
            n[l] += 1.0;
        }
        for l in 0..2 {
            c[l][0] /= n[l];
            c[l][1] /= n[l];
        }
        let good = xy.iter().zip(&labels).filter(|(p, &l)| dist2(**p, c[l]) <= dist2(**p, c[1 - l])).count();
        assert_eq!(s, good as f64 / 300.0);
        assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn holes_prefers_ring_over_gaussian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ring: Vec<[f64; 2]> = (0..500)
            .map(|_| {
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let r = 1.0 + 0.05 * rng.sample::<f64, _>(StandardNormal);
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let blob: Vec<[f64; 2]> = (0..500).map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)]).collect();
        let (pr, ptr) = cloud(ring);
        let (pb, ptb) = cloud(blob);
        let hr = score(&QualityMetric::Holes, &pr, &ptr, None).unwrap();
        let hb = score(&QualityMetric::Holes, &pb, &ptb, None).unwrap();
        assert!(hr > hb, "ring {hr} vs blob {hb}");
        let cr = score(&QualityMetric::CentralMass, &pr, &ptr, None).unwrap();
        assert!((hr + cr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn class_metrics_need_labels() {
        let (proj, points) = cloud(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        for m in [
            QualityMetric::DistanceConsistency,
            QualityMetric::ClassSeparation,
            QualityMetric::DistributionConsistency { grid: 16 },
        ] {
            assert_eq!(score(&m, &proj, &points, None), Err(QualityError::MissingLabels(m.name())));
        }
        let (p2, pts2) = cloud(vec![[0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(score(&QualityMetric::Holes, &p2, &pts2, None), Err(QualityError::TooFewPoints(2)));
    }

    #[test]
    fn degenerate_projection_scores_negative_infinity() {
        let points = vec![vec![1.0, 2.0], vec![3.0, -1.0], vec![0.0, 5.0]];
        let proj = ProjectedCloud { xy: vec![[0.5, 0.5]; 3], z: vec![0.0; 3], point_ids: vec![0, 1, 2] };
        for name in ["stress", "holes", "central_mass"] {
            let m = QualityMetric::from_name(name).unwrap();
            assert_eq!(score(&m, &proj, &points, None).unwrap(), f64::NEG_INFINITY);
        }
        let labels = vec![0, 1, 0];
        assert_eq!(score(&QualityMetric::ClassSeparation, &proj, &points, Some(&labels)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn metrics_invariant_under_rotation_and_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut xy = Vec::new();
        let mut labels = Vec::new();
        for i in 0..240 {
            let c = i % 3;
            let off = [[0.0, 0.0], [2.0, 0.5], [0.5, 2.5]][c];
            xy.push([off[0] + rng.sample::<f64, _>(StandardNormal) * 0.8, off[1] + rng.sample::<f64, _>(StandardNormal) * 0.6]);
            labels.push(c);
        }
        let points: Vec<Vec<f64>> = xy.iter().map(|p| vec![p[0], p[1], 0.3 * p[0] * p[1]]).collect();
        let base = ProjectedCloud { xy: xy.clone(), z: vec![0.0; 240], point_ids: (0..240).collect() };
        let moved = ProjectedCloud { xy: rotate_scale(&xy, 1.1, 0.37), ..base.clone() };
        for name in ["stress", "distance_consistency", "distribution_consistency", "class_separation", "holes", "central_mass"] {
            let m = QualityMetric::from_name(name).unwrap();
            let a = score(&m, &base, &points, Some(&labels)).unwrap();
            let b = score(&m, &moved, &points, Some(&labels)).unwrap();
            assert!((a - b).abs() < 1e-9, "{name}: {a} vs {b}");
        }
    }

    #[test]
    fn stress_sampling_reproducible() {
        let a = stress_pairs(1000, 20_000, 9);
        let b = stress_pairs(1000, 20_000, 9);
        assert_eq!(a, b);
        assert!(a.iter().all(|(i, j)| i != j));
        assert_eq!(stress_pairs(10, 20_000, 9).len(), 45);
    }

    #[test]
    fn rank_views_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<Vec<f64>> = (0..50).map(|_| (0..4).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let ids: Vec<usize> = (0..50).collect();
        let b = ProjectionBasis::axis_aligned(4);
        let one = rank_views(&QualityMetric::Holes, &[(b.clone(), Rotation3::identity())], &points, &ids, None).unwrap();
        assert_eq!(one, vec![0]);
        let dup = vec![(b.clone(), Rotation3::identity()); 3];
        assert_eq!(rank_views(&QualityMetric::Holes, &dup, &points, &ids, None).unwrap(), vec![0, 1, 2]);
    }
}
