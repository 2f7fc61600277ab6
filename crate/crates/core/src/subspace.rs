//! Candidate 3-D subspaces: random orthonormal triples and k-means clusters
//! described by their leading principal components.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, gram_schmidt, pca, MathError};
use crate::projection::{make_basis, ProjectionBasis, ProjectionError, ZSource};

pub const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubspaceError {
    #[error("need at least 3 dimensions, got {0}")]
    TooFewDims(usize),
    #[error("k-means with k={k} needs at least {needed} points, got {got}")]
    TooFewPoints { k: usize, needed: usize, got: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Math(#[from] MathError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceCluster {
    pub member_ids: Vec<usize>,
    pub basis: ProjectionBasis,
    pub centroid: Vec<f64>,
    pub color_tag: u8,
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Three i.i.d. Gaussian vectors orthonormalized in order.
pub fn random_subspace(n: usize, seed: u64) -> Result<ProjectionBasis, SubspaceError> {
    if n < 3 {
        return Err(SubspaceError::TooFewDims(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(3);
    while rows.len() < 3 {
        if let Ok(v) = gram_schmidt(&rows, &gaussian(&mut rng, n)) {
            rows.push(v);
        }
    }
    let z = rows.pop().unwrap();
    let y = rows.pop().unwrap();
    let x = rows.pop().unwrap();
    Ok(ProjectionBasis { ppa_x: x, ppa_y: y, ppa_z: z, origin: vec![0.0; n] })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Objective after each assignment step.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centroids.iter().enumerate() {
        let d = sq_dist(p, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm with k-means++ seeding. Runs until the assignment stops
/// changing or `max_iter` assignment steps have been made.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<KMeansResult, SubspaceError> {
    if k == 0 {
        return Err(SubspaceError::ZeroK);
    }
    let n = points.len();
    if n < 3 * k {
        return Err(SubspaceError::TooFewPoints { k, needed: 3 * k, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    chosen = i;
                    break;
                }
                r -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }

    let dims = points[0].len();
    let mut labels = vec![usize::MAX; n];
    let mut objective = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        let mut obj = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            obj += d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        objective.push(obj);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dims]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&labels) {
            linalg::axpy(&mut sums[c], 1.0, p);
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // Empty clusters restart at the point farthest from its centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centroids[labels[a]]).total_cmp(&sq_dist(&points[b], &centroids[labels[b]]))
                    })
                    .unwrap();
                counts[labels[far]] -= 1;
                labels[far] = c;
                counts[c] = 1;
                centroids[c] = points[far].clone();
            }
        }
    }
    Ok(KMeansResult { labels, centroids, objective, iterations })
}

/// Clusters the selected points and describes each cluster by the basis of
/// its top principal components. Clusters come back largest first.
pub fn kmeans_subspaces(
    points: &[Vec<f64>],
    ids: &[usize],
    k: usize,
    seed: u64,
) -> Result<Vec<SubspaceCluster>, SubspaceError> {
    let n = points.first().map_or(0, |p| p.len());
    if n < 3 {
        return Err(SubspaceError::TooFewDims(n));
    }
    let subset: Vec<Vec<f64>> = ids.iter().map(|&i| points[i].clone()).collect();
    let km = kmeans(&subset, k, seed, KMEANS_MAX_ITER)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (pos, &c) in km.labels.iter().enumerate() {
        members[c].push(ids[pos]);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| members[b].len().cmp(&members[a].len()).then(members[a].first().cmp(&members[b].first())));

    let mut out = Vec::with_capacity(k);
    for (tag, &c) in order.iter().enumerate() {
        let pts: Vec<Vec<f64>> = members[c].iter().map(|&i| points[i].clone()).collect();
        let basis = cluster_basis(&pts, &km.centroids[c], seed.wrapping_add(tag as u64))?;
        out.push(SubspaceCluster {
            member_ids: members[c].clone(),
            basis,
            centroid: km.centroids[c].clone(),
            color_tag: tag as u8,
        });
    }
    Ok(out)
}

/// Top-3 principal frame of a cluster; directions the members do not span
/// are filled with random orthonormal vectors.
fn cluster_basis(pts: &[Vec<f64>], centroid: &[f64], seed: u64) -> Result<ProjectionBasis, SubspaceError> {
    let n = centroid.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(3);
    if pts.len() >= 2 {
        let p = pca(pts, 3)?;
        if pts.len() >= 3 {
            let b = make_basis((&p.components[0], &p.components[1]), ZSource::ThirdPc(&p))?;
            return Ok(b.with_origin(centroid.to_vec()));
        }
        rows.extend(p.components.into_iter().zip(p.variances).filter(|(_, v)| *v > 0.0).map(|(c, _)| c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while rows.len() < 3 {
        if let Ok(v) = gram_schmidt(&rows, &gaussian(&mut rng, n)) {
            rows.push(v);
        }
    }
    Ok(ProjectionBasis {
        ppa_x: rows[0].clone(),
        ppa_y: rows[1].clone(),
        ppa_z: rows[2].clone(),
        origin: centroid.to_vec(),
    })
}

/// Hubert-Arabie adjusted Rand index between two labelings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    use std::collections::HashMap;
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len();
    let c2 = |x: usize| (x * x.saturating_sub(1) / 2) as f64;
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut ra: HashMap<usize, usize> = HashMap::new();
    let mut rb: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *ra.entry(x).or_default() += 1;
        *rb.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&v| c2(v)).sum();
    let sa: f64 = ra.values().map(|&v| c2(v)).sum();
    let sb: f64 = rb.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(n);
    let max = 0.5 * (sa + sb);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Per-point cluster column for export: `point_id,cluster` with the cluster's
/// color tag, or empty for points in no cluster.
pub fn assignments_csv(clusters: &[SubspaceCluster], n_points: usize) -> String {
    let mut tag: Vec<Option<u8>> = vec![None; n_points];
    for c in clusters {
        for &m in &c.member_ids {
            tag[m] = Some(c.color_tag);
        }
    }
    let mut out = String::from("point_id,cluster\n");
    for (i, t) in tag.iter().enumerate() {
        match t {
            Some(t) => out.push_str(&format!("{i},{t}\n")),
            None => out.push_str(&format!("{i},\n")),
        }
    }
    out
}
