#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use subtrack_core::navigation::{self, ChaseConfig, DragEvent, MouseButton};
use subtrack_core::projection::{self, TrackballState};
use subtrack_core::{linalg, subspace, Rotation3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian_points(rng: &mut ChaCha8Rng, count: usize, n: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| gaussian_vec(rng, n)).collect()
}

pub fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3 {
    let axis = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
    Rotation3::from_axis_angle(axis, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> TrackballState {
    TrackballState::new(subspace::random_subspace(n, rng.random()).unwrap())
}

fn screen_point(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2)]
}

/// One random navigation step; steps that refuse (degenerate or no-op
/// cases) leave the state as it was.
pub fn random_op(state: &TrackballState, rng: &mut ChaCha8Rng) -> TrackballState {
    let n = state.dims();
    let cfg = ChaseConfig::default();
    let next = match rng.random_range(0..5) {
        0 => Ok(projection::rotate(state, &random_rotation(rng))),
        1 => Ok(projection::bake_rotation(state)),
        2 => {
            let mut ev = DragEvent::new(screen_point(rng), screen_point(rng), MouseButton::Right);
            if rng.random_bool(0.3) {
                ev = ev.pinned(rng.random_range(0..n));
            }
            navigation::chase(state, &ev, &cfg).map_err(|_| ())
        }
        3 => projection::deep_adjust(state, rng.random_range(-2.0..2.0), cfg.k_a).map_err(|_| ()),
        _ => {
            let m = rng.random_range(2..=n.min(5));
            let mut dims: Vec<usize> = (0..n).collect();
            for i in 0..m {
                let j = rng.random_range(i..n);
                dims.swap(i, j);
            }
            projection::equal_express(state, &dims[..m]).map_err(|_| ())
        }
    };
    next.unwrap_or_else(|_| state.clone())
}

/// Largest |PPA_i . PPA_j - delta_ij| over the baked basis.
pub fn frame_error(state: &TrackballState) -> f64 {
    let b = state.baked_basis();
    linalg::orthonormality_error(&[b.ppa_x, b.ppa_y, b.ppa_z])
}

/// Leave-one-out 1-nearest-neighbour accuracy in 2-D: (plain, class-balanced).
pub fn nn_accuracy(xy: &[[f64; 2]], labels: &[usize]) -> (f64, f64) {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut correct = vec![0usize; k];
    let mut total = vec![0usize; k];
    for i in 0..xy.len() {
        let mut best = (f64::INFINITY, i);
        for j in 0..xy.len() {
            if i != j {
                let d = (xy[i][0] - xy[j][0]).powi(2) + (xy[i][1] - xy[j][1]).powi(2);
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        total[labels[i]] += 1;
        if labels[best.1] == labels[i] {
            correct[labels[i]] += 1;
        }
    }
    let plain = correct.iter().sum::<usize>() as f64 / xy.len() as f64;
    let present: Vec<usize> = (0..k).filter(|&c| total[c] > 0).collect();
    let balanced = present.iter().map(|&c| correct[c] as f64 / total[c] as f64).sum::<f64>() / present.len() as f64;
    (plain, balanced)
}

pub fn project_xy(x: &[f64], y: &[f64], points: &[Vec<f64>]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [linalg::dot(x, p), linalg::dot(y, p)]).collect()
}
