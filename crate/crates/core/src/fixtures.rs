//! Synthetic datasets with planted structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataError, Dataset};
use crate::linalg::{self, gram_schmidt};

pub const TUBE_RADIUS: f64 = 1.0;
pub const TUBE_HALF_LENGTH: f64 = 2.0;
pub const TUBE_RADIAL_SIGMA: f64 = 0.05;
pub const STICK_RADIAL_SIGMA: f64 = 0.02;
pub const EMBED_NOISE_SIGMA: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeStickSpec {
    pub n_tube: usize,
    pub n_stick: usize,
    pub dims: usize,
    pub seed: u64,
    /// Skip the random rotation and embed into the first three axes.
    #[serde(default)]
    pub axis_aligned: bool,
}

impl Default for TubeStickSpec {
    fn default() -> Self {
        Self { n_tube: 900, n_stick: 100, dims: 6, seed: 0, axis_aligned: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThreeClustersSpec {
    pub n_per: usize,
    pub dims: usize,
    pub seed: u64,
    pub base_sigma: f64,
    pub stretch_sigma: f64,
    /// Distance of each cluster mean from the origin in the free dimensions.
    pub mean_offset: f64,
}

impl Default for ThreeClustersSpec {
    fn default() -> Self {
        Self { n_per: 300, dims: 12, seed: 0, base_sigma: 0.5, stretch_sigma: 2.5, mean_offset: 4.5 }
    }
}

/// A tube-and-stick sample plus its construction frame.
#[derive(Clone, Debug)]
pub struct TubeStick {
    pub dataset: Dataset,
    /// Points before rotation and embedding; the tube axis is the third coordinate.
    pub construction: Vec<[f64; 3]>,
    /// Rows are the N-D images of the three construction axes.
    pub injection: [Vec<f64>; 3],
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform random rotation from a normalized Gaussian quaternion.
fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let q: Vec<f64> = (0..4).map(|_| gaussian(rng)).collect();
    let q = linalg::normalized(&q).unwrap_or_else(|| vec![1.0, 0.0, 0.0, 0.0]);
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Hollow cylinder shell with a thin stick along its axis, rotated off every
/// coordinate axis and embedded in `dims` dimensions. Class 0 is tube, 1 is stick.
pub fn gen_tube_stick(spec: &TubeStickSpec) -> Result<TubeStick, DataError> {
    let n = spec.dims;
    if n < 3 {
        return Err(DataError::TooFewDims(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut construction = Vec::with_capacity(spec.n_tube + spec.n_stick);
    let mut labels = Vec::with_capacity(spec.n_tube + spec.n_stick);
    for _ in 0..spec.n_tube {
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let r = TUBE_RADIUS + TUBE_RADIAL_SIGMA * gaussian(&mut rng);
        let h = rng.random_range(-TUBE_HALF_LENGTH..TUBE_HALF_LENGTH);
        construction.push([r * t.cos(), r * t.sin(), h]);
        labels.push(0);
    }
    for _ in 0..spec.n_stick {
        let h = rng.random_range(-TUBE_HALF_LENGTH..TUBE_HALF_LENGTH);
        construction.push([STICK_RADIAL_SIGMA * gaussian(&mut rng), STICK_RADIAL_SIGMA * gaussian(&mut rng), h]);
        labels.push(1);
    }

    let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let injection = loop {
        let rot = if spec.axis_aligned { identity } else { random_rotation(&mut rng) };
        let embed: Vec<Vec<f64>> = if spec.axis_aligned {
            (0..3).map(|k| linalg::unit_axis(n, k)).collect()
        } else {
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(3);
            while rows.len() < 3 {
                let cand: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
                if let Ok(v) = gram_schmidt(&rows, &cand) {
                    rows.push(v);
                }
            }
            rows
        };
        // injection[k] = image of construction axis k = sum_i rot[i][k] * embed[i]
        let injection: [Vec<f64>; 3] = std::array::from_fn(|k| {
            let mut v = vec![0.0; n];
            for i in 0..3 {
                linalg::axpy(&mut v, rot[i][k], &embed[i]);
            }
            v
        });
        // keep the tube axis away from every coordinate axis
        if spec.axis_aligned || injection[2].iter().all(|c| c.abs() < 0.8) {
            break injection;
        }
    };
    let raw: Vec<Vec<f64>> = construction
        .iter()
        .map(|p| {
            let mut v: Vec<f64> = (0..n).map(|_| EMBED_NOISE_SIGMA * gaussian(&mut rng)).collect();
            for k in 0..3 {
                linalg::axpy(&mut v, p[k], &injection[k]);
            }
            v
        })
        .collect();
    let attributes = (0..n).map(|i| format!("x{i}")).collect();
    let dataset = Dataset::from_raw(
        "tube-stick",
        attributes,
        raw,
        Some((labels, vec!["tube".to_string(), "stick".to_string()])),
    )?;
    Ok(TubeStick { dataset, construction, injection })
}

/// Dimension subset along which cluster `c` is stretched.
pub fn stretched_dims(c: usize, n: usize) -> [usize; 3] {
    [(3 * c) % n, (3 * c + 1) % n, (3 * c + 2) % n]
}

/// Three Gaussian clusters, each stretched along its own three dimensions,
/// with means set apart mostly in dimensions none of them stretch.
pub fn gen_three_clusters(spec: &ThreeClustersSpec) -> Result<Dataset, DataError> {
    let n = spec.dims;
    if n < 4 {
        return Err(DataError::TooFewDims(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let free: Vec<usize> = (0..n).filter(|d| (0..3).all(|c| !stretched_dims(c, n).contains(d))).collect();
    let mut raw = Vec::with_capacity(3 * spec.n_per);
    let mut labels = Vec::with_capacity(3 * spec.n_per);
    for c in 0..3 {
        let stretch = stretched_dims(c, n);
        let mut mean = vec![0.0; n];
        let angle = c as f64 * std::f64::consts::TAU / 3.0;
        match free.len() {
            0 => mean[(3 * c + 3) % n] += spec.mean_offset,
            1 => mean[free[0]] = spec.mean_offset * (c as f64 - 1.0),
            _ => {
                mean[free[0]] = spec.mean_offset * angle.cos();
                mean[free[1]] = spec.mean_offset * angle.sin();
            }
        }
        for _ in 0..spec.n_per {
            let p: Vec<f64> = (0..n)
                .map(|d| {
                    let s = if stretch.contains(&d) { spec.stretch_sigma } else { spec.base_sigma };
                    mean[d] + s * gaussian(&mut rng)
                })
                .collect();
            raw.push(p);
            labels.push(c);
        }
    }
    let attributes = (0..n).map(|i| format!("x{i}")).collect();
    Dataset::from_raw("three-clusters", attributes, raw, Some((labels, vec!["a".into(), "b".into(), "c".into()])))
}
