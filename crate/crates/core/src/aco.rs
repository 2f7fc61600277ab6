//! Grid-based ant colony projection pursuit over PPA-x/PPA-y weights.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, gram_schmidt, normalized, Rotation3};
use crate::projection::{bake_rotation, complete_depth, ProjectionBasis, ProjectionError, TrackballState};
use crate::quality::{score_xy, QualityError, QualityMetric};

/// Pheromone never evaporates below this.
pub const PHEROMONE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcoError {
    #[error("invalid optimizer config: {0}")]
    BadConfig(String),
    #[error("every candidate view is degenerate (data rank < 2)")]
    DegenerateData,
    #[error("optimization cancelled")]
    Cancelled,
    #[error(transparent)]
    Quality(#[from] QualityError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchRange {
    Global,
    /// Only levels within `half_width` of the initial level are sampled.
    Window { half_width: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcoConfig {
    pub levels_per_param: usize,
    pub ants: usize,
    pub generations: usize,
    pub evaporation: f64,
    pub init_boost: f64,
    pub elite: usize,
    pub range: SearchRange,
    pub seed: u64,
}

impl Default for AcoConfig {
    fn default() -> Self {
        Self {
            levels_per_param: 21,
            ants: 24,
            generations: 60,
            evaporation: 0.1,
            init_boost: 5.0,
            elite: 4,
            range: SearchRange::Global,
            seed: 0,
        }
    }
}

impl AcoConfig {
    pub fn validate(&self) -> Result<(), AcoError> {
        let bad = |m: &str| Err(AcoError::BadConfig(m.to_string()));
        if self.levels_per_param < 3 {
            return bad("levels_per_param must be at least 3");
        }
        if self.ants == 0 {
            return bad("ants must be positive");
        }
        if self.elite > self.ants {
            return bad("elite must not exceed ants");
        }
        if !(self.evaporation > 0.0 && self.evaporation < 1.0) {
            return bad("evaporation must lie in (0, 1)");
        }
        if !(self.init_boost > 0.0) {
            return bad("init_boost must be positive");
        }
        Ok(())
    }
}

/// Which parameter frame and range the in-place optimizer searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Six weights over the current 3-D subspace only.
    WithinView,
    Narrow,
    Expanded,
    /// All weights over the full coordinate frame, unrestricted.
    Global,
}

impl Scope {
    pub fn range(self) -> SearchRange {
        match self {
            Scope::WithinView => SearchRange::Global,
            Scope::Narrow => SearchRange::Window { half_width: 2 },
            Scope::Expanded => SearchRange::Window { half_width: 6 },
            Scope::Global => SearchRange::Global,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcoState {
    /// One row of `L` pheromone values per parameter.
    pub pheromone: Vec<Vec<f64>>,
    pub level_values: Vec<f64>,
    /// Inclusive sampleable level range per parameter.
    pub allowed: Vec<(usize, usize)>,
    pub best: Option<(Vec<usize>, f64)>,
}

impl AcoState {
    pub fn sampleable(&self, param: usize) -> usize {
        let (lo, hi) = self.allowed[param];
        hi - lo + 1
    }

    /// Per-parameter level with the most pheromone inside the allowed range.
    pub fn argmax(&self) -> Vec<usize> {
        self.pheromone
            .iter()
            .zip(&self.allowed)
            .map(|(row, &(lo, hi))| {
                let mut best = lo;
                for l in lo..=hi {
                    if row[l] > row[best] {
                        best = l;
                    }
                }
                best
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcoResult {
    pub ppa_x: Vec<f64>,
    pub ppa_y: Vec<f64>,
    pub score: f64,
    /// Best score so far after each generation.
    pub trace: Vec<f64>,
}

/// Optional progress reporting and cancellation for a run.
#[derive(Default, Clone, Copy)]
pub struct RunHooks<'a> {
    pub progress: Option<&'a (dyn Fn(usize, f64) + Sync)>,
    pub cancel: Option<&'a AtomicBool>,
}

pub fn level_values(l: usize) -> Vec<f64> {
    let m = (l - 1) as f64;
    (0..l).map(|i| (2.0 * i as f64 - m) / m).collect()
}

pub fn nearest_level(w: f64, l: usize) -> usize {
    let t = ((w.clamp(-1.0, 1.0) + 1.0) / 2.0 * (l - 1) as f64).round();
    (t as usize).min(l - 1)
}

/// Seeds pheromone from an initial x/y pair given directly in parameter space
/// (coordinate weights for a global search).
pub fn init_pheromone(initial: (&[f64], &[f64]), cfg: &AcoConfig) -> Result<AcoState, AcoError> {
    let weights: Vec<f64> = initial.0.iter().chain(initial.1).copied().collect();
    init_from_weights(&weights, cfg)
}

fn init_from_weights(weights: &[f64], cfg: &AcoConfig) -> Result<AcoState, AcoError> {
    cfg.validate()?;
    let l = cfg.levels_per_param;
    let mut pheromone = Vec::with_capacity(weights.len());
    let mut allowed = Vec::with_capacity(weights.len());
    for &w in weights {
        let k = nearest_level(w, l);
        let mut row = vec![1.0; l];
        row[k] = 1.0 + cfg.init_boost;
        pheromone.push(row);
        allowed.push(match cfg.range {
            SearchRange::Global => (0, l - 1),
            SearchRange::Window { half_width } => (k.saturating_sub(half_width), (k + half_width).min(l - 1)),
        });
    }
    Ok(AcoState { pheromone, level_values: level_values(l), allowed, best: None })
}

/// Global search over the 2N coordinate weights of PPA-x and PPA-y.
pub fn run(
    points: &[Vec<f64>],
    ids: &[usize],
    labels: Option<&[usize]>,
    metric: &QualityMetric,
    initial: (&[f64], &[f64]),
    cfg: &AcoConfig,
) -> Result<AcoResult, AcoError> {
    let n = initial.0.len();
    let frame: Vec<Vec<f64>> = (0..n).map(|k| linalg::unit_axis(n, k)).collect();
    run_in_frame(points, ids, labels, metric, &frame, initial, cfg, RunHooks::default())
}

/// Searches weights over an arbitrary frame of N-D vectors: a candidate's
/// PPA-x is the normalized combination of the frame with the first half of
/// the sampled levels, PPA-y the second half Gram-Schmidt'd against it.
#[allow(clippy::too_many_arguments)]
pub fn run_in_frame(
    points: &[Vec<f64>],
    ids: &[usize],
    labels: Option<&[usize]>,
    metric: &QualityMetric,
    frame: &[Vec<f64>],
    initial: (&[f64], &[f64]),
    cfg: &AcoConfig,
    hooks: RunHooks<'_>,
) -> Result<AcoResult, AcoError> {
    let weights: Vec<f64> = [initial.0, initial.1]
        .iter()
        .flat_map(|v| frame.iter().map(move |f| linalg::dot(f, v)))
        .collect();
    let mut state = init_from_weights(&weights, cfg)?;
    let levels = state.level_values.clone();
    let evaluate = |choice: &[usize]| -> Result<f64, QualityError> {
        match candidate(frame, &levels, choice) {
            Some((x, y)) => view_score(points, ids, labels, metric, &x, &y),
            None => Ok(f64::NEG_INFINITY),
        }
    };

    // The quantized initial view is always a contender.
    let initial_choice = state.argmax();
    let s0 = evaluate(&initial_choice)?;
    state.best = Some((initial_choice, s0));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = Vec::with_capacity(cfg.generations);
    for gen in 0..cfg.generations {
        if hooks.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(AcoError::Cancelled);
        }
        let choices: Vec<Vec<usize>> = (0..cfg.ants).map(|_| sample_choice(&state, &mut rng)).collect();
        let scores = evaluate_all(&choices, &evaluate)?;

        let mut order: Vec<usize> = (0..choices.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let best_idx = order[0];
        let best_score = state.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1);
        if scores[best_idx] > best_score {
            state.best = Some((choices[best_idx].clone(), scores[best_idx]));
        }

        for row in &mut state.pheromone {
            for p in row.iter_mut() {
                *p = ((1.0 - cfg.evaporation) * *p).max(PHEROMONE_FLOOR);
            }
        }
        let finite: Vec<f64> = scores.iter().copied().filter(|s| s.is_finite()).collect();
        if !finite.is_empty() {
            let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
            for (rank, &a) in order.iter().take(cfg.elite).enumerate() {
                if !scores[a].is_finite() {
                    break;
                }
                let q = if hi > lo { (scores[a] - lo) / (hi - lo) } else { 1.0 };
                let amount = (cfg.elite - rank) as f64 / cfg.elite as f64 * (0.5 + 0.5 * q);
                deposit(&mut state, &choices[a], amount);
            }
        }
        if let Some((choice, s)) = state.best.clone() {
            if s.is_finite() {
                deposit(&mut state, &choice, 1.0);
            }
        }

        let so_far = state.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.1);
        trace.push(so_far);
        if let Some(progress) = hooks.progress {
            progress(gen, so_far);
        }
    }

    let arg = state.argmax();
    let arg_score = evaluate(&arg)?;
    let (best_choice, best_score) = state.best.clone().expect("initial view recorded");
    let (choice, score) = if arg_score > best_score { (arg, arg_score) } else { (best_choice, best_score) };
    if !score.is_finite() {
        return Err(AcoError::DegenerateData);
    }
    let (ppa_x, ppa_y) = candidate(frame, &levels, &choice).ok_or(AcoError::DegenerateData)?;
    Ok(AcoResult { ppa_x, ppa_y, score, trace })
}

#[cfg(feature = "parallel")]
fn evaluate_all<F>(choices: &[Vec<usize>], evaluate: &F) -> Result<Vec<f64>, QualityError>
where
    F: Fn(&[usize]) -> Result<f64, QualityError> + Sync,
{
    use rayon::prelude::*;
    choices.par_iter().map(|c| evaluate(c)).collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all<F>(choices: &[Vec<usize>], evaluate: &F) -> Result<Vec<f64>, QualityError>
where
    F: Fn(&[usize]) -> Result<f64, QualityError>,
{
    choices.iter().map(|c| evaluate(c)).collect()
}

fn deposit(state: &mut AcoState, choice: &[usize], amount: f64) {
    for (row, &l) in state.pheromone.iter_mut().zip(choice) {
        row[l] += amount;
    }
}

fn sample_choice(state: &AcoState, rng: &mut ChaCha8Rng) -> Vec<usize> {
    state
        .pheromone
        .iter()
        .zip(&state.allowed)
        .map(|(row, &(lo, hi))| {
            let total: f64 = row[lo..=hi].iter().sum();
            let mut r = rng.random::<f64>() * total;
            for (l, &p) in row.iter().enumerate().take(hi + 1).skip(lo) {
                if r < p {
                    return l;
                }
                r -= p;
            }
            hi
        })
        .collect()
}

/// Turns sampled levels into an orthonormal x/y pair, or `None` when either
/// axis degenerates.
pub fn candidate(frame: &[Vec<f64>], levels: &[f64], choice: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let d = frame.len();
    let n = frame.first()?.len();
    let combine = |part: &[usize]| {
        let mut v = vec![0.0; n];
        for (f, &l) in frame.iter().zip(part) {
            linalg::axpy(&mut v, levels[l], f);
        }
        v
    };
    let x = combine(&choice[..d]);
    let y = combine(&choice[d..]);
    if linalg::norm(&x) < 1e-8 {
        return None;
    }
    let x = normalized(&x)?;
    let y = gram_schmidt(std::slice::from_ref(&x), &y).ok()?;
    Some((x, y))
}

/// Scores the view spanned by an x/y pair over the selected points.
pub fn view_score(
    points: &[Vec<f64>],
    ids: &[usize],
    labels: Option<&[usize]>,
    metric: &QualityMetric,
    x: &[f64],
    y: &[f64],
) -> Result<f64, QualityError> {
    let xy: Vec<[f64; 2]> = ids.iter().map(|&i| [linalg::dot(x, &points[i]), linalg::dot(y, &points[i])]).collect();
    score_xy(metric, &xy, ids, points, labels)
}

/// Outcome of an in-place optimization.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimized {
    pub state: TrackballState,
    pub score: f64,
    /// Score of the view the optimizer started from.
    pub incoming: f64,
    pub trace: Vec<f64>,
}

/// Runs the optimizer from the current view. The result never scores below
/// the incoming view; if nothing better is found the baked incoming view is
/// returned.
#[allow(clippy::too_many_arguments)]
pub fn optimize_view(
    state: &TrackballState,
    points: &[Vec<f64>],
    ids: &[usize],
    labels: Option<&[usize]>,
    metric: &QualityMetric,
    scope: Scope,
    cfg: &AcoConfig,
    hooks: RunHooks<'_>,
) -> Result<Optimized, AcoError> {
    let baked = bake_rotation(state);
    let b = &baked.basis;
    let n = b.dims();
    let incoming = view_score(points, ids, labels, metric, &b.ppa_x, &b.ppa_y)?;
    let frame: Vec<Vec<f64>> = match scope {
        Scope::WithinView if n >= 3 => vec![b.ppa_x.clone(), b.ppa_y.clone(), b.ppa_z.clone()],
        Scope::WithinView => vec![b.ppa_x.clone(), b.ppa_y.clone()],
        _ => (0..n).map(|k| linalg::unit_axis(n, k)).collect(),
    };
    let cfg = AcoConfig { range: scope.range(), ..cfg.clone() };
    let res = run_in_frame(points, ids, labels, metric, &frame, (&b.ppa_x, &b.ppa_y), &cfg, hooks)?;
    if res.score <= incoming {
        return Ok(Optimized { state: baked, score: incoming, incoming, trace: res.trace });
    }
    let z = complete_depth(&res.ppa_x, &res.ppa_y, &b.ppa_z).map_err(ProjectionError::from)?;
    let basis = ProjectionBasis { ppa_x: res.ppa_x, ppa_y: res.ppa_y, ppa_z: z, origin: b.origin.clone() };
    Ok(Optimized {
        state: TrackballState { rotation: Rotation3::identity(), zoom: baked.zoom, basis },
        score: res.score,
        incoming,
        trace: res.trace,
    })
}

/// Two-column text export of a trace: generation index and best score.
pub fn trace_text(trace: &[f64]) -> String {
    let mut out = String::new();
    for (g, s) in trace.iter().enumerate() {
        out.push_str(&format!("{g}\t{s}\n"));
    }
    out
}
