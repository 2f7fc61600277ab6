//! One exploration session: the loaded dataset, point tags, the current view,
//! saved views and paths, and the tunable configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aco::{self, AcoConfig, AcoError, Optimized, RunHooks, Scope};
use crate::dataset::{self, BrushAction, DataError, Dataset, LoadOptions, Normalization, PointTags};
use crate::fixtures::{self, ThreeClustersSpec, TubeStickSpec};
use crate::labels::{self, LabelPlacement};
use crate::navigation::{self, ChaseConfig, DragEvent, MouseButton, NavError};
use crate::projection::{self, ProjectionBasis, ProjectionError, TrackballState};
use crate::quality::{self, QualityError, QualityMetric};
use crate::subspace::{self, SubspaceCluster, SubspaceError};
use crate::trail::{self, SavedView, Thumbnail, TrailError, TrailMapLayout, ViewId};

pub const SESSION_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Navigation(#[from] NavError),
    #[error(transparent)]
    Optimizer(#[from] AcoError),
    #[error(transparent)]
    Quality(#[from] QualityError),
    #[error(transparent)]
    Trail(#[from] TrailError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error("io error: {0}")]
    Io(String),
    #[error("session file: {0}")]
    Format(String),
    #[error("session file does not match its dataset: {0}")]
    Mismatch(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    BadRequest(String),
}

impl SessionError {
    /// Stable machine-readable code used in protocol error responses.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::Data(DataError::Parse { .. }) => "parse_error",
            SessionError::Data(DataError::TooFewDims(_)) => "too_few_dims",
            SessionError::Data(DataError::BadId { .. }) => "bad_id",
            SessionError::Data(_) => "data_error",
            SessionError::Projection(ProjectionError::ColinearSelection) => "colinear_selection",
            SessionError::Projection(_) => "projection_error",
            SessionError::Navigation(NavError::NoAffectedDims) => "no_affected_dims",
            SessionError::Navigation(_) => "navigation_error",
            SessionError::Optimizer(AcoError::Cancelled) => "cancelled",
            SessionError::Optimizer(AcoError::DegenerateData) => "degenerate_data",
            SessionError::Optimizer(AcoError::Quality(QualityError::MissingLabels(_))) => "missing_labels",
            SessionError::Optimizer(_) => "optimizer_error",
            SessionError::Quality(QualityError::MissingLabels(_)) => "missing_labels",
            SessionError::Quality(_) => "quality_error",
            SessionError::Trail(TrailError::PathTooShort(_)) => "path_too_short",
            SessionError::Trail(TrailError::UnknownView(_)) => "unknown_view",
            SessionError::Trail(_) => "trail_error",
            SessionError::Subspace(_) => "subspace_error",
            SessionError::Io(_) => "io_error",
            SessionError::Format(_) => "bad_session_file",
            SessionError::Mismatch(_) => "session_mismatch",
            SessionError::Config(_) => "bad_config",
            SessionError::BadRequest(_) => "bad_request",
        }
    }
}

/// Where the session's data came from; stored in session files so the data
/// can be rebuilt on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        class_column: Option<String>,
    },
    TubeStick(TubeStickSpec),
    ThreeClusters(ThreeClustersSpec),
    Inline {
        attributes: Vec<String>,
        rows: Vec<Vec<f64>>,
        #[serde(default)]
        classes: Option<Vec<usize>>,
        #[serde(default)]
        class_names: Vec<String>,
    },
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset, DataError> {
        match self {
            DataSource::Csv { path, class_column } => {
                dataset::load_csv(path, &LoadOptions { class_column: class_column.clone() })
            }
            DataSource::TubeStick(spec) => Ok(fixtures::gen_tube_stick(spec)?.dataset),
            DataSource::ThreeClusters(spec) => fixtures::gen_three_clusters(spec),
            DataSource::Inline { attributes, rows, classes, class_names } => {
                let classes = classes.clone().map(|c| {
                    let names = if class_names.is_empty() {
                        let k = c.iter().max().map_or(0, |m| m + 1);
                        (0..k).map(|i| i.to_string()).collect()
                    } else {
                        class_names.clone()
                    };
                    (c, names)
                });
                Dataset::from_raw("inline", attributes.clone(), rows.clone(), classes)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub chase: ChaseConfig,
    pub aco: AcoConfig,
    pub metric: QualityMetric,
    pub scope: Scope,
    pub max_labels: usize,
    /// Frames per keyframe step (the "Next" button).
    pub path_frames: usize,
    /// Thumbnail diameter in the trail map, as a fraction of its width.
    pub small_view_size: f64,
    /// Path slider position last set.
    pub traverse: f64,
    /// Fraction of points flagged as belonging to the current 3-D subspace.
    pub membership_quantile: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            chase: ChaseConfig::default(),
            aco: AcoConfig::default(),
            metric: QualityMetric::Holes,
            scope: Scope::Narrow,
            max_labels: labels::DEFAULT_MAX_LABELS,
            path_frames: trail::PATH_FRAMES,
            small_view_size: 0.12,
            traverse: 0.0,
            membership_quantile: 0.25,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), SessionError> {
        self.aco.validate().map_err(|e| SessionError::Config(e.to_string()))?;
        if !(self.membership_quantile > 0.0 && self.membership_quantile <= 1.0) {
            return Err(SessionError::Config("membership_quantile must lie in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.traverse) {
            return Err(SessionError::Config("traverse must lie in [0, 1]".into()));
        }
        if !(self.small_view_size > 0.0 && self.small_view_size <= 1.0) {
            return Err(SessionError::Config("small_view_size must lie in (0, 1]".into()));
        }
        if self.path_frames == 0 {
            return Err(SessionError::Config("path_frames must be positive".into()));
        }
        Ok(())
    }

    /// Applies a partial JSON object on top of this config. Nested objects
    /// merge key by key; unknown keys are rejected.
    pub fn merged(&self, patch: &serde_json::Value) -> Result<Config, SessionError> {
        let mut base = serde_json::to_value(self).map_err(|e| SessionError::Config(e.to_string()))?;
        merge_json(&mut base, patch);
        let cfg: Config = serde_json::from_value(base).map_err(|e| SessionError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn merge_json(base: &mut serde_json::Value, patch: &serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                // a metric or range names a new kind: replace rather than merge
                let replace = v.get("kind").is_some();
                match b.get_mut(k) {
                    Some(slot) if !replace => merge_json(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePoint {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub color: u8,
    pub active: bool,
    /// Close to the current 3-D subspace.
    pub member: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameLabel {
    pub name: String,
    #[serde(flatten)]
    pub placement: LabelPlacement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStatus {
    pub views: Vec<ViewId>,
    /// Index of the keyframe most recently reached.
    pub keyframe: usize,
    pub t: f64,
}

/// Everything the UI needs to draw the current view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub points: Vec<FramePoint>,
    pub labels: Vec<FrameLabel>,
    pub state: TrackballState,
    pub selected_dims: Vec<usize>,
    pub score: Option<f64>,
    pub path: Option<PathStatus>,
    pub view_count: usize,
}

/// Everything needed to run an optimization away from the session.
#[derive(Clone)]
pub struct OptimizeJob {
    dataset: Arc<Dataset>,
    ids: Vec<usize>,
    labels: Option<Vec<usize>>,
    state: TrackballState,
    pub metric: QualityMetric,
    pub scope: Scope,
    pub cfg: AcoConfig,
}

impl OptimizeJob {
    pub fn run(&self, hooks: RunHooks<'_>) -> Result<Optimized, SessionError> {
        Ok(aco::optimize_view(
            &self.state,
            &self.dataset.normalized,
            &self.ids,
            self.labels.as_deref(),
            &self.metric,
            self.scope,
            &self.cfg,
            hooks,
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionFile {
    pub version: u32,
    pub source: DataSource,
    pub normalization: Normalization,
    pub n_points: usize,
    pub n_dims: usize,
    pub tags: PointTags,
    pub state: TrackballState,
    pub views: Vec<SavedView>,
    pub paths: Vec<Vec<ViewId>>,
    pub active_path: Option<PathStatus>,
    pub config: Config,
    pub selected_dims: Vec<usize>,
    pub clusters: Vec<SubspaceCluster>,
    pub last_score: Option<f64>,
    pub next_view_id: ViewId,
    /// False when saved in the middle of a drag gesture.
    #[serde(default = "labels_fixed_default")]
    pub labels_fixed: bool,
}

fn labels_fixed_default() -> bool {
    true
}

pub struct Session {
    source: DataSource,
    dataset: Arc<Dataset>,
    pub tags: PointTags,
    pub state: TrackballState,
    pub views: Vec<SavedView>,
    pub paths: Vec<Vec<ViewId>>,
    pub active_path: Option<PathStatus>,
    pub config: Config,
    pub selected_dims: Vec<usize>,
    pub clusters: Vec<SubspaceCluster>,
    pub last_score: Option<f64>,
    next_view_id: ViewId,
    /// Whether label overlap removal runs (off while a drag is in progress).
    labels_fixed: bool,
}

fn now_secs() -> u64 {
    #[cfg(not(target_arch = "wasm32"))]
    {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
    }
    #[cfg(target_arch = "wasm32")]
    {
        0
    }
}

impl Session {
    pub fn open(source: DataSource) -> Result<Self, SessionError> {
        let dataset = source.load()?;
        Ok(Self::with_dataset(source, dataset))
    }

    pub fn with_dataset(source: DataSource, dataset: Dataset) -> Self {
        let n = dataset.n_points();
        let dims = dataset.n_dims();
        Self {
            source,
            dataset: Arc::new(dataset),
            tags: PointTags::new(n),
            state: TrackballState::new(ProjectionBasis::axis_aligned(dims)),
            views: Vec::new(),
            paths: Vec::new(),
            active_path: None,
            config: Config::default(),
            selected_dims: Vec::new(),
            clusters: Vec::new(),
            last_score: None,
            next_view_id: 1,
            labels_fixed: true,
        }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn source(&self) -> &DataSource {
        &self.source
    }

    pub fn active_ids(&self) -> Vec<usize> {
        self.tags.active_ids()
    }

    /// Class ids used by class-based metrics: the dataset's class column, else
    /// the current cluster assignment, else brush colours when any are set.
    pub fn metric_labels(&self) -> Option<Vec<usize>> {
        if let Some(c) = self.dataset.labels() {
            return Some(c.to_vec());
        }
        if !self.clusters.is_empty() {
            let mut l = vec![usize::MAX; self.dataset.n_points()];
            for c in &self.clusters {
                for &m in &c.member_ids {
                    l[m] = c.color_tag as usize;
                }
            }
            return Some(l);
        }
        if self.tags.color.iter().any(|&c| c != 0) {
            return Some(self.tags.color.iter().map(|&c| c as usize).collect());
        }
        None
    }

    pub fn frame(&self) -> Frame {
        let data = &self.dataset.normalized;
        let cloud = projection::project(&self.state, data);
        let member = projection::membership(&self.state.basis, data, self.config.membership_quantile);
        let points = (0..cloud.len())
            .map(|i| FramePoint {
                id: i,
                x: cloud.xy[i][0],
                y: cloud.xy[i][1],
                z: cloud.z[i],
                color: self.tags.color[i],
                active: self.tags.active[i],
                member: member[i] && self.tags.active[i],
            })
            .collect();
        let base = labels::base_angles(&self.state.baked_basis());
        let placed = if self.labels_fixed {
            labels::resolve_overlaps(&base, self.config.max_labels, &self.selected_dims)
        } else {
            labels::visible_without_adjustment(&base, self.config.max_labels, &self.selected_dims)
        };
        let labels = placed
            .into_iter()
            .map(|p| FrameLabel { name: self.dataset.attributes[p.dim].clone(), placement: p })
            .collect();
        Frame {
            points,
            labels,
            state: self.state.clone(),
            selected_dims: self.selected_dims.clone(),
            score: self.last_score,
            path: self.active_path.clone(),
            view_count: self.views.len(),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<(), SessionError> {
        let n = self.dataset.n_dims();
        if dim >= n {
            return Err(SessionError::BadRequest(format!("dimension {dim} out of range for {n} dimensions")));
        }
        Ok(())
    }

    /// Applies one drag increment. `fixed` marks the end of a gesture, when
    /// label overlap removal is switched back on.
    pub fn drag(&mut self, ev: &DragEvent, fixed: bool) -> Result<(), SessionError> {
        if let Some(d) = ev.pinned_dim {
            self.check_dim(d)?;
        }
        self.labels_fixed = fixed;
        if ev.from == ev.to {
            return Ok(());
        }
        self.state = match ev.button {
            MouseButton::Left => projection::rotate(&self.state, &navigation::drag_to_rotation(ev)),
            MouseButton::Right => navigation::chase(&self.state, ev, &self.config.chase)?,
            MouseButton::Middle => {
                projection::deep_adjust(&self.state, ev.to[1] - ev.from[1], self.config.chase.k_a)?
            }
        };
        Ok(())
    }

    pub fn deep(&mut self, amount: f64) -> Result<(), SessionError> {
        self.state = projection::deep_adjust(&self.state, amount, self.config.chase.k_a)?;
        Ok(())
    }

    pub fn equal_express(&mut self, dims: &[usize]) -> Result<(), SessionError> {
        self.state = projection::equal_express(&self.state, dims)?;
        self.selected_dims = dims.to_vec();
        Ok(())
    }

    pub fn select_dims(&mut self, dims: &[usize]) -> Result<(), SessionError> {
        for &d in dims {
            self.check_dim(d)?;
        }
        self.selected_dims = dims.to_vec();
        Ok(())
    }

    /// Rotates the view so `dim` points at `angle_deg` on screen.
    pub fn align(&mut self, dim: usize, angle_deg: f64, step: f64) -> Result<(), SessionError> {
        self.check_dim(dim)?;
        let t = angle_deg.to_radians();
        self.state = navigation::align_attribute(&self.state, dim, [t.cos(), t.sin()], step, &self.config.chase)?;
        Ok(())
    }

    pub fn set_zoom(&mut self, zoom: f64) -> Result<(), SessionError> {
        if !(zoom.is_finite() && zoom > 0.0) {
            return Err(SessionError::BadRequest("zoom must be positive and finite".into()));
        }
        self.state.zoom = zoom;
        Ok(())
    }

    pub fn optimize_job(&self, metric: Option<QualityMetric>, scope: Option<Scope>) -> OptimizeJob {
        let metric = metric.unwrap_or_else(|| self.config.metric.clone());
        let labels = if metric.needs_labels() { self.metric_labels() } else { None };
        OptimizeJob {
            dataset: Arc::clone(&self.dataset),
            ids: self.active_ids(),
            labels,
            state: self.state.clone(),
            metric,
            scope: scope.unwrap_or(self.config.scope),
            cfg: self.config.aco.clone(),
        }
    }

    pub fn apply_optimized(&mut self, out: &Optimized) {
        self.state = out.state.clone();
        // non-finite scores would not survive a JSON round trip
        self.last_score = out.score.is_finite().then_some(out.score);
        self.labels_fixed = true;
    }

    pub fn optimize(&mut self, metric: Option<QualityMetric>, scope: Option<Scope>) -> Result<Optimized, SessionError> {
        let out = self.optimize_job(metric, scope).run(RunHooks::default())?;
        self.apply_optimized(&out);
        Ok(out)
    }

    /// Scores the current view of the active points.
    pub fn score_current(&self, metric: Option<&QualityMetric>) -> Result<f64, SessionError> {
        let metric = metric.unwrap_or(&self.config.metric);
        let labels = if metric.needs_labels() { self.metric_labels() } else { None };
        let cloud = projection::project_ids(&self.state, &self.dataset.normalized, &self.active_ids());
        Ok(quality::score(metric, &cloud, &self.dataset.normalized, labels.as_deref())?)
    }

    /// Current projection of the active points, as stored with saved views.
    pub fn thumbnail(&self) -> Thumbnail {
        let ids = self.active_ids();
        let cloud = projection::project_ids(&self.state, &self.dataset.normalized, &ids);
        let tags = ids.iter().map(|&i| self.tags.color[i]).collect();
        Thumbnail { xy: cloud.xy, point_ids: ids, tags }
    }

    pub fn save_view(&mut self, name: Option<String>) -> ViewId {
        let id = self.next_view_id;
        self.next_view_id += 1;
        self.views.push(SavedView {
            view_id: id,
            basis: self.state.basis.clone(),
            rotation: self.state.rotation,
            zoom: self.state.zoom,
            name: name.unwrap_or_else(|| format!("view {id}")),
            thumbnail: self.thumbnail(),
            created_at: now_secs(),
        });
        id
    }

    pub fn view(&self, id: ViewId) -> Result<&SavedView, SessionError> {
        Ok(self.views.iter().find(|v| v.view_id == id).ok_or(TrailError::UnknownView(id))?)
    }

    pub fn restore_view(&mut self, id: ViewId) -> Result<(), SessionError> {
        self.state = self.view(id)?.state();
        self.labels_fixed = true;
        Ok(())
    }

    pub fn layout(&self) -> TrailMapLayout {
        trail::layout(&self.views, &self.paths)
    }

    fn path_views(&self, ids: &[ViewId]) -> Result<Vec<&SavedView>, SessionError> {
        ids.iter().map(|&id| self.view(id)).collect()
    }

    pub fn build_path(&mut self, ids: &[ViewId]) -> Result<(), SessionError> {
        if ids.len() < 2 {
            return Err(TrailError::PathTooShort(ids.len()).into());
        }
        let first = self.path_views(ids)?[0].state();
        self.paths.push(ids.to_vec());
        self.active_path = Some(PathStatus { views: ids.to_vec(), keyframe: 0, t: 0.0 });
        self.state = TrackballState { rotation: Default::default(), zoom: first.zoom, basis: first.baked_basis() };
        Ok(())
    }

    fn require_path(&self) -> Result<PathStatus, SessionError> {
        self.active_path.clone().ok_or_else(|| SessionError::BadRequest("no active path; call build_path first".into()))
    }

    pub fn path_t(&mut self, t: f64) -> Result<(), SessionError> {
        let mut status = self.require_path()?;
        let state = trail::path_at(&self.path_views(&status.views)?, t)?;
        status.t = t;
        self.state = state;
        self.config.traverse = t;
        self.active_path = Some(status);
        Ok(())
    }

    /// Animates to the next keyframe; returns the intermediate states, the
    /// last of which becomes the current view. At the final keyframe this is
    /// a no-op returning the keyframe itself.
    pub fn path_next(&mut self) -> Result<Vec<TrackballState>, SessionError> {
        let mut status = self.require_path()?;
        let views = self.path_views(&status.views)?;
        let last = views.len() - 1;
        if status.keyframe >= last {
            let s = views[last].state();
            let s = TrackballState { rotation: Default::default(), zoom: s.zoom, basis: s.baked_basis() };
            self.state = s.clone();
            return Ok(vec![s]);
        }
        let frames = trail::segment_frames(&views, status.keyframe, self.config.path_frames)?;
        status.keyframe += 1;
        let lengths: Vec<f64> = views.windows(2).map(|w| trail::segment_length(w[0], w[1])).collect();
        let total: f64 = lengths.iter().sum();
        status.t = if total > 0.0 { lengths[..status.keyframe].iter().sum::<f64>() / total } else { 1.0 };
        self.state = frames.last().expect("at least one frame").clone();
        self.active_path = Some(status);
        Ok(frames)
    }

    pub fn brush(&mut self, ids: &[usize], action: BrushAction) -> Result<(), SessionError> {
        self.tags = dataset::brush(&self.tags, ids, action)?;
        Ok(())
    }

    pub fn set_config(&mut self, patch: &serde_json::Value) -> Result<(), SessionError> {
        self.config = self.config.merged(patch)?;
        Ok(())
    }

    pub fn generate_subspaces(&mut self, k: usize, seed: u64) -> Result<&[SubspaceCluster], SessionError> {
        self.clusters = subspace::kmeans_subspaces(&self.dataset.normalized, &self.active_ids(), k, seed)?;
        Ok(&self.clusters)
    }

    pub fn random_subspace(&mut self, seed: u64) -> Result<(), SessionError> {
        let origin = self.state.basis.origin.clone();
        let basis = subspace::random_subspace(self.dataset.n_dims(), seed)?;
        self.state = TrackballState { rotation: Default::default(), zoom: self.state.zoom, basis: basis.with_origin(origin) };
        Ok(())
    }

    pub fn use_subspace(&mut self, index: usize) -> Result<(), SessionError> {
        let c = self
            .clusters
            .get(index)
            .ok_or_else(|| SessionError::BadRequest(format!("no subspace cluster {index}")))?;
        self.state = TrackballState { rotation: Default::default(), zoom: self.state.zoom, basis: c.basis.clone() };
        Ok(())
    }

    pub fn to_file(&self) -> SessionFile {
        SessionFile {
            version: SESSION_VERSION,
            source: self.source.clone(),
            normalization: self.dataset.normalization.clone(),
            n_points: self.dataset.n_points(),
            n_dims: self.dataset.n_dims(),
            tags: self.tags.clone(),
            state: self.state.clone(),
            views: self.views.clone(),
            paths: self.paths.clone(),
            active_path: self.active_path.clone(),
            config: self.config.clone(),
            selected_dims: self.selected_dims.clone(),
            clusters: self.clusters.clone(),
            last_score: self.last_score,
            next_view_id: self.next_view_id,
            labels_fixed: self.labels_fixed,
        }
    }

    /// Rebuilds a session, reloading its data from the recorded source and
    /// checking it still matches.
    pub fn from_file(file: SessionFile) -> Result<Self, SessionError> {
        let dataset = file.source.load()?;
        Self::from_file_with_dataset(file, dataset)
    }

    pub fn from_file_with_dataset(file: SessionFile, dataset: Dataset) -> Result<Self, SessionError> {
        if file.version != SESSION_VERSION {
            return Err(SessionError::Format(format!("unsupported version {}", file.version)));
        }
        if dataset.n_points() != file.n_points || dataset.n_dims() != file.n_dims {
            return Err(SessionError::Mismatch(format!(
                "expected {}x{}, data is {}x{}",
                file.n_points,
                file.n_dims,
                dataset.n_points(),
                dataset.n_dims()
            )));
        }
        if dataset.normalization != file.normalization {
            return Err(SessionError::Mismatch("normalization parameters differ".into()));
        }
        if file.tags.len() != file.n_points || file.state.dims() != file.n_dims {
            return Err(SessionError::Format("tag or basis length does not match the data".into()));
        }
        file.config.validate()?;
        Ok(Self {
            source: file.source,
            dataset: Arc::new(dataset),
            tags: file.tags,
            state: file.state,
            views: file.views,
            paths: file.paths,
            active_path: file.active_path,
            config: file.config,
            selected_dims: file.selected_dims,
            clusters: file.clusters,
            last_score: file.last_score,
            next_view_id: file.next_view_id,
            labels_fixed: file.labels_fixed,
        })
    }

    pub fn to_json(&self) -> Result<String, SessionError> {
        serde_json::to_string_pretty(&self.to_file()).map_err(|e| SessionError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, SessionError> {
        let file: SessionFile = serde_json::from_str(text).map_err(|e| SessionError::Format(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn save(&self, path: &Path) -> Result<(), SessionError> {
        std::fs::write(path, self.to_json()?).map_err(|e| SessionError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, SessionError> {
        let text = std::fs::read_to_string(path).map_err(|e| SessionError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
