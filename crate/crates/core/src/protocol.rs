//! Line-delimited JSON request/response protocol over a [`Session`].
//!
//! Each request is one JSON object with an `op` field and an optional `seq`
//! echoed in the reply. Replies are `{"seq", "ok": true, ...}` or
//! `{"seq", "ok": false, "error": {"code", "message"}}`. While an optimization
//! runs, `{"event": "progress", ...}` lines precede its reply.

use std::path::PathBuf;
use std::sync::Mutex;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::aco::{Optimized, RunHooks, Scope};
use crate::dataset::BrushAction;
use crate::navigation::{DragEvent, MouseButton};
use crate::quality::QualityMetric;
use crate::session::{DataSource, OptimizeJob, Session, SessionError};
use crate::trail::{self, ViewId};

/// Every op name the service understands.
pub const OPS: &[&str] = &[
    "load_data",
    "get_frame",
    "get_config",
    "set_config",
    "drag",
    "deep",
    "equal_express",
    "select_dims",
    "align",
    "set_zoom",
    "score",
    "optimize",
    "cancel",
    "save_view",
    "list_views",
    "restore_view",
    "build_path",
    "path_t",
    "path_next",
    "brush",
    "generate_subspaces",
    "use_subspace",
    "random_subspace",
    "save_session",
    "load_session",
];

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    LoadData {
        source: DataSource,
    },
    GetFrame,
    GetConfig,
    SetConfig {
        config: Value,
    },
    Drag {
        button: MouseButton,
        from: [f64; 2],
        to: [f64; 2],
        #[serde(default)]
        pinned_dim: Option<usize>,
        /// False while the gesture continues; labels are then not re-spread.
        #[serde(default = "yes", rename = "final")]
        is_final: bool,
    },
    Deep {
        amount: f64,
    },
    EqualExpress {
        dims: Vec<usize>,
    },
    SelectDims {
        dims: Vec<usize>,
    },
    Align {
        dim: usize,
        /// Target screen direction in degrees.
        angle: f64,
        #[serde(default = "one")]
        step: f64,
    },
    SetZoom {
        zoom: f64,
    },
    Score {
        #[serde(default)]
        metric: Option<QualityMetric>,
    },
    Optimize {
        #[serde(default)]
        metric: Option<QualityMetric>,
        #[serde(default)]
        scope: Option<Scope>,
    },
    Cancel,
    SaveView {
        #[serde(default)]
        name: Option<String>,
    },
    ListViews,
    RestoreView {
        id: ViewId,
    },
    BuildPath {
        ids: Vec<ViewId>,
    },
    PathT {
        t: f64,
    },
    PathNext {
        /// Include a full frame for every animation step.
        #[serde(default)]
        frames: bool,
    },
    Brush {
        ids: Vec<usize>,
        action: BrushKind,
        #[serde(default)]
        color: Option<u8>,
    },
    GenerateSubspaces {
        k: usize,
        #[serde(default)]
        seed: u64,
    },
    UseSubspace {
        index: usize,
    },
    RandomSubspace {
        #[serde(default)]
        seed: u64,
    },
    SaveSession {
        #[serde(default)]
        path: Option<PathBuf>,
    },
    LoadSession {
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        session: Option<Value>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrushKind {
    Color,
    Deactivate,
    Reactivate,
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

impl Request {
    /// Requests that change session state and therefore conflict with a
    /// running optimization.
    pub fn is_mutating(&self) -> bool {
        !matches!(
            self,
            Request::GetFrame
                | Request::GetConfig
                | Request::Score { .. }
                | Request::ListViews
                | Request::SaveSession { .. }
                | Request::Cancel
        )
    }
}

/// A protocol error before or during handling.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtoError {
    pub code: String,
    pub message: String,
}

impl ProtoError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self { code: code.to_string(), message: message.into() }
    }
}

impl From<SessionError> for ProtoError {
    fn from(e: SessionError) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

pub fn error_response(id: &Value, e: &ProtoError) -> Value {
    json!({"seq": id, "ok": false, "error": {"code": e.code, "message": e.message}})
}

fn ok_response(id: &Value, body: Value) -> Value {
    let mut out = json!({"seq": id, "ok": true});
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    out
}

pub fn progress_event(id: &Value, generation: usize, best: f64) -> Value {
    json!({"event": "progress", "seq": id, "generation": generation, "best": best})
}

/// Splits a request line into its id and parsed request.
pub fn parse(line: &str) -> (Value, Result<Request, ProtoError>) {
    let v: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return (Value::Null, Err(ProtoError::new("invalid_json", e.to_string()))),
    };
    let Value::Object(mut obj) = v else {
        return (Value::Null, Err(ProtoError::new("bad_request", "request must be a JSON object")));
    };
    let id = obj.remove("seq").unwrap_or(Value::Null);
    let op = match obj.get("op") {
        Some(Value::String(s)) => s.clone(),
        _ => return (id, Err(ProtoError::new("bad_request", "missing string field `op`"))),
    };
    if !OPS.contains(&op.as_str()) {
        return (id, Err(ProtoError::new("unknown_op", format!("unknown op `{op}`"))));
    }
    let req = serde_json::from_value(Value::Object(obj)).map_err(|e| ProtoError::new("bad_request", e.to_string()));
    (id, req)
}

/// What to do with a parsed request.
pub enum Dispatch {
    Reply(Value),
    /// An optimization to run, then finish with [`Service::finish_optimize`].
    Optimize(OptimizeJob),
}

/// Holds the (at most one) session and applies requests to it.
#[derive(Default)]
pub struct Service {
    pub session: Option<Session>,
}

impl Service {
    pub fn new(session: Option<Session>) -> Self {
        Self { session }
    }

    fn session(&mut self) -> Result<&mut Session, ProtoError> {
        self.session.as_mut().ok_or_else(|| ProtoError::new("no_session", "no data loaded; send load_data first"))
    }

    fn frame(&mut self) -> Result<Value, ProtoError> {
        Ok(json!({"frame": self.session()?.frame()}))
    }

    /// Applies one request. Optimizations are returned as jobs so the caller
    /// decides where they run.
    pub fn dispatch(&mut self, id: &Value, req: Request) -> Dispatch {
        if let Request::Optimize { metric, scope } = req {
            return match self.session() {
                Ok(s) => Dispatch::Optimize(s.optimize_job(metric, scope)),
                Err(e) => Dispatch::Reply(error_response(id, &e)),
            };
        }
        match self.apply(req) {
            Ok(body) => Dispatch::Reply(ok_response(id, body)),
            Err(e) => Dispatch::Reply(error_response(id, &e)),
        }
    }

    pub fn finish_optimize(&mut self, id: &Value, result: Result<Optimized, SessionError>) -> Value {
        let out = match result {
            Ok(out) => out,
            Err(e) => return error_response(id, &e.into()),
        };
        let Ok(s) = self.session() else {
            return error_response(id, &ProtoError::new("no_session", "session closed during optimization"));
        };
        s.apply_optimized(&out);
        ok_response(
            id,
            json!({"frame": s.frame(), "score": out.score, "incoming": out.incoming, "trace": out.trace}),
        )
    }

    /// Handles one request line to completion on the calling thread and
    /// returns the output lines: progress events, then the reply.
    pub fn handle_line(&mut self, line: &str) -> Vec<Value> {
        let (id, req) = parse(line);
        let req = match req {
            Ok(r) => r,
            Err(e) => return vec![error_response(&id, &e)],
        };
        match self.dispatch(&id, req) {
            Dispatch::Reply(v) => vec![v],
            Dispatch::Optimize(job) => {
                let events = Mutex::new(Vec::new());
                let progress = |g: usize, best: f64| {
                    events.lock().expect("progress lock").push(progress_event(&id, g, best));
                };
                let result = job.run(RunHooks { progress: Some(&progress), cancel: None });
                let mut out = events.into_inner().expect("progress lock");
                out.push(self.finish_optimize(&id, result));
                out
            }
        }
    }

    fn apply(&mut self, req: Request) -> Result<Value, ProtoError> {
        match req {
            Request::LoadData { source } => {
                let s = Session::open(source)?;
                let info = dataset_info(&s);
                self.session = Some(s);
                let mut body = self.frame()?;
                body["dataset"] = info;
                Ok(body)
            }
            Request::LoadSession { path, session } => {
                let s = match (path, session) {
                    (Some(p), None) => Session::load(&p)?,
                    (None, Some(v)) => {
                        let file = serde_json::from_value(v).map_err(|e| ProtoError::new("bad_session_file", e.to_string()))?;
                        Session::from_file(file)?
                    }
                    _ => return Err(ProtoError::new("bad_request", "give exactly one of `path` or `session`")),
                };
                let info = dataset_info(&s);
                self.session = Some(s);
                let mut body = self.frame()?;
                body["dataset"] = info;
                Ok(body)
            }
            Request::GetFrame => self.frame(),
            Request::GetConfig => Ok(json!({"config": self.session()?.config})),
            Request::SetConfig { config } => {
                self.session()?.set_config(&config)?;
                let s = self.session()?;
                Ok(json!({"config": s.config, "frame": s.frame()}))
            }
            Request::Drag { button, from, to, pinned_dim, is_final } => {
                let ev = DragEvent { from, to, button, pinned_dim };
                self.session()?.drag(&ev, is_final)?;
                self.frame()
            }
            Request::Deep { amount } => {
                self.session()?.deep(amount)?;
                self.frame()
            }
            Request::EqualExpress { dims } => {
                self.session()?.equal_express(&dims)?;
                self.frame()
            }
            Request::SelectDims { dims } => {
                self.session()?.select_dims(&dims)?;
                self.frame()
            }
            Request::Align { dim, angle, step } => {
                self.session()?.align(dim, angle, step)?;
                self.frame()
            }
            Request::SetZoom { zoom } => {
                self.session()?.set_zoom(zoom)?;
                self.frame()
            }
            Request::Score { metric } => {
                let s = self.session()?;
                let m = metric.unwrap_or_else(|| s.config.metric.clone());
                let score = s.score_current(Some(&m))?;
                Ok(json!({"metric": m, "score": score}))
            }
            Request::Optimize { .. } => unreachable!("handled in dispatch"),
            Request::Cancel => Ok(json!({"cancelled": false})),
            Request::SaveView { name } => {
                let view_id = self.session()?.save_view(name);
                let mut body = self.frame()?;
                body["view_id"] = json!(view_id);
                Ok(body)
            }
            Request::ListViews => {
                let s = self.session()?;
                let views: Vec<Value> = s
                    .views
                    .iter()
                    .map(|v| {
                        json!({
                            "view_id": v.view_id,
                            "name": v.name,
                            "created_at": v.created_at,
                            "weights": trail::view_weight_vector(v),
                            "thumbnail": v.thumbnail,
                        })
                    })
                    .collect();
                Ok(json!({"views": views, "layout": s.layout(), "small_view_size": s.config.small_view_size}))
            }
            Request::RestoreView { id } => {
                self.session()?.restore_view(id)?;
                self.frame()
            }
            Request::BuildPath { ids } => {
                self.session()?.build_path(&ids)?;
                self.frame()
            }
            Request::PathT { t } => {
                self.session()?.path_t(t)?;
                self.frame()
            }
            Request::PathNext { frames } => {
                let s = self.session()?;
                let states = s.path_next()?;
                let steps: Vec<Value> = if frames {
                    let saved = s.state.clone();
                    let out = states
                        .iter()
                        .map(|st| {
                            s.state = st.clone();
                            json!(s.frame())
                        })
                        .collect();
                    s.state = saved;
                    out
                } else {
                    states.iter().map(|st| json!(st)).collect()
                };
                let mut body = self.frame()?;
                body["steps"] = Value::Array(steps);
                Ok(body)
            }
            Request::Brush { ids, action, color } => {
                let action = match (action, color) {
                    (BrushKind::Color, Some(color)) => BrushAction::Color { color },
                    (BrushKind::Color, None) => return Err(ProtoError::new("bad_request", "color brush needs `color`")),
                    (BrushKind::Deactivate, _) => BrushAction::Deactivate,
                    (BrushKind::Reactivate, _) => BrushAction::Reactivate,
                };
                self.session()?.brush(&ids, action)?;
                self.frame()
            }
            Request::GenerateSubspaces { k, seed } => {
                let s = self.session()?;
                let clusters: Vec<Value> = s
                    .generate_subspaces(k, seed)?
                    .iter()
                    .map(|c| json!({"color_tag": c.color_tag, "size": c.member_ids.len(), "basis": c.basis}))
                    .collect();
                let mut body = self.frame()?;
                body["clusters"] = Value::Array(clusters);
                Ok(body)
            }
            Request::UseSubspace { index } => {
                self.session()?.use_subspace(index)?;
                self.frame()
            }
            Request::RandomSubspace { seed } => {
                self.session()?.random_subspace(seed)?;
                self.frame()
            }
            Request::SaveSession { path } => {
                let s = self.session()?;
                match path {
                    Some(p) => {
                        s.save(&p)?;
                        Ok(json!({"path": p}))
                    }
                    None => Ok(json!({"session": s.to_file()})),
                }
            }
        }
    }
}

fn dataset_info(s: &Session) -> Value {
    let d = s.dataset();
    json!({
        "name": d.name,
        "attributes": d.attributes,
        "n_points": d.n_points(),
        "class_names": d.class_names,
        "warnings": d.warnings,
    })
}
