//! Exploration engine for high-dimensional point clouds: a trackball over
//! arbitrary 3-D subspaces, cluster chasing, ant-colony projection pursuit,
//! saved-view maps with geodesic transitions, and a session service.

pub mod aco;
pub mod dataset;
pub mod fixtures;
pub mod labels;
pub mod linalg;
pub mod navigation;
pub mod projection;
pub mod protocol;
pub mod quality;
#[cfg(not(target_arch = "wasm32"))]
pub mod server;
pub mod session;
pub mod subspace;
pub mod trail;

pub use aco::{AcoConfig, Scope};
pub use dataset::{Dataset, PointTags};
pub use linalg::Rotation3;
pub use navigation::{ChaseConfig, DragEvent, MouseButton};
pub use projection::{ProjectedCloud, ProjectionBasis, TrackballState};
pub use quality::QualityMetric;
pub use session::{DataSource, Session, SessionError};
