//! Mean curvature flow of graphical submanifolds in Euclidean and
//! pseudo-Euclidean space, with the Gauss-image and curvature monitors
//! needed to check the flow's monotone quantities numerically.
//!
//! Layout:
//! - [`numerics`]: small dense linear algebra, periodic stencils, grids.
//! - [`grassmann`]: Jordan angles, distance to a reference plane, ball constants.
//! - [`surface`]: graph/parametric states and their discrete geometry.
//! - [`generate`]: initial data.
//! - [`flow`]: time stepping and the rescaled flow.
//! - [`monitors`]: scalar monitors, identity residuals, monotonicity verdicts.
//! - [`identities`]: pointwise algebraic checks on random shape operators.

// Index loops mirror the tensor notation; `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod generate;
pub mod grassmann;
pub mod identities;
pub mod monitors;
pub mod numerics;
pub mod surface;

pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowState, RunResult, Stepper, Termination};
pub use grassmann::{AngleKind, BallParams, JordanAngles, ReferencePlane};
pub use monitors::{MonitorRecord, Slack};
pub use numerics::{Grid, Signature, SignatureKind, SmallMatrix, StencilOrder, StencilSpec};
pub use surface::{GaussData, GeometrySnapshot, GraphState, ParametricState};

/// Largest manifold dimension handled by the per-node geometry.
pub const MAX_M: usize = 3;
/// Largest ambient dimension `m + n` handled by the per-node geometry.
pub const MAX_AMBIENT: usize = 6;
