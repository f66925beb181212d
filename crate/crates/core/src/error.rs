use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid too small: axis {axis} has {size} nodes, stencil needs {needed}")]
    GridTooSmall { axis: usize, size: usize, needed: usize },
    #[error("not space-like{}: largest gradient singular value {sigma}", node_suffix(*.node))]
    NotSpaceLike { node: Option<usize>, sigma: f64 },
    #[error("degenerate normal frame at node {node} (pivot {pivot:e})")]
    DegenerateFrame { node: usize, pivot: f64 },
    #[error("infeasible ball radius: r0 = {r0} must exceed sqrt(3)/2")]
    InfeasibleRadius { r0: f64 },
    #[error("CFL collapse: largest inverse-metric eigenvalue {lambda_max:e}")]
    CflCollapse { lambda_max: f64 },
    #[error("invalid time: t = {t} is not before t0 = {t0}")]
    InvalidTime { t: f64, t0: f64 },
}

fn node_suffix(node: Option<usize>) -> String {
    match node {
        Some(i) => format!(" at node {i}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
