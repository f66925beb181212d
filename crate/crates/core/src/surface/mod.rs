//! Graph and parametric states on periodic grids and their discrete
//! differential geometry: metric, second fundamental form, mean curvature,
//! normal frames, Gauss-map data, Laplace–Beltrami and the tension field.

mod geometry;
mod io;
mod state;

pub(crate) use geometry::{cholesky, gradient_fields, hessian_fields, lower_inverse, metric_failure, pair_index};
pub use geometry::{
    gauss_data, laplace_beltrami, normal_position_growth_ok, normal_position_sup, self_similar_residual, tension_field,
    GaussData, GeometrySnapshot, Jets, NodeGeometry, NormalFrame, FRAME_PIVOT_MIN,
};
pub use io::{read_state, write_field_csv, write_state, StateFile};
pub use state::{GraphState, ParametricState, Representation};
