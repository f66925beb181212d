//! Benchmark fixtures shared by the criterion targets.

use gaussflow_core::{generate, FlowState, Grid, Signature, SignatureKind};

/// Sine graph on a periodic `size^m` grid.
pub fn sine_state(kind: SignatureKind, m: usize, n: usize, size: usize, amplitude: f64) -> FlowState {
    let sig = Signature::new(m, n, kind).expect("signature");
    let grid = Grid::cube(m, size).expect("grid");
    FlowState::Graph(generate::sine(sig, grid, amplitude).expect("sine"))
}

/// Deterministic dense matrix with entries in `[-1, 1]`.
pub fn test_matrix(rows: usize, cols: usize) -> gaussflow_core::SmallMatrix {
    let data = (0..rows * cols).map(|k| ((k as f64 + 1.0) * 0.7548776662).fract() * 2.0 - 1.0).collect();
    gaussflow_core::SmallMatrix::from_row_major(rows, cols, data).expect("matrix")
}
