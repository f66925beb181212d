use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{Grid, Signature};

/// Graph `x ↦ (x, f(x))` over a periodic grid. `f` is stored in full; its
/// non-periodic part is the linear map `tilt` (n × m).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphState {
    pub sig: Signature,
    pub grid: Grid,
    pub tilt: Vec<Vec<f64>>,
    /// `values[α][node]`.
    pub values: Vec<Vec<f64>>,
    pub t: f64,
}

impl GraphState {
    pub fn new(sig: Signature, grid: Grid, tilt: Vec<Vec<f64>>, values: Vec<Vec<f64>>, t: f64) -> Result<Self> {
        if grid.dim() != sig.m {
            return Err(invalid(format!("graph grid has {} axes, signature m = {}", grid.dim(), sig.m)));
        }
        if tilt.len() != sig.n || tilt.iter().any(|r| r.len() != sig.m) {
            return Err(invalid("tilt must be n x m"));
        }
        if values.len() != sig.n || values.iter().any(|v| v.len() != grid.len()) {
            return Err(invalid("graph values must be n fields of grid length"));
        }
        if !t.is_finite() || values.iter().flatten().chain(tilt.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(invalid("graph state has non-finite entries"));
        }
        Ok(Self { sig, grid, tilt, values, t })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `tilt·x` at `node`, component `alpha`.
    #[inline]
    pub fn linear_part(&self, alpha: usize, node: usize) -> f64 {
        (0..self.sig.m).map(|i| self.tilt[alpha][i] * self.grid.coord(node, i)).sum()
    }

    /// Periodic part `f − tilt·x` of each component.
    pub fn periodic_parts(&self) -> Vec<Vec<f64>> {
        (0..self.sig.n).map(|a| (0..self.len()).map(|k| self.values[a][k] - self.linear_part(a, k)).collect()).collect()
    }

    /// Ambient position `(x, f(x))` of `node`.
    pub fn position(&self, node: usize) -> Vec<f64> {
        let mut p = self.grid.coords(node);
        p.extend(self.values.iter().map(|v| v[node]));
        p
    }
}

/// Immersion `F` of a periodic parameter grid into `ℝ^{m+n}`, with
/// `F(x + L_i e_i) = F(x) + lattice[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricState {
    pub sig: Signature,
    pub grid: Grid,
    pub lattice: Vec<Vec<f64>>,
    /// `positions[c][node]`, `c < m + n`.
    pub positions: Vec<Vec<f64>>,
    pub t: f64,
}

impl ParametricState {
    pub fn new(sig: Signature, grid: Grid, lattice: Vec<Vec<f64>>, positions: Vec<Vec<f64>>, t: f64) -> Result<Self> {
        let d = sig.ambient_dim();
        if grid.dim() != sig.m {
            return Err(invalid(format!("parametric grid has {} axes, signature m = {}", grid.dim(), sig.m)));
        }
        if lattice.len() != sig.m || lattice.iter().any(|r| r.len() != d) {
            return Err(invalid("lattice must be m vectors of length m + n"));
        }
        if positions.len() != d || positions.iter().any(|v| v.len() != grid.len()) {
            return Err(invalid("positions must be m + n fields of grid length"));
        }
        if !t.is_finite() || positions.iter().flatten().chain(lattice.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(invalid("parametric state has non-finite entries"));
        }
        Ok(Self { sig, grid, lattice, positions, t })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Constant part of `∂_i F` carried by the lattice: `lattice[i] / L_i`.
    pub fn lattice_slope(&self, i: usize, c: usize) -> f64 {
        self.lattice[i][c] / self.grid.periods[i]
    }

    #[inline]
    pub fn linear_part(&self, c: usize, node: usize) -> f64 {
        (0..self.sig.m).map(|i| self.lattice_slope(i, c) * (self.grid.coord(node, i) - self.grid.origin[i])).sum()
    }

    pub fn periodic_parts(&self) -> Vec<Vec<f64>> {
        (0..self.sig.ambient_dim())
            .map(|c| (0..self.len()).map(|k| self.positions[c][k] - self.linear_part(c, k)).collect())
            .collect()
    }

    pub fn position(&self, node: usize) -> Vec<f64> {
        self.positions.iter().map(|v| v[node]).collect()
    }

    /// The same surface as a parametric immersion over the graph grid.
    pub fn from_graph(g: &GraphState) -> Self {
        let (m, n) = (g.sig.m, g.sig.n);
        let d = m + n;
        let lattice = (0..m)
            .map(|i| {
                let l = g.grid.periods[i];
                let mut v = vec![0.0; d];
                v[i] = l;
                for a in 0..n {
                    v[m + a] = g.tilt[a][i] * l;
                }
                v
            })
            .collect();
        let mut positions: Vec<Vec<f64>> = (0..m).map(|i| (0..g.len()).map(|k| g.grid.coord(k, i)).collect()).collect();
        positions.extend(g.values.iter().cloned());
        Self { sig: g.sig, grid: g.grid.clone(), lattice, positions, t: g.t }
    }
}

/// Representation tag used by state files and configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Graph,
    Parametric,
}
