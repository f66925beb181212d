use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::stencil::{StencilOrder, StencilSpec};

/// Uniform periodic grid; node index runs with axis 0 fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub sizes: Vec<usize>,
    pub periods: Vec<f64>,
    /// Coordinate of node 0 along each axis.
    pub origin: Vec<f64>,
}

impl Grid {
    pub fn new(sizes: Vec<usize>, periods: Vec<f64>) -> Result<Self> {
        let origin = vec![0.0; sizes.len()];
        Self::with_origin(sizes, periods, origin)
    }

    pub fn with_origin(sizes: Vec<usize>, periods: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() != periods.len() || sizes.len() != origin.len() {
            return Err(invalid("grid sizes, periods and origin must have equal nonzero length"));
        }
        if sizes.contains(&0) {
            return Err(invalid("grid sizes must be positive"));
        }
        if periods.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(invalid("grid periods must be positive and finite"));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(invalid("grid origin must be finite"));
        }
        Ok(Self { sizes, periods, origin })
    }

    /// `sizes.len()` equal sizes with period `2π`, centred on the origin.
    pub fn cube(m: usize, size: usize) -> Result<Self> {
        let p = 2.0 * std::f64::consts::PI;
        Self::with_origin(vec![size; m], vec![p; m], vec![-p / 2.0; m])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.sizes[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.spacing(a)).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.sizes[..axis].iter().product()
    }

    /// Index of `node` along `axis`.
    #[inline]
    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.stride(axis)) % self.sizes[axis]
    }

    #[inline]
    pub fn coord(&self, node: usize, axis: usize) -> f64 {
        self.origin[axis] + self.axis_index(node, axis) as f64 * self.spacing(axis)
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        (0..self.dim()).map(|a| self.coord(node, a)).collect()
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    pub fn stencil(&self, order: StencilOrder) -> StencilSpec {
        StencilSpec { order, spacings: self.spacings() }
    }

    /// Same periods and origin with every size multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            sizes: self.sizes.iter().map(|s| s * factor).collect(),
            periods: self.periods.clone(),
            origin: self.origin.clone(),
        }
    }
}
