use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StencilOrder {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "4")]
    Four,
}

impl StencilOrder {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(Self::Two),
            4 => Ok(Self::Four),
            _ => Err(invalid(format!("stencil order must be 2 or 4, got {order}"))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Self::Two => 2,
            Self::Four => 4,
        }
    }

    /// Number of nodes the centred stencil touches along one axis.
    pub fn width(self) -> usize {
        match self {
            Self::Two => 3,
            Self::Four => 5,
        }
    }
}

/// Centred-difference order plus per-axis spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilSpec {
    pub order: StencilOrder,
    pub spacings: Vec<f64>,
}

impl StencilSpec {
    pub fn new(order: StencilOrder, spacings: Vec<f64>) -> Result<Self> {
        if spacings.is_empty() || spacings.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(invalid("stencil spacings must be positive and finite"));
        }
        Ok(Self { order, spacings })
    }
}

fn check_shape(len: usize, sizes: &[usize], axis: usize, spec: &StencilSpec) -> Result<()> {
    if axis >= sizes.len() || spec.spacings.len() != sizes.len() {
        return Err(invalid(format!(
            "axis {axis} / spacings {} do not match a {}-dimensional grid",
            spec.spacings.len(),
            sizes.len()
        )));
    }
    if len != sizes.iter().product::<usize>() {
        return Err(invalid("field length does not match grid sizes"));
    }
    let needed = spec.order.width();
    if sizes[axis] < needed {
        return Err(Error::GridTooSmall { axis, size: sizes[axis], needed });
    }
    Ok(())
}

/// Centred periodic derivative of order `derivative` (1 or 2) along `axis`.
pub fn periodic_derivative(
    field: &[f64],
    sizes: &[usize],
    axis: usize,
    derivative: u8,
    spec: &StencilSpec,
) -> Result<Vec<f64>> {
    check_shape(field.len(), sizes, axis, spec)?;
    let h = spec.spacings[axis];
    let (offsets, weights, scale): (&[isize], &[f64], f64) = match (spec.order, derivative) {
        (StencilOrder::Two, 1) => (&[-1, 1], &[-0.5, 0.5], 1.0 / h),
        (StencilOrder::Two, 2) => (&[-1, 0, 1], &[1.0, -2.0, 1.0], 1.0 / (h * h)),
        (StencilOrder::Four, 1) => (&[-2, -1, 1, 2], &[1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0], 1.0 / h),
        (StencilOrder::Four, 2) => {
            (&[-2, -1, 0, 1, 2], &[-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0], 1.0 / (h * h))
        }
        _ => return Err(invalid(format!("derivative order must be 1 or 2, got {derivative}"))),
    };
    let stride: usize = sizes[..axis].iter().product();
    let n = sizes[axis];
    let mut out = vec![0.0; field.len()];
    for (node, o) in out.iter_mut().enumerate() {
        let k = (node / stride) % n;
        let base = node - k * stride;
        let mut acc = 0.0;
        for (&off, &w) in offsets.iter().zip(weights) {
            let kk = (k as isize + off).rem_euclid(n as isize) as usize;
            acc += w * field[base + kk * stride];
        }
        *o = acc * scale;
    }
    Ok(out)
}

/// Mixed derivative `∂_a ∂_b` composed from first derivatives; falls back to
/// the pure second-derivative stencil when `a == b`.
pub fn periodic_mixed_derivative(
    field: &[f64],
    sizes: &[usize],
    a: usize,
    b: usize,
    spec: &StencilSpec,
) -> Result<Vec<f64>> {
    if a == b {
        return periodic_derivative(field, sizes, a, 2, spec);
    }
    let d = periodic_derivative(field, sizes, a, 1, spec)?;
    periodic_derivative(&d, sizes, b, 1, spec)
}
