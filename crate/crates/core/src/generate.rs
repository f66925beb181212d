//! Initial data: flat and tilted planes, sine modes, band-limited random
//! fields scaled to a target Gauss radius, localized bumps, circles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grassmann::{AngleKind, SPACELIKE_GUARD};
use crate::numerics::{svd_small, Grid, Signature, SmallMatrix, StencilOrder};
use crate::surface::{gradient_fields, GraphState, ParametricState};

/// Largest wavenumber per axis used by [`BandLimited`].
pub const MAX_MODE: i32 = 3;

/// The plane `f = tilt·x` (zero tilt gives the coordinate plane).
pub fn flat(sig: Signature, grid: Grid, tilt: Option<Vec<Vec<f64>>>) -> Result<GraphState> {
    let tilt = tilt.unwrap_or_else(|| vec![vec![0.0; sig.m]; sig.n]);
    let len = grid.len();
    let mut s = GraphState::new(sig, grid, tilt, vec![vec![0.0; len]; sig.n], 0.0)?;
    for a in 0..sig.n {
        for k in 0..len {
            s.values[a][k] = s.linear_part(a, k);
        }
    }
    Ok(s)
}

/// Default wavevector for component `alpha`: `(1, 2, ...)` rotated by `alpha`,
/// so that different components bend along different directions.
pub fn default_wavevector(m: usize, alpha: usize) -> Vec<f64> {
    (0..m).map(|i| ((i + alpha) % m + 1) as f64).collect()
}

/// `f^α = A·sin(2π k_α·x/L + απ/3)` with the wavevectors from
/// [`default_wavevector`] (integer, so the data is periodic).
pub fn sine(sig: Signature, grid: Grid, amplitude: f64) -> Result<GraphState> {
    let len = grid.len();
    let values = (0..sig.n)
        .map(|a| {
            let k = default_wavevector(sig.m, a);
            (0..len)
                .map(|node| {
                    let phase: f64 = (0..sig.m).map(|i| 2.0 * PI * k[i] * grid.coord(node, i) / grid.periods[i]).sum();
                    amplitude * (phase + a as f64 * PI / 3.0).sin()
                })
                .collect()
        })
        .collect();
    GraphState::new(sig, grid, vec![vec![0.0; sig.m]; sig.n], values, 0.0)
}

/// Gaussian bump `A·exp(−|x − c|²/(2w²))` in every component (component α
/// scaled by `1/(α+1)`), optionally with its grid mean removed.
pub fn gaussian_bump(
    sig: Signature,
    grid: Grid,
    amplitude: f64,
    width: f64,
    center: &[f64],
    zero_mean: bool,
) -> Result<GraphState> {
    if center.len() != sig.m || !(width > 0.0) {
        return Err(invalid("bump needs an m-dimensional center and positive width"));
    }
    let len = grid.len();
    let base: Vec<f64> = (0..len)
        .map(|k| {
            let r2: f64 = (0..sig.m).map(|i| (grid.coord(k, i) - center[i]).powi(2)).sum();
            (-r2 / (2.0 * width * width)).exp()
        })
        .collect();
    let mean = if zero_mean { base.iter().sum::<f64>() / len as f64 } else { 0.0 };
    let values = (0..sig.n).map(|a| base.iter().map(|b| amplitude * (b - mean) / (a + 1) as f64).collect()).collect();
    GraphState::new(sig, grid, vec![vec![0.0; sig.m]; sig.n], values, 0.0)
}

/// Circle of radius `r` in the `(F¹, F²)` plane, parametrised over `[0, 2π)`
/// with `size` nodes; the remaining normal components are zero.
pub fn circle(sig: Signature, size: usize, r: f64) -> Result<ParametricState> {
    if sig.m != 1 {
        return Err(invalid("circle needs m = 1"));
    }
    let grid = Grid::new(vec![size], vec![2.0 * PI])?;
    let d = sig.ambient_dim();
    let mut positions = vec![vec![0.0; size]; d];
    for k in 0..size {
        let th = grid.coord(k, 0);
        positions[0][k] = r * th.cos();
        positions[1][k] = r * th.sin();
    }
    ParametricState::new(sig, grid, vec![vec![0.0; d]], positions, 0.0)
}

/// One Fourier mode of a band-limited field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: Vec<i32>,
    /// Per component `(cos, sin)` coefficients.
    pub coef: Vec<(f64, f64)>,
}

/// Random periodic field with wavenumbers in `{−3..3}^m`, evaluable on any
/// grid with the same periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandLimited {
    pub sig: Signature,
    pub modes: Vec<Mode>,
    pub amplitude: f64,
}

impl BandLimited {
    /// Unit-amplitude random field; coefficients decay like `1/|k|²`.
    pub fn random(sig: Signature, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = Vec::new();
        let span = (2 * MAX_MODE + 1) as usize;
        for idx in 0..span.pow(sig.m as u32) {
            let k: Vec<i32> = (0..sig.m).map(|i| (idx / span.pow(i as u32) % span) as i32 - MAX_MODE).collect();
            // Keep one of each ±k pair.
            let first_nonzero = k.iter().rev().copied().find(|&v| v != 0);
            if first_nonzero.is_none_or(|v| v < 0) {
                continue;
            }
            let k2: f64 = k.iter().map(|&v| f64::from(v * v)).sum();
            let coef = (0..sig.n).map(|_| (rng.gen_range(-1.0..1.0) / k2, rng.gen_range(-1.0..1.0) / k2)).collect();
            modes.push(Mode { k, coef });
        }
        Self { sig, modes, amplitude: 1.0 }
    }

    pub fn evaluate(&self, grid: &Grid) -> Result<GraphState> {
        if grid.dim() != self.sig.m {
            return Err(invalid("band-limited field: grid dimension mismatch"));
        }
        let len = grid.len();
        let mut values = vec![vec![0.0; len]; self.sig.n];
        for node in 0..len {
            for mode in &self.modes {
                let phase: f64 = (0..self.sig.m)
                    .map(|i| 2.0 * PI * f64::from(mode.k[i]) * grid.coord(node, i) / grid.periods[i])
                    .sum();
                let (c, s) = (phase.cos(), phase.sin());
                for (a, (ca, sa)) in mode.coef.iter().enumerate() {
                    values[a][node] += self.amplitude * (ca * c + sa * s);
                }
            }
        }
        GraphState::new(self.sig, grid.clone(), vec![vec![0.0; self.sig.m]; self.sig.n], values, 0.0)
    }

    /// Rescales the amplitude so that the discrete sup Gauss radius on `grid`
    /// (derivatives at `order`) equals `target`.
    pub fn scale_to_radius(&mut self, grid: &Grid, order: StencilOrder, target: f64) -> Result<()> {
        let unit = Self { amplitude: 1.0, ..self.clone() }.evaluate(grid)?;
        self.amplitude = amplitude_for_radius(&unit, order, target)?;
        Ok(())
    }
}

/// Amplitude `s` such that the sup Gauss radius of `s·f` equals `target`.
pub fn amplitude_for_radius(unit: &GraphState, order: StencilOrder, target: f64) -> Result<f64> {
    let sig = unit.sig;
    if !(target > 0.0) {
        return Err(invalid("target Gauss radius must be positive"));
    }
    let kind = AngleKind::for_signature(&sig);
    if kind == AngleKind::Circular && target >= sig.m as f64 * PI / 2.0 {
        return Err(invalid("target Gauss radius is out of reach for graphs"));
    }
    let grads = gradient_fields(&unit.periodic_parts(), &unit.grid, order)?;
    let mut sigmas = Vec::with_capacity(unit.len());
    for k in 0..unit.len() {
        let mut df = SmallMatrix::zeros(sig.n, sig.m);
        for a in 0..sig.n {
            for i in 0..sig.m {
                df[(a, i)] = grads[i][a][k];
            }
        }
        sigmas.push(svd_small(&df)?.sigma);
    }
    let radius = |s: f64| -> f64 {
        sigmas
            .iter()
            .map(|sv| {
                sv.iter()
                    .map(|x| match kind {
                        AngleKind::Circular => (s * x).atan().powi(2),
                        AngleKind::Hyperbolic => (s * x).min(SPACELIKE_GUARD).atanh().powi(2),
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    };
    let smax = sigmas.iter().flatten().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(invalid("field has zero gradient; cannot reach a target radius"));
    }
    let mut lo = 0.0;
    let mut hi = match kind {
        AngleKind::Hyperbolic => SPACELIKE_GUARD / smax,
        AngleKind::Circular => {
            let mut h = 1.0 / smax;
            while radius(h) < target {
                h *= 2.0;
            }
            h
        }
    };
    if radius(hi) < target {
        return Err(invalid("target Gauss radius is out of reach"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if radius(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scales a graph state's values (about zero) by `s`.
pub fn scaled(state: &GraphState, s: f64) -> GraphState {
    let mut out = state.clone();
    for v in out.values.iter_mut().flatten() {
        *v *= s;
    }
    for v in out.tilt.iter_mut().flatten() {
        *v *= s;
    }
    out
}
