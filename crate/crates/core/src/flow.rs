//! Explicit time integration of the mean curvature flow.
//!
//! Graphs evolve by `∂_t f^α = g^{ij} ∂_i∂_j f^α`, which differs from
//! `∂_t F = H` by a tangential reparametrisation; parametric states evolve
//! by `∂_t F = H` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grassmann::{BallParams, ReferencePlane};
use crate::monitors::{self, MonitorContext, MonitorRecord, MonitorSelection};
use crate::numerics::{sym_eigen, Grid, Signature, SmallMatrix, StencilOrder};
use crate::surface::{cholesky, gradient_fields, hessian_fields, lower_inverse, metric_failure, pair_index};
use crate::surface::{GeometrySnapshot, GraphState, ParametricState, Representation};
use crate::MAX_M;

/// Largest inverse-metric eigenvalue before the time step is declared collapsed.
pub const CFL_LAMBDA_MAX: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepper {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowState {
    Graph(GraphState),
    Parametric(ParametricState),
}

impl FlowState {
    pub fn sig(&self) -> &Signature {
        match self {
            Self::Graph(s) => &s.sig,
            Self::Parametric(s) => &s.sig,
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            Self::Graph(s) => &s.grid,
            Self::Parametric(s) => &s.grid,
        }
    }

    pub fn t(&self) -> f64 {
        match self {
            Self::Graph(s) => s.t,
            Self::Parametric(s) => s.t,
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Self::Graph(_) => Representation::Graph,
            Self::Parametric(_) => Representation::Parametric,
        }
    }

    /// The evolving fields: graph values or positions.
    pub fn fields(&self) -> &[Vec<f64>] {
        match self {
            Self::Graph(s) => &s.values,
            Self::Parametric(s) => &s.positions,
        }
    }

    fn fields_mut(&mut self) -> &mut Vec<Vec<f64>> {
        match self {
            Self::Graph(s) => &mut s.values,
            Self::Parametric(s) => &mut s.positions,
        }
    }

    fn set_t(&mut self, t: f64) {
        match self {
            Self::Graph(s) => s.t = t,
            Self::Parametric(s) => s.t = t,
        }
    }

    pub fn snapshot(&self, order: StencilOrder) -> Result<GeometrySnapshot> {
        match self {
            Self::Graph(s) => GeometrySnapshot::of_graph(s, order),
            Self::Parametric(s) => GeometrySnapshot::of_parametric(s, order),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().flatten().all(|v| v.is_finite())
    }
}

/// Graph velocity `g^{ij} ∂_i∂_j f^α` and the largest inverse-metric eigenvalue.
fn graph_rhs_with_lambda(s: &GraphState, order: StencilOrder) -> Result<(Vec<Vec<f64>>, f64)> {
    let (m, n) = (s.sig.m, s.sig.n);
    let eta = s.sig.normal_sign();
    let periodic = s.periodic_parts();
    let grads = gradient_fields(&periodic, &s.grid, order)?;
    let hess = hessian_fields(&periodic, &s.grid, order)?;
    let mut out = vec![vec![0.0; s.len()]; n];
    let mut lambda_max = 0.0f64;
    for k in 0..s.len() {
        let mut g = [[0.0; MAX_M]; MAX_M];
        for i in 0..m {
            for j in i..m {
                let mut v = f64::from(u8::from(i == j));
                for a in 0..n {
                    v += eta * (s.tilt[a][i] + grads[i][a][k]) * (s.tilt[a][j] + grads[j][a][k]);
                }
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        let l = cholesky(&g, m).ok_or_else(|| metric_failure(&s.sig, k, &g))?;
        let li = lower_inverse(&l, m);
        let mut gi = [[0.0; MAX_M]; MAX_M];
        for i in 0..m {
            for j in 0..m {
                gi[i][j] = (0..m).map(|a| li[a][i] * li[a][j]).sum();
            }
        }
        lambda_max = lambda_max.max(largest_eigenvalue(&gi, m));
        for (a, o) in out.iter_mut().enumerate() {
            let mut v = 0.0;
            for i in 0..m {
                for j in 0..m {
                    v += gi[i][j] * hess[pair_index(i, j, m)][a][k];
                }
            }
            o[k] = v;
        }
    }
    Ok((out, lambda_max))
}

fn largest_eigenvalue(a: &[[f64; MAX_M]; MAX_M], m: usize) -> f64 {
    match m {
        1 => a[0][0],
        2 => {
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            0.5 * tr + (0.25 * tr * tr - det).max(0.0).sqrt()
        }
        _ => {
            let mut s = SmallMatrix::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    s[(i, j)] = a[i][j];
                }
            }
            sym_eigen(&s).map_or(f64::NAN, |e| e.values[m - 1])
        }
    }
}

/// `∂_t f^α = g^{ij} ∂_i∂_j f^α`.
pub fn graph_rhs(s: &GraphState, order: StencilOrder) -> Result<Vec<Vec<f64>>> {
    graph_rhs_with_lambda(s, order).map(|(v, _)| v)
}

/// `∂_t F = H`.
pub fn parametric_rhs(s: &ParametricState, order: StencilOrder) -> Result<Vec<Vec<f64>>> {
    let snap = GeometrySnapshot::of_parametric(s, order)?;
    Ok(snap.h_fields())
}

fn snapshot_lambda(snap: &GeometrySnapshot) -> f64 {
    let m = snap.sig.m;
    snap.nodes.iter().map(|g| largest_eigenvalue(&g.g_inv, m)).fold(0.0, f64::max)
}

/// Velocity field and largest inverse-metric eigenvalue.
fn rhs_with_lambda(state: &FlowState, order: StencilOrder) -> Result<(Vec<Vec<f64>>, f64)> {
    match state {
        FlowState::Graph(s) => graph_rhs_with_lambda(s, order),
        FlowState::Parametric(s) => {
            let snap = GeometrySnapshot::of_parametric(s, order)?;
            let lambda = snapshot_lambda(&snap);
            Ok((snap.h_fields(), lambda))
        }
    }
}

pub fn rhs(state: &FlowState, order: StencilOrder) -> Result<Vec<Vec<f64>>> {
    rhs_with_lambda(state, order).map(|(v, _)| v)
}

fn dt_from_lambda(grid: &Grid, m: usize, cfl: f64, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda <= CFL_LAMBDA_MAX) {
        return Err(Error::CflCollapse { lambda_max: lambda });
    }
    let h = grid.min_spacing();
    Ok(cfl * h * h / (2.0 * m as f64 * lambda))
}

/// `cfl · min h² / (2m · max λ_max(g^{ij}))`.
pub fn cfl_dt(state: &FlowState, cfl: f64, order: StencilOrder) -> Result<f64> {
    let (_, lambda) = rhs_with_lambda(state, order)?;
    dt_from_lambda(state.grid(), state.sig().m, cfl, lambda)
}

fn axpy(base: &FlowState, k: &[Vec<f64>], c: f64, t: f64) -> FlowState {
    let mut out = base.clone();
    for (f, kf) in out.fields_mut().iter_mut().zip(k) {
        for (v, dv) in f.iter_mut().zip(kf) {
            *v += c * dv;
        }
    }
    out.set_t(t);
    out
}

/// One explicit step of size `dt` (negative `dt` steps backwards).
pub fn step(state: &FlowState, dt: f64, stepper: Stepper, order: StencilOrder) -> Result<FlowState> {
    let k1 = rhs(state, order)?;
    step_with_k1(state, k1, dt, stepper, order)
}

fn step_with_k1(
    state: &FlowState,
    k1: Vec<Vec<f64>>,
    dt: f64,
    stepper: Stepper,
    order: StencilOrder,
) -> Result<FlowState> {
    let t0 = state.t();
    match stepper {
        Stepper::Euler => Ok(axpy(state, &k1, dt, t0 + dt)),
        Stepper::Rk4 => {
            let k2 = rhs(&axpy(state, &k1, 0.5 * dt, t0 + 0.5 * dt), order)?;
            let k3 = rhs(&axpy(state, &k2, 0.5 * dt, t0 + 0.5 * dt), order)?;
            let k4 = rhs(&axpy(state, &k3, dt, t0 + dt), order)?;
            let mut out = state.clone();
            for (c, f) in out.fields_mut().iter_mut().enumerate() {
                for (j, v) in f.iter_mut().enumerate() {
                    *v += dt / 6.0 * (k1[c][j] + 2.0 * k2[c][j] + 2.0 * k3[c][j] + k4[c][j]);
                }
            }
            out.set_t(t0 + dt);
            Ok(out)
        }
    }
}

/// Advances by `duration` with equal RK4 substeps no larger than the CFL step
/// of the starting state.
pub fn advance(state: &FlowState, duration: f64, cfl: f64, order: StencilOrder) -> Result<FlowState> {
    let dt = cfl_dt(state, cfl, order)?;
    let steps = (duration / dt).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let t_end = state.t() + duration;
    let mut s = state.clone();
    for i in 0..steps {
        s = step(&s, h, Stepper::Rk4, order)?;
        if i + 1 == steps {
            s.set_t(t_end);
        }
    }
    Ok(s)
}

/// `λ = (2t + 1)^{-1/2}`.
pub fn rescale_factor(t: f64) -> f64 {
    (2.0 * t + 1.0).powf(-0.5)
}

/// `t̃ = log(2t + 1)`.
pub fn rescaled_time(t: f64) -> f64 {
    (2.0 * t + 1.0).ln()
}

/// `F̃ = F/√(2t+1)`; the returned state carries `t̃` as its time.
pub fn rescale(state: &FlowState) -> Result<FlowState> {
    let t = state.t();
    if !(t >= 0.0) {
        return Err(Error::InvalidTime { t, t0: 0.0 });
    }
    let lam = rescale_factor(t);
    let tt = rescaled_time(t);
    Ok(match state {
        FlowState::Graph(s) => {
            let grid = Grid::with_origin(
                s.grid.sizes.clone(),
                s.grid.periods.iter().map(|p| p * lam).collect(),
                s.grid.origin.iter().map(|o| o * lam).collect(),
            )?;
            let values = s.values.iter().map(|v| v.iter().map(|x| x * lam).collect()).collect();
            FlowState::Graph(GraphState::new(s.sig, grid, s.tilt.clone(), values, tt)?)
        }
        FlowState::Parametric(s) => {
            let positions = s.positions.iter().map(|v| v.iter().map(|x| x * lam).collect()).collect();
            let lattice = s.lattice.iter().map(|v| v.iter().map(|x| x * lam).collect()).collect();
            FlowState::Parametric(ParametricState::new(s.sig, s.grid.clone(), lattice, positions, tt)?)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedTEnd,
    Nan,
    NotSpaceLike,
    CflCollapse,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ReachedTEnd => "reached-t-end",
            Self::Nan => "nan",
            Self::NotSpaceLike => "not-space-like",
            Self::CflCollapse => "cfl-collapse",
        }
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::NotSpaceLike { .. } => Self::NotSpaceLike,
            Error::CflCollapse { .. } => Self::CflCollapse,
            _ => Self::Nan,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub stepper: Stepper,
    pub cfl_factor: f64,
    pub t_end: f64,
    pub monitor_every: usize,
    pub rescaled: bool,
    /// Gauss ball for the weighted monitors; derived from the initial Gauss
    /// radius when absent.
    pub ball: Option<BallParams>,
    pub reference: Option<ReferencePlane>,
    pub order: StencilOrder,
    pub monitors: MonitorSelection,
    /// Safety cap on the number of steps.
    pub max_steps: usize,
}

impl FlowConfig {
    pub fn new(t_end: f64) -> Self {
        Self {
            stepper: Stepper::Euler,
            cfl_factor: 0.5,
            t_end,
            monitor_every: 10,
            rescaled: false,
            ball: None,
            reference: None,
            order: StencilOrder::Two,
            monitors: MonitorSelection::default(),
            max_steps: 10_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= 1.0) {
            return Err(invalid(format!("cfl_factor must lie in (0, 1], got {}", self.cfl_factor)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.monitor_every == 0 {
            return Err(invalid("monitor_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: FlowState,
    pub records: Vec<MonitorRecord>,
    pub termination: Termination,
    pub steps: usize,
    pub ball: Option<BallParams>,
    /// Error text for abnormal terminations.
    pub diagnostic: Option<String>,
}

/// Integrates to `t_end`, recording monitors every `monitor_every` steps and
/// at the final time. Numerical breakdown ends the run with the matching
/// [`Termination`]; only invalid configuration is returned as an error.
pub fn run(config: &FlowConfig, initial: FlowState) -> Result<RunResult> {
    config.validate()?;
    run_unchecked(config, initial)
}

/// [`run`] without the `cfl_factor ≤ 1` restriction, for stability scans.
pub fn run_unchecked(config: &FlowConfig, initial: FlowState) -> Result<RunResult> {
    let sig = *initial.sig();
    let reference = config.reference.clone().unwrap_or_else(|| ReferencePlane::coordinate(&sig));
    let mut ctx = MonitorContext {
        reference,
        ball: config.ball,
        order: config.order,
        selection: config.monitors.clone(),
        rescaled: config.rescaled,
    };
    let mut records = Vec::new();
    let mut state = initial;
    let finish = |state: FlowState, records, termination, steps, ball, e: Option<Error>| RunResult {
        final_state: state,
        records,
        termination,
        steps,
        ball,
        diagnostic: e.map(|e| e.to_string()),
    };

    match monitors::resolve_ball(&state, &mut ctx) {
        Ok(()) => {}
        Err(e @ Error::InvalidInput(_)) | Err(e @ Error::InfeasibleRadius { .. }) => return Err(e),
        Err(e) => return Ok(finish(state, records, Termination::from_error(&e), 0, ctx.ball, Some(e))),
    }
    match monitors::compute_record(&state, &ctx) {
        Ok(r) => records.push(r),
        Err(e) => return Ok(finish(state, records, Termination::from_error(&e), 0, ctx.ball, Some(e))),
    }

    let mut steps = 0usize;
    let eps_t = 1e-12 * config.t_end.max(1.0);
    while state.t() < config.t_end - eps_t {
        if steps >= config.max_steps {
            let e = Error::CflCollapse { lambda_max: f64::INFINITY };
            return Ok(finish(state, records, Termination::CflCollapse, steps, ctx.ball, Some(e)));
        }
        let stepped = rhs_with_lambda(&state, config.order).and_then(|(k1, lambda)| {
            let dt = dt_from_lambda(state.grid(), sig.m, config.cfl_factor, lambda)?;
            let dt = dt.min(config.t_end - state.t());
            step_with_k1(&state, k1, dt, config.stepper, config.order)
        });
        let next = match stepped {
            Ok(s) => s,
            Err(e) => return Ok(finish(state, records, Termination::from_error(&e), steps, ctx.ball, Some(e))),
        };
        steps += 1;
        if !next.is_finite() {
            let e = Error::InvalidInput(format!("non-finite values after step {steps}"));
            return Ok(finish(next, records, Termination::Nan, steps, ctx.ball, Some(e)));
        }
        state = next;
        let last = state.t() >= config.t_end - eps_t;
        if last {
            state.set_t(config.t_end);
        }
        if steps.is_multiple_of(config.monitor_every) || last {
            match monitors::compute_record(&state, &ctx) {
                Ok(r) if r.is_finite() => records.push(r),
                Ok(_) => {
                    let e = Error::InvalidInput(format!("non-finite monitor values at step {steps}"));
                    return Ok(finish(state, records, Termination::Nan, steps, ctx.ball, Some(e)));
                }
                Err(e) => return Ok(finish(state, records, Termination::from_error(&e), steps, ctx.ball, Some(e))),
            }
        }
    }
    Ok(finish(state, records, Termination::ReachedTEnd, steps, ctx.ball, None))
}
