//! Scalar monitors along the flow, finite-difference residuals of the
//! evolution identities, and the monotonicity verdicts derived from them.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flow::{advance, rescale, rescaled_time, FlowState};
use crate::grassmann::{confinement_radius_limit, weighted_radius_limit, BallParams, ReferencePlane};
use crate::identities::{commutator_sum, s_matrix};
use crate::numerics::{periodic_derivative, Signature, SignatureKind, StencilOrder};
use crate::surface::{gauss_data, laplace_beltrami, normal_position_sup, self_similar_residual, GeometrySnapshot};
use crate::surface::{pair_index, ParametricState};
use crate::{MAX_AMBIENT, MAX_M};

/// Backward heat kernel centre for the Gaussian density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HuiskenSpec {
    pub x0: Vec<f64>,
    pub t0: f64,
    /// Prefactor exponent; `m/2` when absent.
    #[serde(default)]
    pub exponent: Option<f64>,
}

/// Settings of the three-state identity probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityProbe {
    pub dt_probe: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    0.5
}

impl IdentityProbe {
    /// Stencil used to advance the probe states.
    pub const FLOW_ORDER: StencilOrder = StencilOrder::Two;
    /// Stencil used for every quantity compared in the residuals.
    pub const EVAL_ORDER: StencilOrder = StencilOrder::Four;

    pub fn new(dt_probe: f64) -> Self {
        Self { dt_probe, cfl: default_cfl() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSelection {
    /// Weighted and decay monitors (Euclidean runs inside the weighted ball).
    #[serde(default = "yes")]
    pub weighted: bool,
    #[serde(default)]
    pub huisken: Option<HuiskenSpec>,
    /// Identity residuals; parametric runs only.
    #[serde(default)]
    pub identity_probe: Option<IdentityProbe>,
}

fn yes() -> bool {
    true
}

impl Default for MonitorSelection {
    fn default() -> Self {
        Self { weighted: true, huisken: None, identity_probe: None }
    }
}

/// Everything a record needs besides the state itself.
#[derive(Debug, Clone)]
pub struct MonitorContext {
    pub reference: ReferencePlane,
    pub ball: Option<BallParams>,
    pub order: StencilOrder,
    pub selection: MonitorSelection,
    pub rescaled: bool,
}

impl MonitorContext {
    pub fn new(sig: &Signature, order: StencilOrder) -> Self {
        Self {
            reference: ReferencePlane::coordinate(sig),
            ball: None,
            order,
            selection: MonitorSelection::default(),
            rescaled: false,
        }
    }
}

/// Fixes the weighted-monitor ball before a run. A configured ball is kept;
/// otherwise a Euclidean run whose initial Gauss radius is below the weighted
/// limit gets the ball of that radius.
pub fn resolve_ball(state: &FlowState, ctx: &mut MonitorContext) -> Result<()> {
    if !ctx.selection.weighted || state.sig().is_pseudo() || ctx.ball.is_some() {
        return Ok(());
    }
    let snap = state.snapshot(ctx.order)?;
    let rho = gauss_data(&snap, &ctx.reference)?.iter().map(|g| g.distance).fold(0.0, f64::max);
    if rho < weighted_radius_limit() {
        ctx.ball = Some(BallParams::for_radius(rho)?);
    }
    Ok(())
}

/// One row of the monitor table. Optional entries are absent when the
/// monitor does not apply to the run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub t: f64,
    pub sup_b2: f64,
    pub sup_h2: f64,
    pub gauss_radius_sup: f64,
    pub height_sup: f64,
    pub weighted_sup: Option<f64>,
    pub decay_monitor: Option<f64>,
    pub normal_position_sup: f64,
    pub huisken_density: Option<f64>,
    pub self_similar_residual: Option<f64>,
    pub res_g: Option<f64>,
    pub res_gamma: Option<f64>,
    pub res_b2: Option<f64>,
    pub huisken_truncation: Option<f64>,
    pub res_vol: Option<f64>,
    pub t_tilde: Option<f64>,
    pub lambda_min_g: f64,
    pub lambda_max_g: f64,
    pub sqrt_g_max: f64,
}

/// CSV column order.
pub const COLUMNS: [&str; 19] = [
    "t",
    "sup_b2",
    "sup_h2",
    "gauss_radius_sup",
    "height_sup",
    "weighted_sup",
    "decay_monitor",
    "normal_position_sup",
    "huisken_density",
    "self_similar_residual",
    "res_g",
    "res_gamma",
    "res_b2",
    "huisken_truncation",
    "res_vol",
    "t_tilde",
    "lambda_min_g",
    "lambda_max_g",
    "sqrt_g_max",
];

impl MonitorRecord {
    pub fn values(&self) -> [Option<f64>; 19] {
        [
            Some(self.t),
            Some(self.sup_b2),
            Some(self.sup_h2),
            Some(self.gauss_radius_sup),
            Some(self.height_sup),
            self.weighted_sup,
            self.decay_monitor,
            Some(self.normal_position_sup),
            self.huisken_density,
            self.self_similar_residual,
            self.res_g,
            self.res_gamma,
            self.res_b2,
            self.huisken_truncation,
            self.res_vol,
            self.t_tilde,
            Some(self.lambda_min_g),
            Some(self.lambda_max_g),
            Some(self.sqrt_g_max),
        ]
    }

    fn from_values(v: &[Option<f64>; 19]) -> Result<Self> {
        let req = |i: usize| v[i].ok_or_else(|| invalid(format!("monitor column {} is empty", COLUMNS[i])));
        Ok(Self {
            t: req(0)?,
            sup_b2: req(1)?,
            sup_h2: req(2)?,
            gauss_radius_sup: req(3)?,
            height_sup: req(4)?,
            weighted_sup: v[5],
            decay_monitor: v[6],
            normal_position_sup: req(7)?,
            huisken_density: v[8],
            self_similar_residual: v[9],
            res_g: v[10],
            res_gamma: v[11],
            res_b2: v[12],
            huisken_truncation: v[13],
            res_vol: v[14],
            t_tilde: v[15],
            lambda_min_g: req(16)?,
            lambda_max_g: req(17)?,
            sqrt_g_max: req(18)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().flatten().all(|v| v.is_finite())
    }

    /// Value of a column by name.
    pub fn get(&self, column: &str) -> Option<f64> {
        COLUMNS.iter().position(|c| *c == column).and_then(|i| self.values()[i])
    }
}

/// `sup |f|` for graphs, `sup (Σ_α F_{m+α}²)^{1/2}` for parametric states.
pub fn height_sup(state: &FlowState) -> f64 {
    let m = state.sig().m;
    let fields: &[Vec<f64>] = match state {
        FlowState::Graph(s) => &s.values,
        FlowState::Parametric(s) => &s.positions[m..],
    };
    (0..state.grid().len()).map(|k| fields.iter().map(|f| f[k] * f[k]).sum::<f64>().sqrt()).fold(0.0, f64::max)
}

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Gaussian density `∫ (4π(t₀−t))^{-k} exp(−|F−x₀|²/4(t₀−t)) dμ` over one
/// period cell (midpoint rule), with the kernel mass outside the cell
/// footprint as truncation bound. `k` defaults to `m/2`.
pub fn huisken_density(state: &FlowState, spec: &HuiskenSpec, order: StencilOrder) -> Result<(f64, f64)> {
    let sig = state.sig();
    if sig.is_pseudo() {
        return Err(invalid("Gaussian density is defined for Euclidean runs only"));
    }
    let t = state.t();
    if !(t < spec.t0) {
        return Err(Error::InvalidTime { t, t0: spec.t0 });
    }
    let d = sig.ambient_dim();
    if spec.x0.len() != d {
        return Err(invalid(format!("x0 has {} entries, ambient dimension is {d}", spec.x0.len())));
    }
    let tau = spec.t0 - t;
    let k = spec.exponent.unwrap_or(0.5 * sig.m as f64);
    let snap = state.snapshot(order)?;
    let cell = snap.grid.cell_volume();
    let pre = (4.0 * std::f64::consts::PI * tau).powf(-k);
    let theta: f64 = snap
        .nodes
        .iter()
        .map(|geo| {
            let r2: f64 = (0..d).map(|c| (geo.position[c] - spec.x0[c]).powi(2)).sum();
            pre * (-r2 / (4.0 * tau)).exp() * geo.sqrt_g * cell
        })
        .sum();
    let s = (2.0 * tau).sqrt();
    let mass: f64 = footprint(state)
        .iter()
        .enumerate()
        .map(|(i, (lo, hi))| phi((hi - spec.x0[i]) / s) - phi((lo - spec.x0[i]) / s))
        .product();
    Ok((theta, (1.0 - mass).max(0.0)))
}

/// Box covered by the first `m` ambient coordinates of one period cell.
fn footprint(state: &FlowState) -> Vec<(f64, f64)> {
    let m = state.sig().m;
    match state {
        FlowState::Graph(s) => (0..m).map(|i| (s.grid.origin[i], s.grid.origin[i] + s.grid.periods[i])).collect(),
        FlowState::Parametric(s) => (0..m)
            .map(|i| {
                let f = &s.positions[i];
                let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let pad = 0.5 * (hi - lo) / s.grid.sizes[i] as f64;
                (lo - pad, hi + pad)
            })
            .collect(),
    }
}

/// Residuals of the evolution identities from three states `t, t+Δ, t+2Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `max |∂_t g_ij + 2⟨H, B_ij⟩|`.
    pub res_g: f64,
    /// `max |∂_t √g + ⟨H, H⟩ √g|`.
    pub res_vol: f64,
    /// `max |∂_t γ − τ(γ)|` in graph coordinates of the centre tangent plane.
    pub res_gamma: f64,
    /// `max |½(∂_t − Δ)⟨B,B⟩ + ⟨∇B,∇B⟩ − Σ_{α≠β}|[h_α,h_β]|² − Σ S_αβ²|`, doubled.
    pub res_b2: f64,
}

/// Advances the state twice by `dt_probe` and compares centred time
/// differences at the middle state against the right-hand sides of the
/// evolution identities.
pub fn identity_residuals(state: &ParametricState, probe: &IdentityProbe) -> Result<IdentityResiduals> {
    if !(probe.dt_probe > 0.0) {
        return Err(invalid("dt_probe must be positive"));
    }
    let s0 = FlowState::Parametric(state.clone());
    let s1 = advance(&s0, probe.dt_probe, probe.cfl, IdentityProbe::FLOW_ORDER)?;
    let s2 = advance(&s1, probe.dt_probe, probe.cfl, IdentityProbe::FLOW_ORDER)?;
    let eval = IdentityProbe::EVAL_ORDER;
    let (a, b, c) = (s0.snapshot(eval)?, s1.snapshot(eval)?, s2.snapshot(eval)?);
    identity_residuals_from(&a, &b, &c, probe.dt_probe)
}

fn identity_residuals_from(
    s0: &GeometrySnapshot,
    s1: &GeometrySnapshot,
    s2: &GeometrySnapshot,
    dt: f64,
) -> Result<IdentityResiduals> {
    let sig = s1.sig;
    let m = sig.m;
    let eval = IdentityProbe::EVAL_ORDER;
    let two_dt = 2.0 * dt;

    let mut res_g = 0.0f64;
    let mut res_vol = 0.0f64;
    for (k, geo) in s1.nodes.iter().enumerate() {
        for i in 0..m {
            for j in 0..m {
                let dg = (s2.nodes[k].g[i][j] - s0.nodes[k].g[i][j]) / two_dt;
                res_g = res_g.max((dg + 2.0 * sig.inner(&geo.h, &geo.b[i][j])).abs());
            }
        }
        let dv = (s2.nodes[k].sqrt_g - s0.nodes[k].sqrt_g) / two_dt;
        res_vol = res_vol.max((dv + geo.h2_signed * geo.sqrt_g).abs());
    }

    let tau = crate::surface::tension_field(s1, eval)?;
    let mut res_gamma = 0.0f64;
    for k in 0..s1.len() {
        let frame = s1.normal_frame(k)?;
        let geo = &s1.nodes[k];
        let e: Vec<_> = (0..m).map(|a| geo.frame_tangent(&sig, a)).collect();
        let z = |snap: &GeometrySnapshot| -> Result<crate::SmallMatrix> {
            let t = &snap.nodes[k].tangents;
            let mut am = crate::SmallMatrix::zeros(m, m);
            let mut bm = crate::SmallMatrix::zeros(m, sig.n);
            for i in 0..m {
                for a in 0..m {
                    am[(i, a)] = sig.inner(&t[i], &e[a]);
                }
                for al in 0..sig.n {
                    bm[(i, al)] = sig.inner(&t[i], &frame.vectors[al]) * frame.signs[al];
                }
            }
            solve(&am, &bm)
        };
        let (z0, z2) = (z(s0)?, z(s2)?);
        for a in 0..m {
            for al in 0..sig.n {
                let dz = (z2[(a, al)] - z0[(a, al)]) / two_dt;
                res_gamma = res_gamma.max((dz - tau[k][(a, al)]).abs());
            }
        }
    }

    let b2: Vec<f64> = s1.field(|g| g.b2_signed);
    let lap = laplace_beltrami(&b2, s1, eval)?;
    let nabla_b2 = covariant_derivative_norm(s1, eval)?;
    let mut res_b2 = 0.0f64;
    for k in 0..s1.len() {
        let (_, ops) = s1.shape_operators(k)?;
        let s = s_matrix(&ops);
        let s2sum: f64 = s.as_slice().iter().map(|x| x * x).sum();
        let rhs = 2.0 * (-nabla_b2[k] + commutator_sum(&ops) + s2sum);
        let lhs = (s2.nodes[k].b2_signed - s0.nodes[k].b2_signed) / two_dt - lap[k];
        res_b2 = res_b2.max((lhs - rhs).abs());
    }
    Ok(IdentityResiduals { res_g, res_vol, res_gamma, res_b2 })
}

/// Solves `a x = b` for small square `a` by Gaussian elimination with
/// partial pivoting.
fn solve(a: &crate::SmallMatrix, b: &crate::SmallMatrix) -> Result<crate::SmallMatrix> {
    let n = a.rows();
    let mut a = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs())).unwrap_or(col);
        if !(a[(p, col)].abs() > 1e-300) {
            return Err(Error::DegenerateFrame { node: 0, pivot: a[(p, col)].abs() });
        }
        if p != col {
            for c in 0..n {
                let (u, v) = (a[(p, c)], a[(col, c)]);
                a[(p, c)] = v;
                a[(col, c)] = u;
            }
            for c in 0..x.cols() {
                let (u, v) = (x[(p, c)], x[(col, c)]);
                x[(p, c)] = v;
                x[(col, c)] = u;
            }
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)] / a[(col, col)];
            for c in 0..n {
                a[(r, c)] -= f * a[(col, c)];
            }
            for c in 0..x.cols() {
                x[(r, c)] -= f * x[(col, c)];
            }
        }
    }
    for r in 0..n {
        let p = a[(r, r)];
        for c in 0..x.cols() {
            x[(r, c)] /= p;
        }
    }
    Ok(x)
}

/// Per-node `⟨∇B, ∇B⟩` with the ambient signature, where
/// `(∇_k B)_ij = (∂_k B_ij)^N − Γ^l_ki B_lj − Γ^l_kj B_il`.
pub fn covariant_derivative_norm(snap: &GeometrySnapshot, order: StencilOrder) -> Result<Vec<f64>> {
    let sig = snap.sig;
    let (m, d) = (sig.m, sig.ambient_dim());
    let spec = snap.grid.stencil(order);
    let sizes = &snap.grid.sizes;
    let npairs = m * (m + 1) / 2;
    // db[axis][pair][component][node]
    let mut db = vec![vec![vec![Vec::new(); d]; npairs]; m];
    for i in 0..m {
        for j in i..m {
            let p = pair_index(i, j, m);
            for c in 0..d {
                let field: Vec<f64> = snap.nodes.iter().map(|g| g.b[i][j][c]).collect();
                for (axis, dbk) in db.iter_mut().enumerate() {
                    dbk[p][c] = periodic_derivative(&field, sizes, axis, 1, &spec)?;
                }
            }
        }
    }
    Ok(snap
        .nodes
        .iter()
        .enumerate()
        .map(|(node, geo)| {
            let mut nb = [[[[0.0; MAX_AMBIENT]; MAX_M]; MAX_M]; MAX_M];
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        let mut raw = [0.0; MAX_AMBIENT];
                        for (c, x) in raw.iter_mut().enumerate().take(d) {
                            *x = db[k][pair_index(i, j, m)][c][node];
                        }
                        let mut v = geo.normal_part(&sig, &raw);
                        for l in 0..m {
                            let (gi, gj) = (geo.christoffel[l][k][i], geo.christoffel[l][k][j]);
                            for c in 0..d {
                                v[c] -= gi * geo.b[l][j][c] + gj * geo.b[i][l][c];
                            }
                        }
                        nb[k][i][j] = v;
                    }
                }
            }
            // Contract in the orthonormal frame e_a = Σ_i l_inv[a][i] ∂_i.
            let li = &geo.l_inv;
            let mut total = 0.0;
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        let mut v = [0.0; MAX_AMBIENT];
                        for k in 0..=a {
                            for i in 0..=b {
                                for j in 0..=c {
                                    let w = li[a][k] * li[b][i] * li[c][j];
                                    for x in 0..d {
                                        v[x] += w * nb[k][i][j][x];
                                    }
                                }
                            }
                        }
                        total += sig.inner(&v, &v);
                    }
                }
            }
            total
        })
        .collect())
}

/// Computes one record for `state`.
pub fn compute_record(state: &FlowState, ctx: &MonitorContext) -> Result<MonitorRecord> {
    let sig = *state.sig();
    let m = sig.m;
    let snap = state.snapshot(ctx.order)?;
    let gauss = gauss_data(&snap, &ctx.reference)?;
    let rho: Vec<f64> = gauss.iter().map(|g| g.distance).collect();
    let t = state.t();
    let mut rec = MonitorRecord {
        t,
        sup_b2: snap.sup_b2(),
        sup_h2: snap.sup_h2(),
        gauss_radius_sup: rho.iter().copied().fold(0.0, f64::max),
        height_sup: height_sup(state),
        normal_position_sup: normal_position_sup(&snap),
        lambda_min_g: f64::INFINITY,
        ..MonitorRecord::default()
    };
    for geo in &snap.nodes {
        let ev = geo.metric_eigenvalues(m);
        rec.lambda_min_g = rec.lambda_min_g.min(ev[0]);
        rec.lambda_max_g = rec.lambda_max_g.max(ev[m - 1]);
        rec.sqrt_g_max = rec.sqrt_g_max.max(geo.sqrt_g);
    }
    if let (Some(ball), true, SignatureKind::Euclidean) = (ctx.ball, ctx.selection.weighted, sig.kind) {
        let mut w = 0.0f64;
        let mut dec = 0.0f64;
        for (geo, r) in snap.nodes.iter().zip(&rho) {
            let hq = ball.h1(*r).powf(ball.q);
            w = w.max(geo.b2() * hq);
            dec = dec.max(t * geo.b2() * hq + hq);
        }
        rec.weighted_sup = Some(w);
        rec.decay_monitor = Some(dec);
    }
    if let Some(spec) = &ctx.selection.huisken {
        let (theta, trunc) = huisken_density(state, spec, ctx.order)?;
        rec.huisken_density = Some(theta);
        rec.huisken_truncation = Some(trunc);
    }
    if ctx.rescaled {
        let r = rescale(state)?;
        rec.self_similar_residual = Some(self_similar_residual(&r.snapshot(ctx.order)?));
        rec.t_tilde = Some(rescaled_time(t));
    }
    if let (Some(probe), FlowState::Parametric(p)) = (&ctx.selection.identity_probe, state) {
        let r = identity_residuals(p, probe)?;
        rec.res_g = Some(r.res_g);
        rec.res_gamma = Some(r.res_gamma);
        rec.res_b2 = Some(r.res_b2);
        rec.res_vol = Some(r.res_vol);
    }
    Ok(rec)
}

/// Header line preceding the CSV table.
pub fn header_comment(sig: &Signature) -> String {
    let kind = match sig.kind {
        SignatureKind::Euclidean => "euclidean",
        SignatureKind::PseudoEuclidean => "pseudo-euclidean",
    };
    format!("# gaussflow monitors v1 signature={kind} m={} n={}", sig.m, sig.n)
}

pub fn write_records<W: Write>(mut w: W, sig: &Signature, records: &[MonitorRecord]) -> Result<()> {
    writeln!(w, "{}", header_comment(sig)).map_err(io_err)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMNS).map_err(csv_err)?;
    for r in records {
        out.write_record(r.values().iter().map(|v| v.map(|x| format!("{x:.16e}")).unwrap_or_default()))
            .map_err(csv_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(())
}

pub fn read_records<R: BufRead>(mut r: R) -> Result<(Signature, Vec<MonitorRecord>)> {
    let mut first = String::new();
    r.read_line(&mut first).map_err(io_err)?;
    let sig = parse_header_comment(first.trim_end())?;
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rd.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(COLUMNS.iter().copied()) {
        return Err(invalid("monitor table has unexpected columns"));
    }
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row.map_err(csv_err)?;
        let mut v = [None; 19];
        for (i, cell) in row.iter().enumerate().take(19) {
            if !cell.is_empty() {
                v[i] = Some(cell.parse::<f64>().map_err(|e| invalid(format!("bad number {cell:?}: {e}")))?);
            }
        }
        records.push(MonitorRecord::from_values(&v)?);
    }
    Ok((sig, records))
}

fn parse_header_comment(line: &str) -> Result<Signature> {
    let rest =
        line.strip_prefix("# gaussflow monitors v1 ").ok_or_else(|| invalid("missing monitor table header line"))?;
    let (mut kind, mut m, mut n) = (None, None, None);
    for tok in rest.split_whitespace() {
        match tok.split_once('=') {
            Some(("signature", v)) => kind = Some(v),
            Some(("m", v)) => m = v.parse::<usize>().ok(),
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            _ => return Err(invalid(format!("unexpected header token {tok:?}"))),
        }
    }
    let (m, n) = m.zip(n).ok_or_else(|| invalid("header line lacks m or n"))?;
    match kind {
        Some("euclidean") => Signature::euclidean(m, n),
        Some("pseudo-euclidean") => Signature::pseudo(m, n),
        _ => Err(invalid("header line lacks a valid signature")),
    }
}

fn io_err(e: std::io::Error) -> Error {
    invalid(format!("i/o error: {e}"))
}

fn csv_err(e: csv::Error) -> Error {
    invalid(format!("csv error: {e}"))
}

/// Slack allowed in each monotonicity verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Slack {
    pub gauss_abs: f64,
    pub weighted_rel: f64,
    pub b2_rel: f64,
    pub b2_abs: f64,
    pub height_abs: f64,
    pub huisken_abs: f64,
    pub decay_fit_rel: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Self {
            gauss_abs: 5e-3,
            weighted_rel: 1e-3,
            b2_rel: 1e-6,
            b2_abs: 1e-10,
            height_abs: 1e-6,
            huisken_abs: 1e-4,
            decay_fit_rel: 1e-2,
        }
    }
}

/// Outcome of one monotonicity check. `excess` is the largest amount by
/// which the series exceeded its allowance (negative when it never did).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub monitor: String,
    pub applicable: bool,
    pub passed: bool,
    pub excess: f64,
}

impl Verdict {
    fn skipped(monitor: &str) -> Self {
        Self { monitor: monitor.into(), applicable: false, passed: true, excess: f64::NEG_INFINITY }
    }

    fn from_excess(monitor: &str, excess: f64) -> Self {
        Self { monitor: monitor.into(), applicable: true, passed: excess <= 0.0, excess }
    }
}

/// Largest `x_k − allowance(x_j)` over `j < k`.
fn running_excess(xs: &[f64], allow: impl Fn(f64) -> f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut lowest = f64::INFINITY;
    for &x in xs {
        if lowest.is_finite() {
            best = best.max(x - allow(lowest));
        }
        lowest = lowest.min(x);
    }
    best
}

fn column(records: &[MonitorRecord], f: impl Fn(&MonitorRecord) -> Option<f64>) -> Option<Vec<f64>> {
    records.iter().map(f).collect()
}

/// The c/t fit: `c = max t·sup|B|²` over records with `t ≥ 0.1·t_last`,
/// against `decay_monitor(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub bound: f64,
}

pub fn decay_fit(records: &[MonitorRecord]) -> Option<DecayFit> {
    let bound = records.first()?.decay_monitor?;
    let t_last = records.last()?.t;
    let c = records.iter().filter(|r| r.t >= 0.1 * t_last).map(|r| r.t * r.sup_b2).fold(0.0, f64::max);
    Some(DecayFit { c, bound })
}

/// Verdict names in output order.
pub const VERDICTS: [&str; 7] =
    ["gauss-radius", "curvature", "weighted", "decay-monitor", "decay-fit", "height", "huisken-density"];

/// Monotonicity verdicts recomputable from the record table alone.
pub fn verdicts(sig: &Signature, records: &[MonitorRecord], slack: &Slack) -> Vec<Verdict> {
    let mut out = Vec::new();
    let Some(first) = records.first() else {
        return VERDICTS.iter().map(|v| Verdict::skipped(v)).collect();
    };

    let rho0 = first.gauss_radius_sup;
    if sig.is_pseudo() || rho0 < confinement_radius_limit() {
        let ex = records.iter().map(|r| r.gauss_radius_sup - rho0 - slack.gauss_abs).fold(f64::NEG_INFINITY, f64::max);
        out.push(Verdict::from_excess("gauss-radius", ex));
    } else {
        out.push(Verdict::skipped("gauss-radius"));
    }

    if sig.is_pseudo() {
        let ex = records
            .windows(2)
            .map(|w| w[1].sup_b2 - (w[0].sup_b2 * (1.0 + slack.b2_rel) + slack.b2_abs))
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(Verdict::from_excess("curvature", ex));
    } else {
        out.push(Verdict::skipped("curvature"));
    }

    for (name, f) in [
        ("weighted", (|r: &MonitorRecord| r.weighted_sup) as fn(&MonitorRecord) -> Option<f64>),
        ("decay-monitor", |r: &MonitorRecord| r.decay_monitor),
    ] {
        match column(records, f) {
            Some(xs) => out.push(Verdict::from_excess(name, running_excess(&xs, |x| x * (1.0 + slack.weighted_rel)))),
            None => out.push(Verdict::skipped(name)),
        }
    }

    match decay_fit(records) {
        Some(fit) => out.push(Verdict::from_excess("decay-fit", fit.c - fit.bound * (1.0 + slack.decay_fit_rel))),
        None => out.push(Verdict::skipped("decay-fit")),
    }

    let hs: Vec<f64> = records.iter().map(|r| r.height_sup).collect();
    out.push(Verdict::from_excess("height", running_excess(&hs, |x| x + slack.height_abs)));

    match (column(records, |r| r.huisken_density), column(records, |r| r.huisken_truncation)) {
        (Some(th), Some(tr)) => {
            let mut ex = f64::NEG_INFINITY;
            for k in 1..th.len() {
                for j in 0..k {
                    ex = ex.max(th[k] - th[j] - tr[j] - slack.huisken_abs);
                }
            }
            out.push(Verdict::from_excess("huisken-density", ex));
        }
        _ => out.push(Verdict::skipped("huisken-density")),
    }
    out
}

/// Discrete check of `d/dt sup⟨B,B⟩ ≤ −(2/n)(sup⟨B,B⟩)²` for pseudo runs:
/// the largest positive part of `Δ sup / Δt + (2/n) sup²` over consecutive
/// records, evaluated at the earlier record.
pub fn enb_excess(records: &[MonitorRecord], n: usize) -> f64 {
    records
        .windows(2)
        .map(|w| {
            let rate = (w[1].sup_b2 - w[0].sup_b2) / (w[1].t - w[0].t);
            let mid = 0.5 * (w[0].sup_b2 + w[1].sup_b2);
            rate + 2.0 / n as f64 * mid * mid
        })
        .fold(0.0, f64::max)
}
