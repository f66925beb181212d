use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grassmann::{distance, plucker_pairing, JordanAngles, ReferencePlane};
use crate::numerics::{
    periodic_derivative, periodic_mixed_derivative, sym_eigen, Grid, Signature, SmallMatrix, StencilOrder,
};
use crate::{MAX_AMBIENT, MAX_M};

use super::state::{GraphState, ParametricState};

type Vecd = [f64; MAX_AMBIENT];
type Matm = [[f64; MAX_M]; MAX_M];

/// Index of the pair `(i, j)`, `i ≤ j`, in upper-triangular packing.
#[inline]
pub(crate) fn pair_index(i: usize, j: usize, m: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + j
}

/// First and second parameter derivatives of the immersion, per component.
#[derive(Debug, Clone)]
pub struct Jets {
    pub m: usize,
    pub d: usize,
    /// `first[i][c][node]` = `∂_i F^c`.
    pub first: Vec<Vec<Vec<f64>>>,
    /// `second[pair_index(i, j)][c][node]` = `∂_i ∂_j F^c`.
    pub second: Vec<Vec<Vec<f64>>>,
    pub positions: Vec<Vec<f64>>,
}

/// Derivatives of each field in `fields` along every axis: `[axis][field][node]`.
pub(crate) fn gradient_fields(fields: &[Vec<f64>], grid: &Grid, order: StencilOrder) -> Result<Vec<Vec<Vec<f64>>>> {
    let spec = grid.stencil(order);
    (0..grid.dim()).map(|i| fields.iter().map(|f| periodic_derivative(f, &grid.sizes, i, 1, &spec)).collect()).collect()
}

pub(crate) fn hessian_fields(fields: &[Vec<f64>], grid: &Grid, order: StencilOrder) -> Result<Vec<Vec<Vec<f64>>>> {
    let spec = grid.stencil(order);
    let m = grid.dim();
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for i in 0..m {
        for j in i..m {
            out.push(
                fields
                    .iter()
                    .map(|f| periodic_mixed_derivative(f, &grid.sizes, i, j, &spec))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
    }
    Ok(out)
}

impl Jets {
    pub fn of_graph(s: &GraphState, order: StencilOrder) -> Result<Self> {
        let (m, n) = (s.sig.m, s.sig.n);
        let len = s.len();
        let periodic = s.periodic_parts();
        let grads = gradient_fields(&periodic, &s.grid, order)?;
        let hess = hessian_fields(&periodic, &s.grid, order)?;
        let first = (0..m)
            .map(|i| {
                let mut comps: Vec<Vec<f64>> = (0..m).map(|c| vec![f64::from(u8::from(c == i)); len]).collect();
                for a in 0..n {
                    let t = s.tilt[a][i];
                    comps.push(grads[i][a].iter().map(|v| v + t).collect());
                }
                comps
            })
            .collect();
        let second = hess
            .into_iter()
            .map(|h| {
                let mut comps: Vec<Vec<f64>> = (0..m).map(|_| vec![0.0; len]).collect();
                comps.extend(h);
                comps
            })
            .collect();
        let positions = (0..m + n)
            .map(|c| if c < m { (0..len).map(|k| s.grid.coord(k, c)).collect() } else { s.values[c - m].clone() })
            .collect();
        Ok(Self { m, d: m + n, first, second, positions })
    }

    pub fn of_parametric(s: &ParametricState, order: StencilOrder) -> Result<Self> {
        let m = s.sig.m;
        let d = s.sig.ambient_dim();
        let periodic = s.periodic_parts();
        let mut first = gradient_fields(&periodic, &s.grid, order)?;
        for (i, comps) in first.iter_mut().enumerate() {
            for (c, f) in comps.iter_mut().enumerate() {
                let slope = s.lattice_slope(i, c);
                if slope != 0.0 {
                    f.iter_mut().for_each(|v| *v += slope);
                }
            }
        }
        let second = hessian_fields(&periodic, &s.grid, order)?;
        Ok(Self { m, d, first, second, positions: s.positions.clone() })
    }

    #[inline]
    fn tangents(&self, k: usize) -> [Vecd; MAX_M] {
        let mut t = [[0.0; MAX_AMBIENT]; MAX_M];
        for (i, ti) in t.iter_mut().enumerate().take(self.m) {
            for (c, v) in ti.iter_mut().enumerate().take(self.d) {
                *v = self.first[i][c][k];
            }
        }
        t
    }

    #[inline]
    fn second_at(&self, k: usize) -> [[Vecd; MAX_M]; MAX_M] {
        let mut s = [[[0.0; MAX_AMBIENT]; MAX_M]; MAX_M];
        for i in 0..self.m {
            for j in i..self.m {
                let p = pair_index(i, j, self.m);
                for c in 0..self.d {
                    let v = self.second[p][c][k];
                    s[i][j][c] = v;
                    s[j][i][c] = v;
                }
            }
        }
        s
    }

    fn position(&self, k: usize) -> Vecd {
        let mut p = [0.0; MAX_AMBIENT];
        for (c, v) in p.iter_mut().enumerate().take(self.d) {
            *v = self.positions[c][k];
        }
        p
    }
}

/// Geometry at one grid node.
#[derive(Debug, Clone, Copy)]
pub struct NodeGeometry {
    pub position: Vecd,
    /// `∂_i F`.
    pub tangents: [Vecd; MAX_M],
    pub g: Matm,
    pub g_inv: Matm,
    /// Rows give an orthonormal tangent frame: `e_a = Σ_i l_inv[a][i] ∂_i F`.
    pub l_inv: Matm,
    pub sqrt_g: f64,
    /// `christoffel[l][i][j]` = `Γ^l_ij`.
    pub christoffel: [Matm; MAX_M],
    pub b: [[Vecd; MAX_M]; MAX_M],
    pub h: Vecd,
    /// `g^{ik} g^{jl} ⟨B_ij, B_kl⟩` with the ambient signature.
    pub b2_signed: f64,
    pub h2_signed: f64,
}

impl NodeGeometry {
    pub fn b2(&self) -> f64 {
        self.b2_signed.abs()
    }

    pub fn h2(&self) -> f64 {
        self.h2_signed.abs()
    }

    fn from_jet(
        sig: &Signature,
        node: usize,
        position: Vecd,
        tangents: [Vecd; MAX_M],
        second: [[Vecd; MAX_M]; MAX_M],
    ) -> Result<Self> {
        let m = sig.m;
        let d = sig.ambient_dim();
        let mut g = [[0.0; MAX_M]; MAX_M];
        for i in 0..m {
            for j in i..m {
                let v = sig.inner(&tangents[i], &tangents[j]);
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        let l = cholesky(&g, m).ok_or_else(|| metric_failure(sig, node, &g))?;
        let l_inv = lower_inverse(&l, m);
        let mut g_inv = [[0.0; MAX_M]; MAX_M];
        for i in 0..m {
            for j in 0..m {
                g_inv[i][j] = (0..m).map(|a| l_inv[a][i] * l_inv[a][j]).sum();
            }
        }
        let sqrt_g: f64 = (0..m).map(|i| l[i][i]).product();

        let mut christoffel = [[[0.0; MAX_M]; MAX_M]; MAX_M];
        let mut b = [[[0.0; MAX_AMBIENT]; MAX_M]; MAX_M];
        for i in 0..m {
            for j in i..m {
                let s = &second[i][j];
                let mut sk = [0.0; MAX_M];
                for (k, v) in sk.iter_mut().enumerate().take(m) {
                    *v = sig.inner(s, &tangents[k]);
                }
                let mut bij = *s;
                for lidx in 0..m {
                    let gamma: f64 = (0..m).map(|k| g_inv[lidx][k] * sk[k]).sum();
                    christoffel[lidx][i][j] = gamma;
                    christoffel[lidx][j][i] = gamma;
                    for c in 0..d {
                        bij[c] -= gamma * tangents[lidx][c];
                    }
                }
                b[i][j] = bij;
                b[j][i] = bij;
            }
        }
        let mut h = [0.0; MAX_AMBIENT];
        for i in 0..m {
            for j in 0..m {
                for c in 0..d {
                    h[c] += g_inv[i][j] * b[i][j][c];
                }
            }
        }
        let mut b2_signed = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for lidx in 0..m {
                        let w = g_inv[i][k] * g_inv[j][lidx];
                        if w != 0.0 {
                            b2_signed += w * sig.inner(&b[i][j], &b[k][lidx]);
                        }
                    }
                }
            }
        }
        let h2_signed = sig.inner(&h, &h);
        Ok(Self { position, tangents, g, g_inv, l_inv, sqrt_g, christoffel, b, h, b2_signed, h2_signed })
    }

    /// Ambient-normal part of `v`.
    pub fn normal_part(&self, sig: &Signature, v: &[f64]) -> Vecd {
        let m = sig.m;
        let d = sig.ambient_dim();
        let mut out = [0.0; MAX_AMBIENT];
        out[..d].copy_from_slice(&v[..d]);
        let mut vk = [0.0; MAX_M];
        for (k, x) in vk.iter_mut().enumerate().take(m) {
            *x = sig.inner(v, &self.tangents[k]);
        }
        for l in 0..m {
            let coef: f64 = (0..m).map(|k| self.g_inv[l][k] * vk[k]).sum();
            for c in 0..d {
                out[c] -= coef * self.tangents[l][c];
            }
        }
        out
    }

    /// Orthonormal tangent vector `e_a`.
    pub fn frame_tangent(&self, sig: &Signature, a: usize) -> Vecd {
        let mut e = [0.0; MAX_AMBIENT];
        for i in 0..sig.m {
            for c in 0..sig.ambient_dim() {
                e[c] += self.l_inv[a][i] * self.tangents[i][c];
            }
        }
        e
    }

    /// Eigenvalues of `g_ij`, ascending.
    pub fn metric_eigenvalues(&self, m: usize) -> Vec<f64> {
        let mut s = SmallMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                s[(i, j)] = self.g[i][j];
            }
        }
        sym_eigen(&s).map(|e| e.values).unwrap_or_else(|_| vec![f64::NAN; m])
    }
}

pub(crate) fn cholesky(g: &Matm, m: usize) -> Option<Matm> {
    let scale = (0..m).map(|i| g[i][i].abs()).fold(0.0, f64::max).max(1e-300);
    let mut l = [[0.0; MAX_M]; MAX_M];
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = g[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 1e-14 * scale) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

pub(crate) fn lower_inverse(l: &Matm, m: usize) -> Matm {
    let mut inv = [[0.0; MAX_M]; MAX_M];
    for i in 0..m {
        inv[i][i] = 1.0 / l[i][i];
        for j in 0..i {
            let s: f64 = (j..i).map(|k| l[i][k] * inv[k][j]).sum();
            inv[i][j] = -s / l[i][i];
        }
    }
    inv
}

pub(crate) fn metric_failure(sig: &Signature, node: usize, g: &Matm) -> Error {
    let m = sig.m;
    let mut s = SmallMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] = g[i][j];
        }
    }
    let lmin = sym_eigen(&s).map(|e| e.values[0]).unwrap_or(f64::NAN);
    if sig.is_pseudo() {
        Error::NotSpaceLike { node: Some(node), sigma: (1.0 - lmin).max(0.0).sqrt() }
    } else {
        Error::DegenerateFrame { node, pivot: lmin }
    }
}

/// η-orthonormal normal frame at one node. `vectors[α]` has
/// `⟨e_α, e_α⟩ = signs[α]`.
#[derive(Debug, Clone, Copy)]
pub struct NormalFrame {
    pub vectors: [Vecd; MAX_AMBIENT],
    pub signs: [f64; MAX_AMBIENT],
}

/// Per-node discrete geometry of a frozen state.
#[derive(Debug, Clone)]
pub struct GeometrySnapshot {
    pub sig: Signature,
    pub grid: Grid,
    pub order: StencilOrder,
    pub nodes: Vec<NodeGeometry>,
}

/// Smallest Gram–Schmidt pivot accepted for the normal frame.
pub const FRAME_PIVOT_MIN: f64 = 1e-10;

impl GeometrySnapshot {
    pub fn of_graph(s: &GraphState, order: StencilOrder) -> Result<Self> {
        let jets = Jets::of_graph(s, order)?;
        Self::from_jets(s.sig, s.grid.clone(), order, &jets)
    }

    pub fn of_parametric(s: &ParametricState, order: StencilOrder) -> Result<Self> {
        let jets = Jets::of_parametric(s, order)?;
        Self::from_jets(s.sig, s.grid.clone(), order, &jets)
    }

    pub fn from_jets(sig: Signature, grid: Grid, order: StencilOrder, jets: &Jets) -> Result<Self> {
        let results: Vec<Result<NodeGeometry>> = (0..grid.len())
            .into_par_iter()
            .map(|k| NodeGeometry::from_jet(&sig, k, jets.position(k), jets.tangents(k), jets.second_at(k)))
            .collect();
        let nodes = results.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self { sig, grid, order, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sup_b2(&self) -> f64 {
        self.nodes.iter().map(NodeGeometry::b2).fold(0.0, f64::max)
    }

    pub fn sup_h2(&self) -> f64 {
        self.nodes.iter().map(NodeGeometry::h2).fold(0.0, f64::max)
    }

    pub fn field(&self, f: impl Fn(&NodeGeometry) -> f64 + Sync) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }

    /// Mean-curvature components `H^c` as grid fields.
    pub fn h_fields(&self) -> Vec<Vec<f64>> {
        (0..self.sig.ambient_dim()).map(|c| self.field(|g| g.h[c])).collect()
    }

    /// Normal frame by signature-aware Gram–Schmidt with pivoting: the
    /// candidates are the coordinate directions `ε_{m+1..m+n}` then
    /// `ε_{1..m}`, projected normally; each step takes the candidate with the
    /// largest residual (ties by candidate order).
    pub fn normal_frame(&self, node: usize) -> Result<NormalFrame> {
        let sig = &self.sig;
        let (m, n) = (sig.m, sig.n);
        let d = sig.ambient_dim();
        let geo = &self.nodes[node];
        let mut frame = NormalFrame { vectors: [[0.0; MAX_AMBIENT]; MAX_AMBIENT], signs: [0.0; MAX_AMBIENT] };
        let projected: Vec<Vecd> = (m..d)
            .chain(0..m)
            .map(|c| {
                let mut e = [0.0; MAX_AMBIENT];
                e[c] = 1.0;
                geo.normal_part(sig, &e)
            })
            .collect();
        let mut used = vec![false; projected.len()];
        for alpha in 0..n {
            let mut best: Option<(usize, f64, Vecd)> = None;
            for (ci, cand) in projected.iter().enumerate() {
                if used[ci] {
                    continue;
                }
                let mut v = *cand;
                for _ in 0..2 {
                    for beta in 0..alpha {
                        let e = &frame.vectors[beta];
                        let coef = sig.inner(&v, e) * frame.signs[beta];
                        for c in 0..d {
                            v[c] -= coef * e[c];
                        }
                    }
                }
                let q = sig.inner(&v, &v);
                if best.as_ref().is_none_or(|(_, bq, _)| q.abs() > bq.abs() * (1.0 + 1e-12)) {
                    best = Some((ci, q, v));
                }
            }
            let (ci, q, v) = best.expect("candidate list is non-empty");
            let pivot = q.abs().sqrt();
            if !(pivot >= FRAME_PIVOT_MIN) {
                return Err(Error::DegenerateFrame { node, pivot });
            }
            used[ci] = true;
            for c in 0..d {
                frame.vectors[alpha][c] = v[c] / pivot;
            }
            frame.signs[alpha] = q.signum();
        }
        Ok(frame)
    }

    /// Shape operators `h_α` (m × m) in the orthonormal tangent frame and the
    /// normal frame of [`Self::normal_frame`]: `B(e_a, e_b) = Σ_α h_α[a][b] e_α`.
    pub fn shape_operators(&self, node: usize) -> Result<(NormalFrame, Vec<SmallMatrix>)> {
        let frame = self.normal_frame(node)?;
        let ops = shape_operators_in(&self.sig, &self.nodes[node], &frame);
        Ok((frame, ops))
    }

    /// `S_αβ = tr(h_α h_β)`.
    pub fn s_matrix(&self, node: usize) -> Result<SmallMatrix> {
        let (_, ops) = self.shape_operators(node)?;
        Ok(crate::identities::s_matrix(&ops))
    }
}

pub(crate) fn shape_operators_in(sig: &Signature, geo: &NodeGeometry, frame: &NormalFrame) -> Vec<SmallMatrix> {
    let m = sig.m;
    (0..sig.n)
        .map(|alpha| {
            let e = &frame.vectors[alpha];
            let s = frame.signs[alpha];
            let mut ba = [[0.0; MAX_M]; MAX_M];
            for i in 0..m {
                for j in 0..m {
                    ba[i][j] = sig.inner(&geo.b[i][j], e) * s;
                }
            }
            let mut h = SmallMatrix::zeros(m, m);
            for a in 0..m {
                for bb in 0..m {
                    let mut v = 0.0;
                    for i in 0..m {
                        for j in 0..m {
                            v += geo.l_inv[a][i] * geo.l_inv[bb][j] * ba[i][j];
                        }
                    }
                    h[(a, bb)] = v;
                }
            }
            h
        })
        .collect()
}

/// Gauss-map data at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussData {
    pub angles: JordanAngles,
    pub distance: f64,
    pub pairing: f64,
    /// `|w − det(I ± DfᵀDf)^{-1/2}|` for the node's gradient over `P₀`.
    pub pairing_defect: f64,
}

pub fn gauss_data(snap: &GeometrySnapshot, reference: &ReferencePlane) -> Result<Vec<GaussData>> {
    if reference.signature() != &snap.sig {
        return Err(invalid("reference plane signature does not match the state"));
    }
    let m = snap.sig.m;
    let eta = snap.sig.normal_sign();
    let results: Vec<Result<GaussData>> = snap
        .nodes
        .par_iter()
        .enumerate()
        .map(|(k, geo)| {
            let tangents = &geo.tangents[..m];
            let locate = |e: Error| match e {
                Error::NotSpaceLike { sigma, .. } => Error::NotSpaceLike { node: Some(k), sigma },
                other => other,
            };
            let angles = reference.angles_of(tangents).map_err(locate)?;
            let w = plucker_pairing(&angles);
            let graph_det = match reference.gradient(tangents)? {
                Some(df) => {
                    let dtd = df.transpose().matmul(&df);
                    let gm = SmallMatrix::identity(m).sub(&dtd.scale(-eta));
                    determinant(&gm)
                }
                None => f64::INFINITY,
            };
            Ok(GaussData {
                distance: distance(&angles),
                pairing: w,
                pairing_defect: (w - graph_det.powf(-0.5)).abs(),
                angles,
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Determinant of a matrix of size at most 3.
pub(crate) fn determinant(a: &SmallMatrix) -> f64 {
    match a.rows() {
        1 => a[(0, 0)],
        2 => a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)],
        3 => {
            a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
                - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
                + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)])
        }
        _ => {
            // Gaussian elimination with partial pivoting.
            let n = a.rows();
            let mut m = a.clone();
            let mut det = 1.0;
            for c in 0..n {
                let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs())).unwrap_or(c);
                if m[(p, c)] == 0.0 {
                    return 0.0;
                }
                if p != c {
                    for j in 0..n {
                        let t = m[(c, j)];
                        m[(c, j)] = m[(p, j)];
                        m[(p, j)] = t;
                    }
                    det = -det;
                }
                det *= m[(c, c)];
                for i in c + 1..n {
                    let f = m[(i, c)] / m[(c, c)];
                    for j in c..n {
                        let v = m[(c, j)];
                        m[(i, j)] -= f * v;
                    }
                }
            }
            det
        }
    }
}

/// Divergence-form Laplace–Beltrami `(1/√g) ∂_i(√g g^{ij} ∂_j u)`.
pub fn laplace_beltrami(u: &[f64], snap: &GeometrySnapshot, order: StencilOrder) -> Result<Vec<f64>> {
    if u.len() != snap.len() {
        return Err(invalid("laplace_beltrami: field length does not match the grid"));
    }
    let m = snap.sig.m;
    let spec = snap.grid.stencil(order);
    let sizes = &snap.grid.sizes;
    let du: Vec<Vec<f64>> = (0..m).map(|j| periodic_derivative(u, sizes, j, 1, &spec)).collect::<Result<_>>()?;
    let mut out = vec![0.0; u.len()];
    for i in 0..m {
        let flux: Vec<f64> = snap
            .nodes
            .iter()
            .enumerate()
            .map(|(k, geo)| geo.sqrt_g * (0..m).map(|j| geo.g_inv[i][j] * du[j][k]).sum::<f64>())
            .collect();
        let div = periodic_derivative(&flux, sizes, i, 1, &spec)?;
        for (o, v) in out.iter_mut().zip(div) {
            *o += v;
        }
    }
    for (o, geo) in out.iter_mut().zip(&snap.nodes) {
        *o /= geo.sqrt_g;
    }
    Ok(out)
}

/// Tension field of the Gauss map in the adapted frame:
/// `τ[k][α] = ⟨∂_{e_k} H, e_α⟩ / ⟨e_α, e_α⟩` (m × n per node).
pub fn tension_field(snap: &GeometrySnapshot, order: StencilOrder) -> Result<Vec<SmallMatrix>> {
    let sig = snap.sig;
    let (m, n) = (sig.m, sig.n);
    let dh = gradient_fields(&snap.h_fields(), &snap.grid, order)?;
    (0..snap.len())
        .map(|k| {
            let frame = snap.normal_frame(k)?;
            let geo = &snap.nodes[k];
            let mut tau = SmallMatrix::zeros(m, n);
            for a in 0..m {
                let mut v = [0.0; MAX_AMBIENT];
                for i in 0..m {
                    for (c, x) in v.iter_mut().enumerate().take(sig.ambient_dim()) {
                        *x += geo.l_inv[a][i] * dh[i][c][k];
                    }
                }
                for alpha in 0..n {
                    tau[(a, alpha)] = sig.inner(&v, &frame.vectors[alpha]) * frame.signs[alpha];
                }
            }
            Ok(tau)
        })
        .collect()
}

/// Sup over nodes of `|⟨F⊥, F⊥⟩|`, the squared normal component of position.
pub fn normal_position_sup(snap: &GeometrySnapshot) -> f64 {
    snap.nodes
        .iter()
        .map(|geo| {
            let f = geo.normal_part(&snap.sig, &geo.position);
            snap.sig.inner(&f, &f).abs()
        })
        .fold(0.0, f64::max)
}

/// Whether `Σ_α⟨F, e_α⟩² ≤ C′(1 + |F|²)^{1−δ}` holds at every node.
pub fn normal_position_growth_ok(snap: &GeometrySnapshot, c_prime: f64, delta: f64) -> bool {
    snap.nodes.iter().all(|geo| {
        let f = geo.normal_part(&snap.sig, &geo.position);
        let lhs = snap.sig.inner(&f, &f).abs();
        let r2: f64 = geo.position[..snap.sig.ambient_dim()].iter().map(|x| x * x).sum();
        lhs <= c_prime * (1.0 + r2).powf(1.0 - delta)
    })
}

/// Sup over nodes of the signature-aware norm of `F⊥ − H`.
pub fn self_similar_residual(snap: &GeometrySnapshot) -> f64 {
    let d = snap.sig.ambient_dim();
    snap.nodes
        .iter()
        .map(|geo| {
            let mut v = geo.normal_part(&snap.sig, &geo.position);
            for c in 0..d {
                v[c] -= geo.h[c];
            }
            snap.sig.inner(&v, &v).abs().sqrt()
        })
        .fold(0.0, f64::max)
}
