//! Jordan angles between a tangent plane and a reference plane `P₀`, the
//! distance and pairing built from them, and the constants of the weighted
//! curvature estimate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{svd_small, sym_eigen, Signature, SmallMatrix};
use crate::MAX_AMBIENT;

/// Largest gradient singular value accepted in the pseudo-Euclidean case.
pub const SPACELIKE_GUARD: f64 = 1.0 - 1e-12;

/// `√2·π/12`: the Gauss-ball radius below which the weighted estimate holds.
pub fn weighted_radius_limit() -> f64 {
    std::f64::consts::SQRT_2 * PI / 12.0
}

/// `√2·π/4`: the radius at which `cos(√2ρ)` vanishes.
pub fn confinement_radius_limit() -> f64 {
    std::f64::consts::SQRT_2 * PI / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleKind {
    Circular,
    Hyperbolic,
}

impl AngleKind {
    pub fn for_signature(sig: &Signature) -> Self {
        if sig.is_pseudo() {
            Self::Hyperbolic
        } else {
            Self::Circular
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanAngles {
    /// Length `m`, descending.
    pub angles: Vec<f64>,
    pub kind: AngleKind,
}

/// Jordan angles of the graph plane with gradient `df` (n × m) relative to
/// the coordinate plane.
pub fn jordan_angles(df: &SmallMatrix, sig: &Signature) -> Result<JordanAngles> {
    if df.rows() != sig.n || df.cols() != sig.m {
        return Err(invalid(format!("gradient must be {}x{}, got {}x{}", sig.n, sig.m, df.rows(), df.cols())));
    }
    let svd = svd_small(df)?;
    let kind = AngleKind::for_signature(sig);
    let mut angles = Vec::with_capacity(sig.m);
    for &s in &svd.sigma {
        angles.push(match kind {
            AngleKind::Circular => s.atan(),
            AngleKind::Hyperbolic => {
                if s > SPACELIKE_GUARD {
                    return Err(Error::NotSpaceLike { node: None, sigma: s });
                }
                s.atanh()
            }
        });
    }
    angles.resize(sig.m, 0.0);
    angles.sort_by(|a, b| b.total_cmp(a));
    Ok(JordanAngles { angles, kind })
}

/// Geodesic distance `√Σθ²` to the reference plane.
pub fn distance(ja: &JordanAngles) -> f64 {
    ja.angles.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// `Πcosθ` (circular) or `Πcoshθ` (hyperbolic).
pub fn plucker_pairing(ja: &JordanAngles) -> f64 {
    match ja.kind {
        AngleKind::Circular => ja.angles.iter().map(|t| t.cos()).product(),
        AngleKind::Hyperbolic => ja.angles.iter().map(|t| t.cosh()).product(),
    }
}

/// Lower bound `cos(√2π/12)^m` for the pairing inside the weighted-estimate ball.
pub fn w_floor(m: usize) -> f64 {
    weighted_radius_limit().cos().powi(m as i32)
}

/// Smallest `ε` making both feasibility constraints hold for `r₀ ∈ (√3/2, 1)`.
pub fn choose_epsilon(r0: f64) -> Result<f64> {
    if !r0.is_finite() || r0 >= 1.0 {
        return Err(invalid(format!("choose_epsilon: r0 = {r0} must lie below 1")));
    }
    if r0 <= 3f64.sqrt() / 2.0 {
        return Err(Error::InfeasibleRadius { r0 });
    }
    let (c1, d1) = epsilon_coefficients(r0);
    if c1 >= 0.0 {
        return Err(Error::InfeasibleRadius { r0 });
    }
    let t1 = -d1 / c1;
    let t2 = (6.0 / r0 - r0 - 5.0) / 5.0;
    Ok(t1.max(t2).max(0.0) * (1.0 + 1e-12))
}

/// Coefficients `(c, d)` of the first constraint `c·ε + d ≤ 0` at `r`.
pub fn epsilon_coefficients(r: f64) -> (f64, f64) {
    let c = 3.0 / (2.0 * r) - r / (2.0 * (1.0 - r * r));
    let d = 3.0 / (2.0 * r) - 0.5 - r / (2.0 * (1.0 + r));
    (c, d)
}

/// The first constraint evaluated at `r` with the `3/(2r₀)` terms frozen at `r₀`.
pub fn epsilon_constraint(r0: f64, r: f64, eps: f64) -> f64 {
    (3.0 / (2.0 * r0) - r / (2.0 * (1.0 - r * r))) * eps + 3.0 / (2.0 * r0) - 0.5 - r / (2.0 * (1.0 + r))
}

pub fn q_exponent(r0: f64, eps: f64) -> f64 {
    3.0 * ((1.0 + eps) / r0 - 1.0)
}

/// `h₁ = 1 + ε − cos(√2ρ)`.
pub fn confinement_potential(rho: f64, eps: f64) -> f64 {
    1.0 + eps - (std::f64::consts::SQRT_2 * rho).cos()
}

/// `(cos(√2ρ), sin(√2ρ))`.
pub fn confinement_trig(rho: f64) -> (f64, f64) {
    let a = std::f64::consts::SQRT_2 * rho;
    (a.cos(), a.sin())
}

/// `sup_θ sinθ / (1 + ε − cosθ) = 1/√(ε(ε+2))`.
pub fn gradient_bound_constant(eps: f64) -> f64 {
    1.0 / (eps * (eps + 2.0)).sqrt()
}

/// Gauss-ball parameters for the weighted estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    pub radius: f64,
    pub r0: f64,
    pub epsilon: f64,
    pub q: f64,
}

impl BallParams {
    pub fn for_radius(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(invalid(format!("ball radius must be non-negative, got {radius}")));
        }
        let r0 = (std::f64::consts::SQRT_2 * radius).cos();
        if radius >= weighted_radius_limit() {
            return Err(Error::InfeasibleRadius { r0 });
        }
        // r0 = 1 makes the first constraint degenerate; use the limit value.
        let epsilon = if r0 >= 1.0 { choose_epsilon(1.0 - 1e-15)? } else { choose_epsilon(r0)? };
        Ok(Self { radius, r0, epsilon, q: q_exponent(r0, epsilon) })
    }

    pub fn h1(&self, rho: f64) -> f64 {
        confinement_potential(rho, self.epsilon)
    }
}

/// Reference plane `P₀` with an η-orthonormal completion of the ambient
/// space. Rows `0..m` span `P₀`; rows `m..m+n` span its normal space.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePlane {
    sig: Signature,
    basis: Vec<[f64; MAX_AMBIENT]>,
    coordinate: bool,
}

impl ReferencePlane {
    pub fn coordinate(sig: &Signature) -> Self {
        let d = sig.ambient_dim();
        let basis = (0..d)
            .map(|k| {
                let mut e = [0.0; MAX_AMBIENT];
                e[k] = 1.0;
                e
            })
            .collect();
        Self { sig: *sig, basis, coordinate: true }
    }

    /// Builds `P₀` from `m` rows of length `m + n`, orthonormalised and
    /// completed with coordinate vectors (normal ones first).
    pub fn from_rows(sig: &Signature, rows: &[Vec<f64>]) -> Result<Self> {
        let d = sig.ambient_dim();
        if rows.len() != sig.m || rows.iter().any(|r| r.len() != d) {
            return Err(invalid(format!("reference plane needs {} rows of length {d}", sig.m)));
        }
        let mut basis: Vec<[f64; MAX_AMBIENT]> = Vec::with_capacity(d);
        for (i, r) in rows.iter().enumerate() {
            let mut v = [0.0; MAX_AMBIENT];
            v[..d].copy_from_slice(r);
            let nrm = eta_orthogonalize(sig, &basis, &mut v);
            if !(nrm > 1e-10) {
                return Err(invalid(format!("reference row {i} is dependent or not space-like")));
            }
            scale(&mut v, 1.0 / nrm.sqrt());
            basis.push(v);
        }
        let candidates: Vec<usize> = (sig.m..d).chain(0..sig.m).collect();
        while basis.len() < d {
            let mut best: Option<(f64, [f64; MAX_AMBIENT])> = None;
            for &c in &candidates {
                let mut v = [0.0; MAX_AMBIENT];
                v[c] = 1.0;
                let q = eta_orthogonalize(sig, &basis, &mut v).abs();
                if best.as_ref().is_none_or(|(bq, _)| q > *bq + 1e-12) {
                    best = Some((q, v));
                }
            }
            let (q, mut v) = best.expect("candidates are non-empty");
            if q < 1e-10 {
                return Err(invalid("reference plane completion failed"));
            }
            scale(&mut v, 1.0 / q.sqrt());
            basis.push(v);
        }
        let coordinate = (0..d).all(|k| (0..d).all(|c| basis[k][c] == f64::from(u8::from(k == c))));
        Ok(Self { sig: *sig, basis, coordinate })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn is_coordinate(&self) -> bool {
        self.coordinate
    }

    /// The `m` rows spanning `P₀`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let d = self.sig.ambient_dim();
        self.basis[..self.sig.m].iter().map(|r| r[..d].to_vec()).collect()
    }

    /// Coefficients of `v` in the adapted basis.
    pub fn coefficients(&self, v: &[f64]) -> [f64; MAX_AMBIENT] {
        let mut out = [0.0; MAX_AMBIENT];
        if self.coordinate {
            out[..self.sig.ambient_dim()].copy_from_slice(&v[..self.sig.ambient_dim()]);
            return out;
        }
        for (k, e) in self.basis.iter().enumerate() {
            out[k] = self.sig.inner(v, e) * self.sig.eta(k);
        }
        out
    }

    /// Gradient `Df` (n × m) of the plane spanned by `tangents` written as a
    /// graph over `P₀`, or `None` if it is not a graph over `P₀`.
    pub fn gradient(&self, tangents: &[[f64; MAX_AMBIENT]]) -> Result<Option<SmallMatrix>> {
        let (m, n) = (self.sig.m, self.sig.n);
        if tangents.len() != m {
            return Err(invalid("gradient: need m tangent vectors"));
        }
        let mut u = SmallMatrix::zeros(m, m);
        let mut v = SmallMatrix::zeros(m, n);
        for (i, t) in tangents.iter().enumerate() {
            let c = self.coefficients(t);
            for k in 0..m {
                u[(i, k)] = c[k];
            }
            for a in 0..n {
                v[(i, a)] = c[m + a];
            }
        }
        if self.coordinate && u == SmallMatrix::identity(m) {
            return Ok(Some(v.transpose()));
        }
        let Some(uinv) = invert_well_conditioned(&u)? else { return Ok(None) };
        Ok(Some(uinv.matmul(&v).transpose()))
    }

    /// Jordan angles of the plane spanned by `tangents`.
    pub fn angles_of(&self, tangents: &[[f64; MAX_AMBIENT]]) -> Result<JordanAngles> {
        match self.gradient(tangents)? {
            Some(df) => jordan_angles(&df, &self.sig),
            None if !self.sig.is_pseudo() => self.circular_angles_by_projection(tangents),
            None => Err(Error::NotSpaceLike { node: None, sigma: f64::INFINITY }),
        }
    }

    /// Circular Jordan angles from an orthonormal tangent frame; used when the
    /// plane is not a graph over `P₀`.
    fn circular_angles_by_projection(&self, tangents: &[[f64; MAX_AMBIENT]]) -> Result<JordanAngles> {
        let (m, n) = (self.sig.m, self.sig.n);
        let mut q: Vec<[f64; MAX_AMBIENT]> = Vec::with_capacity(m);
        for t in tangents {
            let mut v = *t;
            let nrm = eta_orthogonalize(&self.sig, &q, &mut v);
            if !(nrm > 0.0) {
                return Err(invalid("tangent vectors are dependent"));
            }
            scale(&mut v, 1.0 / nrm.sqrt());
            q.push(v);
        }
        let mut qu = SmallMatrix::zeros(m, m);
        let mut qv = SmallMatrix::zeros(m, n);
        for (i, row) in q.iter().enumerate() {
            let c = self.coefficients(row);
            for k in 0..m {
                qu[(i, k)] = c[k];
            }
            for a in 0..n {
                qv[(i, a)] = c[m + a];
            }
        }
        let sin2 = qv.matmul(&qv.transpose());
        let cos2 = qu.matmul(&qu.transpose());
        let eig = sym_eigen(&sin2)?;
        let mut angles: Vec<f64> = (0..m)
            .map(|k| {
                let b = eig.vectors.column(k);
                let c2: f64 = (0..m).map(|i| (0..m).map(|j| b[i] * cos2[(i, j)] * b[j]).sum::<f64>()).sum();
                eig.values[k].max(0.0).sqrt().atan2(c2.max(0.0).sqrt())
            })
            .collect();
        angles.sort_by(|a, b| b.total_cmp(a));
        Ok(JordanAngles { angles, kind: AngleKind::Circular })
    }
}

fn scale(v: &mut [f64; MAX_AMBIENT], s: f64) {
    for x in v.iter_mut() {
        *x *= s;
    }
}

/// Removes the η-projection of `v` onto the η-orthonormal `basis` (twice, for
/// stability) and returns the signed η-norm² of what is left.
fn eta_orthogonalize(sig: &Signature, basis: &[[f64; MAX_AMBIENT]], v: &mut [f64; MAX_AMBIENT]) -> f64 {
    for _ in 0..2 {
        for e in basis {
            let ee = sig.inner(e, e);
            let c = sig.inner(v, e) / ee;
            for (x, y) in v.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
    }
    sig.inner(v, v)
}

fn invert_well_conditioned(u: &SmallMatrix) -> Result<Option<SmallMatrix>> {
    let svd = svd_small(u)?;
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let smin = svd.sigma.last().copied().unwrap_or(0.0);
    if !(smin > 1e-12 * smax) {
        return Ok(None);
    }
    // U⁻¹ = V Σ⁻¹ Uᵀ
    let k = svd.sigma.len();
    let mut vs = svd.v.clone();
    for i in 0..vs.rows() {
        for j in 0..k {
            vs[(i, j)] /= svd.sigma[j];
        }
    }
    Ok(Some(vs.matmul(&svd.u.transpose())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Signature;

    fn eu(m: usize, n: usize) -> Signature {
        Signature::euclidean(m, n).unwrap()
    }

    fn ps(m: usize, n: usize) -> Signature {
        Signature::pseudo(m, n).unwrap()
    }

    #[test]
    fn base_plane_and_unit_slope() {
        let ja = jordan_angles(&SmallMatrix::zeros(2, 2), &eu(2, 2)).unwrap();
        assert_eq!(ja.angles, vec![0.0, 0.0]);
        let ja = jordan_angles(&SmallMatrix::diag(&[1.0]), &eu(1, 1)).unwrap();
        assert!((ja.angles[0] - PI / 4.0).abs() < 1e-15);
        let ja = jordan_angles(&SmallMatrix::diag(&[0.5f64.tanh()]), &ps(1, 1)).unwrap();
        assert!((ja.angles[0] - 0.5).abs() < 1e-14);
        assert_eq!(ja.kind, AngleKind::Hyperbolic);
    }

    #[test]
    fn pseudo_breakdown_is_reported() {
        let err = jordan_angles(&SmallMatrix::diag(&[1.0]), &ps(1, 1)).unwrap_err();
        assert!(matches!(err, Error::NotSpaceLike { .. }));
    }

    #[test]
    fn wider_codimension_pads_with_zero_angles() {
        let df = SmallMatrix::from_rows(&[&[1.0, 0.0, 0.0]]).unwrap();
        let ja = jordan_angles(&df, &eu(3, 1)).unwrap();
        assert_eq!(ja.angles.len(), 3);
        assert_eq!(&ja.angles[1..], &[0.0, 0.0]);
    }

    #[test]
    fn distance_and_pairing_basics() {
        let ja = JordanAngles { angles: vec![0.4, 0.3], kind: AngleKind::Circular };
        assert!((distance(&ja) - 0.5).abs() < 1e-15);
        let ja = JordanAngles { angles: vec![PI / 6.0, PI / 6.0], kind: AngleKind::Circular };
        assert!((plucker_pairing(&ja) - 0.75).abs() < 1e-15);
        let ja = JordanAngles { angles: vec![0.0, 0.0], kind: AngleKind::Hyperbolic };
        assert_eq!(plucker_pairing(&ja), 1.0);
    }

    #[test]
    fn w_floor_values() {
        // cos(√2π/12) evaluated with mpmath at 30 digits.
        let w1 = 0.932_240_442_457_072_8;
        assert!((w_floor(1) - w1).abs() < 1e-15);
        assert!((w_floor(2) - w1 * w1).abs() < 1e-15);
        for m in 1..6 {
            assert!(w_floor(m + 1) < w_floor(m));
        }
    }

    #[test]
    fn epsilon_thresholds() {
        // mpmath: t1(0.95) = 0.2536885245..., t2(0.95) = 0.0731578947...
        let e = choose_epsilon(0.95).unwrap();
        assert!((e - 0.253_688_524_590_163_9).abs() < 1e-12, "{e}");
        assert!((q_exponent(0.95, e) - 0.959_016_393_442_623).abs() < 1e-11);
        assert_eq!(choose_epsilon(0.8).unwrap_err(), Error::InfeasibleRadius { r0: 0.8 });
        assert!(matches!(choose_epsilon(1.0), Err(Error::InvalidInput(_))));
        // Near r0 = 1 the first threshold still dominates.
        let r0 = 0.999;
        let (c1, d1) = epsilon_coefficients(r0);
        let t2 = (6.0 / r0 - r0 - 5.0) / 5.0;
        assert!(-d1 / c1 > t2);
        assert!((choose_epsilon(r0).unwrap() - (-d1 / c1)).abs() < 1e-12);
    }

    #[test]
    fn epsilon_makes_constraint_nonpositive_on_the_whole_interval() {
        for k in 0..40 {
            let r0 = 3f64.sqrt() / 2.0 + 1e-3 + k as f64 * (1.0 - 3f64.sqrt() / 2.0 - 2e-3) / 39.0;
            let eps = choose_epsilon(r0).unwrap();
            assert!(6.0 / r0 - r0 - 5.0 - 5.0 * eps <= 1e-12);
            let samples = 2000;
            for j in 0..samples {
                let r = r0 + (1.0 - r0) * j as f64 / samples as f64;
                assert!(epsilon_constraint(r0, r, eps) <= 1e-12, "r0 {r0} r {r}");
            }
        }
    }

    #[test]
    fn confinement_potential_values() {
        assert!((confinement_potential(0.0, 0.3) - 0.3).abs() < 1e-15);
        assert!((confinement_potential(confinement_radius_limit(), 0.3) - 1.3).abs() < 1e-15);
        assert_eq!(q_exponent(1.0, 0.0), 0.0);
    }

    #[test]
    fn gradient_bound_matches_dense_scan() {
        for eps in [0.05, 0.25, 1.0] {
            let n = 200_000;
            let scan = (0..=n)
                .map(|k| {
                    let th = PI * k as f64 / n as f64;
                    th.sin() / (1.0 + eps - th.cos())
                })
                .fold(0.0, f64::max);
            let exact = gradient_bound_constant(eps);
            assert!(scan <= exact + 1e-12 && exact - scan < 1e-6, "{eps}: {scan} vs {exact}");
        }
    }

    #[test]
    fn ball_params() {
        let b = BallParams::for_radius(0.2).unwrap();
        assert!((b.r0 - (0.2 * std::f64::consts::SQRT_2).cos()).abs() < 1e-15);
        assert!(b.q > 0.0 && b.epsilon > 0.0);
        assert!(matches!(BallParams::for_radius(0.38), Err(Error::InfeasibleRadius { .. })));
        assert!(BallParams::for_radius(0.0).unwrap().epsilon.is_finite());
    }

    #[test]
    fn custom_reference_plane_matches_coordinate_frame() {
        let sig = eu(2, 1);
        let p = ReferencePlane::from_rows(&sig, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(p.is_coordinate());
        let t = [[1.0, 0.0, 0.3, 0.0, 0.0, 0.0], [0.0, 1.0, -0.2, 0.0, 0.0, 0.0]];
        let df = p.gradient(&t).unwrap().unwrap();
        assert!((df[(0, 0)] - 0.3).abs() < 1e-15 && (df[(0, 1)] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn rotated_reference_plane() {
        // P₀ tilted by 0.3 rad in the (x, y) plane of ℝ²; a line at angle 0.5
        // makes angle 0.2 with it.
        let sig = eu(1, 1);
        let p = ReferencePlane::from_rows(&sig, &[vec![0.3f64.cos(), 0.3f64.sin()]]).unwrap();
        let t = [[0.5f64.cos(), 0.5f64.sin(), 0.0, 0.0, 0.0, 0.0]];
        let ja = p.angles_of(&t).unwrap();
        assert!((ja.angles[0] - 0.2).abs() < 1e-14);
        // Vertical relative to P₀: handled by the projection route.
        let t = [[-(0.3f64.sin()), 0.3f64.cos(), 0.0, 0.0, 0.0, 0.0]];
        let ja = p.angles_of(&t).unwrap();
        assert!((ja.angles[0] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn projection_route_agrees_with_gradient_route() {
        let sig = eu(2, 2);
        let p = ReferencePlane::coordinate(&sig);
        let t = [[1.0, 0.2, 0.5, -0.3, 0.0, 0.0], [0.1, 0.9, 0.2, 0.7, 0.0, 0.0]];
        let a = p.angles_of(&t).unwrap();
        let b = p.circular_angles_by_projection(&t).unwrap();
        for (x, y) in a.angles.iter().zip(&b.angles) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_reference_completion_is_time_like() {
        let sig = ps(1, 1);
        let r = 0.4f64;
        let p = ReferencePlane::from_rows(&sig, &[vec![r.cosh(), r.sinh()]]).unwrap();
        // A line with rapidity 0.9 makes hyperbolic angle 0.5 with P₀.
        let t = [[0.9f64.cosh(), 0.9f64.sinh(), 0.0, 0.0, 0.0, 0.0]];
        let ja = p.angles_of(&t).unwrap();
        assert!((ja.angles[0] - 0.5).abs() < 1e-12, "{:?}", ja.angles);
    }
}
