//! Pointwise algebra behind the curvature estimates, checked on samples of
//! shape operators `A_α` (n symmetric m × m matrices).
//!
//! Sums over `α ≠ β` run over ordered pairs, so each unordered pair counts
//! twice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::numerics::SmallMatrix;

/// Relative tolerance for every check in the suite.
pub const SUITE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SffSample {
    pub ops: Vec<SmallMatrix>,
}

impl SffSample {
    pub fn new(ops: Vec<SmallMatrix>) -> Result<Self> {
        let m = ops.first().map_or(0, SmallMatrix::rows);
        if m == 0 {
            return Err(invalid("sample needs at least one non-empty shape operator"));
        }
        for a in &ops {
            if a.rows() != m || a.cols() != m || a != &a.transpose() {
                return Err(invalid("shape operators must be symmetric and of equal size"));
            }
        }
        Ok(Self { ops })
    }

    /// Entries uniform in `[−amp, amp]`, symmetrised by mirroring the upper triangle.
    pub fn random(m: usize, n: usize, amp: f64, rng: &mut impl Rng) -> Self {
        let ops = (0..n)
            .map(|_| {
                let mut a = SmallMatrix::zeros(m, m);
                for i in 0..m {
                    for j in i..m {
                        let v = rng.gen_range(-amp..=amp);
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                a
            })
            .collect();
        Self { ops }
    }

    pub fn m(&self) -> usize {
        self.ops[0].rows()
    }

    pub fn n(&self) -> usize {
        self.ops.len()
    }

    pub fn s_matrix(&self) -> SmallMatrix {
        s_matrix(&self.ops)
    }

    /// `|B|² = Σ_α S_αα`.
    pub fn b2(&self) -> f64 {
        self.s_matrix().trace()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { ops: self.ops.iter().map(|a| a.scale(s)).collect() }
    }
}

/// `S_αβ = tr(A_α A_β)`.
pub fn s_matrix(ops: &[SmallMatrix]) -> SmallMatrix {
    let n = ops.len();
    let mut s = SmallMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v: f64 = ops[a].as_slice().iter().zip(ops[b].as_slice()).map(|(x, y)| x * y).sum();
            s[(a, b)] = v;
            s[(b, a)] = v;
        }
    }
    s
}

/// `Σ_{α≠β} |[A_α, A_β]|²` over ordered pairs.
pub fn commutator_sum(ops: &[SmallMatrix]) -> f64 {
    let mut total = 0.0;
    for a in 0..ops.len() {
        for b in a + 1..ops.len() {
            let c = ops[a].matmul(&ops[b]).sub(&ops[b].matmul(&ops[a]));
            total += 2.0 * c.frobenius2();
        }
    }
    total
}

/// `2⟨B_il,B_jk⟩⟨B_jl,B_ik⟩ − 2⟨B_il,B_ik⟩⟨B_jk,B_jl⟩` with `B_ij = Σ_α A_α[i][j] e_α`.
pub fn index_expression(ops: &[SmallMatrix]) -> f64 {
    let m = ops[0].rows();
    let ip = |i: usize, j: usize, k: usize, l: usize| -> f64 { ops.iter().map(|a| a[(i, j)] * a[(k, l)]).sum() };
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    total += 2.0 * ip(i, l, j, k) * ip(j, l, i, k) - 2.0 * ip(i, l, i, k) * ip(j, k, j, l);
                }
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCheck {
    /// `ΣS²_αβ − (1/n)(ΣS_αα)²`.
    pub margin: f64,
    /// `|B|⁴`.
    pub scale: f64,
}

pub fn check_trace_inequality(sample: &SffSample) -> TraceCheck {
    let s = sample.s_matrix();
    let b2 = s.trace();
    TraceCheck { margin: s.frobenius2() - b2 * b2 / sample.n() as f64, scale: b2 * b2 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorBound {
    /// `Σ_{α≠β}|[A_α,A_β]|² + ΣS²_αβ`.
    pub lhs: f64,
    /// `(2 − 1/n)|B|⁴`.
    pub general: f64,
    /// `(3/2)|B|⁴`, stated for `n ≥ 2`.
    pub refined: Option<f64>,
    pub b4: f64,
}

pub fn check_commutator_bound(sample: &SffSample) -> CommutatorBound {
    let s = sample.s_matrix();
    let b2 = s.trace();
    let n = sample.n();
    let b4 = b2 * b2;
    CommutatorBound {
        lhs: commutator_sum(&sample.ops) + s.frobenius2(),
        general: (2.0 - 1.0 / n as f64) * b4,
        refined: (n >= 2).then_some(1.5 * b4),
        b4,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyCheck {
    /// `n·S_αβH_αH_β − (ΣH_α²)²` with `H_α = tr(A_α)`.
    pub margin: f64,
    /// Same with the constant `m` (the trace is over m × m matrices).
    pub margin_m: f64,
    pub scale: f64,
}

pub fn check_h_cauchy(sample: &SffSample) -> CauchyCheck {
    let h: Vec<f64> = sample.ops.iter().map(SmallMatrix::trace).collect();
    check_h_cauchy_with(sample, &h)
}

/// Cauchy check for an explicit mean-curvature vector `h` (length n).
pub fn check_h_cauchy_with(sample: &SffSample, h: &[f64]) -> CauchyCheck {
    let s = sample.s_matrix();
    let n = sample.n();
    let mut shh = 0.0;
    for a in 0..n {
        for b in 0..n {
            shh += s[(a, b)] * h[a] * h[b];
        }
    }
    let h2: f64 = h.iter().map(|x| x * x).sum();
    let h4 = h2 * h2;
    CauchyCheck {
        margin: n as f64 * shh - h4,
        margin_m: sample.m() as f64 * shh - h4,
        scale: h4 + n.max(sample.m()) as f64 * shh.abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RperpCheck {
    pub index_expression: f64,
    pub commutators: f64,
    /// `|index_expression + commutators|`.
    pub residual: f64,
    pub scale: f64,
}

pub fn check_rperp_expansion(sample: &SffSample) -> RperpCheck {
    let ie = index_expression(&sample.ops);
    let cs = commutator_sum(&sample.ops);
    let b2 = sample.b2();
    RperpCheck { index_expression: ie, commutators: cs, residual: (ie + cs).abs(), scale: ie.abs() + cs + b2 * b2 }
}

/// The sharp pair `A₁ = diag(1, −1)`, `A₂ = antidiag(1, 1)`.
pub fn sharp_sample() -> SffSample {
    let a1 = SmallMatrix::diag(&[1.0, -1.0]);
    let a2 = SmallMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2");
    SffSample { ops: vec![a1, a2] }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Trace,
    Commutator,
    Cauchy,
    Rperp,
}

impl CheckKind {
    pub const ALL: [CheckKind; 4] = [CheckKind::Trace, CheckKind::Commutator, CheckKind::Cauchy, CheckKind::Rperp];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Trace => "trace-inequality",
            CheckKind::Commutator => "commutator-bound",
            CheckKind::Cauchy => "h-cauchy",
            CheckKind::Rperp => "rperp-expansion",
        }
    }
}

/// Outcome of one check over all samples of one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub kind: CheckKind,
    pub m: usize,
    pub n: usize,
    pub samples: usize,
    pub violations: usize,
    /// Most negative relative margin (residual checks report the largest
    /// relative residual, negated).
    pub worst_relative_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub shapes: Vec<ShapeReport>,
    /// Worst relative margin of the Cauchy check with the constant `m`.
    pub cauchy_m_worst: f64,
    pub sharp_lhs: f64,
    pub sharp_b4: f64,
}

impl SuiteReport {
    pub fn passed(&self, kind: CheckKind) -> bool {
        self.shapes.iter().filter(|s| s.kind == kind).all(|s| s.violations == 0)
    }

    pub fn sharp_ok(&self) -> bool {
        (self.sharp_lhs - 24.0).abs() <= 1e-12 && (self.sharp_lhs - 1.5 * self.sharp_b4).abs() <= 1e-12
    }
}

/// Default sample shapes `(m, n)`.
pub const DEFAULT_SHAPES: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];

/// Runs all four checks on `samples` random samples per shape, entries
/// uniform in `[−2, 2]`. Each shape draws from its own stream of `seed`.
pub fn run_suite(samples: usize, seed: u64, shapes: &[(usize, usize)]) -> SuiteReport {
    let mut reports = Vec::new();
    let mut cauchy_m_worst = f64::INFINITY;
    for (si, &(m, n)) in shapes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(si as u64);
        let mut worst = [f64::INFINITY; 4];
        let mut viol = [0usize; 4];
        for _ in 0..samples {
            let s = SffSample::random(m, n, 2.0, &mut rng);
            let t = check_trace_inequality(&s);
            let c = check_commutator_bound(&s);
            let h = check_h_cauchy(&s);
            let r = check_rperp_expansion(&s);
            let rel = |margin: f64, scale: f64| if scale > 0.0 { margin / scale } else { margin };
            let commutator_margin = (c.general - c.lhs).min(c.refined.map_or(f64::INFINITY, |b| b - c.lhs));
            let rels = [
                rel(t.margin, t.scale),
                rel(commutator_margin, c.b4),
                rel(h.margin, h.scale),
                -rel(r.residual, r.scale),
            ];
            cauchy_m_worst = cauchy_m_worst.min(rel(h.margin_m, h.scale));
            for k in 0..4 {
                worst[k] = worst[k].min(rels[k]);
                if rels[k] < -SUITE_REL_TOL {
                    viol[k] += 1;
                }
            }
        }
        for (k, kind) in CheckKind::ALL.iter().enumerate() {
            reports.push(ShapeReport {
                kind: *kind,
                m,
                n,
                samples,
                violations: viol[k],
                worst_relative_margin: worst[k],
            });
        }
    }
    let sharp = check_commutator_bound(&sharp_sample());
    SuiteReport { shapes: reports, cauchy_m_worst, sharp_lhs: sharp.lhs, sharp_b4: sharp.b4 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trace_examples() {
        let s = SffSample::new(vec![SmallMatrix::diag(&[1.0, 2.0])]).unwrap();
        assert!(check_trace_inequality(&s).margin.abs() < 1e-14);
        let s = SffSample::new(vec![SmallMatrix::identity(2), SmallMatrix::identity(2)]).unwrap();
        let sm = s.s_matrix();
        assert_eq!(sm.as_slice(), &[2.0, 2.0, 2.0, 2.0]);
        assert_eq!(check_trace_inequality(&s).margin, 16.0 - 8.0);
    }

    #[test]
    fn sharp_case() {
        let s = sharp_sample();
        let c = check_commutator_bound(&s);
        assert_eq!(commutator_sum(&s.ops), 16.0);
        assert_eq!(s.s_matrix().as_slice(), &[2.0, 0.0, 0.0, 2.0]);
        assert_eq!(c.lhs, 24.0);
        assert_eq!(c.b4, 16.0);
        assert_eq!(c.refined, Some(24.0));
        let r = check_rperp_expansion(&s);
        assert_eq!(r.index_expression, -16.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn single_operator_commutator_bound() {
        let s = SffSample::new(vec![SmallMatrix::diag(&[1.0, 3.0]), SmallMatrix::zeros(2, 2)]).unwrap();
        let c = check_commutator_bound(&s);
        assert_eq!(c.lhs, 100.0);
        assert!(c.lhs <= c.b4);
    }

    #[test]
    fn commuting_operators_have_no_rperp() {
        let s =
            SffSample::new(vec![SmallMatrix::diag(&[1.0, -2.0, 0.5]), SmallMatrix::diag(&[0.3, 0.1, 4.0])]).unwrap();
        let r = check_rperp_expansion(&s);
        assert_eq!(r.commutators, 0.0);
        assert!(r.index_expression.abs() < 1e-12);
    }

    #[test]
    fn cauchy_examples() {
        let s = SffSample::new(vec![SmallMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(check_h_cauchy(&s).margin, 0.0);
        // n = 1, A = I₂: S₁₁ = 2, H₁ = 2, so n·S·H² − H⁴ = 8 − 16.
        let s = SffSample::new(vec![SmallMatrix::identity(2)]).unwrap();
        let c = check_h_cauchy(&s);
        assert_eq!(c.margin, -8.0);
        assert_eq!(c.margin_m, 0.0);
    }

    #[test]
    fn suite_counts_cauchy_failures_only_where_m_exceeds_n() {
        let r = run_suite(2000, 11, &DEFAULT_SHAPES);
        for s in &r.shapes {
            let expect_fail = s.kind == CheckKind::Cauchy && s.m > s.n;
            assert_eq!(s.violations > 0, expect_fail, "{s:?}");
        }
        assert!(r.cauchy_m_worst >= -SUITE_REL_TOL);
        assert!(r.sharp_ok());
    }

    fn sample_strategy() -> impl Strategy<Value = (SffSample, f64)> {
        (2usize..=3, 1usize..=3, any::<u64>(), 0.1f64..5.0).prop_map(|(m, n, seed, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (SffSample::random(m, n, 2.0, &mut rng), s)
        })
    }

    proptest! {
        #[test]
        fn margins_scale_quartically((sample, s) in sample_strategy()) {
            let big = sample.scaled(s);
            let s4 = s.powi(4);
            let rel = |a: f64, b: f64, scale: f64| (a * s4 - b).abs() <= 1e-12 * (scale * s4).max(1e-300);
            let (t0, t1) = (check_trace_inequality(&sample), check_trace_inequality(&big));
            prop_assert!(rel(t0.margin, t1.margin, t0.scale + t0.margin.abs()));
            let (c0, c1) = (check_commutator_bound(&sample), check_commutator_bound(&big));
            prop_assert!(rel(c0.lhs, c1.lhs, c0.lhs));
            let (h0, h1) = (check_h_cauchy(&sample), check_h_cauchy(&big));
            prop_assert!(rel(h0.margin, h1.margin, h0.scale));
            let (r0, r1) = (check_rperp_expansion(&sample), check_rperp_expansion(&big));
            prop_assert!(rel(r0.index_expression, r1.index_expression, r0.scale));
        }

        #[test]
        fn rperp_expansion_holds((sample, _) in sample_strategy()) {
            let r = check_rperp_expansion(&sample);
            prop_assert!(r.residual <= 1e-10 * r.scale);
        }
    }
}
