//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! output. The process exits non-zero when a criterion fails unexpectedly.

use std::process::ExitCode;
use std::time::Instant;

use gaussflow_core::flow::{cfl_dt, rescale, rhs, run, step, FlowConfig};
use gaussflow_core::generate::{self, BandLimited};
use gaussflow_core::grassmann::{distance, plucker_pairing, w_floor, weighted_radius_limit};
use gaussflow_core::identities::{run_suite, CheckKind, DEFAULT_SHAPES};
use gaussflow_core::monitors::{huisken_density, identity_residuals, verdicts, HuiskenSpec, IdentityProbe};
use gaussflow_core::surface::gauss_data;
use gaussflow_core::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEEDS: u64 = 10;
const GRID: usize = 64;
const FINE_GRID: usize = 128;
const T_END: f64 = 0.5;
const MONITOR_EVERY: usize = 5;

const C1_TARGETS: [f64; 3] = [0.20, 0.30, 0.35];
const C1_GAUSS_SLACK: f64 = 5e-3;
const C1_REFINE_RATIO: f64 = 1.8;
/// Violations below this are treated as absent when testing refinement.
const C1_REFINE_FLOOR: f64 = 1e-10;
const C2_TARGETS: [f64; 2] = [0.20, 0.30];
const C2_REL: f64 = 1e-3;
const C2_FIT_REL: f64 = 1e-2;
const C2_FIT_FROM: f64 = 0.1;
const C3_SIGMA_MAX: f64 = 0.5;
const C3_TARGET: f64 = 0.45;
const C3_REL: f64 = 1e-6;
const C3_ABS: f64 = 1e-10;
const C4_LEVELS: [(usize, f64); 3] = [(64, 8e-3), (128, 4e-3), (256, 2e-3)];
const C4_AMPLITUDE: f64 = 0.1;
const C4_RATIO: (f64, f64) = (2.5, 6.0);
const C5_SAMPLES: usize = 10_000;
const C5_SEED: u64 = 2024;
const C5_REL: f64 = 1e-10;
const C5_SHARP: f64 = 1e-12;
const C6_N: usize = 256;
const C6_R0: f64 = 1.0;
const C6_TOL: f64 = 1e-3;
const C6_RATIO: f64 = 3.0;
const C7_TOL: f64 = 1e-12;
const C8_T_TILDE: f64 = 3.0;
const C8_FINAL_FACTOR: f64 = 0.1;
const C8_ANGLE_TOL: f64 = 1e-14;
const C9_TOL: f64 = 1e-6;
const C10_PAIRS: usize = 1000;
const C10_TOL: f64 = 1e-10;
const C11_LMIN: f64 = 1e-12;
const C11_SQRTG: f64 = 1e-10;
const C11_LMAX: f64 = 1e-12;
const C12_FLAT_TOL: f64 = 1e-6;
const C12_RUN_TOL: f64 = 1e-4;
const C12_TAU: f64 = 0.15;

struct Outcome {
    passed: bool,
    /// A failure that the suite expects and explains in its detail line.
    expected_failure: bool,
    detail: String,
}

impl Outcome {
    fn check(passed: bool, detail: String) -> Self {
        Self { passed, expected_failure: false, detail }
    }
}

/// Monitor histories shared by later criteria.
#[derive(Default)]
struct Histories {
    runs: Vec<(String, Signature, Vec<MonitorRecord>)>,
}

fn band_limited(sig: Signature, seed: u64, target: f64, size: usize) -> GraphState {
    let mut f = BandLimited::random(sig, seed);
    f.scale_to_radius(&Grid::cube(sig.m, GRID).unwrap(), StencilOrder::Two, target).unwrap();
    f.evaluate(&Grid::cube(sig.m, size).unwrap()).unwrap()
}

fn flow_config(every: usize) -> FlowConfig {
    let mut cfg = FlowConfig::new(T_END);
    cfg.monitor_every = every;
    cfg
}

fn max_gauss_excess(records: &[MonitorRecord]) -> f64 {
    let r0 = records[0].gauss_radius_sup;
    records.iter().map(|r| r.gauss_radius_sup - r0).fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_1_2(h: &mut Histories) -> (Outcome, Outcome) {
    let sig = Signature::euclidean(2, 2).unwrap();
    let jobs: Vec<(f64, u64)> = C1_TARGETS.iter().flat_map(|&t| (0..SEEDS).map(move |s| (t, s))).collect();
    let results: Vec<(f64, u64, RunResult)> = jobs
        .par_iter()
        .map(|&(target, seed)| {
            let g = band_limited(sig, seed, target, GRID);
            (target, seed, run(&flow_config(MONITOR_EVERY), FlowState::Graph(g)).unwrap())
        })
        .collect();

    let mut ok1 = true;
    let mut worst = f64::NEG_INFINITY;
    let mut refined = 0usize;
    let mut refine_ok = true;
    for (target, seed, res) in &results {
        if res.termination != Termination::ReachedTEnd {
            ok1 = false;
            continue;
        }
        let ex = max_gauss_excess(&res.records);
        worst = worst.max(ex);
        ok1 &= ex <= C1_GAUSS_SLACK;
        if ex > C1_REFINE_FLOOR {
            refined += 1;
            let g = band_limited(sig, *seed, *target, FINE_GRID);
            let fine = run(&flow_config(2 * MONITOR_EVERY), FlowState::Graph(g)).unwrap();
            let ex_fine = max_gauss_excess(&fine.records).max(0.0);
            refine_ok &= ex >= C1_REFINE_RATIO * ex_fine;
        }
        h.runs.push((format!("gauss target {target} seed {seed}"), sig, res.records.clone()));
    }
    let o1 = Outcome::check(
        ok1 && refine_ok,
        format!(
            "{} runs, max rho(t) - rho(0) = {worst:.3e} (allowed {C1_GAUSS_SLACK:.0e}); {refined} runs above {C1_REFINE_FLOOR:.0e} refined, slack ratio >= {C1_REFINE_RATIO}: {refine_ok}",
            results.len()
        ),
    );

    let mut ok2 = true;
    let mut worst_w = f64::NEG_INFINITY;
    let mut worst_d = f64::NEG_INFINITY;
    let mut worst_fit = f64::NEG_INFINITY;
    let mut n2 = 0;
    for (target, _, res) in results.iter().filter(|(t, _, _)| C2_TARGETS.contains(t)) {
        assert!(*target < weighted_radius_limit());
        n2 += 1;
        let w: Option<Vec<f64>> = res.records.iter().map(|r| r.weighted_sup).collect();
        let d: Option<Vec<f64>> = res.records.iter().map(|r| r.decay_monitor).collect();
        let (Some(w), Some(d)) = (w, d) else {
            ok2 = false;
            continue;
        };
        let rel_rise = |xs: &[f64]| {
            let mut lowest = f64::INFINITY;
            let mut worst = f64::NEG_INFINITY;
            for &x in xs {
                if lowest.is_finite() {
                    worst = worst.max((x - lowest) / lowest);
                }
                lowest = lowest.min(x);
            }
            worst
        };
        let (rw, rd) = (rel_rise(&w), rel_rise(&d));
        worst_w = worst_w.max(rw);
        worst_d = worst_d.max(rd);
        let c0 = d[0];
        let fit = res
            .records
            .iter()
            .filter(|r| r.t >= C2_FIT_FROM - 1e-12)
            .map(|r| r.t * r.sup_b2 / (c0 * (1.0 + C2_FIT_REL)))
            .fold(0.0, f64::max);
        worst_fit = worst_fit.max(fit);
        ok2 &= rw <= C2_REL && rd <= C2_REL && fit <= 1.0;
    }
    let o2 = Outcome::check(
        ok2,
        format!(
            "{n2} runs, worst relative rise: weighted {worst_w:.2e}, decay {worst_d:.2e} (allowed {C2_REL:.0e}); max t|B|^2 / (c(1+{C2_FIT_REL:.0e})) = {worst_fit:.3}"
        ),
    );
    (o1, o2)
}

fn criterion_3(h: &mut Histories) -> Outcome {
    let sig = Signature::pseudo(2, 2).unwrap();
    let results: Vec<(u64, f64, RunResult)> = (0..SEEDS)
        .into_par_iter()
        .map(|seed| {
            let g = band_limited(sig, seed, C3_TARGET, GRID);
            let snap = GeometrySnapshot::of_graph(&g, StencilOrder::Two).unwrap();
            let sigma = gauss_data(&snap, &ReferencePlane::coordinate(&sig))
                .unwrap()
                .iter()
                .map(|d| d.angles.angles[0].tanh())
                .fold(0.0, f64::max);
            (seed, sigma, run(&flow_config(1), FlowState::Graph(g)).unwrap())
        })
        .collect();
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    let mut sigma_max = 0.0f64;
    for (seed, sigma, res) in &results {
        sigma_max = sigma_max.max(*sigma);
        ok &= *sigma <= C3_SIGMA_MAX && res.termination == Termination::ReachedTEnd;
        for w in res.records.windows(2) {
            let ex = w[1].sup_b2 - (w[0].sup_b2 * (1.0 + C3_REL) + C3_ABS);
            worst = worst.max(ex / w[0].sup_b2.max(f64::MIN_POSITIVE));
        }
        h.runs.push((format!("pseudo seed {seed}"), sig, res.records.clone()));
    }
    ok &= worst <= 0.0;
    let terms: Vec<_> = results.iter().map(|r| r.2.termination.as_str()).collect();
    let all_end = terms.iter().all(|t| *t == "reached-t-end");
    Outcome::check(
        ok,
        format!(
            "{} runs, initial sigma_max {sigma_max:.3} (<= {C3_SIGMA_MAX}), all reached t_end: {all_end}, worst per-step relative excess {worst:.2e}",
            results.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for sig in [Signature::euclidean(2, 2).unwrap(), Signature::pseudo(2, 2).unwrap()] {
        let res: Vec<_> = C4_LEVELS
            .par_iter()
            .map(|&(n, dt)| {
                let g = generate::sine(sig, Grid::cube(2, n).unwrap(), C4_AMPLITUDE).unwrap();
                identity_residuals(&ParametricState::from_graph(&g), &IdentityProbe::new(dt)).unwrap()
            })
            .collect();
        let mut ratios = Vec::new();
        for w in res.windows(2) {
            let r = [
                w[0].res_g / w[1].res_g,
                w[0].res_gamma / w[1].res_gamma,
                w[0].res_b2 / w[1].res_b2,
                w[0].res_vol / w[1].res_vol,
            ];
            ok &= r.iter().all(|x| (C4_RATIO.0..=C4_RATIO.1).contains(x));
            ratios.push(format!("g {:.2} gamma {:.2} b2 {:.2} vol {:.2}", r[0], r[1], r[2], r[3]));
        }
        let kind = if sig.is_pseudo() { "pseudo" } else { "euclidean" };
        lines.push(format!("{kind}: [{}]", ratios.join("; ")));
    }
    Outcome::check(ok, format!("ratios in [{}, {}]: {}", C4_RATIO.0, C4_RATIO.1, lines.join(" ")))
}

fn criterion_5() -> Outcome {
    let report = run_suite(C5_SAMPLES, C5_SEED, &DEFAULT_SHAPES);
    let mut failing = Vec::new();
    for s in &report.shapes {
        if s.violations > 0 {
            failing.push(format!(
                "{}({},{}): {} violations, worst {:.3e}",
                s.kind.name(),
                s.m,
                s.n,
                s.violations,
                s.worst_relative_margin
            ));
        }
    }
    let sharp = report.sharp_ok() && (report.sharp_lhs - 24.0).abs() <= C5_SHARP;
    let passed = failing.is_empty() && sharp;
    // The Cauchy inequality with constant n is false for m > n; the same
    // check with constant m must hold everywhere.
    let only_cauchy_m_gt_n =
        report.shapes.iter().filter(|s| s.violations > 0).all(|s| s.kind == CheckKind::Cauchy && s.m > s.n);
    let others_pass = [CheckKind::Trace, CheckKind::Commutator, CheckKind::Rperp].iter().all(|k| report.passed(*k));
    let expected = !passed && only_cauchy_m_gt_n && others_pass && sharp && report.cauchy_m_worst >= -C5_REL;
    let mut detail = format!(
        "{C5_SAMPLES} samples x {:?}; sharp lhs {} = 1.5 x {}; ",
        DEFAULT_SHAPES, report.sharp_lhs, report.sharp_b4
    );
    if failing.is_empty() {
        detail.push_str("no violations");
    } else {
        detail.push_str(&failing.join(", "));
        detail.push_str(&format!(
            "; with constant m instead of n the worst relative margin is {:.3e} (expected failure: the printed constant n is too small when m > n)",
            report.cauchy_m_worst
        ));
    }
    Outcome { passed, expected_failure: expected, detail }
}

fn circle_error(n: usize) -> (f64, Vec<MonitorRecord>) {
    let sig = Signature::euclidean(1, 1).unwrap();
    let mut s = FlowState::Parametric(generate::circle(sig, n, C6_R0).unwrap());
    let t_end = 0.4 * C6_R0 * C6_R0 / 2.0;
    let mut worst = 0.0f64;
    let mut heights = vec![height_record(&s)];
    while s.t() < t_end - 1e-14 {
        let dt = cfl_dt(&s, 0.5, StencilOrder::Two).unwrap().min(t_end - s.t());
        s = step(&s, dt, Stepper::Euler, StencilOrder::Two).unwrap();
        let exact = (C6_R0 * C6_R0 - 2.0 * s.t()).sqrt();
        let f = s.fields();
        for (x, y) in f[0].iter().zip(&f[1]) {
            worst = worst.max((x.hypot(*y) - exact).abs() / exact);
        }
        heights.push(height_record(&s));
    }
    (worst, heights)
}

fn height_record(s: &FlowState) -> MonitorRecord {
    MonitorRecord { t: s.t(), height_sup: gaussflow_core::monitors::height_sup(s), ..Default::default() }
}

fn criterion_6(h: &mut Histories) -> Outcome {
    let (coarse, heights) = circle_error(C6_N);
    let (fine, _) = circle_error(2 * C6_N);
    h.runs.push(("circle".into(), Signature::euclidean(1, 1).unwrap(), heights));
    let ratio = coarse / fine;
    Outcome::check(
        coarse <= C6_TOL && ratio >= C6_RATIO,
        format!("max relative radius error {coarse:.3e} (<= {C6_TOL:.0e}) at N={C6_N}, refinement ratio {ratio:.2} (>= {C6_RATIO})"),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in 1..=3usize {
        for n in 1..=(6 - m).min(3) {
            for sig in [Signature::euclidean(m, n).unwrap(), Signature::pseudo(m, n).unwrap()] {
                let tilt: Vec<Vec<f64>> = (0..n)
                    .map(|a| (0..m).map(|i| 0.4 / (m as f64).sqrt() * ((a + 2 * i) as f64).sin()).collect())
                    .collect();
                let g = generate::flat(sig, Grid::cube(m, 8).unwrap(), Some(tilt)).unwrap();
                let p = ParametricState::from_graph(&g);
                for s in [FlowState::Graph(g), FlowState::Parametric(p)] {
                    let v = rhs(&s, StencilOrder::Two).unwrap();
                    worst = worst.max(v.iter().flatten().fold(0.0, |a, x| a.max(x.abs())));
                    cases += 1;
                }
            }
        }
    }
    Outcome::check(worst <= C7_TOL, format!("{cases} linear states, max node speed {worst:.3e} (<= {C7_TOL:.0e})"))
}

fn criterion_8(h: &mut Histories) -> Outcome {
    let sig = Signature::euclidean(2, 1).unwrap();
    let g = generate::gaussian_bump(sig, Grid::cube(2, 32).unwrap(), 0.3, 0.5, &[0.0, 0.0], true).unwrap();
    let mut cfg = FlowConfig::new((C8_T_TILDE.exp() - 1.0) / 2.0);
    cfg.rescaled = true;
    cfg.monitor_every = 20;
    let res = run(&cfg, FlowState::Graph(g)).unwrap();
    let series: Vec<(f64, f64)> =
        res.records.iter().map(|r| (r.t_tilde.unwrap(), r.self_similar_residual.unwrap())).collect();
    let after: Vec<f64> = series.iter().filter(|p| p.0 >= 1.0).map(|p| p.1).collect();
    let strictly = after.windows(2).all(|w| w[1] < w[0]);
    let (first, last) = (series[0].1, series.last().unwrap().1);
    let t_last = series.last().unwrap().0;

    // Jordan angles of the final state before and after the transform.
    let before = res.final_state.snapshot(StencilOrder::Two).unwrap();
    let after_state = rescale(&res.final_state).unwrap();
    let after_snap = after_state.snapshot(StencilOrder::Two).unwrap();
    let reference = ReferencePlane::coordinate(&sig);
    let (ga, gb) = (gauss_data(&before, &reference).unwrap(), gauss_data(&after_snap, &reference).unwrap());
    let angle_diff = ga
        .iter()
        .zip(&gb)
        .flat_map(|(a, b)| a.angles.angles.iter().zip(&b.angles.angles).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    h.runs.push(("rescaled bump".into(), sig, res.records.clone()));
    Outcome::check(
        res.termination == Termination::ReachedTEnd
            && strictly
            && last <= C8_FINAL_FACTOR * first
            && (t_last - C8_T_TILDE).abs() < 1e-12
            && angle_diff <= C8_ANGLE_TOL,
        format!(
            "residual {first:.3e} -> {last:.3e} at t~ = {t_last:.3}, strictly decreasing after t~ = 1: {strictly}; angle change under rescale {angle_diff:.1e}"
        ),
    )
}

fn criterion_9(h: &Histories) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut name = String::new();
    for (label, _, recs) in &h.runs {
        let mut lowest = f64::INFINITY;
        for r in recs {
            if lowest.is_finite() && r.height_sup - lowest > worst {
                worst = r.height_sup - lowest;
                name = label.clone();
            }
            lowest = lowest.min(r.height_sup);
        }
    }
    Outcome::check(
        worst <= C9_TOL,
        format!("{} runs, largest rise of sup y {worst:.3e} ({name}) (<= {C9_TOL:.0e})", h.runs.len()),
    )
}

/// Principal angles between the row spaces of `a` and `b` (m × d each).
fn principal_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let qa = a.transpose().qr().q();
    let qb = b.transpose().qr().q();
    let s = (qa.transpose() * qb).singular_values();
    s.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_dist = 0.0f64;
    let mut worst_pair = 0.0f64;
    for k in 0..C10_PAIRS {
        let (m, n) = [(1, 1), (2, 1), (2, 2), (2, 3), (3, 2), (3, 3)][k % 6];
        let d = m + n;
        let sig = Signature::euclidean(m, n).unwrap();
        let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let tangents: Vec<[f64; MAX_AMBIENT]> = (0..m)
            .map(|_| {
                let mut t = [0.0; MAX_AMBIENT];
                t[..d].iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
                t
            })
            .collect();
        let reference = ReferencePlane::from_rows(&sig, &rows).unwrap();
        let ours = distance(&reference.angles_of(&tangents).unwrap());
        let a = DMatrix::from_fn(m, d, |i, j| rows[i][j]);
        let b = DMatrix::from_fn(m, d, |i, j| tangents[i][j]);
        let oracle = principal_angles(&a, &b).iter().map(|t| t * t).sum::<f64>().sqrt();
        worst_dist = worst_dist.max((ours - oracle).abs());

        // Pairing against det(g)^{-1/2} for a random graph gradient.
        for sig in [Signature::euclidean(m, n).unwrap(), Signature::pseudo(m, n).unwrap()] {
            let scale = if sig.is_pseudo() { 0.9 / (m as f64 * n as f64).sqrt() } else { 1.5 };
            let df = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-scale..scale));
            let eta = sig.normal_sign();
            let g = DMatrix::identity(m, m) + df.transpose() * &df * eta;
            let tangents: Vec<[f64; MAX_AMBIENT]> = (0..m)
                .map(|i| {
                    let mut t = [0.0; MAX_AMBIENT];
                    t[i] = 1.0;
                    for a in 0..n {
                        t[m + a] = df[(a, i)];
                    }
                    t
                })
                .collect();
            let w = plucker_pairing(&ReferencePlane::coordinate(&sig).angles_of(&tangents).unwrap());
            worst_pair = worst_pair.max((w - g.determinant().powf(-0.5)).abs());
        }
    }

    let (vol_ok, vol_nodes) = pseudo_volume_nodes();
    Outcome::check(
        worst_dist <= C10_TOL && worst_pair <= C10_TOL && vol_ok,
        format!(
            "{C10_PAIRS} pairs: distance error {worst_dist:.2e}, pairing error {worst_pair:.2e} (<= {C10_TOL:.0e}); pseudo volume bound on {vol_nodes} nodes: {vol_ok}"
        ),
    )
}

/// Checks `√g ≥ Π cosh(ρ/√m)^{-1}` node by node on pseudo states along a flow.
fn pseudo_volume_nodes() -> (bool, usize) {
    let sig = Signature::pseudo(2, 2).unwrap();
    let reference = ReferencePlane::coordinate(&sig);
    let mut ok = true;
    let mut count = 0;
    for seed in 0..3 {
        let g = band_limited(sig, seed, C3_TARGET, 32);
        let mut cfg = FlowConfig::new(0.1);
        cfg.monitor_every = 1000;
        let res = run(&cfg, FlowState::Graph(g.clone())).unwrap();
        for s in [FlowState::Graph(g), res.final_state] {
            let snap = s.snapshot(StencilOrder::Two).unwrap();
            for (geo, d) in snap.nodes.iter().zip(gauss_data(&snap, &reference).unwrap()) {
                let bound = (d.distance / 2f64.sqrt()).cosh().powi(-2);
                ok &= geo.sqrt_g >= bound - 1e-12;
                count += 1;
            }
        }
    }
    (ok, count)
}

fn criterion_11(h: &Histories) -> Outcome {
    let mut ok = true;
    let mut worst_lmin = f64::INFINITY;
    let mut worst_sqrt = f64::NEG_INFINITY;
    let mut worst_lmax = f64::NEG_INFINITY;
    for (_, sig, recs) in &h.runs {
        if recs.iter().any(|r| r.lambda_max_g == 0.0) {
            continue; // height-only histories
        }
        let inside = recs[0].gauss_radius_sup < weighted_radius_limit();
        for r in recs {
            if sig.is_pseudo() {
                worst_lmax = worst_lmax.max(r.lambda_max_g - 1.0);
                ok &= r.lambda_max_g <= 1.0 + C11_LMAX;
            } else {
                worst_lmin = worst_lmin.min(r.lambda_min_g - 1.0);
                ok &= r.lambda_min_g >= 1.0 - C11_LMIN;
                if inside {
                    let excess = r.sqrt_g_max - 1.0 / w_floor(sig.m);
                    worst_sqrt = worst_sqrt.max(excess);
                    ok &= excess <= C11_SQRTG;
                }
            }
        }
    }
    Outcome::check(
        ok,
        format!(
            "euclidean min(lambda_min - 1) = {worst_lmin:.2e}, max(sqrt g - 1/w0) = {worst_sqrt:.3e}; pseudo max(lambda_max - 1) = {worst_lmax:.2e}"
        ),
    )
}

fn criterion_12() -> Outcome {
    let sig = Signature::euclidean(2, 1).unwrap();
    let flat = FlowState::Graph(generate::flat(sig, Grid::cube(2, 32).unwrap(), None).unwrap());
    let spec = HuiskenSpec { x0: vec![0.0; 3], t0: C12_TAU, exponent: None };
    let (theta, trunc) = huisken_density(&flat, &spec, StencilOrder::Two).unwrap();
    let flat_ok = (theta - 1.0).abs() <= trunc + C12_FLAT_TOL;

    let g = generate::gaussian_bump(sig, Grid::cube(2, 32).unwrap(), 0.3, 0.5, &[0.0, 0.0], true).unwrap();
    let mut cfg = FlowConfig::new(0.5);
    cfg.monitor_every = 10;
    cfg.monitors.huisken = Some(HuiskenSpec { x0: vec![0.0; 3], t0: 1.0, exponent: None });
    let res = run(&cfg, FlowState::Graph(g)).unwrap();
    let slack = Slack { huisken_abs: C12_RUN_TOL, ..Slack::default() };
    let v = verdicts(&sig, &res.records, &slack);
    let hv = v.iter().find(|v| v.monitor == "huisken-density").unwrap();
    let th: Vec<f64> = res.records.iter().map(|r| r.huisken_density.unwrap()).collect();
    Outcome::check(
        flat_ok && hv.applicable && hv.passed,
        format!(
            "flat plane: |Theta - 1| = {:.2e}, truncation {trunc:.2e}; bump run: Theta {:.5} -> {:.5}, worst excess over slack {:.2e}",
            (theta - 1.0).abs(),
            th[0],
            th[th.len() - 1],
            hv.excess
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut h = Histories::default();
    let mut outcomes: Vec<(u8, &str, Outcome)> = Vec::new();
    let (o1, o2) = criterion_1_2(&mut h);
    outcomes.push((1, "confinable property, euclidean", o1));
    outcomes.push((2, "weighted estimate and c/t decay", o2));
    outcomes.push((3, "space-like curvature estimate", criterion_3(&mut h)));
    outcomes.push((4, "evolution identity residuals", criterion_4()));
    outcomes.push((5, "algebraic identity suite", criterion_5()));
    outcomes.push((6, "shrinking circle", criterion_6(&mut h)));
    outcomes.push((7, "flat-plane fixed point", criterion_7()));
    outcomes.push((8, "rescaled flow", criterion_8(&mut h)));
    outcomes.push((9, "height monotonicity", criterion_9(&h)));
    outcomes.push((10, "grassmann oracle", criterion_10()));
    outcomes.push((11, "metric eigenvalue bounds", criterion_11(&h)));
    outcomes.push((12, "gaussian density", criterion_12()));

    let mut unexpected = 0;
    for (id, name, o) in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {name}: {}", o.detail);
        if !o.passed && !o.expected_failure {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.2.passed).count();
    let expected = outcomes.iter().filter(|o| !o.2.passed && o.2.expected_failure).count();
    println!(
        "acceptance: {passed}/{} PASS, {expected} expected FAIL, {unexpected} unexpected FAIL ({:.1}s)",
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
