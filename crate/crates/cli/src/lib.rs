//! `gaussflow` command line: flow runs, the identity suite, Gauss data of a
//! state file, and plot data from a monitor table.
//!
//! Exit codes: 0 success, 1 a monotonicity verdict or identity check failed,
//! 2 usage or configuration error, 3 the run ended numerically (NaN,
//! space-like breakdown, CFL collapse).

pub mod config;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gaussflow_core::flow::{run, RunResult};
use gaussflow_core::identities::{run_suite, CheckKind, DEFAULT_SHAPES};
use gaussflow_core::monitors::{decay_fit, read_records, verdicts, write_records, DecayFit, Verdict, COLUMNS};
use gaussflow_core::surface::{gauss_data, read_state, write_state, StateFile};
use gaussflow_core::{FlowState, ReferencePlane, Signature, Slack, StencilOrder, Termination};
use serde::Serialize;

use config::{OutputFormat, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gaussflow", version, about = "Mean curvature flow of graphs with Gauss-image monitors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a flow from a JSON config; writes monitors.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.directory from the config.
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Random-sample checks of the pointwise curvature identities.
    Identities {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Comma-separated shapes such as `2x2,3x2`.
        #[arg(long)]
        shapes: Option<String>,
    },
    /// Per-node Jordan angles, Gauss distance and pairing of a state file.
    Gauss {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: u32,
    },
    /// Split monitors.csv into two-column plot files and re-derive verdicts.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
        /// JSON object overriding slack defaults.
        #[arg(long)]
        slack: Option<String>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for CliError
where
    E: Into<gaussflow_core::Error>,
{
    fn from(e: E) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run { config, outdir } => cmd_run(&config, outdir.as_deref(), out),
        Command::Identities { samples, seed, shapes } => cmd_identities(samples, seed, shapes.as_deref(), out),
        Command::Gauss { state, order } => cmd_gauss(&state, order, out),
        Command::Report { input, outdir, slack } => cmd_report(&input, &outdir, slack.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn io<T>(r: std::io::Result<T>, what: &Path) -> Result<T, CliError> {
    r.map_err(|e| usage(format!("{}: {e}", what.display())))
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    termination: Termination,
    diagnostic: Option<&'a str>,
    steps: usize,
    t_final: f64,
    signature: Signature,
    ball_radius: Option<f64>,
    records: usize,
    verdicts: &'a [Verdict],
    decay_fit: Option<DecayFitSummary>,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct DecayFitSummary {
    c: f64,
    bound: f64,
    ratio: f64,
}

impl From<DecayFit> for DecayFitSummary {
    fn from(f: DecayFit) -> Self {
        Self { c: f.c, bound: f.bound, ratio: f.c / f.bound }
    }
}

fn cmd_run(path: &Path, outdir: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = io(fs::read_to_string(path), path)?;
    let cfg = RunConfig::from_json(&text)?;
    let sig = cfg.signature()?;
    let flow = cfg.flow_config()?;
    let initial = cfg.initial_state()?;
    let dir = outdir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.directory.clone());
    io(fs::create_dir_all(&dir), &dir)?;

    let result: RunResult = run(&flow, initial)?;
    let verdicts = verdicts(&sig, &result.records, &cfg.monitors.slack);
    let passed = verdicts.iter().all(|v| v.passed);
    let formats = &cfg.output.formats;

    if formats.contains(&OutputFormat::Monitors) {
        let p = dir.join("monitors.csv");
        let f = io(File::create(&p), &p)?;
        write_records(BufWriter::new(f), &sig, &result.records)?;
    }
    if formats.contains(&OutputFormat::State) {
        let p = dir.join("final_state.csv");
        let mut w = BufWriter::new(io(File::create(&p), &p)?);
        write_state(&mut w, &to_state_file(&result.final_state))?;
        io(w.flush(), &p)?;
    }
    let summary = Summary {
        termination: result.termination,
        diagnostic: result.diagnostic.as_deref(),
        steps: result.steps,
        t_final: result.final_state.t(),
        signature: sig,
        ball_radius: result.ball.map(|b| b.radius),
        records: result.records.len(),
        verdicts: &verdicts,
        decay_fit: decay_fit(&result.records).map(Into::into),
        passed,
    };
    if formats.contains(&OutputFormat::Summary) {
        let p = dir.join("summary.json");
        let text = serde_json::to_string_pretty(&summary).map_err(usage)?;
        io(fs::write(&p, text + "\n"), &p)?;
    }

    let _ = writeln!(
        out,
        "termination {} after {} steps at t = {:.6}",
        result.termination.as_str(),
        result.steps,
        result.final_state.t()
    );
    if let Some(d) = &result.diagnostic {
        let _ = writeln!(out, "diagnostic: {d}");
    }
    print_verdicts(out, &verdicts);
    Ok(if result.termination != Termination::ReachedTEnd {
        EXIT_NUMERICAL
    } else if passed {
        EXIT_OK
    } else {
        EXIT_VERDICT
    })
}

fn print_verdicts(out: &mut dyn Write, verdicts: &[Verdict]) {
    for v in verdicts {
        let tag = match (v.applicable, v.passed) {
            (false, _) => "SKIP",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        if v.applicable {
            let _ = writeln!(out, "{tag} {} (excess {:.3e})", v.monitor, v.excess);
        } else {
            let _ = writeln!(out, "{tag} {}", v.monitor);
        }
    }
}

fn to_state_file(s: &FlowState) -> StateFile {
    match s {
        FlowState::Graph(g) => StateFile::Graph(g.clone()),
        FlowState::Parametric(p) => StateFile::Parametric(p.clone()),
    }
}

fn parse_shapes(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    text.split(',')
        .map(|s| {
            let (m, n) = s.trim().split_once('x').ok_or_else(|| usage(format!("bad shape {s:?}, expected MxN")))?;
            let m: usize = m.parse().map_err(|_| usage(format!("bad shape {s:?}")))?;
            let n: usize = n.parse().map_err(|_| usage(format!("bad shape {s:?}")))?;
            if !(1..=gaussflow_core::MAX_M).contains(&m) || n == 0 || m + n > gaussflow_core::MAX_AMBIENT {
                return Err(usage(format!("shape {s:?} out of range")));
            }
            Ok((m, n))
        })
        .collect()
}

fn cmd_identities(samples: usize, seed: u64, shapes: Option<&str>, out: &mut dyn Write) -> Result<i32, CliError> {
    let shapes = match shapes {
        Some(s) => parse_shapes(s)?,
        None => DEFAULT_SHAPES.to_vec(),
    };
    let report = run_suite(samples, seed, &shapes);
    let mut all = true;
    for kind in CheckKind::ALL {
        let rows: Vec<_> = report.shapes.iter().filter(|s| s.kind == kind).collect();
        let passed = report.passed(kind);
        all &= passed;
        let worst = rows.iter().map(|s| s.worst_relative_margin).fold(f64::INFINITY, f64::min);
        let violations: usize = rows.iter().map(|s| s.violations).sum();
        let _ = writeln!(
            out,
            "{} {} worst relative margin {worst:.3e}, {violations} violations in {} samples",
            if passed { "PASS" } else { "FAIL" },
            kind.name(),
            samples * rows.len()
        );
        for s in rows.iter().filter(|s| s.violations > 0) {
            let _ =
                writeln!(out, "  {}x{}: {} violations, worst {:.3e}", s.m, s.n, s.violations, s.worst_relative_margin);
        }
    }
    if !report.passed(CheckKind::Cauchy) {
        let _ = writeln!(out, "  h-cauchy with constant m: worst relative margin {:.3e}", report.cauchy_m_worst);
    }
    let sharp = report.sharp_ok();
    all &= sharp;
    let _ = writeln!(
        out,
        "{} sharp-case lhs {} = 3/2 |B|^4 = {}",
        if sharp { "PASS" } else { "FAIL" },
        report.sharp_lhs,
        1.5 * report.sharp_b4
    );
    Ok(if all { EXIT_OK } else { EXIT_VERDICT })
}

fn cmd_gauss(path: &Path, order: u32, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = io(File::open(path), path)?;
    let state = match read_state(&mut BufReader::new(f))? {
        StateFile::Graph(g) => FlowState::Graph(g),
        StateFile::Parametric(p) => FlowState::Parametric(p),
    };
    let order = StencilOrder::from_order(order)?;
    let sig = *state.sig();
    let snap = state.snapshot(order)?;
    let data = gauss_data(&snap, &ReferencePlane::coordinate(&sig))?;
    let angles: Vec<String> = (1..=sig.m).map(|i| format!("theta{i}")).collect();
    let _ = writeln!(out, "# node {} distance w", angles.join(" "));
    for (k, d) in data.iter().enumerate() {
        let a: Vec<String> = d.angles.angles.iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(out, "{k} {} {:.16e} {:.16e}", a.join(" "), d.distance, d.pairing);
    }
    Ok(EXIT_OK)
}

fn cmd_report(input: &Path, outdir: &Path, slack: Option<&str>, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = io(File::open(input), input)?;
    let (sig, records) = read_records(BufReader::new(f))?;
    let slack: Slack = match slack {
        Some(s) => serde_json::from_str(s).map_err(|e| usage(format!("slack: {e}")))?,
        None => Slack::default(),
    };
    io(fs::create_dir_all(outdir), outdir)?;
    let mut written = 0;
    for col in COLUMNS.iter().skip(1) {
        let series: Vec<(f64, f64)> = records.iter().filter_map(|r| r.get(col).map(|v| (r.t, v))).collect();
        if series.is_empty() {
            continue;
        }
        let p = outdir.join(format!("{col}.dat"));
        let mut w = BufWriter::new(io(File::create(&p), &p)?);
        io(writeln!(w, "# t {col}"), &p)?;
        for (t, v) in series {
            io(writeln!(w, "{t:.16e} {v:.16e}"), &p)?;
        }
        io(w.flush(), &p)?;
        written += 1;
    }
    let verdicts = verdicts(&sig, &records, &slack);
    let p = outdir.join("verdicts.json");
    io(fs::write(&p, serde_json::to_string_pretty(&verdicts).map_err(usage)? + "\n"), &p)?;
    let _ = writeln!(out, "{written} plot files in {}", outdir.display());
    print_verdicts(out, &verdicts);
    Ok(if verdicts.iter().all(|v| v.passed) { EXIT_OK } else { EXIT_VERDICT })
}
