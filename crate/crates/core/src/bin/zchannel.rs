//! Command-line front end. Every subcommand writes its files and a manifest
//! into `--out`; the manifest is written even when the run fails.
//!
//! Exit codes: 0 success, 1 usage, 2 unresolved solve or failed validation.
//! `ZCHANNEL_THREADS` caps the worker pool.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use zchannel::bounds::{gv_curve, mrrw_curve, rcb_lower_curve, CurveGrid};
use zchannel::lp_tau::{solve_tau_with, SolveMode, SolveOptions};
use zchannel::oracle::{self, SearchBudget};
use zchannel::protocol::{adversary_exhaustive, validate_parameters, ProtocolParams};
use zchannel::report::{tau_table_csv, RunManifest};
use zchannel::twostage::{plotkin_point, verify_remains, TwoStageConfig, TwoStageSurface};
use zchannel::Error;

#[derive(Parser)]
#[command(name = "zchannel", version, about = "Z-channel coding bounds, exact tau(M) and a two-stage feedback protocol")]
struct Cli {
    /// Directory receiving every output file and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact tau(M) for M = 2..=max-m, with one certificate per M.
    TauTable {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=18))]
        max_m: u32,
        /// Exact simplex only, no floating-point presolve.
        #[arg(long)]
        exact_only: bool,
        #[arg(long, default_value_t = 200_000)]
        max_pivots: usize,
    },
    /// Random-coding lower bound for list size L as a tau,rate CSV.
    RcbCurve {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=17))]
        list_size: u32,
        /// Rate and omega grid points.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Two-stage rate with GV and MRRW companions on a shared tau grid.
    TwoStageCurve {
        #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u32).range(1..=17))]
        lup: u32,
        /// Points on [0, 1/4]; the grid continues with the same step to 1/2.
        #[arg(long, default_value_t = 51, value_parser = clap::value_parser!(u32).range(2..))]
        grid: u32,
        #[command(flatten)]
        resolution: Resolution,
    },
    /// The error fraction where the two-stage rate drops to zero.
    PlotkinPoint,
    /// Checks the inequality that keeps the zero-rate point fixed for every L.
    VerifyRemains {
        #[arg(long, default_value_t = 17)]
        lup: u32,
    },
    /// Exhaustive and randomized code searches.
    Search {
        #[command(subcommand)]
        kind: SearchKind,
        #[arg(long, global = true, default_value_t = 0)]
        seed: u64,
        #[arg(long, global = true, default_value_t = 50_000_000)]
        max_nodes: u64,
    },
    /// Runs the two-stage protocol against the exhaustive adversary.
    Simulate {
        /// Parameter file: `t=`, `[stage1]` and `[stage2 <l>]` sections.
        #[arg(long)]
        fixture: PathBuf,
        /// Overrides the error budget of the fixture.
        #[arg(long)]
        t: Option<usize>,
    },
}

#[derive(Args)]
struct Resolution {
    #[arg(long, default_value_t = 200)]
    omega_steps: usize,
    #[arg(long, default_value_t = 100)]
    alpha_steps: usize,
    #[arg(long, default_value_t = 200)]
    rate_steps: usize,
    /// Log-spaced small rates per decade.
    #[arg(long, default_value_t = 10)]
    per_decade: usize,
    #[arg(long, default_value_t = 200)]
    x_points: usize,
}

#[derive(Subcommand)]
enum SearchKind {
    /// Largest code with minimum asymmetric distance d.
    MaxCode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Largest constant-weight code with minimum asymmetric distance d.
    ConstantWeight {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        d: usize,
    },
    /// Constant-weight code of size M with the largest list radius.
    ListCode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        l: usize,
    },
    /// Normalized list radii of random codes.
    SampleRadius {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

/// Why a run stopped early.
enum Failure {
    Usage(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::LengthMismatch { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Failed(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    if let Some(n) = std::env::var("ZCHANNEL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let out = out_dir_from_args();
            let mut manifest = RunManifest::start("usage", json!({ "args": std::env::args().skip(1).collect::<Vec<_>>() }), None);
            let _ = manifest.finish(&out, 1, Some(e.kind().to_string()));
            return ExitCode::from(1);
        }
    };
    let (name, params, seed) = describe(&cli.command);
    let mut manifest = RunManifest::start(name, params, seed);
    let result = run(&cli.command, &cli.out, &mut manifest);
    let (code, error) = match result {
        Ok(()) => (0, None),
        Err(Failure::Usage(msg)) => (1, Some(msg)),
        Err(Failure::Failed(msg)) => (2, Some(msg)),
    };
    if let Some(msg) = &error {
        eprintln!("error: {msg}");
    }
    if let Err(e) = manifest.finish(&cli.out, code, error) {
        eprintln!("error: could not write manifest: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}

// Best effort for manifests of runs that failed to parse.
fn out_dir_from_args() -> PathBuf {
    let args: Vec<String> = std::env::args().collect();
    args.iter()
        .position(|a| a == "--out")
        .and_then(|i| args.get(i + 1))
        .map(PathBuf::from)
        .or_else(|| args.iter().find_map(|a| a.strip_prefix("--out=").map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn describe(cmd: &Command) -> (&'static str, serde_json::Value, Option<u64>) {
    match cmd {
        Command::TauTable { max_m, exact_only, max_pivots } => {
            ("tau-table", json!({ "max_m": max_m, "exact_only": exact_only, "max_pivots": max_pivots }), None)
        }
        Command::RcbCurve { list_size, grid } => ("rcb-curve", json!({ "list_size": list_size, "grid": grid }), None),
        Command::TwoStageCurve { lup, grid, resolution: r } => (
            "two-stage-curve",
            json!({
                "lup": lup, "grid": grid, "omega_steps": r.omega_steps, "alpha_steps": r.alpha_steps,
                "rate_steps": r.rate_steps, "per_decade": r.per_decade, "x_points": r.x_points,
            }),
            None,
        ),
        Command::PlotkinPoint => ("plotkin-point", json!({}), None),
        Command::VerifyRemains { lup } => ("verify-remains", json!({ "lup": lup }), None),
        Command::Search { kind, seed, max_nodes } => {
            let detail = match kind {
                SearchKind::MaxCode { n, d } => json!({ "kind": "max-code", "n": n, "d": d }),
                SearchKind::ConstantWeight { n, w, d } => json!({ "kind": "constant-weight", "n": n, "w": w, "d": d }),
                SearchKind::ListCode { n, w, m, l } => json!({ "kind": "list-code", "n": n, "w": w, "m": m, "l": l }),
                SearchKind::SampleRadius { n, m, omega, l, trials } => {
                    json!({ "kind": "sample-radius", "n": n, "m": m, "omega": omega, "l": l, "trials": trials })
                }
            };
            ("search", json!({ "search": detail, "max_nodes": max_nodes }), Some(*seed))
        }
        Command::Simulate { fixture, t } => ("simulate", json!({ "fixture": fixture, "t": t }), None),
    }
}

fn write(manifest: &mut RunManifest, dir: &Path, name: &str, contents: &str) -> Outcome {
    let path = manifest.write_output(dir, name, contents)?;
    println!("{}", path.display());
    Ok(())
}

fn run(cmd: &Command, out: &Path, manifest: &mut RunManifest) -> Outcome {
    match cmd {
        Command::TauTable { max_m, exact_only, max_pivots } => {
            let mode = if *exact_only { SolveMode::Exact } else { SolveMode::Auto };
            let opts = SolveOptions { mode, max_pivots: *max_pivots };
            let mut certs = Vec::new();
            let mut unresolved = Vec::new();
            for m in 2..=*max_m as usize {
                match solve_tau_with(m, opts) {
                    Ok((cert, _)) => {
                        write(manifest, out, &format!("certificate_M{m}.json"), &cert.to_json())?;
                        certs.push(cert);
                    }
                    Err(e) => {
                        eprintln!("M={m}: {e}");
                        unresolved.push(m);
                    }
                }
            }
            write(manifest, out, "tau_table.csv", &tau_table_csv(&certs))?;
            if unresolved.is_empty() {
                Ok(())
            } else {
                Err(Failure::Failed(format!("unresolved M: {unresolved:?}")))
            }
        }
        Command::RcbCurve { list_size, grid } => {
            let grid = CurveGrid { rate_points: *grid, omega_points: *grid, ..CurveGrid::default() };
            let curve = rcb_lower_curve(*list_size, grid)?;
            write(manifest, out, &format!("rcb_L{list_size}.csv"), &curve.to_csv())
        }
        Command::TwoStageCurve { lup, grid, resolution: r } => {
            let half = *grid as usize;
            let taus: Vec<f64> = (0..2 * half - 1).map(|k| 0.25 * k as f64 / (half - 1) as f64).collect();
            let cfg = TwoStageConfig::with_resolution(*lup, r.omega_steps, r.alpha_steps, r.rate_steps, r.per_decade, r.x_points);
            let surface = TwoStageSurface::new(cfg)?;
            let two_stage = surface.curve(&taus)?;
            write(manifest, out, "two_stage.csv", &two_stage.to_csv())?;
            write(manifest, out, "gv.csv", &gv_curve(&taus[..half])?.to_csv())?;
            write(manifest, out, "mrrw.csv", &mrrw_curve(&taus[..half])?.to_csv())
        }
        Command::PlotkinPoint => write(manifest, out, "plotkin_point.json", &(plotkin_point().to_json() + "\n")),
        Command::VerifyRemains { lup } => {
            let report = verify_remains(*lup)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            write(manifest, out, "verify_remains.json", &text)?;
            for row in &report.rows {
                eprintln!("L={:2} tau(L+1)={:>12} {:?}", row.l, row.tau_next, row.verdict);
            }
            if report.all_pass {
                Ok(())
            } else {
                Err(Failure::Failed("inequality fails for some L".into()))
            }
        }
        Command::Search { kind, seed, max_nodes } => {
            let budget = SearchBudget { max_nodes: *max_nodes, seed: *seed, ..SearchBudget::default() };
            let text = match kind {
                SearchKind::MaxCode { n, d } => search_json(oracle::max_code(*n, *d, &budget)?),
                SearchKind::ConstantWeight { n, w, d } => search_json(oracle::max_constant_weight_code(*n, *w, *d, &budget)?),
                SearchKind::ListCode { n, w, m, l } => search_json(oracle::best_list_code(*n, *w, *m, *l, &budget)?),
                SearchKind::SampleRadius { n, m, omega, l, trials } => {
                    let samples = oracle::sample_code_radius_detailed(*n, *m, *omega, *l, *trials, *seed)?;
                    let mean = |f: fn(&oracle::RadiusSample) -> f64| samples.iter().map(f).sum::<f64>() / samples.len() as f64;
                    let min_mean = mean(|s| zchannel::rational::to_f64(&s.min));
                    let subset_mean = mean(|s| zchannel::rational::to_f64(&s.subset_mean));
                    serde_json::to_string_pretty(&json!({
                        "mean_min_radius": min_mean,
                        "mean_subset_radius": subset_mean,
                        "samples": samples,
                    }))
                    .expect("samples serialize")
                }
            };
            write(manifest, out, "search.json", &(text + "\n"))
        }
        Command::Simulate { fixture, t } => {
            let text = std::fs::read_to_string(fixture).map_err(Error::from)?;
            let mut params = ProtocolParams::from_text(&text)?;
            if let Some(t) = t {
                params.t = *t;
            }
            let report = validate_parameters(&params)?;
            write(manifest, out, "validation.json", &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
            if !report.valid {
                return Err(Failure::Failed("parameters fail validation".into()));
            }
            let verdicts = (0..params.message_count())
                .map(|m| adversary_exhaustive(&params, m))
                .collect::<zchannel::Result<Vec<_>>>()?;
            let all_pass = verdicts.iter().all(|v| v.pass);
            write(manifest, out, "adversary.json", &(serde_json::to_string_pretty(&verdicts).expect("verdicts serialize") + "\n"))?;
            for v in &verdicts {
                eprintln!("m={:3} patterns={:6} pass={}", v.m, v.patterns, v.pass);
            }
            if all_pass {
                Ok(())
            } else {
                Err(Failure::Failed("some error pattern defeats the decoder".into()))
            }
        }
    }
}

fn search_json(r: oracle::CodeSearchResult) -> String {
    serde_json::to_string_pretty(&json!({
        "objective": r.objective,
        "optimal": r.optimal,
        "nodes": r.nodes,
        "code": r.code.to_text(),
    }))
    .expect("result serializes")
}
