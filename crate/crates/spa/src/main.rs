//! Command-line interface: generation, analysis, closed-form evaluation and
//! engine cross-verification.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 i/o
//! error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use spa::analysis;
use spa::format::{self, FormatError};
use spa::generate::{generate, Engine, GenOptions, SnapshotSpec};
use spa::model::{ModelParams, SpaGraph};
use spa::theory::{TheoryContext, DEFAULT_COCITATION_WEIGHT};
use spa::torus::{Norm, TorusMetric};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "spa",
    about = "Generate and analyze spatial preferred attachment random graphs",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the SPA process and write the graph file.
    Generate(GenerateArgs),
    /// Measure a stored graph and emit CSV data.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCmd,
    },
    /// Print closed-form predictions for a parameter set.
    Theory(TheoryArgs),
    /// Cross-check the naive and grid engines on the same seed.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Final vertex count / end time of the process.
    #[arg(long)]
    n: u64,
    /// Link probability.
    #[arg(long)]
    p: f64,
    /// Sphere-volume degree coefficient.
    #[arg(long, default_value_t = 1.0)]
    a1: f64,
    /// Sphere-volume base coefficient.
    #[arg(long, default_value_t = 1.0)]
    a2: f64,
    /// Torus dimension.
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, value_enum, default_value_t = NormArg::L2)]
    norm: NormArg,
}

impl ModelArgs {
    fn params(&self, seed: u64) -> Result<ModelParams, CliError> {
        let metric = TorusMetric::new(self.m, self.norm.into()).map_err(usage)?;
        ModelParams::new(self.n, self.p, self.a1, self.a2, metric, seed).map_err(usage)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L2,
    Linf,
}

impl From<NormArg> for Norm {
    fn from(v: NormArg) -> Norm {
        match v {
            NormArg::L2 => Norm::L2,
            NormArg::Linf => Norm::Linf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Grid,
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum SnapshotArg {
    None,
    Geometric,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = EngineArg::Grid)]
    engine: EngineArg,
    #[arg(long, value_enum, default_value_t = SnapshotArg::None)]
    snapshots: SnapshotArg,
    /// Output graph file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Co-citation pair filtering and distance estimation.
    Distance(DistanceArgs),
    /// Edge-length survival curve over an alpha grid.
    Edges(EdgesArgs),
    /// Final in-degree histogram with coefficient predictions.
    Degrees(DegreesArgs),
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Minimum common-neighbour count.
    #[arg(long, default_value_t = 20)]
    min_cn: u32,
    /// Pairs with cn >= close_ratio * p * min(deg) are dropped as too close.
    #[arg(long, default_value_t = 0.5)]
    close_ratio: f64,
    /// Convex weight of the upper-bound term in the adjusted estimator.
    #[arg(long, default_value_t = DEFAULT_COCITATION_WEIGHT)]
    c_weight: f64,
    /// Stand-in for the asymptotic threshold; defaults to 20 ln n.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EdgesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    alpha_min: f64,
    #[arg(long, default_value_t = 1.5)]
    alpha_max: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha_step: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DegreesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryPrint {
    /// f(i), the expected final in-degree curve (needs --i).
    F,
    /// Degree-distribution coefficients c_k (needs --k).
    Ck,
    /// Expected total edge count.
    Edges,
    /// Long-edge threshold, count prediction and log-slope (needs --alpha).
    Ealpha,
    /// Predicted common neighbours (needs --i-k, --i-ell, --d).
    Cn,
}

#[derive(Args)]
struct TheoryArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    print: TheoryPrint,
    #[arg(long)]
    i: Option<f64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    i_k: Option<f64>,
    #[arg(long)]
    i_ell: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: u64,
}

struct CliError {
    message: String,
    code: u8,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError {
        message: e.to_string(),
        code: EXIT_USAGE,
    }
}

fn from_format(e: FormatError) -> CliError {
    let code = match &e {
        FormatError::Io(_) => EXIT_IO,
        FormatError::Parse { .. } => EXIT_USAGE,
    };
    CliError {
        message: e.to_string(),
        code,
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError {
        message: e.to_string(),
        code: EXIT_IO,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version through the error path too
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_USAGE)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Analyze { what } => match what {
            AnalyzeCmd::Distance(args) => cmd_distance(args),
            AnalyzeCmd::Edges(args) => cmd_edges(args),
            AnalyzeCmd::Degrees(args) => cmd_degrees(args),
        },
        Cmd::Theory(args) => cmd_theory(args),
        Cmd::Verify(args) => cmd_verify(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let params = args.model.params(args.seed)?;
    let options = GenOptions {
        engine: match args.engine {
            EngineArg::Grid => Engine::Grid,
            EngineArg::Naive => Engine::Naive,
        },
        snapshots: match args.snapshots {
            SnapshotArg::None => SnapshotSpec::None,
            SnapshotArg::Geometric => SnapshotSpec::Geometric,
        },
    };
    let graph = generate(&params, &options).map_err(usage)?;
    format::write_graph(&graph, &args.out).map_err(from_format)?;
    println!(
        "generated n={} edges={} snapshots={} -> {}",
        graph.n(),
        graph.edge_count(),
        graph.snapshots.len(),
        args.out.display()
    );
    Ok(())
}

fn load_graph(path: &PathBuf) -> Result<SpaGraph, CliError> {
    format::read_graph(path).map_err(from_format)
}

fn cmd_distance(args: DistanceArgs) -> Result<(), CliError> {
    let graph = load_graph(&args.graph)?;
    let ctx = TheoryContext::new(&graph.params).map_err(usage)?;
    let threshold = args.threshold.unwrap_or_else(|| ctx.default_threshold());
    let cocited = analysis::cocitation_pairs(&graph, args.min_cn).map_err(usage)?;
    let survivors = analysis::eligible_pairs(&graph, args.min_cn, args.close_ratio).map_err(usage)?;
    let estimates =
        analysis::estimate_pair_distances(&graph, &ctx, &survivors, args.c_weight, threshold)
            .map_err(usage)?;
    let mut w = BufWriter::new(File::create(&args.out).map_err(io_err)?);
    format::write_pairs_csv(&mut w, &estimates).map_err(from_format)?;
    w.flush().map_err(io_err)?;
    println!(
        "pairs with cn>={}: {}; surviving close filter: {} -> {}",
        args.min_cn,
        cocited.len(),
        estimates.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_edges(args: EdgesArgs) -> Result<(), CliError> {
    if !(args.alpha_step > 0.0) || args.alpha_max < args.alpha_min {
        return Err(usage("alpha grid needs alpha_min <= alpha_max and a positive step"));
    }
    let graph = load_graph(&args.graph)?;
    let mut alphas = Vec::new();
    let mut i = 0u64;
    loop {
        let alpha = args.alpha_min + i as f64 * args.alpha_step;
        if alpha > args.alpha_max + 1e-12 {
            break;
        }
        alphas.push(alpha);
        i += 1;
    }
    let curve = analysis::edge_length_survival(&graph, &alphas).map_err(usage)?;
    let mut w = BufWriter::new(File::create(&args.out).map_err(io_err)?);
    format::write_edge_curve_csv(&mut w, &curve).map_err(from_format)?;
    w.flush().map_err(io_err)?;
    println!("{} alpha samples -> {}", curve.rows.len(), args.out.display());
    Ok(())
}

fn cmd_degrees(args: DegreesArgs) -> Result<(), CliError> {
    let graph = load_graph(&args.graph)?;
    let hist = analysis::degree_histogram(&graph);
    let ctx = TheoryContext::new(&graph.params).ok();
    let mut w = BufWriter::new(File::create(&args.out).map_err(io_err)?);
    format::write_degree_csv(&mut w, &hist, ctx.as_ref()).map_err(from_format)?;
    w.flush().map_err(io_err)?;
    println!(
        "{} distinct degrees over {} vertices -> {}",
        hist.counts.len(),
        hist.total_vertices(),
        args.out.display()
    );
    Ok(())
}

fn cmd_theory(args: TheoryArgs) -> Result<(), CliError> {
    let params = args.model.params(0)?;
    let ctx = TheoryContext::new(&params).map_err(usage)?;
    match args.print {
        TheoryPrint::F => {
            let i = args.i.ok_or_else(|| usage("--print f needs --i"))?;
            println!("{}", ctx.expected_final_indegree(i).map_err(usage)?);
        }
        TheoryPrint::Ck => {
            let k = args.k.ok_or_else(|| usage("--print ck needs --k"))?;
            let exact = ctx.ck_exact(k);
            if k >= 1 {
                let asym = ctx.ck_asymptotic(k as f64).map_err(usage)?;
                println!("{exact} {asym}");
            } else {
                println!("{exact}");
            }
        }
        TheoryPrint::Edges => {
            println!("{}", ctx.expected_total_edges());
        }
        TheoryPrint::Ealpha => {
            let alpha = args.alpha.ok_or_else(|| usage("--print ealpha needs --alpha"))?;
            let r = ctx.long_edge_radius(alpha).map_err(usage)?;
            let count = ctx.long_edge_count_predicted(alpha).map_err(usage)?;
            let slope = ctx.long_edge_log_slope(alpha).map_err(usage)?;
            let fmt = |o: Option<f64>| o.map_or("none".to_string(), |v| v.to_string());
            println!("r_alpha={r} e_alpha={} log_slope={}", fmt(count), fmt(slope));
        }
        TheoryPrint::Cn => {
            let i_k = args.i_k.ok_or_else(|| usage("--print cn needs --i-k"))?;
            let i_ell = args.i_ell.ok_or_else(|| usage("--print cn needs --i-ell"))?;
            let d = args.d.ok_or_else(|| usage("--print cn needs --d"))?;
            println!(
                "{}",
                ctx.common_neighbours_predicted(i_k, i_ell, d).map_err(usage)?
            );
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let params = args.model.params(args.seed)?;
    let opts = |engine| GenOptions {
        engine,
        snapshots: SnapshotSpec::Geometric,
    };
    let grid = generate(&params, &opts(Engine::Grid)).map_err(usage)?;
    let naive = generate(&params, &opts(Engine::Naive)).map_err(usage)?;
    let mut mismatches = Vec::new();
    if grid.positions() != naive.positions() {
        mismatches.push("positions");
    }
    if grid.edges != naive.edges {
        mismatches.push("edges");
    }
    if grid.in_degree != naive.in_degree {
        mismatches.push("in-degrees");
    }
    if grid.snapshots != naive.snapshots {
        mismatches.push("snapshots");
    }
    if mismatches.is_empty() {
        println!(
            "verify ok: n={} seed={} edges={} identical across engines",
            params.n,
            params.seed,
            grid.edge_count()
        );
        Ok(())
    } else {
        Err(CliError {
            message: format!("engines disagree on: {}", mismatches.join(", ")),
            code: EXIT_VERIFY,
        })
    }
}
