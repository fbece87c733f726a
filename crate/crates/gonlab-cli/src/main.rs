//! `gonlab`: divisor theory on metric graphs from the command line.
//!
//! Subcommands: `gen` (family graphs), `reduce`, `rank`, `gonality`,
//! `morphism` (build-sharp / check / fiber), `verify` (the built-in check
//! suite), and `export-dot`. All structured output is JSON on stdout;
//! rational values are strings like `"3/2"`. Exit status: 0 on success,
//! 1 when a verification check fails, 2 on usage or input errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gonlab_core::families::{build, FamilyLengths, FamilySpec};
use gonlab_core::graph::{MetricGraph, PointRef};
use gonlab_core::harmonic::{build_sharp_morphism, fiber_divisor, make_finite};
use gonlab_core::json::{
    certificate_to_json, divisor_from_json, divisor_to_json, graph_from_json, graph_to_json,
    harmonic_report_to_json, morphism_from_json, morphism_to_json,
};
use gonlab_core::rank::{gonality_search, rank, GonalityOptions, RankOptions};
use gonlab_core::rational::parse_rat;
use gonlab_core::reduction::{reduce, ReduceOptions};
use gonlab_core::verify::{paper_suite, suite_passes, VerifyOptions};

#[derive(Parser)]
#[command(name = "gonlab", version, about = "Chip-firing, reduced divisors, rank, gonality, and harmonic morphisms on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a family graph as JSON.
    Gen(GenArgs),
    /// Compute the q-reduced divisor equivalent to the input.
    Reduce(ReduceArgs),
    /// Compute the Baker-Norine rank of a divisor.
    Rank(RankArgs),
    /// Search for the gonality: the least degree of a rank-1 divisor.
    Gonality(GonalityArgs),
    /// Build, check, and probe harmonic morphisms.
    #[command(subcommand)]
    Morphism(MorphismCommand),
    /// Run the built-in verification suite.
    Verify(VerifyArgs),
    /// Emit a graph in DOT format (lengths as edge labels).
    ExportDot(ExportDotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    CompleteK,
    KdMinusKh,
    KdMinusEdges,
    TwoCliques,
    Bipartite,
    Sharp,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Number of vertices of the ambient complete graph.
    #[arg(long)]
    d: Option<u32>,
    /// Clique size for kd-minus-kh.
    #[arg(long)]
    h: Option<u32>,
    /// Left star size for sharp.
    #[arg(long)]
    k1: Option<u32>,
    /// Part sizes for bipartite, clique sizes for two-cliques.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Removed edges for kd-minus-edges, e.g. `v1-v2,v3-v4`.
    #[arg(long)]
    remove: Option<String>,
    /// First clique vertex list for two-cliques, e.g. `v1,v2,v3`.
    #[arg(long)]
    first: Option<String>,
    /// Second clique vertex list for two-cliques.
    #[arg(long)]
    second: Option<String>,
    /// Edge lengths, currently `uniform:<rational>`.
    #[arg(long, default_value = "uniform:1")]
    lengths: String,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    divisor: PathBuf,
    /// Base point: a vertex id, or `edge@offset` for an interior point.
    #[arg(long)]
    base: String,
    /// Lattice subdivision level (default: least level hosting the inputs,
    /// or the GONLAB_SUBDIVISION environment variable).
    #[arg(long)]
    subdivision: Option<u32>,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    divisor: PathBuf,
    #[arg(long)]
    subdivision: Option<u32>,
}

#[derive(Args)]
struct GonalityArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    subdivision: Option<u32>,
    /// Stop after this candidate degree (default: the Brill-Noether bound).
    #[arg(long)]
    max_degree: Option<u32>,
    /// Worker threads; the result does not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum MorphismCommand {
    /// The degree d-3 harmonic morphism from the sharp graph to a tree.
    BuildSharp(BuildSharpArgs),
    /// Validate a morphism file and report harmonicity.
    Check { file: PathBuf },
    /// The fiber divisor of a finite harmonic morphism over a point.
    Fiber {
        file: PathBuf,
        /// Target point: a vertex id, or `edge@offset`.
        #[arg(long)]
        at: String,
    },
}

#[derive(Args)]
struct BuildSharpArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    k1: u32,
    /// Apply tropical modifications until the morphism is finite.
    #[arg(long)]
    finite: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "paper")]
    suite: String,
    /// Largest complete-graph size exercised.
    #[arg(long, default_value_t = 8)]
    max_d: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Number of random Riemann-Roch cases.
    #[arg(long, default_value_t = 60)]
    rr_cases: usize,
    /// Number of random edge-removal cases.
    #[arg(long, default_value_t = 10)]
    random_removals: usize,
}

#[derive(Args)]
struct ExportDotArgs {
    #[arg(long)]
    graph: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Gonality(args) => cmd_gonality(args),
        Command::Morphism(cmd) => cmd_morphism(cmd),
        Command::Verify(args) => cmd_verify(args),
        Command::ExportDot(args) => {
            let g = load_graph(&args.graph)?;
            print!("{}", gonlab_core::dot::graph_to_dot(&g));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_graph(path: &PathBuf) -> Result<MetricGraph, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let g = graph_from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let violations = g.validate();
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(format!("{}: invalid graph: {}", path.display(), msgs.join("; ")));
    }
    Ok(g)
}

fn load_divisor(path: &PathBuf, g: &MetricGraph) -> Result<gonlab_core::Divisor, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let d = divisor_from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    d.validate_on(g)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(d)
}

/// `v1` for a vertex, `e1@1/2` for an interior point.
fn parse_point(s: &str) -> Result<PointRef, String> {
    match s.split_once('@') {
        None => Ok(PointRef::vertex(s)),
        Some((edge, offset)) => Ok(PointRef::interior(
            edge,
            parse_rat(offset).map_err(|e| e.to_string())?,
        )),
    }
}

fn env_subdivision() -> Result<Option<u32>, String> {
    match std::env::var("GONLAB_SUBDIVISION") {
        Ok(s) => s
            .parse::<u32>()
            .map(Some)
            .map_err(|_| format!("GONLAB_SUBDIVISION must be a positive integer, got `{s}`")),
        Err(_) => Ok(None),
    }
}

fn effective_subdivision(flag: Option<u32>) -> Result<Option<u32>, String> {
    match flag {
        Some(s) => Ok(Some(s)),
        None => env_subdivision(),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, String> {
    let lengths = parse_lengths(&args.lengths)?;
    let need = |v: Option<u32>, name: &str| v.ok_or_else(|| format!("--{name} is required"));
    let parse_list = |v: &Option<String>, name: &str| -> Result<Vec<String>, String> {
        v.as_ref()
            .map(|s| s.split(',').map(|t| t.trim().to_string()).collect())
            .ok_or_else(|| format!("--{name} is required"))
    };
    let spec = match args.family {
        FamilyName::CompleteK => FamilySpec::CompleteK {
            d: need(args.d, "d")?,
            lengths,
        },
        FamilyName::KdMinusKh => FamilySpec::KdMinusKh {
            d: need(args.d, "d")?,
            h: need(args.h, "h")?,
            lengths,
        },
        FamilyName::KdMinusEdges => {
            let removed = parse_list(&args.remove, "remove")?
                .into_iter()
                .map(|pair| {
                    pair.split_once('-')
                        .map(|(a, b)| (a.to_string(), b.to_string()))
                        .ok_or_else(|| format!("bad edge `{pair}`, expected `v1-v2`"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            FamilySpec::KdMinusEdges {
                d: need(args.d, "d")?,
                removed,
                lengths,
            }
        }
        FamilyName::TwoCliques => FamilySpec::TwoCliquesRemoved {
            d: need(args.d, "d")?,
            first: parse_list(&args.first, "first")?,
            second: parse_list(&args.second, "second")?,
            lengths,
        },
        FamilyName::Bipartite => FamilySpec::Bipartite {
            m: need(args.m, "m")?,
            n: need(args.n, "n")?,
            lengths,
        },
        FamilyName::Sharp => FamilySpec::Sharp {
            d: need(args.d, "d")?,
            k1: need(args.k1, "k1")?,
            lengths,
        },
    };
    let g = build(&spec).map_err(|e| e.to_string())?;
    emit(&args.out, &graph_to_json(&g))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_lengths(s: &str) -> Result<FamilyLengths, String> {
    match s.split_once(':') {
        Some(("uniform", r)) => Ok(FamilyLengths::uniform(
            parse_rat(r).map_err(|e| e.to_string())?,
        )),
        _ => Err(format!("unsupported --lengths `{s}`, expected `uniform:<rational>`")),
    }
}

fn cmd_reduce(args: ReduceArgs) -> Result<ExitCode, String> {
    let g = load_graph(&args.graph)?;
    let d = load_divisor(&args.divisor, &g)?;
    let base = parse_point(&args.base)?;
    let opts = ReduceOptions {
        subdivision: effective_subdivision(args.subdivision)?,
    };
    let reduced = reduce(&g, &d, &base, opts).map_err(|e| e.to_string())?;
    println!("{}", divisor_to_json(&reduced));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RankOutput {
    rank: i64,
    degree: i64,
    subdivision: Option<u32>,
}

fn cmd_rank(args: RankArgs) -> Result<ExitCode, String> {
    let g = load_graph(&args.graph)?;
    let d = load_divisor(&args.divisor, &g)?;
    let subdivision = effective_subdivision(args.subdivision)?;
    let opts = RankOptions {
        subdivision,
        ..Default::default()
    };
    let r = rank(&g, &d, &opts).map_err(|e| e.to_string())?;
    let out = RankOutput {
        rank: r,
        degree: d.degree(),
        subdivision,
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(ExitCode::SUCCESS)
}

fn cmd_gonality(args: GonalityArgs) -> Result<ExitCode, String> {
    let g = load_graph(&args.graph)?;
    let opts = GonalityOptions {
        subdivision: effective_subdivision(args.subdivision)?.unwrap_or(1),
        max_degree: args.max_degree,
        jobs: args.jobs,
        ..Default::default()
    };
    let cert = gonality_search(&g, &opts).map_err(|e| e.to_string())?;
    println!("{}", certificate_to_json(&cert));
    Ok(ExitCode::SUCCESS)
}

fn cmd_morphism(cmd: MorphismCommand) -> Result<ExitCode, String> {
    match cmd {
        MorphismCommand::BuildSharp(args) => {
            let phi = build_sharp_morphism(args.d, args.k1).map_err(|e| e.to_string())?;
            let phi = if args.finite {
                make_finite(&phi).map_err(|e| e.to_string())?
            } else {
                phi
            };
            emit(&args.out, &morphism_to_json(&phi))?;
            Ok(ExitCode::SUCCESS)
        }
        MorphismCommand::Check { file } => {
            let text = fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let phi = morphism_from_json(&text).map_err(|e| format!("{}: {e}", file.display()))?;
            let report = phi.check_harmonic().map_err(|e| e.to_string())?;
            println!("{}", harmonic_report_to_json(&report));
            Ok(if report.harmonic {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        MorphismCommand::Fiber { file, at } => {
            let text = fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let phi = morphism_from_json(&text).map_err(|e| format!("{}: {e}", file.display()))?;
            let p = parse_point(&at)?;
            let fiber = fiber_divisor(&phi, &p).map_err(|e| e.to_string())?;
            println!("{}", divisor_to_json(&fiber));
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    suite: String,
    passed: usize,
    failed: usize,
    checks: Vec<CheckOutput>,
}

#[derive(Serialize)]
struct CheckOutput {
    name: String,
    claim: String,
    expected: String,
    computed: String,
    pass: bool,
    runtime_ms: u128,
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    if args.suite != "paper" {
        return Err(format!("unknown suite `{}`; available: paper", args.suite));
    }
    let results = paper_suite(&VerifyOptions {
        max_d: args.max_d,
        seed: args.seed,
        jobs: args.jobs,
        riemann_roch_cases: args.rr_cases,
        random_removals: args.random_removals,
    });
    let ok = suite_passes(&results);
    let output = VerifyOutput {
        suite: args.suite,
        passed: results.iter().filter(|r| r.pass).count(),
        failed: results.iter().filter(|r| !r.pass).count(),
        checks: results
            .into_iter()
            .map(|r| CheckOutput {
                name: r.name,
                claim: r.claim,
                expected: r.expected,
                computed: r.computed,
                pass: r.pass,
                runtime_ms: r.runtime_ms,
            })
            .collect(),
    };
    println!("{}", serde_json::to_string_pretty(&output).expect("serializable"));
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
