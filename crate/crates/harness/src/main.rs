//! `dyncover`: replay graphs and update streams through the library and
//! audit every answer. Exit status 0 pass, 2 audit failure, 3 input error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use dyncover_harness::suite::{self, Batch, CRITERIA};
use dyncover_harness::{cover_events, generate, run_scenario, AuditReport, GenKind, HarnessError, Scenario, Task};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dyncover", version, about = "Audited decremental shortest paths, covers, flows and cuts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Out {
    /// Write the JSON output here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApspOracle {
    Full,
    Slow,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlowOracle {
    Apsp,
    Exact,
}

#[derive(Subcommand)]
enum Cmd {
    /// Neighborhood cover: JSON event log, plus the audit with --verify.
    Nc {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        updates: Option<PathBuf>,
        #[arg(long)]
        dist: u64,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Approximate APSP on a general graph; updates then queries.
    Apsp {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        updates: Option<PathBuf>,
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, value_enum, default_value = "full")]
        oracle: ApspOracle,
        #[command(flatten)]
        out: Out,
    },
    /// Multicommodity flow with its audit.
    Flow(FlowArgs),
    /// Multicut rounded from the flow's dual, with the audit.
    Multicut(FlowArgs),
    /// Expander hierarchy queries under deletions, or pruning with --prune.
    Expander {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        updates: Option<PathBuf>,
        #[arg(long)]
        phi: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Query from every stride-th vertex.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        prune: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Pseudocut and expander witness of the whole graph.
    Pseudocut {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Weight scale; defaults to the number of regular vertices.
        #[arg(long)]
        w_hat: Option<u64>,
        #[arg(long)]
        d_hat: u64,
        #[command(flatten)]
        out: Out,
    },
    /// ES-tree trace replay against Dijkstra.
    Estree {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        updates: Option<PathBuf>,
        #[arg(long)]
        root: usize,
        #[arg(long)]
        depth: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Write a generated scenario as JSON.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKindArg,
        #[arg(long, default_value_t = 32)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay scenario files and print their audit reports.
    Verify {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
    /// Run acceptance batches and print one verdict line each.
    Bench {
        /// Criterion ids; all when omitted.
        #[arg(long = "criterion", short = 'c')]
        ids: Vec<u8>,
    },
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, value_enum, default_value = "apsp")]
    oracle: FlowOracle,
    /// Path limit of the exact fractional optimum; 0 skips it.
    #[arg(long, default_value_t = 20_000)]
    opt_paths: usize,
    #[command(flatten)]
    out: Out,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKindArg {
    Bipartite,
    General,
    Barbell,
    Grid,
    Expander,
    Adversarial,
}

impl From<GenKindArg> for GenKind {
    fn from(k: GenKindArg) -> Self {
        match k {
            GenKindArg::Bipartite => GenKind::Bipartite,
            GenKindArg::General => GenKind::General,
            GenKindArg::Barbell => GenKind::Barbell,
            GenKindArg::Grid => GenKind::Grid,
            GenKindArg::Expander => GenKind::Expander,
            GenKindArg::Adversarial => GenKind::Adversarial,
        }
    }
}

const AUDIT_FAILED: u8 = 2;
const INPUT_ERROR: u8 = 3;

fn read(p: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(p).map_err(|e| HarnessError::Input(format!("{}: {e}", p.display())))
}

fn read_opt(p: &Option<PathBuf>) -> Result<String, HarnessError> {
    p.as_deref().map_or(Ok(String::new()), read)
}

fn scenario(name: &str, task: Task, graph: &Path, stream: String, pairs: String) -> Result<Scenario, HarnessError> {
    Ok(Scenario { name: name.to_string(), seed: 0, task, graph: read(graph)?, stream, pairs, expect: vec![] })
}

/// Writes to stdout; a closed pipe is not an error.
fn print(text: &str) -> Result<(), HarnessError> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(out: &Out, v: &serde_json::Value) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match &out.report {
        Some(p) => std::fs::write(p, text)?,
        None => print(&text)?,
    }
    Ok(())
}

fn status(pass: bool) -> u8 {
    if pass {
        0
    } else {
        AUDIT_FAILED
    }
}

/// Runs `sc`, writes its report and returns the exit status.
fn audit(sc: &Scenario, out: &Out, shape: impl FnOnce(&AuditReport) -> serde_json::Value) -> Result<u8, HarnessError> {
    let rep = run_scenario(sc)?;
    for f in rep.failures() {
        log::warn!("{}: {f}", sc.name);
    }
    emit(out, &shape(&rep))?;
    Ok(status(rep.passed()))
}

fn full(rep: &AuditReport) -> serde_json::Value {
    serde_json::to_value(rep).expect("report serializes")
}

fn run(cmd: Cmd) -> Result<u8, HarnessError> {
    match cmd {
        Cmd::Nc { graph, updates, dist, kappa, eps, verify, out } => {
            let task = Task::Cover { eps, kappa, check_budget: verify, dist: Some(dist) };
            let sc = scenario("nc", task, &graph, read_opt(&updates)?, String::new())?;
            let log = cover_events(&sc)?;
            let mut code = status(log.error.is_none());
            let mut v = serde_json::json!({ "events": log.events, "error": log.error });
            if verify {
                let rep = run_scenario(&sc)?;
                code = code.max(status(rep.passed()));
                v["audit"] = full(&rep);
            }
            emit(&out, &v)?;
            Ok(code)
        }
        Cmd::Apsp { graph, updates, queries, eps, kappa, oracle, out } => {
            let mut stream = read_opt(&updates)?;
            stream.push('\n');
            stream.push_str(&read_opt(&queries)?);
            let task = Task::Apsp { eps, kappa, slow: matches!(oracle, ApspOracle::Slow) };
            audit(&scenario("apsp", task, &graph, stream, String::new())?, &out, full)
        }
        Cmd::Flow(a) => flow(a, "flow"),
        Cmd::Multicut(a) => flow(a, "multicut"),
        Cmd::Expander { graph, updates, phi, eps, stride, prune, out } => {
            let task = if prune { Task::Prune { phi } } else { Task::ExpanderApsp { eps, phi, query_stride: stride } };
            audit(&scenario("expander", task, &graph, read_opt(&updates)?, String::new())?, &out, full)
        }
        Cmd::Pseudocut { graph, eps, w_hat, d_hat, out } => {
            let text = read(&graph)?;
            let w_hat = match w_hat {
                Some(w) => w,
                None => dyncover::text::parse_graph(&text)?.graph.num_live_regular() as u64,
            };
            let task = Task::Pseudocut { eps, w_hat, d_hat };
            audit(&scenario("pseudocut", task, &graph, String::new(), String::new())?, &out, full)
        }
        Cmd::Estree { graph, updates, root, depth, out } => {
            let task = Task::Estree { root, depth };
            audit(&scenario("estree", task, &graph, read_opt(&updates)?, String::new())?, &out, full)
        }
        Cmd::Gen { kind, size, seed, out } => {
            let text = generate(kind.into(), size, seed).to_json() + "\n";
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => print(&text)?,
            }
            Ok(0)
        }
        Cmd::Verify { scenarios, out } => {
            let mut reports = Vec::new();
            for p in &scenarios {
                let sc = Scenario::from_json(&read(p)?)?;
                log::info!("replaying {}", sc.name);
                reports.push(run_scenario(&sc)?);
            }
            let pass = reports.iter().all(AuditReport::passed);
            let v = if reports.len() == 1 { full(&reports[0]) } else { serde_json::to_value(&reports)? };
            emit(&out, &v)?;
            Ok(status(pass))
        }
        Cmd::Bench { ids } => {
            let ids: Vec<u8> = if ids.is_empty() { CRITERIA.iter().map(|c| c.id).collect() } else { ids };
            let mut pass = true;
            for id in ids {
                let v = match CRITERIA.iter().find(|c| c.id == id) {
                    None => return Err(HarnessError::Input(format!("no criterion {id}"))),
                    Some(c) => match c.batch {
                        Some(b) => suite::judge(id, &suite::run_timed(b)),
                        None => suite::determinism(&Batch::ALL),
                    },
                };
                v.print();
                pass &= v.pass;
            }
            Ok(status(pass))
        }
    }
}

fn flow(a: FlowArgs, name: &str) -> Result<u8, HarnessError> {
    let task = Task::Flow { eps: a.eps, exact: matches!(a.oracle, FlowOracle::Exact), kappa: a.kappa, opt_paths: a.opt_paths };
    let sc = scenario(name, task, &a.graph, String::new(), read(&a.pairs)?)?;
    if name == "flow" {
        return audit(&sc, &a.out, full);
    }
    audit(&sc, &a.out, |rep| {
        let art = rep.artifact.clone().unwrap_or_default();
        serde_json::json!({
            "multicut": art.get("multicut"),
            "regions": art.get("regions"),
            "c2_num": art.get("c2_num"),
            "m": art.get("m"),
            "checks": rep.checks,
            "passed": rep.passed(),
        })
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    // batch runs parse thousands of generated graphs; keep their warnings out
    let level = if matches!(cli.cmd, Cmd::Bench { .. }) { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("dyncover: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
