//! The acceptance batches: seeded scenario lists, batch execution and the
//! pass rule of each criterion.

use crate::gen;
use crate::oracle;
use crate::report::{AuditReport, BatchReport};
use crate::scenario::{run_scenario, Scenario, Task};
use dyncover::text::{write_general, write_graph, write_pairs, write_stream, StreamItem};
use dyncover::{DynGraph, UpdateOp};
use rand::Rng;
use rayon::prelude::*;
use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Batch {
    Estree,
    Cover,
    Pseudocut,
    Prune,
    Expander,
    Apsp,
    Flow,
}

impl Batch {
    pub const ALL: [Batch; 7] = [Batch::Estree, Batch::Cover, Batch::Pseudocut, Batch::Prune, Batch::Expander, Batch::Apsp, Batch::Flow];

    pub fn name(self) -> &'static str {
        match self {
            Batch::Estree => "estree",
            Batch::Cover => "cover",
            Batch::Pseudocut => "pseudocut",
            Batch::Prune => "prune",
            Batch::Expander => "expander",
            Batch::Apsp => "apsp",
            Batch::Flow => "flow",
        }
    }

    pub fn scenarios(self) -> Vec<Scenario> {
        match self {
            Batch::Estree => (0..100).map(estree_scenario).collect(),
            Batch::Cover => (0..50).map(cover_scenario).collect(),
            Batch::Pseudocut => (0..30).map(pseudocut_scenario).collect(),
            Batch::Prune => (0..20).map(prune_scenario).collect(),
            Batch::Expander => (0..10).map(expander_scenario).collect(),
            Batch::Apsp => (0..30).map(apsp_scenario).collect(),
            Batch::Flow => (0..20).flat_map(flow_scenarios).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub batch: Option<Batch>,
    pub limit: Duration,
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "ES-tree exactness", batch: Some(Batch::Estree), limit: Duration::from_secs(10) },
    Criterion { id: 2, title: "cover validity", batch: Some(Batch::Cover), limit: Duration::from_secs(120) },
    Criterion { id: 3, title: "budget ledger", batch: Some(Batch::Cover), limit: Duration::from_secs(120) },
    Criterion { id: 4, title: "membership bound", batch: Some(Batch::Cover), limit: Duration::from_secs(120) },
    Criterion { id: 5, title: "pseudocut validity", batch: Some(Batch::Pseudocut), limit: Duration::from_secs(120) },
    Criterion { id: 6, title: "expander pruning", batch: Some(Batch::Prune), limit: Duration::from_secs(60) },
    Criterion { id: 7, title: "expander APSP", batch: Some(Batch::Expander), limit: Duration::from_secs(60) },
    Criterion { id: 8, title: "APSP sandwich", batch: Some(Batch::Apsp), limit: Duration::from_secs(180) },
    Criterion { id: 9, title: "flow and multicut", batch: Some(Batch::Flow), limit: Duration::from_secs(120) },
    Criterion { id: 10, title: "determinism", batch: None, limit: Duration::from_secs(600) },
];

pub fn criterion(id: u8) -> Criterion {
    CRITERIA[id as usize - 1]
}

/// Runs every scenario; input errors become a failed `input` check.
pub fn run_batch(name: &str, scs: &[Scenario]) -> BatchReport {
    let reports = scs
        .par_iter()
        .map(|sc| {
            run_scenario(sc).unwrap_or_else(|e| {
                let mut r = AuditReport::new(&sc.name, sc.task.name());
                r.fail("input", e.to_string());
                r
            })
        })
        .collect();
    BatchReport::new(name, reports)
}

/// A batch run with its wall time. Timing stays out of the report.
pub struct TimedBatch {
    pub report: BatchReport,
    pub elapsed: Duration,
}

/// Generation counts toward the time.
pub fn run_timed(b: Batch) -> TimedBatch {
    let t = Instant::now();
    let scs = b.scenarios();
    let report = run_batch(b.name(), &scs);
    TimedBatch { report, elapsed: t.elapsed() }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub id: u8,
    pub pass: bool,
    pub line: String,
}

impl Verdict {
    pub fn print(&self) {
        println!("{}", self.line);
    }
}

/// Checks a criterion is judged on; each must run at least once per scenario
/// unless listed in `optional`.
fn rule(id: u8) -> (&'static [&'static str], &'static [&'static str]) {
    match id {
        1 => (&["labels_exact", "sssp_answers", "tree_audit"], &["query_answers"]),
        2 => (&["balls_covered", "session_verify"], &["path_answers", "uncovered_pairs_far"]),
        3 => (&["budget_ledger", "budget_monotone", "top_class_empty"], &[]),
        4 => (&["membership_bound"], &[]),
        5 => (&["balls_light", "sizes_decreasing", "witness_present"], &["witness_audit", "embedding_paths", "host_paths", "congestion", "expander_certified"]),
        6 => (&["monotone", "pruned_size", "boundary", "remaining_expansion"], &[]),
        7 => (&["queries"], &["pruned_growth"]),
        8 => (&["sandwich"], &["paths"]),
        9 => (&["weak_duality", "replay_matches", "paths_valid", "scaled_feasible", "dual_feasible", "separated", "cut_bound", "sandwich_lower", "sandwich_upper"], &["exact_ratio", "cut_bound_dual", "dual_upper", "multicut_lower"]),
        _ => (&[], &[]),
    }
}

/// Applies the pass rule of criterion `id` to a batch.
pub fn judge(id: u8, t: &TimedBatch) -> Verdict {
    let c = criterion(id);
    let (required, optional) = rule(id);
    let mut problems = Vec::new();
    for r in &t.report.reports {
        if let Some(ch) = r.checks.get("input") {
            problems.push(format!("{}: {}", r.scenario, ch.first.clone().unwrap_or_default()));
        }
        for name in required.iter().chain(optional) {
            match r.checks.get(*name) {
                Some(ch) if !ch.pass() => problems.push(format!("{}: {name}: {} ({}/{})", r.scenario, ch.first.clone().unwrap_or_default(), ch.violations, ch.count)),
                None if required.contains(name) => problems.push(format!("{}: {name} never evaluated", r.scenario)),
                _ => {}
            }
        }
        for crash in ["session", "solve", "build", "delete", "prune"] {
            if let Some(ch) = r.checks.get(crash) {
                problems.push(format!("{}: {crash}: {}", r.scenario, ch.first.clone().unwrap_or_default()));
            }
        }
    }
    let evaluations: u64 = t.report.reports.iter().flat_map(|r| required.iter().chain(optional).filter_map(|n| r.checks.get(*n))).map(|c| c.count).sum();
    let in_time = t.elapsed <= c.limit;
    if !in_time {
        problems.push(format!("took {:.1}s > {}s", t.elapsed.as_secs_f64(), c.limit.as_secs()));
    }
    let pass = problems.is_empty();
    let extra = summary(id, &t.report);
    let mut line = format!(
        "[{}] C{id} {}: {} scenarios, {evaluations} audited evaluations, {:.1}s (limit {}s){extra}",
        if pass { "PASS" } else { "FAIL" },
        c.title,
        t.report.reports.len(),
        t.elapsed.as_secs_f64(),
        c.limit.as_secs()
    );
    if let Some(p) = problems.first() {
        line.push_str(&format!("; {} problem(s), first: {p}", problems.len()));
    }
    Verdict { id, pass, line }
}

fn summary(id: u8, b: &BatchReport) -> String {
    let fmt = |k: &str| b.max_measured(k).map_or("-".to_string(), |v| format!("{v:.3}"));
    match id {
        2 => format!("; max path {} vs flag_dist {}", fmt("max_path_len"), fmt("flag_dist")),
        4 => format!("; max memberships {} vs bound {}", fmt("max_memberships"), fmt("membership_bound")),
        5 => format!("; max congestion {}, min witness expansion {}", fmt("congestion"), min_measured(b, "witness_expansion")),
        6 => format!("; max |S| {}", fmt("max_pruned")),
        7 => format!(
            "; in-budget deletions {}, max query hops {} vs bound {}, beyond-budget bad queries {}/{}",
            b.total("deletions"),
            fmt("max_query_len"),
            min_measured(b, "length_bound"),
            b.total("beyond_budget_bad_queries"),
            b.total("beyond_budget_queries")
        ),
        8 => {
            let s = b.stretch();
            format!("; worst stretch {:.3} over {} queries (alpha {}), worst path stretch {}", s.worst, s.samples, fmt("alpha"), fmt("worst_path_stretch"))
        }
        9 => format!("; worst exact ratio {}, max alpha_measured {}", fmt("exact_ratio"), fmt("alpha_measured")),
        _ => String::new(),
    }
}

fn min_measured(b: &BatchReport, key: &str) -> String {
    b.reports.iter().filter_map(|r| r.measured.get(key).copied()).reduce(f64::min).map_or("-".to_string(), |v| format!("{v:.3}"))
}

/// Runs each batch twice and compares the serialized reports.
pub fn determinism(batches: &[Batch]) -> Verdict {
    let t = Instant::now();
    let mut diffs = Vec::new();
    for &b in batches {
        let start = Instant::now();
        let scs = b.scenarios();
        let a = run_batch(b.name(), &scs).to_json();
        let c = run_batch(b.name(), &scs).to_json();
        log::info!("{}: two runs in {:.1}s", b.name(), start.elapsed().as_secs_f64());
        if a != c {
            diffs.push(b.name());
        }
    }
    let limit = criterion(10).limit;
    let elapsed = t.elapsed();
    let pass = diffs.is_empty() && elapsed <= limit;
    let line = format!(
        "[{}] C10 determinism: {} batches run twice, {:.1}s (limit {}s){}",
        if pass { "PASS" } else { "FAIL" },
        batches.len(),
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if diffs.is_empty() { String::new() } else { format!("; reports differ for {diffs:?}") }
    );
    Verdict { id: 10, pass, line }
}

fn estree_scenario(i: u64) -> Scenario {
    let mut r = gen::rng(1000 + i);
    let ns = 5 + (i % 12) as usize;
    let nr = 15 + (i % 31) as usize;
    let maxlen = 1 + i % 3;
    let m = nr + nr / 2 + (i % 10) as usize;
    let edges = gen::random_bipartite(&mut r, nr, ns, m, maxlen);
    let g = loaded(&write_graph(nr, ns, &edges, maxlen));
    let root = r.gen_range(0..nr);
    let depth = 2 + (i % 9) * maxlen;
    let items = gen::mixed_stream(&g, &mut r, 1000, 0.2, Some(root));
    Scenario {
        name: format!("estree-{i:03}"),
        seed: 1000 + i,
        task: Task::Estree { root, depth },
        graph: write_graph(nr, ns, &edges, maxlen),
        stream: write_stream(&items, nr),
        pairs: String::new(),
        expect: vec!["labels_exact".into()],
    }
}

/// The graph as a scenario run will see it (isolated supernodes dropped).
fn loaded(text: &str) -> DynGraph {
    dyncover::text::parse_graph(text).expect("generated graph parses").graph
}

fn cover_scenario(i: u64) -> Scenario {
    let mut r = gen::rng(2000 + i);
    let nr = 100 + ((i * 41) % 201) as usize;
    let ns = nr / 4;
    let d = 1 + i % 3;
    let edges = gen::random_bipartite(&mut r, nr, ns, nr * 7 / 4, d);
    let g = loaded(&write_graph(nr, ns, &edges, d));
    let items = gen::mixed_stream(&g, &mut r, 500, 0.5, None);
    Scenario {
        name: format!("cover-{i:03}"),
        seed: 2000 + i,
        task: Task::Cover { eps: 0.5, kappa: None, check_budget: true, dist: None },
        graph: write_graph(nr, ns, &edges, d),
        stream: write_stream(&items, nr),
        pairs: String::new(),
        expect: vec!["balls_covered".into(), "membership_bound".into()],
    }
}

fn pseudocut_scenario(i: u64) -> Scenario {
    let mut r = gen::rng(3000 + i);
    let (n, edges) = match i % 3 {
        0 => gen::barbell(&mut r, 10 + 2 * (i as usize % 40), 2 + (i as usize % 4)),
        1 => {
            let n = 20 + 6 * i as usize;
            (n, gen::random_regular(&mut r, n, 3))
        }
        _ => {
            let w = 5 + (i as usize / 3) % 10;
            (w * w, gen::grid(w, w))
        }
    };
    let n = n.min(200);
    Scenario {
        name: format!("pseudocut-{i:03}"),
        seed: 3000 + i,
        task: Task::Pseudocut { eps: 0.5, w_hat: n as u64, d_hat: 2 + i % 3 },
        graph: write_general(n, &edges),
        stream: String::new(),
        pairs: String::new(),
        expect: vec!["balls_light".into()],
    }
}

fn prune_scenario(i: u64) -> Scenario {
    let mut r = gen::rng(4000 + i);
    let j = (i / 3) as usize;
    let (n, edges) = match i % 3 {
        0 => {
            let n = 8 + j % 7;
            (n, gen::complete(n))
        }
        1 => (14, gen::random_regular(&mut r, 14, 6 + j % 3)),
        _ => {
            let n = 12 + j % 3;
            (n, gen::circulant(n, &[1, 2, 3, 4, 5]))
        }
    };
    let phi = oracle::brute_expansion(n, &edges).expect("n <= 14");
    let delta = degree_max(n, &edges) as f64;
    let limit = (phi * edges.len() as f64 / (10.0 * delta)).floor() as usize;
    let items: Vec<_> = gen::edge_deletions(edges.len(), &mut r, limit).into_iter().map(|e| StreamItem::Update(UpdateOp::DeleteEdge(e))).collect();
    Scenario {
        name: format!("prune-{i:03}"),
        seed: 4000 + i,
        task: Task::Prune { phi: None },
        graph: write_general(n, &edges),
        stream: write_stream(&items, n),
        pairs: String::new(),
        expect: vec!["monotone".into(), "remaining_expansion".into()],
    }
}

fn degree_max(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut deg = vec![0; n];
    for &(a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    deg.into_iter().max().unwrap_or(0)
}

fn expander_scenario(i: u64) -> Scenario {
    let mut r = gen::rng(5000 + i);
    let n = 28 + 4 * i as usize;
    let edges = gen::random_regular(&mut r, n, 3);
    let items: Vec<_> = gen::edge_deletions(edges.len(), &mut r, 4).into_iter().map(|e| StreamItem::Update(UpdateOp::DeleteEdge(e))).collect();
    Scenario {
        name: format!("expander-{i:03}"),
        seed: 5000 + i,
        task: Task::ExpanderApsp { eps: 0.5, phi: None, query_stride: 2 },
        graph: write_general(n, &edges),
        stream: write_stream(&items, n),
        pairs: String::new(),
        expect: vec!["queries".into()],
    }
}

fn apsp_scenario(i: u64) -> Scenario {
    let mut r = gen::rng(6000 + i);
    let n = 40 + ((i * 37) % 161) as usize;
    let m = n + n / 2;
    let edges = gen::random_general(&mut r, n, m, 1 + i % 8);
    let steps = 200 + ((i * 131) % 801) as usize;
    let items = if i % 3 == 2 { gen::adversarial_stream(n, &edges, &mut r, steps) } else { gen::deletion_stream(n, m, &mut r, steps, 0.4) };
    Scenario {
        name: format!("apsp-{i:03}"),
        seed: 6000 + i,
        task: Task::Apsp { eps: 0.5, kappa: if i % 2 == 0 { None } else { Some(1.0) }, slow: false },
        graph: gen::write_weighted(n, &edges),
        stream: write_stream(&items, n),
        pairs: String::new(),
        expect: vec!["sandwich".into()],
    }
}

/// One tiny instance run under both path oracles.
fn flow_scenarios(i: u64) -> Vec<Scenario> {
    let mut r = gen::rng(7000 + i);
    let n = 4 + (i % 5) as usize;
    let m = (n + r.gen_range(0..4)).min(12);
    let edges: Vec<_> = gen::random_general(&mut r, n, m, 1).into_iter().map(|(a, b, _)| (a, b)).collect();
    let k = 1 + (i % 3) as usize;
    let pairs = gen::random_pairs(&mut r, n, k);
    [true, false]
        .into_iter()
        .map(|exact| Scenario {
            name: format!("flow-{i:03}-{}", if exact { "exact" } else { "apsp" }),
            seed: 7000 + i,
            task: Task::Flow { eps: 0.5, exact, kappa: Some(1.0), opt_paths: 50_000 },
            graph: write_general(n, &edges),
            stream: String::new(),
            pairs: write_pairs(&pairs),
            expect: vec!["weak_duality".into(), "sandwich_upper".into()],
        })
        .collect()
}
