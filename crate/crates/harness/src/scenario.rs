//! Scenarios: a graph, a stream and a task, replayed against the library
//! with every answer audited by an independent oracle.

use crate::gen;
use crate::oracle::{self, check_general_walk, check_walk};
use crate::report::AuditReport;
use dyncover::apsp::{ApspError, ApspOptions, ApspSession, OracleKind};
use dyncover::cluster::{full_factory, GoodParams};
use dyncover::cover::{Cluster, CoverEvent, NcSession, SessionOptions};
use dyncover::expander::hierarchy::{Hierarchy, HierarchyConfig};
use dyncover::expander::{ExpanderError, Multigraph, Pruner};
use dyncover::flowcut::{self, FlowConfig, FlowInstance, OracleChoice, C_ROUND};
use dyncover::params::CoverConsts;
use dyncover::pseudocut::{audit_witness, find_pseudocut_and_expander, PseudocutConfig};
use dyncover::text::{parse_graph, parse_pairs, parse_stream, write_graph, write_pairs, write_stream, LoadedGraph, StreamItem};
use dyncover::{DynGraph, EsTree, GraphError, SsspAnswer, UpdateOp, INF};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Malformed or inconsistent input; the run never started.
    #[error("input error: {0}")]
    Input(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<GraphError> for HarnessError {
    fn from(e: GraphError) -> Self {
        HarnessError::Input(e.to_string())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    /// ES-tree labels and paths after every update.
    Estree { root: usize, depth: u64 },
    /// Neighborhood cover with the full cluster oracle; `dist` overrides
    /// the distance bound in the graph header.
    Cover {
        eps: f64,
        kappa: Option<f64>,
        check_budget: bool,
        #[serde(default)]
        dist: Option<u64>,
    },
    /// Approximate APSP; queries come from the stream.
    Apsp { eps: f64, kappa: Option<f64>, slow: bool },
    /// Multicommodity flow and multicut on the pairs file.
    Flow { eps: f64, exact: bool, kappa: Option<f64>, opt_paths: usize },
    /// One pseudocut-and-witness computation on the whole graph.
    Pseudocut { eps: f64, w_hat: u64, d_hat: u64 },
    /// Expander pruning; `phi` defaults to the exact expansion.
    Prune { phi: Option<f64> },
    /// Expander shortest paths; `phi` defaults to the spectral bound.
    ExpanderApsp { eps: f64, phi: Option<f64>, query_stride: usize },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Estree { .. } => "estree",
            Task::Cover { .. } => "cover",
            Task::Apsp { .. } => "apsp",
            Task::Flow { .. } => "flow",
            Task::Pseudocut { .. } => "pseudocut",
            Task::Prune { .. } => "prune",
            Task::ExpanderApsp { .. } => "expander",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub task: Task,
    /// Graph in the text format.
    pub graph: String,
    #[serde(default)]
    pub stream: String,
    #[serde(default)]
    pub pairs: String,
    /// Checks that must appear in the report.
    #[serde(default)]
    pub expect: Vec<String>,
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(s).map_err(|e| HarnessError::Input(format!("scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// Random bipartite graph, mixed update stream, cover task.
    Bipartite,
    /// Random weighted graph, deletions and queries, APSP task.
    General,
    /// Two expanders joined by a path, pseudocut task.
    Barbell,
    /// Grid with random demand pairs, flow task.
    Grid,
    /// Random 3-regular graph, expander shortest paths.
    Expander,
    /// Weighted graph, deletions along current shortest paths, APSP task.
    Adversarial,
}

/// A scenario of the given kind, scaled by `size`.
pub fn generate(kind: GenKind, size: usize, seed: u64) -> Scenario {
    let mut r = gen::rng(seed);
    let size = size.max(4);
    let name = format!("{kind:?}-{size}-{seed}").to_lowercase();
    let mut sc = Scenario { name, seed, task: Task::Prune { phi: None }, graph: String::new(), stream: String::new(), pairs: String::new(), expect: vec![] };
    match kind {
        GenKind::Bipartite => {
            let (nr, ns) = (size, (size / 3).max(2));
            let edges = gen::random_bipartite(&mut r, nr, ns, nr + nr * 3 / 4, 1);
            sc.graph = write_graph(nr, ns, &edges, 2);
            let g = parse_graph(&sc.graph).expect("generated graph parses").graph;
            let items = gen::mixed_stream(&g, &mut r, size, 0.3, None);
            sc.stream = write_stream(&items, nr);
            sc.task = Task::Cover { eps: 0.5, kappa: None, check_budget: true, dist: None };
        }
        GenKind::General | GenKind::Adversarial => {
            let m = size + size / 2;
            let edges = gen::random_general(&mut r, size, m, 4);
            let items = if kind == GenKind::General {
                gen::deletion_stream(size, m, &mut r, 2 * size, 0.5)
            } else {
                gen::adversarial_stream(size, &edges, &mut r, 2 * size)
            };
            sc.graph = gen::write_weighted(size, &edges);
            sc.stream = write_stream(&items, size);
            sc.task = Task::Apsp { eps: 0.5, kappa: None, slow: false };
        }
        GenKind::Barbell => {
            let blob = (size / 2).max(4) & !1;
            let (n, edges) = gen::barbell(&mut r, blob, 3);
            sc.graph = dyncover::text::write_general(n, &edges);
            sc.task = Task::Pseudocut { eps: 0.5, w_hat: n as u64, d_hat: 3 };
        }
        GenKind::Grid => {
            let w = (size as f64).sqrt().ceil().max(2.0) as usize;
            let edges = gen::grid(w, w);
            sc.graph = dyncover::text::write_general(w * w, &edges);
            sc.pairs = write_pairs(&gen::random_pairs(&mut r, w * w, 3));
            sc.task = Task::Flow { eps: 0.5, exact: false, kappa: Some(1.0), opt_paths: 20_000 };
        }
        GenKind::Expander => {
            let n = size & !1;
            let edges = gen::random_regular(&mut r, n, 3);
            let dels = gen::edge_deletions(edges.len(), &mut r, n / 4);
            let items: Vec<_> = dels.into_iter().map(|e| StreamItem::Update(UpdateOp::DeleteEdge(e))).collect();
            sc.graph = dyncover::text::write_general(n, &edges);
            sc.stream = write_stream(&items, n);
            sc.task = Task::ExpanderApsp { eps: 0.5, phi: None, query_stride: 3 };
        }
    }
    sc
}

/// Replays `sc` and audits every answer. `Err` means the input itself was
/// unusable; algorithm failures are failed checks in the report.
pub fn run_scenario(sc: &Scenario) -> Result<AuditReport, HarnessError> {
    let mut rep = AuditReport::new(&sc.name, sc.task.name());
    let lg = parse_graph(&sc.graph)?;
    let items = parse_stream(&sc.stream, lg.n_regular)?;
    validate_stream(&lg.graph, &items)?;
    match sc.task {
        Task::Estree { root, depth } => run_estree(lg, &items, root, depth, &mut rep)?,
        Task::Cover { eps, kappa, check_budget, dist } => run_cover(lg, &items, eps, kappa, check_budget, dist, &mut rep)?,
        Task::Apsp { eps, kappa, slow } => run_apsp(lg, &items, eps, kappa, slow, &mut rep)?,
        Task::Flow { eps, exact, kappa, opt_paths } => run_flow(lg, &parse_pairs(&sc.pairs)?, eps, exact, kappa, opt_paths, &mut rep)?,
        Task::Pseudocut { eps, w_hat, d_hat } => run_pseudocut(lg, eps, w_hat, d_hat, &mut rep)?,
        Task::Prune { phi } => run_prune(lg, &items, phi, &mut rep)?,
        Task::ExpanderApsp { eps, phi, query_stride } => run_expander(lg, &items, eps, phi, query_stride, &mut rep)?,
    }
    for name in &sc.expect {
        let present = rep.checks.contains_key(name);
        rep.tally("expected_checks", present, || format!("check `{name}` never ran"));
    }
    Ok(rep)
}

/// Events of a cover session replaying a scenario's updates.
#[derive(Clone, Debug, Serialize)]
pub struct CoverLog {
    pub events: Vec<CoverEvent>,
    /// Session failure that stopped the replay.
    pub error: Option<String>,
}

/// Event log of a cover session replaying the scenario's stream: cluster
/// creation and shrinking, flags, covering reassignments, one entry per update.
pub fn cover_events(sc: &Scenario) -> Result<CoverLog, HarnessError> {
    let Task::Cover { eps, kappa, dist, .. } = sc.task else {
        return Err(HarnessError::Input(format!("scenario task is {}, not cover", sc.task.name())));
    };
    let lg = parse_graph(&sc.graph)?;
    let items = parse_stream(&sc.stream, lg.n_regular)?;
    validate_stream(&lg.graph, &items)?;
    let g = lg.graph;
    let w = g.num_live_regular() as u64;
    if w < 2 {
        return Err(HarnessError::Input("cover needs at least two regular vertices".into()));
    }
    let consts = CoverConsts::new(dist.unwrap_or(g.d()), w, kappa);
    let mut s = match NcSession::new(g, consts, full_factory(GoodParams::new(eps, w)), SessionOptions::default()) {
        Ok(s) => s,
        Err(e) => return Ok(CoverLog { events: vec![], error: Some(e.to_string()) }),
    };
    for it in &items {
        if let StreamItem::Update(op) = it {
            if let Err(e) = s.apply(op) {
                return Ok(CoverLog { events: s.take_events(), error: Some(e.to_string()) });
            }
        }
    }
    Ok(CoverLog { events: s.take_events(), error: None })
}

/// Replays the updates on a copy to reject invalid streams up front.
fn validate_stream(g: &DynGraph, items: &[StreamItem]) -> Result<(), HarnessError> {
    let mut g = g.clone();
    for (i, it) in items.iter().enumerate() {
        match it {
            StreamItem::Update(op) => {
                g.apply(op).map_err(|e| HarnessError::Input(format!("stream item {}: {e}", i + 1)))?;
            }
            StreamItem::Query(x, y) | StreamItem::Path(x, y) => {
                if !g.has_vertex(*x) || !g.has_vertex(*y) {
                    return Err(HarnessError::Input(format!("stream item {}: query on missing vertex", i + 1)));
                }
            }
        }
    }
    Ok(())
}

fn run_estree(lg: LoadedGraph, items: &[StreamItem], root: usize, depth: u64, rep: &mut AuditReport) -> Result<(), HarnessError> {
    let mut g = lg.graph;
    if !g.has_vertex(root) {
        return Err(HarnessError::Input(format!("root {root} not in graph")));
    }
    let mut t = EsTree::build(&g, root, depth).map_err(|e| HarnessError::Input(e.to_string()))?;
    audit_tree(&g, &t, rep);
    for it in items {
        match it {
            StreamItem::Update(op) => {
                let rc = g.apply(op).expect("validated");
                t.on_update(&g, &rc.change);
                rep.count("updates", 1);
                if g.has_vertex(root) {
                    audit_tree(&g, &t, rep);
                }
            }
            StreamItem::Query(x, _) | StreamItem::Path(x, _) => {
                rep.count("queries", 1);
                if g.has_vertex(root) {
                    let want = oracle::dist_from(&g, root)[*x].filter(|&d| d <= depth);
                    let got = t.path(*x);
                    let ok = match (&got, want) {
                        (Some(w), Some(d)) => w.len == d && check_walk(&g, &w.clone().reversed(), *x, root).is_ok(),
                        (None, None) => true,
                        _ => false,
                    };
                    rep.tally("query_answers", ok, || format!("vertex {x}: got {:?}, want {want:?}", got.map(|w| w.len)));
                }
            }
        }
    }
    rep.measure("total_increment", t.total_increment() as f64);
    Ok(())
}

fn audit_tree(g: &DynGraph, t: &EsTree, rep: &mut AuditReport) {
    let truth = oracle::dist_from(g, t.root());
    for v in g.vertices() {
        let want = truth[v].filter(|&d| d <= t.depth()).unwrap_or(INF);
        let got = t.dist(v);
        rep.tally("labels_exact", got == want, || format!("vertex {v}: label {got}, oracle {want}"));
        let ok = match t.query(v) {
            SsspAnswer::BeyondDepth => want == INF,
            SsspAnswer::Path(w) => {
                let ends_ok = w.first() == t.root() || w.last() == t.root();
                let w = if w.first() == t.root() { w } else { w.reversed() };
                ends_ok && w.len == want && check_walk(g, &w, t.root(), v).is_ok()
            }
        };
        rep.tally("sssp_answers", ok, || format!("vertex {v}: bad answer, oracle {want}"));
    }
    if let Err(e) = t.audit(g) {
        rep.fail("tree_audit", e);
    } else {
        rep.tally("tree_audit", true, String::new);
    }
}

fn run_cover(
    lg: LoadedGraph,
    items: &[StreamItem],
    eps: f64,
    kappa: Option<f64>,
    check_budget: bool,
    dist: Option<u64>,
    rep: &mut AuditReport,
) -> Result<(), HarnessError> {
    let g = lg.graph;
    let w = g.num_live_regular() as u64;
    if w < 2 {
        return Err(HarnessError::Input("cover needs at least two regular vertices".into()));
    }
    let d = dist.unwrap_or(g.d());
    if d == 0 {
        return Err(HarnessError::Input("distance bound must be positive".into()));
    }
    let consts = CoverConsts::new(d, w, kappa);
    let bound = consts.flag_dist();
    let classic = 1024.0 * consts.log_w.powi(4) * consts.d as f64;
    rep.measure("flag_dist", bound as f64);
    rep.measure("membership_bound", consts.membership_bound());
    let opts = SessionOptions { check_budget, check_flags: true };
    let mut s = match NcSession::new(g.clone(), consts, full_factory(GoodParams::new(eps, w)), opts) {
        Ok(s) => s,
        Err(e) => {
            rep.fail("session", e.to_string());
            return Ok(());
        }
    };
    let mut shadow = g;
    let mut beta = s.budget_snapshot().total;
    audit_cover(&s, &shadow, rep);
    for it in items {
        match it {
            StreamItem::Update(op) => {
                shadow.apply(op).expect("validated");
                rep.count("updates", 1);
                if let Err(e) = s.apply(op) {
                    rep.fail("session", e.to_string());
                    return Ok(());
                }
                audit_cover(&s, &shadow, rep);
                let snap = s.budget_snapshot();
                let tol = 1e-9 * beta.abs().max(1.0);
                rep.tally("budget_monotone", snap.total <= beta + tol, || format!("total budget rose from {beta} to {}", snap.total));
                let top = snap.class.values().copied().max().unwrap_or(0);
                let r = s.consts().r;
                rep.tally("top_class_empty", top < r, || format!("a vertex reached class {top} = r"));
                beta = snap.total;
            }
            StreamItem::Query(x, y) | StreamItem::Path(x, y) => {
                rep.count("queries", 1);
                if !shadow.is_regular(*x) || !shadow.is_regular(*y) {
                    continue;
                }
                let Some(c) = s.covering(*x) else { continue };
                if s.cluster(c).contains(*y) {
                    let res = s.short_path(*x, *y);
                    let ok = match &res {
                        Ok(p) => check_walk(&shadow, p, *x, *y).is_ok() && p.len <= bound && p.len as f64 <= classic,
                        Err(_) => false,
                    };
                    rep.tally("path_answers", ok, || format!("{x}-{y}: {:?} (bound {bound})", res.as_ref().map(|p| p.len)));
                    if let Ok(p) = res {
                        rep.measure_max("max_path_len", p.len as f64);
                    }
                } else {
                    let d = oracle::dist_from(&shadow, *x)[*y];
                    let far = d.map_or(true, |d| d > s.consts().d);
                    rep.tally("uncovered_pairs_far", far, || format!("{x}-{y} at distance {d:?} not in covering cluster"));
                }
            }
        }
    }
    rep.tally("budget_ledger", s.budget_violations().is_empty(), || format!("{:?}", s.budget_violations().first()));
    rep.measure("clusters", s.clusters().len() as f64);
    Ok(())
}

fn audit_cover(s: &NcSession, g: &DynGraph, rep: &mut AuditReport) {
    let regs: Vec<usize> = g.regular_vertices().collect();
    let balls = dyncover_oracle::balls(g.num_slots(), &oracle::edge_list(g), &regs, s.consts().d);
    let bound = s.consts().membership_bound();
    for (&v, ball) in regs.iter().zip(&balls) {
        let ok = match s.covering(v) {
            Some(c) => ball.iter().all(|&u| s.cluster(c).contains(u)),
            None => false,
        };
        rep.tally("balls_covered", ok, || format!("ball of {v} not inside covering cluster {:?}", s.covering(v)));
        let k = s.memberships(v) as f64;
        rep.tally("membership_bound", k <= bound, || format!("vertex {v} in {k} clusters > {bound}"));
        rep.measure_max("max_memberships", k);
    }
    let errs = s.verify();
    rep.tally("session_verify", errs.is_empty(), || errs.join("; "));
}

fn run_apsp(lg: LoadedGraph, items: &[StreamItem], eps: f64, kappa: Option<f64>, slow: bool, rep: &mut AuditReport) -> Result<(), HarnessError> {
    let oracle_kind = if slow { OracleKind::Slow } else { OracleKind::Full };
    let opts = ApspOptions { eps, kappa, oracle: oracle_kind, ..ApspOptions::default() };
    let g = lg.graph;
    if g.is_bipartite() {
        return Err(HarnessError::Input("apsp scenarios take a general graph".into()));
    }
    let n = g.num_slots();
    let edges = oracle::edge_list(&g);
    let mut alive = vec![true; edges.len()];
    let mut s = match ApspSession::general(n, &edges, opts) {
        Ok(s) => s,
        Err(e) => {
            rep.fail("session", e.to_string());
            return Ok(());
        }
    };
    let alpha = s.alpha();
    rep.measure("alpha", alpha as f64);
    for it in items {
        match it {
            StreamItem::Update(UpdateOp::DeleteEdge(e)) => {
                rep.count("updates", 1);
                alive[*e] = false;
                if let Err(err) = s.apply(&UpdateOp::DeleteEdge(*e)) {
                    rep.fail("session", err.to_string());
                    return Ok(());
                }
            }
            StreamItem::Update(op) => return Err(HarnessError::Input(format!("unsupported update on a general graph: {op:?}"))),
            StreamItem::Query(x, y) | StreamItem::Path(x, y) => {
                rep.count("queries", 1);
                let live: Vec<_> = edges.iter().zip(&alive).filter(|(_, &a)| a).map(|(&e, _)| e).collect();
                let truth = dyncover_oracle::dijkstra(n, &live, *x)[*y];
                let est = s.dist_query(*x, *y);
                let ok = match (&est, truth) {
                    (Ok(e), Some(d)) => e.lower <= d && d <= e.value && e.value <= 2 * alpha * d,
                    (Err(ApspError::Disconnected(..)), None) => true,
                    _ => false,
                };
                rep.tally("sandwich", ok, || format!("{x}-{y}: {est:?} vs dist {truth:?}"));
                if let (Ok(e), Some(d)) = (&est, truth) {
                    if d > 0 {
                        rep.stretch(e.value as f64 / d as f64);
                    }
                }
                if matches!(it, StreamItem::Path(..)) {
                    if let (Some(_), Ok(e)) = (truth, &est) {
                        let res = s.shortest_path_query(*x, *y);
                        let ok = match &res {
                            Ok(w) => check_general_walk(&edges, &alive, w, *x, *y).is_ok() && w.len <= e.value,
                            Err(_) => false,
                        };
                        rep.tally("paths", ok, || format!("{x}-{y}: {:?}", res.as_ref().map(|w| w.len)));
                        if let (Ok(w), Some(d)) = (&res, truth) {
                            if d > 0 {
                                rep.measure_max("worst_path_stretch", w.len as f64 / d as f64);
                            }
                        }
                    }
                }
            }
        }
    }
    rep.count("sessions_queries", s.queries());
    Ok(())
}

fn run_flow(lg: LoadedGraph, pairs: &[(usize, usize)], eps: f64, exact: bool, kappa: Option<f64>, opt_paths: usize, rep: &mut AuditReport) -> Result<(), HarnessError> {
    let g = lg.graph;
    let n = g.num_slots();
    let edges: Vec<(usize, usize)> = oracle::edge_list(&g).into_iter().map(|(a, b, _)| (a, b)).collect();
    let inst = FlowInstance::new(n, edges.clone(), pairs.to_vec()).map_err(|e| HarnessError::Input(e.to_string()))?;
    let cfg = FlowConfig {
        eps,
        oracle: if exact { OracleChoice::Exact } else { OracleChoice::Apsp },
        apsp: ApspOptions { kappa, ..FlowConfig::default().apsp },
    };
    let fr = match flowcut::solve(&inst, &cfg) {
        Ok(r) => r,
        Err(e) => {
            rep.fail("solve", e.to_string());
            return Ok(());
        }
    };
    rep.artifact = serde_json::to_value(&fr).ok();
    let m = inst.m() as u64;
    rep.measure("c1", fr.c1 as f64);
    rep.measure("c2", fr.c2_num as f64 / m.max(1) as f64);
    rep.measure("dual_value", fr.dual_value);
    rep.measure("alpha_config", fr.alpha_config as f64);
    rep.measure("alpha_measured", fr.alpha_measured);
    rep.measure("multicut_size", fr.multicut.len() as f64);

    // weak duality c1 >= c2 - 1 after every route, replayed in units of 1/m
    let mut exp = vec![0u32; inst.m()];
    for (i, p) in fr.paths.iter().enumerate() {
        for &e in &p.edges {
            exp[e] += 1;
        }
        let c2: u64 = exp.iter().map(|&k| 1u64 << k).sum();
        let c1 = i as u64 + 1;
        rep.tally("weak_duality", c1 * m + m >= c2, || format!("after route {c1}: c2 {c2}/{m}"));
    }
    let replay: u64 = exp.iter().map(|&k| 1u64 << k).sum();
    rep.tally("weak_duality", fr.c1 * m + m >= replay, || format!("final: c1 {} c2 {replay}/{m}", fr.c1));
    rep.tally("replay_matches", replay == fr.c2_num, || format!("replayed c2 {replay}/{m}, reported {}/{m}", fr.c2_num));

    // replay the routed paths
    let mut load = vec![0u64; inst.m()];
    let mut paths_ok = true;
    for p in &fr.paths {
        let (s, t) = pairs[p.pair];
        let simple = p.vertices.iter().collect::<BTreeSet<_>>().len() == p.vertices.len();
        let ends = p.vertices.first() == Some(&s) && p.vertices.last() == Some(&t);
        let walk = p.edges.len() + 1 == p.vertices.len()
            && p.edges.iter().enumerate().all(|(i, &e)| {
                let (a, b) = edges[e];
                let (u, v) = (p.vertices[i], p.vertices[i + 1]);
                (a, b) == (u, v) || (a, b) == (v, u)
            });
        paths_ok &= simple && ends && walk && p.units <= m;
        for &e in &p.edges {
            load[e] += 1;
        }
    }
    rep.tally("paths_valid", paths_ok, || "a routed path is not a simple demand path of length at most 1".into());
    let div = fr.divisor as u64;
    let max_load = load.iter().copied().max().unwrap_or(0);
    rep.tally("scaled_feasible", max_load <= div, || format!("edge load {max_load} > divisor {div}"));

    // dual feasibility by Dijkstra on integer lengths
    let dual: Vec<_> = edges.iter().zip(&fr.dual.len).map(|(&(a, b), &l)| (a, b, l)).collect();
    let mut dual_ok = true;
    for &(s, t) in pairs {
        let d = dyncover_oracle::dijkstra(n, &dual, s)[t];
        dual_ok &= d.map_or(true, |d| d >= fr.dual.unit);
    }
    rep.tally("dual_feasible", dual_ok, || "a pair is closer than 1 under x'".into());

    // separation by union-find on the remaining edges
    let cut: BTreeSet<usize> = fr.multicut.iter().copied().collect();
    let rest: Vec<_> = edges.iter().enumerate().filter(|(e, _)| !cut.contains(e)).map(|(_, &e)| e).collect();
    let comp = dyncover_oracle::components(n, &rest);
    let sep = pairs.iter().all(|&(s, t)| comp[s] != comp[t]);
    rep.tally("separated", sep, || "a demand pair is still connected".into());

    let k = pairs.len() as f64;
    let f = fr.dual_value;
    let c2 = fr.c2_num as f64 / m as f64;
    let cut = fr.multicut.len() as f64;
    let bound = C_ROUND * (k + 1.0).log2() * c2;
    rep.tally("cut_bound", cut <= bound + 1e-9, || format!("|E'| {cut} > {C_ROUND} log(k+1) c2 = {bound}"));
    let rounding = C_ROUND * (k + 1.0).ln() * f;
    rep.tally("cut_bound_dual", cut <= rounding + 1e-9, || format!("|E'| {cut} > {C_ROUND} ln(k+1) F = {rounding}"));

    // sandwich against the exact fractional optimum
    match dyncover_oracle::frac_mcf(n, &edges, pairs, opt_paths) {
        Ok(opt) => {
            let opt = dyncover_oracle::to_f64(&opt);
            rep.measure("opt_frac", opt);
            let tol = 1e-9 * opt.max(1.0);
            let sigma = div as f64;
            rep.tally("sandwich_lower", fr.c1 as f64 / sigma <= opt + tol, || format!("c1/sigma {} > OPT {opt}", fr.c1 as f64 / sigma));
            let alpha = fr.alpha_config as f64;
            rep.tally("sandwich_upper", opt <= alpha * c2 + tol, || format!("OPT {opt} > alpha {alpha} * c2 {c2}"));
            rep.tally("dual_upper", opt <= f + tol, || format!("OPT {opt} > F {f}"));
            if exact {
                rep.tally("exact_ratio", opt <= 2.0 * sigma * (fr.c1 as f64 / sigma) + 2.0 * sigma * tol || fr.c1 == 0 && opt == 0.0, || format!("OPT {opt} vs c1 {}", fr.c1));
                rep.measure("exact_ratio", if fr.c1 == 0 { 1.0 } else { opt * sigma / fr.c1 as f64 });
            }
            if edges.len() <= 20 {
                if let Ok(best) = dyncover_oracle::brute_multicut(n, &edges, pairs) {
                    rep.measure("opt_multicut", best as f64);
                    rep.tally("multicut_lower", best as f64 + 1e-9 >= opt, || format!("integral {} < OPT {opt}", best));
                }
            }
        }
        Err(_) => rep.count("opt_skipped", 1),
    }
    Ok(())
}

fn run_pseudocut(lg: LoadedGraph, eps: f64, w_hat: u64, d_hat: u64, rep: &mut AuditReport) -> Result<(), HarnessError> {
    let g = lg.graph;
    let c = Cluster::whole(&g);
    let cfg = PseudocutConfig::new(eps, w_hat, d_hat);
    let out = match find_pseudocut_and_expander(&g, &c, &cfg) {
        Ok(o) => o,
        Err(e) => {
            rep.fail("solve", e.to_string());
            return Ok(());
        }
    };
    rep.artifact = Some(serde_json::json!({
        "cut": out.cut,
        "witness": out.witness.as_ref().map(|w| serde_json::json!({
            "edges": w.edges,
            "eta": w.eta,
            "d2": w.d2,
            "congestion": w.congestion,
            "max_len": w.max_len,
        })),
    }));
    let limit = out.cut.limit();
    rep.measure("cut_size", out.cut.len() as f64);
    rep.measure("iterations", out.stats.iterations() as f64);

    // every ball of C minus the cut is light
    let rest: Vec<_> = g.edge_list().into_iter().filter(|(e, ..)| !out.cut.edges.contains(e)).map(|(_, a, b, l)| (a, b, l)).collect();
    let members: Vec<usize> = c.members.iter().copied().collect();
    let balls = dyncover_oracle::balls(g.num_slots(), &rest, &members, out.cut.d_hat);
    for (&x, ball) in members.iter().zip(&balls) {
        let w = ball.iter().filter(|&&u| g.is_regular(u)).count() as u64;
        rep.tally("balls_light", w <= limit, || format!("ball of {x} weighs {w} > {limit}"));
    }
    let dec = out.stats.sizes.windows(2).all(|p| p[1] < p[0]);
    rep.tally("sizes_decreasing", dec, || format!("sizes {:?}", out.stats.sizes));

    let Some(w) = &out.witness else {
        rep.tally("witness_present", out.cut.is_empty(), || "non-empty cut without witness".into());
        return Ok(());
    };
    rep.tally("witness_present", true, String::new);
    if let Err(e) = audit_witness(w) {
        rep.fail("witness_audit", e);
    }
    let x = &w.expander.graph;
    let terms = w.terminals();
    let mut load = vec![0u64; w.sub.graph.num_edge_slots()];
    for e in x.live_edges() {
        let p = &w.paths[e];
        let (a, b) = x.endpoints(e);
        let ends = (p.first(), p.last());
        let ok = (ends == (terms[a], terms[b]) || ends == (terms[b], terms[a]))
            && w.sub.graph.walk_length(&p.vertices, &p.edges) == Some(p.len)
            && p.len <= w.d2;
        rep.tally("embedding_paths", ok, || format!("expander edge {e}: bad path of length {}", p.len));
        for &f in &p.edges {
            load[f] += 1;
        }
        let h = w.sub.to_host(&g, p);
        let ok = g.walk_length(&h.vertices, &h.edges) == Some(h.len) && h.len <= p.len;
        rep.tally("host_paths", ok, || format!("expander edge {e}: host walk invalid"));
    }
    let cong = load.iter().copied().max().unwrap_or(0);
    rep.measure("congestion", cong as f64);
    rep.tally("congestion", cong <= w.eta, || format!("congestion {cong} > eta {}", w.eta));
    if x.n() >= 2 {
        let xe: Vec<_> = x.live_edges().map(|e| x.endpoints(e)).collect();
        let phi = if x.n() <= 16 { oracle::brute_expansion(x.n(), &xe).unwrap_or(0.0) } else { oracle::spectral_expansion_bound(x.n(), &xe) };
        rep.measure("witness_expansion", phi);
        rep.tally("expander_certified", phi > 0.0, || format!("witness on {} vertices has expansion {phi}", x.n()));
    }
    Ok(())
}

fn multigraph_of(lg: &LoadedGraph) -> Result<(Multigraph, Vec<(usize, usize)>), HarnessError> {
    if lg.graph.is_bipartite() {
        return Err(HarnessError::Input("expander scenarios take a general graph".into()));
    }
    let edges: Vec<(usize, usize)> = lg.graph.edge_list().into_iter().map(|(_, a, b, _)| (a, b)).collect();
    Ok((Multigraph::from_edges(lg.graph.num_slots(), &edges), edges))
}

fn deletions(items: &[StreamItem]) -> Result<Vec<usize>, HarnessError> {
    items
        .iter()
        .filter_map(|it| match it {
            StreamItem::Update(UpdateOp::DeleteEdge(e)) => Some(Ok(*e)),
            StreamItem::Update(op) => Some(Err(HarnessError::Input(format!("expander streams hold edge deletions only: {op:?}")))),
            _ => None,
        })
        .collect()
}

fn run_prune(lg: LoadedGraph, items: &[StreamItem], phi: Option<f64>, rep: &mut AuditReport) -> Result<(), HarnessError> {
    let (x, edges) = multigraph_of(&lg)?;
    let n = x.n();
    let phi = match phi {
        Some(p) => p,
        None => oracle::brute_expansion(n, &edges).ok_or_else(|| HarnessError::Input("expansion oracle out of range".into()))?,
    };
    rep.measure("phi", phi);
    let mut p = Pruner::new(x.clone(), phi, 16);
    let delta = p.delta() as f64;
    let dels = deletions(items)?;
    rep.measure("limit", p.limit() as f64);
    rep.measure("stream_len", dels.len() as f64);
    let mut prev: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    for (i, &e) in dels.iter().enumerate() {
        let i = i + 1;
        match p.delete(e) {
            Ok(_) => {}
            Err(ExpanderError::StreamTooLong { .. }) => {
                rep.count("beyond_limit", 1);
            }
            Err(err) => {
                rep.fail("prune", err.to_string());
                return Ok(());
            }
        }
        let s = p.pruned();
        rep.tally("monotone", prev.iter().all(|v| s.contains(v)), || format!("pruned set shrank at deletion {i}"));
        let cap = 8.0 * i as f64 * delta / phi;
        rep.tally("pruned_size", s.len() as f64 <= cap, || format!("|S| {} > {cap} at deletion {i}", s.len()));
        rep.tally("boundary", p.boundary() <= 4 * i, || format!("boundary {} > {} at deletion {i}", p.boundary(), 4 * i));
        let keep: Vec<usize> = (0..n).filter(|&v| !p.is_pruned(v)).collect();
        if keep.len() >= 2 {
            let sub = oracle::restrict(p.graph(), &keep);
            match oracle::brute_expansion(keep.len(), &sub) {
                Some(h) => {
                    let want = phi / (6.0 * delta);
                    rep.tally("remaining_expansion", h >= want - 1e-12, || format!("expansion {h} < {want} at deletion {i}"));
                }
                None => rep.count("expansion_unchecked", 1),
            }
        }
        rep.measure_max("max_pruned", s.len() as f64);
        trace.push(serde_json::json!({ "edge": e, "pruned": s, "boundary": p.boundary() }));
        prev = s;
    }
    rep.artifact = Some(serde_json::json!({ "trace": trace }));
    Ok(())
}

fn run_expander(lg: LoadedGraph, items: &[StreamItem], eps: f64, phi: Option<f64>, stride: usize, rep: &mut AuditReport) -> Result<(), HarnessError> {
    let (x, edges) = multigraph_of(&lg)?;
    let n = x.n();
    let delta = x.max_degree() as f64;
    let phi = phi.unwrap_or_else(|| oracle::spectral_expansion_bound(n, &edges));
    if phi <= 0.0 {
        return Err(HarnessError::Input("graph is not a certified expander".into()));
    }
    rep.measure("phi", phi);
    let cfg = HierarchyConfig { eps, ..HierarchyConfig::default() };
    let mut h = match Hierarchy::new(x, phi, cfg) {
        Ok(h) => h,
        Err(e) => {
            rep.fail("build", e.to_string());
            return Ok(());
        }
    };
    rep.measure("budget", h.budget() as f64);
    rep.measure("length_bound", h.length_bound());
    let stride = stride.max(1);
    let mut done = 0usize;
    let mut trace = Vec::new();
    audit_hierarchy(&mut h, n, stride, true, rep);
    for e in deletions(items)? {
        let within = done < h.budget();
        match h.delete_edge(e) {
            Ok(()) => {}
            Err(ExpanderError::BudgetExhausted) if !within => {}
            Err(err) => {
                rep.fail("delete", err.to_string());
                return Ok(());
            }
        }
        done += 1;
        let pruned = h.pruned().len() as f64;
        let cap = 8.0 * done as f64 * delta / phi;
        if within {
            rep.tally("pruned_growth", pruned <= cap, || format!("{pruned} pruned after {done} deletions > {cap}"));
            rep.measure_max("max_pruned", pruned);
        } else {
            rep.count("beyond_budget_deletions", 1);
            rep.count("beyond_budget_growth_over", (pruned > cap) as u64);
        }
        trace.push(serde_json::json!({ "edge": e, "within_budget": within, "pruned": h.pruned(), "levels": h.level_sizes() }));
        audit_hierarchy(&mut h, n, stride, within, rep);
    }
    rep.artifact = Some(serde_json::json!({ "trace": trace }));
    rep.count("deletions", done.min(h.budget()) as u64);
    Ok(())
}

/// Queries from every `stride`-th unpruned vertex to all unpruned vertices.
/// Past the budget the guarantees lapse and results only feed counters.
fn audit_hierarchy(h: &mut Hierarchy, n: usize, stride: usize, within: bool, rep: &mut AuditReport) {
    let live: Vec<usize> = (0..n).filter(|&v| !h.is_pruned(v)).collect();
    let bound = h.length_bound();
    for &a in live.iter().step_by(stride) {
        for &b in &live {
            let res = h.query(a, b);
            let ok = match &res {
                Ok(p) => oracle::multigraph_walk_end(h.graph(), a, p) == Ok(b) && p.len() as f64 <= bound,
                Err(_) => false,
            };
            if within {
                rep.tally("queries", ok, || format!("{a}-{b}: {:?} (bound {bound})", res.as_ref().map(|p| p.len())));
                if let Ok(p) = res {
                    rep.measure_max("max_query_len", p.len() as f64);
                }
            } else {
                rep.count("beyond_budget_queries", 1);
                rep.count("beyond_budget_bad_queries", (!ok) as u64);
            }
        }
    }
}
