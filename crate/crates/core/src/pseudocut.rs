//! Balanced pseudocuts: edge sets whose removal leaves every `d_hat`-ball of
//! a cluster with at most `W(C)/rho` weight, shrunk until the cut edges can
//! be routed as an expander.

use crate::cover::Cluster;
use crate::expander::{certify, cut_matching, matching_player, CmgConfig, Expander, Multigraph, Routing};
use crate::graph::{DynGraph, EdgeId, VertexId, Walk, INF};
use crate::params::log2g;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PseudocutError {
    #[error("vertex weight {max} exceeds W/(4 rho) = {limit}")]
    WeightTooConcentrated { max: u64, limit: f64 },
    #[error("ball around {vertex} weighs {weight}, limit {limit}")]
    InvalidPseudocutInput { vertex: VertexId, weight: u64, limit: u64 },
}

/// `2^30 * d * log^10 w_hat * scale`, saturating.
pub fn default_d_hat(d: u64, w_hat: u64, scale: f64) -> u64 {
    let v = 2f64.powi(30) * d as f64 * log2g(w_hat as f64).powi(10) * scale;
    if v >= (INF / 64) as f64 {
        INF / 64
    } else {
        (v.ceil() as u64).max(1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudocutConfig {
    pub eps: f64,
    pub w_hat: u64,
    pub d_hat: u64,
    /// Routing distance is `d2_factor * d_hat`.
    pub d2_factor: u64,
    /// Congestion bound for the witness routing; `None` derives it from `k`.
    pub eta: Option<u64>,
    pub cmg: CmgConfig,
    /// Below this many cut edges the witness is a single edge.
    pub small_k: Option<usize>,
    /// Re-check the input pseudocut before every step.
    pub audit: bool,
}

impl PseudocutConfig {
    pub fn new(eps: f64, w_hat: u64, d_hat: u64) -> Self {
        PseudocutConfig { eps, w_hat, d_hat, d2_factor: 40, eta: None, cmg: CmgConfig::default(), small_k: None, audit: cfg!(debug_assertions) }
    }

    pub fn rho(&self) -> f64 {
        (self.w_hat.max(1) as f64).powf(self.eps)
    }

    pub fn d2(&self) -> u64 {
        self.d_hat.saturating_mul(self.d2_factor).min(INF / 8)
    }

    pub fn small_k(&self) -> usize {
        self.small_k.unwrap_or_else(|| 2f64.powf(1.0 / self.eps).min(4.0).ceil() as usize)
    }

    /// `16 * d2 * ceil(rho) * ceil(log k)^ceil(2/eps)`, saturating.
    pub fn eta_for(&self, k: usize) -> u64 {
        if let Some(e) = self.eta {
            return e;
        }
        let logk = (k.max(2) as f64).log2().ceil();
        let v = 16.0 * self.d2() as f64 * self.rho().ceil() * logk.powf((2.0 / self.eps).ceil());
        if v >= (INF / 8) as f64 {
            INF / 8
        } else {
            v as u64
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Pseudocut {
    pub edges: BTreeSet<EdgeId>,
    pub d_hat: u64,
    pub rho: f64,
    /// `W(C)` when the cut was computed.
    pub weight: u64,
}

impl Pseudocut {
    /// Largest ball weight allowed.
    pub fn limit(&self) -> u64 {
        (self.weight as f64 / self.rho).floor() as u64
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn vertex_weight(g: &DynGraph, v: VertexId) -> u64 {
    u64::from(g.is_regular(v))
}

/// Members in Dijkstra order, component by component.
fn traversal_order(g: &DynGraph, c: &Cluster) -> Vec<VertexId> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for &s in &c.members {
        if seen.contains(&s) {
            continue;
        }
        let mut pq = BTreeSet::new();
        pq.insert((0u64, s));
        while let Some((d, v)) = pq.pop_first() {
            if !seen.insert(v) {
                continue;
            }
            order.push(v);
            for e in g.incident(v) {
                let ed = g.edge(e);
                let u = ed.other(v);
                if c.contains(u) && !seen.contains(&u) {
                    pq.insert((d + ed.len, u));
                }
            }
        }
    }
    order
}

/// Cuts the traversal order into consecutive parts of weight at most
/// `W(C)/rho` and returns the edges between parts. `rho <= 1` gives the
/// empty cut.
pub fn initial_pseudocut(g: &DynGraph, c: &Cluster, rho: f64, d_hat: u64) -> Result<Pseudocut, PseudocutError> {
    let w = c.weight;
    let empty = Pseudocut { edges: BTreeSet::new(), d_hat, rho, weight: w };
    if rho <= 1.0 {
        return Ok(empty);
    }
    let max = c.members.iter().map(|&v| vertex_weight(g, v)).max().unwrap_or(0);
    let limit = w as f64 / (4.0 * rho);
    if max as f64 > limit {
        return Err(PseudocutError::WeightTooConcentrated { max, limit });
    }
    let cap = empty.limit();
    let mut part = BTreeMap::new();
    let (mut idx, mut load) = (0usize, 0u64);
    for v in traversal_order(g, c) {
        let wv = vertex_weight(g, v);
        if load + wv > cap {
            idx += 1;
            load = 0;
        }
        load += wv;
        part.insert(v, idx);
    }
    let edges = c.edges(g).filter(|&e| part[&g.edge(e).a] != part[&g.edge(e).b]).collect();
    Ok(Pseudocut { edges, ..empty })
}

/// Weight of the `r`-ball around `x` in `C` minus `cut`.
pub fn ball_weight(g: &DynGraph, c: &Cluster, cut: &BTreeSet<EdgeId>, x: VertexId, r: u64) -> u64 {
    let mut dist: BTreeMap<VertexId, u64> = BTreeMap::new();
    let mut pq = BTreeSet::new();
    pq.insert((0u64, x));
    let mut total = 0;
    while let Some((d, v)) = pq.pop_first() {
        if dist.contains_key(&v) {
            continue;
        }
        dist.insert(v, d);
        total += vertex_weight(g, v);
        for e in g.incident(v) {
            if cut.contains(&e) {
                continue;
            }
            let ed = g.edge(e);
            let u = ed.other(v);
            if c.contains(u) && !dist.contains_key(&u) && d.saturating_add(ed.len) <= r {
                pq.insert((d + ed.len, u));
            }
        }
    }
    total
}

/// Checks every ball of the cluster against the pseudocut limit.
pub fn audit_pseudocut(g: &DynGraph, c: &Cluster, p: &Pseudocut) -> Result<(), PseudocutError> {
    let limit = p.limit();
    for &x in &c.members {
        let weight = ball_weight(g, c, &p.edges, x, p.d_hat);
        if weight > limit {
            return Err(PseudocutError::InvalidPseudocutInput { vertex: x, weight, limit });
        }
    }
    Ok(())
}

/// `C` with every cut edge `e = (a, b)` replaced by `a - t_e - b`; both
/// halves keep the length of `e`.
#[derive(Clone, Debug)]
pub struct Subdivided {
    pub graph: DynGraph,
    /// Host vertex of each local vertex; `None` for terminals.
    pub host: Vec<Option<VertexId>>,
    pub local: BTreeMap<VertexId, VertexId>,
    /// Terminal `t_e` of each cut edge.
    pub terminal: BTreeMap<EdgeId, VertexId>,
    /// Host edge of each local edge.
    pub origin: Vec<EdgeId>,
}

impl Subdivided {
    pub fn new(g: &DynGraph, c: &Cluster, cut: &BTreeSet<EdgeId>) -> Self {
        let mut host: Vec<Option<VertexId>> = c.members.iter().map(|&v| Some(v)).collect();
        let local: BTreeMap<VertexId, VertexId> = c.members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut terminal = BTreeMap::new();
        for &e in cut {
            terminal.insert(e, host.len());
            host.push(None);
        }
        let mut edges = Vec::new();
        let mut origin = Vec::new();
        let mut dmax = 1;
        for e in c.edges(g) {
            let ed = g.edge(e);
            let (a, b) = (local[&ed.a], local[&ed.b]);
            dmax = dmax.max(ed.len);
            match terminal.get(&e) {
                Some(&t) => {
                    edges.push((a, t, ed.len));
                    edges.push((t, b, ed.len));
                    origin.extend([e, e]);
                }
                None => {
                    edges.push((a, b, ed.len));
                    origin.push(e);
                }
            }
        }
        let graph = DynGraph::general(host.len(), &edges, dmax).expect("cluster edges are valid");
        Subdivided { graph, host, local, terminal, origin }
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.host[v].is_none()
    }

    /// Host walk obtained by collapsing every pass through a terminal. A
    /// terminal at either end is dropped with its half edge.
    pub fn to_host(&self, g: &DynGraph, w: &Walk) -> Walk {
        let mut lo = 0;
        let mut hi = w.edges.len();
        if self.is_terminal(w.vertices[0]) && hi > 0 {
            lo = 1;
        }
        if self.is_terminal(*w.vertices.last().unwrap()) && hi > lo {
            hi -= 1;
        }
        let start = self.host[w.vertices[lo]].expect("walk is not a lone terminal");
        let mut out = Walk::single(start);
        let mut j = lo;
        while j < hi {
            let next = w.vertices[j + 1];
            if self.is_terminal(next) {
                let back = w.vertices[j + 2];
                if back != w.vertices[j] {
                    let e = self.origin[w.edges[j]];
                    out.vertices.push(self.host[back].unwrap());
                    out.edges.push(e);
                    out.len += g.edge(e).len;
                }
                j += 2;
            } else {
                let e = self.origin[w.edges[j]];
                out.vertices.push(self.host[next].unwrap());
                out.edges.push(e);
                out.len += g.edge(e).len;
                j += 1;
            }
        }
        out
    }
}

/// An expander over a subset of the cut edges, embedded into the
/// subdivided cluster.
#[derive(Clone, Debug)]
pub struct GoodWitness {
    /// Expander vertex `i` is the terminal of `edges[i]`.
    pub edges: Vec<EdgeId>,
    pub expander: Expander,
    /// Local walk in `sub` per expander edge slot.
    pub paths: Vec<Walk>,
    pub sub: Subdivided,
    pub eta: u64,
    pub d2: u64,
    pub congestion: u64,
    pub max_len: u64,
}

impl GoodWitness {
    fn single(sub: Subdivided, e: EdgeId, eta: u64, d2: u64) -> Self {
        GoodWitness {
            edges: vec![e],
            expander: Expander::new(Multigraph::new(1)),
            paths: Vec::new(),
            sub,
            eta,
            d2,
            congestion: 0,
            max_len: 0,
        }
    }

    pub fn terminals(&self) -> Vec<VertexId> {
        self.edges.iter().map(|e| self.sub.terminal[e]).collect()
    }

    /// Edge usage of every local edge, recounted from the paths.
    pub fn recount(&self) -> Vec<u64> {
        let mut load = vec![0u64; self.sub.graph.num_edge_slots()];
        for p in &self.paths {
            for &e in &p.edges {
                load[e] += 1;
            }
        }
        load
    }
}

/// Checks walks, endpoints, congestion and lengths of a witness.
pub fn audit_witness(w: &GoodWitness) -> Result<(), String> {
    let x = &w.expander.graph;
    let terms = w.terminals();
    for e in x.live_edges() {
        let p = &w.paths[e];
        let (a, b) = x.endpoints(e);
        if w.sub.graph.walk_length(&p.vertices, &p.edges) != Some(p.len) {
            return Err(format!("path of expander edge {e} is not a walk"));
        }
        let ends = (p.first(), p.last());
        if ends != (terms[a], terms[b]) && ends != (terms[b], terms[a]) {
            return Err(format!("path of expander edge {e} has wrong endpoints"));
        }
        if p.len > w.d2 {
            return Err(format!("path of expander edge {e} has length {} > {}", p.len, w.d2));
        }
    }
    let cong = w.recount().into_iter().max().unwrap_or(0);
    if cong != w.congestion || cong > w.eta {
        return Err(format!("congestion {cong} (recorded {}, bound {})", w.congestion, w.eta));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub enum Step {
    Smaller(Pseudocut),
    Witness(GoodWitness),
}

/// Grows a Dijkstra region from `seeds` while its weight stays within
/// `cap` and returns the prefix maximizing `|cut inside| - |boundary not in
/// cut|`, if positive.
fn grow_region(g: &DynGraph, c: &Cluster, cut: &BTreeSet<EdgeId>, seeds: &[VertexId], cap: u64, radius: u64) -> Option<(i64, Vec<VertexId>)> {
    let mut inside: BTreeSet<VertexId> = BTreeSet::new();
    let mut order = Vec::new();
    let mut pq: BTreeSet<(u64, VertexId)> = seeds.iter().map(|&s| (0, s)).collect();
    let (mut weight, mut gain) = (0u64, 0i64);
    let mut best: Option<(i64, usize)> = None;
    while let Some((d, v)) = pq.pop_first() {
        if inside.contains(&v) {
            continue;
        }
        if weight + vertex_weight(g, v) > cap {
            break;
        }
        weight += vertex_weight(g, v);
        inside.insert(v);
        order.push(v);
        for e in g.incident(v) {
            let ed = g.edge(e);
            let u = ed.other(v);
            if !c.contains(u) {
                continue;
            }
            if inside.contains(&u) {
                // a cut edge moves inside; a non-cut edge leaves the boundary
                gain += 1;
            } else {
                if !cut.contains(&e) {
                    gain -= 1;
                }
                if d.saturating_add(ed.len) <= radius {
                    pq.insert((d + ed.len, u));
                }
            }
        }
        if gain > 0 && best.map_or(true, |(b, _)| gain > b) {
            best = Some((gain, order.len()));
        }
    }
    best.map(|(gain, len)| {
        order.truncate(len);
        (gain, order)
    })
}

/// `(cut minus edges inside R) + boundary of R`.
fn replace_region(g: &DynGraph, c: &Cluster, cut: &BTreeSet<EdgeId>, region: &[VertexId]) -> BTreeSet<EdgeId> {
    let r: BTreeSet<VertexId> = region.iter().copied().collect();
    let mut out: BTreeSet<EdgeId> = cut.iter().copied().filter(|&e| !(r.contains(&g.edge(e).a) && r.contains(&g.edge(e).b))).collect();
    for &v in region {
        for e in g.incident(v) {
            let u = g.edge(e).other(v);
            if c.contains(u) && !r.contains(&u) {
                out.insert(e);
            }
        }
    }
    out
}

/// Finds the best region over the seed groups; earlier groups win ties.
fn best_region(g: &DynGraph, c: &Cluster, p: &Pseudocut, groups: &[Vec<VertexId>]) -> Option<Vec<VertexId>> {
    let radius = p.d_hat.saturating_mul(2);
    let mut best: Option<(i64, Vec<VertexId>)> = None;
    for seeds in groups {
        if let Some((gain, region)) = grow_region(g, c, &p.edges, seeds, p.limit(), radius) {
            if best.as_ref().map_or(true, |(b, _)| gain > *b) {
                best = Some((gain, region));
            }
        }
    }
    best.map(|(_, r)| r)
}

/// Statistics of one shrink step.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StepStats {
    pub cmg_rounds: usize,
    pub fake: usize,
    /// The witness fell back to a single edge.
    pub single: bool,
}

/// One step: route the cut edges as an expander, or replace a region of
/// the cut by its boundary to get a strictly smaller pseudocut.
pub fn shrink_or_witness(g: &DynGraph, c: &Cluster, p: &Pseudocut, cfg: &PseudocutConfig) -> Result<(Step, StepStats), PseudocutError> {
    if cfg.audit {
        audit_pseudocut(g, c, p)?;
    }
    let mut stats = StepStats::default();
    let cut: Vec<EdgeId> = p.edges.iter().copied().collect();
    let k = cut.len();
    let sub = Subdivided::new(g, c, &p.edges);
    let eta = cfg.eta_for(k);
    let d2 = cfg.d2();
    assert!(k > 0, "empty pseudocut has no witness");
    if k < cfg.small_k() {
        stats.single = true;
        return Ok((Step::Witness(GoodWitness::single(sub, cut[0], eta, d2)), stats));
    }
    let terms: Vec<VertexId> = cut.iter().map(|e| sub.terminal[e]).collect();
    let index: BTreeMap<VertexId, usize> = terms.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let mut router = |a: &[usize], b: &[usize]| -> Routing {
        let ta: Vec<VertexId> = a.iter().map(|&i| terms[i]).collect();
        let tb: Vec<VertexId> = b.iter().map(|&i| terms[i]).collect();
        let mut r = matching_player(&sub.graph, &ta, &tb, d2, eta, 0);
        for q in &mut r.paths {
            q.a = index[&q.a];
            q.b = index[&q.b];
        }
        if let Some(rc) = &mut r.cut {
            rc.a = rc.a.iter().filter_map(|v| index.get(v).copied()).collect();
            rc.b = rc.b.iter().filter_map(|v| index.get(v).copied()).collect();
        }
        r
    };
    let res = cut_matching(k, &cfg.cmg, &mut router);
    stats.cmg_rounds = res.rounds;
    stats.fake = res.fake;
    if res.fake > 0 {
        let ends = |ids: &[usize]| -> Vec<VertexId> {
            let mut v: Vec<VertexId> = ids.iter().flat_map(|&i| [g.edge(cut[i]).a, g.edge(cut[i]).b]).collect();
            v.sort();
            v.dedup();
            v
        };
        let mut groups = Vec::new();
        if let Some(f) = &res.failure {
            groups.push(ends(&f.a));
            groups.push(ends(&f.b));
        }
        groups.extend((0..k).map(|i| ends(&[i])));
        if let Some(region) = best_region(g, c, p, &groups) {
            let edges = replace_region(g, c, &p.edges, &region);
            debug_assert!(edges.len() < k);
            return Ok((Step::Smaller(Pseudocut { edges, ..p.clone() }), stats));
        }
    }
    let kept = res.kept.clone();
    let pos: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut x = Multigraph::new(kept.len());
    let mut paths = Vec::new();
    for e in res.x.live_edges() {
        let (a, b) = res.x.endpoints(e);
        if let (Some(&ia), Some(&ib), Some(w)) = (pos.get(&a), pos.get(&b), res.paths[e].as_ref()) {
            x.add_edge(ia, ib);
            paths.push(if w.first() == terms[a] { w.clone() } else { w.clone().reversed() });
        }
    }
    let cert = certify(&x, &vec![true; x.n()]);
    if kept.len() < 2 || cert.phi() <= 0.0 {
        stats.single = true;
        return Ok((Step::Witness(GoodWitness::single(sub, cut[0], eta, d2)), stats));
    }
    let max_degree = x.max_degree();
    let mut w = GoodWitness {
        edges: kept.iter().map(|&i| cut[i]).collect(),
        expander: Expander { graph: x, cert, max_degree },
        paths,
        sub,
        eta,
        d2,
        congestion: 0,
        max_len: 0,
    };
    w.congestion = w.recount().into_iter().max().unwrap_or(0);
    w.max_len = w.paths.iter().map(|p| p.len).max().unwrap_or(0);
    Ok((Step::Witness(w), stats))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PseudocutStats {
    /// Pseudocut size before each step, then the final size.
    pub sizes: Vec<usize>,
    pub cmg_rounds: usize,
    pub single_witness: bool,
}

impl PseudocutStats {
    pub fn iterations(&self) -> usize {
        self.sizes.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug)]
pub struct PseudocutOutcome {
    pub cut: Pseudocut,
    pub witness: Option<GoodWitness>,
    pub stats: PseudocutStats,
}

/// Starts from [`initial_pseudocut`] with `rho = w_hat^eps` and shrinks
/// until a witness is found. An empty cut has no witness.
pub fn find_pseudocut_and_expander(g: &DynGraph, c: &Cluster, cfg: &PseudocutConfig) -> Result<PseudocutOutcome, PseudocutError> {
    let mut p = initial_pseudocut(g, c, cfg.rho(), cfg.d_hat)?;
    let mut stats = PseudocutStats::default();
    loop {
        stats.sizes.push(p.len());
        if p.is_empty() {
            return Ok(PseudocutOutcome { cut: p, witness: None, stats });
        }
        let (step, s) = shrink_or_witness(g, c, &p, cfg)?;
        stats.cmg_rounds += s.cmg_rounds;
        match step {
            Step::Smaller(next) => {
                assert!(next.len() < p.len(), "pseudocut did not shrink");
                p = next;
            }
            Step::Witness(w) => {
                stats.single_witness = s.single;
                return Ok(PseudocutOutcome { cut: p, witness: Some(w), stats });
            }
        }
    }
}
