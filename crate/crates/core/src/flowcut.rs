//! Maximum multicommodity flow by multiplicative weights over a distance
//! oracle, and minimum multicut by region growing on the dual lengths.
//!
//! Dual lengths are dyadic: `x_e = 2^k_e / m`, stored as the exponent. Path
//! lengths are integers in units of `1/m`, so "length at most 1" is
//! "at most `m` units".

use crate::apsp::{ApspError, ApspOptions, ApspSession};
use crate::graph::{EdgeId, UpdateOp, VertexId, Walk, INF};
use crate::params::CoverConsts;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("vertex {0} out of range")]
    UnknownVertex(VertexId),
    #[error("demand pair {0} has equal endpoints")]
    TrivialPair(usize),
    #[error("fractional cut infeasible: pair {pair} at distance {dist} < unit {unit}")]
    InfeasibleFractional { pair: usize, dist: u64, unit: u64 },
    #[error(transparent)]
    Apsp(#[from] ApspError),
}

/// Undirected unit-capacity graph with demand pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FlowInstance {
    pub n: usize,
    pub edges: Vec<(VertexId, VertexId)>,
    pub pairs: Vec<(VertexId, VertexId)>,
}

impl FlowInstance {
    pub fn new(n: usize, edges: Vec<(VertexId, VertexId)>, pairs: Vec<(VertexId, VertexId)>) -> Result<Self, FlowError> {
        for &(a, b) in edges.iter().chain(&pairs) {
            if a >= n || b >= n {
                return Err(FlowError::UnknownVertex(a.max(b)));
            }
        }
        if let Some(i) = pairs.iter().position(|&(s, t)| s == t) {
            return Err(FlowError::TrivialPair(i));
        }
        Ok(FlowInstance { n, edges, pairs })
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }
}

/// `max(1, ceil(log2 m))`.
pub fn log_divisor(m: usize) -> u32 {
    (m.max(1) as u64).next_power_of_two().trailing_zeros().max(1)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RoutedPath {
    pub pair: usize,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    /// Length under `x` when routed, in units of `1/m`.
    pub units: u64,
}

/// Primal and dual state of the MWU loop.
#[derive(Clone, Debug, Serialize)]
pub struct FlowState {
    m: usize,
    /// `x_e = 2^exp[e] / m`; `exp[e]` is also the number of routed paths on `e`.
    exp: Vec<u32>,
    paths: Vec<RoutedPath>,
    sigma: u32,
}

impl FlowState {
    pub fn new(m: usize) -> Self {
        FlowState { m, exp: vec![0; m], paths: Vec::new(), sigma: log_divisor(m) }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn exponent(&self, e: EdgeId) -> u32 {
        self.exp[e]
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exp
    }

    /// `x_e` in units of `1/m`.
    pub fn units(&self, e: EdgeId) -> u64 {
        1u64 << self.exp[e]
    }

    pub fn path_units(&self, edges: &[EdgeId]) -> u64 {
        edges.iter().map(|&e| self.units(e)).sum()
    }

    /// Flow divisor `max(1, ceil(log m))`.
    pub fn divisor(&self) -> u32 {
        self.sigma
    }

    /// Edges at `divisor()` paths are no longer routed through, which keeps
    /// the scaled flow feasible. Such an edge already has `x_e >= 1`.
    pub fn saturated(&self, e: EdgeId) -> bool {
        self.exp[e] >= self.sigma
    }

    pub fn paths(&self) -> &[RoutedPath] {
        &self.paths
    }

    pub fn c1(&self) -> u64 {
        self.paths.len() as u64
    }

    /// `c2 = sum x_e` as `(numerator, m)`.
    pub fn c2(&self) -> (u64, u64) {
        ((0..self.m).map(|e| self.units(e)).sum(), self.m as u64)
    }

    pub fn c2_f64(&self) -> f64 {
        let (a, b) = self.c2();
        if b == 0 {
            0.0
        } else {
            a as f64 / b as f64
        }
    }

    /// `c1 >= c2 - 1`, exactly.
    pub fn weak_duality(&self) -> bool {
        let (a, b) = self.c2();
        self.c1() * b + b >= a
    }

    pub fn usage(&self, e: EdgeId) -> u32 {
        self.exp[e]
    }

    pub fn max_usage(&self) -> u32 {
        self.exp.iter().copied().max().unwrap_or(0)
    }

    /// Every edge carries at most `divisor()` paths, so the flow divided by
    /// the divisor is feasible.
    pub fn scaled_feasible(&self) -> bool {
        self.exp.iter().all(|&u| u <= self.sigma)
    }

    /// Scaled flow value `c1 / divisor` as `(c1, divisor)`.
    pub fn scaled_value(&self) -> (u64, u64) {
        (self.c1(), self.sigma as u64)
    }

    /// Sets `f(P) = 1` and doubles `x_e` on the path. The path must be
    /// simple, unsaturated and of length at most 1.
    pub fn route(&mut self, pair: usize, w: &Walk) -> RoutedPath {
        let units = self.path_units(&w.edges);
        debug_assert!(units <= self.m as u64);
        debug_assert!(w.edges.iter().all(|&e| !self.saturated(e)));
        for &e in &w.edges {
            self.exp[e] += 1;
        }
        let p = RoutedPath { pair, vertices: w.vertices.clone(), edges: w.edges.clone(), units };
        self.paths.push(p.clone());
        p
    }
}

/// Dual lengths `x'_e = len[e] / unit` certified to satisfy every demand
/// constraint.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FractionalCut {
    pub len: Vec<u64>,
    pub unit: u64,
}

impl FractionalCut {
    pub fn value(&self) -> f64 {
        self.len.iter().sum::<u64>() as f64 / self.unit as f64
    }

    /// Checks that every pair is at distance at least `unit`.
    pub fn audit(&self, inst: &FlowInstance) -> Result<(), FlowError> {
        let alive = vec![true; inst.n];
        for (i, &(s, t)) in inst.pairs.iter().enumerate() {
            let d = shortest(inst, &alive, &self.len, s, |_| true, INF).0[t];
            if d < self.unit {
                return Err(FlowError::InfeasibleFractional { pair: i, dist: d, unit: self.unit });
            }
        }
        Ok(())
    }
}

/// Dijkstra over edges passing `keep` between alive vertices; returns
/// distances and parent edges. Vertices beyond `r` stay at `INF`.
fn shortest(
    inst: &FlowInstance,
    alive: &[bool],
    len: &[u64],
    s: VertexId,
    keep: impl Fn(EdgeId) -> bool,
    r: u64,
) -> (Vec<u64>, Vec<Option<EdgeId>>) {
    let adj = adjacency(inst);
    let mut dist = vec![INF; inst.n];
    let mut par = vec![None; inst.n];
    let mut done = vec![false; inst.n];
    let mut pq = BinaryHeap::new();
    dist[s] = 0;
    pq.push(Reverse((0u64, s)));
    while let Some(Reverse((d, v))) = pq.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(w, e) in &adj[v] {
            if !alive[w] || !keep(e) {
                continue;
            }
            let nd = d + len[e];
            if nd < dist[w] && nd <= r {
                dist[w] = nd;
                par[w] = Some(e);
                pq.push(Reverse((nd, w)));
            }
        }
    }
    (dist, par)
}

fn adjacency(inst: &FlowInstance) -> Vec<Vec<(VertexId, EdgeId)>> {
    let mut adj = vec![Vec::new(); inst.n];
    for (e, &(a, b)) in inst.edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    adj
}

fn trace(inst: &FlowInstance, par: &[Option<EdgeId>], s: VertexId, t: VertexId) -> Walk {
    let mut vertices = vec![t];
    let mut edges = Vec::new();
    let mut v = t;
    while v != s {
        let e = par[v].expect("reached");
        let (a, b) = inst.edges[e];
        v = if a == v { b } else { a };
        edges.push(e);
        vertices.push(v);
    }
    vertices.reverse();
    edges.reverse();
    Walk { vertices, edges, len: 0 }
}

/// Removes cycles from a walk, keeping the first visit of each vertex.
pub fn simplify(w: &Walk) -> Walk {
    let mut pos: std::collections::HashMap<VertexId, usize> = std::collections::HashMap::new();
    let mut vertices: Vec<VertexId> = Vec::new();
    let mut edges: Vec<EdgeId> = Vec::new();
    for (i, &v) in w.vertices.iter().enumerate() {
        if let Some(&p) = pos.get(&v) {
            for u in vertices.drain(p + 1..) {
                pos.remove(&u);
            }
            edges.truncate(p);
        } else {
            if i > 0 {
                edges.push(w.edges[i - 1]);
            }
            pos.insert(v, vertices.len());
            vertices.push(v);
        }
    }
    Walk { vertices, edges, len: 0 }
}

pub fn is_simple(w: &Walk) -> bool {
    let mut seen = std::collections::HashSet::new();
    w.vertices.iter().all(|v| seen.insert(*v))
}

/// A distance oracle for the MWU loop: hands out paths of length at most 1
/// until every demand pair is certified far.
pub trait PathOracle {
    fn next(&mut self, inst: &FlowInstance, state: &FlowState) -> Result<Option<(usize, Walk)>, FlowError>;

    /// Called after `x_e` doubled for each edge of a routed path.
    fn doubled(&mut self, state: &FlowState, edges: &[EdgeId]) -> Result<(), FlowError>;

    /// Lower bound, in units of `1/m`, on every demand distance once
    /// `next` returned `None`. At most `m`.
    fn lower(&self, inst: &FlowInstance) -> u64;

    /// Worst-case stretch the oracle is configured for.
    fn alpha_config(&self) -> u64;
}

/// Exact Dijkstra over the current lengths.
#[derive(Debug, Default)]
pub struct ExactOracle {
    explored: Vec<bool>,
    pub dijkstra_runs: u64,
}

impl PathOracle for ExactOracle {
    fn next(&mut self, inst: &FlowInstance, state: &FlowState) -> Result<Option<(usize, Walk)>, FlowError> {
        self.explored.resize(inst.k(), false);
        let alive = vec![true; inst.n];
        let len: Vec<u64> = (0..inst.m()).map(|e| state.units(e)).collect();
        let limit = inst.m() as u64;
        for (i, &(s, t)) in inst.pairs.iter().enumerate() {
            if self.explored[i] {
                continue;
            }
            self.dijkstra_runs += 1;
            let (dist, par) = shortest(inst, &alive, &len, s, |e| !state.saturated(e), limit);
            if dist[t] <= limit {
                return Ok(Some((i, trace(inst, &par, s, t))));
            }
            self.explored[i] = true;
        }
        Ok(None)
    }

    fn doubled(&mut self, _: &FlowState, _: &[EdgeId]) -> Result<(), FlowError> {
        Ok(())
    }

    fn lower(&self, inst: &FlowInstance) -> u64 {
        inst.m() as u64
    }

    fn alpha_config(&self) -> u64 {
        1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseRecord {
    pub phase: usize,
    /// `alpha_j` saturated at `u64::MAX`.
    pub alpha_j: u64,
    /// Additive copy length, in units of `1/m`.
    pub additive: u64,
    pub routed: u64,
    pub path_queries: u64,
    /// Largest `|E(P)| / (2 alpha* L_{j+1})` over the phase's routed paths,
    /// as `(|E(P)|, 2 alpha* L_{j+1})`.
    pub worst_hops: (u64, u64),
    /// Exponents of `x` when the phase ended.
    pub exps: Vec<u32>,
}

/// APSP-backed oracle run in phases `0..=t`, `t = ceil(1/eps)`. Phase `j`
/// works on the copy graph `G_j` where edge `e` has one copy per unused
/// doubling, of length `2^i + a_j` units; the lowest copy is deleted when
/// `x_e` doubles. The last phase has `a_t = 0`, so `G_t` carries exactly the
/// current lengths of the unsaturated edges, and certifies the bound.
pub struct PhasedOracle {
    eps: f64,
    opts: ApspOptions,
    t: usize,
    phase: usize,
    session: Option<ApspSession>,
    /// Live copies of each edge in `G_j`, lowest first.
    copies: Vec<Vec<EdgeId>>,
    copy_of: Vec<EdgeId>,
    explored: Vec<bool>,
    lower: Vec<u64>,
    alpha_star: u64,
    additive: u64,
    cap: u64,
    hop_bound: u64,
    current: PhaseRecord,
    pub records: Vec<PhaseRecord>,
}

fn sat_pow(b: u64, e: u64) -> u64 {
    (0..e).fold(1u64, |a, _| a.saturating_mul(b))
}

impl PhasedOracle {
    pub fn new(eps: f64, opts: ApspOptions) -> Self {
        let t = (1.0 / eps).ceil().max(1.0) as usize;
        PhasedOracle {
            eps,
            opts,
            t,
            phase: 0,
            session: None,
            copies: Vec::new(),
            copy_of: Vec::new(),
            explored: Vec::new(),
            lower: Vec::new(),
            alpha_star: 1,
            additive: 0,
            cap: 0,
            hop_bound: 0,
            current: PhaseRecord { phase: 0, alpha_j: 1, additive: 0, routed: 0, path_queries: 0, worst_hops: (0, 1), exps: vec![] },
            records: Vec::new(),
        }
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn num_phases(&self) -> usize {
        self.t + 1
    }

    pub fn alpha_star(&self) -> u64 {
        self.alpha_star
    }

    /// `L_j = ceil(m^(j eps))`.
    pub fn l(&self, m: usize, j: usize) -> u64 {
        (m.max(1) as f64).powf(j as f64 * self.eps).ceil() as u64
    }

    fn start_phase(&mut self, inst: &FlowInstance, state: &FlowState) -> Result<(), FlowError> {
        let m = inst.m();
        let sigma = state.divisor();
        let w = (m * sigma as usize + inst.n) as u64;
        // answers are within twice the session's stretch parameter
        self.alpha_star = 2 * CoverConsts::new(1, w.max(2), self.opts.kappa).flag_dist();
        let j = self.phase as u64;
        let alpha_j = sat_pow(self.alpha_star, 2 * j);
        let l_next = self.l(m, self.phase + 1);
        if self.phase < self.t {
            let den = 2u64.saturating_mul(self.alpha_star).saturating_mul(alpha_j).saturating_mul(l_next);
            self.additive = (m as u64).div_ceil(den).max(1);
            self.cap = m as u64 / alpha_j;
            self.hop_bound = den;
        } else {
            self.additive = 0;
            self.cap = m as u64;
            self.hop_bound = u64::MAX;
        }
        let mut edges = Vec::new();
        self.copies = vec![Vec::new(); m];
        self.copy_of.clear();
        for e in 0..m {
            let (a, b) = inst.edges[e];
            for i in state.exponent(e)..sigma {
                self.copies[e].push(edges.len());
                self.copy_of.push(e);
                edges.push((a, b, (1u64 << i) + self.additive));
            }
        }
        self.session = Some(ApspSession::general(inst.n, &edges, self.opts.clone())?);
        self.explored = vec![false; inst.k()];
        self.lower = vec![INF; inst.k()];
        self.current = PhaseRecord {
            phase: self.phase,
            alpha_j,
            additive: self.additive,
            routed: 0,
            path_queries: 0,
            worst_hops: (0, self.hop_bound),
            exps: vec![],
        };
        log::debug!("flow phase {} additive {} cap {}", self.phase, self.additive, self.cap);
        Ok(())
    }

    fn end_phase(&mut self, state: &FlowState) {
        let mut rec = self.current.clone();
        rec.exps = state.exponents().to_vec();
        self.records.push(rec);
    }
}

impl PathOracle for PhasedOracle {
    fn next(&mut self, inst: &FlowInstance, state: &FlowState) -> Result<Option<(usize, Walk)>, FlowError> {
        if self.session.is_none() {
            self.start_phase(inst, state)?;
        }
        loop {
            for (i, &(s, t)) in inst.pairs.iter().enumerate() {
                if self.explored[i] {
                    continue;
                }
                let sess = self.session.as_mut().unwrap();
                let est = match sess.dist_query(s, t) {
                    Ok(est) => est,
                    Err(ApspError::Disconnected(..)) => {
                        self.explored[i] = true;
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                if est.lower > self.cap {
                    self.explored[i] = true;
                    self.lower[i] = est.lower;
                    continue;
                }
                self.current.path_queries += 1;
                let p = sess.shortest_path_query(s, t)?;
                let mut host = Walk { vertices: p.vertices.clone(), edges: p.edges.iter().map(|&c| self.copy_of[c]).collect(), len: 0 };
                host = simplify(&host);
                host.len = state.path_units(&host.edges);
                let ok = if self.phase < self.t { p.len <= self.cap } else { host.len <= self.cap };
                if ok {
                    let hops = p.edges.len() as u64;
                    let (wh, wb) = self.current.worst_hops;
                    if (hops as u128) * (wb as u128) > (wh as u128) * (self.hop_bound as u128) {
                        self.current.worst_hops = (hops, self.hop_bound);
                    }
                    self.current.routed += 1;
                    return Ok(Some((i, host)));
                }
                self.explored[i] = true;
                self.lower[i] = est.lower;
            }
            self.end_phase(state);
            if self.phase == self.t {
                return Ok(None);
            }
            self.phase += 1;
            self.start_phase(inst, state)?;
        }
    }

    fn doubled(&mut self, _: &FlowState, edges: &[EdgeId]) -> Result<(), FlowError> {
        let sess = self.session.as_mut().expect("phase started");
        for &e in edges {
            if !self.copies[e].is_empty() {
                let c = self.copies[e].remove(0);
                sess.apply(&UpdateOp::DeleteEdge(c))?;
            }
        }
        Ok(())
    }

    fn lower(&self, inst: &FlowInstance) -> u64 {
        self.lower.iter().copied().min().unwrap_or(INF).min(inst.m() as u64).max(1)
    }

    fn alpha_config(&self) -> u64 {
        self.alpha_star
    }
}

/// Which oracle drives the MWU loop.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
pub enum OracleChoice {
    /// Phased APSP-backed oracle.
    #[default]
    Apsp,
    /// Plain Dijkstra, stretch 1.
    Exact,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowConfig {
    pub eps: f64,
    pub oracle: OracleChoice,
    pub apsp: ApspOptions,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { eps: 0.5, oracle: OracleChoice::Apsp, apsp: ApspOptions { kappa: Some(1.0), ..ApspOptions::default() } }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowOutcome {
    pub state: FlowState,
    /// `x' = alpha * x` as integer lengths over a unit.
    pub dual: FractionalCut,
    /// Measured stretch `m / lower` as `(m, lower)`.
    pub alpha_measured: (u64, u64),
    pub alpha_config: u64,
    pub phases: Vec<PhaseRecord>,
}

/// Runs the MWU loop with `oracle` until it certifies every pair far.
pub fn mwu_with(inst: &FlowInstance, oracle: &mut dyn PathOracle) -> Result<(FlowState, FractionalCut, u64), FlowError> {
    let mut state = FlowState::new(inst.m());
    while let Some((i, w)) = oracle.next(inst, &state)? {
        let p = state.route(i, &w);
        oracle.doubled(&state, &p.edges)?;
    }
    let lower = if inst.m() == 0 { 1 } else { oracle.lower(inst) };
    let dual = FractionalCut { len: (0..inst.m()).map(|e| state.units(e)).collect(), unit: lower };
    Ok((state, dual, lower))
}

pub fn mwu_flow(inst: &FlowInstance, cfg: &FlowConfig) -> Result<FlowOutcome, FlowError> {
    let (state, dual, lower, alpha_config, phases) = match cfg.oracle {
        OracleChoice::Exact => {
            let mut o = ExactOracle::default();
            let (s, d, l) = mwu_with(inst, &mut o)?;
            (s, d, l, o.alpha_config(), Vec::new())
        }
        OracleChoice::Apsp => {
            let mut o = PhasedOracle::new(cfg.eps, cfg.apsp.clone());
            let (s, d, l) = mwu_with(inst, &mut o)?;
            (s, d, l, o.alpha_config(), o.records)
        }
    };
    Ok(FlowOutcome { alpha_measured: (inst.m().max(1) as u64, lower), state, dual, alpha_config, phases })
}

/// Constant of the rounding bound `|E'| <= C_ROUND ln(k+1) F`.
pub const C_ROUND: f64 = 6.0;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Region {
    pub source: VertexId,
    /// Radius in units of `x'`.
    pub radius: f64,
    pub vertices: Vec<VertexId>,
    pub cut: Vec<EdgeId>,
}

/// Region growing: repeatedly grow a ball of radius below 1/3 around a
/// still-connected source, at the first radius whose boundary is at most
/// `3 ln(k+1)` times its volume plus `F/k`, and cut it off.
pub fn round_multicut(inst: &FlowInstance, x: &FractionalCut) -> Result<(Vec<EdgeId>, Vec<Region>), FlowError> {
    x.audit(inst)?;
    let k = inst.k().max(1) as u64;
    let c = 3.0 * ((k + 1) as f64).ln();
    // scale by 3k so the radius cap and F/k are integers
    let len: Vec<u64> = x.len.iter().map(|&l| l * 3 * k).collect();
    let unit = x.unit * 3 * k;
    let cap = unit / 3;
    let base: u64 = 3 * x.len.iter().sum::<u64>();
    let adj = adjacency(inst);
    let mut alive = vec![true; inst.n];
    let mut cut = Vec::new();
    let mut regions = Vec::new();
    loop {
        let open = inst.pairs.iter().find(|&&(s, t)| {
            alive[s] && alive[t] && shortest(inst, &alive, &len, s, |_| true, INF).0[t] < INF
        });
        let Some(&(s, _)) = open else { break };
        let (dist, _) = shortest(inst, &alive, &len, s, |_| true, cap.saturating_sub(1));
        let mut order: Vec<VertexId> = (0..inst.n).filter(|&v| alive[v] && dist[v] < cap).collect();
        order.sort_by_key(|&v| (dist[v], v));
        let mut best: Option<(f64, usize, u64)> = None;
        let mut chosen = None;
        let mut j = 0;
        while j < order.len() {
            let dj = dist[order[j]];
            while j < order.len() && dist[order[j]] == dj {
                j += 1;
            }
            let next = order.get(j).map_or(cap, |&v| dist[v].min(cap));
            let r = next - 1;
            let inside = |v: VertexId| alive[v] && dist[v] <= dj;
            let (mut bound, mut vol) = (0u64, base);
            for &u in &order[..j] {
                for &(w, e) in &adj[u] {
                    if !alive[w] {
                        continue;
                    }
                    if inside(w) {
                        if u < w {
                            vol += len[e];
                        }
                    } else {
                        bound += 1;
                        vol += (r - dist[u]).min(len[e]);
                    }
                }
            }
            let ratio = (bound * unit) as f64 / vol as f64;
            if (bound * unit) as f64 <= c * vol as f64 {
                chosen = Some((j, r));
                break;
            }
            if best.is_none_or(|(b, ..)| ratio < b) {
                best = Some((ratio, j, r));
            }
        }
        let (j, r) = chosen.unwrap_or_else(|| {
            let (_, j, r) = best.expect("source is in its own ball");
            log::warn!("region growing from {s}: no radius met the volume bound");
            (j, r)
        });
        let ball: Vec<VertexId> = order[..j].to_vec();
        let mut rcut = Vec::new();
        for &u in &ball {
            for &(w, e) in &adj[u] {
                if alive[w] && dist[w] > r {
                    rcut.push(e);
                }
            }
        }
        rcut.sort_unstable();
        rcut.dedup();
        for &u in &ball {
            alive[u] = false;
        }
        cut.extend(&rcut);
        regions.push(Region { source: s, radius: r as f64 / unit as f64, vertices: ball, cut: rcut });
    }
    cut.sort_unstable();
    Ok((cut, regions))
}

/// Whether removing `cut` disconnects every pair.
pub fn separates(inst: &FlowInstance, cut: &[EdgeId]) -> bool {
    let mut parent: Vec<usize> = (0..inst.n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let removed: std::collections::HashSet<EdgeId> = cut.iter().copied().collect();
    for (e, &(a, b)) in inst.edges.iter().enumerate() {
        if !removed.contains(&e) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    inst.pairs.iter().all(|&(s, t)| find(&mut parent, s) != find(&mut parent, t))
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowAudit {
    pub weak_duality: bool,
    pub scaled_feasible: bool,
    pub paths_valid: bool,
    pub dual_feasible: bool,
    pub separated: bool,
    pub cut_bound: bool,
}

impl FlowAudit {
    pub fn all(&self) -> bool {
        self.weak_duality && self.scaled_feasible && self.paths_valid && self.dual_feasible && self.separated && self.cut_bound
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    pub c1: u64,
    /// `c2 = c2_num / m`.
    pub c2_num: u64,
    pub m: usize,
    pub divisor: u32,
    pub scaled_value: f64,
    pub max_usage: u32,
    pub alpha_config: u64,
    pub alpha_measured: f64,
    /// Value of `x'`.
    pub dual_value: f64,
    pub dual: FractionalCut,
    pub paths: Vec<RoutedPath>,
    pub multicut: Vec<EdgeId>,
    pub regions: usize,
    pub phases: Vec<PhaseRecord>,
    pub audit: FlowAudit,
}

fn path_valid(inst: &FlowInstance, p: &RoutedPath) -> bool {
    let (s, t) = inst.pairs[p.pair];
    let ends = p.vertices.first() == Some(&s) && p.vertices.last() == Some(&t);
    let steps = p.edges.iter().enumerate().all(|(i, &e)| {
        let (a, b) = inst.edges[e];
        let (u, v) = (p.vertices[i], p.vertices[i + 1]);
        (a, b) == (u, v) || (a, b) == (v, u)
    });
    let w = Walk { vertices: p.vertices.clone(), edges: p.edges.clone(), len: 0 };
    ends && p.edges.len() + 1 == p.vertices.len() && steps && is_simple(&w) && p.units <= inst.m() as u64
}

/// Flow, dual certificate and multicut with their audits.
pub fn solve(inst: &FlowInstance, cfg: &FlowConfig) -> Result<FlowReport, FlowError> {
    let out = mwu_flow(inst, cfg)?;
    let st = &out.state;
    let dual_feasible = out.dual.audit(inst).is_ok();
    let (multicut, regions) = if dual_feasible { round_multicut(inst, &out.dual)? } else { (Vec::new(), Vec::new()) };
    let f = out.dual.value();
    let k = inst.k().max(1) as f64;
    let audit = FlowAudit {
        weak_duality: st.weak_duality(),
        scaled_feasible: st.scaled_feasible(),
        paths_valid: st.paths().iter().all(|p| path_valid(inst, p)),
        dual_feasible,
        separated: dual_feasible && separates(inst, &multicut),
        cut_bound: multicut.len() as f64 <= C_ROUND * (k + 1.0).ln() * f + 1e-9,
    };
    Ok(FlowReport {
        c1: st.c1(),
        c2_num: st.c2().0,
        m: inst.m(),
        divisor: st.divisor(),
        scaled_value: st.c1() as f64 / st.divisor() as f64,
        max_usage: st.max_usage(),
        alpha_config: out.alpha_config,
        alpha_measured: out.alpha_measured.0 as f64 / out.alpha_measured.1 as f64,
        dual_value: f,
        dual: out.dual.clone(),
        paths: st.paths().to_vec(),
        multicut,
        regions: regions.len(),
        phases: out.phases,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisor_values() {
        assert_eq!(log_divisor(1), 1);
        assert_eq!(log_divisor(2), 1);
        assert_eq!(log_divisor(3), 2);
        assert_eq!(log_divisor(8), 3);
        assert_eq!(log_divisor(9), 4);
    }

    #[test]
    fn simplify_drops_cycles() {
        let w = Walk { vertices: vec![0, 1, 2, 1, 3], edges: vec![10, 11, 11, 12], len: 0 };
        let s = simplify(&w);
        assert_eq!(s.vertices, vec![0, 1, 3]);
        assert_eq!(s.edges, vec![10, 12]);
        let w = Walk { vertices: vec![0, 1, 0, 2], edges: vec![5, 6, 7], len: 0 };
        assert_eq!(simplify(&w).edges, vec![7]);
    }
}
