//! Decremental approximate all-pairs shortest paths: one cover session per
//! distance scale `D_i = 2^i`, queried by binary search over the scales.

use crate::cluster::{full_factory, AlgSlow, GoodParams};
use crate::cover::{CoverError, NcSession, OracleFactory, QueryError, SessionOptions};
use crate::graph::{Change, DynGraph, EdgeId, GraphError, UpdateOp, VertexId, Walk};
use crate::params::CoverConsts;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApspError {
    #[error("no scale connects {0} and {1}")]
    Disconnected(VertexId, VertexId),
    #[error("{0} is not a query vertex")]
    NotQueryVertex(VertexId),
    #[error("update not supported on this front end: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OracleKind {
    /// Good-cluster algorithm with fallback to the slow algorithm.
    #[default]
    Full,
    Slow,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApspOptions {
    pub kappa: Option<f64>,
    pub eps: f64,
    pub oracle: OracleKind,
    pub check_budget: bool,
    pub check_flags: bool,
}

impl Default for ApspOptions {
    fn default() -> Self {
        ApspOptions { kappa: None, eps: 0.5, oracle: OracleKind::Full, check_budget: false, check_flags: true }
    }
}

impl ApspOptions {
    fn factory(&self, w_hat: u64) -> OracleFactory {
        match self.oracle {
            OracleKind::Full => full_factory(GoodParams::new(self.eps, w_hat)),
            OracleKind::Slow => Box::new(|g, c, k| Box::new(AlgSlow::new(g, c, k.flag_dist()))),
        }
    }
}

/// One distance scale: its own copy of the host restricted to edges of
/// length at most the scale's threshold.
struct Scale {
    session: NcSession,
    vmap: Vec<Option<VertexId>>,
    emap: Vec<Option<EdgeId>>,
    vback: Vec<VertexId>,
    eback: Vec<EdgeId>,
}

impl Scale {
    fn build(host: &DynGraph, d: u64, opts: &ApspOptions, w: u64) -> Result<Self, ApspError> {
        let mut g = DynGraph::new(d, true);
        let mut vmap = vec![None; host.num_slots()];
        let mut vback = Vec::new();
        for v in host.vertices() {
            vmap[v] = Some(g.add_vertex(host.kind(v)));
            vback.push(v);
        }
        let mut emap = vec![None; host.num_edge_slots()];
        let mut eback = Vec::new();
        for (e, a, b, len) in host.edge_list() {
            if len <= d {
                emap[e] = Some(g.add_edge(vmap[a].unwrap(), vmap[b].unwrap(), len)?);
                eback.push(e);
            }
        }
        let consts = CoverConsts::new(d, w, opts.kappa);
        let sopts = SessionOptions { check_budget: opts.check_budget, check_flags: opts.check_flags };
        let session = NcSession::new(g, consts, opts.factory(w.max(2)), sopts)?;
        Ok(Scale { session, vmap, emap, vback, eback })
    }

    /// Mirrors a host change; `host` already reflects it.
    fn apply(&mut self, host: &DynGraph, ch: &Change) -> Result<(), ApspError> {
        self.vmap.resize(host.num_slots(), None);
        self.emap.resize(host.num_edge_slots(), None);
        match ch {
            Change::EdgeDeleted { e, .. } => {
                if let Some(le) = self.emap[*e].take() {
                    self.session.apply(&UpdateOp::DeleteEdge(le))?;
                }
            }
            Change::VertexDeleted(v) => {
                if let Some(lv) = self.vmap[*v].take() {
                    if self.session.graph().degree(lv) == 0 {
                        self.session.apply(&UpdateOp::DeleteIsolatedVertex(lv))?;
                    }
                }
            }
            Change::Split { from, new, copies } => {
                let (Some(lu), local) = (self.vmap[*from], copies.iter().filter_map(|&(o, _)| self.emap[o]).collect::<Vec<_>>()) else {
                    return Ok(());
                };
                if local.is_empty() {
                    return Ok(());
                }
                let mut sorted = local.clone();
                sorted.sort();
                let rc = self.session.apply(&UpdateOp::SupernodeSplit { u: lu, edges: sorted })?;
                if let Change::Split { new: lnew, copies: lcopies, .. } = rc.change {
                    self.vmap[*new] = Some(lnew);
                    if self.vback.len() <= lnew {
                        self.vback.resize(lnew + 1, usize::MAX);
                    }
                    self.vback[lnew] = *new;
                    for &(o, c) in copies {
                        let Some(lo) = self.emap[o] else { continue };
                        if let Some(&(_, lc)) = lcopies.iter().find(|&&(x, _)| x == lo) {
                            self.emap[c] = Some(lc);
                            if self.eback.len() <= lc {
                                self.eback.resize(lc + 1, usize::MAX);
                            }
                            self.eback[lc] = c;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn covers(&self, x: VertexId, y: VertexId) -> bool {
        let (Some(lx), Some(ly)) = (self.vmap.get(x).copied().flatten(), self.vmap.get(y).copied().flatten()) else {
            return false;
        };
        self.session.covering(lx).is_some_and(|c| self.session.cluster(c).contains(ly))
    }

    fn path(&self, x: VertexId, y: VertexId) -> Result<Walk, QueryError> {
        let w = self.session.short_path(self.vmap[x].unwrap(), self.vmap[y].unwrap())?;
        Ok(Walk {
            vertices: w.vertices.iter().map(|&v| self.vback[v]).collect(),
            edges: w.edges.iter().map(|&e| self.eback[e]).collect(),
            len: w.len,
        })
    }
}

/// How query vertices and lengths relate to the bipartite host.
#[derive(Clone, Debug)]
enum Front {
    Bipartite,
    /// General graph `G` on `n` vertices with `m` edges. Host regular vertex
    /// `e < m` subdivides edge `e`, `m + v` hangs off supernode `m + n + v` by a
    /// unit edge and stands for `v`.
    General { n: usize, m: usize },
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Estimate {
    pub value: u64,
    /// Certified lower bound: the scale below did not cover the pair.
    pub lower: u64,
    pub scale: usize,
}

pub struct ApspSession {
    host: DynGraph,
    front: Front,
    scales: Vec<Scale>,
    /// Threshold of each scale in host units.
    thresholds: Vec<u64>,
    alpha: u64,
    queries: u64,
}

fn scales_for(bound: u64) -> usize {
    let mut i = 0;
    while (1u64 << i) < bound.max(1) {
        i += 1;
    }
    i + 1
}

impl ApspSession {
    /// Queries between regular vertices of a bipartite graph.
    pub fn bipartite(host: DynGraph, opts: ApspOptions) -> Result<Self, ApspError> {
        let maxlen = host.edge_list().iter().map(|e| e.3).max().unwrap_or(1);
        let bound = (host.num_slots().max(2) as u64 - 1) * maxlen;
        let thresholds: Vec<u64> = (0..scales_for(bound)).map(|i| 1u64 << i).collect();
        Self::build(host, Front::Bipartite, thresholds, opts)
    }

    /// Queries between vertices of a general graph.
    pub fn general(n: usize, edges: &[(VertexId, VertexId, u64)], opts: ApspOptions) -> Result<Self, ApspError> {
        let m = edges.len();
        let maxlen = edges.iter().map(|e| e.2).max().unwrap_or(1);
        let mut half = Vec::with_capacity(2 * m + n);
        for (i, &(a, b, l)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(GraphError::UnknownVertex(a.max(b)).into());
            }
            half.push((i, m + n + a, l));
            half.push((i, m + n + b, l));
        }
        for v in 0..n {
            half.push((m + v, m + n + v, 1));
        }
        let host = DynGraph::bipartite(m + n, n, &half, maxlen.max(1))?;
        let bound = (n.max(2) as u64 - 1) * maxlen;
        let thresholds: Vec<u64> = (0..scales_for(bound)).map(|i| 2 * (1u64 << i) + 2).collect();
        Self::build(host, Front::General { n, m }, thresholds, opts)
    }

    fn build(host: DynGraph, front: Front, thresholds: Vec<u64>, opts: ApspOptions) -> Result<Self, ApspError> {
        let w = host.num_live_regular() as u64;
        let mut scales = Vec::with_capacity(thresholds.len());
        for &d in &thresholds {
            scales.push(Scale::build(&host, d, &opts, w)?);
        }
        let k = CoverConsts::new(1, w, opts.kappa);
        Ok(ApspSession { host, front, scales, thresholds, alpha: k.flag_dist(), queries: 0 })
    }

    /// Stretch parameter: answers at scale `i` are within `alpha * D_i`.
    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn num_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn host(&self) -> &DynGraph {
        &self.host
    }

    pub fn session(&self, i: usize) -> &NcSession {
        &self.scales[i].session
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    fn host_vertex(&self, x: VertexId) -> Result<VertexId, ApspError> {
        match self.front {
            Front::Bipartite if self.host.has_vertex(x) && self.host.is_regular(x) => Ok(x),
            Front::General { n, m } if x < n => Ok(m + x),
            _ => Err(ApspError::NotQueryVertex(x)),
        }
    }

    /// Applies an update given in front-end ids. A general front end only
    /// takes edge deletions.
    pub fn apply(&mut self, op: &UpdateOp) -> Result<(), ApspError> {
        let ops: Vec<UpdateOp> = match (&self.front, op) {
            (Front::Bipartite, _) => vec![op.clone()],
            (Front::General { m, .. }, UpdateOp::DeleteEdge(e)) if *e < *m => {
                vec![UpdateOp::DeleteEdge(2 * e), UpdateOp::DeleteEdge(2 * e + 1)]
            }
            _ => return Err(ApspError::Unsupported(format!("{op:?}"))),
        };
        for op in ops {
            let rc = self.host.apply(&op)?;
            for s in &mut self.scales {
                s.apply(&self.host, &rc.change)?;
            }
        }
        Ok(())
    }

    /// Scale bound in front-end units: every answer at scale `i` is at most
    /// this long.
    fn upper(&self, i: usize) -> u64 {
        let t = self.thresholds[i] * self.alpha;
        match self.front {
            Front::Bipartite => t,
            Front::General { .. } => t / 2 - 1,
        }
    }

    /// Smallest scale whose covering cluster of `x` holds `y`, by binary
    /// search between an uncovered and a covered scale.
    fn find_scale(&self, hx: VertexId, hy: VertexId) -> Option<usize> {
        let top = self.scales.len() - 1;
        if !self.scales[top].covers(hx, hy) {
            return None;
        }
        if self.scales[0].covers(hx, hy) {
            return Some(0);
        }
        let (mut lo, mut hi) = (0, top);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.scales[mid].covers(hx, hy) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }

    /// An upper bound `u` on `dist(x, y)` with `u <= 2 alpha dist(x, y)`.
    pub fn dist_query(&mut self, x: VertexId, y: VertexId) -> Result<Estimate, ApspError> {
        self.queries += 1;
        let (hx, hy) = (self.host_vertex(x)?, self.host_vertex(y)?);
        if x == y {
            return Ok(Estimate { value: 0, lower: 0, scale: 0 });
        }
        let i = self.find_scale(hx, hy).ok_or(ApspError::Disconnected(x, y))?;
        // both fronts: not covered at scale i - 1 means dist > 2^(i-1)
        let lower = if i == 0 { 1 } else { (1u64 << (i - 1)) + 1 };
        Ok(Estimate { value: self.upper(i), lower, scale: i })
    }

    /// A path from `x` to `y` in front-end ids, no longer than the
    /// [`ApspSession::dist_query`] estimate.
    pub fn shortest_path_query(&mut self, x: VertexId, y: VertexId) -> Result<Walk, ApspError> {
        self.queries += 1;
        let (hx, hy) = (self.host_vertex(x)?, self.host_vertex(y)?);
        if x == y {
            return Ok(Walk::single(x));
        }
        let i = self.find_scale(hx, hy).ok_or(ApspError::Disconnected(x, y))?;
        let w = self.scales[i].path(hx, hy)?;
        Ok(match self.front {
            Front::Bipartite => w,
            Front::General { n, m } => self.contract(n, m, &w),
        })
    }

    /// Drops the end vertices of a host walk and suppresses subdivision
    /// vertices, giving a walk in the general graph.
    fn contract(&self, n: usize, m: usize, w: &Walk) -> Walk {
        let inner = &w.vertices[1..w.vertices.len() - 1];
        let base = m + n;
        let mut out = Walk::single(inner[0] - base);
        let mut j = 0;
        while j + 2 < inner.len() {
            let (a, mid, b) = (inner[j], inner[j + 1], inner[j + 2]);
            debug_assert!(mid < m);
            if a != b {
                out.vertices.push(b - base);
                out.edges.push(mid);
                out.len += self.host.edge(2 * mid).len;
            }
            j += 2;
        }
        out
    }
}
