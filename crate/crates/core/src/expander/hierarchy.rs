//! Leveled expander shortest paths under edge deletions, and the session
//! that keeps an embedded expander alive inside a host cluster.

use super::{embed_expander, shortest_expander_path_bound, EmbedConfig, Embedding, ExpanderError, Multigraph, Pruner};
use crate::estree::EsTree;
use crate::graph::{DynGraph, EdgeId, Kind, UpdateOp, VertexId, Walk};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyConfig {
    pub eps: f64,
    /// Constant `c` in the query length bound.
    pub c: f64,
    pub embed: EmbedConfig,
    /// Cut search is exhaustive up to this many vertices.
    pub brute_limit: usize,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig { eps: 0.5, c: 1.0, embed: EmbedConfig::default(), brute_limit: 14 }
    }
}

/// ES-tree over the unpruned part of a level, rooted at a virtual source
/// joined to the live terminals of the next level.
struct SourceTree {
    aug: DynGraph,
    tree: EsTree,
    of_edge: Vec<Option<EdgeId>>,
    back: Vec<Option<usize>>,
    src_edge: BTreeMap<usize, EdgeId>,
}

impl SourceTree {
    fn build(x: &Multigraph, pruned: &dyn Fn(usize) -> bool, terms: &[(usize, bool)], depth: u64) -> Self {
        let mut aug = DynGraph::new(u64::MAX / 8, false);
        for _ in 0..=x.n() {
            aug.add_vertex(Kind::Regular);
        }
        let s = x.n();
        let mut of_edge = vec![None; x.num_edge_slots()];
        let mut back = Vec::new();
        for e in x.live_edges() {
            let (a, b) = x.endpoints(e);
            if a != b && !pruned(a) && !pruned(b) {
                of_edge[e] = Some(aug.add_edge(a, b, 1).unwrap());
                back.push(Some(e));
            }
        }
        let mut src_edge = BTreeMap::new();
        for &(t, live) in terms {
            if live && !pruned(t) {
                src_edge.insert(t, aug.add_edge(s, t, 1).unwrap());
                back.push(None);
            }
        }
        let tree = EsTree::build(&aug, s, depth).unwrap();
        SourceTree { aug, tree, of_edge, back, src_edge }
    }

    fn kill(&mut self, ae: EdgeId) {
        if self.aug.has_edge(ae) {
            let rc = self.aug.apply(&UpdateOp::DeleteEdge(ae)).unwrap();
            self.tree.on_update(&self.aug, &rc.change);
        }
    }

    fn delete_edge(&mut self, e: usize) {
        if let Some(ae) = self.of_edge.get(e).copied().flatten() {
            self.kill(ae);
        }
    }

    fn drop_vertex(&mut self, x: &Multigraph, v: usize) {
        for e in x.incident(v) {
            self.delete_edge(e);
        }
        if let Some(ae) = self.src_edge.remove(&v) {
            self.kill(ae);
        }
    }

    fn drop_terminal(&mut self, t: usize) {
        if let Some(ae) = self.src_edge.remove(&t) {
            self.kill(ae);
        }
    }

    /// Walk from `v` to its terminal as level edges; the terminal is last.
    fn to_terminal(&self, v: usize) -> Option<(Vec<usize>, usize)> {
        let p = self.tree.path(v)?;
        let t = p.vertices[1];
        let mut edges: Vec<usize> = p.edges[1..].iter().map(|&ae| self.back[ae].unwrap()).collect();
        edges.reverse();
        Some((edges, t))
    }
}

struct Level {
    pruner: Pruner,
    /// Level vertex of each vertex of the next level.
    terms: Vec<usize>,
    term_of: BTreeMap<usize, usize>,
    /// Embedding of the next level's edges into this level.
    emb: Option<Embedding>,
    /// Next-level edges whose embedding uses each edge of this level.
    uses: BTreeMap<usize, Vec<usize>>,
    tree: Option<SourceTree>,
    depth: u64,
    budget: usize,
    inputs: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HierarchyStats {
    pub levels: usize,
    pub rebuilds: usize,
    pub inputs: usize,
    pub cascaded: usize,
    pub cascade_warnings: usize,
}

/// Expander shortest paths with levels `X_0 ⊇ … ⊇ X_r`, each embedded into
/// the one above.
pub struct Hierarchy {
    cfg: HierarchyConfig,
    phi: f64,
    gamma: usize,
    max_levels: usize,
    levels: Vec<Level>,
    stats: HierarchyStats,
    bound: f64,
}

impl Hierarchy {
    /// `x` must be a `phi`-expander.
    pub fn new(x: Multigraph, phi: f64, cfg: HierarchyConfig) -> Result<Self, ExpanderError> {
        let n = x.n();
        let gamma = ((n.max(2) as f64).powf(cfg.eps)).ceil().max(2.0) as usize;
        let max_levels = (1.0 / cfg.eps).floor() as usize + 1;
        let delta = x.max_degree().max(1) as f64;
        let logn = (n.max(2) as f64).log2();
        let phi_hat = cfg.embed.cmg.phi.min(phi);
        let r = max_levels as i32 - 1;
        let bound = (48.0 * cfg.c * cfg.c * logn * logn / phi_hat).powi(r + 1) * delta * delta / phi;
        let mut h = Hierarchy { cfg, phi, gamma, max_levels, levels: Vec::new(), stats: HierarchyStats::default(), bound };
        h.levels.push(h.new_level(x, phi));
        h.rebuild_below(0)?;
        Ok(h)
    }

    fn new_level(&self, x: Multigraph, phi: f64) -> Level {
        let pruner = Pruner::new(x, phi, self.cfg.brute_limit);
        let initial_edges = pruner.graph().num_live_edges();
        let delta = pruner.delta();
        let budget = (phi * initial_edges as f64 / (20.0 * delta as f64)).floor() as usize;
        let depth = 4 * (shortest_expander_path_bound(pruner.graph().n(), delta, phi) + 1);
        Level {
            pruner,
            terms: Vec::new(),
            term_of: BTreeMap::new(),
            emb: None,
            uses: BTreeMap::new(),
            tree: None,
            depth,
            budget,
            inputs: 0,
        }
    }

    /// Upper bound on the hop length of any query answer.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn length_bound(&self) -> f64 {
        self.bound
    }

    pub fn stats(&self) -> HierarchyStats {
        HierarchyStats { levels: self.levels.len(), ..self.stats.clone() }
    }

    pub fn graph(&self) -> &Multigraph {
        self.levels[0].pruner.graph()
    }

    pub fn is_pruned(&self, v: usize) -> bool {
        self.levels[0].pruner.is_pruned(v)
    }

    pub fn pruned(&self) -> Vec<usize> {
        self.levels[0].pruner.pruned()
    }

    /// Allowed number of input deletions.
    pub fn budget(&self) -> usize {
        self.levels[0].budget
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.pruner.graph().n()).collect()
    }

    /// Rebuilds every level below `i` from the current state of level `i`.
    fn rebuild_below(&mut self, i: usize) -> Result<(), ExpanderError> {
        self.levels.truncate(i + 1);
        let mut i = i;
        loop {
            let lvl = &self.levels[i];
            let active = lvl.pruner.active();
            let alive: Vec<usize> = (0..active.len()).filter(|&v| active[v]).collect();
            let want = alive.len().div_ceil(self.gamma);
            let last = i + 1 >= self.max_levels || alive.len() <= 2 || want < 2;
            if last {
                let lvl = &mut self.levels[i];
                lvl.terms.clear();
                lvl.term_of.clear();
                lvl.emb = None;
                lvl.uses.clear();
                lvl.tree = None;
                return Ok(());
            }
            let step = alive.len() as f64 / want as f64;
            let picks: Vec<usize> = (0..want).map(|j| alive[(j as f64 * step) as usize]).collect();
            let phi_i = lvl.pruner.phi();
            let (xe, emb, kept) = embed_expander(lvl.pruner.graph(), &active, &picks, phi_i, &self.cfg.embed)?;
            let terms: Vec<usize> = kept.iter().map(|&k| picks[k]).collect();
            let next_phi = xe.cert.phi().min(self.cfg.embed.cmg.phi).max(1e-3);
            let mut uses: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (j, p) in emb.paths.iter().enumerate() {
                for &e in p {
                    uses.entry(e).or_default().push(j);
                }
            }
            let next = self.new_level(xe.graph, next_phi);
            let lvl = &mut self.levels[i];
            lvl.term_of = terms.iter().enumerate().map(|(j, &t)| (t, j)).collect();
            let pr = &lvl.pruner;
            let tlist: Vec<(usize, bool)> = terms.iter().map(|&t| (t, true)).collect();
            lvl.tree = Some(SourceTree::build(pr.graph(), &|v| pr.is_pruned(v), &tlist, lvl.depth));
            lvl.terms = terms;
            lvl.emb = Some(emb);
            lvl.uses = uses;
            self.levels.push(next);
            i += 1;
        }
    }

    /// Deletes edge `e` of `X_0`.
    pub fn delete_edge(&mut self, e: usize) -> Result<(), ExpanderError> {
        self.stats.inputs += 1;
        for l in &mut self.levels {
            l.inputs += 1;
        }
        let before = self.stats.cascaded;
        self.delete_at(0, e);
        let cascaded = self.stats.cascaded - before;
        if cascaded > 10 {
            self.stats.cascade_warnings += 1;
            log::warn!("one input deletion cascaded into {cascaded} deletions");
        }
        if self.levels[0].inputs > self.levels[0].budget {
            return Err(ExpanderError::BudgetExhausted);
        }
        if let Some(i) = (1..self.levels.len()).find(|&i| self.levels[i].inputs > self.levels[i].budget) {
            self.stats.rebuilds += 1;
            self.rebuild_below(i - 1)?;
        }
        Ok(())
    }

    /// Deletes an edge of level `i`; returns the vertices that level pruned.
    fn delete_at(&mut self, i: usize, e: usize) -> Vec<usize> {
        let lvl = &mut self.levels[i];
        if !lvl.pruner.graph().is_alive(e) {
            return Vec::new();
        }
        if i > 0 {
            self.stats.cascaded += 1;
        }
        let fresh = lvl.pruner.delete_unchecked(e);
        self.after_change(i, &[e], &fresh);
        fresh
    }

    /// Propagates deleted edges and newly pruned vertices of level `i` to the
    /// tree of level `i` and to the next level.
    fn after_change(&mut self, i: usize, edges: &[usize], fresh: &[usize]) {
        if i + 1 >= self.levels.len() {
            return;
        }
        let mut doomed = Vec::new();
        let mut lost_terms = Vec::new();
        {
            let lvl = &mut self.levels[i];
            let x = lvl.pruner.graph().clone();
            if let Some(t) = lvl.tree.as_mut() {
                for &e in edges {
                    t.delete_edge(e);
                }
                for &v in fresh {
                    t.drop_vertex(&x, v);
                }
            }
            for &e in edges {
                doomed.extend(lvl.uses.get(&e).cloned().unwrap_or_default());
            }
            if !fresh.is_empty() {
                let emb = lvl.emb.as_ref().unwrap();
                for (j, vs) in emb.vertices.iter().enumerate() {
                    if vs.iter().any(|v| fresh.binary_search(v).is_ok()) {
                        doomed.push(j);
                    }
                }
                for &v in fresh {
                    if let Some(&j) = lvl.term_of.get(&v) {
                        lost_terms.push(j);
                    }
                }
            }
        }
        doomed.sort();
        doomed.dedup();
        let mut next_pruned = Vec::new();
        for j in doomed {
            next_pruned.extend(self.delete_at(i + 1, j));
        }
        for j in lost_terms {
            let fresh2 = self.levels[i + 1].pruner.force(j);
            self.after_change(i + 1, &[], &fresh2);
            next_pruned.extend(fresh2);
        }
        let lvl = &mut self.levels[i];
        if let Some(t) = lvl.tree.as_mut() {
            for j in next_pruned {
                t.drop_terminal(lvl.terms[j]);
            }
        }
    }

    /// Path from `x` to `y` in `X_0` as edge ids.
    pub fn query(&mut self, x: usize, y: usize) -> Result<Vec<usize>, ExpanderError> {
        for v in [x, y] {
            if self.levels[0].pruner.is_pruned(v) {
                return Err(ExpanderError::QueryOnPrunedVertex(v));
            }
        }
        match self.query_at(0, x, y) {
            Some(p) => Ok(p),
            None => {
                self.stats.rebuilds += 1;
                self.rebuild_below(0)?;
                self.query_at(0, x, y).ok_or(ExpanderError::NoPath(x, y))
            }
        }
    }

    fn query_at(&self, i: usize, x: usize, y: usize) -> Option<Vec<usize>> {
        if x == y {
            return Some(Vec::new());
        }
        let lvl = &self.levels[i];
        let Some(tree) = lvl.tree.as_ref() else {
            return lvl.pruner.graph().bfs_path(x, y, &lvl.pruner.active());
        };
        let (px, tx) = tree.to_terminal(x)?;
        let (py, ty) = tree.to_terminal(y)?;
        let mid = self.query_at(i + 1, lvl.term_of[&tx], lvl.term_of[&ty])?;
        let emb = lvl.emb.as_ref().unwrap();
        let next = self.levels[i + 1].pruner.graph();
        let mut out = px;
        let mut at = lvl.term_of[&tx];
        for f in mid {
            let (a, _) = next.endpoints(f);
            let mut seg = emb.paths[f].clone();
            if a != at {
                seg.reverse();
            }
            out.extend(seg);
            at = next.other(f, at);
        }
        let mut tail = py;
        tail.reverse();
        out.extend(tail);
        Some(out)
    }
}

/// Vertex sequence of a walk in `g` given by edges from `start`.
pub fn walk_vertices(g: &Multigraph, start: usize, edges: &[usize]) -> Vec<usize> {
    let mut vs = vec![start];
    for &e in edges {
        let v = g.other(e, *vs.last().unwrap());
        vs.push(v);
    }
    vs
}

/// Keeps an expander embedded into a host graph alive under host edge
/// deletions; queries return host walks between expander vertices.
pub struct ExpanderSession {
    hier: Hierarchy,
    /// Host vertex of each expander vertex.
    anchors: Vec<VertexId>,
    /// Host edges and vertices of the embedding path of each expander edge.
    host_paths: Vec<Vec<EdgeId>>,
    host_verts: Vec<Vec<VertexId>>,
    lists: BTreeMap<EdgeId, Vec<usize>>,
    cost: u64,
    budget: u64,
}

impl ExpanderSession {
    /// `host_paths[j]` is the host walk embedding expander edge `j`, whose
    /// vertex sequence is `host_verts[j]`; expander vertex `v` sits at host
    /// vertex `anchors[v]`.
    pub fn new(
        x: Multigraph,
        anchors: Vec<VertexId>,
        phi: f64,
        host_paths: Vec<Vec<EdgeId>>,
        host_verts: Vec<Vec<VertexId>>,
        budget: u64,
        cfg: HierarchyConfig,
    ) -> Result<Self, ExpanderError> {
        let mut lists: BTreeMap<EdgeId, Vec<usize>> = BTreeMap::new();
        for (j, p) in host_paths.iter().enumerate() {
            for &e in p {
                lists.entry(e).or_default().push(j);
            }
        }
        let hier = Hierarchy::new(x, phi, cfg)?;
        Ok(ExpanderSession { hier, anchors, host_paths, host_verts, lists, cost: 0, budget })
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hier
    }

    /// Expander vertices still usable for queries.
    pub fn live(&self) -> Vec<usize> {
        (0..self.hier.graph().n()).filter(|&v| !self.hier.is_pruned(v)).collect()
    }

    pub fn anchor(&self, v: usize) -> VertexId {
        self.anchors[v]
    }

    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Expander edges embedded through host edge `e`.
    pub fn carried_by(&self, e: EdgeId) -> &[usize] {
        self.lists.get(&e).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Applies a host update of the given cost that removed host edge `e`
    /// (if any).
    pub fn on_host_update(&mut self, removed: Option<EdgeId>, cost: u64) -> Result<(), ExpanderError> {
        self.cost += cost;
        let mut exhausted = false;
        if let Some(e) = removed {
            for j in self.lists.remove(&e).unwrap_or_default() {
                if self.hier.graph().is_alive(j) {
                    match self.hier.delete_edge(j) {
                        Err(ExpanderError::BudgetExhausted) => exhausted = true,
                        r => r?,
                    }
                }
            }
        }
        if exhausted || self.cost > self.budget || self.live().is_empty() {
            return Err(ExpanderError::BudgetExhausted);
        }
        Ok(())
    }

    /// Host walk between expander vertices `x` and `y`, using `host` for lengths.
    pub fn query(&mut self, host: &DynGraph, x: usize, y: usize) -> Result<Walk, ExpanderError> {
        let hops = self.hier.query(x, y)?;
        let xg = self.hier.graph();
        let mut at = x;
        let mut vertices: Vec<VertexId> = vec![self.anchors[x]];
        let mut edges = Vec::new();
        for f in hops {
            let (a, _) = xg.endpoints(f);
            let mut vs = self.host_verts[f].clone();
            let mut es = self.host_paths[f].clone();
            if a != at {
                vs.reverse();
                es.reverse();
            }
            vertices.extend(&vs[1..]);
            edges.extend(es);
            at = xg.other(f, at);
        }
        let len = edges.iter().map(|&e| host.edge(e).len).sum();
        Ok(Walk { vertices, edges, len })
    }
}
