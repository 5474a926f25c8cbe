//! Line-oriented text formats.
//!
//! Graph: `p <n_regular> <n_super> <m> <D>` then `e <id> <regular> <super> <len>`,
//! where supernode ids count from 0 in their own range. A general
//! (non-bipartite) graph uses `g <n> <m>` then `e <id> <a> <b> [len]`.
//!
//! Streams: `d <edge>`, `x <vertex>`, `s <super> <e1>,<e2>,...`, `q <x> <y>`,
//! `path <x> <y>`. Vertex ids in `x`, `q` and `path` are global; the
//! supernode id in `s` counts in the supernode range. Demand pairs: `pair <s> <t>`.
//! Blank lines and lines starting with `#` or `c` are ignored.

use crate::graph::{DynGraph, GraphError, UpdateOp, VertexId};
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamItem {
    Update(UpdateOp),
    Query(VertexId, VertexId),
    Path(VertexId, VertexId),
}

#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: DynGraph,
    pub n_regular: usize,
    pub warnings: Vec<String>,
}

fn err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, GraphError> {
    tok.ok_or_else(|| err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| err(line, format!("bad {what}")))
}

fn content(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.first() {
            None => None,
            Some(t) if t.starts_with('#') || *t == "c" => None,
            _ => Some((i + 1, toks)),
        }
    })
}

pub fn parse_graph(text: &str) -> Result<LoadedGraph, GraphError> {
    let mut lines = content(text);
    let (ln, head) = lines.next().ok_or_else(|| err(0, "empty input"))?;
    let mut it = head.iter().copied();
    let (mut g, n_regular, n_super, m) = match it.next() {
        Some("p") => {
            let nr: usize = num(it.next(), ln, "n_regular")?;
            let ns: usize = num(it.next(), ln, "n_super")?;
            let m: usize = num(it.next(), ln, "m")?;
            let d: u64 = num(it.next(), ln, "D")?;
            if d == 0 {
                return Err(err(ln, "D must be positive"));
            }
            (DynGraph::bipartite(nr, ns, &[], d)?, nr, ns, m)
        }
        Some("g") => {
            let n: usize = num(it.next(), ln, "n")?;
            let m: usize = num(it.next(), ln, "m")?;
            (DynGraph::general(n, &[], u64::MAX / 4)?, n, 0, m)
        }
        _ => return Err(err(ln, "expected header `p` or `g`")),
    };
    let bip = g.is_bipartite();
    let mut count = 0;
    for (ln, toks) in lines {
        let mut it = toks.iter().copied();
        if it.next() != Some("e") {
            return Err(err(ln, "expected edge line"));
        }
        let id: usize = num(it.next(), ln, "edge id")?;
        if id != count {
            return Err(err(ln, format!("edge ids must be consecutive from 0, got {id}")));
        }
        let a: usize = num(it.next(), ln, "endpoint")?;
        let b: usize = num(it.next(), ln, "endpoint")?;
        let len: u64 = match it.next() {
            Some(t) => t.parse().map_err(|_| err(ln, "bad length"))?,
            None if !bip => 1,
            None => return Err(err(ln, "missing length")),
        };
        let (a, b) = if bip {
            if a >= n_regular {
                return Err(err(ln, format!("regular id {a} out of range")));
            }
            if b >= n_super {
                return Err(err(ln, format!("supernode id {b} out of range")));
            }
            (a, n_regular + b)
        } else {
            (a, b)
        };
        g.add_edge(a, b, len).map_err(|e| err(ln, e.to_string()))?;
        count += 1;
    }
    if count != m {
        return Err(err(0, format!("header declares {m} edges, found {count}")));
    }
    let mut warnings = Vec::new();
    if bip {
        for v in g.drop_isolated_supernodes() {
            let msg = format!("dropping isolated supernode {}", v - n_regular);
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    Ok(LoadedGraph { graph: g, n_regular, warnings })
}

pub fn write_graph(
    n_regular: usize,
    n_super: usize,
    edges: &[(VertexId, VertexId, u64)],
    d: u64,
) -> String {
    let mut out = format!("p {} {} {} {}\n", n_regular, n_super, edges.len(), d);
    for (i, &(a, b, l)) in edges.iter().enumerate() {
        let _ = writeln!(out, "e {} {} {} {}", i, a, b - n_regular, l);
    }
    out
}

pub fn write_general(n: usize, edges: &[(VertexId, VertexId)]) -> String {
    let mut out = format!("g {} {}\n", n, edges.len());
    for (i, &(a, b)) in edges.iter().enumerate() {
        let _ = writeln!(out, "e {} {} {}", i, a, b);
    }
    out
}

pub fn parse_stream(text: &str, n_regular: usize) -> Result<Vec<StreamItem>, GraphError> {
    let mut out = Vec::new();
    for (ln, toks) in content(text) {
        let mut it = toks.iter().copied();
        let item = match it.next() {
            Some("d") => StreamItem::Update(UpdateOp::DeleteEdge(num(it.next(), ln, "edge id")?)),
            Some("x") => StreamItem::Update(UpdateOp::DeleteIsolatedVertex(num(it.next(), ln, "vertex id")?)),
            Some("s") => {
                let u: usize = num(it.next(), ln, "supernode id")?;
                let list = it.next().ok_or_else(|| err(ln, "missing edge list"))?;
                let edges = list
                    .split(',')
                    .map(|t| t.parse().map_err(|_| err(ln, "bad edge id")))
                    .collect::<Result<Vec<_>, _>>()?;
                StreamItem::Update(UpdateOp::SupernodeSplit { u: n_regular + u, edges })
            }
            Some("q") => StreamItem::Query(num(it.next(), ln, "vertex")?, num(it.next(), ln, "vertex")?),
            Some("path") => StreamItem::Path(num(it.next(), ln, "vertex")?, num(it.next(), ln, "vertex")?),
            Some(t) => return Err(err(ln, format!("unknown stream directive `{t}`"))),
            None => continue,
        };
        if it.next().is_some() {
            return Err(err(ln, "trailing tokens"));
        }
        out.push(item);
    }
    Ok(out)
}

pub fn write_stream(items: &[StreamItem], n_regular: usize) -> String {
    let mut out = String::new();
    for it in items {
        let _ = match it {
            StreamItem::Update(UpdateOp::DeleteEdge(e)) => writeln!(out, "d {e}"),
            StreamItem::Update(UpdateOp::DeleteIsolatedVertex(v)) => writeln!(out, "x {v}"),
            StreamItem::Update(UpdateOp::SupernodeSplit { u, edges }) => {
                let list: Vec<String> = edges.iter().map(|e| e.to_string()).collect();
                writeln!(out, "s {} {}", u - n_regular, list.join(","))
            }
            StreamItem::Query(x, y) => writeln!(out, "q {x} {y}"),
            StreamItem::Path(x, y) => writeln!(out, "path {x} {y}"),
        };
    }
    out
}

pub fn parse_pairs(text: &str) -> Result<Vec<(VertexId, VertexId)>, GraphError> {
    let mut out = Vec::new();
    for (ln, toks) in content(text) {
        let mut it = toks.iter().copied();
        if it.next() != Some("pair") {
            return Err(err(ln, "expected `pair <s> <t>`"));
        }
        out.push((num(it.next(), ln, "vertex")?, num(it.next(), ln, "vertex")?));
    }
    Ok(out)
}

pub fn write_pairs(pairs: &[(VertexId, VertexId)]) -> String {
    pairs.iter().map(|(s, t)| format!("pair {s} {t}\n")).collect()
}
