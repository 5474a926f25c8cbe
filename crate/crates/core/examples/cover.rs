//! Dynamic neighborhood cover: every regular vertex's `D`-ball stays inside
//! its covering cluster while edges are deleted.
//!
//! Run with `cargo run --example cover`.

use dyncover::cluster::{full_factory, GoodParams};
use dyncover::cover::{NcSession, SessionOptions};
use dyncover::params::CoverConsts;
use dyncover::{DynGraph, UpdateOp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a cycle of 12 regular vertices threaded through 12 supernodes
    let n = 12;
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((i, n + i, 1));
        edges.push(((i + 1) % n, n + i, 1));
    }
    let g = DynGraph::bipartite(n, n, &edges, 2)?;
    let consts = CoverConsts::new(2, n as u64, Some(1.0));
    println!("flag distance {}, membership bound {}", consts.flag_dist(), consts.membership_bound());
    let mut s = NcSession::new(g, consts, full_factory(GoodParams::new(0.5, n as u64)), SessionOptions::default())?;
    println!("initial clusters: {}", s.clusters().len());

    for e in [1, 9, 17] {
        s.apply(&UpdateOp::DeleteEdge(e))?;
        let c = s.covering(0).expect("regular vertex is covered");
        println!("deleted edge {e}: vertex 0 covered by cluster {c}, {} clusters", s.clusters().len());
    }
    for y in [11, 2] {
        match s.short_path(0, y) {
            Ok(w) => println!("path 0 -> {y} of length {}: {:?}", w.len, w.vertices),
            Err(e) => println!("0 and {y}: {e}"),
        }
    }
    let problems = s.verify();
    println!("verify: {}", if problems.is_empty() { "ok".to_string() } else { problems.join("; ") });
    println!("{} events logged", s.events().len());
    Ok(())
}
