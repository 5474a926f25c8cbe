//! Bounded-depth shortest-path tree under edge deletions and supernode splits.
//!
//! Run with `cargo run --example estree`.

use dyncover::{DynGraph, EsTree, SsspAnswer, UpdateOp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // regular 0..4, supernodes 4 and 5
    let edges = [(0, 4, 1), (1, 4, 1), (1, 5, 2), (2, 5, 1), (3, 5, 1), (3, 4, 3)];
    let mut g = DynGraph::bipartite(4, 2, &edges, 4)?;
    let mut tree = EsTree::build(&g, 0, 8)?;
    for v in 0..4 {
        println!("dist(0, {v}) = {}", tree.dist(v));
    }

    for op in [UpdateOp::DeleteEdge(1), UpdateOp::SupernodeSplit { u: 5, edges: vec![3, 4] }] {
        let r = g.apply(&op)?;
        tree.on_update(&g, &r.change);
        println!("after {op:?}:");
        for v in 0..4 {
            match tree.query(v) {
                SsspAnswer::Path(w) => println!("  {v}: length {} via {:?}", w.len, w.vertices),
                SsspAnswer::BeyondDepth => println!("  {v}: beyond depth"),
            }
        }
    }
    tree.audit(&g)?;
    println!("departed: {:?}, total label increase {}", tree.drain_departed(), tree.total_increment());
    Ok(())
}
