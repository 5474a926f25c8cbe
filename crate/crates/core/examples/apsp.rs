//! Decremental approximate all-pairs shortest paths on a weighted graph.
//!
//! Run with `cargo run --example apsp`.

use dyncover::apsp::{ApspOptions, ApspSession};
use dyncover::UpdateOp;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a weighted 8-cycle with two chords
    let mut edges: Vec<(usize, usize, u64)> = (0..8).map(|i| (i, (i + 1) % 8, 1 + i as u64 % 3)).collect();
    edges.push((0, 4, 5));
    edges.push((2, 6, 2));
    let mut s = ApspSession::general(8, &edges, ApspOptions { kappa: Some(1.0), ..ApspOptions::default() })?;
    println!("{} distance scales, stretch parameter {}", s.num_scales(), s.alpha());

    for round in 0..3 {
        let est = s.dist_query(0, 5)?;
        let w = s.shortest_path_query(0, 5)?;
        println!("round {round}: {} <= dist(0, 5) <= {}, path {:?} of length {}", est.lower, est.value, w.vertices, w.len);
        s.apply(&UpdateOp::DeleteEdge([9, 4, 7][round]))?;
    }
    match s.dist_query(0, 5) {
        Ok(est) => println!("final estimate {}", est.value),
        Err(e) => println!("final query: {e}"),
    }
    Ok(())
}
