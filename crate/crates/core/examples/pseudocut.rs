//! Pseudocut of a barbell: the bridge is cut so no ball is heavy, and the
//! cut edges come with an embedded expander witness.
//!
//! Run with `cargo run --example pseudocut`.

use dyncover::cover::Cluster;
use dyncover::pseudocut::{audit_witness, find_pseudocut_and_expander, PseudocutConfig};
use dyncover::DynGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // two 6-cliques joined by the edge 0-6
    let mut edges = Vec::new();
    for base in [0, 6] {
        for a in 0..6 {
            for b in a + 1..6 {
                edges.push((base + a, base + b, 1));
            }
        }
    }
    edges.push((0, 6, 1));
    let g = DynGraph::subdivide(12, &edges, 2)?;
    let w_hat = g.num_live_regular() as u64;
    let out = find_pseudocut_and_expander(&g, &Cluster::whole(&g), &PseudocutConfig::new(0.5, w_hat, 2))?;
    println!("cut of {} edges, ball weight limit {}", out.cut.len(), out.cut.limit());
    println!("{} iterations", out.stats.iterations());
    match &out.witness {
        Some(w) => {
            println!("witness: {} terminals, congestion {} (limit {}), longest path {} (limit {})", w.edges.len(), w.congestion, w.eta, w.max_len, w.d2);
            audit_witness(w)?;
            println!("witness audit ok");
        }
        None => println!("empty cut, no witness needed"),
    }
    Ok(())
}
