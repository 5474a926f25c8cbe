//! Expander pruning and short paths inside a decremental expander.
//!
//! Run with `cargo run --example expander`.

use dyncover::expander::hierarchy::{Hierarchy, HierarchyConfig};
use dyncover::expander::{certify, circulant, Pruner};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = circulant(14, &[1, 3, 5]);
    let active = vec![true; x.n()];
    let phi = certify(&x, &active).phi();
    println!("circulant on {} vertices, expansion {phi:.3}", x.n());

    let mut p = Pruner::new(x.clone(), phi, 16);
    println!("pruning limit {} deletions", p.limit());
    for e in 0..p.limit() {
        p.delete(e)?;
        println!("deleted {e}: pruned {:?}, boundary {}", p.pruned(), p.boundary());
    }

    let mut h = Hierarchy::new(x, phi, HierarchyConfig::default())?;
    println!("hierarchy levels {:?}, length bound {:.1}", h.level_sizes(), h.length_bound());
    let path = h.query(0, 7)?;
    println!("0 -> 7 uses {} edges: {path:?}", path.len());
    Ok(())
}
