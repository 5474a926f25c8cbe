//! Approximate multicommodity flow and a multicut rounded from its dual.
//!
//! Run with `cargo run --example flow_multicut`.

use dyncover::flowcut::{solve, FlowConfig, FlowInstance, OracleChoice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 3x3 grid, demands between opposite corners and sides
    let mut edges = Vec::new();
    for y in 0..3 {
        for x in 0..3 {
            let v = 3 * y + x;
            if x < 2 {
                edges.push((v, v + 1));
            }
            if y < 2 {
                edges.push((v, v + 3));
            }
        }
    }
    let inst = FlowInstance::new(9, edges, vec![(0, 8), (2, 6), (1, 7)])?;
    for oracle in [OracleChoice::Exact, OracleChoice::Apsp] {
        let r = solve(&inst, &FlowConfig { oracle, ..FlowConfig::default() })?;
        println!("{oracle:?}: scaled flow {:.3}, dual {:.3}, {} paths, {} phases", r.scaled_value, r.dual_value, r.paths.len(), r.phases.len());
        println!("  multicut {:?} from {} regions, audit ok: {}", r.multicut, r.regions, r.audit.all());
    }
    Ok(())
}
