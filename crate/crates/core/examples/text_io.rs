//! Reading and writing the graph, update-stream and demand-pair formats.
//!
//! Run with `cargo run --example text_io`.

use dyncover::text::{parse_graph, parse_pairs, parse_stream, write_stream, StreamItem};

const GRAPH: &str = "\
c two regular vertices and one supernode, D = 3
p 2 1 2 3
e 0 0 0 1
e 1 1 0 2
";

const STREAM: &str = "\
q 0 1
path 0 1
d 1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lg = parse_graph(GRAPH)?;
    println!("{} regular vertices, {} live edges, D = {}", lg.n_regular, lg.graph.num_live_edges(), lg.graph.d());
    let mut g = lg.graph;
    let items = parse_stream(STREAM, lg.n_regular)?;
    for it in &items {
        match it {
            StreamItem::Update(op) => {
                g.apply(op)?;
                println!("applied {op:?}");
            }
            StreamItem::Query(x, y) => println!("distance query {x} {y}"),
            StreamItem::Path(x, y) => println!("path query {x} {y}"),
        }
    }
    print!("round trip:\n{}", write_stream(&items, lg.n_regular));
    println!("pairs: {:?}", parse_pairs("pair 0 1\npair 1 0\n")?);
    Ok(())
}
