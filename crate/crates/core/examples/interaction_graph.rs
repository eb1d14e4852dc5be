//! Builds the interaction graph of the example machine, wires one photonic
//! link and prints hop-count histograms for each tier.

use ionfab::arch::load_architecture;
use ionfab::graph::{build_interaction_graph, graph_distance_profile, EdgeKind, Tier};

fn main() -> ionfab::Result<()> {
    let spec = load_architecture(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/example.json"))?;
    let mut g = build_interaction_graph(&spec)?;
    let last = spec.elus[0].n_ions - 1;
    let a = g.node_index(0, last).expect("A has a last ion");
    let b = g.node_index(1, 0).expect("B has a first ion");
    g.add_photonic_link(a, b)?;

    println!(
        "{} nodes; {} fast, {} collective, {} photonic edges",
        g.nodes.len(),
        g.count(EdgeKind::Fast),
        g.count(EdgeKind::Collective),
        g.count(EdgeKind::Photonic)
    );
    for tier in [Tier::Fast, Tier::Collective, Tier::FastPhotonic] {
        let p = graph_distance_profile(&g, tier);
        println!(
            "{tier:?}: diameter {} over reachable pairs, {} unreachable, histogram {:?}",
            p.max_distance, p.unreachable_pairs, p.histogram
        );
    }
    Ok(())
}
