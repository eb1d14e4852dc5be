//! Compares how far syndrome checks reach when a hypergraph-product code is
//! laid out on a flat grid versus spread over a modular machine.

use ionfab::arch::{ArchitectureSpec, EluSpec};
use ionfab::qec::{
    embed_on_grid, embed_on_modular, hypergraph_product_graph, surface_code_graph, BinaryMatrix, Partition, Placement,
};

fn main() -> ionfab::Result<()> {
    let surface = surface_code_graph(5)?;
    let native = embed_on_grid(&surface, &Placement::Native)?;
    println!(
        "surface d=5 on its own layout: max check span {}",
        native.max_check_span
    );

    let h = BinaryMatrix::load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/rep3.csv"))?;
    let small = hypergraph_product_graph(&h, &h)?;
    println!("HGP from rep3.csv: {} data, {} checks", small.n_data, small.n_checks());

    let mut spec = ArchitectureSpec::reference(6);
    for elu in &mut spec.elus {
        elu.n_ions = 50;
        elu.comm_ion_indices = EluSpec::end_comm_indices(50, 4);
    }
    println!(
        "\n{:>4} {:>5} {:>10} {:>10} {:>12}",
        "L", "n", "grid span", "intra hop", "pairs/round"
    );
    for l in [3, 5, 7, 9] {
        let rep = BinaryMatrix::repetition(l)?;
        let code = hypergraph_product_graph(&rep, &rep)?;
        let grid = embed_on_grid(&code, &Placement::RowMajor)?;
        let modular = embed_on_modular(&code, &spec, &Partition::GreedyCut)?;
        println!(
            "{l:>4} {:>5} {:>10} {:>10} {:>12}",
            code.n_data, grid.max_check_span, modular.max_intra_hop, modular.pairs_per_round
        );
    }
    Ok(())
}
