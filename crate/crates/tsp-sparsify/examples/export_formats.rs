//! Writes every interchange format once: TSPLIB instance, candidate-graph
//! dump, downstream-solver candidate file, and tour file.

use tsp_sparsify::candidates::{alpha_nearest_candidates, write_graph_dump, write_lkh_candidates, AscentConfig};
use tsp_sparsify::instances::{generate_instance, write_tsplib, DistanceType, DistributionFamily, GeneratorConfig};
use tsp_sparsify::oracle::{branch_and_bound, write_tour, BnbBudget};

fn main() -> tsp_sparsify::Result<()> {
    let inst = generate_instance(
        DistributionFamily::GridJitter,
        DistanceType::Att,
        12,
        5,
        &GeneratorConfig::default(),
    )?;
    let dm = inst.distance_matrix();
    let alpha = alpha_nearest_candidates(&dm, 5, &AscentConfig::strong())?;
    let tour = branch_and_bound(&dm, &BnbBudget::default())?.tour;

    println!("--- TSPLIB instance ---\n{}", write_tsplib(&inst));
    println!("--- candidate graph dump ---\n{}", write_graph_dump(&alpha.graph, Some(&alpha.ascent.tree.parent)));
    println!("--- solver candidate file ---\n{}", write_lkh_candidates(&alpha.graph, Some(&alpha.ascent.tree.parent)));
    println!("--- optimal tour ---\n{}", write_tour(&tour));
    Ok(())
}
