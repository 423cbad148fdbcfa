//! Builds the three Stage-1 candidate graphs for one instance and compares
//! their density and provenance mix.

use tsp_sparsify::candidates::{
    alpha_nearest_candidates, popmusic_candidates, union_candidates, AscentConfig, EdgeSource,
    PopmusicConfig,
};
use tsp_sparsify::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};

fn main() -> tsp_sparsify::Result<()> {
    let inst = generate_instance(
        DistributionFamily::Uniform,
        DistanceType::Euc2d,
        100,
        7,
        &GeneratorConfig::default(),
    )?;
    let dm = inst.distance_matrix();

    let alpha = alpha_nearest_candidates(&dm, 10, &AscentConfig::strong())?;
    println!(
        "alpha-nearest: {} edges ({:.2}/node), Held-Karp bound {:.0} after {} ascent iterations",
        alpha.graph.edge_count(),
        alpha.graph.edges_per_node(),
        alpha.ascent.bound,
        alpha.ascent.iterations
    );

    let pop = popmusic_candidates(&dm, &PopmusicConfig::default())?;
    println!(
        "popmusic:      {} edges ({:.2}/node)",
        pop.edge_count(),
        pop.edges_per_node()
    );

    let union = union_candidates(&alpha.graph, &pop)?;
    let mut dual = 0;
    let mut alpha_only = 0;
    let mut pop_only = 0;
    for (i, j) in union.canonical_edges() {
        let src = union.edge(i, j).unwrap().source;
        match (src.contains(EdgeSource::ALPHA), src.contains(EdgeSource::POPMUSIC)) {
            (true, true) => dual += 1,
            (true, false) => alpha_only += 1,
            _ => pop_only += 1,
        }
    }
    println!(
        "union:         {} edges ({:.2}/node) = {dual} dual-source + {alpha_only} alpha-only + {pop_only} popmusic-only",
        union.edge_count(),
        union.edges_per_node()
    );
    Ok(())
}
