//! Extracts the sixteen edge features for a candidate graph and prints a few
//! labeled rows with their feature names.

use tsp_sparsify::candidates::{alpha_nearest_candidates, popmusic_candidates, union_candidates, AscentConfig, PopmusicConfig};
use tsp_sparsify::features::{edge_features, node_stats, FeatureMode, FEATURE_NAMES};
use tsp_sparsify::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};
use tsp_sparsify::oracle::{branch_and_bound, label_edges, BnbBudget};

fn main() -> tsp_sparsify::Result<()> {
    let inst = generate_instance(
        DistributionFamily::Clustered,
        DistanceType::Geo,
        40,
        11,
        &GeneratorConfig::default(),
    )?;
    let dm = inst.distance_matrix();
    let alpha = alpha_nearest_candidates(&dm, 10, &AscentConfig::strong())?;
    let pop = popmusic_candidates(&dm, &PopmusicConfig::default())?;
    let graph = union_candidates(&alpha.graph, &pop)?;
    let tour = branch_and_bound(&dm, &BnbBudget::default())?.tour;
    let labels = label_edges(&graph, &tour, false)?;
    let stats = node_stats(&dm, 10)?;

    let edges = graph.canonical_edges();
    for (idx, &(i, j)) in edges.iter().enumerate().take(4) {
        let row = edge_features(&dm, &graph, &stats, i, j, FeatureMode::Union)?;
        println!("edge ({i}, {j})  label {}", labels.labels[idx]);
        for (name, value) in FEATURE_NAMES.iter().zip(row) {
            println!("  {name:<18} {value:>12.6}");
        }
    }
    println!(
        "{} candidate edges, {} on the optimal tour (coverage {:.3})",
        labels.total,
        labels.positives,
        labels.coverage(dm.n())
    );
    Ok(())
}
