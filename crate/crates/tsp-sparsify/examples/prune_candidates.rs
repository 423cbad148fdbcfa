//! Scores a union candidate graph with a trained model and shows the
//! density-coverage trade-off across pruning thresholds.

use tsp_sparsify::candidates::{alpha_nearest_candidates, popmusic_candidates, union_candidates, AscentConfig, PopmusicConfig};
use tsp_sparsify::features::{edge_features, node_stats, FeatureMode};
use tsp_sparsify::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};
use tsp_sparsify::learn::{score_edges, train_logistic, TrainConfig, TrainSet};
use tsp_sparsify::oracle::{branch_and_bound, label_edges, BnbBudget};
use tsp_sparsify::prune::{prune_graph, PruneConfig};

fn main() -> tsp_sparsify::Result<()> {
    let gen = GeneratorConfig::default();

    // train on a handful of instances
    let mut ts = TrainSet::new();
    ts.mode = Some(FeatureMode::Union);
    let build = |seed: u64| -> tsp_sparsify::Result<_> {
        let inst = generate_instance(DistributionFamily::Uniform, DistanceType::Euc2d, 40, seed, &gen)?;
        let dm = inst.distance_matrix();
        let alpha = alpha_nearest_candidates(&dm, 10, &AscentConfig::strong())?;
        let pop = popmusic_candidates(&dm, &PopmusicConfig { seed, ..PopmusicConfig::default() })?;
        let graph = union_candidates(&alpha.graph, &pop)?;
        let tour = branch_and_bound(&dm, &BnbBudget::default())?.tour;
        Ok((inst, dm, graph, tour))
    };
    for seed in 0..10u64 {
        let (inst, dm, graph, tour) = build(seed)?;
        let labels = label_edges(&graph, &tour, false)?;
        let stats = node_stats(&dm, 10)?;
        let id = ts.add_instance(&inst.name);
        for (idx, (i, j)) in graph.canonical_edges().into_iter().enumerate() {
            ts.push(id, edge_features(&dm, &graph, &stats, i, j, FeatureMode::Union)?, labels.labels[idx]);
        }
    }
    let (model, _) = train_logistic(&ts, &TrainConfig::default())?;

    // prune a held-out instance at several thresholds
    let (_, dm, graph, tour) = build(99)?;
    let stats = node_stats(&dm, 10)?;
    let rows: Vec<_> = graph
        .canonical_edges()
        .into_iter()
        .map(|(i, j)| edge_features(&dm, &graph, &stats, i, j, FeatureMode::Union))
        .collect::<tsp_sparsify::Result<_>>()?;
    let scores = score_edges(&model, &rows)?;
    let tour_edges = tour.edge_set();
    println!("base: {:.2} edges/node", graph.edges_per_node());
    println!("{:>5} {:>12} {:>10}", "eta", "edges/node", "coverage");
    for eta in [0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let pruned = prune_graph(&graph, &scores, &PruneConfig::new(1.0, eta, 2)?)?;
        let hits = tour_edges.iter().filter(|&&(a, b)| pruned.contains(a, b)).count();
        println!(
            "{eta:>5.2} {:>12.2} {:>10.3}",
            pruned.edges_per_node(),
            hits as f64 / tour.n() as f64
        );
    }
    Ok(())
}
