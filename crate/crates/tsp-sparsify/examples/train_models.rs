//! Trains both linear models on a small labeled corpus and compares their
//! feature-family importances.

use tsp_sparsify::candidates::{alpha_nearest_candidates, popmusic_candidates, union_candidates, AscentConfig, PopmusicConfig};
use tsp_sparsify::features::{edge_features, node_stats, FeatureMode};
use tsp_sparsify::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};
use tsp_sparsify::learn::{feature_importance, train_logistic, train_svm, TrainConfig, TrainSet};
use tsp_sparsify::oracle::{branch_and_bound, label_edges, BnbBudget};

fn main() -> tsp_sparsify::Result<()> {
    let gen = GeneratorConfig::default();
    let mut ts = TrainSet::new();
    ts.mode = Some(FeatureMode::Union);
    for seed in 0..12u64 {
        let inst = generate_instance(DistributionFamily::Uniform, DistanceType::Euc2d, 30, seed, &gen)?;
        let dm = inst.distance_matrix();
        let alpha = alpha_nearest_candidates(&dm, 8, &AscentConfig::strong())?;
        let pop = popmusic_candidates(&dm, &PopmusicConfig { seed, ..PopmusicConfig::default() })?;
        let graph = union_candidates(&alpha.graph, &pop)?;
        let tour = branch_and_bound(&dm, &BnbBudget::default())?.tour;
        let labels = label_edges(&graph, &tour, false)?;
        let stats = node_stats(&dm, 10)?;
        let id = ts.add_instance(&inst.name);
        for (idx, (i, j)) in graph.canonical_edges().into_iter().enumerate() {
            let row = edge_features(&dm, &graph, &stats, i, j, FeatureMode::Union)?;
            ts.push(id, row, labels.labels[idx]);
        }
    }
    println!("pooled {} rows, {} positive", ts.len(), ts.positives());

    for (name, result) in [
        ("logistic", train_logistic(&ts, &TrainConfig::default())?),
        ("squared-hinge svm", train_svm(&ts, &TrainConfig::default())?),
    ] {
        let (model, log) = result;
        println!(
            "\n{name}: {} iterations, objective {:.4}",
            log.last().unwrap().iteration,
            model.train_meta.final_objective
        );
        for (family, share) in feature_importance(&model).families {
            println!("  {family:<24} {share:.3}");
        }
    }
    Ok(())
}
