//! Measures how pruning affects attainable tour quality: candidate-restricted
//! local search on the base graph versus the pruned graph, against the exact
//! optimum.

use tsp_sparsify::candidates::{alpha_nearest_candidates, popmusic_candidates, union_candidates, AscentConfig, PopmusicConfig};
use tsp_sparsify::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};
use tsp_sparsify::localsearch::{solve, SearchBudget};
use tsp_sparsify::oracle::held_karp;
use tsp_sparsify::prune::{prune_graph, PruneConfig};

fn main() -> tsp_sparsify::Result<()> {
    let gen = GeneratorConfig::default();
    let mut base_gaps = Vec::new();
    let mut pruned_gaps = Vec::new();
    for seed in 0..10u64 {
        let inst = generate_instance(DistributionFamily::Uniform, DistanceType::Euc2d, 14, seed, &gen)?;
        let dm = inst.distance_matrix();
        let alpha = alpha_nearest_candidates(&dm, 6, &AscentConfig::strong())?;
        let pop = popmusic_candidates(&dm, &PopmusicConfig { seed, ..PopmusicConfig::default() })?;
        let base = union_candidates(&alpha.graph, &pop)?;
        let opt = held_karp(&dm)?;

        // alpha values act as a stand-in score: smaller alpha is better
        let scores: Vec<f64> = base
            .canonical_edges()
            .iter()
            .map(|&(i, j)| {
                let alpha = base.edge(i, j).unwrap().alpha.unwrap_or(0.0);
                1.0 / (1.0 + alpha / 1000.0)
            })
            .collect();
        let pruned = prune_graph(&base, &scores, &PruneConfig::new(1.0, 0.7, 2)?)?;

        let on_base = solve(&dm, &base, seed, &SearchBudget::default(), Some(opt.length))?;
        let on_pruned = solve(&dm, &pruned, seed, &SearchBudget::default(), Some(opt.length))?;
        base_gaps.push(on_base.gap_percent.unwrap());
        pruned_gaps.push(on_pruned.gap_percent.unwrap());
        println!(
            "seed {seed}: base {:.2}/node gap {:.2}% | pruned {:.2}/node gap {:.2}% (fallback steps {})",
            base.edges_per_node(),
            on_base.gap_percent.unwrap(),
            pruned.edges_per_node(),
            on_pruned.gap_percent.unwrap(),
            on_pruned.fallback_steps
        );
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "\nmean gap: base {:.3}% vs pruned {:.3}%",
        mean(&base_gaps),
        mean(&pruned_gaps)
    );
    Ok(())
}
