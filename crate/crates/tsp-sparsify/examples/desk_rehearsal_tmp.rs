use std::time::Instant;
use tsp_sparsify::bench::{run_pipeline, ExperimentConfig};

fn main() -> tsp_sparsify::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_file(
        "train_count = 15\nvalidation_sizes = 50,100\nvalidation_counts = 8,4\ntest_sizes = 50,100\ntest_counts = 12,5\nlabel_budget = 3000\ntrain_iterations = 12000\ncoverage_averaging = pooled\nseed = 3\nout_dir = runs/rehearsal\n",
    )?;
    let t0 = Instant::now();
    let run = run_pipeline(&cfg)?;
    println!("total {:.1}s, excluded {}", t0.elapsed().as_secs_f64(), run.excluded.len());
    for id in &run.excluded { println!("  excluded {id}"); }
    println!("eta {} feasible {}", run.calibration.eta, run.calibration.feasible);
    for row in &run.calibration.table {
        println!("  eta {:.2}: cov {:.5} edges {}", row.eta, row.mean_coverage, row.retained_edges);
    }
    let sel = |split: &str, n: usize, stage: &str, f: &dyn Fn(&tsp_sparsify::bench::MetricsRow) -> f64| -> f64 {
        let rows: Vec<f64> = run.metrics.iter().filter(|r| r.split == split && r.n == n && r.stage == stage).map(f).collect();
        rows.iter().sum::<f64>() / rows.len() as f64
    };
    let b50e = sel("test", 50, "base", &|r| r.edges_per_n);
    let b50c = sel("test", 50, "base", &|r| r.coverage);
    let p50e = sel("test", 50, "pruned", &|r| r.edges_per_n);
    let p50c = sel("test", 50, "pruned", &|r| r.coverage);
    let p100c = sel("test", 100, "pruned", &|r| r.coverage);
    let b100c = sel("test", 100, "base", &|r| r.coverage);
    let b100e = sel("test", 100, "base", &|r| r.edges_per_n);
    let p100e = sel("test", 100, "pruned", &|r| r.edges_per_n);
    println!("test@50 : base E/N {b50e:.3} cov {b50c:.5} | pruned E/N {p50e:.3} cov {p50c:.5} ratio {:.3}", p50e/b50e);
    println!("test@100: base E/N {b100e:.3} cov {b100c:.5} | pruned E/N {p100e:.3} cov {p100c:.5}");
    println!("criterion9: cov>=0.995 {} | E/N in [4.5,8] {}", b50c >= 0.995, (4.5..=8.0).contains(&b50e));
    println!("criterion10: ratio<=0.80 {} | cov>=0.99 {}", p50e/b50e <= 0.80, p50c >= 0.99);
    println!("criterion11: drop {:.4}pp <= 1.0 {}", 100.0*(p50c - p100c), (p50c - p100c) * 100.0 <= 1.0);
    if let Some(d) = run.provenance_dominant { println!("provenance dominant: {d}"); }
    for (fam, share) in &run.importance.families { println!("  {fam:<24} {share:.3}"); }
    posthoc(&run)?;
    Ok(())
}

// post-hoc: coverage at both sizes across eta, using the run's model
fn posthoc(run: &tsp_sparsify::bench::RunArtifacts) -> tsp_sparsify::Result<()> {
    use tsp_sparsify::candidates::{alpha_nearest_candidates, popmusic_candidates, union_candidates};
    use tsp_sparsify::features::{edge_features, node_stats, FeatureMode};
    use tsp_sparsify::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};
    use tsp_sparsify::oracle::{branch_and_bound, BnbBudget};
    use tsp_sparsify::learn::score_edges;
    use tsp_sparsify::prune::{prune_graph, PruneConfig};
    use tsp_sparsify::bench::coverage_of;
    let gcfg = GeneratorConfig::default();
    let cfg = &run.config;
    for n in [50usize, 100] {
        let mut per_eta: Vec<(f64, f64, f64)> = vec![];
        for eta in [0.5, 0.55, 0.6, 0.65, 0.7, 0.8] { per_eta.push((eta, 0.0, 0.0)); }
        let mut cnt = 0.0;
        for fam in DistributionFamily::ALL {
            for dt in DistanceType::ALL {
                let seed = 777_000 + n as u64 * 100 + fam as u64 * 10 + dt as u64;
                let inst = generate_instance(fam, dt, n, seed, &gcfg)?;
                let dm = inst.distance_matrix();
                let out = branch_and_bound(&dm, &BnbBudget { max_nodes: 3000, max_queue: 150_000 })?;
                if !out.tour.proven_optimal { continue; }
                let a = alpha_nearest_candidates(&dm, cfg.alpha_k, &cfg.ascent)?;
                let p = popmusic_candidates(&dm, &cfg.popmusic_config(seed))?;
                let base = union_candidates(&a.graph, &p)?;
                let stats = node_stats(&dm, cfg.knn_k)?;
                let rows: Vec<_> = base.canonical_edges().iter()
                    .map(|&(i, j)| edge_features(&dm, &base, &stats, i, j, FeatureMode::Union))
                    .collect::<tsp_sparsify::Result<_>>()?;
                let scores = score_edges(&run.model, &rows)?;
                for entry in per_eta.iter_mut() {
                    let pruned = prune_graph(&base, &scores, &PruneConfig::new(1.0, entry.0, 2)?)?;
                    entry.1 += coverage_of(&pruned, &out.tour);
                    entry.2 += pruned.edges_per_node() / base.edges_per_node();
                }
                cnt += 1.0;
            }
        }
        for (eta, cov, ratio) in per_eta {
            println!("posthoc n={n} eta {eta:.2}: cov {:.5} ratio {:.3}", cov / cnt, ratio / cnt);
        }
    }
    Ok(())
}
