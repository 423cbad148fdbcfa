//! Runs the end-to-end experiment at smoke scale: generate, build Stage-1
//! unions, label exactly, train, calibrate, prune, and evaluate. Artifacts
//! land in runs/example-pipeline.

use tsp_sparsify::bench::{run_pipeline, ExperimentConfig};

fn main() -> tsp_sparsify::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_file(
        "families = uniform:EUC_2D, clustered:GEO, corridor:MAN_2D\n\
         train_n = 16\ntrain_count = 8\n\
         validation_n = 16\nvalidation_count = 5\n\
         test_sizes = 16\ntest_count = 5\n\
         alpha_k = 8\nknn_k = 8\n\
         eval_gap = true\n\
         seed = 21\n\
         out_dir = runs/example-pipeline\n",
    )?;
    let run = run_pipeline(&cfg)?;
    println!("calibrated eta: {}", run.calibration.eta);
    println!("excluded instances: {}", run.excluded.len());
    if let Some(dominant) = run.provenance_dominant {
        println!("source provenance dominates importances: {dominant}");
    }
    println!("\nfamily importances:");
    for (family, share) in &run.importance.families {
        println!("  {family:<24} {share:.3}");
    }
    println!("\nsummary written to {}:", run.out_dir.display());
    let summary = std::fs::read_to_string(run.out_dir.join("summary.txt"))?;
    println!("{summary}");
    Ok(())
}
