//! End-to-end experiment harness: dataset generation, Stage-1 graphs, exact
//! labeling, training, threshold calibration, pruning, evaluation, and
//! lost-edge provenance analysis. A run is fully reproducible from its
//! manifest: identical configuration and seed produce byte-identical
//! metrics files.

mod config;
mod metrics;
mod summary;

pub use config::{ExperimentConfig, FamilySpec, Stage1Mode};
pub use metrics::{
    coverage_of, graph_provenance_shares, lost_edge_analysis, LostEdgeRecord, MetricsRow,
    ProvenanceClass, ProvenanceShares, TimingRow,
};
pub use summary::{summarize, summary_csv, summary_table, SummaryGroup};

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use crate::candidates::{
    alpha_nearest_candidates, popmusic_candidates, union_candidates, CandidateGraph,
};
use crate::error::{Error, Result};
use crate::features::{edge_features, node_stats, FeatureMode, FeatureVector};
use crate::learn::{
    feature_importance, importance_table, save_model, train, training_log_table, FeatureImportance,
    LinearModel, TrainLogRow, TrainSet,
};
use crate::localsearch::{solve, SearchBudget};
use crate::oracle::{branch_and_bound, label_edges, BnbBudget, EdgeLabels, Tour};
use crate::prune::{calibrate_eta, prune_graph, CalibrationOutcome, PruneConfig, ValidationInstance};
use crate::seeding::derive;

/// Everything a finished run produced, alongside the files in `out_dir`.
pub struct RunArtifacts {
    pub config: ExperimentConfig,
    pub model: LinearModel,
    pub training_log: Vec<TrainLogRow>,
    pub calibration: CalibrationOutcome,
    pub metrics: Vec<MetricsRow>,
    pub timings: Vec<TimingRow>,
    pub lost_edges: Vec<LostEdgeRecord>,
    /// Per-family aggregate (lost-edge shares, base-graph shares).
    pub lost_edge_shares: Vec<(String, ProvenanceShares, ProvenanceShares)>,
    pub excluded: Vec<String>,
    pub importance: FeatureImportance,
    /// Soft check: does the source-provenance family dominate importances?
    pub provenance_dominant: Option<bool>,
    pub manifest: String,
    pub out_dir: PathBuf,
}

/// One labeled instance flowing through the pipeline.
struct Labeled {
    id: String,
    family: FamilySpec,
    n: usize,
    split: &'static str,
    base: CandidateGraph,
    tour: Tour,
    features: Vec<FeatureVector>,
    labels: EdgeLabels,
    timing: TimingRow,
    seed: u64,
}

enum Processed {
    Labeled(Box<Labeled>),
    Excluded { id: String },
}

/// Split tags keep the seed namespaces of the three splits disjoint.
fn split_tag(split: &str) -> u64 {
    match split {
        "train" => 0x7261_494e,
        "validation" => 0x7641_4c69,
        _ => 0x7445_5354,
    }
}

fn family_tag(f: &FamilySpec) -> u64 {
    let fam = f.family as u64;
    let dt = f.distance_type as u64;
    fam * 16 + dt + 1
}

fn instance_seed(cfg: &ExperimentConfig, split: &str, family: &FamilySpec, n: usize, idx: usize) -> u64 {
    let s = derive(cfg.seed, split_tag(split));
    let s = derive(s, family_tag(family));
    let s = derive(s, n as u64);
    derive(s, idx as u64)
}

fn process_instance(
    cfg: &ExperimentConfig,
    split: &'static str,
    family: &FamilySpec,
    n: usize,
    idx: usize,
) -> Result<Processed> {
    let seed = instance_seed(cfg, split, family, n, idx);
    let id = format!("{split}-{}-n{n}-{idx:04}", family.name());
    let inst = crate::instances::generate_instance(
        family.family,
        family.distance_type,
        n,
        seed,
        &cfg.generator,
    )?;
    let dm = inst.distance_matrix();
    let mut timing = TimingRow {
        instance_id: id.clone(),
        ..TimingRow::default()
    };

    // Stage 1
    let t0 = Instant::now();
    let mut ascent_cfg = cfg.ascent.clone();
    ascent_cfg.special = 0;
    let (base, alpha_graph, pop_graph) = match cfg.stage1 {
        Stage1Mode::Alpha => {
            let a = alpha_nearest_candidates(&dm, cfg.alpha_k, &ascent_cfg)?;
            (a.graph, None, None)
        }
        Stage1Mode::Popmusic => {
            let p = popmusic_candidates(&dm, &cfg.popmusic_config(derive(seed, 0x706f70)))?;
            (p, None, None)
        }
        Stage1Mode::Union => {
            let a = alpha_nearest_candidates(&dm, cfg.alpha_k, &ascent_cfg)?;
            let p = popmusic_candidates(&dm, &cfg.popmusic_config(derive(seed, 0x706f70)))?;
            let u = union_candidates(&a.graph, &p)?;
            (u, Some(a.graph), Some(p))
        }
    };
    timing.stage1_ms = t0.elapsed().as_secs_f64() * 1000.0;

    // Exact labels
    let t0 = Instant::now();
    let outcome = branch_and_bound(
        &dm,
        &BnbBudget {
            max_nodes: cfg.label_budget,
            ..BnbBudget::default()
        },
    )?;
    timing.label_ms = t0.elapsed().as_secs_f64() * 1000.0;
    if !outcome.tour.proven_optimal {
        return Ok(Processed::Excluded { id });
    }
    let tour = outcome.tour;
    let labels = label_edges(&base, &tour, false)?;

    // coverage of the union never falls below either part
    if let (Some(a), Some(p)) = (&alpha_graph, &pop_graph) {
        let ca = coverage_of(a, &tour);
        let cp = coverage_of(p, &tour);
        let cu = labels.coverage(n);
        assert!(
            cu >= ca.max(cp) - 1e-12,
            "{id}: union coverage {cu} below parts {ca}/{cp}"
        );
    }

    // Features
    let t0 = Instant::now();
    let stats = node_stats(&dm, cfg.knn_k)?;
    let mode = if cfg.stage1 == Stage1Mode::Union {
        FeatureMode::Union
    } else {
        FeatureMode::SingleSource
    };
    let features: Vec<FeatureVector> = base
        .canonical_edges()
        .iter()
        .map(|&(i, j)| edge_features(&dm, &base, &stats, i, j, mode))
        .collect::<Result<_>>()?;
    timing.features_ms = t0.elapsed().as_secs_f64() * 1000.0;

    Ok(Processed::Labeled(Box::new(Labeled {
        id,
        family: *family,
        n,
        split,
        base,
        tour,
        features,
        labels,
        timing,
        seed,
    })))
}

fn process_split(
    cfg: &ExperimentConfig,
    split: &'static str,
    n: usize,
    count: usize,
) -> Result<(Vec<Labeled>, Vec<String>)> {
    let tasks: Vec<(usize, usize)> = (0..cfg.families.len())
        .flat_map(|f| (0..count).map(move |i| (f, i)))
        .collect();
    let results: Vec<Result<Processed>> = tasks
        .par_iter()
        .map(|&(f, i)| process_instance(cfg, split, &cfg.families[f], n, i))
        .collect();
    let mut labeled = Vec::new();
    let mut excluded = Vec::new();
    for r in results {
        match r? {
            Processed::Labeled(l) => labeled.push(*l),
            Processed::Excluded { id } => excluded.push(id),
        }
    }
    Ok((labeled, excluded))
}

fn base_metrics_row(l: &Labeled) -> MetricsRow {
    MetricsRow {
        split: l.split.to_string(),
        family: l.family.name(),
        n: l.n,
        instance_id: l.id.clone(),
        stage: "base".to_string(),
        edges_per_n: l.base.edges_per_node(),
        coverage: l.labels.coverage(l.n),
        gap_percent: None,
        fell_back: None,
    }
}

/// Runs the full experiment and writes all artifacts into `cfg.out_dir`.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let run = || run_pipeline_inner(cfg);
    if cfg.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    }
}

fn run_pipeline_inner(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let mut metrics: Vec<MetricsRow> = Vec::new();
    let mut timings: Vec<TimingRow> = Vec::new();
    let mut excluded: Vec<String> = Vec::new();

    // ---- train split: label, pool rows, fit the model
    let (train_instances, train_excluded) =
        process_split(cfg, "train", cfg.train_n, cfg.train_count)?;
    excluded.extend(train_excluded);
    if train_instances.is_empty() {
        return Err(Error::InvalidArgument(
            "no train instance survived labeling".to_string(),
        ));
    }
    let mut train_set = TrainSet::new();
    train_set.mode = Some(if cfg.stage1 == Stage1Mode::Union {
        FeatureMode::Union
    } else {
        FeatureMode::SingleSource
    });
    for l in &train_instances {
        let inst_id = train_set.add_instance(&l.id);
        for (row, &y) in l.features.iter().zip(&l.labels.labels) {
            train_set.push(inst_id, *row, y);
        }
        metrics.push(base_metrics_row(l));
        timings.push(l.timing.clone());
    }
    let train_rows = train_set.len();
    let train_positives = train_set.positives();
    let (mut model, training_log) = train(&train_set, cfg.model, &cfg.train)?;
    let feature_dump = if cfg.dump_features {
        let mut dump = crate::features::feature_dump_header();
        for l in &train_instances {
            crate::features::write_feature_rows(
                &mut dump,
                &l.id,
                &l.base.canonical_edges(),
                &l.features,
                Some(&l.labels.labels),
            );
        }
        Some(dump)
    } else {
        None
    };
    drop(train_instances);

    // ---- validation split: calibrate the pruning threshold
    let mut val_instances = Vec::new();
    for (&n, &count) in cfg.validation_sizes.iter().zip(&cfg.validation_counts) {
        let (labeled, val_excluded) = process_split(cfg, "validation", n, count)?;
        val_instances.extend(labeled);
        excluded.extend(val_excluded);
    }
    if val_instances.is_empty() {
        return Err(Error::InvalidArgument(
            "no validation instance survived labeling".to_string(),
        ));
    }
    for l in &val_instances {
        metrics.push(base_metrics_row(l));
        timings.push(l.timing.clone());
    }
    let validation: Vec<ValidationInstance> = val_instances
        .into_iter()
        .map(|l| ValidationInstance {
            graph: l.base,
            tour: l.tour,
            features: l.features,
        })
        .collect();
    let calibration = calibrate_eta(
        &mut model,
        &validation,
        cfg.coverage_target,
        &cfg.eta_grid,
        cfg.averaging,
        cfg.temperature,
        cfg.m_min,
    )?;
    drop(validation);
    let prune_cfg = PruneConfig::new(cfg.temperature, calibration.eta, cfg.m_min)?;

    // ---- test splits: prune, measure, analyze losses
    let mut lost_edges: Vec<LostEdgeRecord> = Vec::new();
    let mut shares_by_family: Vec<(String, [usize; 3], ProvenanceShares)> = Vec::new();
    for (&n, &count) in cfg.test_sizes.iter().zip(&cfg.test_counts) {
        let (test_instances, test_excluded) = process_split(cfg, "test", n, count)?;
        excluded.extend(test_excluded);
        let model_ref = &model;
        let prune_ref = &prune_cfg;
        let evaluated: Vec<Result<(MetricsRow, MetricsRow, TimingRow, Vec<LostEdgeRecord>, ProvenanceShares)>> =
            test_instances
                .par_iter()
                .map(|l| {
                    let mut timing = l.timing.clone();
                    let t0 = Instant::now();
                    let scores = crate::learn::score_edges(model_ref, &l.features)?;
                    let pruned = prune_graph(&l.base, &scores, prune_ref)?;
                    timing.prune_ms = t0.elapsed().as_secs_f64() * 1000.0;
                    assert!(
                        pruned.edge_count() <= l.base.edge_count(),
                        "{}: pruned graph larger than base",
                        l.id
                    );
                    let mut base_row = base_metrics_row(l);
                    let mut pruned_row = MetricsRow {
                        stage: "pruned".to_string(),
                        edges_per_n: pruned.edges_per_node(),
                        coverage: coverage_of(&pruned, &l.tour),
                        ..base_row.clone()
                    };
                    let (records, loss_shares) =
                        lost_edge_analysis(&l.base, &pruned, &l.tour, &l.features, &l.id)?;
                    if cfg.eval_gap {
                        let t0 = Instant::now();
                        let seed = derive(l.seed, 0x676170);
                        let dm = crate::instances::generate_instance(
                            l.family.family,
                            l.family.distance_type,
                            l.n,
                            l.seed,
                            &cfg.generator,
                        )?
                        .distance_matrix();
                        let base_report =
                            solve(&dm, &l.base, seed, &SearchBudget::default(), Some(l.tour.length))?;
                        let pruned_report =
                            solve(&dm, &pruned, seed, &SearchBudget::default(), Some(l.tour.length))?;
                        base_row.gap_percent = base_report.gap_percent;
                        base_row.fell_back = Some(base_report.fell_back_to_full_graph);
                        pruned_row.gap_percent = pruned_report.gap_percent;
                        pruned_row.fell_back = Some(pruned_report.fell_back_to_full_graph);
                        timing.eval_ms = t0.elapsed().as_secs_f64() * 1000.0;
                    }
                    Ok((base_row, pruned_row, timing, records, loss_shares))
                })
                .collect();
        for (l, r) in test_instances.iter().zip(evaluated) {
            let (base_row, pruned_row, timing, records, _) = r?;
            metrics.push(base_row);
            metrics.push(pruned_row);
            timings.push(timing);
            // per-family loss counts aggregate across instances
            let fam_name = l.family.name();
            let entry = match shares_by_family.iter_mut().find(|(f, _, _)| *f == fam_name) {
                Some(e) => e,
                None => {
                    shares_by_family.push((
                        fam_name.clone(),
                        [0; 3],
                        graph_provenance_shares(&l.base),
                    ));
                    shares_by_family.last_mut().unwrap()
                }
            };
            for rec in &records {
                match rec.class {
                    ProvenanceClass::DualSource => entry.1[0] += 1,
                    ProvenanceClass::AlphaOnly => entry.1[1] += 1,
                    ProvenanceClass::PopOnly => entry.1[2] += 1,
                    ProvenanceClass::Unflagged => {}
                }
            }
            lost_edges.extend(records);
        }
    }
    shares_by_family.sort_by(|a, b| a.0.cmp(&b.0));
    let lost_edge_shares: Vec<(String, ProvenanceShares, ProvenanceShares)> = shares_by_family
        .into_iter()
        .map(|(f, counts, base_shares)| {
            (
                f,
                ProvenanceShares::from_counts(counts[0], counts[1], counts[2]),
                base_shares,
            )
        })
        .collect();

    // ---- importance and the provenance soft check
    let importance = feature_importance(&model);
    let provenance_dominant = if cfg.stage1 == Stage1Mode::Union {
        let prov = importance
            .families
            .iter()
            .find(|(n, _)| n == "source_provenance")
            .map(|(_, s)| *s)
            .unwrap_or(0.0);
        let max_other = importance
            .families
            .iter()
            .filter(|(n, _)| n != "source_provenance")
            .map(|(_, s)| *s)
            .fold(0.0f64, f64::max);
        Some(prov >= max_other)
    } else {
        None
    };

    excluded.sort();
    let groups = summarize(&metrics);

    // ---- manifest
    let mut manifest = String::new();
    manifest.push_str("tsp-sparsify run manifest v1\n");
    manifest.push_str(&format!("code_version {}\n", env!("CARGO_PKG_VERSION")));
    manifest.push_str(&format!(
        "feature_schema {}\n",
        crate::features::FEATURE_SCHEMA_VERSION
    ));
    manifest.push_str("[config]\n");
    manifest.push_str(&cfg.echo());
    manifest.push_str("[result]\n");
    manifest.push_str(&format!("train_rows {train_rows}\n"));
    manifest.push_str(&format!("train_positives {train_positives}\n"));
    manifest.push_str(&format!("calibrated_eta {}\n", calibration.eta));
    manifest.push_str(&format!("calibration_feasible {}\n", calibration.feasible));
    manifest.push_str(&format!("excluded_count {}\n", excluded.len()));
    if let Some(dominant) = provenance_dominant {
        manifest.push_str(&format!("provenance_dominant {dominant}\n"));
        if !dominant {
            manifest.push_str(
                "warning source-provenance family does not dominate feature importance\n",
            );
        }
    }
    manifest.push_str("[excluded]\n");
    for id in &excluded {
        manifest.push_str(&format!("{id} unproven-within-budget\n"));
    }
    manifest.push_str("end\n");

    // ---- write everything
    let out_dir = cfg.out_dir.clone();
    std::fs::create_dir_all(&out_dir)?;
    let write = |name: &str, content: &str| -> Result<()> {
        std::fs::write(out_dir.join(name), content)?;
        Ok(())
    };
    write("manifest.txt", &manifest)?;
    let mut metrics_csv = String::from(metrics::metrics_csv_header());
    for row in &metrics {
        metrics_csv.push_str(&metrics::metrics_csv_row(row));
    }
    write("metrics.csv", &metrics_csv)?;
    let mut timings_csv = String::from(metrics::timings_csv_header());
    for row in &timings {
        timings_csv.push_str(&metrics::timings_csv_row(row));
    }
    write("timings.csv", &timings_csv)?;
    write("summary.txt", &summary_table(&groups))?;
    write("summary.csv", &summary_csv(&groups))?;
    write("model.txt", &save_model(&model))?;
    write("training_log.csv", &training_log_table(&training_log))?;
    let mut calib_csv = String::from("eta,mean_coverage,retained_edges\n");
    for row in &calibration.table {
        calib_csv.push_str(&format!(
            "{},{},{}\n",
            row.eta, row.mean_coverage, row.retained_edges
        ));
    }
    write("calibration.csv", &calib_csv)?;
    write("feature_importance.csv", &importance_table(&importance))?;
    let mut lost_csv = metrics::lost_edges_csv_header();
    for rec in &lost_edges {
        lost_csv.push_str(&metrics::lost_edges_csv_row(rec));
    }
    write("lost_edges.csv", &lost_csv)?;
    let mut shares_csv = String::from(
        "family,lost_dual_source,lost_alpha_only,lost_pop_only,base_dual_source,base_alpha_only,base_pop_only\n",
    );
    for (fam, lost, base) in &lost_edge_shares {
        shares_csv.push_str(&format!(
            "{fam},{},{},{},{},{},{}\n",
            lost.dual_source,
            lost.alpha_only,
            lost.pop_only,
            base.dual_source,
            base.alpha_only,
            base.pop_only
        ));
    }
    write("lost_edge_shares.csv", &shares_csv)?;
    if let Some(dump) = feature_dump {
        write("features_train.csv", &dump)?;
    }

    Ok(RunArtifacts {
        config: cfg.clone(),
        model,
        training_log,
        calibration,
        metrics,
        timings,
        lost_edges,
        lost_edge_shares,
        excluded,
        importance,
        provenance_dominant,
        manifest,
        out_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke_config(dir: &std::path::Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(
            "families = uniform:EUC_2D, clustered:MAN_2D\n\
             train_n = 12\ntrain_count = 6\n\
             validation_n = 12\nvalidation_count = 4\n\
             test_sizes = 12\ntest_count = 4\n\
             alpha_k = 6\nknn_k = 6\n\
             eval_gap = true\nseed = 5\n",
        )
        .unwrap();
        cfg.out_dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn smoke_run_produces_all_artifacts_and_is_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = smoke_config(&tmp.path().join("a"));
        let run1 = run_pipeline(&cfg).unwrap();
        assert!(run1.excluded.is_empty(), "smoke labels must all prove");
        assert!(run1.calibration.feasible);
        // all test rows have pruned <= base density
        for pair in run1
            .metrics
            .iter()
            .filter(|r| r.split == "test" && r.stage == "base")
        {
            let pruned = run1
                .metrics
                .iter()
                .find(|r| r.instance_id == pair.instance_id && r.stage == "pruned")
                .expect("pruned row");
            assert!(pruned.edges_per_n <= pair.edges_per_n + 1e-12);
            assert!(pruned.coverage <= pair.coverage + 1e-12);
        }
        for name in [
            "manifest.txt",
            "metrics.csv",
            "timings.csv",
            "summary.txt",
            "summary.csv",
            "model.txt",
            "training_log.csv",
            "calibration.csv",
            "feature_importance.csv",
            "lost_edges.csv",
            "lost_edge_shares.csv",
        ] {
            assert!(cfg.out_dir.join(name).exists(), "missing {name}");
        }
        // identical manifest -> byte-identical metrics
        let mut cfg2 = smoke_config(&tmp.path().join("b"));
        cfg2.jobs = 2; // determinism must not depend on worker count
        let _run2 = run_pipeline(&cfg2).unwrap();
        let m1 = std::fs::read(cfg.out_dir.join("metrics.csv")).unwrap();
        let m2 = std::fs::read(cfg2.out_dir.join("metrics.csv")).unwrap();
        assert_eq!(m1, m2);
        let s1 = std::fs::read(cfg.out_dir.join("summary.csv")).unwrap();
        let s2 = std::fs::read(cfg2.out_dir.join("summary.csv")).unwrap();
        assert_eq!(s1, s2);
        let mo1 = std::fs::read(cfg.out_dir.join("model.txt")).unwrap();
        let mo2 = std::fs::read(cfg2.out_dir.join("model.txt")).unwrap();
        assert_eq!(mo1, mo2);
    }

    #[test]
    fn single_source_mode_runs_without_provenance() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = smoke_config(tmp.path());
        cfg.stage1 = Stage1Mode::Alpha;
        cfg.families.truncate(1);
        let run = run_pipeline(&cfg).unwrap();
        assert!(run.provenance_dominant.is_none());
        // provenance weights masked out of training
        assert_eq!(run.model.weights[14], 0.0);
        assert_eq!(run.model.weights[15], 0.0);
    }
}
