//! Command-line front end: one thin subcommand per pipeline stage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tsp_sparsify::bench::{run_pipeline, ExperimentConfig};
use tsp_sparsify::candidates::{
    alpha_nearest_candidates, popmusic_candidates, read_graph_dump, union_candidates,
    write_graph_dump, write_lkh_candidates, AscentConfig, CandidateGraph, PopmusicConfig,
};
use tsp_sparsify::features::{
    edge_features, feature_dump_header, node_stats, write_feature_rows, FeatureMode,
    FeatureVector, FEATURE_COUNT,
};
use tsp_sparsify::instances::{
    generate_instance, parse_tsplib, write_tsplib, DistanceMatrix, DistanceType,
    DistributionFamily, GeneratorConfig, TspInstance,
};
use tsp_sparsify::learn::{
    load_model, save_model, score_edges, train, training_log_table, LossKind, TrainConfig,
    TrainSet,
};
use tsp_sparsify::localsearch::{solve, SearchBudget};
use tsp_sparsify::oracle::{
    branch_and_bound, brute_force, held_karp, label_edges, read_tour_order, write_tour, BnbBudget,
    Tour,
};
use tsp_sparsify::prune::{
    calibrate_eta, prune_graph, CoverageAveraging, PruneConfig, ValidationInstance,
};
use tsp_sparsify::{Error, Result};

#[derive(Parser)]
#[command(name = "tsp-sparsify", version, about = "Two-stage TSP candidate-graph sparsification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Delimited,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliStage1 {
    Alpha,
    Popmusic,
    Union,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliModel {
    Logistic,
    Svm,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMethod {
    Auto,
    Brute,
    Dp,
    Bb,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Union,
    SingleSource,
}

/// Seed resolution: the flag wins, then TSP_SPARSIFY_SEED, then zero.
fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("TSP_SPARSIFY_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

#[derive(Args)]
struct GenerateArgs {
    /// Spatial distribution
    #[arg(long)]
    family: String,
    /// TSPLIB edge weight type
    #[arg(long = "type")]
    distance_type: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Generator knobs as a key=value file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CandidatesArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "union")]
    mode: CliStage1,
    /// Lowest-alpha edges kept per node
    #[arg(long, default_value_t = 10)]
    alpha_k: usize,
    #[arg(long, default_value_t = 16)]
    starts: usize,
    #[arg(long, default_value_t = 60)]
    subpath: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    method: CliMethod,
    /// Branch-and-bound node budget
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    tour: PathBuf,
    /// Label against a tour that is not proven optimal
    #[arg(long)]
    allow_unproven: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Optional optimal tour supplying labels
    #[arg(long)]
    tour: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    knn_k: usize,
    #[arg(long, value_enum, default_value = "union")]
    mode: CliMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Feature dump files (labeled rows)
    #[arg(long, required = true, num_args = 1..)]
    features: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "logistic")]
    model: CliModel,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    #[arg(long, value_enum, default_value = "union")]
    mode: CliMode,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Training log destination
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Directory of NAME.tsp / NAME.cg / NAME.tour triplets
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.99)]
    target: f64,
    /// Comma-separated eta grid; default 0.50..1.00 step 0.05
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 10)]
    knn_k: usize,
    #[arg(long, value_enum, default_value = "union")]
    mode: CliMode,
    /// Where to store the calibrated model (defaults to --model in place)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PruneArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Override the model's calibrated eta
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long, default_value_t = 2)]
    m_min: usize,
    #[arg(long, default_value_t = 10)]
    knn_k: usize,
    #[arg(long, value_enum, default_value = "union")]
    mode: CliMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Optimal tour for coverage and gap
    #[arg(long)]
    tour: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct PipelineArgs {
    /// Experiment config file (key = value)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker pool size (0 = all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ExportLkhArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance and write it as TSPLIB text
    Generate(GenerateArgs),
    /// Build a Stage-1 candidate graph for an instance
    Candidates(CandidatesArgs),
    /// Solve an instance exactly and write the optimal tour
    Solve(SolveArgs),
    /// Label candidate edges against an optimal tour
    Label(LabelArgs),
    /// Extract edge features (optionally labeled) as delimited text
    Features(FeaturesArgs),
    /// Train a linear edge scorer on feature dumps
    Train(TrainArgs),
    /// Calibrate the pruning threshold on labeled validation data
    Calibrate(CalibrateArgs),
    /// Score and prune a candidate graph with a trained model
    Prune(PruneArgs),
    /// Construct and improve a tour inside a candidate graph
    Eval(EvalArgs),
    /// Run the full experiment pipeline from a config file
    Pipeline(PipelineArgs),
    /// Write a candidate graph in the downstream-solver candidate format
    ExportLkh(ExportLkhArgs),
}

fn read_instance(path: &Path) -> Result<TspInstance> {
    parse_tsplib(&std::fs::read_to_string(path)?)
}

fn read_graph(path: &Path) -> Result<(CandidateGraph, Option<Vec<usize>>)> {
    read_graph_dump(&std::fs::read_to_string(path)?)
}

/// Tours exchanged through files hold exact optima (the solver refuses to
/// write unproven ones without saying so), so they load as proven.
fn read_tour(path: &Path, dm: &DistanceMatrix) -> Result<Tour> {
    let order = read_tour_order(&std::fs::read_to_string(path)?)?;
    Tour::from_order(order, dm, true)
}

fn feature_mode(mode: CliMode) -> FeatureMode {
    match mode {
        CliMode::Union => FeatureMode::Union,
        CliMode::SingleSource => FeatureMode::SingleSource,
    }
}

fn compute_features(
    dm: &DistanceMatrix,
    g: &CandidateGraph,
    knn_k: usize,
    mode: FeatureMode,
) -> Result<Vec<FeatureVector>> {
    let stats = node_stats(dm, knn_k)?;
    g.canonical_edges()
        .iter()
        .map(|&(i, j)| edge_features(dm, g, &stats, i, j, mode))
        .collect()
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut gen_cfg = GeneratorConfig::default();
    if let Some(path) = &args.config {
        // generator knobs ride on the experiment config keys
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(&std::fs::read_to_string(path)?)?;
        gen_cfg = cfg.generator;
    }
    let inst = generate_instance(
        DistributionFamily::parse(&args.family)?,
        DistanceType::parse(&args.distance_type)?,
        args.n,
        resolve_seed(args.seed),
        &gen_cfg,
    )?;
    std::fs::write(&args.out, write_tsplib(&inst))?;
    println!("wrote {} ({} cities)", args.out.display(), inst.n());
    Ok(())
}

fn cmd_candidates(args: CandidatesArgs) -> Result<()> {
    let inst = read_instance(&args.instance)?;
    let dm = inst.distance_matrix();
    let seed = resolve_seed(args.seed);
    let pop_cfg = PopmusicConfig {
        starts: args.starts,
        subpath_len: args.subpath,
        seed,
        ..PopmusicConfig::default()
    };
    let (graph, dads) = match args.mode {
        CliStage1::Alpha => {
            let a = alpha_nearest_candidates(&dm, args.alpha_k, &AscentConfig::strong())?;
            let dads = a.ascent.tree.parent.clone();
            (a.graph, Some(dads))
        }
        CliStage1::Popmusic => (popmusic_candidates(&dm, &pop_cfg)?, None),
        CliStage1::Union => {
            let a = alpha_nearest_candidates(&dm, args.alpha_k, &AscentConfig::strong())?;
            let p = popmusic_candidates(&dm, &pop_cfg)?;
            let dads = a.ascent.tree.parent.clone();
            (union_candidates(&a.graph, &p)?, Some(dads))
        }
    };
    std::fs::write(&args.out, write_graph_dump(&graph, dads.as_deref()))?;
    println!(
        "wrote {} ({} edges, {:.2} edges/node)",
        args.out.display(),
        graph.edge_count(),
        graph.edges_per_node()
    );
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let inst = read_instance(&args.instance)?;
    let dm = inst.distance_matrix();
    let n = dm.n();
    let method = match args.method {
        CliMethod::Auto => {
            if n <= 9 {
                CliMethod::Brute
            } else if n <= 16 {
                CliMethod::Dp
            } else {
                CliMethod::Bb
            }
        }
        m => m,
    };
    let tour = match method {
        CliMethod::Brute => brute_force(&dm)?,
        CliMethod::Dp => held_karp(&dm)?,
        _ => {
            branch_and_bound(
                &dm,
                &BnbBudget {
                    max_nodes: args.budget,
                    ..BnbBudget::default()
                },
            )?
            .tour
        }
    };
    if let Some(out) = &args.out {
        std::fs::write(out, write_tour(&tour))?;
    }
    match args.format {
        OutputFormat::Text => println!(
            "length {} proven {} cities {}",
            tour.length, tour.proven_optimal, tour.order.len()
        ),
        OutputFormat::Delimited => println!("{},{},{}", tour.length, tour.proven_optimal, n),
    }
    Ok(())
}

fn cmd_label(args: LabelArgs) -> Result<()> {
    let inst = read_instance(&args.instance)?;
    let dm = inst.distance_matrix();
    let (graph, _) = read_graph(&args.graph)?;
    let mut tour = read_tour(&args.tour, &dm)?;
    if args.allow_unproven {
        tour.proven_optimal = false;
    }
    let labels = label_edges(&graph, &tour, args.allow_unproven)?;
    let mut out = String::from("i,j,y\n");
    for (&(i, j), &y) in graph.canonical_edges().iter().zip(&labels.labels) {
        out.push_str(&format!("{i},{j},{y}\n"));
    }
    if let Some(path) = &args.out {
        std::fs::write(path, &out)?;
    }
    match args.format {
        OutputFormat::Text => println!(
            "positives {} of {} edges, coverage {:.4}",
            labels.positives,
            labels.total,
            labels.coverage(dm.n())
        ),
        OutputFormat::Delimited => println!(
            "{},{},{}",
            labels.positives,
            labels.total,
            labels.coverage(dm.n())
        ),
    }
    Ok(())
}

fn cmd_features(args: FeaturesArgs) -> Result<()> {
    let inst = read_instance(&args.instance)?;
    let dm = inst.distance_matrix();
    let (graph, _) = read_graph(&args.graph)?;
    let rows = compute_features(&dm, &graph, args.knn_k, feature_mode(args.mode))?;
    let labels = match &args.tour {
        Some(path) => Some(label_edges(&graph, &read_tour(path, &dm)?, false)?),
        None => None,
    };
    let mut out = feature_dump_header();
    write_feature_rows(
        &mut out,
        &inst.name,
        &graph.canonical_edges(),
        &rows,
        labels.as_ref().map(|l| l.labels.as_slice()),
    );
    std::fs::write(&args.out, out)?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    Ok(())
}

fn parse_feature_dump(text: &str, ts: &mut TrainSet) -> Result<usize> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MissingField("feature dump header".to_string()))?;
    if !header.starts_with("instance,i,j,y,") {
        return Err(Error::Parse {
            line: 1,
            message: "not a feature dump (bad header)".to_string(),
        });
    }
    let mut count = 0;
    let mut current: Option<(String, u32)> = None;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 + FEATURE_COUNT {
            return Err(Error::Parse {
                line: lineno + 2,
                message: format!("expected {} fields, got {}", 4 + FEATURE_COUNT, fields.len()),
            });
        }
        let y: i8 = fields[3].parse().map_err(|_| Error::Parse {
            line: lineno + 2,
            message: "malformed label".to_string(),
        })?;
        if y < 0 {
            return Err(Error::Parse {
                line: lineno + 2,
                message: "unlabeled row (y = -1) cannot be used for training".to_string(),
            });
        }
        let mut row = [0.0f64; FEATURE_COUNT];
        for (p, v) in row.iter_mut().enumerate() {
            *v = fields[4 + p].parse().map_err(|_| Error::Parse {
                line: lineno + 2,
                message: format!("malformed feature column {}", 4 + p),
            })?;
        }
        let inst_id = match &current {
            Some((name, id)) if name == fields[0] => *id,
            _ => {
                let id = ts.add_instance(fields[0]);
                current = Some((fields[0].to_string(), id));
                id
            }
        };
        ts.push(inst_id, row, y as u8);
        count += 1;
    }
    Ok(count)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut ts = TrainSet::new();
    ts.mode = Some(feature_mode(args.mode));
    for path in &args.features {
        parse_feature_dump(&std::fs::read_to_string(path)?, &mut ts)?;
    }
    let loss = match args.model {
        CliModel::Logistic => LossKind::Logistic,
        CliModel::Svm => LossKind::SquaredHinge,
    };
    let cfg = TrainConfig {
        c: args.c,
        max_iterations: args.iterations,
        seed: resolve_seed(args.seed),
        ..TrainConfig::default()
    };
    let (model, log) = train(&ts, loss, &cfg)?;
    std::fs::write(&args.out, save_model(&model))?;
    if let Some(path) = &args.log {
        std::fs::write(path, training_log_table(&log))?;
    }
    println!(
        "trained {} on {} rows ({} positive), final objective {:.6}",
        loss.name(),
        ts.len(),
        ts.positives(),
        model.train_meta.final_objective
    );
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let mut model = load_model(&std::fs::read_to_string(&args.model)?)?;
    let grid: Vec<f64> = match &args.grid {
        Some(s) => s
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("malformed eta: {v}")))
            })
            .collect::<Result<_>>()?,
        None => tsp_sparsify::prune::default_eta_grid(),
    };
    // gather NAME.tsp / NAME.cg / NAME.tour triplets
    let mut stems: Vec<PathBuf> = std::fs::read_dir(&args.data)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsp"))
        .collect();
    stems.sort();
    if stems.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no .tsp files under {}",
            args.data.display()
        )));
    }
    let mut validation = Vec::new();
    for tsp in &stems {
        let inst = read_instance(tsp)?;
        let dm = inst.distance_matrix();
        let (graph, _) = read_graph(&tsp.with_extension("cg"))?;
        let tour = read_tour(&tsp.with_extension("tour"), &dm)?;
        let features = compute_features(&dm, &graph, args.knn_k, feature_mode(args.mode))?;
        validation.push(ValidationInstance {
            graph,
            tour,
            features,
        });
    }
    let outcome = calibrate_eta(
        &mut model,
        &validation,
        args.target,
        &grid,
        CoverageAveraging::PerInstance,
        1.0,
        2,
    )?;
    let out = args.out.as_ref().unwrap_or(&args.model);
    std::fs::write(out, save_model(&model))?;
    println!(
        "calibrated eta {} (feasible {}) over {} instances",
        outcome.eta,
        outcome.feasible,
        validation.len()
    );
    Ok(())
}

fn cmd_prune(args: PruneArgs) -> Result<()> {
    let inst = read_instance(&args.instance)?;
    let dm = inst.distance_matrix();
    let (graph, dads) = read_graph(&args.graph)?;
    let model = load_model(&std::fs::read_to_string(&args.model)?)?;
    let eta = match args.eta.or(model.calibrated_eta) {
        Some(e) => e,
        None => {
            return Err(Error::InvalidArgument(
                "model has no calibrated eta; pass --eta".to_string(),
            ))
        }
    };
    let cfg = PruneConfig::new(args.temperature, eta, args.m_min)?;
    let rows = compute_features(&dm, &graph, args.knn_k, feature_mode(args.mode))?;
    let scores = score_edges(&model, &rows)?;
    let pruned = prune_graph(&graph, &scores, &cfg)?;
    std::fs::write(&args.out, write_graph_dump(&pruned, dads.as_deref()))?;
    println!(
        "pruned {:.2} -> {:.2} edges/node at eta {eta}",
        graph.edges_per_node(),
        pruned.edges_per_node()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let inst = read_instance(&args.instance)?;
    let dm = inst.distance_matrix();
    let (graph, _) = read_graph(&args.graph)?;
    let opt = match &args.tour {
        Some(path) => Some(read_tour(path, &dm)?),
        None => None,
    };
    let report = solve(
        &dm,
        &graph,
        resolve_seed(args.seed),
        &SearchBudget::default(),
        opt.as_ref().map(|t| t.length),
    )?;
    let coverage = opt.as_ref().map(|t| {
        t.edge_set()
            .iter()
            .filter(|&&(a, b)| graph.contains(a, b))
            .count() as f64
            / t.n() as f64
    });
    match args.format {
        OutputFormat::Text => {
            println!(
                "edges/node {:.3} | tour length {} | moves {} | fallback steps {}",
                graph.edges_per_node(),
                report.tour.length,
                report.moves_applied,
                report.fallback_steps
            );
            if let Some(c) = coverage {
                println!("coverage {:.4}", c);
            }
            if let Some(g) = report.gap_percent {
                println!("gap {:.4}%", g);
            }
        }
        OutputFormat::Delimited => {
            println!(
                "{},{},{},{},{},{}",
                graph.edges_per_node(),
                report.tour.length,
                report.moves_applied,
                report.fallback_steps,
                coverage.map_or(String::new(), |c| c.to_string()),
                report.gap_percent.map_or(String::new(), |g| g.to_string())
            );
        }
    }
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(&std::fs::read_to_string(path)?)?;
    }
    if let Some(out_dir) = args.out_dir {
        cfg.out_dir = out_dir;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = args.jobs {
        cfg.jobs = jobs;
    }
    let run = run_pipeline(&cfg)?;
    println!(
        "pipeline done: {} metric rows, calibrated eta {}, {} excluded -> {}",
        run.metrics.len(),
        run.calibration.eta,
        run.excluded.len(),
        run.out_dir.display()
    );
    Ok(())
}

fn cmd_export_lkh(args: ExportLkhArgs) -> Result<()> {
    let (graph, dads) = read_graph(&args.graph)?;
    std::fs::write(&args.out, write_lkh_candidates(&graph, dads.as_deref()))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Candidates(args) => cmd_candidates(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Label(args) => cmd_label(args),
        Command::Features(args) => cmd_features(args),
        Command::Train(args) => cmd_train(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Prune(args) => cmd_prune(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::ExportLkh(args) => cmd_export_lkh(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
