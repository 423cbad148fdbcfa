//! Node-level softmax cumulative-mass edge selection and validation-set
//! threshold calibration.
//!
//! For each node, its incident candidate edges are sorted by descending
//! score and given softmax masses exp((s - s_max) / T) normalized over the
//! incident set. The shortest prefix whose cumulative mass reaches eta is
//! retained, never fewer than m_min edges (tour feasibility needs degree
//! two). The pruned graph is the union of the per-endpoint retained sets.

use crate::candidates::CandidateGraph;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::learn::{score_edges, LinearModel};
use crate::oracle::Tour;

#[derive(Debug, Clone, PartialEq)]
pub struct PruneConfig {
    pub temperature: f64,
    pub eta: f64,
    pub m_min: usize,
}

impl PruneConfig {
    pub fn new(temperature: f64, eta: f64, m_min: usize) -> Result<Self> {
        let cfg = Self {
            temperature,
            eta,
            m_min,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_eta(eta: f64) -> Result<Self> {
        Self::new(1.0, eta, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if self.m_min < 2 {
            return Err(Error::InvalidArgument(format!(
                "m_min must be at least 2, got {}",
                self.m_min
            )));
        }
        Ok(())
    }
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            eta: 1.0,
            m_min: 2,
        }
    }
}

/// Selects the retained incident edges of one node: the shortest
/// score-descending prefix whose cumulative softmax mass reaches eta,
/// extended to the degree floor. Ties in score break by ascending edge id,
/// so the retained set is always a prefix of a deterministic order.
pub fn node_softmax_select(incident: &[(usize, f64)], cfg: &PruneConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    if incident.is_empty() {
        return Err(Error::InvalidArgument(
            "softmax selection over an empty incident list".to_string(),
        ));
    }
    if incident.iter().any(|&(_, s)| !s.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite score in incident list".to_string(),
        ));
    }
    let mut order: Vec<(usize, f64)> = incident.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let s_max = order[0].1;
    let masses: Vec<f64> = order
        .iter()
        .map(|&(_, s)| ((s - s_max) / cfg.temperature).exp())
        .collect();
    let total: f64 = kahan_sum(&masses);
    // compensated prefix sums so the eta comparison is stable
    let mut keep = order.len();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (idx, &m) in masses.iter().enumerate() {
        let y = m - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if sum / total >= cfg.eta {
            keep = idx + 1;
            break;
        }
    }
    let keep = keep.max(cfg.m_min.min(order.len()));
    Ok(order[..keep].iter().map(|&(id, _)| id).collect())
}

fn kahan_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Prunes the graph: every node retains its softmax prefix, and an edge
/// survives when either endpoint retains it. Scores align with
/// `g.canonical_edges()`. Provenance flags and alpha values are preserved.
pub fn prune_graph(g: &CandidateGraph, scores: &[f64], cfg: &PruneConfig) -> Result<CandidateGraph> {
    cfg.validate()?;
    let edges = g.canonical_edges();
    if scores.len() != edges.len() {
        return Err(Error::SizeMismatch(format!(
            "{} scores for {} edges",
            scores.len(),
            edges.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("non-finite edge score".to_string()));
    }
    let n = g.n();
    // incident edge ids per node
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (id, &(i, j)) in edges.iter().enumerate() {
        incident[i].push((id, scores[id]));
        incident[j].push((id, scores[id]));
    }
    let mut retained = vec![false; edges.len()];
    for node_edges in incident.iter().filter(|es| !es.is_empty()) {
        for id in node_softmax_select(node_edges, cfg)? {
            retained[id] = true;
        }
    }
    let mut builder = CandidateGraph::builder(n);
    for (id, &(i, j)) in edges.iter().enumerate() {
        if retained[id] {
            let e = g.edge(i, j).expect("edge from canonical list");
            builder.add_edge(i, j, e.source, e.alpha)?;
        }
    }
    builder.build()
}

/// How validation coverage is aggregated during calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageAveraging {
    /// Mean of per-instance coverage fractions.
    PerInstance,
    /// Pooled over all tour edges of all instances.
    Pooled,
}

/// One labeled validation instance with its precomputed feature rows
/// (aligned to the base graph's canonical edges).
pub struct ValidationInstance {
    pub graph: CandidateGraph,
    pub tour: Tour,
    pub features: Vec<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub eta: f64,
    pub mean_coverage: f64,
    pub retained_edges: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOutcome {
    pub eta: f64,
    /// False when no grid point met the coverage target and the fallback
    /// eta of 1.0 was returned.
    pub feasible: bool,
    pub table: Vec<CalibrationRow>,
}

/// Picks the eta with the fewest retained edges among all grid values whose
/// validation coverage meets the target; falls back to 1.0 (keep everything)
/// when none qualifies. The chosen eta is stored in the model.
pub fn calibrate_eta(
    model: &mut LinearModel,
    validation: &[ValidationInstance],
    target_coverage: f64,
    grid: &[f64],
    averaging: CoverageAveraging,
    temperature: f64,
    m_min: usize,
) -> Result<CalibrationOutcome> {
    if validation.is_empty() {
        return Err(Error::InvalidArgument("empty validation set".to_string()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty eta grid".to_string()));
    }
    for v in validation {
        if !v.tour.proven_optimal {
            return Err(Error::UnprovenTour);
        }
    }
    // score once per instance; pruning reuses the scores per grid point
    let scored: Vec<Vec<f64>> = validation
        .iter()
        .map(|v| score_edges(model, &v.features))
        .collect::<Result<_>>()?;

    let mut table = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None; // (edges, eta)
    for &eta in grid {
        let cfg = PruneConfig::new(temperature, eta, m_min)?;
        let mut edges_total = 0usize;
        let mut cov_sum = 0.0f64;
        let mut pooled_hits = 0usize;
        let mut pooled_total = 0usize;
        for (v, scores) in validation.iter().zip(&scored) {
            let pruned = prune_graph(&v.graph, scores, &cfg)?;
            edges_total += pruned.edge_count();
            let tour_edges = v.tour.edge_set();
            let hits = tour_edges
                .iter()
                .filter(|&&(a, b)| pruned.contains(a, b))
                .count();
            cov_sum += hits as f64 / v.tour.n() as f64;
            pooled_hits += hits;
            pooled_total += v.tour.n();
        }
        let mean_coverage = match averaging {
            CoverageAveraging::PerInstance => cov_sum / validation.len() as f64,
            CoverageAveraging::Pooled => pooled_hits as f64 / pooled_total as f64,
        };
        table.push(CalibrationRow {
            eta,
            mean_coverage,
            retained_edges: edges_total,
        });
        if mean_coverage >= target_coverage {
            let better = match best {
                None => true,
                Some((edges, best_eta)) => {
                    edges_total < edges || (edges_total == edges && eta < best_eta)
                }
            };
            if better {
                best = Some((edges_total, eta));
            }
        }
    }
    let outcome = match best {
        Some((_, eta)) => CalibrationOutcome {
            eta,
            feasible: true,
            table,
        },
        None => CalibrationOutcome {
            eta: 1.0,
            feasible: false,
            table,
        },
    };
    model.calibrated_eta = Some(outcome.eta);
    Ok(outcome)
}

/// The default calibration grid: 0.50 to 1.00 in steps of 0.05.
pub fn default_eta_grid() -> Vec<f64> {
    (0..=10).map(|k| 0.5 + 0.05 * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{CandidateGraph, EdgeSource};
    use crate::seeding::Prng;

    fn cfg(eta: f64) -> PruneConfig {
        PruneConfig::new(1.0, eta, 2).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(PruneConfig::new(0.0, 0.5, 2).is_err());
        assert!(PruneConfig::new(1.0, 0.0, 2).is_err());
        assert!(PruneConfig::new(1.0, 1.2, 2).is_err());
        assert!(PruneConfig::new(1.0, 0.5, 1).is_err());
        assert!(PruneConfig::new(1.0, 1.0, 2).is_ok());
    }

    #[test]
    fn uniform_scores_keep_ceil_eta_fraction() {
        // equal scores give masses 1/3 each; two cover 2/3 >= 0.6
        let incident = [(0usize, 2.0), (1, 2.0), (2, 2.0)];
        let kept = node_softmax_select(&incident, &cfg(0.6)).unwrap();
        assert_eq!(kept, vec![0, 1]);
    }

    #[test]
    fn dominant_score_hits_the_floor() {
        // first mass is nearly one, prefix of one lifts to the floor of two
        let incident = [(0usize, 10.0), (1, 0.0), (2, 0.0)];
        let kept = node_softmax_select(&incident, &cfg(0.9)).unwrap();
        assert_eq!(kept, vec![0, 1]);
    }

    #[test]
    fn eta_one_keeps_everything() {
        let incident = [(3usize, 0.9), (7, 0.1), (5, 0.5), (1, 0.2)];
        let kept = node_softmax_select(&incident, &cfg(1.0)).unwrap();
        assert_eq!(kept.len(), 4);
    }

    #[test]
    fn empty_and_nan_inputs_are_rejected() {
        assert!(node_softmax_select(&[], &cfg(0.5)).is_err());
        assert!(node_softmax_select(&[(0, f64::NAN)], &cfg(0.5)).is_err());
    }

    #[test]
    fn ties_break_by_edge_id() {
        let incident = [(9usize, 1.0), (2, 1.0), (5, 1.0)];
        let kept = node_softmax_select(&incident, &cfg(0.5)).unwrap();
        assert_eq!(kept, vec![2, 5]);
    }

    #[test]
    fn shift_invariance() {
        let mut rng = Prng::new(4);
        for _ in 0..50 {
            let incident: Vec<(usize, f64)> = (0..8).map(|id| (id, rng.range_f64(-3.0, 3.0))).collect();
            let shifted: Vec<(usize, f64)> =
                incident.iter().map(|&(id, s)| (id, s + 17.25)).collect();
            let eta = rng.range_f64(0.3, 1.0);
            let a = node_softmax_select(&incident, &cfg(eta)).unwrap();
            let b = node_softmax_select(&shifted, &cfg(eta)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn temperature_limits() {
        let mut rng = Prng::new(9);
        for _ in 0..20 {
            let incident: Vec<(usize, f64)> =
                (0..10).map(|id| (id, rng.range_f64(0.0, 1.0))).collect();
            // near-zero temperature concentrates all mass on the top edge:
            // the prefix is one, lifted to the floor
            let cold = PruneConfig::new(1e-6, 0.99, 2).unwrap();
            let kept = node_softmax_select(&incident, &cold).unwrap();
            assert_eq!(kept.len(), 2);
            // huge temperature flattens the masses to uniform
            let hot = PruneConfig::new(1e6, 0.65, 2).unwrap();
            let kept = node_softmax_select(&incident, &hot).unwrap();
            assert_eq!(kept.len(), 7, "uniform masses need ceil(0.65 * 10)");
        }
    }

    fn toy_graph_scores(seed: u64, n: usize, degree: usize) -> (CandidateGraph, Vec<f64>) {
        let mut rng = Prng::new(seed);
        let mut b = CandidateGraph::builder(n);
        for i in 0..n {
            for d in 1..=degree {
                b.add_edge(i, (i + d) % n, EdgeSource::ALPHA, None).unwrap();
            }
        }
        let g = b.build().unwrap();
        let scores: Vec<f64> = (0..g.edge_count()).map(|_| rng.range_f64(0.0, 1.0)).collect();
        (g, scores)
    }

    #[test]
    fn eta_one_is_identity_on_graphs() {
        let (g, scores) = toy_graph_scores(1, 12, 3);
        let pruned = prune_graph(&g, &scores, &cfg(1.0)).unwrap();
        assert_eq!(pruned, g);
    }

    #[test]
    fn pruned_graph_is_subset_with_degree_floor() {
        for seed in 0..20 {
            let (g, scores) = toy_graph_scores(seed, 16, 4);
            let pruned = prune_graph(&g, &scores, &cfg(0.55)).unwrap();
            for (i, j) in pruned.canonical_edges() {
                assert!(g.contains(i, j), "edge ({i}, {j}) appeared from nowhere");
                assert_eq!(
                    g.edge(i, j).unwrap().source,
                    pruned.edge(i, j).unwrap().source
                );
            }
            for v in 0..16 {
                assert!(pruned.degree(v) >= 2.min(g.degree(v)));
            }
        }
    }

    #[test]
    fn eta_monotone_nesting() {
        for seed in 0..20 {
            let (g, scores) = toy_graph_scores(100 + seed, 14, 4);
            let mut prev: Option<Vec<(usize, usize)>> = None;
            for eta in [0.5, 0.65, 0.8, 0.95, 1.0] {
                let pruned = prune_graph(&g, &scores, &cfg(eta)).unwrap();
                let edges = pruned.canonical_edges();
                if let Some(p) = &prev {
                    for e in p {
                        assert!(edges.contains(e), "nesting violated at eta {eta}");
                    }
                }
                prev = Some(edges);
            }
        }
    }

    #[test]
    fn constant_scores_on_regular_graph_keep_uniform_prefix() {
        // 4-regular ring graph, constant scores: every node keeps
        // max(ceil(eta * 4), 2) incident edges
        let n = 10;
        let mut b = CandidateGraph::builder(n);
        for i in 0..n {
            b.add_edge(i, (i + 1) % n, EdgeSource::ALPHA, None).unwrap();
            b.add_edge(i, (i + 2) % n, EdgeSource::ALPHA, None).unwrap();
        }
        let g = b.build().unwrap();
        assert!(g.neighbors(0).len() == 4);
        let scores = vec![0.5; g.edge_count()];
        for (eta, keep) in [(0.4, 2usize), (0.6, 3), (0.9, 4), (1.0, 4)] {
            let mut incident: Vec<(usize, f64)> = Vec::new();
            let edges = g.canonical_edges();
            for (id, &(i, j)) in edges.iter().enumerate() {
                if i == 0 || j == 0 {
                    incident.push((id, scores[id]));
                }
            }
            let kept = node_softmax_select(&incident, &cfg(eta)).unwrap();
            assert_eq!(kept.len(), keep.max(2), "eta {eta}");
        }
    }

    #[test]
    fn missing_scores_are_rejected() {
        let (g, scores) = toy_graph_scores(7, 10, 3);
        assert!(prune_graph(&g, &scores[..scores.len() - 1], &cfg(0.8)).is_err());
        let mut bad = scores;
        bad[0] = f64::INFINITY;
        assert!(prune_graph(&g, &bad, &cfg(0.8)).is_err());
    }

    mod calibration {
        use super::*;
        use crate::features::{FeatureMode, FEATURE_COUNT};
        use crate::instances::DistanceMatrix;
        use crate::learn::{train_logistic, TrainConfig, TrainSet};
        use crate::oracle::Tour;

        /// Builds a small synthetic validation batch where feature zero
        /// separates tour edges from the rest.
        fn synthetic_validation(count: usize) -> (LinearModel, Vec<ValidationInstance>) {
            let n = 8usize;
            let mut ts = TrainSet::new();
            ts.mode = Some(FeatureMode::Union);
            let mut instances = Vec::new();
            for inst_idx in 0..count {
                let mut rng = Prng::new(inst_idx as u64 + 50);
                // ring tour plus chords
                let mut b = CandidateGraph::builder(n);
                for i in 0..n {
                    b.add_edge(i, (i + 1) % n, EdgeSource::ALPHA, None).unwrap();
                    b.add_edge(i, (i + 2) % n, EdgeSource::POPMUSIC, None).unwrap();
                    b.add_edge(i, (i + 3) % n, EdgeSource::POPMUSIC, None).unwrap();
                }
                let g = b.build().unwrap();
                let data = {
                    let mut d = vec![0i64; n * n];
                    for i in 0..n {
                        for j in 0..n {
                            if i != j {
                                d[i * n + j] = 10;
                            }
                        }
                    }
                    d
                };
                let dm = DistanceMatrix::from_raw(n, data).unwrap();
                let tour = Tour::from_order((0..n).collect(), &dm, true).unwrap();
                let tour_edges = tour.edge_set();
                let id = ts.add_instance(&format!("v{inst_idx}"));
                let mut features = Vec::new();
                for (i, j) in g.canonical_edges() {
                    let y = u8::from(tour_edges.binary_search(&(i, j)).is_ok());
                    let mut row = [0.0f64; FEATURE_COUNT];
                    row[0] = if y == 1 {
                        rng.range_f64(2.0, 3.0)
                    } else {
                        rng.range_f64(-3.0, -2.0)
                    };
                    ts.push(id, row, y);
                    features.push(row);
                }
                instances.push(ValidationInstance { graph: g, tour, features });
            }
            let (model, _) = train_logistic(&ts, &TrainConfig::default()).unwrap();
            (model, instances)
        }

        #[test]
        fn grid_of_one_keeps_base_when_coverage_holds() {
            let (mut model, validation) = synthetic_validation(4);
            let out = calibrate_eta(
                &mut model,
                &validation,
                0.99,
                &[1.0],
                CoverageAveraging::PerInstance,
                1.0,
                2,
            )
            .unwrap();
            assert!(out.feasible);
            assert_eq!(out.eta, 1.0);
            assert_eq!(model.calibrated_eta, Some(1.0));
        }

        #[test]
        fn infeasible_grid_falls_back_to_one() {
            let (mut model, validation) = synthetic_validation(4);
            // an impossible target: more than full coverage
            let out = calibrate_eta(
                &mut model,
                &validation,
                1.01,
                &[0.6, 0.8],
                CoverageAveraging::PerInstance,
                1.0,
                2,
            )
            .unwrap();
            assert!(!out.feasible);
            assert_eq!(out.eta, 1.0);
        }

        #[test]
        fn picks_minimum_feasible_eta_on_monotone_grid() {
            let (mut model, validation) = synthetic_validation(6);
            let grid = default_eta_grid();
            let out = calibrate_eta(
                &mut model,
                &validation,
                0.99,
                &grid,
                CoverageAveraging::PerInstance,
                1.0,
                2,
            )
            .unwrap();
            assert!(out.feasible);
            // retained edges are nondecreasing in eta
            for pair in out.table.windows(2) {
                assert!(pair[0].retained_edges <= pair[1].retained_edges);
            }
            // the selected eta is the smallest feasible grid point, because
            // edge counts grow with eta
            let min_feasible = out
                .table
                .iter()
                .filter(|r| r.mean_coverage >= 0.99)
                .map(|r| r.eta)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(out.eta, min_feasible);
        }

        #[test]
        fn rejects_empty_inputs_and_unproven_tours() {
            let (mut model, mut validation) = synthetic_validation(2);
            assert!(calibrate_eta(
                &mut model,
                &[],
                0.99,
                &[1.0],
                CoverageAveraging::PerInstance,
                1.0,
                2
            )
            .is_err());
            assert!(calibrate_eta(
                &mut model,
                &validation,
                0.99,
                &[],
                CoverageAveraging::PerInstance,
                1.0,
                2
            )
            .is_err());
            validation[0].tour.proven_optimal = false;
            assert!(matches!(
                calibrate_eta(
                    &mut model,
                    &validation,
                    0.99,
                    &[1.0],
                    CoverageAveraging::PerInstance,
                    1.0,
                    2
                ),
                Err(Error::UnprovenTour)
            ));
        }
    }
}
