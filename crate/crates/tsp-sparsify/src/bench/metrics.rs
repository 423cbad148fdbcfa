//! Metric rows, coverage, and lost-edge provenance analysis.

use crate::candidates::{CandidateGraph, EdgeSource};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_NAMES};
use crate::oracle::Tour;

/// One per-instance, per-stage measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub split: String,
    pub family: String,
    pub n: usize,
    pub instance_id: String,
    /// "base" or "pruned".
    pub stage: String,
    pub edges_per_n: f64,
    pub coverage: f64,
    pub gap_percent: Option<f64>,
    pub fell_back: Option<bool>,
}

/// Wall-clock timings per stage, kept out of the deterministic metrics file.
#[derive(Debug, Clone, Default)]
pub struct TimingRow {
    pub instance_id: String,
    pub stage1_ms: f64,
    pub label_ms: f64,
    pub features_ms: f64,
    pub prune_ms: f64,
    pub eval_ms: f64,
}

/// Fraction of the tour's edges present in the candidate graph. Meaningful
/// when the tour is the instance's optimal tour.
pub fn coverage_of(g: &CandidateGraph, t: &Tour) -> f64 {
    let hits = t
        .edge_set()
        .iter()
        .filter(|&&(a, b)| g.contains(a, b))
        .count();
    hits as f64 / t.n() as f64
}

/// Provenance class of a base edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProvenanceClass {
    DualSource,
    AlphaOnly,
    PopOnly,
    /// Single-source runs have no provenance split.
    Unflagged,
}

impl ProvenanceClass {
    pub fn of(source: EdgeSource) -> Self {
        match (
            source.contains(EdgeSource::ALPHA),
            source.contains(EdgeSource::POPMUSIC),
        ) {
            (true, true) => ProvenanceClass::DualSource,
            (true, false) => ProvenanceClass::AlphaOnly,
            (false, true) => ProvenanceClass::PopOnly,
            (false, false) => ProvenanceClass::Unflagged,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProvenanceClass::DualSource => "dual-source",
            ProvenanceClass::AlphaOnly => "alpha-only",
            ProvenanceClass::PopOnly => "pop-only",
            ProvenanceClass::Unflagged => "unflagged",
        }
    }
}

/// An optimal-tour edge present in the base graph but pruned away.
#[derive(Debug, Clone, PartialEq)]
pub struct LostEdgeRecord {
    pub instance_id: String,
    pub i: usize,
    pub j: usize,
    pub class: ProvenanceClass,
    pub features: FeatureVector,
}

/// Class shares over a set of edges; they sum to one when the set is
/// nonempty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProvenanceShares {
    pub dual_source: f64,
    pub alpha_only: f64,
    pub pop_only: f64,
}

impl ProvenanceShares {
    pub fn from_counts(dual: usize, alpha: usize, pop: usize) -> Self {
        let total = (dual + alpha + pop) as f64;
        if total == 0.0 {
            return Self::default();
        }
        Self {
            dual_source: dual as f64 / total,
            alpha_only: alpha as f64 / total,
            pop_only: pop as f64 / total,
        }
    }
}

/// Records every extra-lost optimal edge (present in base, absent from
/// pruned) with its provenance class and feature row. `features` aligns
/// with the base graph's canonical edges.
pub fn lost_edge_analysis(
    base: &CandidateGraph,
    pruned: &CandidateGraph,
    tour: &Tour,
    features: &[FeatureVector],
    instance_id: &str,
) -> Result<(Vec<LostEdgeRecord>, ProvenanceShares)> {
    let base_edges = base.canonical_edges();
    if features.len() != base_edges.len() {
        return Err(Error::SizeMismatch(format!(
            "{} feature rows for {} base edges",
            features.len(),
            base_edges.len()
        )));
    }
    for (i, j) in pruned.canonical_edges() {
        if !base.contains(i, j) {
            return Err(Error::InvalidArgument(format!(
                "pruned graph is not a subset of the base: edge ({i}, {j})"
            )));
        }
    }
    let mut records = Vec::new();
    let (mut dual, mut alpha, mut pop) = (0usize, 0usize, 0usize);
    for (idx, &(i, j)) in base_edges.iter().enumerate() {
        if pruned.contains(i, j) {
            continue;
        }
        let in_tour = tour.edge_set().binary_search(&(i, j)).is_ok();
        if !in_tour {
            continue;
        }
        let class = ProvenanceClass::of(base.edge(i, j).expect("base edge").source);
        match class {
            ProvenanceClass::DualSource => dual += 1,
            ProvenanceClass::AlphaOnly => alpha += 1,
            ProvenanceClass::PopOnly => pop += 1,
            ProvenanceClass::Unflagged => {}
        }
        records.push(LostEdgeRecord {
            instance_id: instance_id.to_string(),
            i,
            j,
            class,
            features: features[idx],
        });
    }
    Ok((records, ProvenanceShares::from_counts(dual, alpha, pop)))
}

/// Provenance class shares over all edges of a graph.
pub fn graph_provenance_shares(g: &CandidateGraph) -> ProvenanceShares {
    let (mut dual, mut alpha, mut pop) = (0usize, 0usize, 0usize);
    for (i, j) in g.canonical_edges() {
        match ProvenanceClass::of(g.edge(i, j).expect("edge").source) {
            ProvenanceClass::DualSource => dual += 1,
            ProvenanceClass::AlphaOnly => alpha += 1,
            ProvenanceClass::PopOnly => pop += 1,
            ProvenanceClass::Unflagged => {}
        }
    }
    ProvenanceShares::from_counts(dual, alpha, pop)
}

pub fn metrics_csv_header() -> &'static str {
    "split,family,n,instance,stage,edges_per_n,coverage,gap_percent,fell_back\n"
}

pub fn metrics_csv_row(row: &MetricsRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        row.split,
        row.family,
        row.n,
        row.instance_id,
        row.stage,
        row.edges_per_n,
        row.coverage,
        row.gap_percent.map_or(String::new(), |g| g.to_string()),
        row.fell_back.map_or(String::new(), |f| f.to_string()),
    )
}

pub fn timings_csv_header() -> &'static str {
    "instance,stage1_ms,label_ms,features_ms,prune_ms,eval_ms\n"
}

pub fn timings_csv_row(row: &TimingRow) -> String {
    format!(
        "{},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
        row.instance_id, row.stage1_ms, row.label_ms, row.features_ms, row.prune_ms, row.eval_ms
    )
}

pub fn lost_edges_csv_header() -> String {
    let mut s = String::from("instance,i,j,provenance");
    for name in FEATURE_NAMES {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    s
}

pub fn lost_edges_csv_row(r: &LostEdgeRecord) -> String {
    let mut s = format!("{},{},{},{}", r.instance_id, r.i, r.j, r.class.name());
    for v in r.features {
        s.push_str(&format!(",{v}"));
    }
    s.push('\n');
    s
}
