//! Edge feature extraction and train-set standardization.
//!
//! Every feature depends only on edge weights and candidate-graph structure,
//! never on coordinates, so one model serves all four distance conventions.
//! The sixteen features, in their frozen order:
//!
//! | pos | name             | definition                                          |
//! |-----|------------------|-----------------------------------------------------|
//! | 0   | dist             | d(i, j)                                             |
//! | 1   | rank_pct_i       | rank of j among i's distances, over N-1             |
//! | 2   | rank_pct_j       | rank of i among j's distances, over N-1             |
//! | 3   | rank_pct_min     | min of positions 1 and 2                            |
//! | 4   | rank_pct_max     | max of positions 1 and 2                            |
//! | 5   | nn_ratio_i       | d(i, j) / min_u d(i, u)                             |
//! | 6   | nn_ratio_j       | d(i, j) / min_u d(j, u)                             |
//! | 7   | zscore_i         | (d(i, j) - mean_i) / std_i                          |
//! | 8   | zscore_j         | (d(i, j) - mean_j) / std_j                          |
//! | 9   | mutual_knn       | 1 if i and j are in each other's k nearest          |
//! | 10  | knn_jaccard      | overlap of the two k-nearest sets                   |
//! | 11  | deg_i            | candidate degree of i                               |
//! | 12  | deg_j            | candidate degree of j                               |
//! | 13  | common_neighbors | shared candidate neighbors of i and j               |
//! | 14  | from_alpha       | 1 if the edge came from the alpha generator         |
//! | 15  | from_popmusic    | 1 if the edge came from the POPMUSIC generator      |

use crate::candidates::{CandidateGraph, EdgeSource};
use crate::error::{Error, Result};
use crate::instances::DistanceMatrix;

pub const FEATURE_COUNT: usize = 16;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "dist",
    "rank_pct_i",
    "rank_pct_j",
    "rank_pct_min",
    "rank_pct_max",
    "nn_ratio_i",
    "nn_ratio_j",
    "zscore_i",
    "zscore_j",
    "mutual_knn",
    "knn_jaccard",
    "deg_i",
    "deg_j",
    "common_neighbors",
    "from_alpha",
    "from_popmusic",
];

/// Binary indicator positions; never standardized.
pub const BINARY_POSITIONS: [usize; 3] = [9, 14, 15];

/// Feature families for importance reporting.
pub const FEATURE_FAMILIES: [(&str, &[usize]); 6] = [
    ("distance_magnitude", &[0]),
    ("distance_rank", &[1, 2, 3, 4]),
    ("local_normalization", &[5, 6, 7, 8]),
    ("neighborhood_structure", &[9, 10]),
    ("candidate_topology", &[11, 12, 13]),
    ("source_provenance", &[14, 15]),
];

/// Version tag persisted with models so a saved model rejects rows produced
/// by a different extractor layout.
pub const FEATURE_SCHEMA_VERSION: &str = "edge-features-v1";

pub type FeatureVector = [f64; FEATURE_COUNT];

/// Whether source-provenance features carry signal. In single-source mode
/// positions 14 and 15 are emitted as zero and masked out of training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    Union,
    SingleSource,
}

impl FeatureMode {
    /// Active-feature mask for this mode.
    pub fn active_mask(self) -> [bool; FEATURE_COUNT] {
        let mut mask = [true; FEATURE_COUNT];
        if self == FeatureMode::SingleSource {
            mask[14] = false;
            mask[15] = false;
        }
        mask
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Union => "union",
            FeatureMode::SingleSource => "single-source",
        }
    }
}

/// Per-node distance statistics shared by all of a node's edge features.
#[derive(Debug, Clone)]
pub struct NodeStats {
    pub mean: f64,
    /// Population standard deviation of the distances from this node.
    pub std: f64,
    pub nn_dist: i64,
    /// rank[j] = rank of d(i, j) among all distances from i (1 = nearest,
    /// ties broken by index); the entry for i itself is 0.
    pub rank: Vec<u32>,
    /// The k nearest nodes by (distance, index), stored sorted by index for
    /// linear-time set operations.
    pub knn: Vec<usize>,
}

/// Computes the per-node statistics, with kNN sets of size `k`.
pub fn node_stats(dm: &DistanceMatrix, k: usize) -> Result<Vec<NodeStats>> {
    let n = dm.n();
    if k < 1 || k > n - 1 {
        return Err(Error::InvalidArgument(format!(
            "kNN size must satisfy 1 <= k <= n-1, got k = {k}, n = {n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        let mut nn_dist = i64::MAX;
        order.clear();
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = dm.dist(i, j);
            sum += d as f64;
            sum_sq += (d as f64) * (d as f64);
            nn_dist = nn_dist.min(d);
            order.push(j);
        }
        let m = (n - 1) as f64;
        let mean = sum / m;
        let var = (sum_sq / m - mean * mean).max(0.0);
        order.sort_by_key(|&j| (dm.dist(i, j), j));
        let mut rank = vec![0u32; n];
        for (pos, &j) in order.iter().enumerate() {
            rank[j] = pos as u32 + 1;
        }
        let mut knn: Vec<usize> = order[..k].to_vec();
        knn.sort_unstable();
        out.push(NodeStats {
            mean,
            std: var.sqrt(),
            nn_dist,
            rank,
            knn,
        });
    }
    Ok(out)
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

/// Extracts the sixteen features for edge (i, j) of the candidate graph.
/// Orientation matters for the endpoint-specific positions; the pipeline
/// canonicalizes edges as (min, max) so each edge has one row.
pub fn edge_features(
    dm: &DistanceMatrix,
    g: &CandidateGraph,
    stats: &[NodeStats],
    i: usize,
    j: usize,
    mode: FeatureMode,
) -> Result<FeatureVector> {
    let n = dm.n();
    let edge = g
        .edge(i, j)
        .ok_or_else(|| Error::InvalidArgument(format!("edge ({i}, {j}) not in graph")))?;
    let d = dm.dist(i, j) as f64;
    let si = &stats[i];
    let sj = &stats[j];
    let m = (n - 1) as f64;

    // a zero nearest-neighbor distance (duplicate points) falls back to a
    // denominator of one so the ratio stays finite and positive
    let ratio = |d: f64, nn: i64| -> f64 {
        if nn == 0 {
            if d == 0.0 {
                1.0
            } else {
                d
            }
        } else {
            d / nn as f64
        }
    };
    let zscore = |d: f64, s: &NodeStats| -> f64 {
        if s.std == 0.0 {
            0.0
        } else {
            (d - s.mean) / s.std
        }
    };

    let rank_i = si.rank[j] as f64 / m;
    let rank_j = sj.rank[i] as f64 / m;
    let mutual = si.knn.binary_search(&j).is_ok() && sj.knn.binary_search(&i).is_ok();
    let inter = sorted_intersection_len(&si.knn, &sj.knn);
    let union_size = si.knn.len() + sj.knn.len() - inter;
    let common = {
        let ni: Vec<usize> = g.neighbors(i).iter().map(|e| e.neighbor).collect();
        let nj: Vec<usize> = g.neighbors(j).iter().map(|e| e.neighbor).collect();
        sorted_intersection_len(&ni, &nj)
    };
    let (from_alpha, from_pop) = match mode {
        FeatureMode::Union => (
            f64::from(edge.source.contains(EdgeSource::ALPHA)),
            f64::from(edge.source.contains(EdgeSource::POPMUSIC)),
        ),
        FeatureMode::SingleSource => (0.0, 0.0),
    };

    Ok([
        d,
        rank_i,
        rank_j,
        rank_i.min(rank_j),
        rank_i.max(rank_j),
        ratio(d, si.nn_dist),
        ratio(d, sj.nn_dist),
        zscore(d, si),
        zscore(d, sj),
        f64::from(mutual),
        inter as f64 / union_size as f64,
        g.degree(i) as f64,
        g.degree(j) as f64,
        common as f64,
        from_alpha,
        from_pop,
    ])
}

/// Affine per-feature transform fitted on training rows. Binary positions
/// are left untouched; zero-variance positions get scale one.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub standardized: Vec<bool>,
}

impl Standardizer {
    /// Fits means and scales on the rows.
    pub fn fit(rows: &[FeatureVector]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot fit a standardizer on an empty set".to_string(),
            ));
        }
        let m = rows.len() as f64;
        let mut mean = vec![0.0; FEATURE_COUNT];
        let mut scale = vec![1.0; FEATURE_COUNT];
        let mut standardized = vec![true; FEATURE_COUNT];
        for &p in &BINARY_POSITIONS {
            standardized[p] = false;
        }
        for pos in 0..FEATURE_COUNT {
            if !standardized[pos] {
                continue;
            }
            let mu = rows.iter().map(|r| r[pos]).sum::<f64>() / m;
            let var = rows.iter().map(|r| (r[pos] - mu) * (r[pos] - mu)).sum::<f64>() / m;
            mean[pos] = mu;
            scale[pos] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Ok(Self {
            mean,
            scale,
            standardized,
        })
    }

    pub fn apply(&self, row: &FeatureVector) -> FeatureVector {
        let mut out = *row;
        for pos in 0..FEATURE_COUNT {
            if self.standardized[pos] {
                out[pos] = (out[pos] - self.mean[pos]) / self.scale[pos];
            }
        }
        out
    }
}

/// Writes the feature dump: one row per canonical edge with the instance id,
/// endpoints, label (-1 when unlabeled), and the sixteen named columns.
pub fn write_feature_rows(
    out: &mut String,
    instance_id: &str,
    edges: &[(usize, usize)],
    rows: &[FeatureVector],
    labels: Option<&[u8]>,
) {
    for (idx, ((i, j), row)) in edges.iter().zip(rows).enumerate() {
        let y = labels.map_or(-1i8, |ls| ls[idx] as i8);
        out.push_str(&format!("{instance_id},{i},{j},{y}"));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
}

/// Header line for the feature dump.
pub fn feature_dump_header() -> String {
    let mut s = String::from("instance,i,j,y");
    for name in FEATURE_NAMES {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{CandidateGraph, EdgeSource};
    use crate::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};

    fn toy() -> (DistanceMatrix, CandidateGraph) {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::Uniform,
            DistanceType::Euc2d,
            12,
            3,
            &cfg,
        )
        .unwrap();
        let dm = inst.distance_matrix();
        let g = CandidateGraph::complete(12).unwrap();
        (dm, g)
    }

    #[test]
    fn families_cover_all_sixteen_positions_once() {
        let mut seen = [false; FEATURE_COUNT];
        for (_, members) in FEATURE_FAMILIES {
            for &p in members {
                assert!(!seen[p], "position {p} in two families");
                seen[p] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(FEATURE_NAMES.len(), FEATURE_COUNT);
    }

    #[test]
    fn equidistant_nodes_have_zero_std_and_index_ranks() {
        let dm = DistanceMatrix::from_raw(
            4,
            vec![0, 7, 7, 7, 7, 0, 7, 7, 7, 7, 0, 7, 7, 7, 7, 0],
        )
        .unwrap();
        let stats = node_stats(&dm, 2).unwrap();
        for (i, s) in stats.iter().enumerate() {
            assert_eq!(s.std, 0.0);
            assert_eq!(s.nn_dist, 7);
            // ties resolve by index order
            let mut expect = 1u32;
            for j in 0..4 {
                if j != i {
                    assert_eq!(s.rank[j], expect, "node {i} rank of {j}");
                    expect += 1;
                }
            }
        }
        // zero std means the z-scores are zero, not NaN
        let g = CandidateGraph::complete(4).unwrap();
        let f = edge_features(&dm, &g, &stats, 0, 1, FeatureMode::Union).unwrap();
        assert_eq!(f[7], 0.0);
        assert_eq!(f[8], 0.0);
    }

    #[test]
    fn unit_square_node_stats() {
        let inst = crate::instances::TspInstance::new(
            "sq",
            DistanceType::Euc2d,
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        let dm = inst.distance_matrix();
        let stats = node_stats(&dm, 2).unwrap();
        // all rounded distances are 1, so the mean is (1+1+1)/3
        assert!((stats[0].mean - 1.0).abs() < 1e-12);
        assert_eq!(stats[0].nn_dist, 1);
    }

    #[test]
    fn rank_table_matches_independent_sort() {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::Clustered,
            DistanceType::Att,
            30,
            11,
            &cfg,
        )
        .unwrap();
        let dm = inst.distance_matrix();
        let stats = node_stats(&dm, 5).unwrap();
        for i in 0..30 {
            let mut pairs: Vec<(i64, usize)> =
                (0..30).filter(|&j| j != i).map(|j| (dm.dist(i, j), j)).collect();
            pairs.sort_unstable();
            for (pos, &(_, j)) in pairs.iter().enumerate() {
                assert_eq!(stats[i].rank[j] as usize, pos + 1);
            }
            // rank values form a permutation of 1..n-1
            let mut ranks: Vec<u32> =
                (0..30).filter(|&j| j != i).map(|j| stats[i].rank[j]).collect();
            ranks.sort_unstable();
            assert_eq!(ranks, (1..30).collect::<Vec<u32>>());
        }
    }

    #[test]
    fn nearest_neighbor_edge_has_unit_ratio_and_min_rank() {
        let (dm, g) = toy();
        let stats = node_stats(&dm, 5).unwrap();
        // find an edge that is the nearest neighbor from both sides
        let mut found = false;
        for i in 0..12 {
            for j in 0..12 {
                if i != j && stats[i].rank[j] == 1 && stats[j].rank[i] == 1 {
                    let f = edge_features(&dm, &g, &stats, i, j, FeatureMode::Union).unwrap();
                    assert_eq!(f[5], 1.0);
                    assert_eq!(f[6], 1.0);
                    assert!((f[1] - 1.0 / 11.0).abs() < 1e-15);
                    assert!((f[2] - 1.0 / 11.0).abs() < 1e-15);
                    found = true;
                }
            }
        }
        assert!(found, "some mutual nearest pair must exist");
    }

    #[test]
    fn orientation_swaps_endpoint_features() {
        let (dm, g) = toy();
        let stats = node_stats(&dm, 5).unwrap();
        let a = edge_features(&dm, &g, &stats, 2, 9, FeatureMode::Union).unwrap();
        let b = edge_features(&dm, &g, &stats, 9, 2, FeatureMode::Union).unwrap();
        for p in [0, 3, 4, 9, 10, 13, 14, 15] {
            assert_eq!(a[p], b[p], "position {p} should be symmetric");
        }
        for (x, y) in [(1, 2), (5, 6), (7, 8), (11, 12)] {
            assert_eq!(a[x], b[y], "positions {x} and {y} should swap");
            assert_eq!(a[y], b[x]);
        }
    }

    #[test]
    fn provenance_features_follow_flags_and_mode() {
        let dm = DistanceMatrix::from_raw(3, vec![0, 2, 3, 2, 0, 4, 3, 4, 0]).unwrap();
        let mut b = CandidateGraph::builder(3);
        b.add_edge(0, 1, EdgeSource::ALPHA | EdgeSource::POPMUSIC, None)
            .unwrap();
        b.add_edge(1, 2, EdgeSource::ALPHA, None).unwrap();
        let g = b.build().unwrap();
        let stats = node_stats(&dm, 1).unwrap();
        let f = edge_features(&dm, &g, &stats, 0, 1, FeatureMode::Union).unwrap();
        assert_eq!((f[14], f[15]), (1.0, 1.0));
        let f = edge_features(&dm, &g, &stats, 1, 2, FeatureMode::Union).unwrap();
        assert_eq!((f[14], f[15]), (1.0, 0.0));
        let f = edge_features(&dm, &g, &stats, 1, 2, FeatureMode::SingleSource).unwrap();
        assert_eq!((f[14], f[15]), (0.0, 0.0));
        assert!(edge_features(&dm, &g, &stats, 0, 2, FeatureMode::Union).is_err());
    }

    #[test]
    fn matrix_scaling_changes_only_the_raw_distance() {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::OutlierMixture,
            DistanceType::Man2d,
            15,
            6,
            &cfg,
        )
        .unwrap();
        let dm = inst.distance_matrix();
        let dm3 = dm.scaled(3);
        let g = CandidateGraph::complete(15).unwrap();
        let s1 = node_stats(&dm, 6).unwrap();
        let s3 = node_stats(&dm3, 6).unwrap();
        for i in 0..15 {
            for j in 0..15 {
                if i == j {
                    continue;
                }
                let f1 = edge_features(&dm, &g, &s1, i, j, FeatureMode::Union).unwrap();
                let f3 = edge_features(&dm3, &g, &s3, i, j, FeatureMode::Union).unwrap();
                assert_eq!(f3[0], 3.0 * f1[0]);
                for p in 1..FEATURE_COUNT {
                    assert!(
                        (f1[p] - f3[p]).abs() < 1e-12,
                        "position {p} changed under scaling"
                    );
                }
            }
        }
    }

    #[test]
    fn independent_recomputation_of_five_edges() {
        // straight-line recomputation from the raw matrix, no shared helpers
        let (dm, g) = toy();
        let k = 5;
        let stats = node_stats(&dm, k).unwrap();
        let n = 12usize;
        for &(i, j) in &[(0usize, 1usize), (2, 7), (3, 11), (4, 5), (8, 10)] {
            let f = edge_features(&dm, &g, &stats, i, j, FeatureMode::Union).unwrap();
            let d = dm.dist(i, j) as f64;
            let dists_from = |a: usize| -> Vec<i64> {
                (0..n).filter(|&b| b != a).map(|b| dm.dist(a, b)).collect()
            };
            let rank_of = |a: usize, b: usize| -> f64 {
                let mut keyed: Vec<(i64, usize)> =
                    (0..n).filter(|&u| u != a).map(|u| (dm.dist(a, u), u)).collect();
                keyed.sort_unstable();
                (keyed.iter().position(|&(_, u)| u == b).unwrap() + 1) as f64 / (n - 1) as f64
            };
            let knn_of = |a: usize| -> Vec<usize> {
                let mut keyed: Vec<(i64, usize)> =
                    (0..n).filter(|&u| u != a).map(|u| (dm.dist(a, u), u)).collect();
                keyed.sort_unstable();
                keyed[..k].iter().map(|&(_, u)| u).collect()
            };
            let di = dists_from(i);
            let dj = dists_from(j);
            let mean = |xs: &[i64]| xs.iter().sum::<i64>() as f64 / xs.len() as f64;
            let std = |xs: &[i64]| {
                let mu = mean(xs);
                (xs.iter().map(|&x| (x as f64 - mu).powi(2)).sum::<f64>() / xs.len() as f64)
                    .sqrt()
            };
            let ki = knn_of(i);
            let kj = knn_of(j);
            let inter = ki.iter().filter(|u| kj.contains(u)).count();
            let expected = [
                d,
                rank_of(i, j),
                rank_of(j, i),
                rank_of(i, j).min(rank_of(j, i)),
                rank_of(i, j).max(rank_of(j, i)),
                d / *di.iter().min().unwrap() as f64,
                d / *dj.iter().min().unwrap() as f64,
                (d - mean(&di)) / std(&di),
                (d - mean(&dj)) / std(&dj),
                f64::from(ki.contains(&j) && kj.contains(&i)),
                inter as f64 / (ki.len() + kj.len() - inter) as f64,
                11.0,
                11.0,
                10.0,
                0.0,
                0.0,
            ];
            for p in 0..FEATURE_COUNT {
                assert!(
                    (f[p] - expected[p]).abs() < 1e-12,
                    "edge ({i}, {j}) position {p}: {} vs {}",
                    f[p],
                    expected[p]
                );
            }
        }
    }

    #[test]
    fn standardizer_zero_variance_and_identity_rules() {
        let row: FeatureVector = [
            5.0, 0.2, 0.3, 0.2, 0.3, 1.5, 1.2, 0.1, -0.3, 1.0, 0.5, 6.0, 6.0, 2.0, 1.0, 0.0,
        ];
        let rows = vec![row; 4];
        let s = Standardizer::fit(&rows).unwrap();
        assert!(s.scale.iter().all(|&v| v == 1.0));
        let t = s.apply(&row);
        for p in 0..FEATURE_COUNT {
            if s.standardized[p] {
                assert_eq!(t[p], 0.0, "position {p}");
            } else {
                assert_eq!(t[p], row[p], "binary position {p} must pass through");
            }
        }
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_scale() {
        let (dm, g) = toy();
        let stats = node_stats(&dm, 5).unwrap();
        let edges = g.canonical_edges();
        let rows: Vec<FeatureVector> = edges
            .iter()
            .map(|&(i, j)| edge_features(&dm, &g, &stats, i, j, FeatureMode::Union).unwrap())
            .collect();
        let s = Standardizer::fit(&rows).unwrap();
        let transformed: Vec<FeatureVector> = rows.iter().map(|r| s.apply(r)).collect();
        for p in 0..FEATURE_COUNT {
            if !s.standardized[p] {
                continue;
            }
            let m = transformed.iter().map(|r| r[p]).sum::<f64>() / rows.len() as f64;
            assert!(m.abs() < 1e-10, "column {p} mean {m}");
            if s.scale[p] != 1.0 {
                let var =
                    transformed.iter().map(|r| r[p] * r[p]).sum::<f64>() / rows.len() as f64;
                assert!((var - 1.0).abs() < 1e-8, "column {p} var {var}");
            }
        }
        assert!(Standardizer::fit(&[]).is_err());
    }

    #[test]
    fn dump_format_shape() {
        let header = feature_dump_header();
        assert!(header.starts_with("instance,i,j,y,dist,"));
        assert_eq!(header.trim().split(',').count(), 4 + FEATURE_COUNT);
        let mut out = String::new();
        let rows = vec![[0.5; FEATURE_COUNT]];
        write_feature_rows(&mut out, "inst-1", &[(0, 3)], &rows, Some(&[1]));
        assert!(out.starts_with("inst-1,0,3,1,0.5,"));
        let mut out = String::new();
        write_feature_rows(&mut out, "inst-1", &[(0, 3)], &rows, None);
        assert!(out.starts_with("inst-1,0,3,-1,"));
    }
}
