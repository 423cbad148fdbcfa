//! POPMUSIC-style candidate generation: optimize overlapping subpaths of a
//! few seeded nearest-neighbor tours and keep every edge that appears in an
//! improved tour.

use super::{CandidateGraph, EdgeSource};
use crate::error::Result;
use crate::instances::DistanceMatrix;
use crate::seeding::Prng;

#[derive(Debug, Clone, PartialEq)]
pub struct PopmusicConfig {
    /// Subpath window length in cities; windows overlap by half.
    pub subpath_len: usize,
    /// Number of seeded nearest-neighbor starting tours.
    pub starts: usize,
    /// Seed for picking the distinct start cities.
    pub seed: u64,
    /// When false, the initial tours are kept as-is (degenerate mode).
    pub optimize: bool,
    /// Cap on full window sweeps per tour.
    pub max_rounds: usize,
}

impl Default for PopmusicConfig {
    fn default() -> Self {
        Self {
            subpath_len: 60,
            starts: 16,
            seed: 0,
            optimize: true,
            max_rounds: 60,
        }
    }
}

/// Or-opt segment lengths tried inside each window.
const SEGMENT_LENGTHS: [usize; 3] = [1, 2, 3];

fn nearest_neighbor_tour(dm: &DistanceMatrix, start: usize) -> Vec<usize> {
    let n = dm.n();
    let mut visited = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    tour.push(cur);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = i64::MAX;
        for v in 0..n {
            if !visited[v] && dm.dist(cur, v) < best_d {
                best_d = dm.dist(cur, v);
                best = v;
            }
        }
        visited[best] = true;
        tour.push(best);
        cur = best;
    }
    tour
}

/// First-improvement 2-opt plus Or-opt on a path with fixed endpoints.
/// Returns true if the path improved.
fn optimize_subpath(dm: &DistanceMatrix, path: &mut [usize]) -> bool {
    let r = path.len();
    if r < 4 {
        return false;
    }
    let mut improved_any = false;
    loop {
        let mut improved = false;
        // 2-opt: reverse path[i..=j], changing edges (i-1, i) and (j, j+1)
        'two_opt: for i in 1..r - 2 {
            for j in i + 1..r - 1 {
                let delta = dm.dist(path[i - 1], path[j]) + dm.dist(path[i], path[j + 1])
                    - dm.dist(path[i - 1], path[i])
                    - dm.dist(path[j], path[j + 1]);
                if delta < 0 {
                    path[i..=j].reverse();
                    improved = true;
                    break 'two_opt;
                }
            }
        }
        if !improved {
            // Or-opt: move a short interior segment elsewhere in the path
            'or_opt: for &len in &SEGMENT_LENGTHS {
                if r < len + 3 {
                    continue;
                }
                for s in 1..r - len {
                    let seg_cost_removed = dm.dist(path[s - 1], path[s])
                        + dm.dist(path[s + len - 1], path[s + len])
                        - dm.dist(path[s - 1], path[s + len]);
                    for t in 0..r - 1 {
                        // insertion between positions t and t+1 of the
                        // path with the segment removed
                        if t + 1 >= s && t <= s + len - 1 {
                            continue; // overlaps the segment
                        }
                        let (head, tail) = (path[s], path[s + len - 1]);
                        let (a, b) = (path[t], path[t + 1]);
                        let add_fwd = dm.dist(a, head) + dm.dist(tail, b);
                        let add_rev = dm.dist(a, tail) + dm.dist(head, b);
                        let (add, reversed) = if add_rev < add_fwd {
                            (add_rev, true)
                        } else {
                            (add_fwd, false)
                        };
                        let delta = add - dm.dist(a, b) - seg_cost_removed;
                        if delta < 0 {
                            apply_segment_move(path, s, len, t, reversed);
                            improved = true;
                            break 'or_opt;
                        }
                    }
                }
            }
        }
        if improved {
            improved_any = true;
        } else {
            return improved_any;
        }
    }
}

fn apply_segment_move(path: &mut [usize], s: usize, len: usize, t: usize, reversed: bool) {
    let mut seg: Vec<usize> = path[s..s + len].to_vec();
    if reversed {
        seg.reverse();
    }
    let mut rest: Vec<usize> = Vec::with_capacity(path.len() - len);
    rest.extend_from_slice(&path[..s]);
    rest.extend_from_slice(&path[s + len..]);
    // position of city path[t] inside rest
    let insert_after = if t < s { t } else { t - len };
    let mut out = Vec::with_capacity(path.len());
    out.extend_from_slice(&rest[..=insert_after]);
    out.extend_from_slice(&seg);
    out.extend_from_slice(&rest[insert_after + 1..]);
    path.copy_from_slice(&out);
}

fn improve_tour(dm: &DistanceMatrix, tour: &mut Vec<usize>, cfg: &PopmusicConfig) {
    let n = tour.len();
    let r = cfg.subpath_len.min(n);
    if r < 4 {
        return;
    }
    let stride = (r / 2).max(1);
    let mut window = vec![0usize; r];
    for _ in 0..cfg.max_rounds {
        let mut improved_any = false;
        let mut w_start = 0;
        while w_start < n {
            for (idx, slot) in window.iter_mut().enumerate() {
                *slot = tour[(w_start + idx) % n];
            }
            if optimize_subpath(dm, &mut window) {
                for (idx, &city) in window.iter().enumerate() {
                    tour[(w_start + idx) % n] = city;
                }
                improved_any = true;
            }
            w_start += stride;
        }
        if !improved_any {
            break;
        }
    }
}

/// Builds seeded nearest-neighbor tours from distinct start cities, locally
/// optimizes overlapping subpaths, and returns the union of all edges in the
/// final tours, flagged as POPMUSIC-sourced.
pub fn popmusic_candidates(dm: &DistanceMatrix, cfg: &PopmusicConfig) -> Result<CandidateGraph> {
    let n = dm.n();
    let mut rng = Prng::new(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let starts: Vec<usize> = order.into_iter().take(cfg.starts.max(1).min(n)).collect();

    let mut builder = CandidateGraph::builder(n);
    for &start in &starts {
        let mut tour = nearest_neighbor_tour(dm, start);
        if cfg.optimize {
            improve_tour(dm, &mut tour, cfg);
        }
        for k in 0..n {
            let (a, b) = (tour[k], tour[(k + 1) % n]);
            builder.add_edge(a, b, EdgeSource::POPMUSIC, None)?;
        }
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};

    #[test]
    fn degenerate_config_gives_one_tour() {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::Uniform,
            DistanceType::Euc2d,
            30,
            6,
            &cfg,
        )
        .unwrap();
        let dm = inst.distance_matrix();
        let g = popmusic_candidates(
            &dm,
            &PopmusicConfig {
                starts: 1,
                optimize: false,
                ..PopmusicConfig::default()
            },
        )
        .unwrap();
        assert_eq!(g.edge_count(), 30);
        assert!((g.edges_per_node() - 1.0).abs() < 1e-12);
        // every node lies on a cycle: degree at least 2
        for i in 0..30 {
            assert!(g.degree(i) >= 2);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::Clustered,
            DistanceType::Euc2d,
            40,
            2,
            &cfg,
        )
        .unwrap();
        let dm = inst.distance_matrix();
        let a = popmusic_candidates(&dm, &PopmusicConfig::default()).unwrap();
        let b = popmusic_candidates(&dm, &PopmusicConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_square_contains_the_optimal_cycle() {
        use crate::instances::{DistanceMatrix, TspInstance};
        let inst = TspInstance::new(
            "square",
            DistanceType::Euc2d,
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        let dm: DistanceMatrix = inst.distance_matrix();
        let g = popmusic_candidates(&dm, &PopmusicConfig::default()).unwrap();
        for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            assert!(g.contains(a, b), "missing edge ({a}, {b})");
        }
    }

    #[test]
    fn density_stays_low_on_uniform_instances() {
        let cfg = GeneratorConfig::default();
        let mut total = 0.0;
        let trials = 10;
        for seed in 0..trials {
            let inst = generate_instance(
                DistributionFamily::Uniform,
                DistanceType::Euc2d,
                50,
                seed,
                &cfg,
            )
            .unwrap();
            let dm = inst.distance_matrix();
            let g = popmusic_candidates(&dm, &PopmusicConfig::default()).unwrap();
            total += g.edges_per_node();
        }
        let mean = total / trials as f64;
        assert!((1.0..=3.0).contains(&mean), "mean Edges/N = {mean}");
    }

    #[test]
    fn or_opt_segment_move_is_consistent() {
        // moving [3, 4] after position 0, reversed
        let mut path = vec![10, 20, 30, 40, 50, 60];
        apply_segment_move(&mut path, 2, 2, 0, true);
        assert_eq!(path, vec![10, 40, 30, 20, 50, 60]);
        // moving [1] to the far end
        let mut path = vec![1, 2, 3, 4];
        apply_segment_move(&mut path, 1, 1, 3, false);
        assert_eq!(path, vec![1, 3, 4, 2]);
    }
}
