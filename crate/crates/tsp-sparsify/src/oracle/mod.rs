//! Exact optimal tours at desk scale and edge labeling.

mod bnb;
mod exact;

pub use bnb::{branch_and_bound, BnbBudget, BnbOutcome};
pub use exact::{brute_force, held_karp};

use crate::candidates::CandidateGraph;
use crate::error::{Error, Result};
use crate::instances::DistanceMatrix;

/// A Hamiltonian cycle with its exact integer length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    /// Visiting order; a permutation of 0..n-1.
    pub order: Vec<usize>,
    /// Closed-cycle length recomputed from the distance matrix.
    pub length: i64,
    pub proven_optimal: bool,
}

impl Tour {
    /// Builds a tour, validating the permutation and recomputing the length.
    pub fn from_order(order: Vec<usize>, dm: &DistanceMatrix, proven_optimal: bool) -> Result<Self> {
        let n = dm.n();
        if order.len() != n {
            return Err(Error::SizeMismatch(format!(
                "tour has {} cities, matrix has {n}",
                order.len()
            )));
        }
        let mut seen = vec![false; n];
        for &c in &order {
            if c >= n || seen[c] {
                return Err(Error::InvalidArgument(format!(
                    "order is not a permutation (city {c})"
                )));
            }
            seen[c] = true;
        }
        let length = dm.tour_length(&order);
        Ok(Self {
            order,
            length,
            proven_optimal,
        })
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Canonical edge set (i < j), sorted.
    pub fn edge_set(&self) -> Vec<(usize, usize)> {
        let n = self.order.len();
        let mut edges: Vec<(usize, usize)> = (0..n)
            .map(|k| {
                let a = self.order[k];
                let b = self.order[(k + 1) % n];
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        edges
    }
}

/// Writes the tour interchange format: the city count, one 1-based id per
/// line in visiting order, then a `-1` terminator.
pub fn write_tour(t: &Tour) -> String {
    let mut out = String::with_capacity(t.n() * 4 + 8);
    out.push_str(&format!("{}\n", t.n()));
    for &c in &t.order {
        out.push_str(&format!("{}\n", c + 1));
    }
    out.push_str("-1\n");
    out
}

/// Reads the tour interchange format back to a visiting order.
pub fn read_tour_order(text: &str) -> Result<Vec<usize>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::MissingField("city count".to_string()))?;
    let n: usize = first.trim().parse().map_err(|_| Error::Parse {
        line: 1,
        message: "malformed city count".to_string(),
    })?;
    let mut order = Vec::with_capacity(n);
    let mut terminated = false;
    for (lineno, line) in lines {
        let v: i64 = line.trim().parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: "malformed city id".to_string(),
        })?;
        if v == -1 {
            terminated = true;
            break;
        }
        if v < 1 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("city ids are 1-based, got {v}"),
            });
        }
        order.push(v as usize - 1);
    }
    if !terminated {
        return Err(Error::MissingField("-1 terminator".to_string()));
    }
    if order.len() != n {
        return Err(Error::SizeMismatch(format!(
            "expected {n} cities, read {}",
            order.len()
        )));
    }
    Ok(order)
}

/// Binary labels over a candidate graph's canonical edges: 1 when the edge
/// belongs to the given tour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLabels {
    /// Aligned to `graph.canonical_edges()`.
    pub labels: Vec<u8>,
    pub positives: usize,
    pub total: usize,
}

impl EdgeLabels {
    /// Fraction of the tour's n edges present in the graph.
    pub fn coverage(&self, n: usize) -> f64 {
        self.positives as f64 / n as f64
    }
}

/// Labels each candidate edge by membership in the tour's edge set. Training
/// data requires a proven tour; diagnostics may pass `allow_unproven`.
pub fn label_edges(g: &CandidateGraph, t: &Tour, allow_unproven: bool) -> Result<EdgeLabels> {
    if g.n() != t.n() {
        return Err(Error::SizeMismatch(format!(
            "graph has {} nodes, tour has {}",
            g.n(),
            t.n()
        )));
    }
    if !t.proven_optimal && !allow_unproven {
        return Err(Error::UnprovenTour);
    }
    let tour_edges = t.edge_set();
    let mut labels = Vec::with_capacity(g.edge_count());
    let mut positives = 0usize;
    for (i, j) in g.canonical_edges() {
        let y = u8::from(tour_edges.binary_search(&(i, j)).is_ok());
        positives += y as usize;
        labels.push(y);
    }
    let total = labels.len();
    Ok(EdgeLabels {
        labels,
        positives,
        total,
    })
}

/// Nearest-neighbor construction plus unrestricted 2-opt to a local optimum,
/// then double-bridge kicks with reoptimization; the upper-bound seed for
/// branch-and-bound.
pub(crate) fn greedy_tour(dm: &DistanceMatrix) -> Tour {
    let n = dm.n();
    let starts = [0, n / 3, (2 * n) / 3];
    let mut best: Option<Tour> = None;
    for &s in starts.iter().take(if n >= 6 { 3 } else { 1 }) {
        let mut order = nearest_neighbor_from(dm, s);
        cyclic_two_opt(dm, &mut order);
        let t = Tour::from_order(order, dm, false).expect("valid construction");
        if best.as_ref().is_none_or(|b| t.length < b.length) {
            best = Some(t);
        }
    }
    let mut best = best.expect("at least one start");
    if n >= 8 {
        let mut rng = crate::seeding::Prng::new(0x5eed);
        let kicks = 12.min(2 * n);
        for _ in 0..kicks {
            let mut cuts = [
                1 + rng.below(n - 3),
                1 + rng.below(n - 3),
                1 + rng.below(n - 3),
            ];
            cuts.sort_unstable();
            let (a, b, c) = (cuts[0], cuts[1], cuts[2]);
            if a == b || b == c {
                continue;
            }
            let src = &best.order;
            let mut order = Vec::with_capacity(n);
            order.extend_from_slice(&src[..a]);
            order.extend_from_slice(&src[c..]);
            order.extend_from_slice(&src[b..c]);
            order.extend_from_slice(&src[a..b]);
            cyclic_two_opt(dm, &mut order);
            let t = Tour::from_order(order, dm, false).expect("valid kick");
            if t.length < best.length {
                best = t;
            }
        }
    }
    best
}

fn nearest_neighbor_from(dm: &DistanceMatrix, start: usize) -> Vec<usize> {
    let n = dm.n();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut best = i64::MAX;
        for v in 0..n {
            if !visited[v] && dm.dist(cur, v) < best {
                best = dm.dist(cur, v);
                next = v;
            }
        }
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    order
}

/// First-improvement 2-opt plus single-city relocation on a cyclic tour,
/// iterated to a local optimum.
pub(crate) fn cyclic_two_opt(dm: &DistanceMatrix, order: &mut Vec<usize>) {
    let n = order.len();
    loop {
        let mut improved = false;
        'scan: for i in 0..n - 1 {
            for j in i + 1..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let before = order[(i + n - 1) % n];
                let after = order[(j + 1) % n];
                let delta = dm.dist(before, order[j]) + dm.dist(order[i], after)
                    - dm.dist(before, order[i])
                    - dm.dist(order[j], after);
                if delta < 0 {
                    order[i..=j].reverse();
                    improved = true;
                    break 'scan;
                }
            }
        }
        if !improved {
            // relocate one city between two others
            'reloc: for i in 0..n {
                let (prev, cur, next) =
                    (order[(i + n - 1) % n], order[i], order[(i + 1) % n]);
                let removal = dm.dist(prev, cur) + dm.dist(cur, next) - dm.dist(prev, next);
                for j in 0..n {
                    let (a, b) = (order[j], order[(j + 1) % n]);
                    if a == cur || b == cur {
                        continue;
                    }
                    let insertion = dm.dist(a, cur) + dm.dist(cur, b) - dm.dist(a, b);
                    if insertion < removal {
                        let city = order.remove(i);
                        let pos = order.iter().position(|&c| c == a).unwrap();
                        order.insert(pos + 1, city);
                        improved = true;
                        break 'reloc;
                    }
                }
            }
        }
        if !improved {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{CandidateGraph, EdgeSource};
    use crate::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};

    fn small_dm() -> DistanceMatrix {
        let cfg = GeneratorConfig::default();
        generate_instance(DistributionFamily::Uniform, DistanceType::Euc2d, 8, 1, &cfg)
            .unwrap()
            .distance_matrix()
    }

    #[test]
    fn tour_validation() {
        let dm = small_dm();
        assert!(Tour::from_order(vec![0, 1, 2, 3, 4, 5, 6, 7], &dm, false).is_ok());
        assert!(Tour::from_order(vec![0, 1, 2, 3, 4, 5, 6, 6], &dm, false).is_err());
        assert!(Tour::from_order(vec![0, 1, 2], &dm, false).is_err());
    }

    #[test]
    fn tour_format_round_trips() {
        let dm = small_dm();
        let t = brute_force(&dm).unwrap();
        let text = write_tour(&t);
        let order = read_tour_order(&text).unwrap();
        assert_eq!(order, t.order);
        assert!(read_tour_order(&text[..text.len() - 3]).is_err());
    }

    #[test]
    fn labels_against_own_edges_are_all_positive() {
        let dm = small_dm();
        let t = brute_force(&dm).unwrap();
        let mut b = CandidateGraph::builder(8);
        for (i, j) in t.edge_set() {
            b.add_edge(i, j, EdgeSource::POPMUSIC, None).unwrap();
        }
        let g = b.build().unwrap();
        let labels = label_edges(&g, &t, false).unwrap();
        assert_eq!(labels.positives, 8);
        assert!(labels.labels.iter().all(|&y| y == 1));
        assert_eq!(labels.coverage(8), 1.0);
    }

    #[test]
    fn complete_graph_coverage_is_one() {
        let dm = small_dm();
        let t = held_karp(&dm).unwrap();
        let g = CandidateGraph::complete(8).unwrap();
        let labels = label_edges(&g, &t, false).unwrap();
        assert_eq!(labels.positives, 8);
        assert_eq!(labels.total, 28);
        assert_eq!(labels.coverage(8), 1.0);
    }

    #[test]
    fn unproven_tours_need_the_override() {
        let dm = small_dm();
        let mut t = brute_force(&dm).unwrap();
        t.proven_optimal = false;
        let g = CandidateGraph::complete(8).unwrap();
        assert!(matches!(
            label_edges(&g, &t, false),
            Err(Error::UnprovenTour)
        ));
        assert!(label_edges(&g, &t, true).is_ok());
    }

    #[test]
    fn greedy_tour_is_valid_and_reasonable() {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::Clustered,
            DistanceType::Euc2d,
            30,
            9,
            &cfg,
        )
        .unwrap();
        let dm = inst.distance_matrix();
        let t = greedy_tour(&dm);
        assert_eq!(t.n(), 30);
        assert!(!t.proven_optimal);
        // 2-opt result must beat or match plain nearest neighbor
        let nn = Tour::from_order(nearest_neighbor_from(&dm, 0), &dm, false).unwrap();
        assert!(t.length <= nn.length);
    }
}
