//! Minimum 1-trees under node penalties.
//!
//! A 1-tree is a spanning tree on all nodes except one designated special
//! node, plus the two cheapest edges incident to the special node. Under
//! penalized weights d'(i,j) = d(i,j) + pi[i] + pi[j] its adjusted length
//! w(pi) = L(T_pi) - 2*sum(pi) lower-bounds every tour length.
//!
//! Ties between equal penalized weights are broken by the lexicographically
//! smallest (min endpoint, max endpoint) pair, which makes the chosen tree
//! unique and bit-reproducible. The constrained variant additionally honors
//! forced and excluded edges for branch-and-bound.

use crate::error::{Error, Result};
use crate::instances::DistanceMatrix;

/// Minimum 1-tree with its Held-Karp bound value.
#[derive(Debug, Clone)]
pub struct OneTree {
    /// Exactly n edges as (min, max) pairs: the spanning-tree edges first,
    /// then the two special-node edges.
    pub edges: Vec<(usize, usize)>,
    /// w(pi) = L(T_pi) - 2*sum(pi); the Held-Karp lower bound at `pi`.
    pub bound: f64,
    /// Unpenalized total edge length.
    pub raw_length: i64,
    pub degrees: Vec<u32>,
    pub pi: Vec<f64>,
    pub special: usize,
    /// Spanning-tree parent per node; the root points to itself and the
    /// special node points to its cheaper incident tree edge's endpoint.
    pub parent: Vec<usize>,
    pub root: usize,
}

impl OneTree {
    /// True when every node has degree two, i.e. the 1-tree is a tour.
    pub fn is_tour(&self) -> bool {
        self.degrees.iter().all(|&d| d == 2)
    }
}

/// Dense symmetric pair mask used for edge exclusion.
#[derive(Debug, Clone)]
pub(crate) struct PairMask {
    n: usize,
    bits: Vec<u64>,
}

impl PairMask {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; (n * n + 63) / 64],
        }
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize) {
        let a = i * self.n + j;
        let b = j * self.n + i;
        self.bits[a / 64] |= 1 << (a % 64);
        self.bits[b / 64] |= 1 << (b % 64);
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> bool {
        let a = i * self.n + j;
        self.bits[a / 64] & (1 << (a % 64)) != 0
    }

    pub(crate) fn clear_all(&mut self) {
        self.bits.fill(0);
    }
}

/// Reusable buffers for repeated 1-tree construction.
#[derive(Debug, Default)]
pub(crate) struct OneTreeWorkspace {
    in_tree: Vec<bool>,
    key: Vec<f64>,
    key_from: Vec<usize>,
    forced_adj: Vec<Vec<usize>>,
    adj: Vec<Vec<usize>>,
}

/// Total order on candidate edges: penalized weight, then (min, max) pair.
#[inline]
fn edge_less(w1: f64, a1: usize, b1: usize, w2: f64, a2: usize, b2: usize) -> bool {
    if w1 != w2 {
        return w1 < w2;
    }
    let e1 = if a1 < b1 { (a1, b1) } else { (b1, a1) };
    let e2 = if a2 < b2 { (a2, b2) } else { (b2, a2) };
    e1 < e2
}

/// Minimum 1-tree under penalties with optional forced and excluded edges.
/// Returns `None` when the constraints admit no 1-tree.
pub(crate) fn constrained_minimum_one_tree(
    dm: &DistanceMatrix,
    pi: &[f64],
    special: usize,
    forced: &[(usize, usize)],
    excluded: Option<&PairMask>,
    work: &mut OneTreeWorkspace,
) -> Option<OneTree> {
    let n = dm.n();
    debug_assert!(n >= 3 && special < n && pi.len() == n);
    let w = |i: usize, j: usize| dm.dist(i, j) as f64 + pi[i] + pi[j];
    let is_excluded = |i: usize, j: usize| excluded.is_some_and(|m| m.get(i, j));

    let mut tree_edges: Vec<(usize, usize)> = Vec::with_capacity(n);
    let root = (0..n).find(|&v| v != special).unwrap();

    // Split forced edges into spanning-tree ones (as adjacency) and
    // special-node ones.
    let mut forced_mst_count = 0usize;
    let mut forced_special: Vec<usize> = Vec::new();
    for list in &mut work.forced_adj {
        list.clear();
    }
    work.forced_adj.resize(n, Vec::new());
    for &(a, b) in forced {
        if is_excluded(a, b) {
            return None;
        }
        if a == special {
            forced_special.push(b);
        } else if b == special {
            forced_special.push(a);
        } else {
            work.forced_adj[a].push(b);
            work.forced_adj[b].push(a);
            forced_mst_count += 1;
        }
    }
    forced_special.sort_unstable();
    forced_special.dedup();
    if forced_special.len() > 2 {
        return None;
    }

    // Prim over the non-special nodes with the lexicographic total order;
    // equivalent to Kruskal under that order because the order is strict.
    // Forced edges are pre-merged: whenever a node enters the tree, its
    // whole forced component is dragged in through the forced edges, so a
    // forced edge can never end up connecting two tree nodes unused.
    work.in_tree.clear();
    work.in_tree.resize(n, false);
    work.key.clear();
    work.key.resize(n, f64::INFINITY);
    work.key_from.clear();
    work.key_from.resize(n, usize::MAX);
    work.in_tree[special] = true; // never joins the spanning tree
    let mut forced_taken = 0usize;
    let mut in_tree_count = 0usize;
    let mut newly_added: Vec<usize> = Vec::with_capacity(n);

    let enter = |v: usize,
                     work: &mut OneTreeWorkspace,
                     tree_edges: &mut Vec<(usize, usize)>,
                     newly_added: &mut Vec<usize>,
                     in_tree_count: &mut usize,
                     forced_taken: &mut usize| {
        debug_assert!(!work.in_tree[v]);
        work.in_tree[v] = true;
        *in_tree_count += 1;
        newly_added.push(v);
        let mut head = newly_added.len() - 1;
        while head < newly_added.len() {
            let u = newly_added[head];
            head += 1;
            for idx in 0..work.forced_adj[u].len() {
                let fv = work.forced_adj[u][idx];
                if !work.in_tree[fv] {
                    work.in_tree[fv] = true;
                    *in_tree_count += 1;
                    tree_edges.push((u.min(fv), u.max(fv)));
                    *forced_taken += 1;
                    newly_added.push(fv);
                }
            }
        }
    };

    enter(
        root,
        work,
        &mut tree_edges,
        &mut newly_added,
        &mut in_tree_count,
        &mut forced_taken,
    );
    loop {
        // refresh keys from every node added since the last pick
        for &u in &newly_added {
            for v in 0..n {
                if work.in_tree[v] || is_excluded(u, v) {
                    continue;
                }
                let cand = w(u, v);
                if work.key_from[v] == usize::MAX
                    || edge_less(cand, u, v, work.key[v], work.key_from[v], v)
                {
                    work.key[v] = cand;
                    work.key_from[v] = u;
                }
            }
        }
        newly_added.clear();
        if in_tree_count == n - 1 {
            break;
        }
        let mut best = usize::MAX;
        for v in 0..n {
            if work.in_tree[v] || work.key_from[v] == usize::MAX {
                continue;
            }
            if best == usize::MAX
                || edge_less(
                    work.key[v],
                    work.key_from[v],
                    v,
                    work.key[best],
                    work.key_from[best],
                    best,
                )
            {
                best = v;
            }
        }
        if best == usize::MAX {
            return None; // exclusions disconnected the graph
        }
        let from = work.key_from[best];
        tree_edges.push((from.min(best), from.max(best)));
        enter(
            best,
            work,
            &mut tree_edges,
            &mut newly_added,
            &mut in_tree_count,
            &mut forced_taken,
        );
    }
    if forced_taken != forced_mst_count {
        return None; // forced edges formed a cycle
    }
    debug_assert_eq!(tree_edges.len(), n - 2);

    // Two cheapest edges at the special node, forced ones first.
    let mut special_edges: Vec<usize> = forced_special.clone();
    if special_edges.len() < 2 {
        let mut best: Vec<usize> = Vec::new();
        for v in 0..n {
            if v == special || is_excluded(special, v) || forced_special.contains(&v) {
                continue;
            }
            best.push(v);
        }
        best.sort_by(|&a, &b| {
            if edge_less(w(special, a), special, a, w(special, b), special, b) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        for v in best {
            if special_edges.len() == 2 {
                break;
            }
            special_edges.push(v);
        }
    }
    if special_edges.len() != 2 {
        return None;
    }
    // Order the two special edges by the total order so the cheaper is first.
    if edge_less(
        w(special, special_edges[1]),
        special,
        special_edges[1],
        w(special, special_edges[0]),
        special,
        special_edges[0],
    ) {
        special_edges.swap(0, 1);
    }
    for &v in &special_edges {
        tree_edges.push((special.min(v), special.max(v)));
    }

    // Degrees, lengths, parents.
    let mut degrees = vec![0u32; n];
    let mut raw_length = 0i64;
    for &(a, b) in &tree_edges {
        degrees[a] += 1;
        degrees[b] += 1;
        raw_length += dm.dist(a, b);
    }
    let mut bound = raw_length as f64;
    for v in 0..n {
        bound += pi[v] * (degrees[v] as f64 - 2.0);
    }

    for list in &mut work.adj {
        list.clear();
    }
    work.adj.resize(n, Vec::new());
    for &(a, b) in tree_edges.iter().take(n - 2) {
        work.adj[a].push(b);
        work.adj[b].push(a);
    }
    let mut parent = vec![usize::MAX; n];
    parent[root] = root;
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        for &v in &work.adj[u] {
            if parent[v] == usize::MAX {
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    parent[special] = special_edges[0];

    Some(OneTree {
        edges: tree_edges,
        bound,
        raw_length,
        degrees,
        pi: pi.to_vec(),
        special,
        parent,
        root,
    })
}

/// Minimum 1-tree under penalized weights, no constraints.
pub fn minimum_one_tree(dm: &DistanceMatrix, pi: &[f64], special: usize) -> Result<OneTree> {
    let n = dm.n();
    if n < 3 {
        return Err(Error::InvalidInstance(format!("need n >= 3, got {n}")));
    }
    if pi.len() != n {
        return Err(Error::SizeMismatch(format!(
            "pi has {} entries for n = {n}",
            pi.len()
        )));
    }
    if special >= n {
        return Err(Error::IndexOutOfRange(format!("special node {special}")));
    }
    let mut work = OneTreeWorkspace::default();
    constrained_minimum_one_tree(dm, pi, special, &[], None, &mut work)
        .ok_or_else(|| Error::InvalidInstance("no 1-tree exists".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};

    fn unit_square() -> DistanceMatrix {
        // all pairwise rounded distances are 1
        DistanceMatrix::from_raw(4, vec![0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0]).unwrap()
    }

    /// Exhaustive minimum 1-tree for tiny n: enumerate all edge subsets of
    /// size n and keep the valid ones.
    fn brute_one_tree_weight(dm: &DistanceMatrix, pi: &[f64], special: usize) -> f64 {
        let n = dm.n();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
            }
        }
        let m = pairs.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let chosen: Vec<(usize, usize)> = (0..m)
                .filter(|&k| mask & (1 << k) != 0)
                .map(|k| pairs[k])
                .collect();
            let mut deg = vec![0usize; n];
            for &(a, b) in &chosen {
                deg[a] += 1;
                deg[b] += 1;
            }
            if deg[special] != 2 {
                continue;
            }
            // removing the special node must leave a spanning tree
            let rest: Vec<(usize, usize)> = chosen
                .iter()
                .copied()
                .filter(|&(a, b)| a != special && b != special)
                .collect();
            if rest.len() != n - 2 {
                continue;
            }
            fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
                while uf[x] != x {
                    uf[x] = uf[uf[x]];
                    x = uf[x];
                }
                x
            }
            let mut uf: Vec<usize> = (0..n).collect();
            let mut ok = true;
            for &(a, b) in &rest {
                let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                if ra == rb {
                    ok = false;
                    break;
                }
                uf[ra] = rb;
            }
            if !ok {
                continue;
            }
            let weight: f64 = chosen
                .iter()
                .map(|&(a, b)| dm.dist(a, b) as f64 + pi[a] + pi[b])
                .sum::<f64>()
                - 2.0 * pi.iter().sum::<f64>();
            if weight < best {
                best = weight;
            }
        }
        best
    }

    #[test]
    fn unit_square_one_tree_is_optimal_tour() {
        let dm = unit_square();
        let t = minimum_one_tree(&dm, &[0.0; 4], 0).unwrap();
        assert_eq!(t.edges.len(), 4);
        assert_eq!(t.bound, 4.0);
        assert_eq!(t.degrees[0], 2);
        // removing the special node's edges leaves a spanning tree on 3 nodes
        let rest: Vec<_> = t
            .edges
            .iter()
            .filter(|&&(a, b)| a != 0 && b != 0)
            .collect();
        assert_eq!(rest.len(), 2);
    }

    #[test]
    fn matches_exhaustive_enumeration_small() {
        let cfg = GeneratorConfig::default();
        for seed in 0..10u64 {
            let inst = generate_instance(
                DistributionFamily::Uniform,
                DistanceType::Euc2d,
                6,
                seed,
                &cfg,
            )
            .unwrap();
            let dm = inst.distance_matrix();
            let mut pi = vec![0.0; 6];
            if seed % 2 == 1 {
                for (k, p) in pi.iter_mut().enumerate() {
                    *p = (k as f64 - 2.5) * 1000.0;
                }
            }
            let t = minimum_one_tree(&dm, &pi, 0).unwrap();
            let brute = brute_one_tree_weight(&dm, &pi, 0);
            assert!(
                (t.bound - brute).abs() < 1e-6,
                "seed {seed}: {} vs {brute}",
                t.bound
            );
        }
    }

    #[test]
    fn uniform_pi_shift_keeps_edges() {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::Clustered,
            DistanceType::Man2d,
            15,
            3,
            &cfg,
        )
        .unwrap();
        let dm = inst.distance_matrix();
        let t0 = minimum_one_tree(&dm, &vec![0.0; 15], 0).unwrap();
        let t1 = minimum_one_tree(&dm, &vec![250.0; 15], 0).unwrap();
        assert_eq!(t0.edges, t1.edges);
    }

    #[test]
    fn prim_and_kruskal_agree() {
        // Forcing one edge that is already in the tree must reproduce the
        // unconstrained tree, exercising both code paths on the same input.
        let cfg = GeneratorConfig::default();
        for seed in 0..8u64 {
            let inst = generate_instance(
                DistributionFamily::Uniform,
                DistanceType::Att,
                12,
                seed,
                &cfg,
            )
            .unwrap();
            let dm = inst.distance_matrix();
            let pi: Vec<f64> = (0..12).map(|k| ((k * 37 + seed as usize) % 11) as f64).collect();
            let mut work = OneTreeWorkspace::default();
            let free = constrained_minimum_one_tree(&dm, &pi, 0, &[], None, &mut work).unwrap();
            let tree_edge = *free
                .edges
                .iter()
                .find(|&&(a, b)| a != 0 && b != 0)
                .unwrap();
            let forced =
                constrained_minimum_one_tree(&dm, &pi, 0, &[tree_edge], None, &mut work).unwrap();
            assert!((free.bound - forced.bound).abs() < 1e-9);
            let mut e1 = free.edges.clone();
            let mut e2 = forced.edges.clone();
            e1.sort_unstable();
            e2.sort_unstable();
            assert_eq!(e1, e2);
        }
    }

    #[test]
    fn exclusion_reroutes_and_forcing_costs() {
        let dm = DistanceMatrix::from_raw(
            4,
            vec![0, 1, 10, 10, 1, 0, 1, 10, 10, 1, 0, 1, 10, 10, 1, 0],
        )
        .unwrap();
        let mut work = OneTreeWorkspace::default();
        let free = constrained_minimum_one_tree(&dm, &[0.0; 4], 0, &[], None, &mut work).unwrap();
        // cheap path 0-1-2-3 plus the forced second special edge
        assert_eq!(free.raw_length, 13);
        let mut mask = PairMask::new(4);
        mask.set(1, 2);
        let rerouted =
            constrained_minimum_one_tree(&dm, &[0.0; 4], 0, &[], Some(&mask), &mut work).unwrap();
        assert!(rerouted.raw_length > free.raw_length);
        let forced =
            constrained_minimum_one_tree(&dm, &[0.0; 4], 0, &[(1, 3)], None, &mut work).unwrap();
        assert!(forced.raw_length >= free.raw_length);
        assert!(forced.edges.contains(&(1, 3)));
    }

    #[test]
    fn infeasible_constraints_return_none() {
        let dm = unit_square();
        let mut work = OneTreeWorkspace::default();
        // three forced edges at the special node
        assert!(constrained_minimum_one_tree(
            &dm,
            &[0.0; 4],
            0,
            &[(0, 1), (0, 2), (0, 3)],
            None,
            &mut work
        )
        .is_none());
        // forced cycle among non-special nodes is impossible in a tree
        assert!(constrained_minimum_one_tree(
            &dm,
            &[0.0; 4],
            0,
            &[(1, 2), (2, 3), (1, 3)],
            None,
            &mut work
        )
        .is_none());
        // excluding every edge at a node starves it
        let mut mask = PairMask::new(4);
        mask.set(1, 0);
        mask.set(1, 2);
        mask.set(1, 3);
        assert!(
            constrained_minimum_one_tree(&dm, &[0.0; 4], 0, &[], Some(&mask), &mut work).is_none()
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        let dm = unit_square();
        assert!(minimum_one_tree(&dm, &[0.0; 3], 0).is_err());
        assert!(minimum_one_tree(&dm, &[0.0; 4], 9).is_err());
    }
}
