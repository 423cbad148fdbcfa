//! Best-first branch and bound over the Held-Karp 1-tree bound.
//!
//! Nodes carry edge inclusion/exclusion decisions. Each node's bound comes
//! from a short warm-started subgradient ascent on the constrained 1-tree,
//! with Polyak-type steps aimed at the incumbent length. Branching follows
//! the classic degree scheme: pick a node of tree-degree three or more and
//! split on its two heaviest free tree edges, which partitions the parent's
//! tour set. Forcing a second edge at a vertex implicitly excludes all its
//! remaining edges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use super::{greedy_tour, Tour};
use crate::candidates::{constrained_minimum_one_tree, OneTree, OneTreeWorkspace, PairMask};
use crate::error::Result;
use crate::instances::DistanceMatrix;

/// Search budget. Exhausting either limit ends the search with the best
/// tour found so far flagged as unproven.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnbBudget {
    /// Maximum bound evaluations (search nodes). Zero returns the
    /// bound-initialization heuristic tour immediately.
    pub max_nodes: u64,
    /// Cap on simultaneously queued nodes.
    pub max_queue: usize,
}

impl Default for BnbBudget {
    fn default() -> Self {
        Self {
            max_nodes: 1_000_000,
            max_queue: 150_000,
        }
    }
}

/// Search result with diagnostics.
#[derive(Debug, Clone)]
pub struct BnbOutcome {
    pub tour: Tour,
    /// Held-Karp bound at the root after the initial ascent.
    pub root_bound: f64,
    /// Bound evaluations performed.
    pub nodes_evaluated: u64,
}

/// Integer tours let us prune once bound >= incumbent - 1; the epsilon
/// absorbs float accumulation in the bound itself.
const PRUNE_EPS: f64 = 1e-3;

const ROOT_SPECIAL: usize = 0;

#[derive(Debug)]
struct NodeData {
    /// One or two edge decisions applied on top of the parent.
    decisions: Vec<(u16, u16, bool)>,
    parent: Option<Arc<NodeData>>,
    /// Best penalties found when this node was bounded; warm start for
    /// children (f32 keeps queue memory in check).
    pi: Arc<[f32]>,
}

struct HeapEntry {
    bound: f64,
    seq: u64,
    node: Arc<NodeData>,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert for best(lowest)-bound-first,
        // breaking ties by insertion order.
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Flattened constraint state for one node.
struct Constraints {
    forced: Vec<(usize, usize)>,
    excluded: PairMask,
    /// Set when the forced edges already form a Hamiltonian cycle.
    forced_tour: Option<Vec<usize>>,
}

fn collect_decisions(node: &NodeData, out: &mut Vec<(usize, usize, bool)>) {
    if let Some(p) = &node.parent {
        collect_decisions(p, out);
    }
    for &(a, b, inc) in &node.decisions {
        out.push((a as usize, b as usize, inc));
    }
}

/// Expands a decision chain into forced/excluded sets, applying the implied
/// exclusions at saturated vertices. Returns `None` when the decisions are
/// already contradictory.
fn build_constraints(n: usize, node: Option<&NodeData>, mask: &mut PairMask) -> Option<Constraints> {
    mask.clear_all();
    let mut decisions = Vec::new();
    if let Some(node) = node {
        collect_decisions(node, &mut decisions);
    }
    let mut forced: Vec<(usize, usize)> = Vec::new();
    for &(a, b, inc) in &decisions {
        if inc {
            forced.push((a.min(b), a.max(b)));
        } else {
            mask.set(a, b);
        }
    }
    forced.sort_unstable();
    forced.dedup();
    let mut forced_deg = vec![0u8; n];
    for &(a, b) in &forced {
        if mask.get(a, b) {
            return None; // same edge forced and excluded
        }
        forced_deg[a] += 1;
        forced_deg[b] += 1;
        if forced_deg[a] > 2 || forced_deg[b] > 2 {
            return None;
        }
    }
    // saturated vertices keep only their two forced edges
    let mut forced_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &forced {
        forced_adj[a].push(b);
        forced_adj[b].push(a);
    }
    for v in 0..n {
        if forced_deg[v] == 2 {
            for u in 0..n {
                if u != v && !forced_adj[v].contains(&u) {
                    mask.set(v, u);
                }
            }
        }
    }
    // forced edges must form disjoint paths; a premature cycle is fatal and
    // a full cycle is a finished tour
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    let mut cycle = false;
    for &(a, b) in &forced {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        if ra == rb {
            if cycle {
                return None; // two cycles cannot both close
            }
            cycle = true;
        } else {
            uf[ra] = rb;
        }
    }
    let mut forced_tour = None;
    if cycle {
        if forced.len() != n {
            return None; // subtour shorter than n
        }
        // walk the cycle into a visiting order
        let mut order = Vec::with_capacity(n);
        let mut prev = usize::MAX;
        let mut cur = 0usize;
        for _ in 0..n {
            order.push(cur);
            let next = *forced_adj[cur].iter().find(|&&u| u != prev)?;
            prev = cur;
            cur = next;
        }
        forced_tour = Some(order);
    }
    // a vertex with fewer than two available edges kills the subtree
    for v in 0..n {
        let mut avail = 0;
        for u in 0..n {
            if u != v && !mask.get(v, u) {
                avail += 1;
                if avail == 2 {
                    break;
                }
            }
        }
        if avail < 2 {
            return None;
        }
    }
    Some(Constraints {
        forced,
        excluded: mask.clone(),
        forced_tour,
    })
}

struct Evaluation {
    bound: f64,
    tree: OneTree,
    pi: Vec<f64>,
}

/// Ascent tuning for one bound evaluation.
struct AscentParams {
    iterations: usize,
    /// Initial Polyak relaxation factor.
    lambda: f64,
    /// Halve lambda after this many consecutive non-improving iterations.
    decay_after: usize,
    /// Subgradient momentum blend.
    momentum: f64,
}

impl AscentParams {
    fn root(n: usize) -> Self {
        Self {
            iterations: (12 * n).max(600),
            lambda: 2.0,
            decay_after: 30,
            momentum: 0.5,
        }
    }

    fn child(n: usize) -> Self {
        Self {
            iterations: 25.max(n / 4),
            lambda: 0.6,
            decay_after: 6,
            momentum: 0.5,
        }
    }
}

/// Warm-started Polyak ascent on the constrained 1-tree bound: steps of
/// lambda * (incumbent - w) / |subgradient|^2 with slow lambda decay and a
/// momentum blend. Stops early once the bound proves the subtree cannot
/// improve on the incumbent. `None` means the constraints admit no 1-tree.
fn evaluate_node(
    dm: &DistanceMatrix,
    cons: &Constraints,
    pi0: &[f32],
    params: &AscentParams,
    upper_bound: i64,
    cut: f64,
    work: &mut OneTreeWorkspace,
) -> Option<Evaluation> {
    let n = dm.n();
    let mut pi: Vec<f64> = pi0.iter().map(|&p| p as f64).collect();
    let mut best: Option<Evaluation> = None;
    let mut lambda = params.lambda;
    let mut since_improve = 0usize;
    let mut prev_grad = vec![0.0f64; n];
    for _ in 0..=params.iterations {
        let tree = constrained_minimum_one_tree(
            dm,
            &pi,
            ROOT_SPECIAL,
            &cons.forced,
            Some(&cons.excluded),
            work,
        )?;
        let bound = tree.bound;
        let is_tour = tree.is_tour();
        let mut gnorm2 = 0.0f64;
        for v in 0..n {
            let g = tree.degrees[v] as f64 - 2.0;
            gnorm2 += g * g;
        }
        let step = lambda * (upper_bound as f64 - bound).max(1.0) / gnorm2.max(1.0);
        let degrees = tree.degrees.clone();
        if best.as_ref().is_none_or(|b| bound > b.bound) {
            best = Some(Evaluation {
                bound,
                tree,
                pi: pi.clone(),
            });
            since_improve = 0;
        } else {
            since_improve += 1;
            if since_improve >= params.decay_after {
                lambda *= 0.5;
                since_improve = 0;
            }
        }
        let cur = best.as_ref().unwrap();
        if cur.bound >= cut || cur.tree.is_tour() || is_tour || gnorm2 == 0.0 {
            break;
        }
        if lambda < 1e-7 {
            break;
        }
        for v in 0..n {
            let g = (1.0 - params.momentum) * (degrees[v] as f64 - 2.0)
                + params.momentum * prev_grad[v];
            pi[v] += step * g;
            prev_grad[v] = g;
        }
    }
    best
}

/// Exact TSP via edge inclusion/exclusion branch and bound. If the search
/// closes within budget the returned tour is optimal and flagged proven;
/// otherwise the best tour found is returned unproven.
pub fn branch_and_bound(dm: &DistanceMatrix, budget: &BnbBudget) -> Result<BnbOutcome> {
    let n = dm.n();
    let mut incumbent = greedy_tour(dm);
    if budget.max_nodes == 0 {
        return Ok(BnbOutcome {
            tour: incumbent,
            root_bound: f64::NEG_INFINITY,
            nodes_evaluated: 0,
        });
    }

    let mut work = OneTreeWorkspace::default();
    let mut mask = PairMask::new(n);
    let mut nodes_evaluated: u64 = 0;
    let mut complete = true;

    let root_cons = match build_constraints(n, None, &mut mask) {
        Some(c) => c,
        None => unreachable!("unconstrained root is always feasible for n >= 3"),
    };
    let zeros = vec![0.0f32; n];
    let cut = |best: i64| best as f64 - 1.0 + PRUNE_EPS;
    nodes_evaluated += 1;
    let root_eval = evaluate_node(
        dm,
        &root_cons,
        &zeros,
        &AscentParams::root(n),
        incumbent.length,
        cut(incumbent.length),
        &mut work,
    )
    .expect("root is feasible");
    let root_bound = root_eval.bound;

    if root_eval.tree.is_tour() {
        let order = tree_tour_order(&root_eval.tree);
        let t = Tour::from_order(order, dm, true)?;
        let best = if t.length <= incumbent.length { t } else { incumbent };
        return Ok(BnbOutcome {
            tour: Tour {
                proven_optimal: true,
                ..best
            },
            root_bound,
            nodes_evaluated,
        });
    }
    if root_eval.bound >= cut(incumbent.length) {
        // the heuristic tour is already optimal
        incumbent.proven_optimal = true;
        return Ok(BnbOutcome {
            tour: incumbent,
            root_bound,
            nodes_evaluated,
        });
    }

    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut seq: u64 = 0;
    let root_pi: Arc<[f32]> = root_eval.pi.iter().map(|&p| p as f32).collect();
    // seed children of the root
    let child_params = AscentParams::child(n);
    expand(
        dm,
        None,
        &root_eval,
        root_pi,
        &mut heap,
        &mut seq,
        &mut incumbent,
        &mut nodes_evaluated,
        &mut complete,
        budget,
        &child_params,
        &mut work,
        &mut mask,
    );

    while let Some(entry) = heap.pop() {
        if nodes_evaluated >= budget.max_nodes {
            complete = false;
            break;
        }
        if entry.bound >= cut(incumbent.length) {
            continue;
        }
        // Rebuild this node's tree at its stored penalties and branch on it.
        let cons = match build_constraints(n, Some(&entry.node), &mut mask) {
            Some(c) => c,
            None => continue,
        };
        let pi: Vec<f64> = entry.node.pi.iter().map(|&p| p as f64).collect();
        let tree = match constrained_minimum_one_tree(
            dm,
            &pi,
            ROOT_SPECIAL,
            &cons.forced,
            Some(&cons.excluded),
            &mut work,
        ) {
            Some(t) => t,
            None => continue,
        };
        if tree.is_tour() {
            try_incumbent(&tree, dm, &mut incumbent)?;
            continue;
        }
        let eval = Evaluation {
            bound: tree.bound.max(entry.bound),
            tree,
            pi,
        };
        if eval.bound >= cut(incumbent.length) {
            continue;
        }
        let node_pi = entry.node.pi.clone();
        expand(
            dm,
            Some(&entry.node),
            &eval,
            node_pi,
            &mut heap,
            &mut seq,
            &mut incumbent,
            &mut nodes_evaluated,
            &mut complete,
            budget,
            &child_params,
            &mut work,
            &mut mask,
        );
    }

    if nodes_evaluated >= budget.max_nodes {
        complete = false;
    }
    incumbent.proven_optimal = complete && heap.is_empty();
    // Drain cannot leave provable work: if we exited the loop by emptying the
    // heap and never hit a cap, the incumbent is optimal.
    Ok(BnbOutcome {
        tour: incumbent,
        root_bound,
        nodes_evaluated,
    })
}

fn tree_tour_order(tree: &OneTree) -> Vec<usize> {
    let n = tree.degrees.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &tree.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut order = Vec::with_capacity(n);
    let mut prev = usize::MAX;
    let mut cur = 0usize;
    for _ in 0..n {
        order.push(cur);
        let next = *adj[cur].iter().find(|&&u| u != prev).expect("degree two");
        prev = cur;
        cur = next;
    }
    order
}

fn try_incumbent(tree: &OneTree, dm: &DistanceMatrix, incumbent: &mut Tour) -> Result<()> {
    let order = tree_tour_order(tree);
    let t = Tour::from_order(order, dm, false)?;
    if t.length < incumbent.length {
        *incumbent = t;
    }
    Ok(())
}

/// Creates, bounds, and queues the children of one node.
#[allow(clippy::too_many_arguments)]
fn expand(
    dm: &DistanceMatrix,
    parent: Option<&Arc<NodeData>>,
    eval: &Evaluation,
    parent_pi: Arc<[f32]>,
    heap: &mut BinaryHeap<HeapEntry>,
    seq: &mut u64,
    incumbent: &mut Tour,
    nodes_evaluated: &mut u64,
    complete: &mut bool,
    budget: &BnbBudget,
    child_params: &AscentParams,
    work: &mut OneTreeWorkspace,
    mask: &mut PairMask,
) {
    let n = dm.n();
    let cut = |best: i64| best as f64 - 1.0 + PRUNE_EPS;

    // Forced degree per vertex under the parent's constraints.
    let mut forced_deg = vec![0u8; n];
    {
        let mut decisions = Vec::new();
        if let Some(p) = parent {
            collect_decisions(p, &mut decisions);
        }
        let mut forced: Vec<(usize, usize)> = decisions
            .iter()
            .filter(|&&(_, _, inc)| inc)
            .map(|&(a, b, _)| (a.min(b), a.max(b)))
            .collect();
        forced.sort_unstable();
        forced.dedup();
        for (a, b) in forced {
            forced_deg[a] += 1;
            forced_deg[b] += 1;
        }
    }

    // Branch vertex: maximum tree degree, smallest index on ties.
    let v = (0..n)
        .max_by_key(|&v| (eval.tree.degrees[v], std::cmp::Reverse(v)))
        .expect("nonempty");
    debug_assert!(eval.tree.degrees[v] > 2, "expand called on a tour");

    let is_forced = |a: usize, b: usize, decisions: &[(usize, usize, bool)]| {
        decisions
            .iter()
            .any(|&(x, y, inc)| inc && ((x, y) == (a, b) || (x, y) == (b, a)))
    };
    let mut decisions = Vec::new();
    if let Some(p) = parent {
        collect_decisions(p, &mut decisions);
    }
    let pi = &eval.pi;
    let mut free_edges: Vec<(f64, usize, usize)> = eval
        .tree
        .edges
        .iter()
        .filter(|&&(a, b)| (a == v || b == v) && !is_forced(a, b, &decisions))
        .map(|&(a, b)| {
            let w = dm.dist(a, b) as f64 + pi[a] + pi[b];
            (w, a.min(b), a.max(b))
        })
        .collect();
    // heaviest first; ties by larger pair so the order is total
    free_edges.sort_by(|x, y| y.partial_cmp(x).unwrap());
    if free_edges.is_empty() {
        return;
    }
    let e1 = (free_edges[0].1, free_edges[0].2);
    let children: Vec<Vec<(u16, u16, bool)>> = if forced_deg[v] >= 1 || free_edges.len() < 2 {
        vec![
            vec![(e1.0 as u16, e1.1 as u16, false)],
            vec![(e1.0 as u16, e1.1 as u16, true)],
        ]
    } else {
        let e2 = (free_edges[1].1, free_edges[1].2);
        vec![
            vec![(e1.0 as u16, e1.1 as u16, false)],
            vec![
                (e1.0 as u16, e1.1 as u16, true),
                (e2.0 as u16, e2.1 as u16, false),
            ],
            vec![
                (e1.0 as u16, e1.1 as u16, true),
                (e2.0 as u16, e2.1 as u16, true),
            ],
        ]
    };

    for child_decisions in children {
        if *nodes_evaluated >= budget.max_nodes {
            *complete = false;
            return;
        }
        let node = Arc::new(NodeData {
            decisions: child_decisions,
            parent: parent.cloned(),
            pi: parent_pi.clone(),
        });
        let cons = match build_constraints(n, Some(&node), mask) {
            Some(c) => c,
            None => continue,
        };
        if let Some(order) = &cons.forced_tour {
            if let Ok(t) = Tour::from_order(order.clone(), dm, false) {
                if t.length < incumbent.length {
                    *incumbent = t;
                }
            }
            continue;
        }
        *nodes_evaluated += 1;
        let child_eval = match evaluate_node(
            dm,
            &cons,
            &parent_pi,
            child_params,
            incumbent.length,
            cut(incumbent.length),
            work,
        ) {
            Some(e) => e,
            None => continue,
        };
        if child_eval.tree.is_tour() {
            let _ = try_incumbent(&child_eval.tree, dm, incumbent);
            continue;
        }
        let bound = child_eval.bound.max(eval.bound);
        if bound >= cut(incumbent.length) {
            continue;
        }
        if heap.len() >= budget.max_queue {
            *complete = false;
            continue;
        }
        let best_pi: Arc<[f32]> = child_eval.pi.iter().map(|&p| p as f32).collect();
        let node = Arc::new(NodeData {
            decisions: node.decisions.clone(),
            parent: node.parent.clone(),
            pi: best_pi,
        });
        *seq += 1;
        heap.push(HeapEntry {
            bound,
            seq: *seq,
            node,
        });
    }
}
