//! Stage-1 base candidate graphs: alpha-nearest, POPMUSIC-style, and their
//! provenance-tagged union.

mod alpha;
mod ascent;
mod io;
mod one_tree;
mod popmusic;

pub use alpha::{alpha_graph_for_tree, alpha_nearest_candidates, alpha_values, AlphaMatrix, AlphaNearest};
pub use ascent::{subgradient_ascent, AscentConfig, AscentOutcome};
pub use io::{read_graph_dump, write_graph_dump, write_lkh_candidates};
pub use one_tree::{minimum_one_tree, OneTree};
pub(crate) use one_tree::{constrained_minimum_one_tree, OneTreeWorkspace, PairMask};
pub use popmusic::{popmusic_candidates, PopmusicConfig};

use crate::error::{Error, Result};
use bitflags::bitflags;

bitflags! {
    /// Which Stage-1 generator produced an edge.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
    pub struct EdgeSource: u8 {
        const ALPHA = 0b01;
        const POPMUSIC = 0b10;
    }
}

impl EdgeSource {
    pub fn label(self) -> &'static str {
        match (self.contains(EdgeSource::ALPHA), self.contains(EdgeSource::POPMUSIC)) {
            (true, true) => "AP",
            (true, false) => "A",
            (false, true) => "P",
            (false, false) => "-",
        }
    }

    pub fn parse_label(s: &str) -> Result<Self> {
        match s {
            "AP" => Ok(EdgeSource::ALPHA | EdgeSource::POPMUSIC),
            "A" => Ok(EdgeSource::ALPHA),
            "P" => Ok(EdgeSource::POPMUSIC),
            "-" => Ok(EdgeSource::empty()),
            other => Err(Error::InvalidArgument(format!("unknown edge source: {other}"))),
        }
    }
}

/// One directed half of an undirected candidate edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEdge {
    pub neighbor: usize,
    pub source: EdgeSource,
    pub alpha: Option<f64>,
}

/// Sparse undirected candidate graph with per-edge provenance flags and
/// optional alpha values. Adjacency lists are sorted by neighbor index and
/// mirrored exactly on both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGraph {
    n: usize,
    adj: Vec<Vec<CandidateEdge>>,
    edge_count: usize,
}

impl CandidateGraph {
    pub fn builder(n: usize) -> CandidateGraphBuilder {
        CandidateGraphBuilder {
            n,
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn edges_per_node(&self) -> f64 {
        self.edge_count as f64 / self.n as f64
    }

    pub fn neighbors(&self, i: usize) -> &[CandidateEdge] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search_by_key(&j, |e| e.neighbor).is_ok()
    }

    pub fn edge(&self, i: usize, j: usize) -> Option<&CandidateEdge> {
        self.adj[i]
            .binary_search_by_key(&j, |e| e.neighbor)
            .ok()
            .map(|idx| &self.adj[i][idx])
    }

    /// Canonical edge list: every undirected edge once as (i, j) with i < j,
    /// sorted lexicographically. Positions in this list are the edge ids used
    /// for labels, features, and scores.
    pub fn canonical_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for i in 0..self.n {
            for e in &self.adj[i] {
                if e.neighbor > i {
                    out.push((i, e.neighbor));
                }
            }
        }
        out
    }

    /// Complete graph on `n` nodes with empty provenance, for baselines.
    pub fn complete(n: usize) -> Result<Self> {
        let mut b = Self::builder(n);
        for i in 0..n {
            for j in (i + 1)..n {
                b.add_edge(i, j, EdgeSource::empty(), None)?;
            }
        }
        b.build()
    }

    /// Verifies undirected consistency, flag symmetry, sortedness, and the
    /// absence of self-loops and duplicates. Runs after every constructor.
    fn assert_consistent(&self) {
        let mut count = 0usize;
        for i in 0..self.n {
            let mut prev: Option<usize> = None;
            for e in &self.adj[i] {
                assert!(e.neighbor < self.n, "neighbor out of range");
                assert_ne!(e.neighbor, i, "self loop at {i}");
                if let Some(p) = prev {
                    assert!(e.neighbor > p, "unsorted or duplicate neighbor at {i}");
                }
                prev = Some(e.neighbor);
                let back = self
                    .edge(e.neighbor, i)
                    .unwrap_or_else(|| panic!("missing reverse edge ({}, {i})", e.neighbor));
                assert_eq!(back.source, e.source, "asymmetric flags on ({i}, {})", e.neighbor);
                assert_eq!(back.alpha, e.alpha, "asymmetric alpha on ({i}, {})", e.neighbor);
                if e.neighbor > i {
                    count += 1;
                }
            }
        }
        assert_eq!(count, self.edge_count, "edge count mismatch");
    }
}

/// Collects undirected edges, then sorts, merges duplicates (OR-ing flags and
/// keeping the first alpha seen), and mirrors adjacency.
pub struct CandidateGraphBuilder {
    n: usize,
    edges: Vec<(usize, usize, EdgeSource, Option<f64>)>,
}

impl CandidateGraphBuilder {
    pub fn add_edge(
        &mut self,
        i: usize,
        j: usize,
        source: EdgeSource,
        alpha: Option<f64>,
    ) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::IndexOutOfRange(format!(
                "edge ({i}, {j}) with n = {}",
                self.n
            )));
        }
        if i == j {
            return Err(Error::InvalidArgument(format!("self loop at {i}")));
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges.push((a, b, source, alpha));
        Ok(())
    }

    pub fn build(mut self) -> Result<CandidateGraph> {
        if self.n < 3 {
            return Err(Error::InvalidInstance(format!(
                "candidate graph needs n >= 3, got {}",
                self.n
            )));
        }
        self.edges
            .sort_by(|&(a1, b1, _, al1), &(a2, b2, _, al2)| {
                (a1, b1, al1.is_none()).partial_cmp(&(a2, b2, al2.is_none())).unwrap()
            });
        let mut adj: Vec<Vec<CandidateEdge>> = vec![Vec::new(); self.n];
        let mut edge_count = 0usize;
        let mut idx = 0;
        while idx < self.edges.len() {
            let (a, b, mut source, mut alpha) = self.edges[idx];
            idx += 1;
            while idx < self.edges.len() && self.edges[idx].0 == a && self.edges[idx].1 == b {
                source |= self.edges[idx].2;
                if alpha.is_none() {
                    alpha = self.edges[idx].3;
                }
                idx += 1;
            }
            adj[a].push(CandidateEdge { neighbor: b, source, alpha });
            adj[b].push(CandidateEdge { neighbor: a, source, alpha });
            edge_count += 1;
        }
        for list in &mut adj {
            list.sort_by_key(|e| e.neighbor);
        }
        let g = CandidateGraph {
            n: self.n,
            adj,
            edge_count,
        };
        g.assert_consistent();
        Ok(g)
    }
}

/// Union of two candidate graphs over the same node set. Provenance flags are
/// OR-merged per edge; alpha values are carried from `a` where present.
pub fn union_candidates(a: &CandidateGraph, b: &CandidateGraph) -> Result<CandidateGraph> {
    if a.n != b.n {
        return Err(Error::SizeMismatch(format!(
            "graph sizes differ: {} vs {}",
            a.n, b.n
        )));
    }
    let mut builder = CandidateGraph::builder(a.n);
    for i in 0..a.n {
        for e in &a.adj[i] {
            if e.neighbor > i {
                builder.add_edge(i, e.neighbor, e.source, e.alpha)?;
            }
        }
        for e in &b.adj[i] {
            if e.neighbor > i {
                builder.add_edge(i, e.neighbor, e.source, e.alpha)?;
            }
        }
    }
    builder.build()
}
