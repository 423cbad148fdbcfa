//! Candidate-graph text formats: the self-describing dump used between
//! pipeline stages, and the candidate-file format read by LKH-style solvers.

use super::{CandidateGraph, EdgeSource};
use crate::error::{Error, Result};

const DUMP_HEADER: &str = "candidate-graph v1";

/// Writes the self-describing graph dump: header, node count, optional
/// 1-tree parents (1-based, 0 = none), one `e i j flags alpha` line per
/// canonical edge, and an `end` marker.
pub fn write_graph_dump(g: &CandidateGraph, dads: Option<&[usize]>) -> String {
    let mut out = String::new();
    out.push_str(DUMP_HEADER);
    out.push('\n');
    out.push_str(&format!("n {}\n", g.n()));
    out.push_str(&format!("edges {}\n", g.edge_count()));
    if let Some(dads) = dads {
        out.push_str("dads");
        for i in 0..g.n() {
            let dad = dads[i];
            if dad == i || dad == usize::MAX {
                out.push_str(" 0");
            } else {
                out.push_str(&format!(" {}", dad + 1));
            }
        }
        out.push('\n');
    }
    for (i, j) in g.canonical_edges() {
        let e = g.edge(i, j).expect("canonical edge");
        match e.alpha {
            Some(a) => out.push_str(&format!("e {i} {j} {} {a}\n", e.source.label())),
            None => out.push_str(&format!("e {i} {j} {} -\n", e.source.label())),
        }
    }
    out.push_str("end\n");
    out
}

/// Parses a graph dump; returns the graph and the 1-tree parents when the
/// dump carries them (0-based, `usize::MAX` = none).
pub fn read_graph_dump(text: &str) -> Result<(CandidateGraph, Option<Vec<usize>>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::MissingField("header".to_string()))?;
    if header.trim() != DUMP_HEADER {
        return Err(Error::VersionMismatch(format!(
            "expected `{DUMP_HEADER}`, got `{}`",
            header.trim()
        )));
    }
    let mut n: Option<usize> = None;
    let mut edge_count: Option<usize> = None;
    let mut dads: Option<Vec<usize>> = None;
    let mut builder: Option<super::CandidateGraphBuilder> = None;
    let mut saw_end = false;
    let mut edges_read = 0usize;

    for (lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next().unwrap();
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        match tag {
            "n" => {
                let v: usize = parts
                    .next()
                    .ok_or_else(|| err("missing node count".into()))?
                    .parse()
                    .map_err(|_| err("malformed node count".into()))?;
                n = Some(v);
                builder = Some(CandidateGraph::builder(v));
            }
            "edges" => {
                edge_count = Some(
                    parts
                        .next()
                        .ok_or_else(|| err("missing edge count".into()))?
                        .parse()
                        .map_err(|_| err("malformed edge count".into()))?,
                );
            }
            "dads" => {
                let n = n.ok_or_else(|| err("dads before n".into()))?;
                let mut ds = Vec::with_capacity(n);
                for tok in parts {
                    let v: usize = tok.parse().map_err(|_| err("malformed dad id".into()))?;
                    ds.push(if v == 0 { usize::MAX } else { v - 1 });
                }
                if ds.len() != n {
                    return Err(Error::SizeMismatch(format!(
                        "dads line has {} entries for n = {n}",
                        ds.len()
                    )));
                }
                dads = Some(ds);
            }
            "e" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| err("edge line before n".into()))?;
                let i: usize = parts
                    .next()
                    .ok_or_else(|| err("missing i".into()))?
                    .parse()
                    .map_err(|_| err("malformed i".into()))?;
                let j: usize = parts
                    .next()
                    .ok_or_else(|| err("missing j".into()))?
                    .parse()
                    .map_err(|_| err("malformed j".into()))?;
                let flags =
                    EdgeSource::parse_label(parts.next().ok_or_else(|| err("missing flags".into()))?)?;
                let alpha_tok = parts.next().ok_or_else(|| err("missing alpha".into()))?;
                let alpha = if alpha_tok == "-" {
                    None
                } else {
                    Some(
                        alpha_tok
                            .parse::<f64>()
                            .map_err(|_| err("malformed alpha".into()))?,
                    )
                };
                b.add_edge(i, j, flags, alpha)?;
                edges_read += 1;
            }
            "end" => {
                saw_end = true;
                break;
            }
            other => return Err(err(format!("unknown line tag `{other}`"))),
        }
    }
    if !saw_end {
        return Err(Error::MissingField("end marker (truncated dump?)".to_string()));
    }
    let expected = edge_count.ok_or_else(|| Error::MissingField("edges".to_string()))?;
    if edges_read != expected {
        return Err(Error::SizeMismatch(format!(
            "dump declares {expected} edges but has {edges_read}"
        )));
    }
    let graph = builder
        .ok_or_else(|| Error::MissingField("n".to_string()))?
        .build()?;
    Ok((graph, dads))
}

/// Writes the downstream-solver candidate file: first line is the node
/// count; then per node `node_id dad_id count cand_1 alpha_1 ...` with
/// 1-based ids, the 1-tree parent (or 0) as dad, candidates sorted by
/// ascending alpha, and alpha rounded to a nonnegative integer (edges
/// without an alpha value, e.g. POPMUSIC-only ones, get 0); a final `-1`
/// line terminates the file.
pub fn write_lkh_candidates(g: &CandidateGraph, dads: Option<&[usize]>) -> String {
    let n = g.n();
    let mut out = String::new();
    out.push_str(&format!("{n}\n"));
    for i in 0..n {
        let dad = match dads {
            Some(ds) if ds[i] != i && ds[i] != usize::MAX => ds[i] + 1,
            _ => 0,
        };
        let mut cands: Vec<(i64, usize)> = g
            .neighbors(i)
            .iter()
            .map(|e| {
                let alpha = e.alpha.map_or(0, |a| a.round().max(0.0) as i64);
                (alpha, e.neighbor)
            })
            .collect();
        cands.sort_unstable();
        out.push_str(&format!("{} {} {}", i + 1, dad, cands.len()));
        for (alpha, j) in cands {
            out.push_str(&format!(" {} {}", j + 1, alpha));
        }
        out.push('\n');
    }
    out.push_str("-1\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::EdgeSource;

    fn sample_graph() -> CandidateGraph {
        let mut b = CandidateGraph::builder(4);
        b.add_edge(0, 1, EdgeSource::ALPHA, Some(0.0)).unwrap();
        b.add_edge(0, 2, EdgeSource::ALPHA | EdgeSource::POPMUSIC, Some(12.75))
            .unwrap();
        b.add_edge(1, 2, EdgeSource::POPMUSIC, None).unwrap();
        b.add_edge(2, 3, EdgeSource::ALPHA, Some(3.0)).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn dump_round_trips() {
        let g = sample_graph();
        let dads = vec![usize::MAX, 0, 1, 2];
        let text = write_graph_dump(&g, Some(&dads));
        let (back, back_dads) = read_graph_dump(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back_dads, Some(dads));
        assert_eq!(write_graph_dump(&back, back_dads.as_deref()), text);
    }

    #[test]
    fn dump_without_dads_round_trips() {
        let g = sample_graph();
        let text = write_graph_dump(&g, None);
        let (back, back_dads) = read_graph_dump(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back_dads, None);
    }

    #[test]
    fn truncated_dump_is_rejected() {
        let g = sample_graph();
        let text = write_graph_dump(&g, None);
        let cut = &text[..text.len() - 5];
        assert!(read_graph_dump(cut).is_err());
    }

    #[test]
    fn wrong_version_is_rejected() {
        let err = read_graph_dump("candidate-graph v9\nn 3\nedges 0\nend\n");
        assert!(matches!(err, Err(Error::VersionMismatch(_))));
    }

    #[test]
    fn edge_count_mismatch_is_rejected() {
        let text = "candidate-graph v1\nn 3\nedges 2\ne 0 1 A 0\nend\n";
        assert!(matches!(read_graph_dump(text), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn lkh_format_shape() {
        let g = sample_graph();
        let dads = vec![usize::MAX, 0, 1, 2];
        let text = write_lkh_candidates(&g, Some(&dads));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "4");
        assert_eq!(lines.last(), Some(&"-1"));
        // node 1: edges to 2 (alpha 0) and 3 (alpha 13 after rounding)
        assert_eq!(lines[1], "1 0 2 2 0 3 13");
        // node 2: dad is node 1; POPMUSIC-only edge has alpha 0
        assert_eq!(lines[2], "2 1 2 1 0 3 0");
        // node 4 has a single candidate
        assert_eq!(lines[4], "4 3 1 3 3");
    }
}
