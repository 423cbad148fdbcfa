//! Grouped means and standard deviations over metric rows, with both a
//! pivoted aligned-text table and delimited output.

use super::metrics::MetricsRow;

/// Aggregates for one (split, family, n, stage) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryGroup {
    pub split: String,
    pub family: String,
    pub n: usize,
    pub stage: String,
    pub count: usize,
    pub edges_per_n_mean: f64,
    pub edges_per_n_std: f64,
    pub coverage_mean: f64,
    pub coverage_std: f64,
    pub gap_mean: Option<f64>,
    pub gap_std: Option<f64>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    (mean, var.sqrt())
}

/// Groups rows by (split, family, n, stage) in deterministic order. The
/// special family name "all" aggregates every family of a (split, n, stage).
pub fn summarize(rows: &[MetricsRow]) -> Vec<SummaryGroup> {
    let mut keys: Vec<(String, String, usize, String)> = rows
        .iter()
        .map(|r| (r.split.clone(), r.family.clone(), r.n, r.stage.clone()))
        .collect();
    let mut all_keys: Vec<(String, String, usize, String)> = rows
        .iter()
        .map(|r| (r.split.clone(), "all".to_string(), r.n, r.stage.clone()))
        .collect();
    keys.append(&mut all_keys);
    keys.sort();
    keys.dedup();

    let mut out = Vec::with_capacity(keys.len());
    for (split, family, n, stage) in keys {
        let members: Vec<&MetricsRow> = rows
            .iter()
            .filter(|r| {
                r.split == split
                    && r.n == n
                    && r.stage == stage
                    && (family == "all" || r.family == family)
            })
            .collect();
        if members.is_empty() {
            continue;
        }
        let epn: Vec<f64> = members.iter().map(|r| r.edges_per_n).collect();
        let cov: Vec<f64> = members.iter().map(|r| r.coverage).collect();
        let gaps: Vec<f64> = members.iter().filter_map(|r| r.gap_percent).collect();
        let (epn_mean, epn_std) = mean_std(&epn);
        let (cov_mean, cov_std) = mean_std(&cov);
        let (gap_mean, gap_std) = if gaps.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_std(&gaps);
            (Some(m), Some(s))
        };
        out.push(SummaryGroup {
            split,
            family,
            n,
            stage,
            count: members.len(),
            edges_per_n_mean: epn_mean,
            edges_per_n_std: epn_std,
            coverage_mean: cov_mean,
            coverage_std: cov_std,
            gap_mean,
            gap_std,
        });
    }
    out
}

pub fn summary_csv(groups: &[SummaryGroup]) -> String {
    let mut out = String::from(
        "split,family,n,stage,count,edges_per_n_mean,edges_per_n_std,coverage_mean,coverage_std,gap_mean,gap_std\n",
    );
    for g in groups {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            g.split,
            g.family,
            g.n,
            g.stage,
            g.count,
            g.edges_per_n_mean,
            g.edges_per_n_std,
            g.coverage_mean,
            g.coverage_std,
            g.gap_mean.map_or(String::new(), |v| v.to_string()),
            g.gap_std.map_or(String::new(), |v| v.to_string()),
        ));
    }
    out
}

/// Pivoted text table: one block per split, stages as rows, sizes as paired
/// Edges/N and coverage columns, mirroring the density/coverage layout used
/// for candidate-graph comparisons.
pub fn summary_table(groups: &[SummaryGroup]) -> String {
    let mut out = String::new();
    let mut splits: Vec<&str> = groups.iter().map(|g| g.split.as_str()).collect();
    splits.sort();
    splits.dedup();
    for split in splits {
        let members: Vec<&SummaryGroup> = groups
            .iter()
            .filter(|g| g.split == split && g.family == "all")
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut sizes: Vec<usize> = members.iter().map(|g| g.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        let mut stages: Vec<&str> = members.iter().map(|g| g.stage.as_str()).collect();
        stages.sort();
        stages.dedup();
        out.push_str(&format!("split: {split}\n"));
        out.push_str(&format!("{:<10}", "stage"));
        for n in &sizes {
            out.push_str(&format!(" | {:^16} {:^16}", format!("n={n} Edges/N"), "Cov (%)"));
        }
        out.push('\n');
        for stage in stages {
            out.push_str(&format!("{stage:<10}"));
            for &n in &sizes {
                match members.iter().find(|g| g.stage == stage && g.n == n) {
                    Some(g) => out.push_str(&format!(
                        " | {:>7.2} {:>7.2}  {:>7.3} {:>7.3} ",
                        g.edges_per_n_mean,
                        g.edges_per_n_std,
                        100.0 * g.coverage_mean,
                        100.0 * g.coverage_std
                    )),
                    None => out.push_str(&format!(" | {:^16} {:^16}", "-", "-")),
                }
            }
            out.push('\n');
        }
        // per-family detail block
        out.push('\n');
        let detail: Vec<&SummaryGroup> = groups
            .iter()
            .filter(|g| g.split == split && g.family != "all")
            .collect();
        if !detail.is_empty() {
            out.push_str(&format!(
                "{:<28} {:<8} {:>5} {:>6} {:>14} {:>16} {:>14}\n",
                "family", "stage", "n", "count", "Edges/N", "Cov (%)", "Gap (%)"
            ));
            for g in detail {
                let gap = match (g.gap_mean, g.gap_std) {
                    (Some(m), Some(s)) => format!("{m:.3} ~ {s:.3}"),
                    _ => "-".to_string(),
                };
                out.push_str(&format!(
                    "{:<28} {:<8} {:>5} {:>6} {:>7.2} ~ {:>4.2} {:>9.3} ~ {:>5.3} {:>14}\n",
                    g.family,
                    g.stage,
                    g.n,
                    g.count,
                    g.edges_per_n_mean,
                    g.edges_per_n_std,
                    100.0 * g.coverage_mean,
                    100.0 * g.coverage_std,
                    gap
                ));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(family: &str, n: usize, stage: &str, epn: f64, cov: f64) -> MetricsRow {
        MetricsRow {
            split: "test".into(),
            family: family.into(),
            n,
            instance_id: format!("{family}-{n}"),
            stage: stage.into(),
            edges_per_n: epn,
            coverage: cov,
            gap_percent: None,
            fell_back: None,
        }
    }

    #[test]
    fn single_row_has_zero_std() {
        let rows = vec![row("uniform-EUC_2D", 50, "base", 6.0, 1.0)];
        let groups = summarize(&rows);
        let g = groups.iter().find(|g| g.family != "all").unwrap();
        assert_eq!(g.count, 1);
        assert_eq!(g.edges_per_n_std, 0.0);
        assert_eq!(g.coverage_std, 0.0);
    }

    #[test]
    fn two_rows_match_hand_computation() {
        let rows = vec![
            row("f", 50, "base", 4.0, 0.9),
            row("f", 50, "base", 6.0, 1.0),
        ];
        let groups = summarize(&rows);
        let g = groups.iter().find(|g| g.family == "f").unwrap();
        assert!((g.edges_per_n_mean - 5.0).abs() < 1e-12);
        assert!((g.edges_per_n_std - 1.0).abs() < 1e-12);
        assert!((g.coverage_mean - 0.95).abs() < 1e-12);
        assert!((g.coverage_std - 0.05).abs() < 1e-12);
    }

    #[test]
    fn group_totals_match_independent_aggregation() {
        // double-entry check: recompute a group mean with a separate fold
        let rows: Vec<MetricsRow> = (0..10)
            .map(|k| row("g", 50, "pruned", k as f64, 0.5 + 0.01 * k as f64))
            .collect();
        let groups = summarize(&rows);
        let g = groups.iter().find(|g| g.family == "g").unwrap();
        let indep_mean = rows.iter().map(|r| r.edges_per_n).sum::<f64>() / rows.len() as f64;
        assert!((g.edges_per_n_mean - indep_mean).abs() < 1e-12);
        let indep_var = rows
            .iter()
            .map(|r| (r.edges_per_n - indep_mean).powi(2))
            .sum::<f64>()
            / rows.len() as f64;
        assert!((g.edges_per_n_std - indep_var.sqrt()).abs() < 1e-12);
        // the "all" aggregate covers the same rows here
        let all = groups.iter().find(|g| g.family == "all").unwrap();
        assert_eq!(all.count, 10);
        assert!((all.edges_per_n_mean - indep_mean).abs() < 1e-12);
    }

    #[test]
    fn table_renders_all_blocks() {
        let rows = vec![
            row("a", 50, "base", 6.0, 1.0),
            row("a", 50, "pruned", 4.0, 0.99),
            row("a", 100, "base", 6.0, 1.0),
        ];
        let table = summary_table(&summarize(&rows));
        assert!(table.contains("split: test"));
        assert!(table.contains("base"));
        assert!(table.contains("pruned"));
        assert!(table.contains("n=50"));
        assert!(table.contains("n=100"));
    }
}
