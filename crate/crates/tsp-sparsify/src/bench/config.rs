//! Experiment configuration, parsed from key=value text and CLI overrides.

use std::path::PathBuf;

use crate::candidates::{AscentConfig, PopmusicConfig};
use crate::error::{Error, Result};
use crate::instances::{DistanceType, DistributionFamily, GeneratorConfig};
use crate::learn::{LossKind, TrainConfig};
use crate::prune::CoverageAveraging;

/// One benchmark family: a spatial distribution crossed with a distance type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    pub family: DistributionFamily,
    pub distance_type: DistanceType,
}

impl FamilySpec {
    pub fn name(&self) -> String {
        format!("{}-{}", self.family.name(), self.distance_type.keyword())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (fam, dt) = s.split_once(':').ok_or_else(|| {
            Error::Config(format!("family spec must be `distribution:TYPE`, got `{s}`"))
        })?;
        Ok(Self {
            family: DistributionFamily::parse(fam.trim())?,
            distance_type: DistanceType::parse(dt.trim())?,
        })
    }

    /// All twenty benchmark families.
    pub fn all() -> Vec<FamilySpec> {
        let mut out = Vec::with_capacity(20);
        for family in DistributionFamily::ALL {
            for distance_type in DistanceType::ALL {
                out.push(FamilySpec {
                    family,
                    distance_type,
                });
            }
        }
        out
    }
}

/// Which Stage-1 generator builds the base candidate graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage1Mode {
    Alpha,
    Popmusic,
    Union,
}

impl Stage1Mode {
    pub fn name(self) -> &'static str {
        match self {
            Stage1Mode::Alpha => "alpha",
            Stage1Mode::Popmusic => "popmusic",
            Stage1Mode::Union => "union",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Stage1Mode::Alpha),
            "popmusic" => Ok(Stage1Mode::Popmusic),
            "union" => Ok(Stage1Mode::Union),
            other => Err(Error::Config(format!("unknown stage1 mode: {other}"))),
        }
    }
}

/// Full experiment description. Every field has a default; the config file
/// overrides defaults and CLI flags override the file.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub families: Vec<FamilySpec>,
    pub train_n: usize,
    pub train_count: usize,
    /// Validation sizes and per-family counts, aligned like the test lists.
    pub validation_sizes: Vec<usize>,
    pub validation_counts: Vec<usize>,
    pub test_sizes: Vec<usize>,
    /// Instances per family per test size; aligned with `test_sizes`.
    pub test_counts: Vec<usize>,
    pub seed: u64,
    pub stage1: Stage1Mode,
    pub model: LossKind,
    pub alpha_k: usize,
    pub knn_k: usize,
    pub popmusic_starts: usize,
    pub popmusic_subpath: usize,
    pub popmusic_rounds: usize,
    pub ascent: AscentConfig,
    pub train: TrainConfig,
    pub temperature: f64,
    pub m_min: usize,
    pub eta_grid: Vec<f64>,
    pub coverage_target: f64,
    pub averaging: CoverageAveraging,
    pub label_budget: u64,
    pub eval_gap: bool,
    pub dump_features: bool,
    pub generator: GeneratorConfig,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            families: FamilySpec::all(),
            train_n: 50,
            train_count: 100,
            validation_sizes: vec![50, 100],
            validation_counts: vec![30, 8],
            test_sizes: vec![50, 100],
            test_counts: vec![50, 12],
            seed: 1,
            stage1: Stage1Mode::Union,
            model: LossKind::Logistic,
            alpha_k: 10,
            knn_k: 10,
            popmusic_starts: 16,
            popmusic_subpath: 60,
            popmusic_rounds: 60,
            ascent: AscentConfig::strong(),
            train: TrainConfig::default(),
            temperature: 1.0,
            m_min: 2,
            eta_grid: crate::prune::default_eta_grid(),
            coverage_target: 0.99,
            averaging: CoverageAveraging::PerInstance,
            label_budget: 1_000_000,
            eval_gap: false,
            dump_features: false,
            generator: GeneratorConfig::default(),
            out_dir: PathBuf::from("runs/experiment"),
            jobs: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn popmusic_config(&self, seed: u64) -> PopmusicConfig {
        PopmusicConfig {
            subpath_len: self.popmusic_subpath,
            starts: self.popmusic_starts,
            seed,
            optimize: true,
            max_rounds: self.popmusic_rounds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::Config("no families selected".to_string()));
        }
        if self.train_count < 1 {
            return Err(Error::Config("train_count must be at least 1".to_string()));
        }
        if self.validation_counts.len() != self.validation_sizes.len() {
            return Err(Error::Config(format!(
                "validation_counts has {} entries for {} validation sizes",
                self.validation_counts.len(),
                self.validation_sizes.len()
            )));
        }
        if self.validation_counts.iter().any(|&c| c < 1) || self.validation_sizes.is_empty() {
            return Err(Error::Config("validation split must be nonempty".to_string()));
        }
        if self.test_counts.len() != self.test_sizes.len() {
            return Err(Error::Config(format!(
                "test_counts has {} entries for {} test sizes",
                self.test_counts.len(),
                self.test_sizes.len()
            )));
        }
        if self.test_counts.iter().any(|&c| c < 1) {
            return Err(Error::Config("test counts must be at least 1".to_string()));
        }
        for &n in [self.train_n]
            .iter()
            .chain(&self.validation_sizes)
            .chain(&self.test_sizes)
        {
            if n < 5 {
                return Err(Error::Config(format!("instance size {n} too small")));
            }
        }
        if self.test_sizes.is_empty() {
            return Err(Error::Config("no test sizes".to_string()));
        }
        let min_n = self
            .validation_sizes
            .iter()
            .chain(&self.test_sizes)
            .copied()
            .fold(self.train_n, usize::min);
        if self.alpha_k < 2 || self.alpha_k >= min_n {
            return Err(Error::Config(format!("alpha_k {} out of range", self.alpha_k)));
        }
        if self.knn_k < 1 || self.knn_k >= min_n {
            return Err(Error::Config(format!("knn_k {} out of range", self.knn_k)));
        }
        for &eta in &self.eta_grid {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Config(format!("eta {eta} outside (0, 1]")));
            }
        }
        if self.eta_grid.is_empty() {
            return Err(Error::Config("empty eta grid".to_string()));
        }
        if !(self.coverage_target > 0.0 && self.coverage_target <= 1.0) {
            return Err(Error::Config(format!(
                "coverage target {} outside (0, 1]",
                self.coverage_target
            )));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::Config("temperature must be positive".to_string()));
        }
        if self.m_min < 2 {
            return Err(Error::Config("m_min must be at least 2".to_string()));
        }
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let parse_usize = |v: &str, key: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::Config(format!("malformed {key}: {v}")))
        };
        let parse_f64 = |v: &str, key: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("malformed {key}: {v}")))
        };
        let parse_bool = |v: &str, key: &str| -> Result<bool> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Config(format!("malformed {key}: {v}"))),
            }
        };
        match key {
            "families" => {
                if value == "all" {
                    self.families = FamilySpec::all();
                } else {
                    self.families = value
                        .split(',')
                        .map(|s| FamilySpec::parse(s.trim()))
                        .collect::<Result<_>>()?;
                }
            }
            "train_n" => self.train_n = parse_usize(value, key)?,
            "train_count" => self.train_count = parse_usize(value, key)?,
            "validation_n" => {
                self.validation_sizes = vec![parse_usize(value, key)?];
                let c = self.validation_counts.first().copied().unwrap_or(1);
                self.validation_counts = vec![c];
            }
            "validation_sizes" => {
                self.validation_sizes = value
                    .split(',')
                    .map(|s| parse_usize(s.trim(), key))
                    .collect::<Result<_>>()?;
            }
            "validation_count" => {
                let c = parse_usize(value, key)?;
                self.validation_counts = vec![c; self.validation_sizes.len()];
            }
            "validation_counts" => {
                self.validation_counts = value
                    .split(',')
                    .map(|s| parse_usize(s.trim(), key))
                    .collect::<Result<_>>()?;
            }
            "test_sizes" => {
                self.test_sizes = value
                    .split(',')
                    .map(|s| parse_usize(s.trim(), key))
                    .collect::<Result<_>>()?;
            }
            "test_count" => {
                let c = parse_usize(value, key)?;
                self.test_counts = vec![c; self.test_sizes.len()];
            }
            "test_counts" => {
                self.test_counts = value
                    .split(',')
                    .map(|s| parse_usize(s.trim(), key))
                    .collect::<Result<_>>()?;
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("malformed seed: {value}")))?
            }
            "stage1" => self.stage1 = Stage1Mode::parse(value)?,
            "model" => self.model = LossKind::parse(value)?,
            "alpha_k" => self.alpha_k = parse_usize(value, key)?,
            "knn_k" => self.knn_k = parse_usize(value, key)?,
            "popmusic_starts" => self.popmusic_starts = parse_usize(value, key)?,
            "popmusic_subpath" => self.popmusic_subpath = parse_usize(value, key)?,
            "popmusic_rounds" => self.popmusic_rounds = parse_usize(value, key)?,
            "ascent_iterations" => {
                self.ascent.max_iterations = Some(parse_usize(value, key)?);
            }
            "ascent_step_scale" => self.ascent.initial_step_scale = parse_f64(value, key)?,
            "ascent_patience" => self.ascent.patience = parse_usize(value, key)?,
            "ascent_growth" => self.ascent.growth = parse_f64(value, key)?,
            "train_c" => self.train.c = parse_f64(value, key)?,
            "train_iterations" => self.train.max_iterations = parse_usize(value, key)?,
            "train_tolerance" => self.train.tolerance = parse_f64(value, key)?,
            "temperature" => self.temperature = parse_f64(value, key)?,
            "m_min" => self.m_min = parse_usize(value, key)?,
            "eta_grid" => {
                self.eta_grid = value
                    .split(',')
                    .map(|s| parse_f64(s.trim(), key))
                    .collect::<Result<_>>()?;
            }
            "coverage_target" => self.coverage_target = parse_f64(value, key)?,
            "coverage_averaging" => {
                self.averaging = match value {
                    "per-instance" => CoverageAveraging::PerInstance,
                    "pooled" => CoverageAveraging::Pooled,
                    other => {
                        return Err(Error::Config(format!("unknown coverage averaging: {other}")))
                    }
                }
            }
            "label_budget" => {
                self.label_budget = value
                    .parse()
                    .map_err(|_| Error::Config(format!("malformed label_budget: {value}")))?
            }
            "eval_gap" => self.eval_gap = parse_bool(value, key)?,
            "dump_features" => self.dump_features = parse_bool(value, key)?,
            "clusters" => self.generator.clusters = parse_usize(value, key)?,
            "cluster_sigma_frac" => self.generator.cluster_sigma_frac = parse_f64(value, key)?,
            "grid_jitter_frac" => self.generator.grid_jitter_frac = parse_f64(value, key)?,
            "outlier_frac" => self.generator.outlier_frac = parse_f64(value, key)?,
            "outlier_core_frac" => self.generator.outlier_core_frac = parse_f64(value, key)?,
            "corridor_aspect" => self.generator.corridor_aspect = parse_f64(value, key)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "jobs" => self.jobs = parse_usize(value, key)?,
            other => return Err(Error::Config(format!("unknown config key: {other}"))),
        }
        Ok(())
    }

    /// Parses a key=value config file (`#` starts a comment).
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Echoes the effective configuration as a reloadable key=value block.
    pub fn echo(&self) -> String {
        let families = if self.families == FamilySpec::all() {
            "all".to_string()
        } else {
            self.families
                .iter()
                .map(|f| format!("{}:{}", f.family.name(), f.distance_type.keyword()))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(&format!("{k} = {v}\n"));
        };
        kv("families", families);
        kv("train_n", self.train_n.to_string());
        kv("train_count", self.train_count.to_string());
        kv(
            "validation_sizes",
            self.validation_sizes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv(
            "validation_counts",
            self.validation_counts
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv(
            "test_sizes",
            self.test_sizes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv(
            "test_counts",
            self.test_counts
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("seed", self.seed.to_string());
        kv("stage1", self.stage1.name().to_string());
        kv("model", self.model.name().to_string());
        kv("alpha_k", self.alpha_k.to_string());
        kv("knn_k", self.knn_k.to_string());
        kv("popmusic_starts", self.popmusic_starts.to_string());
        kv("popmusic_subpath", self.popmusic_subpath.to_string());
        kv("popmusic_rounds", self.popmusic_rounds.to_string());
        if let Some(iters) = self.ascent.max_iterations {
            kv("ascent_iterations", iters.to_string());
        }
        kv("ascent_step_scale", self.ascent.initial_step_scale.to_string());
        kv("ascent_patience", self.ascent.patience.to_string());
        kv("ascent_growth", self.ascent.growth.to_string());
        kv("train_c", self.train.c.to_string());
        kv("train_iterations", self.train.max_iterations.to_string());
        kv("train_tolerance", self.train.tolerance.to_string());
        kv("temperature", self.temperature.to_string());
        kv("m_min", self.m_min.to_string());
        kv(
            "eta_grid",
            self.eta_grid
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("coverage_target", self.coverage_target.to_string());
        kv(
            "coverage_averaging",
            match self.averaging {
                CoverageAveraging::PerInstance => "per-instance".to_string(),
                CoverageAveraging::Pooled => "pooled".to_string(),
            },
        );
        kv("label_budget", self.label_budget.to_string());
        kv("eval_gap", self.eval_gap.to_string());
        kv("dump_features", self.dump_features.to_string());
        kv("clusters", self.generator.clusters.to_string());
        kv("cluster_sigma_frac", self.generator.cluster_sigma_frac.to_string());
        kv("grid_jitter_frac", self.generator.grid_jitter_frac.to_string());
        kv("outlier_frac", self.generator.outlier_frac.to_string());
        kv("outlier_core_frac", self.generator.outlier_core_frac.to_string());
        kv("corridor_aspect", self.generator.corridor_aspect.to_string());
        kv("out_dir", self.out_dir.display().to_string());
        kv("jobs", self.jobs.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_have_twenty_families() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.families.len(), 20);
    }

    #[test]
    fn file_overrides_and_echo_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(
            "families = uniform:EUC_2D, corridor:GEO\n# comment\ntrain_n = 12\ntrain_count = 5\nmodel = squared_hinge\neta_grid = 0.6,0.8,1.0\neval_gap = true\n",
        )
        .unwrap();
        assert_eq!(cfg.families.len(), 2);
        assert_eq!(cfg.train_n, 12);
        assert_eq!(cfg.model, LossKind::SquaredHinge);
        assert_eq!(cfg.eta_grid, vec![0.6, 0.8, 1.0]);
        assert!(cfg.eval_gap);
        // echo parses back to the same effective config
        let echo = cfg.echo();
        let mut cfg2 = ExperimentConfig::default();
        cfg2.apply_file(&echo).unwrap();
        assert_eq!(cfg2.echo(), echo);
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.set("stage1", "everything").is_err());
        assert!(cfg.set("eta_grid", "0.5,1.5").is_ok()); // caught by validate
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.set("unknown_key", "1").is_err());
        assert!(cfg.apply_file("no equals sign").is_err());
    }
}
