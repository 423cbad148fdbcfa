//! Weighted linear edge scorers: logistic regression and a squared-hinge
//! linear SVM, trained by deterministic full-batch gradient descent with
//! backtracking step halving. Both models score through the sigmoid so the
//! pruning rule sees a common (0, 1) scale.

use crate::error::{Error, Result};
use crate::features::{
    FeatureMode, FeatureVector, Standardizer, FEATURE_COUNT, FEATURE_FAMILIES, FEATURE_NAMES,
    FEATURE_SCHEMA_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Logistic,
    SquaredHinge,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::SquaredHinge => "squared_hinge",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(LossKind::Logistic),
            "squared_hinge" => Ok(LossKind::SquaredHinge),
            other => Err(Error::InvalidArgument(format!("unknown loss kind: {other}"))),
        }
    }
}

/// Pooled labeled candidate edges from one or more instances.
#[derive(Debug, Clone, Default)]
pub struct TrainSet {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<u8>,
    /// Row-aligned index into `instance_names`.
    pub instance_of: Vec<u32>,
    pub instance_names: Vec<String>,
    pub mode: Option<FeatureMode>,
}

impl TrainSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an instance and returns its id for `push`.
    pub fn add_instance(&mut self, name: &str) -> u32 {
        self.instance_names.push(name.to_string());
        (self.instance_names.len() - 1) as u32
    }

    pub fn push(&mut self, instance: u32, row: FeatureVector, label: u8) {
        self.rows.push(row);
        self.labels.push(label);
        self.instance_of.push(instance);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Data-term penalty C.
    pub c: f64,
    pub max_iterations: usize,
    /// Stop when the relative objective change drops below this.
    pub tolerance: f64,
    /// Recorded for reproducibility of the run manifest.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iterations: 2000,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainMeta {
    pub c: f64,
    pub class_weight_neg: f64,
    pub class_weight_pos: f64,
    pub seed: u64,
    pub iterations: usize,
    pub final_objective: f64,
    pub final_grad_norm: f64,
}

/// Trained linear scorer with its preprocessing and calibration state.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: [f64; FEATURE_COUNT],
    pub bias: f64,
    pub loss: LossKind,
    pub standardizer: Standardizer,
    pub feature_schema: String,
    /// Features that carried signal during training; inactive positions keep
    /// zero weight (single-source mode masks the provenance pair).
    pub active: [bool; FEATURE_COUNT],
    pub calibrated_eta: Option<f64>,
    pub train_meta: TrainMeta,
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainLogRow {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
}

#[inline]
fn dot(row: &FeatureVector, w: &[f64; FEATURE_COUNT]) -> f64 {
    let mut acc = 0.0;
    for p in 0..FEATURE_COUNT {
        acc = row[p].mul_add(w[p], acc);
    }
    acc
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable logistic loss: -y ln p - (1 - y) ln(1 - p).
#[inline]
fn logistic_loss(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

struct Objective<'a> {
    rows: &'a [FeatureVector],
    labels: &'a [u8],
    row_weight: Vec<f64>,
    c: f64,
    loss: LossKind,
    active: [bool; FEATURE_COUNT],
}

impl Objective<'_> {
    fn value(&self, w: &[f64; FEATURE_COUNT], b: f64) -> f64 {
        let mut reg = 0.0;
        for p in 0..FEATURE_COUNT {
            reg += w[p] * w[p];
        }
        0.5 * reg + self.c * self.data_term(w, b)
    }

    fn data_term(&self, w: &[f64; FEATURE_COUNT], b: f64) -> f64 {
        let mut data = 0.0;
        for (idx, row) in self.rows.iter().enumerate() {
            let z = dot(row, w) + b;
            let y = self.labels[idx] as f64;
            let l = match self.loss {
                LossKind::Logistic => logistic_loss(z, y),
                LossKind::SquaredHinge => {
                    let margin = (2.0 * y - 1.0) * z;
                    let h = (1.0 - margin).max(0.0);
                    h * h
                }
            };
            data += self.row_weight[idx] * l;
        }
        data
    }

    fn value_and_gradient(
        &self,
        w: &[f64; FEATURE_COUNT],
        b: f64,
    ) -> (f64, [f64; FEATURE_COUNT], f64) {
        let mut gw = [0.0f64; FEATURE_COUNT];
        let mut gb = 0.0f64;
        let mut data = 0.0f64;
        for (idx, row) in self.rows.iter().enumerate() {
            let z = dot(row, w) + b;
            let y = self.labels[idx] as f64;
            let (l, dz) = match self.loss {
                LossKind::Logistic => (logistic_loss(z, y), sigmoid(z) - y),
                LossKind::SquaredHinge => {
                    let sign = 2.0 * y - 1.0;
                    let h = (1.0 - sign * z).max(0.0);
                    (h * h, -2.0 * sign * h)
                }
            };
            let wy = self.row_weight[idx];
            data += wy * l;
            let coef = wy * dz;
            for p in 0..FEATURE_COUNT {
                gw[p] = row[p].mul_add(coef, gw[p]);
            }
            gb += coef;
        }
        let mut value = self.c * data;
        for p in 0..FEATURE_COUNT {
            if self.active[p] {
                value += 0.5 * w[p] * w[p];
                gw[p] = w[p] + self.c * gw[p];
            } else {
                gw[p] = 0.0;
            }
        }
        (value, gw, self.c * gb)
    }
}

fn balanced_class_weights(labels: &[u8]) -> (f64, f64) {
    let total = labels.len() as f64;
    let pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    let neg = total - pos;
    (total / (2.0 * neg), total / (2.0 * pos))
}

fn validate_train_set(ts: &TrainSet) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::InvalidArgument("empty training set".to_string()));
    }
    let pos = ts.positives();
    if pos == 0 || pos == ts.len() {
        return Err(Error::InvalidArgument(
            "training needs both classes present".to_string(),
        ));
    }
    for (idx, row) in ts.rows.iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite feature in row {idx}"
            )));
        }
    }
    Ok(())
}

/// Trains a linear model with the given loss. Deterministic: full-batch
/// gradient descent with backtracking halving, step growth on acceptance,
/// and a relative-change stopping rule. The recorded objective sequence is
/// nonincreasing.
pub fn train(ts: &TrainSet, loss: LossKind, cfg: &TrainConfig) -> Result<(LinearModel, Vec<TrainLogRow>)> {
    validate_train_set(ts)?;
    let standardizer = Standardizer::fit(&ts.rows)?;
    let rows: Vec<FeatureVector> = ts.rows.iter().map(|r| standardizer.apply(r)).collect();
    let (w_neg, w_pos) = balanced_class_weights(&ts.labels);
    let row_weight: Vec<f64> = ts
        .labels
        .iter()
        .map(|&y| if y == 1 { w_pos } else { w_neg })
        .collect();
    let active = ts.mode.unwrap_or(FeatureMode::Union).active_mask();
    let objective = Objective {
        rows: &rows,
        labels: &ts.labels,
        row_weight,
        c: cfg.c,
        loss,
        active,
    };

    let mut w = [0.0f64; FEATURE_COUNT];
    let mut b = 0.0f64;
    let mut log = Vec::new();
    let (mut value, mut gw, mut gb) = objective.value_and_gradient(&w, b);
    let mut step = 1.0 / (1.0 + cfg.c * ts.len() as f64);
    let mut iterations = 0;
    for iter in 0..cfg.max_iterations {
        let grad_norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        log.push(TrainLogRow {
            iteration: iter,
            objective: value,
            grad_norm,
        });
        if grad_norm == 0.0 {
            break;
        }
        // backtracking: halve until the step does not increase the objective
        let mut accepted = false;
        for _ in 0..60 {
            let mut w_new = w;
            for p in 0..FEATURE_COUNT {
                w_new[p] -= step * gw[p];
            }
            let b_new = b - step * gb;
            let v_new = objective.value(&w_new, b_new);
            if v_new <= value {
                let rel_change = (value - v_new) / value.abs().max(1.0);
                w = w_new;
                b = b_new;
                let (v2, gw2, gb2) = objective.value_and_gradient(&w, b);
                value = v2;
                gw = gw2;
                gb = gb2;
                step *= 1.25;
                accepted = true;
                iterations = iter + 1;
                if rel_change < cfg.tolerance {
                    accepted = false; // converged
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let grad_norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
    log.push(TrainLogRow {
        iteration: iterations,
        objective: value,
        grad_norm,
    });

    let model = LinearModel {
        weights: w,
        bias: b,
        loss,
        standardizer,
        feature_schema: FEATURE_SCHEMA_VERSION.to_string(),
        active,
        calibrated_eta: None,
        train_meta: TrainMeta {
            c: cfg.c,
            class_weight_neg: w_neg,
            class_weight_pos: w_pos,
            seed: cfg.seed,
            iterations,
            final_objective: value,
            final_grad_norm: grad_norm,
        },
    };
    Ok((model, log))
}

pub fn train_logistic(ts: &TrainSet, cfg: &TrainConfig) -> Result<(LinearModel, Vec<TrainLogRow>)> {
    train(ts, LossKind::Logistic, cfg)
}

pub fn train_svm(ts: &TrainSet, cfg: &TrainConfig) -> Result<(LinearModel, Vec<TrainLogRow>)> {
    train(ts, LossKind::SquaredHinge, cfg)
}

/// Diagnostic hook: the training objective and its analytic gradient at an
/// arbitrary point, on the raw (unstandardized) rows. Used by the gradient
/// checks.
pub fn objective_and_gradient(
    ts: &TrainSet,
    loss: LossKind,
    c: f64,
    weights: &[f64; FEATURE_COUNT],
    bias: f64,
) -> Result<(f64, [f64; FEATURE_COUNT], f64)> {
    validate_train_set(ts)?;
    let (w_neg, w_pos) = balanced_class_weights(&ts.labels);
    let row_weight: Vec<f64> = ts
        .labels
        .iter()
        .map(|&y| if y == 1 { w_pos } else { w_neg })
        .collect();
    let objective = Objective {
        rows: &ts.rows,
        labels: &ts.labels,
        row_weight,
        c,
        loss,
        active: ts.mode.unwrap_or(FeatureMode::Union).active_mask(),
    };
    let (v, gw, gb) = objective.value_and_gradient(weights, bias);
    Ok((v, gw, gb))
}

impl LinearModel {
    /// Linear score w . standardize(x) + b.
    pub fn linear_score(&self, row: &FeatureVector) -> f64 {
        dot(&self.standardizer.apply(row), &self.weights) + self.bias
    }

    /// Sigmoid-squashed score in (0, 1); strictly monotone in the linear
    /// score for both loss kinds.
    pub fn score(&self, row: &FeatureVector) -> f64 {
        sigmoid(self.linear_score(row))
    }
}

/// Scores a batch of rows, refusing rows from a different feature layout.
pub fn score_edges(m: &LinearModel, rows: &[FeatureVector]) -> Result<Vec<f64>> {
    if m.feature_schema != FEATURE_SCHEMA_VERSION {
        return Err(Error::VersionMismatch(format!(
            "model uses feature schema `{}`, extractor is `{FEATURE_SCHEMA_VERSION}`",
            m.feature_schema
        )));
    }
    Ok(rows.iter().map(|r| m.score(r)).collect())
}

/// Absolute-weight importances normalized to sum one, with family shares.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImportance {
    pub per_feature: [f64; FEATURE_COUNT],
    pub families: Vec<(String, f64)>,
}

pub fn feature_importance(m: &LinearModel) -> FeatureImportance {
    let total: f64 = m.weights.iter().map(|w| w.abs()).sum();
    let mut per_feature = [0.0f64; FEATURE_COUNT];
    if total > 0.0 {
        for p in 0..FEATURE_COUNT {
            per_feature[p] = m.weights[p].abs() / total;
        }
    }
    let families = FEATURE_FAMILIES
        .iter()
        .map(|(name, members)| {
            (
                name.to_string(),
                members.iter().map(|&p| per_feature[p]).sum(),
            )
        })
        .collect();
    FeatureImportance {
        per_feature,
        families,
    }
}

/// Renders the importance table (feature rows, then family rows).
pub fn importance_table(imp: &FeatureImportance) -> String {
    let mut out = String::from("kind,name,share\n");
    for (p, name) in FEATURE_NAMES.iter().enumerate() {
        out.push_str(&format!("feature,{name},{}\n", imp.per_feature[p]));
    }
    for (name, share) in &imp.families {
        out.push_str(&format!("family,{name},{share}\n"));
    }
    out
}

const MODEL_HEADER: &str = "linear-edge-model v1";

/// Serializes the model as self-describing structured text; `load_model`
/// inverts it losslessly (floats round-trip through the shortest decimal
/// representation).
pub fn save_model(m: &LinearModel) -> String {
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    out.push_str(&format!("feature_schema {}\n", m.feature_schema));
    out.push_str(&format!("loss {}\n", m.loss.name()));
    out.push_str(&format!("bias {}\n", m.bias));
    for (p, name) in FEATURE_NAMES.iter().enumerate() {
        out.push_str(&format!(
            "feature {name} weight {} active {} std_mean {} std_scale {} standardized {}\n",
            m.weights[p],
            m.active[p],
            m.standardizer.mean[p],
            m.standardizer.scale[p],
            m.standardizer.standardized[p]
        ));
    }
    if let Some(eta) = m.calibrated_eta {
        out.push_str(&format!("calibrated_eta {eta}\n"));
    }
    out.push_str(&format!("train_c {}\n", m.train_meta.c));
    out.push_str(&format!(
        "train_class_weights {} {}\n",
        m.train_meta.class_weight_neg, m.train_meta.class_weight_pos
    ));
    out.push_str(&format!("train_seed {}\n", m.train_meta.seed));
    out.push_str(&format!("train_iterations {}\n", m.train_meta.iterations));
    out.push_str(&format!("train_objective {}\n", m.train_meta.final_objective));
    out.push_str(&format!("train_grad_norm {}\n", m.train_meta.final_grad_norm));
    out.push_str("end\n");
    out
}

pub fn load_model(text: &str) -> Result<LinearModel> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MissingField("header".to_string()))?;
    if header.trim() != MODEL_HEADER {
        return Err(Error::VersionMismatch(format!(
            "expected `{MODEL_HEADER}`, got `{}`",
            header.trim()
        )));
    }
    let mut feature_schema: Option<String> = None;
    let mut loss: Option<LossKind> = None;
    let mut bias: Option<f64> = None;
    let mut weights = [0.0f64; FEATURE_COUNT];
    let mut active = [false; FEATURE_COUNT];
    let mut mean = vec![0.0f64; FEATURE_COUNT];
    let mut scale = vec![1.0f64; FEATURE_COUNT];
    let mut standardized = vec![false; FEATURE_COUNT];
    let mut seen_feature = [false; FEATURE_COUNT];
    let mut calibrated_eta: Option<f64> = None;
    let mut train_c: Option<f64> = None;
    let mut class_weights: Option<(f64, f64)> = None;
    let mut train_seed: Option<u64> = None;
    let mut train_iterations: Option<usize> = None;
    let mut train_objective: Option<f64> = None;
    let mut train_grad_norm: Option<f64> = None;
    let mut saw_end = false;

    fn parse_f64(tok: Option<&str>, what: &str) -> Result<f64> {
        tok.ok_or_else(|| Error::MissingField(what.to_string()))?
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("malformed {what}")))
    }
    fn parse_bool(tok: Option<&str>, what: &str) -> Result<bool> {
        match tok {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            _ => Err(Error::InvalidArgument(format!("malformed {what}"))),
        }
    }

    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next().unwrap() {
            "feature_schema" => {
                feature_schema = Some(
                    parts
                        .next()
                        .ok_or_else(|| Error::MissingField("feature_schema".to_string()))?
                        .to_string(),
                )
            }
            "loss" => {
                loss = Some(LossKind::parse(
                    parts
                        .next()
                        .ok_or_else(|| Error::MissingField("loss".to_string()))?,
                )?)
            }
            "bias" => bias = Some(parse_f64(parts.next(), "bias")?),
            "feature" => {
                let toks: Vec<&str> = parts.collect();
                let name = *toks
                    .first()
                    .ok_or_else(|| Error::MissingField("feature name".to_string()))?;
                let pos = FEATURE_NAMES
                    .iter()
                    .position(|&f| f == name)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown feature `{name}`")))?;
                if toks.len() != 11
                    || toks[1] != "weight"
                    || toks[3] != "active"
                    || toks[5] != "std_mean"
                    || toks[7] != "std_scale"
                    || toks[9] != "standardized"
                {
                    return Err(Error::MissingField(format!("feature {name} fields")));
                }
                weights[pos] = parse_f64(Some(toks[2]), "weight")?;
                active[pos] = parse_bool(Some(toks[4]), "active")?;
                mean[pos] = parse_f64(Some(toks[6]), "std_mean")?;
                scale[pos] = parse_f64(Some(toks[8]), "std_scale")?;
                standardized[pos] = parse_bool(Some(toks[10]), "standardized")?;
                seen_feature[pos] = true;
            }
            "calibrated_eta" => calibrated_eta = Some(parse_f64(parts.next(), "calibrated_eta")?),
            "train_c" => train_c = Some(parse_f64(parts.next(), "train_c")?),
            "train_class_weights" => {
                let neg = parse_f64(parts.next(), "train_class_weights")?;
                let pos = parse_f64(parts.next(), "train_class_weights")?;
                class_weights = Some((neg, pos));
            }
            "train_seed" => {
                train_seed = Some(
                    parts
                        .next()
                        .ok_or_else(|| Error::MissingField("train_seed".to_string()))?
                        .parse()
                        .map_err(|_| Error::InvalidArgument("malformed train_seed".to_string()))?,
                )
            }
            "train_iterations" => {
                train_iterations = Some(
                    parts
                        .next()
                        .ok_or_else(|| Error::MissingField("train_iterations".to_string()))?
                        .parse()
                        .map_err(|_| {
                            Error::InvalidArgument("malformed train_iterations".to_string())
                        })?,
                )
            }
            "train_objective" => train_objective = Some(parse_f64(parts.next(), "train_objective")?),
            "train_grad_norm" => train_grad_norm = Some(parse_f64(parts.next(), "train_grad_norm")?),
            "end" => {
                saw_end = true;
                break;
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown model field `{other}`"
                )))
            }
        }
    }
    if !saw_end {
        return Err(Error::MissingField("end marker (truncated model?)".to_string()));
    }
    for (p, seen) in seen_feature.iter().enumerate() {
        if !seen {
            return Err(Error::MissingField(format!("feature {}", FEATURE_NAMES[p])));
        }
    }
    let feature_schema = feature_schema.ok_or_else(|| Error::MissingField("feature_schema".to_string()))?;
    if feature_schema != FEATURE_SCHEMA_VERSION {
        return Err(Error::VersionMismatch(feature_schema));
    }
    let (class_weight_neg, class_weight_pos) =
        class_weights.ok_or_else(|| Error::MissingField("train_class_weights".to_string()))?;
    Ok(LinearModel {
        weights,
        bias: bias.ok_or_else(|| Error::MissingField("bias".to_string()))?,
        loss: loss.ok_or_else(|| Error::MissingField("loss".to_string()))?,
        standardizer: Standardizer {
            mean,
            scale,
            standardized,
        },
        feature_schema,
        active,
        calibrated_eta,
        train_meta: TrainMeta {
            c: train_c.ok_or_else(|| Error::MissingField("train_c".to_string()))?,
            class_weight_neg,
            class_weight_pos,
            seed: train_seed.ok_or_else(|| Error::MissingField("train_seed".to_string()))?,
            iterations: train_iterations
                .ok_or_else(|| Error::MissingField("train_iterations".to_string()))?,
            final_objective: train_objective
                .ok_or_else(|| Error::MissingField("train_objective".to_string()))?,
            final_grad_norm: train_grad_norm
                .ok_or_else(|| Error::MissingField("train_grad_norm".to_string()))?,
        },
    })
}

/// Renders the training log as delimited text.
pub fn training_log_table(log: &[TrainLogRow]) -> String {
    let mut out = String::from("iteration,objective,grad_norm\n");
    for row in log {
        out.push_str(&format!("{},{},{}\n", row.iteration, row.objective, row.grad_norm));
    }
    out
}
