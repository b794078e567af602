//! `ipdg train`, `ipdg evaluate` and `ipdg predict`: fit models to sweep
//! datasets, score them on the held-out test split, and turn a trained
//! pair into a penalty recommendation.

use crate::config::{
    fmt_list, parse_f64, parse_string_list, parse_u64, parse_usize, parse_usize_list, RunConfig,
};
use crate::manifest::{Manifest, RunPaths};
use anyhow::{anyhow, bail, Context, Result};
use ipdg_core::sweep::log_grid;
use ipdg_ml::data::{split, Dataset, Standardizer};
use ipdg_ml::io::{SavedModel, TrainedArtifact};
use ipdg_ml::linear::{fit_linear_regression, fit_logistic_regression, LinearKind};
use ipdg_ml::metrics::{accuracy, bce, confusion, explained_variance, mse, r2};
use ipdg_ml::mlp::{hyperparameter_grid, train_mlp, Activation, TrainConfig};
use ndarray::{Array1, Array2};
use std::fs::{self, File};
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Linear,
    Logistic,
    MlpRegression,
    MlpClassification,
}

impl ModelChoice {
    fn parse(value: &str) -> Result<Self> {
        match value {
            "linear" => Ok(ModelChoice::Linear),
            "logistic" => Ok(ModelChoice::Logistic),
            "mlp-regression" => Ok(ModelChoice::MlpRegression),
            "mlp-classification" => Ok(ModelChoice::MlpClassification),
            other => Err(anyhow!(
                "model must be linear, logistic, mlp-regression or mlp-classification, got '{other}'"
            )),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModelChoice::Linear => "linear",
            ModelChoice::Logistic => "logistic",
            ModelChoice::MlpRegression => "mlp-regression",
            ModelChoice::MlpClassification => "mlp-classification",
        }
    }

    fn is_regression(self) -> bool {
        matches!(self, ModelChoice::Linear | ModelChoice::MlpRegression)
    }
}

fn kind_label(model: &SavedModel) -> &'static str {
    match model {
        SavedModel::Linear(m) => match m.kind {
            LinearKind::Regression => "linear-regression",
            LinearKind::Logistic => "logistic",
        },
        SavedModel::Mlp(m) => match m.output {
            Activation::Sigmoid => "mlp-classification",
            _ => "mlp-regression",
        },
    }
}

fn is_classifier(model: &SavedModel) -> bool {
    matches!(kind_label(model), "logistic" | "mlp-classification")
}

fn load_dataset(path: &str, features: &[String], target: &str) -> Result<Dataset> {
    let refs: Vec<&str> = features.iter().map(String::as_str).collect();
    let file = File::open(path).with_context(|| format!("cannot open dataset '{path}'"))?;
    Dataset::from_csv(file, &refs, target).with_context(|| format!("dataset '{path}'"))
}

/// Column diff up front so a schema mismatch names exactly what is
/// missing instead of failing somewhere inside the parse.
fn check_columns(path: &str, needed: &[String]) -> Result<()> {
    let file = File::open(path).with_context(|| format!("cannot open dataset '{path}'"))?;
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> =
        reader.headers().context("dataset header")?.iter().map(str::to_string).collect();
    let missing: Vec<&String> = needed.iter().filter(|c| !header.contains(c)).collect();
    if !missing.is_empty() {
        bail!(
            "dataset '{path}' is missing columns {missing:?}; it has {header:?}"
        );
    }
    Ok(())
}

/// Population moments of the training-target slice, with the same
/// degenerate-spread floor the feature standardizer uses.
fn target_moments(y: &Array1<f64>, rows: &[usize]) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / n;
    let var = rows.iter().map(|&i| (y[i] - mean).powi(2)).sum::<f64>() / n;
    let std = if var <= 1e-24 { 1.0 } else { var.sqrt() };
    (mean, std)
}

fn predict_raw(
    model: &SavedModel,
    x_std: &Array2<f64>,
    target_scale: Option<(f64, f64)>,
) -> Result<Vec<f64>> {
    let mut out = match model {
        SavedModel::Linear(m) => m.predict(x_std),
        SavedModel::Mlp(m) => m.predict(x_std)?,
    };
    if let Some((mean, std)) = target_scale {
        for v in &mut out {
            *v = *v * std + mean;
        }
    }
    Ok(out)
}

fn predict_class(model: &SavedModel, x_std: &Array2<f64>) -> Result<Vec<f64>> {
    Ok(match model {
        SavedModel::Linear(m) => m.predict_class(x_std),
        SavedModel::Mlp(m) => m.predict_class(x_std)?,
    })
}

fn option_metric(value: Option<f64>) -> String {
    value.map_or_else(|| "undefined".to_string(), fmt_metric)
}

/// Metric magnitudes span tens of decades; plain `Display` pads the tiny
/// ones with long runs of zeros.
fn fmt_metric(value: f64) -> String {
    if value != 0.0 && (value.abs() < 1e-4 || value.abs() >= 1e6) {
        format!("{value:e}")
    } else {
        value.to_string()
    }
}

fn write_report(path: &Path, lines: &[(String, String)]) -> Result<()> {
    let mut text = String::new();
    for (name, value) in lines {
        text.push_str(name);
        text.push(' ');
        text.push_str(value);
        text.push('\n');
    }
    fs::write(path, &text).with_context(|| format!("cannot write '{}'", path.display()))?;
    print!("{text}");
    Ok(())
}

pub struct TrainCommandConfig {
    pub dataset: String,
    pub model: ModelChoice,
    pub features: Vec<String>,
    pub target: String,
    pub seed: u64,
    pub train_frac: f64,
    pub val_frac: f64,
    pub sgd_epochs: usize,
    pub sgd_lr: f64,
    pub logit_max_iters: usize,
    pub depths: Vec<usize>,
    pub widths: Vec<usize>,
    pub mlp_epochs: usize,
    pub mlp_lr: f64,
    pub batch: usize,
    pub patience: usize,
    pub out: String,
    pub out_dir: String,
}

impl Default for TrainCommandConfig {
    fn default() -> Self {
        TrainCommandConfig {
            dataset: String::new(),
            model: ModelChoice::Linear,
            features: Vec::new(),
            target: String::new(),
            seed: 0,
            train_frac: 0.8,
            val_frac: 0.1,
            sgd_epochs: 200,
            sgd_lr: 0.01,
            logit_max_iters: 10_000,
            depths: vec![1, 2],
            widths: vec![8, 16],
            mlp_epochs: 200,
            mlp_lr: 1e-3,
            batch: 10,
            patience: 20,
            out: "model".to_string(),
            out_dir: crate::config::default_out_dir(),
        }
    }
}

impl RunConfig for TrainCommandConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" => self.dataset = value.to_string(),
            "model" => self.model = ModelChoice::parse(value)?,
            "features" => self.features = parse_string_list(value),
            "target" => self.target = value.to_string(),
            "seed" => self.seed = parse_u64(key, value)?,
            "train_frac" => self.train_frac = parse_f64(key, value)?,
            "val_frac" => self.val_frac = parse_f64(key, value)?,
            "sgd_epochs" => self.sgd_epochs = parse_usize(key, value)?,
            "sgd_lr" => self.sgd_lr = parse_f64(key, value)?,
            "logit_max_iters" => self.logit_max_iters = parse_usize(key, value)?,
            "depths" => self.depths = parse_usize_list(key, value)?,
            "widths" => self.widths = parse_usize_list(key, value)?,
            "mlp_epochs" => self.mlp_epochs = parse_usize(key, value)?,
            "mlp_lr" => self.mlp_lr = parse_f64(key, value)?,
            "batch" => self.batch = parse_usize(key, value)?,
            "patience" => self.patience = parse_usize(key, value)?,
            "out" => self.out = value.to_string(),
            "out_dir" => self.out_dir = value.to_string(),
            _ => return Err(crate::config::unknown_key(key)),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(String, String)> {
        vec![
            ("dataset".into(), self.dataset.clone()),
            ("model".into(), self.model.name().into()),
            ("features".into(), self.features.join(",")),
            ("target".into(), self.target.clone()),
            ("seed".into(), self.seed.to_string()),
            ("train_frac".into(), self.train_frac.to_string()),
            ("val_frac".into(), self.val_frac.to_string()),
            ("sgd_epochs".into(), self.sgd_epochs.to_string()),
            ("sgd_lr".into(), self.sgd_lr.to_string()),
            ("logit_max_iters".into(), self.logit_max_iters.to_string()),
            ("depths".into(), fmt_list(&self.depths)),
            ("widths".into(), fmt_list(&self.widths)),
            ("mlp_epochs".into(), self.mlp_epochs.to_string()),
            ("mlp_lr".into(), self.mlp_lr.to_string()),
            ("batch".into(), self.batch.to_string()),
            ("patience".into(), self.patience.to_string()),
            ("out".into(), self.out.clone()),
            ("out_dir".into(), self.out_dir.clone()),
        ]
    }
}

pub fn run_train(cfg: &TrainCommandConfig) -> Result<i32> {
    let start = Instant::now();
    if cfg.dataset.is_empty() {
        bail!("config key 'dataset' is required (path to a sweep CSV)");
    }
    if cfg.features.is_empty() {
        bail!("config key 'features' is required (comma-separated column names)");
    }
    if cfg.target.is_empty() {
        bail!("config key 'target' is required (column to predict)");
    }
    let test_frac = 1.0 - cfg.train_frac - cfg.val_frac;
    let data = load_dataset(&cfg.dataset, &cfg.features, &cfg.target)?;
    let idx = split(&data, (cfg.train_frac, cfg.val_frac, test_frac), cfg.seed)?;
    let standardizer = Standardizer::fit(&data, &idx.train)?;
    let x_std = standardizer.transform(&data.x)?;

    // Regression targets (iteration counts) span orders of magnitude, so
    // models fit a standardized target; the scale rides along in the
    // artifact and predictions are mapped back on use.
    let target_scale = cfg.model.is_regression().then(|| target_moments(&data.y, &idx.train));
    let y_fit = match target_scale {
        Some((mean, std)) => data.y.mapv(|v| (v - mean) / std),
        None => data.y.clone(),
    };
    if !cfg.model.is_regression() && !data.is_binary_target() {
        bail!("target '{}' is not binary; classification needs 0/1 labels", cfg.target);
    }
    let scaled =
        Dataset::new(x_std, y_fit, data.columns.clone(), data.target_name.clone())?;
    let train_ds = scaled.subset(&idx.train)?;
    let val_ds = scaled.subset(&idx.val)?;
    let val_y: Vec<f64> = val_ds.y.to_vec();

    let mut metrics: Vec<(String, f64)> = vec![
        ("train_frac".to_string(), cfg.train_frac),
        ("val_frac".to_string(), cfg.val_frac),
    ];
    let model = match cfg.model {
        ModelChoice::Linear => {
            let (model, history) =
                fit_linear_regression(&train_ds, cfg.sgd_epochs, cfg.sgd_lr, cfg.seed)?;
            let val_pred = model.predict(&val_ds.x);
            metrics.push(("val_mse".into(), mse(&val_y, &val_pred)?));
            if let Some(r) = r2(&val_y, &val_pred)? {
                metrics.push(("val_r2".into(), r));
            }
            metrics.push(("train_mse_last_epoch".into(), *history.last().expect("epochs > 0")));
            SavedModel::Linear(model)
        }
        ModelChoice::Logistic => {
            let (model, fit) = fit_logistic_regression(&train_ds, cfg.logit_max_iters)?;
            let classes = model.predict_class(&val_ds.x);
            metrics.push(("val_acc".into(), accuracy(&val_y, &classes)?));
            metrics.push(("iterations".into(), fit.iterations as f64));
            metrics.push(("converged".into(), f64::from(fit.converged)));
            metrics.push(("capped".into(), f64::from(fit.capped)));
            SavedModel::Linear(model)
        }
        ModelChoice::MlpRegression | ModelChoice::MlpClassification => {
            let output = if cfg.model == ModelChoice::MlpRegression {
                Activation::Identity
            } else {
                Activation::Sigmoid
            };
            let train_cfg = TrainConfig {
                batch: cfg.batch,
                lr: cfg.mlp_lr,
                epochs: cfg.mlp_epochs,
                patience: (cfg.patience > 0).then_some(cfg.patience),
                ..TrainConfig::default()
            };
            let grid = hyperparameter_grid(
                &train_ds,
                &val_ds,
                &cfg.depths,
                &cfg.widths,
                output,
                &train_cfg,
                cfg.seed,
            )?;
            let (n_hl, n_n) = grid.best;
            let (model, _) =
                train_mlp(&train_ds, &val_ds, (n_hl, n_n), output, &train_cfg, cfg.seed)?;
            metrics.push(("n_hl".into(), n_hl as f64));
            metrics.push(("n_n".into(), n_n as f64));
            let best_cell = grid
                .cells
                .iter()
                .find(|c| (c.n_hl, c.n_n) == grid.best)
                .expect("best cell is in the grid");
            metrics.push(("val_score".into(), best_cell.score));
            SavedModel::Mlp(model)
        }
    };

    let artifact = TrainedArtifact {
        model,
        columns: cfg.features.clone(),
        target: cfg.target.clone(),
        standardizer,
        target_scale,
        seed: cfg.seed,
        metrics,
    };
    let paths = RunPaths::new(&cfg.out_dir, &cfg.out)?;
    let model_path = paths.file("model");
    artifact.save_file(&model_path)?;
    paths.write_resolved(&cfg.entries())?;
    let mut manifest = Manifest::new("train", data.n_rows())
        .grid("depths", &cfg.depths)
        .grid("widths", &cfg.widths)
        .output(&model_path);
    manifest.seed = Some(cfg.seed);
    manifest.wall_ms = start.elapsed().as_millis() as u64;
    manifest.write(&paths)?;

    println!("trained {} on {} rows -> {}", cfg.model.name(), data.n_rows(), model_path.display());
    for (name, value) in &artifact.metrics {
        println!("  {name} {}", fmt_metric(*value));
    }
    Ok(0)
}

pub struct EvaluateConfig {
    pub model: String,
    pub dataset: String,
    pub out: String,
    pub out_dir: String,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            model: String::new(),
            dataset: String::new(),
            out: "evaluate".to_string(),
            out_dir: crate::config::default_out_dir(),
        }
    }
}

impl RunConfig for EvaluateConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = value.to_string(),
            "dataset" => self.dataset = value.to_string(),
            "out" => self.out = value.to_string(),
            "out_dir" => self.out_dir = value.to_string(),
            _ => return Err(crate::config::unknown_key(key)),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(String, String)> {
        vec![
            ("model".into(), self.model.clone()),
            ("dataset".into(), self.dataset.clone()),
            ("out".into(), self.out.clone()),
            ("out_dir".into(), self.out_dir.clone()),
        ]
    }
}

fn metric_or(artifact: &TrainedArtifact, name: &str, default: f64) -> f64 {
    artifact.metrics.iter().find(|(n, _)| n == name).map_or(default, |(_, v)| *v)
}

/// Scores on the same held-out test split the training run set aside:
/// the split is replayed from the seed and fractions in the artifact.
pub fn run_evaluate(cfg: &EvaluateConfig) -> Result<i32> {
    let start = Instant::now();
    if cfg.model.is_empty() {
        bail!("config key 'model' is required (path to a trained model file)");
    }
    if cfg.dataset.is_empty() {
        bail!("config key 'dataset' is required (path to a sweep CSV)");
    }
    let artifact = TrainedArtifact::load_file(&cfg.model)
        .with_context(|| format!("model file '{}'", cfg.model))?;
    let mut needed = artifact.columns.clone();
    needed.push(artifact.target.clone());
    check_columns(&cfg.dataset, &needed)?;
    let data = load_dataset(&cfg.dataset, &artifact.columns, &artifact.target)?;

    let train_frac = metric_or(&artifact, "train_frac", 0.8);
    let val_frac = metric_or(&artifact, "val_frac", 0.1);
    let idx = split(&data, (train_frac, val_frac, 1.0 - train_frac - val_frac), artifact.seed)?;
    let test = data.subset(&idx.test)?;
    let x_std = artifact.standardizer.transform(&test.x)?;
    let y_true: Vec<f64> = test.y.to_vec();

    let mut lines: Vec<(String, String)> = vec![
        ("kind".into(), kind_label(&artifact.model).to_string()),
        ("rows".into(), data.n_rows().to_string()),
        ("test_rows".into(), test.n_rows().to_string()),
    ];
    if is_classifier(&artifact.model) {
        let proba = predict_raw(&artifact.model, &x_std, None)?;
        let classes = predict_class(&artifact.model, &x_std)?;
        let cm = confusion(&y_true, &classes)?;
        lines.push(("bce".into(), fmt_metric(bce(&y_true, &proba)?)));
        lines.push(("acc".into(), fmt_metric(cm.accuracy())));
        lines.push(("tp".into(), cm.tp.to_string()));
        lines.push(("fp".into(), cm.fp.to_string()));
        lines.push(("fn".into(), cm.fn_.to_string()));
        lines.push(("tn".into(), cm.tn.to_string()));
    } else {
        let pred = predict_raw(&artifact.model, &x_std, artifact.target_scale)?;
        lines.push(("mse".into(), fmt_metric(mse(&y_true, &pred)?)));
        lines.push(("r2".into(), option_metric(r2(&y_true, &pred)?)));
        lines.push(("evs".into(), option_metric(explained_variance(&y_true, &pred)?)));
    }

    let paths = RunPaths::new(&cfg.out_dir, &cfg.out)?;
    let report_path = paths.file("metrics.txt");
    write_report(&report_path, &lines)?;
    paths.write_resolved(&cfg.entries())?;
    let mut manifest = Manifest::new("evaluate", test.n_rows()).output(&report_path);
    manifest.seed = Some(artifact.seed);
    manifest.wall_ms = start.elapsed().as_millis() as u64;
    manifest.write(&paths)?;
    Ok(0)
}

pub struct PredictConfig {
    pub classifier: String,
    pub regressor: String,
    pub at: String,
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub beta_points: usize,
    pub out: String,
    pub out_dir: String,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            classifier: String::new(),
            regressor: String::new(),
            at: String::new(),
            beta_lo: 1e-2,
            beta_hi: 1e2,
            beta_points: 200,
            out: "predict".to_string(),
            out_dir: crate::config::default_out_dir(),
        }
    }
}

impl RunConfig for PredictConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "classifier" => self.classifier = value.to_string(),
            "regressor" => self.regressor = value.to_string(),
            "at" => self.at = value.to_string(),
            "beta_lo" => self.beta_lo = parse_f64(key, value)?,
            "beta_hi" => self.beta_hi = parse_f64(key, value)?,
            "beta_points" => self.beta_points = parse_usize(key, value)?,
            "out" => self.out = value.to_string(),
            "out_dir" => self.out_dir = value.to_string(),
            _ => return Err(crate::config::unknown_key(key)),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(String, String)> {
        vec![
            ("classifier".into(), self.classifier.clone()),
            ("regressor".into(), self.regressor.clone()),
            ("at".into(), self.at.clone()),
            ("beta_lo".into(), self.beta_lo.to_string()),
            ("beta_hi".into(), self.beta_hi.to_string()),
            ("beta_points".into(), self.beta_points.to_string()),
            ("out".into(), self.out.clone()),
            ("out_dir".into(), self.out_dir.clone()),
        ]
    }
}

fn parse_at(at: &str) -> Result<Vec<(String, f64)>> {
    let mut fixed = Vec::new();
    for part in at.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("key 'at': expected name=value, got '{part}'"))?;
        fixed.push((name.trim().to_string(), parse_f64("at", value.trim())?));
    }
    Ok(fixed)
}

/// Feature rows for one model: every column comes from `at` except
/// `beta`, which takes the grid value.
fn feature_rows(
    columns: &[String],
    fixed: &[(String, f64)],
    betas: &[f64],
    what: &str,
) -> Result<Array2<f64>> {
    let missing: Vec<&String> = columns
        .iter()
        .filter(|c| c.as_str() != "beta" && !fixed.iter().any(|(n, _)| n == *c))
        .collect();
    if !missing.is_empty() {
        bail!("{what} needs columns {missing:?}; provide them via at = name=value,...");
    }
    if !columns.iter().any(|c| c == "beta") {
        bail!("{what} has no 'beta' column, so there is nothing to scan");
    }
    let mut x = Array2::zeros((betas.len(), columns.len()));
    for (i, &beta) in betas.iter().enumerate() {
        for (j, col) in columns.iter().enumerate() {
            x[[i, j]] = if col == "beta" {
                beta
            } else {
                fixed.iter().find(|(n, _)| n == col).expect("checked above").1
            };
        }
    }
    Ok(x)
}

/// Classifier gate plus optional cost regressor: reports the smallest
/// beta predicted stable and, with a regressor, the cheapest stable beta.
/// Exit code 1 when no grid point is predicted stable.
pub fn run_predict(cfg: &PredictConfig) -> Result<i32> {
    let start = Instant::now();
    if cfg.classifier.is_empty() {
        bail!("config key 'classifier' is required (path to a trained classification model)");
    }
    let clf = TrainedArtifact::load_file(&cfg.classifier)
        .with_context(|| format!("model file '{}'", cfg.classifier))?;
    if !is_classifier(&clf.model) {
        bail!("'{}' is a {} model; the gate needs a classifier", cfg.classifier, kind_label(&clf.model));
    }
    let reg = if cfg.regressor.is_empty() {
        None
    } else {
        let artifact = TrainedArtifact::load_file(&cfg.regressor)
            .with_context(|| format!("model file '{}'", cfg.regressor))?;
        if is_classifier(&artifact.model) {
            bail!("'{}' is a classifier; the cost model needs a regressor", cfg.regressor);
        }
        Some(artifact)
    };

    let fixed = parse_at(&cfg.at)?;
    let unused: Vec<&String> = fixed
        .iter()
        .map(|(n, _)| n)
        .filter(|n| {
            !clf.columns.contains(n)
                && reg.as_ref().map_or(true, |r| !r.columns.contains(n))
        })
        .collect();
    if !unused.is_empty() {
        bail!("at values {unused:?} match no model column");
    }

    let betas = log_grid(cfg.beta_lo, cfg.beta_hi, cfg.beta_points)?;
    let x = feature_rows(&clf.columns, &fixed, &betas, "classifier")?;
    let classes = predict_class(&clf.model, &clf.standardizer.transform(&x)?)?;
    let stable: Vec<usize> = (0..betas.len()).filter(|&i| classes[i] == 1.0).collect();

    let mut lines: Vec<(String, String)> = Vec::new();
    let code = if stable.is_empty() {
        lines.push(("stable_beta_min".into(), "none".into()));
        1
    } else {
        // log_grid is ascending, so the first stable index is the
        // smallest beta the gate accepts.
        lines.push(("stable_beta_min".into(), betas[stable[0]].to_string()));
        if let Some(reg) = &reg {
            let xr = feature_rows(&reg.columns, &fixed, &betas, "regressor")?;
            let costs = predict_raw(&reg.model, &reg.standardizer.transform(&xr)?, reg.target_scale)?;
            let mut best = stable[0];
            for &i in &stable[1..] {
                if costs[i] < costs[best] {
                    best = i;
                }
            }
            lines.push(("cost_optimal_beta".into(), betas[best].to_string()));
            lines.push(("predicted_iterations".into(), costs[best].to_string()));
        }
        0
    };

    let paths = RunPaths::new(&cfg.out_dir, &cfg.out)?;
    let report_path = paths.file("predict.txt");
    write_report(&report_path, &lines)?;
    paths.write_resolved(&cfg.entries())?;
    let mut manifest = Manifest::new("predict", betas.len())
        .grid("betas", &betas)
        .output(&report_path);
    manifest.wall_ms = start.elapsed().as_millis() as u64;
    manifest.write(&paths)?;
    Ok(code)
}
