//! Plain-text model files: architecture, column names, standardization
//! statistics, full-precision weights, training seed and a metric
//! snapshot. Floats are written in shortest round-trip form, so a
//! loaded model is bit-identical to the saved one.

use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::linear::{LinearKind, LinearModel};
use crate::mlp::{Activation, Layer, MlpModel};
use ndarray::{Array1, Array2};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const MAGIC: &str = "ipdg-model v1";

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Linear(LinearModel),
    Mlp(MlpModel),
}

/// Everything needed to apply a trained model to new raw feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedArtifact {
    pub model: SavedModel,
    pub columns: Vec<String>,
    pub target: String,
    pub standardizer: Standardizer,
    /// (mean, std) of the raw training target when the model was fitted
    /// against a standardized target; predictions must be mapped back.
    pub target_scale: Option<(f64, f64)>,
    pub seed: u64,
    pub metrics: Vec<(String, f64)>,
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Identity => "identity",
        Activation::Relu => "relu",
        Activation::Sigmoid => "sigmoid",
    }
}

fn activation_from(name: &str) -> Result<Activation> {
    match name {
        "identity" => Ok(Activation::Identity),
        "relu" => Ok(Activation::Relu),
        "sigmoid" => Ok(Activation::Sigmoid),
        other => Err(Error::ModelFile(format!("unknown activation '{other}'"))),
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_floats(line: &str, what: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::ModelFile(format!("bad float '{t}' in {what}")))
        })
        .collect()
}

impl TrainedArtifact {
    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{MAGIC}")?;
        let kind = match &self.model {
            SavedModel::Linear(m) => match m.kind {
                LinearKind::Regression => "linear-regression",
                LinearKind::Logistic => "logistic",
            },
            SavedModel::Mlp(m) => match m.output {
                Activation::Sigmoid => "mlp-classification",
                _ => "mlp-regression",
            },
        };
        writeln!(out, "kind {kind}")?;
        writeln!(out, "target {}", self.target)?;
        writeln!(out, "seed {}", self.seed)?;
        writeln!(out, "columns {}", self.columns.len())?;
        for c in &self.columns {
            if c.contains('\n') || c.trim() != c || c.is_empty() {
                return Err(Error::ModelFile(format!("column name '{c}' is not storable")));
            }
            writeln!(out, "{c}")?;
        }
        writeln!(out, "means {}", join(&self.standardizer.means))?;
        writeln!(out, "stds {}", join(&self.standardizer.stds))?;
        if let Some((mean, std)) = self.target_scale {
            writeln!(out, "target_scale {mean} {std}")?;
        }
        for (name, value) in &self.metrics {
            writeln!(out, "metric {name} {value}")?;
        }
        match &self.model {
            SavedModel::Linear(m) => {
                writeln!(out, "model linear")?;
                writeln!(out, "intercept {}", m.intercept)?;
                writeln!(out, "coefficients {}", join(&m.coefficients))?;
            }
            SavedModel::Mlp(m) => {
                writeln!(out, "model mlp")?;
                writeln!(out, "hidden {}", activation_name(m.hidden))?;
                writeln!(out, "output {}", activation_name(m.output))?;
                let sizes: Vec<String> =
                    m.layer_sizes().iter().map(|s| s.to_string()).collect();
                writeln!(out, "sizes {}", sizes.join(" "))?;
                for (i, layer) in m.layers.iter().enumerate() {
                    writeln!(out, "layer {i}")?;
                    for row in layer.w.rows() {
                        writeln!(out, "w {}", join(row.as_slice().expect("row")))?;
                    }
                    writeln!(out, "b {}", join(layer.b.as_slice().expect("contiguous")))?;
                }
            }
        }
        writeln!(out, "end")?;
        Ok(())
    }

    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::ModelFile("unexpected end of file".into()))?
                .map_err(Error::Io)
        };
        if next()? != MAGIC {
            return Err(Error::ModelFile("not a model file (bad magic line)".into()));
        }
        let field = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::ModelFile(format!("expected '{key} ...', got '{line}'")))
        };
        let kind = field(next()?, "kind")?;
        let target = field(next()?, "target")?;
        let seed: u64 = field(next()?, "seed")?
            .parse()
            .map_err(|_| Error::ModelFile("bad seed".into()))?;
        let n_columns: usize = field(next()?, "columns")?
            .parse()
            .map_err(|_| Error::ModelFile("bad column count".into()))?;
        let mut columns = Vec::with_capacity(n_columns);
        for _ in 0..n_columns {
            columns.push(next()?);
        }
        let means = parse_floats(&field(next()?, "means")?, "means")?;
        let stds = parse_floats(&field(next()?, "stds")?, "stds")?;
        if means.len() != n_columns || stds.len() != n_columns {
            return Err(Error::ModelFile("standardizer width mismatch".into()));
        }
        let mut line = next()?;
        let target_scale = match line.strip_prefix("target_scale ") {
            Some(rest) => {
                let pair = parse_floats(rest, "target_scale")?;
                if pair.len() != 2 {
                    return Err(Error::ModelFile("target_scale needs mean and std".into()));
                }
                line = next()?;
                Some((pair[0], pair[1]))
            }
            None => None,
        };
        let mut metrics = Vec::new();
        while let Some(rest) = line.strip_prefix("metric ") {
            let (name, value) = rest
                .split_once(' ')
                .ok_or_else(|| Error::ModelFile("bad metric line".into()))?;
            metrics.push((
                name.to_string(),
                value
                    .parse::<f64>()
                    .map_err(|_| Error::ModelFile("bad metric value".into()))?,
            ));
            line = next()?;
        }
        let model = match field(line, "model")?.as_str() {
            "linear" => {
                let intercept: f64 = field(next()?, "intercept")?
                    .parse()
                    .map_err(|_| Error::ModelFile("bad intercept".into()))?;
                let coefficients =
                    parse_floats(&field(next()?, "coefficients")?, "coefficients")?;
                let lk = match kind.as_str() {
                    "linear-regression" => LinearKind::Regression,
                    "logistic" => LinearKind::Logistic,
                    other => {
                        return Err(Error::ModelFile(format!(
                            "kind '{other}' does not match a linear payload"
                        )))
                    }
                };
                if coefficients.len() != n_columns {
                    return Err(Error::ModelFile("coefficient width mismatch".into()));
                }
                SavedModel::Linear(LinearModel { intercept, coefficients, kind: lk })
            }
            "mlp" => {
                let hidden = activation_from(&field(next()?, "hidden")?)?;
                let output = activation_from(&field(next()?, "output")?)?;
                let sizes: Vec<usize> = field(next()?, "sizes")?
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::ModelFile("bad size".into())))
                    .collect::<Result<_>>()?;
                if sizes.len() < 2 || sizes[0] != n_columns {
                    return Err(Error::ModelFile("layer sizes disagree with columns".into()));
                }
                let mut layers = Vec::with_capacity(sizes.len() - 1);
                for (i, pair) in sizes.windows(2).enumerate() {
                    let (fan_in, fan_out) = (pair[0], pair[1]);
                    let header = field(next()?, "layer")?;
                    if header != i.to_string() {
                        return Err(Error::ModelFile(format!("expected layer {i}")));
                    }
                    let mut w = Array2::zeros((fan_out, fan_in));
                    for r in 0..fan_out {
                        let row = parse_floats(&field(next()?, "w")?, "weights")?;
                        if row.len() != fan_in {
                            return Err(Error::ModelFile("weight row width mismatch".into()));
                        }
                        for (c, v) in row.into_iter().enumerate() {
                            w[[r, c]] = v;
                        }
                    }
                    let b = parse_floats(&field(next()?, "b")?, "bias")?;
                    if b.len() != fan_out {
                        return Err(Error::ModelFile("bias width mismatch".into()));
                    }
                    layers.push(Layer { w, b: Array1::from_vec(b) });
                }
                SavedModel::Mlp(MlpModel { layers, hidden, output, seed })
            }
            other => return Err(Error::ModelFile(format!("unknown payload '{other}'"))),
        };
        if next()? != "end" {
            return Err(Error::ModelFile("missing end marker".into()));
        }
        Ok(TrainedArtifact {
            model,
            columns,
            target,
            standardizer: Standardizer { means, stds },
            target_scale,
            seed,
            metrics,
        })
    }

    pub fn save_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.save(BufWriter::new(File::create(path)?))
    }

    pub fn load_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::load(BufReader::new(File::open(path)?))
    }
}
