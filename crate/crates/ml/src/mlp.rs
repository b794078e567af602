//! Feed-forward network with rectifier hidden layers and an identity or
//! sigmoid head, trained by mini-batch ADAM with exact backpropagation.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::PROB_CLIP;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => {
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = self.apply(z);
                s * (1.0 - s)
            }
        }
    }
}

/// One dense layer; weights are (out x in).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub hidden: Activation,
    pub output: Activation,
    pub seed: u64,
}

impl MlpModel {
    /// He-initialized network: weights N(0, 2/fan_in), biases zero.
    pub fn new(sizes: &[usize], hidden: Activation, output: Activation, seed: u64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidArgument("need at least input and output layers".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArgument("zero-width layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt())
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| normal.sample(&mut rng));
            layers.push(Layer { w, b: Array1::zeros(fan_out) });
        }
        Ok(MlpModel { layers, hidden, output, seed })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].w.ncols()];
        sizes.extend(self.layers.iter().map(|l| l.w.nrows()));
        sizes
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].w.ncols()
    }

    fn activation_at(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    /// Pre-activations and activations per layer for a batch.
    fn forward_cached(&self, x: &Array2<f64>) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = Vec::with_capacity(self.layers.len() + 1);
        act.push(x.clone());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = act[i].dot(&layer.w.t());
            for mut row in z.rows_mut() {
                row += &layer.b;
            }
            let a = z.mapv(|v| self.activation_at(i).apply(v));
            pre.push(z);
            act.push(a);
        }
        (pre, act)
    }

    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_inputs() {
            return Err(Error::InvalidArgument(format!(
                "network takes {} inputs, got {}",
                self.n_inputs(),
                x.ncols()
            )));
        }
        let (_, act) = self.forward_cached(x);
        let out = act.last().expect("nonempty").clone();
        if let Some((r, _)) = out.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::TrainingDiverged(format!(
                "non-finite activation in the output layer at row {}",
                r.0
            )));
        }
        Ok(out)
    }

    /// Network output flattened to one value per row.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.column(0).to_vec())
    }

    pub fn predict_class(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        Ok(self
            .predict(x)?
            .into_iter()
            .map(|p| if p >= 0.5 { 1.0 } else { 0.0 })
            .collect())
    }

    /// Mean squared error (identity head) or clipped binary cross
    /// entropy (sigmoid head).
    pub fn loss(&self, x: &Array2<f64>, y: &[f64]) -> Result<f64> {
        let pred = self.predict(x)?;
        if pred.len() != y.len() {
            return Err(Error::InvalidArgument("prediction/target length mismatch".into()));
        }
        let n = y.len() as f64;
        let total: f64 = match self.output {
            Activation::Sigmoid => pred
                .iter()
                .zip(y)
                .map(|(&p, &t)| {
                    let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
                    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
                })
                .sum(),
            _ => pred.iter().zip(y).map(|(&p, &t)| (p - t).powi(2)).sum(),
        };
        Ok(total / n)
    }

    /// Exact backpropagation of the batch loss; mirrors `loss`.
    pub fn grad(&self, x: &Array2<f64>, y: &[f64]) -> Result<Vec<Layer>> {
        if x.nrows() != y.len() || y.is_empty() {
            return Err(Error::InvalidArgument("batch shapes disagree".into()));
        }
        let n = y.len() as f64;
        let (pre, act) = self.forward_cached(x);
        let last = self.layers.len() - 1;
        // Output delta: d(loss)/d(pre-activation of the head).
        let mut delta = Array2::zeros((x.nrows(), 1));
        for (r, &target) in y.iter().enumerate() {
            let out = act[last + 1][[r, 0]];
            delta[[r, 0]] = match self.output {
                // BCE with sigmoid collapses to (prediction - target).
                Activation::Sigmoid => (out - target) / n,
                Activation::Identity => 2.0 * (out - target) / n,
                Activation::Relu => {
                    2.0 * (out - target) * Activation::Relu.derivative(pre[last][[r, 0]]) / n
                }
            };
        }
        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer { w: Array2::zeros(l.w.dim()), b: Array1::zeros(l.b.len()) })
            .collect();
        for i in (0..self.layers.len()).rev() {
            grads[i].w = delta.t().dot(&act[i]);
            grads[i].b = delta.sum_axis(ndarray::Axis(0));
            if i > 0 {
                let back = delta.dot(&self.layers[i].w);
                delta = &back
                    * &pre[i - 1].mapv(|z| self.activation_at(i - 1).derivative(z));
            }
        }
        Ok(grads)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flat parameter access for the finite-difference oracle.
    pub fn get_param(&self, mut idx: usize) -> f64 {
        for l in &self.layers {
            if idx < l.w.len() {
                return *l.w.iter().nth(idx).expect("in range");
            }
            idx -= l.w.len();
            if idx < l.b.len() {
                return l.b[idx];
            }
            idx -= l.b.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        for l in &mut self.layers {
            if idx < l.w.len() {
                *l.w.iter_mut().nth(idx).expect("in range") = value;
                return;
            }
            idx -= l.w.len();
            if idx < l.b.len() {
                l.b[idx] = value;
                return;
            }
            idx -= l.b.len();
        }
        panic!("parameter index out of range");
    }

    fn grad_param(&self, grads: &[Layer], mut idx: usize) -> f64 {
        for g in grads {
            if idx < g.w.len() {
                return *g.w.iter().nth(idx).expect("in range");
            }
            idx -= g.w.len();
            if idx < g.b.len() {
                return g.b[idx];
            }
            idx -= g.b.len();
        }
        panic!("parameter index out of range");
    }

    /// Rectifier on/off pattern plus head saturation flag; finite
    /// differences are only trusted when the pattern is stable.
    fn activation_pattern(&self, x: &Array2<f64>) -> (Vec<bool>, bool) {
        let (pre, _) = self.forward_cached(x);
        let mut pattern = Vec::new();
        for (i, z) in pre.iter().enumerate() {
            if self.activation_at(i) == Activation::Relu {
                pattern.extend(z.iter().map(|&v| v > 0.0));
            }
        }
        let saturated = self.output == Activation::Sigmoid
            && pre.last().expect("layers").iter().any(|&z| z.abs() > 25.0);
        (pattern, saturated)
    }
}

/// Compares backpropagation with central finite differences on randomly
/// chosen parameters. Draws that flip a rectifier's state between the
/// two evaluation points (where the loss is not differentiable) are
/// redrawn. Returns the maximum relative error over `n_trials` checks;
/// components below an absolute floor of 1e-3 are compared absolutely.
pub fn numerical_gradient_check(
    model: &MlpModel,
    x: &Array2<f64>,
    y: &[f64],
    eps: f64,
    n_trials: usize,
    seed: u64,
) -> Result<f64> {
    if eps <= 0.0 || n_trials == 0 {
        return Err(Error::InvalidArgument("need eps > 0 and at least one trial".into()));
    }
    let grads = model.grad(x, y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut done = 0;
    let mut draws = 0;
    while done < n_trials {
        draws += 1;
        if draws > 50 * n_trials {
            return Err(Error::InvalidArgument(
                "could not find enough differentiable parameter perturbations".into(),
            ));
        }
        let idx = rng.gen_range(0..model.n_params());
        let base = model.get_param(idx);
        let mut probe = model.clone();
        probe.set_param(idx, base + eps);
        let (pat_plus, sat_plus) = probe.activation_pattern(x);
        let loss_plus = probe.loss(x, y)?;
        probe.set_param(idx, base - eps);
        let (pat_minus, sat_minus) = probe.activation_pattern(x);
        let loss_minus = probe.loss(x, y)?;
        if pat_plus != pat_minus || sat_plus || sat_minus {
            continue;
        }
        let fd = (loss_plus - loss_minus) / (2.0 * eps);
        let bp = model.grad_param(&grads, idx);
        let rel = (fd - bp).abs() / fd.abs().max(bp.abs()).max(1e-3);
        worst = worst.max(rel);
        done += 1;
    }
    Ok(worst)
}

/// ADAM optimizer state (first/second moments per parameter).
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Layer>,
    v: Vec<Layer>,
    t: i32,
}

impl Adam {
    pub fn new(model: &MlpModel, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros = |m: &MlpModel| -> Vec<Layer> {
            m.layers
                .iter()
                .map(|l| Layer { w: Array2::zeros(l.w.dim()), b: Array1::zeros(l.b.len()) })
                .collect()
        };
        Adam { lr, beta1, beta2, eps, m: zeros(model), v: zeros(model), t: 0 }
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &[Layer]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for (i, layer) in model.layers.iter_mut().enumerate() {
            let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            };
            for ((p, &g), (m, v)) in layer
                .w
                .iter_mut()
                .zip(grads[i].w.iter())
                .zip(self.m[i].w.iter_mut().zip(self.v[i].w.iter_mut()))
            {
                update(p, g, m, v);
            }
            for ((p, &g), (m, v)) in layer
                .b
                .iter_mut()
                .zip(grads[i].b.iter())
                .zip(self.m[i].b.iter_mut().zip(self.v[i].b.iter_mut()))
            {
                update(p, g, m, v);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub epochs: usize,
    /// Early-stopping patience on validation loss; None disables it.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch: 10,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            epochs: 200,
            patience: Some(20),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
}

/// Trains arch = (hidden layer count, width) with seeded per-epoch
/// shuffling; returns the weights from the epoch with the lowest
/// validation loss plus the full loss history.
pub fn train_mlp(
    train: &Dataset,
    val: &Dataset,
    arch: (usize, usize),
    output: Activation,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(MlpModel, TrainHistory)> {
    let (n_hl, n_n) = arch;
    if n_hl == 0 || n_n == 0 {
        return Err(Error::InvalidArgument("architecture needs nonzero depth and width".into()));
    }
    if cfg.batch == 0 || cfg.epochs == 0 || cfg.lr <= 0.0 {
        return Err(Error::InvalidArgument("bad training configuration".into()));
    }
    if train.n_features() != val.n_features() {
        return Err(Error::InvalidArgument("train/validation width mismatch".into()));
    }
    if output == Activation::Sigmoid && !(train.is_binary_target() && val.is_binary_target()) {
        return Err(Error::InvalidArgument("classification needs {0,1} targets".into()));
    }
    let mut sizes = vec![train.n_features()];
    sizes.extend(std::iter::repeat(n_n).take(n_hl));
    sizes.push(1);
    let mut model = MlpModel::new(&sizes, Activation::Relu, output, seed)?;
    let mut adam = Adam::new(&model, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = train.n_rows();
    let y_train: Vec<f64> = train.y.to_vec();
    let y_val: Vec<f64> = val.y.to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = TrainHistory { train_loss: Vec::new(), val_loss: Vec::new(), best_epoch: 0 };
    let mut best = (f64::INFINITY, model.clone());
    let mut since_best = 0usize;
    for epoch in 0..cfg.epochs {
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(cfg.batch) {
            let mut bx = Array2::zeros((chunk.len(), train.n_features()));
            let mut by = Vec::with_capacity(chunk.len());
            for (i, &r) in chunk.iter().enumerate() {
                bx.row_mut(i).assign(&train.x.row(r));
                by.push(y_train[r]);
            }
            let grads = model.grad(&bx, &by)?;
            adam.step(&mut model, &grads);
        }
        let train_loss = model.loss(&train.x, &y_train)?;
        let val_loss = model.loss(&val.x, &y_val)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::TrainingDiverged(format!(
                "loss became non-finite in epoch {epoch}"
            )));
        }
        history.train_loss.push(train_loss);
        history.val_loss.push(val_loss);
        if val_loss < best.0 {
            best = (val_loss, model.clone());
            history.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if let Some(patience) = cfg.patience {
                if since_best >= patience {
                    break;
                }
            }
        }
    }
    Ok((best.1, history))
}

/// One grid-search cell: architecture plus its validation score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub n_hl: usize,
    pub n_n: usize,
    /// Validation MSE for regression, validation accuracy for
    /// classification.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub cells: Vec<GridCell>,
    pub best: (usize, usize),
}

/// Trains one model per (N_hl, N_n) cell concurrently and picks the best
/// validation score; ties go to the smaller depth, then smaller width.
pub fn hyperparameter_grid(
    train: &Dataset,
    val: &Dataset,
    depths: &[usize],
    widths: &[usize],
    output: Activation,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<GridSearch> {
    if depths.is_empty() || widths.is_empty() {
        return Err(Error::InvalidArgument("hyperparameter grids must be nonempty".into()));
    }
    let combos: Vec<(usize, usize)> = depths
        .iter()
        .flat_map(|&d| widths.iter().map(move |&w| (d, w)))
        .collect();
    let cells: Result<Vec<GridCell>> = combos
        .par_iter()
        .map(|&(n_hl, n_n)| {
            let (model, _) = train_mlp(train, val, (n_hl, n_n), output, cfg, seed)?;
            let score = match output {
                Activation::Sigmoid => {
                    let classes = model.predict_class(&val.x)?;
                    crate::metrics::accuracy(val.y.as_slice().expect("contiguous"), &classes)?
                }
                _ => model.loss(&val.x, val.y.as_slice().expect("contiguous"))?,
            };
            Ok(GridCell { n_hl, n_n, score })
        })
        .collect();
    let cells = cells?;
    // Cells are in row-major (depth, width) order, so a strict
    // comparison makes the first of any tied scores win.
    let maximize = output == Activation::Sigmoid;
    let mut best = 0;
    for (i, cell) in cells.iter().enumerate() {
        let better = if maximize {
            cell.score > cells[best].score
        } else {
            cell.score < cells[best].score
        };
        if better {
            best = i;
        }
    }
    let best = (cells[best].n_hl, cells[best].n_n);
    Ok(GridSearch { cells, best })
}
