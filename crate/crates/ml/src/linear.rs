//! Linear baselines: least-squares regression fitted by stochastic
//! gradient descent, and logistic regression fitted by full-batch
//! gradient descent with a backtracking line search.

use crate::data::Dataset;
use crate::error::{Error, Result};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hard cap on logistic coefficient magnitude; separable data drives the
/// unconstrained optimum to infinity, so iterates are projected back.
pub const LOGISTIC_COEF_CAP: f64 = 50.0;
pub const LOGISTIC_GRAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearKind {
    Regression,
    Logistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub kind: LinearKind,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LinearModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        self.intercept
            + self.coefficients.iter().zip(row).map(|(c, x)| c * x).sum::<f64>()
    }

    /// Regression: the linear score. Logistic: the class probability.
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        match self.kind {
            LinearKind::Regression => self.score(row),
            LinearKind::Logistic => sigmoid(self.score(row)),
        }
    }

    pub fn predict(&self, x: &Array2<f64>) -> Vec<f64> {
        x.rows().into_iter().map(|r| self.predict_one(r.as_slice().expect("row"))).collect()
    }

    /// Class 1 iff the predicted probability reaches 0.5.
    pub fn predict_class(&self, x: &Array2<f64>) -> Vec<f64> {
        self.predict(x)
            .into_iter()
            .map(|p| if p >= 0.5 { 1.0 } else { 0.0 })
            .collect()
    }
}

fn check_train(data: &Dataset) -> Result<()> {
    if data.n_rows() == 0 || data.n_features() == 0 {
        return Err(Error::InvalidArgument("training data is empty".into()));
    }
    Ok(())
}

/// Per-sample stochastic gradient descent on the mean squared error.
/// Returns the model and the per-epoch training MSE history.
pub fn fit_linear_regression(
    data: &Dataset,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<(LinearModel, Vec<f64>)> {
    check_train(data)?;
    if epochs == 0 || lr <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need epochs >= 1 and lr > 0, got {epochs} and {lr}"
        )));
    }
    let n = data.n_rows();
    let p = data.n_features();
    let mut intercept = 0.0;
    let mut coef = vec![0.0; p];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut loss = 0.0;
        for &r in &order {
            let row = data.x.row(r);
            let pred =
                intercept + coef.iter().zip(row.iter()).map(|(c, x)| c * x).sum::<f64>();
            let err = pred - data.y[r];
            loss += err * err;
            intercept -= lr * 2.0 * err;
            for (c, &x) in coef.iter_mut().zip(row.iter()) {
                *c -= lr * 2.0 * err * x;
            }
        }
        let epoch_mse = loss / n as f64;
        if !epoch_mse.is_finite() {
            return Err(Error::TrainingDiverged(format!(
                "epoch MSE became non-finite at lr = {lr}"
            )));
        }
        history.push(epoch_mse);
    }
    Ok((LinearModel { intercept, coefficients: coef, kind: LinearKind::Regression }, history))
}

/// How a logistic fit ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticFit {
    pub iterations: usize,
    pub converged: bool,
    /// True when iterates hit the coefficient cap (separable data).
    pub capped: bool,
    pub final_loss: f64,
}

fn logistic_loss_grad(data: &Dataset, intercept: f64, coef: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = data.n_rows() as f64;
    let mut loss = 0.0;
    let mut g0 = 0.0;
    let mut g = vec![0.0; coef.len()];
    for r in 0..data.n_rows() {
        let row = data.x.row(r);
        let z = intercept + coef.iter().zip(row.iter()).map(|(c, x)| c * x).sum::<f64>();
        let y = data.y[r];
        // ln(1 + e^z) - y z, evaluated stably on both signs of z.
        loss += if z > 0.0 { z + (-z).exp().ln_1p() - y * z } else { z.exp().ln_1p() - y * z };
        let e = sigmoid(z) - y;
        g0 += e;
        for (gj, &x) in g.iter_mut().zip(row.iter()) {
            *gj += e * x;
        }
    }
    for gj in g.iter_mut() {
        *gj /= n;
    }
    (loss / n, g0 / n, g)
}

/// Full-batch gradient descent on the binary cross entropy with an
/// Armijo backtracking line search (warm-started from twice the last
/// accepted step). Stops when the gradient's max norm drops below
/// LOGISTIC_GRAD_TOL or after max_iters.
pub fn fit_logistic_regression(
    data: &Dataset,
    max_iters: usize,
) -> Result<(LinearModel, LogisticFit)> {
    check_train(data)?;
    if !data.is_binary_target() {
        return Err(Error::InvalidArgument("logistic regression needs a {0,1} target".into()));
    }
    let p = data.n_features();
    let mut intercept = 0.0;
    let mut coef = vec![0.0; p];
    let mut step = 1.0;
    let mut capped = false;
    let mut converged = false;
    let mut iterations = 0;
    let (mut loss, mut g0, mut g) = logistic_loss_grad(data, intercept, &coef);
    for it in 0..max_iters {
        iterations = it + 1;
        let grad_norm = g.iter().chain(std::iter::once(&g0)).fold(0.0_f64, |m, v| m.max(v.abs()));
        if grad_norm < LOGISTIC_GRAD_TOL {
            converged = true;
            iterations = it;
            break;
        }
        let gsq = g0 * g0 + g.iter().map(|v| v * v).sum::<f64>();
        let mut t = step * 2.0;
        loop {
            let trial0 = intercept - t * g0;
            let mut trial: Vec<f64> = coef.iter().zip(&g).map(|(c, gj)| c - t * gj).collect();
            let mut hit_cap = false;
            for c in trial.iter_mut() {
                if c.abs() > LOGISTIC_COEF_CAP {
                    *c = c.signum() * LOGISTIC_COEF_CAP;
                    hit_cap = true;
                }
            }
            let (trial_loss, tg0, tg) = logistic_loss_grad(data, trial0, &trial);
            if trial_loss <= loss - 1e-4 * t * gsq || t < 1e-12 {
                intercept = trial0;
                coef = trial;
                loss = trial_loss;
                g0 = tg0;
                g = tg;
                step = t.max(1e-12);
                capped |= hit_cap;
                break;
            }
            t *= 0.5;
        }
    }
    Ok((
        LinearModel { intercept, coefficients: coef, kind: LinearKind::Logistic },
        LogisticFit { iterations, converged, capped, final_loss: loss },
    ))
}
