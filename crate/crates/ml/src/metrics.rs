//! Regression and classification metrics. R2 and EVS return None when
//! their denominator (target variance) vanishes.

use crate::error::{Error, Result};

pub const PROB_CLIP: f64 = 1e-12;

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b || a == 0 {
        return Err(Error::InvalidArgument(format!(
            "metric inputs must be equal-length and nonempty, got {a} and {b}"
        )));
    }
    Ok(())
}

pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    Ok(y_true.iter().zip(y_pred).map(|(t, p)| (t - p).powi(2)).sum::<f64>() / n)
}

/// R2 = 1 - SS_res / SS_tot; None when the target is constant.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<Option<f64>> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(None);
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(t, p)| (t - p).powi(2)).sum();
    Ok(Some(1.0 - ss_res / ss_tot))
}

/// EVS = 1 - Var(y - yhat) / Var(y); equals R2 exactly when the residual
/// mean is zero. None when the target is constant.
pub fn explained_variance(y_true: &[f64], y_pred: &[f64]) -> Result<Option<f64>> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    let var = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
    };
    let var_y = var(y_true);
    if var_y == 0.0 {
        return Ok(None);
    }
    let residual: Vec<f64> = y_true.iter().zip(y_pred).map(|(t, p)| t - p).collect();
    Ok(Some(1.0 - var(&residual) / var_y))
}

/// Binary cross entropy with probabilities clipped away from {0, 1}.
pub fn bce(y_true: &[f64], proba: &[f64]) -> Result<f64> {
    check_lengths(y_true.len(), proba.len())?;
    if y_true.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::InvalidArgument("cross entropy needs {0,1} targets".into()));
    }
    let n = y_true.len() as f64;
    let total: f64 = y_true
        .iter()
        .zip(proba)
        .map(|(&t, &p)| {
            let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / n)
}

/// Counts of a binary classifier's outcomes on one evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

/// Tally predicted classes against {0,1} truth.
pub fn confusion(y_true: &[f64], y_class: &[f64]) -> Result<ConfusionMatrix> {
    check_lengths(y_true.len(), y_class.len())?;
    let mut m = ConfusionMatrix { tp: 0, fp: 0, fn_: 0, tn: 0 };
    for (&t, &c) in y_true.iter().zip(y_class) {
        if (t != 0.0 && t != 1.0) || (c != 0.0 && c != 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confusion matrix needs {{0,1}} labels, got truth {t}, class {c}"
            )));
        }
        match (t == 1.0, c == 1.0) {
            (true, true) => m.tp += 1,
            (false, true) => m.fp += 1,
            (true, false) => m.fn_ += 1,
            (false, false) => m.tn += 1,
        }
    }
    Ok(m)
}

pub fn accuracy(y_true: &[f64], y_class: &[f64]) -> Result<f64> {
    Ok(confusion(y_true, y_class)?.accuracy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_prediction_scores_perfectly() {
        let y = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        assert_eq!(r2(&y, &y).unwrap(), Some(1.0));
        assert_eq!(explained_variance(&y, &y).unwrap(), Some(1.0));
    }

    #[test]
    fn r2_equals_evs_for_zero_mean_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Vec<f64> = (0..500).map(|_| rng.gen_range(-5.0..5.0)).collect();
        // Antisymmetric residual pattern has exactly zero mean.
        let pred: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, &v)| if i % 2 == 0 { v + 0.25 } else { v - 0.25 })
            .collect();
        let a = r2(&y, &pred).unwrap().unwrap();
        let b = explained_variance(&y, &pred).unwrap().unwrap();
        assert!((a - b).abs() < 1e-12, "R2 {a} vs EVS {b}");
    }

    #[test]
    fn biased_residuals_split_r2_and_evs() {
        let y = [0.0, 1.0, 2.0, 3.0];
        let pred = [1.0, 2.0, 3.0, 4.0];
        let a = r2(&y, &pred).unwrap().unwrap();
        let b = explained_variance(&y, &pred).unwrap().unwrap();
        // Constant offset: EVS ignores it, R2 does not.
        assert_eq!(b, 1.0);
        assert!(a < 1.0);
    }

    #[test]
    fn constant_target_is_undefined() {
        let y = [2.0, 2.0, 2.0];
        let pred = [2.0, 2.1, 1.9];
        assert_eq!(r2(&y, &pred).unwrap(), None);
        assert_eq!(explained_variance(&y, &pred).unwrap(), None);
    }

    #[test]
    fn bce_is_nonnegative_and_zero_only_at_clipped_perfection() {
        let y = [1.0, 0.0, 1.0];
        let perfect = [1.0, 0.0, 1.0];
        let b = bce(&y, &perfect).unwrap();
        assert!(b >= 0.0 && b < 1e-11);
        let imperfect = [0.9, 0.1, 0.8];
        assert!(bce(&y, &imperfect).unwrap() > 0.0);
        assert!(bce(&[0.5], &[0.5]).is_err());
    }

    #[test]
    fn reference_confusion_matrices_give_the_published_accuracies() {
        let logistic = ConfusionMatrix { tp: 172, fp: 210, fn_: 74, tn: 959 };
        assert_eq!(logistic.total(), 1415);
        assert_eq!(logistic.accuracy(), 1131.0 / 1415.0);
        assert!((logistic.accuracy() - 0.80).abs() < 0.01);
        let network = ConfusionMatrix { tp: 367, fp: 15, fn_: 72, tn: 961 };
        assert_eq!(network.total(), 1415);
        assert_eq!(network.accuracy(), 1328.0 / 1415.0);
        assert!((network.accuracy() - 0.94).abs() < 0.01);
    }

    #[test]
    fn confusion_tallies_match_direct_counting() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..300).map(|_| if rng.gen_bool(0.3) { 1.0 } else { 0.0 }).collect();
        let c: Vec<f64> = (0..300).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let m = confusion(&y, &c).unwrap();
        assert_eq!(m.total(), 300);
        let direct = y.iter().zip(&c).filter(|(t, p)| t == p).count();
        assert_eq!(accuracy(&y, &c).unwrap(), direct as f64 / 300.0);
    }

    #[test]
    fn label_validation() {
        assert!(confusion(&[0.5], &[1.0]).is_err());
        assert!(confusion(&[1.0], &[2.0]).is_err());
        assert!(mse(&[1.0], &[]).is_err());
    }
}
