//! Tabular datasets, the seeded train/validation/test split, and
//! feature standardization with train-only statistics.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Read;

/// Feature matrix plus target vector with column metadata. All entries
/// must be finite; targets may be continuous or binary {0,1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub columns: Vec<String>,
    pub target_name: String,
}

impl Dataset {
    pub fn new(
        x: Array2<f64>,
        y: Array1<f64>,
        columns: Vec<String>,
        target_name: String,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "feature matrix has {} rows but target has {}",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature columns but {} column names",
                x.ncols(),
                columns.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in dataset".into()));
        }
        Ok(Dataset { x, y, columns, target_name })
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_binary_target(&self) -> bool {
        self.y.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Reads the named columns from a CSV stream with a header row.
    /// Boolean fields parse as 0/1 so sweep outputs load directly.
    pub fn from_csv<R: Read>(reader: R, features: &[&str], target: &str) -> Result<Self> {
        let mut csv = csv::Reader::from_reader(reader);
        let header = csv.headers()?.clone();
        let position = |name: &str| -> Result<usize> {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::InvalidArgument(format!("column '{name}' not in header")))
        };
        let feature_idx: Vec<usize> =
            features.iter().map(|f| position(f)).collect::<Result<_>>()?;
        let target_idx = position(target)?;
        let mut rows: Vec<f64> = Vec::new();
        let mut y: Vec<f64> = Vec::new();
        for record in csv.records() {
            let record = record?;
            for &idx in &feature_idx {
                rows.push(parse_field(record.get(idx).unwrap_or(""))?);
            }
            y.push(parse_field(record.get(target_idx).unwrap_or(""))?);
        }
        let n = y.len();
        let x = Array2::from_shape_vec((n, features.len()), rows)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Dataset::new(
            x,
            Array1::from_vec(y),
            features.iter().map(|s| s.to_string()).collect(),
            target.to_string(),
        )
    }

    /// Copy of the selected rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        let n = self.n_rows();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::InvalidArgument(format!("row index {bad} out of range {n}")));
        }
        let p = self.n_features();
        let mut x = Array2::zeros((rows.len(), p));
        let mut y = Array1::zeros(rows.len());
        for (i, &r) in rows.iter().enumerate() {
            x.row_mut(i).assign(&self.x.row(r));
            y[i] = self.y[r];
        }
        Ok(Dataset {
            x,
            y,
            columns: self.columns.clone(),
            target_name: self.target_name.clone(),
        })
    }
}

fn parse_field(field: &str) -> Result<f64> {
    let field = field.trim();
    let value = match field {
        "true" => 1.0,
        "false" => 0.0,
        other => other
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("cannot parse '{other}' as a number")))?,
    };
    if !value.is_finite() {
        return Err(Error::Parse(format!("non-finite value '{field}'")));
    }
    Ok(value)
}

/// Row indices of one reproducible split. Disjoint, union = all rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// Seeded uniform permutation, then contiguous slices of size
/// floor(r0 n), floor(r1 n) and the remainder.
pub fn split(data: &Dataset, ratios: (f64, f64, f64), seed: u64) -> Result<SplitIndices> {
    let n = data.n_rows();
    if n < 10 {
        return Err(Error::InvalidArgument(format!("need at least 10 rows to split, got {n}")));
    }
    let (r0, r1, r2) = ratios;
    if r0 < 0.0 || r1 < 0.0 || r2 < 0.0 || (r0 + r1 + r2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split ratios must be nonnegative and sum to 1, got ({r0}, {r1}, {r2})"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let n_train = (r0 * n as f64).floor() as usize;
    let n_val = (r1 * n as f64).floor() as usize;
    let train = perm[..n_train].to_vec();
    let val = perm[n_train..n_train + n_val].to_vec();
    let test = perm[n_train + n_val..].to_vec();
    Ok(SplitIndices { train, val, test, seed })
}

/// Per-column mean/standard-deviation transform fitted on the training
/// rows only. Constant columns keep scale 1 so they pass through
/// centered instead of dividing by zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &Dataset, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("cannot fit statistics on zero rows".into()));
        }
        let n = data.n_rows();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::InvalidArgument(format!("row index {bad} out of range {n}")));
        }
        let p = data.n_features();
        let m = rows.len() as f64;
        let mut means = vec![0.0; p];
        let mut stds = vec![0.0; p];
        for j in 0..p {
            let mean = rows.iter().map(|&r| data.x[[r, j]]).sum::<f64>() / m;
            let var = rows.iter().map(|&r| (data.x[[r, j]] - mean).powi(2)).sum::<f64>() / m;
            means[j] = mean;
            stds[j] = if var > 1e-24 { var.sqrt() } else { 1.0 };
        }
        Ok(Standardizer { means, stds })
    }

    fn check_width(&self, ncols: usize) -> Result<()> {
        if ncols != self.means.len() {
            return Err(Error::InvalidArgument(format!(
                "standardizer fitted on {} columns, given {ncols}",
                self.means.len()
            )));
        }
        Ok(())
    }

    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_width(x.ncols())?;
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.means[j]) / self.stds[j];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_width(x.ncols())?;
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * self.stds[j] + self.means[j];
            }
        }
        Ok(out)
    }

    /// Same dataset with standardized features; the target is untouched.
    pub fn transform_dataset(&self, data: &Dataset) -> Result<Dataset> {
        Ok(Dataset {
            x: self.transform(&data.x)?,
            y: data.y.clone(),
            columns: data.columns.clone(),
            target_name: data.target_name.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy(n: usize) -> Dataset {
        let x = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let y = Array1::from_shape_fn(n, |i| i as f64);
        Dataset::new(x, y, vec!["a".into(), "b".into()], "t".into()).unwrap()
    }

    #[test]
    fn split_sizes_follow_the_floor_rule() {
        let s = split(&toy(10), (0.8, 0.1, 0.1), 0).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 1, 1));
        let s = split(&toy(14141), (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (11312, 1414, 1415));
    }

    #[test]
    fn split_partitions_all_rows() {
        let s = split(&toy(103), (0.8, 0.1, 0.1), 3).unwrap();
        let mut all: Vec<usize> =
            s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..103).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_seed_deterministic_and_seed_sensitive() {
        let a = split(&toy(50), (0.8, 0.1, 0.1), 42).unwrap();
        let b = split(&toy(50), (0.8, 0.1, 0.1), 42).unwrap();
        let c = split(&toy(50), (0.8, 0.1, 0.1), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn split_rejects_bad_inputs() {
        assert!(split(&toy(9), (0.8, 0.1, 0.1), 0).is_err());
        assert!(split(&toy(20), (0.8, 0.1, 0.2), 0).is_err());
        assert!(split(&toy(20), (1.2, -0.1, -0.1), 0).is_err());
    }

    #[test]
    fn csv_reads_numbers_and_bools() {
        let text = "theta,kappa,beta,converged,iterations\n1,0.5,10,true,42\n0,1e-3,2.5,false,99\n";
        let d =
            Dataset::from_csv(text.as_bytes(), &["theta", "beta", "converged"], "iterations")
                .unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.x, array![[1.0, 10.0, 1.0], [0.0, 2.5, 0.0]]);
        assert_eq!(d.y, array![42.0, 99.0]);
        assert_eq!(d.columns, vec!["theta", "beta", "converged"]);
    }

    #[test]
    fn csv_rejects_missing_columns_and_junk() {
        let text = "a,b\n1,2\n";
        assert!(Dataset::from_csv(text.as_bytes(), &["a", "z"], "b").is_err());
        let text = "a,b\n1,oops\n";
        assert!(Dataset::from_csv(text.as_bytes(), &["a"], "b").is_err());
        let text = "a,b\n1,inf\n";
        assert!(Dataset::from_csv(text.as_bytes(), &["a"], "b").is_err());
    }

    #[test]
    fn standardizer_round_trips() {
        let d = toy(31);
        let s = Standardizer::fit(&d, &(0..31).collect::<Vec<_>>()).unwrap();
        let z = s.transform(&d.x).unwrap();
        let back = s.inverse(&z).unwrap();
        for (a, b) in back.iter().zip(d.x.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        // Standardized training columns have mean 0, variance 1.
        for j in 0..2 {
            let col: Vec<f64> = z.column(j).to_vec();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn standardizer_uses_training_rows_only() {
        let mut d = toy(30);
        let idx = split(&d, (0.8, 0.1, 0.1), 5).unwrap();
        let s = Standardizer::fit(&d, &idx.train).unwrap();
        // Perturbing validation/test rows must not change the statistics.
        for &r in idx.val.iter().chain(&idx.test) {
            d.x[[r, 0]] += 1e6;
            d.x[[r, 1]] -= 1e6;
        }
        let s2 = Standardizer::fit(&d, &idx.train).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn constant_columns_pass_through_centered() {
        let x = Array2::from_shape_fn((12, 1), |_| 3.5);
        let y = Array1::zeros(12);
        let d = Dataset::new(x, y, vec!["c".into()], "t".into()).unwrap();
        let s = Standardizer::fit(&d, &(0..12).collect::<Vec<_>>()).unwrap();
        assert_eq!(s.stds, vec![1.0]);
        let z = s.transform(&d.x).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dataset_validates_shapes_and_finiteness() {
        let x = Array2::zeros((3, 2));
        let y = Array1::zeros(4);
        assert!(Dataset::new(x, y, vec!["a".into(), "b".into()], "t".into()).is_err());
        let x = array![[1.0, f64::NAN]];
        let y = array![0.0];
        assert!(Dataset::new(x, y, vec!["a".into(), "b".into()], "t".into()).is_err());
    }

    #[test]
    fn subset_preserves_order_and_checks_bounds() {
        let d = toy(6);
        let s = d.subset(&[4, 1]).unwrap();
        assert_eq!(s.y, array![4.0, 1.0]);
        assert_eq!(s.x.row(0), d.x.row(4));
        assert!(d.subset(&[6]).is_err());
    }

    #[test]
    fn binary_target_detection() {
        let d = toy(12);
        assert!(!d.is_binary_target());
        let x = Array2::zeros((4, 1));
        let y = array![0.0, 1.0, 1.0, 0.0];
        let b = Dataset::new(x, y, vec!["a".into()], "q".into()).unwrap();
        assert!(b.is_binary_target());
    }
}
