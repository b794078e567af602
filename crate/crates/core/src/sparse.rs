//! Compressed sparse row matrices built from triplets, plus the linear
//! system container the assemblers hand to the solvers.
//!
//! Triplet accumulation is deterministic: entries are sorted by (row, col)
//! with a stable sort and duplicates are summed in order, so assembling the
//! same problem twice yields bit-identical matrices.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct CooMatrix {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        CooMatrix { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut sorted = self.entries.clone();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows.min(self.ncols)];
        for r in 0..d.len() {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                if *c == r {
                    d[r] += v;
                }
            }
        }
        d
    }

    /// `self + scale * other`; the two operands may have different sparsity.
    pub fn add_scaled(&self, scale: f64, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::InvalidArgument("matrix shapes differ in add_scaled".into()));
        }
        let mut coo = CooMatrix::new(self.nrows, self.ncols);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                coo.push(r, *c, *v);
            }
            let (cols, vals) = other.row(r);
            for (c, v) in cols.iter().zip(vals) {
                coo.push(r, *c, scale * *v);
            }
        }
        Ok(coo.to_csr())
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut coo = CooMatrix::new(self.ncols, self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                coo.push(*c, r, *v);
            }
        }
        coo.to_csr()
    }

    /// Largest `|a_ij - a_ji|` over the pattern union; 0 for symmetric input.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        let mut defect: f64 = 0.0;
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = t.row(r);
            let (mut i, mut j) = (0usize, 0usize);
            while i < ca.len() || j < cb.len() {
                let (c1, c2) = (
                    ca.get(i).copied().unwrap_or(usize::MAX),
                    cb.get(j).copied().unwrap_or(usize::MAX),
                );
                if c1 == c2 {
                    defect = defect.max((va[i] - vb[j]).abs());
                    i += 1;
                    j += 1;
                } else if c1 < c2 {
                    defect = defect.max(va[i].abs());
                    i += 1;
                } else {
                    defect = defect.max(vb[j].abs());
                    j += 1;
                }
            }
        }
        defect
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Assembled linear system. `symmetric` records what the discretization
/// promises (penalty choice), not a numeric check; solvers use it to pick
/// between conjugate gradients and a nonsymmetric Krylov method.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub symmetric: bool,
    /// Set when no Dirichlet face was seen during assembly, so the operator
    /// has the constant in its kernel and the system is singular up to
    /// compatibility of the data.
    pub pure_neumann_warning: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dense(m: &CsrMatrix) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; m.ncols]; m.nrows];
        for r in 0..m.nrows {
            let (cols, vals) = m.row(r);
            for (c, v) in cols.iter().zip(vals) {
                d[r][*c] += v;
            }
        }
        d
    }

    #[test]
    fn duplicate_triplets_are_accumulated() {
        let mut coo = CooMatrix::new(2, 2);
        coo.push(0, 0, 1.0);
        coo.push(0, 1, 2.0);
        coo.push(0, 0, 3.0);
        coo.push(1, 1, -1.0);
        let csr = coo.to_csr();
        assert_eq!(csr.nnz(), 3);
        assert_eq!(dense(&csr), vec![vec![4.0, 2.0], vec![0.0, -1.0]]);
    }

    #[test]
    fn empty_rows_are_preserved() {
        let mut coo = CooMatrix::new(4, 3);
        coo.push(0, 2, 5.0);
        coo.push(3, 0, -2.0);
        let csr = coo.to_csr();
        assert_eq!(csr.row(1).0.len(), 0);
        assert_eq!(csr.row(2).0.len(), 0);
        let mut y = vec![0.0; 4];
        csr.matvec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![5.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn matvec_matches_dense_product() {
        let mut coo = CooMatrix::new(3, 3);
        let a = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        for (r, row) in a.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                coo.push(r, c, *v);
            }
        }
        let csr = coo.to_csr();
        let x = [1.0, 2.0, 3.0];
        let mut y = vec![0.0; 3];
        csr.matvec(&x, &mut y);
        assert_eq!(y, vec![0.0, 0.0, 4.0]);
        assert_eq!(csr.diagonal(), vec![2.0, 2.0, 2.0]);
        assert_abs_diff_eq!(csr.symmetry_defect(), 0.0);
    }

    #[test]
    fn add_scaled_combines_different_patterns() {
        let mut a = CooMatrix::new(2, 2);
        a.push(0, 0, 1.0);
        let mut b = CooMatrix::new(2, 2);
        b.push(1, 1, 2.0);
        b.push(0, 0, 1.0);
        let sum = a.to_csr().add_scaled(3.0, &b.to_csr()).unwrap();
        assert_eq!(dense(&sum), vec![vec![4.0, 0.0], vec![0.0, 6.0]]);
    }

    #[test]
    fn transpose_and_symmetry_defect() {
        let mut coo = CooMatrix::new(2, 2);
        coo.push(0, 1, 1.0);
        let m = coo.to_csr();
        assert_abs_diff_eq!(m.symmetry_defect(), 1.0);
        let t = m.transpose();
        assert_eq!(t.row(1).0, &[0usize][..]);
        assert_abs_diff_eq!(m.add_scaled(1.0, &t).unwrap().symmetry_defect(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn assembly_order_does_not_change_matrix(
            mut entries in proptest::collection::vec((0usize..6, 0usize..6, -5.0f64..5.0), 1..40),
            seed in 0u64..1000,
        ) {
            let mut a = CooMatrix::new(6, 6);
            for (r, c, v) in &entries {
                a.push(*r, *c, *v);
            }
            // Deterministic shuffle of the insertion order.
            use rand::{SeedableRng, seq::SliceRandom};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            entries.shuffle(&mut rng);
            let mut b = CooMatrix::new(6, 6);
            for (r, c, v) in &entries {
                b.push(*r, *c, *v);
            }
            let (ca, cb) = (a.to_csr(), b.to_csr());
            prop_assert_eq!(ca.row_ptr, cb.row_ptr);
            prop_assert_eq!(ca.col_idx, cb.col_idx);
            for (x, y) in ca.values.iter().zip(&cb.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
