//! Direct and iterative solution of the assembled systems, with iteration
//! counts reported so sweeps can use solver cost as a measured output.
//!
//! The iterative path is Jacobi-preconditioned: conjugate gradients when the
//! assembly promises symmetry, a stabilized bi-conjugate method otherwise.
//! Iteration counts are deterministic for a fixed system since x0 = 0 and
//! the preconditioner has no setup randomness.

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, LinearSystem};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

pub const KRYLOV_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub solver_kind: SolverKind,
}

/// LU factorization via `faer`. Residuals beyond 1e-10 relative are treated
/// as non-convergence rather than silently returned.
pub fn solve_direct(system: &LinearSystem) -> Result<(Vec<f64>, SolveReport)> {
    let a = &system.matrix;
    if a.nrows != a.ncols {
        return Err(Error::InvalidArgument("direct solver needs a square matrix".into()));
    }
    let n = a.nrows;
    let b_norm = norm(&system.rhs);
    if b_norm == 0.0 {
        let report = SolveReport {
            converged: true,
            iterations: 0,
            final_residual: 0.0,
            solver_kind: SolverKind::Direct,
        };
        return Ok((vec![0.0; n], report));
    }
    let mut trips = Vec::with_capacity(a.nnz());
    for r in 0..n {
        let (cols, vals) = a.row(r);
        for (c, v) in cols.iter().zip(vals) {
            trips.push(Triplet::new(r, *c, *v));
        }
    }
    let fa = SparseColMat::try_new_from_triplets(n, n, &trips)
        .map_err(|e| Error::InvalidArgument(format!("bad sparse structure: {e:?}")))?;
    // faer asserts on exactly singular pivots instead of returning Err;
    // treat that as a singular-system error.
    let lu = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| fa.sp_lu()))
        .map_err(|_| Error::SingularSystem("LU factorization panicked on a singular pivot".into()))?
        .map_err(|_| Error::SingularSystem("LU factorization failed (singular matrix)".into()))?;
    let rhs = Mat::from_fn(n, 1, |i, _| system.rhs[i]);
    let x_mat = lu.solve(&rhs);
    let x: Vec<f64> = (0..n).map(|i| x_mat[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("solution contains non-finite entries".into()));
    }
    let mut resid = vec![0.0; n];
    a.matvec(&x, &mut resid);
    for (ri, bi) in resid.iter_mut().zip(&system.rhs) {
        *ri -= bi;
    }
    let rel = norm(&resid) / b_norm;
    let report = SolveReport {
        converged: rel <= 1e-10,
        iterations: 0,
        final_residual: rel,
        solver_kind: SolverKind::Direct,
    };
    Ok((x, report))
}

/// Jacobi-preconditioned Krylov solve; `tol` is relative to the rhs norm.
/// Breakdown is reported through the `converged` flag, never a panic.
pub fn solve_krylov(system: &LinearSystem, tol: f64, max_iter: usize) -> (Vec<f64>, SolveReport) {
    let n = system.matrix.nrows;
    let b_norm = norm(&system.rhs);
    if b_norm == 0.0 {
        let report = SolveReport {
            converged: true,
            iterations: 0,
            final_residual: 0.0,
            solver_kind: SolverKind::Iterative,
        };
        return (vec![0.0; n], report);
    }
    let precond = jacobi_inverse(&system.matrix);
    if system.symmetric {
        pcg(&system.matrix, &system.rhs, &precond, tol, max_iter, b_norm)
    } else {
        bicgstab(&system.matrix, &system.rhs, &precond, tol, max_iter, b_norm)
    }
}

/// Default iteration cap used by the sweep drivers.
pub fn default_max_iter(ndof: usize) -> usize {
    10 * ndof
}

fn jacobi_inverse(a: &CsrMatrix) -> Vec<f64> {
    a.diagonal()
        .into_iter()
        .map(|d| if d.abs() > f64::MIN_POSITIVE { 1.0 / d.abs() } else { 1.0 })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    minv: &[f64],
    tol: f64,
    max_iter: usize,
    b_norm: f64,
) -> (Vec<f64>, SolveReport) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(minv).map(|(ri, mi)| ri * mi).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut rel = norm(&r) / b_norm;
    while rel > tol && iterations < max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap.abs() < f64::MIN_POSITIVE || !pap.is_finite() {
            return breakdown(x, iterations, rel);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
        rel = norm(&r) / b_norm;
        if !rel.is_finite() {
            return breakdown(x, iterations, rel);
        }
    }
    let report = SolveReport {
        converged: rel <= tol,
        iterations,
        final_residual: rel,
        solver_kind: SolverKind::Iterative,
    };
    (x, report)
}

fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    minv: &[f64],
    tol: f64,
    max_iter: usize,
    b_norm: f64,
) -> (Vec<f64>, SolveReport) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho: f64 = 1.0;
    let mut alpha: f64 = 1.0;
    let mut omega: f64 = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut iterations = 0;
    let mut rel = norm(&r) / b_norm;
    let mut phat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];
    while rel > tol && iterations < max_iter {
        let rho_next = dot(&r0, &r);
        if rho_next.abs() < f64::MIN_POSITIVE || omega.abs() < f64::MIN_POSITIVE {
            return breakdown(x, iterations, rel);
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        for i in 0..n {
            phat[i] = p[i] * minv[i];
        }
        a.matvec(&phat, &mut v);
        let r0v = dot(&r0, &v);
        if r0v.abs() < f64::MIN_POSITIVE {
            return breakdown(x, iterations, rel);
        }
        alpha = rho / r0v;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / b_norm <= tol {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            iterations += 1;
            rel = norm(&s) / b_norm;
            break;
        }
        for i in 0..n {
            shat[i] = s[i] * minv[i];
        }
        a.matvec(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt.abs() < f64::MIN_POSITIVE {
            return breakdown(x, iterations, rel);
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        iterations += 1;
        rel = norm(&r) / b_norm;
        if !rel.is_finite() {
            return breakdown(x, iterations, rel);
        }
    }
    let report = SolveReport {
        converged: rel <= tol,
        iterations,
        final_residual: rel,
        solver_kind: SolverKind::Iterative,
    };
    (x, report)
}

fn breakdown(x: Vec<f64>, iterations: usize, rel: f64) -> (Vec<f64>, SolveReport) {
    let report = SolveReport {
        converged: false,
        iterations,
        final_residual: rel,
        solver_kind: SolverKind::Iterative,
    };
    (x, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CooMatrix;
    use approx::assert_abs_diff_eq;

    fn system_from_dense(a: &[&[f64]], b: &[f64], symmetric: bool) -> LinearSystem {
        let n = a.len();
        let mut coo = CooMatrix::new(n, n);
        for (r, row) in a.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                coo.push(r, c, *v);
            }
        }
        LinearSystem {
            matrix: coo.to_csr(),
            rhs: b.to_vec(),
            symmetric,
            pure_neumann_warning: false,
        }
    }

    #[test]
    fn direct_solves_identity() {
        let sys = system_from_dense(&[&[1.0, 0.0], &[0.0, 1.0]], &[3.0, -2.0], true);
        let (x, rep) = solve_direct(&sys).unwrap();
        assert_eq!(x, vec![3.0, -2.0]);
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn direct_matches_hand_elimination() {
        let sys = system_from_dense(&[&[2.0, 1.0], &[1.0, 3.0]], &[3.0, 5.0], true);
        let (x, rep) = solve_direct(&sys).unwrap();
        assert_abs_diff_eq!(x[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.4, epsilon = 1e-12);
        assert!(rep.converged && rep.final_residual <= 1e-10);
    }

    #[test]
    fn direct_rejects_singular_matrix() {
        let sys = system_from_dense(&[&[1.0, 2.0], &[2.0, 4.0]], &[1.0, 2.0], true);
        let out = solve_direct(&sys);
        match out {
            Err(Error::SingularSystem(_)) => {}
            Ok((_, rep)) => assert!(!rep.converged),
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn cg_converges_on_identity_in_one_iteration() {
        let sys = system_from_dense(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 2.0], true);
        let (x, rep) = solve_krylov(&sys, KRYLOV_TOL, 100);
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn cg_terminates_within_n_iterations_on_spd_diagonal() {
        let n = 10;
        let mut coo = CooMatrix::new(n, n);
        for i in 0..n {
            coo.push(i, i, (i + 1) as f64);
        }
        let sys = LinearSystem {
            matrix: coo.to_csr(),
            rhs: vec![1.0; n],
            symmetric: true,
            pure_neumann_warning: false,
        };
        let (x, rep) = solve_krylov(&sys, 1e-12, 1000);
        assert!(rep.converged);
        assert!(rep.iterations <= n);
        for i in 0..n {
            assert_abs_diff_eq!(x[i], 1.0 / (i + 1) as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn bicgstab_solves_nonsymmetric_system() {
        let sys = system_from_dense(
            &[&[4.0, 1.0, 0.0], &[-1.0, 4.0, 1.0], &[0.0, -1.0, 4.0]],
            &[5.0, 4.0, 3.0],
            false,
        );
        let (x, rep) = solve_krylov(&sys, 1e-10, 100);
        assert!(rep.converged);
        let (xd, _) = solve_direct(&sys).unwrap();
        for (a, b) in x.iter().zip(&xd) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-7);
        }
        assert!(rep.iterations >= 1);
    }

    #[test]
    fn zero_rhs_returns_zero_without_iterating() {
        let sys = system_from_dense(&[&[2.0, 1.0], &[1.0, 3.0]], &[0.0, 0.0], true);
        let (x, rep) = solve_krylov(&sys, KRYLOV_TOL, 100);
        assert_eq!(x, vec![0.0, 0.0]);
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        let (xd, repd) = solve_direct(&sys).unwrap();
        assert_eq!(xd, vec![0.0, 0.0]);
        assert!(repd.converged);
    }

    #[test]
    fn iteration_count_is_deterministic() {
        let n = 50;
        let mut coo = CooMatrix::new(n, n);
        for i in 0..n {
            coo.push(i, i, 2.0 + (i as f64) * 0.1);
            if i + 1 < n {
                coo.push(i, i + 1, -1.0);
                coo.push(i + 1, i, -1.0);
            }
        }
        let sys = LinearSystem {
            matrix: coo.to_csr(),
            rhs: (0..n).map(|i| (i as f64).sin()).collect(),
            symmetric: true,
            pure_neumann_warning: false,
        };
        let (_, r1) = solve_krylov(&sys, KRYLOV_TOL, 10 * n);
        let (_, r2) = solve_krylov(&sys, KRYLOV_TOL, 10 * n);
        assert!(r1.converged);
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(r1.final_residual, r2.final_residual);
    }

    #[test]
    fn krylov_and_direct_agree_on_spd_system() {
        let sys = system_from_dense(
            &[&[10.0, 2.0, 1.0], &[2.0, 8.0, 3.0], &[1.0, 3.0, 6.0]],
            &[1.0, -2.0, 0.5],
            true,
        );
        let (xi, ri) = solve_krylov(&sys, KRYLOV_TOL, 100);
        let (xd, _) = solve_direct(&sys).unwrap();
        assert!(ri.converged);
        let diff: f64 = xi.iter().zip(&xd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = xd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff / scale < 1e-6);
    }

    #[test]
    fn stalled_iteration_reports_failure_not_wrong_answer() {
        // Indefinite symmetric matrix: plain CG is not guaranteed; the
        // report must not claim convergence unless the residual really is
        // small.
        let sys = system_from_dense(&[&[1.0, 2.0], &[2.0, 1.0]], &[1.0, 1.0], true);
        let (x, rep) = solve_krylov(&sys, 1e-12, 3);
        if rep.converged {
            let mut resid = vec![0.0; 2];
            sys.matrix.matvec(&x, &mut resid);
            for (ri, bi) in resid.iter_mut().zip(&sys.rhs) {
                *ri -= bi;
            }
            let rel = (resid[0].powi(2) + resid[1].powi(2)).sqrt() / 2f64.sqrt();
            assert!(rel <= 1e-10);
        }
    }
}
