//! Mesh-refinement convergence studies and the rate-optimality check used
//! by the penalty search.

use crate::cases::ManufacturedCase;
use crate::error::{Error, Result};
use crate::flow::{assemble_flow_blocks, elliptic_from_blocks, FlowBlocks, SchemeConfig};
use crate::mesh::Mesh;
use crate::solve::{default_max_iter, solve_direct, solve_krylov, SolverKind, KRYLOV_TOL};
use crate::space::DgSpace;

pub const DEFAULT_CYCLES: usize = 6;
pub const DEFAULT_H0: f64 = 6.25e-2;

/// Below this H1 error the exact solution is resolved to roundoff and
/// log2 error ratios are noise, so the study counts as optimal outright.
pub const EXACT_IN_SPACE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct StudyRow {
    pub h: f64,
    pub dofs: usize,
    pub h1_error: f64,
    pub l2_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<StudyRow>,
    /// rates[i] = log2(e_i / e_{i+1}) between consecutive rows.
    pub h1_rates: Vec<f64>,
    pub l2_rates: Vec<f64>,
}

impl ConvergenceStudy {
    pub fn mean_last_h1_rates(&self, n: usize) -> f64 {
        let m = self.h1_rates.len();
        if n == 0 || m < n {
            return f64::NAN;
        }
        self.h1_rates[m - n..].iter().sum::<f64>() / n as f64
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| !r.converged)
    }
}

fn rate(coarse: f64, fine: f64) -> f64 {
    if coarse.is_finite() && fine.is_finite() && coarse > 0.0 && fine > 0.0 {
        (coarse / fine).log2()
    } else {
        f64::NAN
    }
}

/// One refinement level with its beta-independent assembly blocks, so a
/// penalty sweep pays for assembly once per mesh.
pub struct CachedCycle {
    pub mesh: Mesh,
    pub blocks: FlowBlocks,
    pub h: f64,
    pub degree: usize,
}

/// Builds the h0, h0/2, ... mesh hierarchy for a case and assembles the
/// scheme-independent blocks on each level.
pub fn precompute_cycles(
    case: &ManufacturedCase,
    degree: usize,
    n_cycles: usize,
    h0: f64,
) -> Result<Vec<CachedCycle>> {
    if n_cycles == 0 {
        return Err(Error::InvalidArgument("need at least one refinement cycle".into()));
    }
    if !(h0 > 0.0) || h0 > 1.0 {
        return Err(Error::InvalidArgument(format!("h0 must lie in (0, 1], got {h0}")));
    }
    let n0 = (1.0 / h0).round().max(1.0) as usize;
    let mut cycles = Vec::with_capacity(n_cycles);
    for i in 0..n_cycles {
        let n = n0 << i;
        let mesh = case.build_mesh(n)?;
        let h = 1.0 / n as f64;
        let blocks = {
            let space = DgSpace::new(&mesh, degree)?;
            assemble_flow_blocks(&space, &case.problem)?
        };
        cycles.push(CachedCycle { mesh, blocks, h, degree });
    }
    Ok(cycles)
}

/// Runs the solve-and-measure half of a study on prebuilt cycles.
pub fn study_from_cycles(
    cycles: &[CachedCycle],
    case: &ManufacturedCase,
    scheme: &SchemeConfig,
    solver: SolverKind,
) -> Result<ConvergenceStudy> {
    let mut rows = Vec::with_capacity(cycles.len());
    for cycle in cycles {
        if cycle.degree != scheme.degree {
            return Err(Error::InvalidArgument(format!(
                "cycle assembled at degree {}, scheme wants {}",
                cycle.degree, scheme.degree
            )));
        }
        let space = DgSpace::new(&cycle.mesh, scheme.degree)?;
        let system = elliptic_from_blocks(&cycle.blocks, scheme)?;
        let solved = match solver {
            SolverKind::Direct => solve_direct(&system),
            SolverKind::Iterative => {
                Ok(solve_krylov(&system, KRYLOV_TOL, default_max_iter(system.matrix.nrows)))
            }
        };
        let row = match solved {
            Ok((x, report)) => {
                let norms = space.error_norms(&x, |p| (case.exact)(p), |p| (case.exact_grad)(p));
                StudyRow {
                    h: cycle.h,
                    dofs: space.ndof(),
                    h1_error: norms.h1_semi,
                    l2_error: norms.l2,
                    iterations: report.iterations,
                    converged: report.converged,
                }
            }
            // Solver failure is data: the row is kept with infinite error.
            Err(_) => StudyRow {
                h: cycle.h,
                dofs: space.ndof(),
                h1_error: f64::INFINITY,
                l2_error: f64::INFINITY,
                iterations: 0,
                converged: false,
            },
        };
        rows.push(row);
    }
    let h1_rates: Vec<f64> =
        rows.windows(2).map(|w| rate(w[0].h1_error, w[1].h1_error)).collect();
    let l2_rates: Vec<f64> =
        rows.windows(2).map(|w| rate(w[0].l2_error, w[1].l2_error)).collect();
    Ok(ConvergenceStudy { rows, h1_rates, l2_rates })
}

/// Full study: build the mesh hierarchy, assemble, solve, and measure
/// errors on every level.
pub fn run_convergence_study(
    case: &ManufacturedCase,
    scheme: &SchemeConfig,
    solver: SolverKind,
    n_cycles: usize,
    h0: f64,
) -> Result<ConvergenceStudy> {
    let cycles = precompute_cycles(case, scheme.degree, n_cycles, h0)?;
    study_from_cycles(&cycles, case, scheme, solver)
}

/// A study counts as rate-optimal when nothing failed and the tail of the
/// H1 rate sequence reaches the expected order k (0.1 slack), or the error
/// has already hit the exact-in-space floor.
pub fn is_rate_optimal(study: &ConvergenceStudy, k: usize) -> bool {
    if study.rows.len() < 3 || study.any_failed() {
        return false;
    }
    let last = study.rows.last().expect("nonempty rows");
    if !last.h1_error.is_finite() {
        return false;
    }
    if last.h1_error <= EXACT_IN_SPACE_FLOOR {
        return true;
    }
    let mean = study.mean_last_h1_rates(2);
    mean.is_finite() && mean >= k as f64 - 0.1
}
