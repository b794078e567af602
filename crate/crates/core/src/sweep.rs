//! Parameter sweeps: the shrinking-penalty search for the lowest stable
//! beta, iteration profiling over (theta, kappa, beta, h, k) grids, and
//! the one-step Biot quality sweep. Sweep outputs are the training data
//! for the regression and classification models, serialized as CSV.

use crate::biot::{classify_quality, layered_column, step_biot, BiotStepConfig};
use crate::cases::{manufactured_elliptic_case, CaseSpec, ManufacturedCase};
use crate::error::{Error, Result};
use crate::flow::SchemeConfig;
use crate::solve::{default_max_iter, SolverKind};
use crate::space::{CgVectorSpace, DgSpace};
use crate::study::{is_rate_optimal, precompute_cycles, study_from_cycles, StudyRow};
use rayon::prelude::*;
use std::io::Write;

/// Geometric grid with n points from lo to hi inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "log grid endpoints must be positive, got {lo} and {hi}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("log grid needs at least one point".into()));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let ratio = hi / lo;
    Ok((0..n).map(|i| lo * ratio.powf(i as f64 / (n - 1) as f64)).collect())
}

/// Controls the shrinking search: beta walks the exact geometric sequence
/// beta0 * shrink^n and the study runs on an h0, h0/2, ... hierarchy.
#[derive(Debug, Clone, Copy)]
pub struct BetaSearchConfig {
    pub beta0: f64,
    pub shrink: f64,
    pub n_cycles: usize,
    pub h0: f64,
    pub max_steps: usize,
    pub solver: SolverKind,
}

impl Default for BetaSearchConfig {
    fn default() -> Self {
        BetaSearchConfig {
            beta0: 100.0,
            shrink: 0.99,
            n_cycles: 3,
            h0: 0.25,
            max_steps: 2000,
            solver: SolverKind::Direct,
        }
    }
}

/// Walks beta down from beta0 while the convergence study stays
/// rate-optimal; returns the last optimal beta. Assembly is shared across
/// the whole walk, so each step costs one matrix merge and solve per mesh.
///
/// Schemes whose rate never degrades (the incomplete variant keeps its
/// order as beta -> 0, only the error constant blows up) exhaust the walk
/// and return the final visited value, beta0 * shrink^(max_steps - 1).
pub fn find_beta_min(
    case: &ManufacturedCase,
    theta: i8,
    degree: usize,
    cfg: &BetaSearchConfig,
) -> Result<f64> {
    if !(cfg.shrink > 0.0 && cfg.shrink < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "shrink factor must lie in (0, 1), got {}",
            cfg.shrink
        )));
    }
    let cycles = precompute_cycles(case, degree, cfg.n_cycles, cfg.h0)?;
    let mut last_ok = None;
    for step in 0..cfg.max_steps {
        let beta = cfg.beta0 * cfg.shrink.powi(step as i32);
        let scheme = SchemeConfig::new(theta, beta, degree)?;
        let study = study_from_cycles(&cycles, case, &scheme, cfg.solver)?;
        if is_rate_optimal(&study, degree) {
            last_ok = Some(beta);
        } else {
            break;
        }
    }
    last_ok.ok_or_else(|| {
        Error::NoStableBeta(format!(
            "study is not rate-optimal even at beta0 = {} (theta {theta}, degree {degree})",
            cfg.beta0
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticRecord {
    pub theta: i8,
    pub kappa: f64,
    pub beta: f64,
    pub h: f64,
    pub k: usize,
    pub iterations: usize,
    pub converged: bool,
    pub rate_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterogeneousRecord {
    pub theta: i8,
    pub kappa0: f64,
    pub kappa1: f64,
    pub beta: f64,
    pub h: f64,
    pub k: usize,
    pub iterations: usize,
    pub converged: bool,
    pub rate_ok: bool,
}

/// Which smooth 2D case family a scalar-kappa sweep runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarCaseKind {
    Continuous2D,
    HeterogeneousContinuous2D,
}

impl ScalarCaseKind {
    fn build(&self, kappa: f64) -> Result<ManufacturedCase> {
        let spec = match self {
            ScalarCaseKind::Continuous2D => CaseSpec::Continuous2D { kappa },
            ScalarCaseKind::HeterogeneousContinuous2D => {
                CaseSpec::HeterogeneousContinuous2D { kappa }
            }
        };
        manufactured_elliptic_case(spec)
    }
}

#[derive(Debug, Clone)]
pub struct EllipticSweepConfig {
    pub kind: ScalarCaseKind,
    pub thetas: Vec<i8>,
    pub degrees: Vec<usize>,
    pub kappas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Mesh hierarchy: h_levels meshes halving from h0. Studies need at
    /// least three levels for a meaningful rate_ok column.
    pub h_levels: usize,
    pub h0: f64,
    pub solver: SolverKind,
}

impl Default for EllipticSweepConfig {
    fn default() -> Self {
        // Desk-scale grid: 2 x 10 x 25 x 4 = 2000 records.
        EllipticSweepConfig {
            kind: ScalarCaseKind::Continuous2D,
            thetas: vec![1, 0],
            degrees: vec![1],
            kappas: log_grid(1e-6, 1.0, 10).expect("static grid"),
            betas: log_grid(0.5, 100.0, 25).expect("static grid"),
            h_levels: 4,
            h0: 0.25,
            solver: SolverKind::Iterative,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeterogeneousSweepConfig {
    pub thetas: Vec<i8>,
    pub degrees: Vec<usize>,
    pub kappa0s: Vec<f64>,
    pub kappa1s: Vec<f64>,
    pub betas: Vec<f64>,
    pub h_levels: usize,
    pub h0: f64,
    pub solver: SolverKind,
}

impl Default for HeterogeneousSweepConfig {
    fn default() -> Self {
        // Desk-scale grid: 2 x 5 x 5 x 10 x 4 = 2000 records on the cheap
        // one-dimensional interface case.
        HeterogeneousSweepConfig {
            thetas: vec![1, 0],
            degrees: vec![1],
            kappa0s: log_grid(1e-4, 1.0, 5).expect("static grid"),
            kappa1s: log_grid(1e-4, 1.0, 5).expect("static grid"),
            betas: log_grid(0.5, 100.0, 10).expect("static grid"),
            h_levels: 4,
            h0: 6.25e-2,
            solver: SolverKind::Iterative,
        }
    }
}

fn grids_nonempty(sizes: &[(usize, &str)]) -> Result<()> {
    for (len, name) in sizes {
        if *len == 0 {
            return Err(Error::InvalidArgument(format!("{name} grid is empty")));
        }
    }
    Ok(())
}

/// Iterations/quality rows for one (case, degree, theta, beta) study on a
/// shared mesh hierarchy. Non-converged rows report the iteration cap.
fn study_rows(
    cycles: &[crate::study::CachedCycle],
    case: &ManufacturedCase,
    scheme: &SchemeConfig,
    solver: SolverKind,
    degree: usize,
) -> Result<(Vec<StudyRow>, bool)> {
    let study = study_from_cycles(cycles, case, scheme, solver)?;
    let rate_ok = is_rate_optimal(&study, degree);
    Ok((study.rows, rate_ok))
}

fn recorded_iterations(row: &StudyRow) -> usize {
    if row.converged {
        row.iterations
    } else {
        default_max_iter(row.dofs)
    }
}

/// Cartesian iteration profile on a scalar-kappa case family. Record
/// order is theta-major, then degree, kappa, beta, and h; rayon workers
/// change only wall time, never the order.
pub fn profile_iterations(cfg: &EllipticSweepConfig) -> Result<Vec<EllipticRecord>> {
    grids_nonempty(&[
        (cfg.thetas.len(), "theta"),
        (cfg.degrees.len(), "degree"),
        (cfg.kappas.len(), "kappa"),
        (cfg.betas.len(), "beta"),
        (cfg.h_levels, "h"),
    ])?;
    let mut records = Vec::new();
    for &degree in &cfg.degrees {
        for &kappa in &cfg.kappas {
            let case = cfg.kind.build(kappa)?;
            let cycles = precompute_cycles(&case, degree, cfg.h_levels, cfg.h0)?;
            let jobs: Vec<(i8, f64)> = cfg
                .thetas
                .iter()
                .flat_map(|&t| cfg.betas.iter().map(move |&b| (t, b)))
                .collect();
            let solved: Result<Vec<_>> = jobs
                .par_iter()
                .map(|&(theta, beta)| {
                    let scheme = SchemeConfig::new(theta, beta, degree)?;
                    study_rows(&cycles, &case, &scheme, cfg.solver, degree)
                })
                .collect();
            for ((theta, beta), (rows, rate_ok)) in jobs.into_iter().zip(solved?) {
                for row in &rows {
                    records.push(EllipticRecord {
                        theta,
                        kappa,
                        beta,
                        h: row.h,
                        k: degree,
                        iterations: recorded_iterations(row),
                        converged: row.converged,
                        rate_ok,
                    });
                }
            }
        }
    }
    // Canonical order regardless of the kappa-outer assembly loop.
    records.sort_by(|a, b| {
        (b.theta, a.k, a.kappa, a.beta, b.h)
            .partial_cmp(&(a.theta, b.k, b.kappa, b.beta, a.h))
            .expect("finite grid keys")
    });
    Ok(records)
}

/// Iteration profile on the one-dimensional interface case over
/// independent coefficient grids for the two zones.
pub fn profile_iterations_heterogeneous(
    cfg: &HeterogeneousSweepConfig,
) -> Result<Vec<HeterogeneousRecord>> {
    grids_nonempty(&[
        (cfg.thetas.len(), "theta"),
        (cfg.degrees.len(), "degree"),
        (cfg.kappa0s.len(), "kappa0"),
        (cfg.kappa1s.len(), "kappa1"),
        (cfg.betas.len(), "beta"),
        (cfg.h_levels, "h"),
    ])?;
    let mut records = Vec::new();
    for &degree in &cfg.degrees {
        for &kappa0 in &cfg.kappa0s {
            for &kappa1 in &cfg.kappa1s {
                let case = manufactured_elliptic_case(CaseSpec::Discontinuous1D {
                    kappa_left: kappa0,
                    kappa_right: kappa1,
                })?;
                let cycles = precompute_cycles(&case, degree, cfg.h_levels, cfg.h0)?;
                let jobs: Vec<(i8, f64)> = cfg
                    .thetas
                    .iter()
                    .flat_map(|&t| cfg.betas.iter().map(move |&b| (t, b)))
                    .collect();
                let solved: Result<Vec<_>> = jobs
                    .par_iter()
                    .map(|&(theta, beta)| {
                        let scheme = SchemeConfig::new(theta, beta, degree)?;
                        study_rows(&cycles, &case, &scheme, cfg.solver, degree)
                    })
                    .collect();
                for ((theta, beta), (rows, rate_ok)) in jobs.into_iter().zip(solved?) {
                    for row in &rows {
                        records.push(HeterogeneousRecord {
                            theta,
                            kappa0,
                            kappa1,
                            beta,
                            h: row.h,
                            k: degree,
                            iterations: recorded_iterations(row),
                            converged: row.converged,
                            rate_ok,
                        });
                    }
                }
            }
        }
    }
    records.sort_by(|a, b| {
        (b.theta, a.k, a.kappa0, a.kappa1, a.beta, b.h)
            .partial_cmp(&(a.theta, b.k, b.kappa0, b.kappa1, b.beta, a.h))
            .expect("finite grid keys")
    });
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiotSweepRecord {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa_mult: f64,
    pub beta: f64,
    pub h: f64,
    pub bool_quality: u8,
}

#[derive(Debug, Clone)]
pub struct BiotSweepConfig {
    pub kappa1s: Vec<f64>,
    pub kappa_mults: Vec<f64>,
    pub hs: Vec<f64>,
    pub betas: Vec<f64>,
    pub dt: f64,
    pub theta: i8,
    pub degree: usize,
    pub solver: SolverKind,
}

impl Default for BiotSweepConfig {
    fn default() -> Self {
        // Desk-scale grid: 4 x 5 x 3 x 25 = 1500 one-step column runs.
        BiotSweepConfig {
            kappa1s: log_grid(1e-14, 1e-8, 4).expect("static grid"),
            kappa_mults: log_grid(1e-8, 1e1, 5).expect("static grid"),
            hs: vec![6.25e-2, 3.125e-2, 1.5625e-2],
            betas: log_grid(1e-2, 1e2, 25).expect("static grid"),
            dt: 1.0,
            theta: 1,
            degree: 1,
            solver: SolverKind::Direct,
        }
    }
}

/// One record of `cfg`, by grid indices. Each point builds the column,
/// takes a single staggered step from the undrained initial state, and
/// classifies the first-step pressure profile.
fn biot_point(cfg: &BiotSweepConfig, i: usize, j: usize, k: usize, l: usize) -> Result<BiotSweepRecord> {
    let kappa1 = cfg.kappa1s[i];
    let kappa_mult = cfg.kappa_mults[j];
    let h = cfg.hs[k];
    let beta = cfg.betas[l];
    let kappa2 = kappa_mult * kappa1;
    let n = (1.0 / h).round().max(1.0) as usize;
    let setup = layered_column(n, kappa1, kappa2, cfg.dt)?;
    let p_space = DgSpace::new(&setup.mesh, cfg.degree)?;
    let u_space = CgVectorSpace::new(&setup.mesh, 1)?;
    let state = setup.initial_state(&p_space, &u_space);
    let scheme = SchemeConfig::new(cfg.theta, beta, cfg.degree)?;
    let step_cfg = BiotStepConfig { solver: cfg.solver, ..BiotStepConfig::default() };
    let (next, report) =
        step_biot(&state, &p_space, &u_space, &setup.flow, &setup.mech, &scheme, &step_cfg)?;
    let verdict =
        classify_quality(&p_space, &next.p, &report.combined(), setup.quality_bounds())?;
    Ok(BiotSweepRecord {
        kappa1,
        kappa2,
        kappa_mult,
        beta,
        h: 1.0 / n as f64,
        bool_quality: verdict.bool_quality,
    })
}

/// Full Biot quality sweep, kappa1-major like the measurement loop it
/// reproduces: kappa1, then kappa_mult, then h, then beta.
pub fn sweep_biot(cfg: &BiotSweepConfig) -> Result<Vec<BiotSweepRecord>> {
    grids_nonempty(&[
        (cfg.kappa1s.len(), "kappa1"),
        (cfg.kappa_mults.len(), "kappa_mult"),
        (cfg.hs.len(), "h"),
        (cfg.betas.len(), "beta"),
    ])?;
    let mut indices = Vec::new();
    for i in 0..cfg.kappa1s.len() {
        for j in 0..cfg.kappa_mults.len() {
            for k in 0..cfg.hs.len() {
                for l in 0..cfg.betas.len() {
                    indices.push((i, j, k, l));
                }
            }
        }
    }
    indices
        .par_iter()
        .map(|&(i, j, k, l)| biot_point(cfg, i, j, k, l))
        .collect()
}

const ELLIPTIC_HEADER: [&str; 8] =
    ["theta", "kappa", "beta", "h", "k", "iterations", "converged", "rate_ok"];
const HETEROGENEOUS_HEADER: [&str; 9] =
    ["theta", "kappa0", "kappa1", "beta", "h", "k", "iterations", "converged", "rate_ok"];
const BIOT_HEADER: [&str; 6] = ["kappa1", "kappa2", "kappa_mult", "beta", "h", "bool_quality"];

pub fn write_elliptic_csv<W: Write>(out: W, records: &[EllipticRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ELLIPTIC_HEADER)?;
    for r in records {
        w.write_record(&[
            r.theta.to_string(),
            r.kappa.to_string(),
            r.beta.to_string(),
            r.h.to_string(),
            r.k.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.rate_ok.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_heterogeneous_csv<W: Write>(out: W, records: &[HeterogeneousRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HETEROGENEOUS_HEADER)?;
    for r in records {
        w.write_record(&[
            r.theta.to_string(),
            r.kappa0.to_string(),
            r.kappa1.to_string(),
            r.beta.to_string(),
            r.h.to_string(),
            r.k.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            r.rate_ok.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_biot_csv<W: Write>(out: W, records: &[BiotSweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BIOT_HEADER)?;
    for r in records {
        w.write_record(&[
            r.kappa1.to_string(),
            r.kappa2.to_string(),
            r.kappa_mult.to_string(),
            r.beta.to_string(),
            r.h.to_string(),
            r.bool_quality.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
