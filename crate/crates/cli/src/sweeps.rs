//! The dataset-producing commands: `sweep-elliptic`, `sweep-biot` and
//! `profile-iterations`. Each writes a schema-stable CSV, a resolved
//! config and a JSON manifest; reruns with the same config are
//! byte-identical on the CSV.

use crate::config::{
    case_name, fmt_list, parse_case, parse_f64, parse_f64_list, parse_i8, parse_i8_list,
    parse_solver, parse_usize, parse_usize_list, solver_name, CaseKey, RunConfig,
};
use crate::manifest::{Manifest, RunPaths};
use anyhow::{bail, Context, Result};
use ipdg_core::solve::SolverKind;
use ipdg_core::sweep::{
    log_grid, profile_iterations, profile_iterations_heterogeneous, sweep_biot, write_biot_csv,
    write_elliptic_csv, write_heterogeneous_csv, BiotSweepConfig, EllipticSweepConfig,
    HeterogeneousSweepConfig, ScalarCaseKind,
};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

fn mesh_sizes(h0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|i| h0 / f64::powi(2.0, i as i32)).collect()
}

fn open_csv(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write '{}'", path.display()))?,
    ))
}

pub struct SweepEllipticConfig {
    pub case: CaseKey,
    pub thetas: Vec<i8>,
    pub degrees: Vec<usize>,
    pub kappas: Vec<f64>,
    pub kappa0s: Vec<f64>,
    pub kappa1s: Vec<f64>,
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub beta_points: usize,
    pub h_levels: usize,
    pub h0: f64,
    pub solver: SolverKind,
    pub out: String,
    pub out_dir: String,
}

impl Default for SweepEllipticConfig {
    fn default() -> Self {
        let core = EllipticSweepConfig::default();
        let pair = HeterogeneousSweepConfig::default();
        SweepEllipticConfig {
            case: CaseKey::Continuous2D,
            thetas: core.thetas,
            degrees: core.degrees,
            kappas: core.kappas,
            kappa0s: pair.kappa0s,
            kappa1s: pair.kappa1s,
            beta_lo: 0.5,
            beta_hi: 100.0,
            beta_points: 25,
            h_levels: core.h_levels,
            h0: core.h0,
            solver: core.solver,
            out: "elliptic".to_string(),
            out_dir: crate::config::default_out_dir(),
        }
    }
}

impl RunConfig for SweepEllipticConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "case" => self.case = parse_case(value)?,
            "thetas" => self.thetas = parse_i8_list(key, value)?,
            "degrees" => self.degrees = parse_usize_list(key, value)?,
            "kappas" => self.kappas = parse_f64_list(key, value)?,
            "kappa0s" => self.kappa0s = parse_f64_list(key, value)?,
            "kappa1s" => self.kappa1s = parse_f64_list(key, value)?,
            "beta_lo" => self.beta_lo = parse_f64(key, value)?,
            "beta_hi" => self.beta_hi = parse_f64(key, value)?,
            "beta_points" => self.beta_points = parse_usize(key, value)?,
            "h_levels" => self.h_levels = parse_usize(key, value)?,
            "h0" => self.h0 = parse_f64(key, value)?,
            "solver" => self.solver = parse_solver(value)?,
            "out" => self.out = value.to_string(),
            "out_dir" => self.out_dir = value.to_string(),
            _ => return Err(crate::config::unknown_key(key)),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(String, String)> {
        vec![
            ("case".into(), case_name(self.case).into()),
            ("thetas".into(), fmt_list(&self.thetas)),
            ("degrees".into(), fmt_list(&self.degrees)),
            ("kappas".into(), fmt_list(&self.kappas)),
            ("kappa0s".into(), fmt_list(&self.kappa0s)),
            ("kappa1s".into(), fmt_list(&self.kappa1s)),
            ("beta_lo".into(), self.beta_lo.to_string()),
            ("beta_hi".into(), self.beta_hi.to_string()),
            ("beta_points".into(), self.beta_points.to_string()),
            ("h_levels".into(), self.h_levels.to_string()),
            ("h0".into(), self.h0.to_string()),
            ("solver".into(), solver_name(self.solver).into()),
            ("out".into(), self.out.clone()),
            ("out_dir".into(), self.out_dir.clone()),
        ]
    }
}

pub fn run_sweep_elliptic(cfg: &SweepEllipticConfig) -> Result<i32> {
    let start = Instant::now();
    let betas = log_grid(cfg.beta_lo, cfg.beta_hi, cfg.beta_points)?;
    let paths = RunPaths::new(&cfg.out_dir, &cfg.out)?;
    let csv_path = paths.file("csv");

    let rows = match cfg.case {
        CaseKey::Discontinuous1D => {
            let core = HeterogeneousSweepConfig {
                thetas: cfg.thetas.clone(),
                degrees: cfg.degrees.clone(),
                kappa0s: cfg.kappa0s.clone(),
                kappa1s: cfg.kappa1s.clone(),
                betas: betas.clone(),
                h_levels: cfg.h_levels,
                h0: cfg.h0,
                solver: cfg.solver,
            };
            let records = profile_iterations_heterogeneous(&core)?;
            write_heterogeneous_csv(open_csv(&csv_path)?, &records)?;
            records.len()
        }
        CaseKey::Continuous2D | CaseKey::Heterogeneous2D => {
            let kind = if cfg.case == CaseKey::Continuous2D {
                ScalarCaseKind::Continuous2D
            } else {
                ScalarCaseKind::HeterogeneousContinuous2D
            };
            let core = EllipticSweepConfig {
                kind,
                thetas: cfg.thetas.clone(),
                degrees: cfg.degrees.clone(),
                kappas: cfg.kappas.clone(),
                betas: betas.clone(),
                h_levels: cfg.h_levels,
                h0: cfg.h0,
                solver: cfg.solver,
            };
            let records = profile_iterations(&core)?;
            write_elliptic_csv(open_csv(&csv_path)?, &records)?;
            records.len()
        }
    };

    paths.write_resolved(&cfg.entries())?;
    let mut manifest = Manifest::new("sweep-elliptic", rows)
        .grid("thetas", &cfg.thetas)
        .grid("degrees", &cfg.degrees)
        .grid("betas", &betas)
        .grid("h", &mesh_sizes(cfg.h0, cfg.h_levels))
        .output(&csv_path);
    match cfg.case {
        CaseKey::Discontinuous1D => {
            manifest = manifest.grid("kappa0s", &cfg.kappa0s).grid("kappa1s", &cfg.kappa1s);
        }
        _ => manifest = manifest.grid("kappas", &cfg.kappas),
    }
    manifest.wall_ms = start.elapsed().as_millis() as u64;
    manifest.write(&paths)?;
    println!("wrote {rows} rows to {} in {:.1} s", csv_path.display(), start.elapsed().as_secs_f64());
    Ok(0)
}

pub struct SweepBiotConfig {
    pub kappa1s: Vec<f64>,
    pub kappa_mults: Vec<f64>,
    pub hs: Vec<f64>,
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub beta_points: usize,
    pub dt: f64,
    pub theta: i8,
    pub degree: usize,
    pub solver: SolverKind,
    pub out: String,
    pub out_dir: String,
}

impl Default for SweepBiotConfig {
    fn default() -> Self {
        let core = BiotSweepConfig::default();
        SweepBiotConfig {
            kappa1s: core.kappa1s,
            kappa_mults: core.kappa_mults,
            hs: core.hs,
            beta_lo: 1e-2,
            beta_hi: 1e2,
            beta_points: 25,
            dt: core.dt,
            theta: core.theta,
            degree: core.degree,
            solver: core.solver,
            out: "biot".to_string(),
            out_dir: crate::config::default_out_dir(),
        }
    }
}

impl RunConfig for SweepBiotConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "kappa1s" => self.kappa1s = parse_f64_list(key, value)?,
            "kappa_mults" => self.kappa_mults = parse_f64_list(key, value)?,
            "hs" => self.hs = parse_f64_list(key, value)?,
            "beta_lo" => self.beta_lo = parse_f64(key, value)?,
            "beta_hi" => self.beta_hi = parse_f64(key, value)?,
            "beta_points" => self.beta_points = parse_usize(key, value)?,
            "dt" => self.dt = parse_f64(key, value)?,
            "theta" => self.theta = parse_i8(key, value)?,
            "degree" => self.degree = parse_usize(key, value)?,
            "solver" => self.solver = parse_solver(value)?,
            "out" => self.out = value.to_string(),
            "out_dir" => self.out_dir = value.to_string(),
            _ => return Err(crate::config::unknown_key(key)),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(String, String)> {
        vec![
            ("kappa1s".into(), fmt_list(&self.kappa1s)),
            ("kappa_mults".into(), fmt_list(&self.kappa_mults)),
            ("hs".into(), fmt_list(&self.hs)),
            ("beta_lo".into(), self.beta_lo.to_string()),
            ("beta_hi".into(), self.beta_hi.to_string()),
            ("beta_points".into(), self.beta_points.to_string()),
            ("dt".into(), self.dt.to_string()),
            ("theta".into(), self.theta.to_string()),
            ("degree".into(), self.degree.to_string()),
            ("solver".into(), solver_name(self.solver).into()),
            ("out".into(), self.out.clone()),
            ("out_dir".into(), self.out_dir.clone()),
        ]
    }
}

pub fn run_sweep_biot(cfg: &SweepBiotConfig) -> Result<i32> {
    let start = Instant::now();
    let betas = log_grid(cfg.beta_lo, cfg.beta_hi, cfg.beta_points)?;
    let core = BiotSweepConfig {
        kappa1s: cfg.kappa1s.clone(),
        kappa_mults: cfg.kappa_mults.clone(),
        hs: cfg.hs.clone(),
        betas: betas.clone(),
        dt: cfg.dt,
        theta: cfg.theta,
        degree: cfg.degree,
        solver: cfg.solver,
    };
    let records = sweep_biot(&core)?;

    let paths = RunPaths::new(&cfg.out_dir, &cfg.out)?;
    let csv_path = paths.file("csv");
    write_biot_csv(open_csv(&csv_path)?, &records)?;
    paths.write_resolved(&cfg.entries())?;
    let mut manifest = Manifest::new("sweep-biot", records.len())
        .grid("kappa1s", &cfg.kappa1s)
        .grid("kappa_mults", &cfg.kappa_mults)
        .grid("h", &cfg.hs)
        .grid("betas", &betas)
        .output(&csv_path);
    manifest.wall_ms = start.elapsed().as_millis() as u64;
    manifest.write(&paths)?;
    println!(
        "wrote {} rows to {} in {:.1} s",
        records.len(),
        csv_path.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(0)
}

pub struct ProfileConfig {
    pub case: CaseKey,
    pub theta: i8,
    pub kappa: f64,
    pub degree: usize,
    pub h: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub beta_points: usize,
    pub solver: SolverKind,
    pub out: String,
    pub out_dir: String,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            case: CaseKey::Continuous2D,
            theta: 1,
            kappa: 1.0,
            degree: 1,
            h: 6.25e-2,
            beta_lo: 1.0,
            beta_hi: 100.0,
            beta_points: 20,
            solver: SolverKind::Iterative,
            out: "profile".to_string(),
            out_dir: crate::config::default_out_dir(),
        }
    }
}

impl RunConfig for ProfileConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "case" => {
                let case = parse_case(value)?;
                if case == CaseKey::Discontinuous1D {
                    bail!("profile-iterations runs the scalar-kappa 2d cases; use sweep-elliptic with case = discontinuous1d");
                }
                self.case = case;
            }
            "theta" => self.theta = parse_i8(key, value)?,
            "kappa" => self.kappa = parse_f64(key, value)?,
            "degree" => self.degree = parse_usize(key, value)?,
            "h" => self.h = parse_f64(key, value)?,
            "beta_lo" => self.beta_lo = parse_f64(key, value)?,
            "beta_hi" => self.beta_hi = parse_f64(key, value)?,
            "beta_points" => self.beta_points = parse_usize(key, value)?,
            "solver" => self.solver = parse_solver(value)?,
            "out" => self.out = value.to_string(),
            "out_dir" => self.out_dir = value.to_string(),
            _ => return Err(crate::config::unknown_key(key)),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(String, String)> {
        vec![
            ("case".into(), case_name(self.case).into()),
            ("theta".into(), self.theta.to_string()),
            ("kappa".into(), self.kappa.to_string()),
            ("degree".into(), self.degree.to_string()),
            ("h".into(), self.h.to_string()),
            ("beta_lo".into(), self.beta_lo.to_string()),
            ("beta_hi".into(), self.beta_hi.to_string()),
            ("beta_points".into(), self.beta_points.to_string()),
            ("solver".into(), solver_name(self.solver).into()),
            ("out".into(), self.out.clone()),
            ("out_dir".into(), self.out_dir.clone()),
        ]
    }
}

/// Iteration counts over a beta grid on one fixed mesh. The CSV shares
/// the elliptic sweep schema; with a single level the rate_ok column is
/// vacuous (a one-row study can never certify its order).
pub fn run_profile(cfg: &ProfileConfig) -> Result<i32> {
    let start = Instant::now();
    let betas = log_grid(cfg.beta_lo, cfg.beta_hi, cfg.beta_points)?;
    let kind = match cfg.case {
        CaseKey::Heterogeneous2D => ScalarCaseKind::HeterogeneousContinuous2D,
        _ => ScalarCaseKind::Continuous2D,
    };
    let core = EllipticSweepConfig {
        kind,
        thetas: vec![cfg.theta],
        degrees: vec![cfg.degree],
        kappas: vec![cfg.kappa],
        betas: betas.clone(),
        h_levels: 1,
        h0: cfg.h,
        solver: cfg.solver,
    };
    let records = profile_iterations(&core)?;

    let paths = RunPaths::new(&cfg.out_dir, &cfg.out)?;
    let csv_path = paths.file("csv");
    write_elliptic_csv(open_csv(&csv_path)?, &records)?;
    paths.write_resolved(&cfg.entries())?;
    let mut manifest = Manifest::new("profile-iterations", records.len())
        .grid("betas", &betas)
        .grid("h", &vec![cfg.h])
        .output(&csv_path);
    manifest.wall_ms = start.elapsed().as_millis() as u64;
    manifest.write(&paths)?;

    let best = records
        .iter()
        .min_by_key(|r| r.iterations)
        .expect("beta grid is nonempty");
    println!("beta grid: {} points in [{}, {}]", betas.len(), cfg.beta_lo, cfg.beta_hi);
    println!("min iterations {} at beta {}", best.iterations, best.beta);
    let last = records.last().expect("nonempty");
    println!("iterations at beta {}: {}", last.beta, last.iterations);
    Ok(0)
}
