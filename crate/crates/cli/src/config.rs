//! Key = value run configuration: file parsing, flag overrides, and the
//! resolved copy written beside every run's outputs.
//!
//! Format: one `key = value` per line, `#` starts a comment, blank lines
//! are skipped. Lists are comma-separated. Unknown keys are rejected so a
//! typo cannot silently fall back to a default.

use anyhow::{anyhow, bail, Context, Result};
use ipdg_core::solve::SolverKind;
use std::fmt::Display;
use std::fs;
use std::path::Path;

/// One command's full parameter set. Every field must be reachable by
/// `set` and reproduced by `entries`, so a resolved copy replays exactly.
pub trait RunConfig: Default {
    fn set(&mut self, key: &str, value: &str) -> Result<()>;
    fn entries(&self) -> Vec<(String, String)>;
}

pub fn parse_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file '{}'", path.display()))?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!("{}:{}: expected 'key = value', got '{line}'", path.display(), lineno + 1)
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let (key, value) =
        arg.split_once('=').ok_or_else(|| anyhow!("--set expects KEY=VALUE, got '{arg}'"))?;
    Ok((key.trim().to_string(), value.trim().to_string()))
}

pub fn render(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    for (key, value) in entries {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(value);
        out.push('\n');
    }
    out
}

pub fn unknown_key(key: &str) -> anyhow::Error {
    anyhow!("unknown config key '{key}'")
}

pub fn default_out_dir() -> String {
    std::env::var("IPDG_OUT_DIR").unwrap_or_else(|_| ".".to_string())
}

pub fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| anyhow!("key '{key}': expected a number, got '{value}'"))
}

pub fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| anyhow!("key '{key}': expected a count, got '{value}'"))
}

pub fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value.parse().map_err(|_| anyhow!("key '{key}': expected an integer, got '{value}'"))
}

pub fn parse_i8(key: &str, value: &str) -> Result<i8> {
    value.parse().map_err(|_| anyhow!("key '{key}': expected an integer, got '{value}'"))
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|t| !t.is_empty())
}

pub fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let list: Vec<f64> = split_list(value)
        .map(|t| t.parse().map_err(|_| anyhow!("key '{key}': bad number '{t}'")))
        .collect::<Result<_>>()?;
    if list.is_empty() {
        bail!("key '{key}': empty list");
    }
    Ok(list)
}

pub fn parse_i8_list(key: &str, value: &str) -> Result<Vec<i8>> {
    let list: Vec<i8> = split_list(value)
        .map(|t| t.parse().map_err(|_| anyhow!("key '{key}': bad integer '{t}'")))
        .collect::<Result<_>>()?;
    if list.is_empty() {
        bail!("key '{key}': empty list");
    }
    Ok(list)
}

pub fn parse_usize_list(key: &str, value: &str) -> Result<Vec<usize>> {
    let list: Vec<usize> = split_list(value)
        .map(|t| t.parse().map_err(|_| anyhow!("key '{key}': bad count '{t}'")))
        .collect::<Result<_>>()?;
    if list.is_empty() {
        bail!("key '{key}': empty list");
    }
    Ok(list)
}

pub fn parse_string_list(value: &str) -> Vec<String> {
    split_list(value).map(str::to_string).collect()
}

pub fn fmt_list<T: Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_solver(value: &str) -> Result<SolverKind> {
    match value {
        "direct" => Ok(SolverKind::Direct),
        "iterative" => Ok(SolverKind::Iterative),
        other => Err(anyhow!("solver must be 'direct' or 'iterative', got '{other}'")),
    }
}

pub fn solver_name(solver: SolverKind) -> &'static str {
    match solver {
        SolverKind::Direct => "direct",
        SolverKind::Iterative => "iterative",
    }
}

/// Manufactured-case selector shared by the study and sweep commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKey {
    Continuous2D,
    Heterogeneous2D,
    Discontinuous1D,
}

pub fn parse_case(value: &str) -> Result<CaseKey> {
    match value {
        "continuous2d" => Ok(CaseKey::Continuous2D),
        "heterogeneous2d" => Ok(CaseKey::Heterogeneous2D),
        "discontinuous1d" => Ok(CaseKey::Discontinuous1D),
        other => Err(anyhow!(
            "case must be continuous2d, heterogeneous2d or discontinuous1d, got '{other}'"
        )),
    }
}

pub fn case_name(case: CaseKey) -> &'static str {
    match case {
        CaseKey::Continuous2D => "continuous2d",
        CaseKey::Heterogeneous2D => "heterogeneous2d",
        CaseKey::Discontinuous1D => "discontinuous1d",
    }
}
