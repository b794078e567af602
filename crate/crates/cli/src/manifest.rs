//! Run artifacts: output paths, the resolved-config copy, and the JSON
//! manifest describing what a run produced.

use crate::config::render;
use anyhow::{Context, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Where one run writes its files: `<dir>/<stem>.<ext>` for every
/// artifact, so outputs of a run stay adjacent.
pub struct RunPaths {
    dir: PathBuf,
    stem: String,
}

impl RunPaths {
    pub fn new(out_dir: &str, stem: &str) -> Result<Self> {
        let dir = PathBuf::from(out_dir);
        fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create output directory '{}'", dir.display()))?;
        Ok(RunPaths { dir, stem: stem.to_string() })
    }

    pub fn file(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.stem))
    }

    /// Every run leaves a replayable copy of its full configuration.
    pub fn write_resolved(&self, entries: &[(String, String)]) -> Result<PathBuf> {
        let path = self.file("resolved.cfg");
        fs::write(&path, render(entries))
            .with_context(|| format!("cannot write '{}'", path.display()))?;
        Ok(path)
    }
}

/// Summary of one command invocation. Wall time varies between reruns;
/// byte-level determinism is promised only for CSV, model and metric
/// files, never for the manifest.
#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_ms: u64,
    pub grids: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, rows: usize) -> Self {
        Manifest {
            command: command.to_string(),
            rows,
            seed: None,
            wall_ms: 0,
            grids: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn grid<T: Serialize>(mut self, name: &str, values: &T) -> Self {
        self.grids.insert(name.to_string(), serde_json::to_value(values).expect("plain data"));
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn write(&self, paths: &RunPaths) -> Result<PathBuf> {
        let path = paths.file("manifest.json");
        let mut text = serde_json::to_string_pretty(self).context("manifest serialization")?;
        text.push('\n');
        fs::write(&path, text)
            .with_context(|| format!("cannot write '{}'", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_share_the_stem() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::new(dir.path().to_str().unwrap(), "elliptic").unwrap();
        assert_eq!(paths.file("csv").file_name().unwrap(), "elliptic.csv");
        assert_eq!(
            paths.file("manifest.json").file_name().unwrap(),
            "elliptic.manifest.json"
        );
    }

    #[test]
    fn manifest_is_valid_json_with_grids() {
        let dir = tempfile::tempdir().unwrap();
        let paths = RunPaths::new(dir.path().to_str().unwrap(), "run").unwrap();
        let m = Manifest::new("sweep-elliptic", 12)
            .grid("betas", &vec![1.0, 10.0])
            .output(&paths.file("csv"));
        let written = m.write(&paths).unwrap();
        let text = fs::read_to_string(written).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["rows"], 12);
        assert_eq!(back["grids"]["betas"][1], 10.0);
        assert!(back.get("seed").is_none());
    }
}
