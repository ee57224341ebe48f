use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use dbar_core::io::Range;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::Config;

#[derive(Debug, Serialize)]
pub struct Output {
    pub path: PathBuf,
    pub kind: &'static str,
    /// Colour-scale bounds of a heatmap; two entries for Re/Im panels.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ranges: Vec<Range>,
}

/// Everything needed to rerun a command: the merged config, the resolved
/// solver parameters, seeds and versions.
pub struct Manifest {
    command: &'static str,
    config: Config,
    paper_scale: bool,
    started: Instant,
    parameters: Map<String, Value>,
    metrics: Map<String, Value>,
    outputs: Vec<Output>,
}

impl Manifest {
    pub fn new(command: &'static str, config: &Config, paper_scale: bool) -> Self {
        Manifest {
            command,
            config: config.clone(),
            paper_scale,
            started: Instant::now(),
            parameters: Map::new(),
            metrics: Map::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param<T: Serialize>(&mut self, key: &str, value: T) -> Result<()> {
        self.parameters.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn metric<T: Serialize>(&mut self, key: &str, value: T) -> Result<()> {
        self.metrics.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path, kind: &'static str) {
        self.outputs.push(Output {
            path: path.to_path_buf(),
            kind,
            ranges: vec![],
        });
    }

    pub fn image(&mut self, path: &Path, ranges: Vec<Range>) {
        self.outputs.push(Output {
            path: path.to_path_buf(),
            kind: "png",
            ranges,
        });
    }

    pub fn write(self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let doc = json!({
            "command": self.command,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "paper_scale": self.paper_scale,
            "config": self.config,
            "parameters": self.parameters,
            "metrics": self.metrics,
            "outputs": self.outputs,
            "threads": std::thread::available_parallelism().map_or(1, |n| n.get()),
            "elapsed_seconds": self.started.elapsed().as_secs_f64(),
        });
        std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
        Ok(path)
    }
}
