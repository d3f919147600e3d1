//! Output files: CSV bodies preceded by a `# key: value` provenance block.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block: tool version, command, and the resolved config
/// flattened to dotted keys.
pub fn provenance(command: &str, cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tool: blaschke {TOOL_VERSION}");
    let _ = writeln!(out, "# command: {command}");
    let value = toml::Value::try_from(cfg).expect("config serializes");
    flatten("config", &value, &mut out);
    out
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut String) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        toml::Value::Array(items) if items.iter().any(|v| v.is_table()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{}", i + 1), v, out);
            }
        }
        toml::Value::String(s) => {
            let _ = writeln!(out, "# {prefix}: {s}");
        }
        other => {
            let _ = writeln!(out, "# {prefix}: {other}");
        }
    }
}

/// Strip the provenance block from a written file.
pub fn body(contents: &str) -> String {
    contents
        .lines()
        .filter(|l| !l.starts_with('#'))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}

/// Writes artifacts into one directory, each with the same provenance.
pub struct ArtifactWriter {
    dir: PathBuf,
    header: String,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, header: String) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            header,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        let mut text = self.header.clone();
        text.push_str(body);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    pub fn into_paths(self) -> Vec<PathBuf> {
        self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_is_flat_and_commented() {
        let cfg = ExperimentConfig::default();
        let p = provenance("compose", &cfg);
        assert!(p.lines().all(|l| l.starts_with("# ")));
        assert!(p.contains("# command: compose\n"));
        assert!(p.contains("# config.seed: 42\n"));
        assert!(p.contains("# config.sequence.family: random\n"));
        assert_eq!(body(&format!("{p}a,b\n1,2\n")), "a,b\n1,2\n");
    }
}
