use std::path::Path;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

/// Provenance for one run; written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    pub seed: Option<u64>,
    pub seed_source: Option<&'static str>,
    pub dataset: String,
    pub dataset_sha256: String,
    pub parameters: Value,
    pub outputs: Vec<String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub phases: Vec<Phase>,
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default().as_millis()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn start(command_line: &[String], dataset: &Path, bytes: &[u8]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command_line: command_line.to_vec(),
            seed: None,
            seed_source: None,
            dataset: dataset.display().to_string(),
            dataset_sha256: sha256_hex(bytes),
            parameters: Value::Null,
            outputs: Vec::new(),
            started_unix_ms: unix_ms(),
            finished_unix_ms: 0,
            phases: Vec::new(),
        }
    }

    pub fn seeded(mut self, seed: u64, source: &'static str) -> Self {
        self.seed = Some(seed);
        self.seed_source = Some(source);
        self
    }

    pub fn phase<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.record(name, start.elapsed());
        out
    }

    pub fn record(&mut self, name: &str, elapsed: Duration) {
        self.phases.push(Phase {
            name: name.to_string(),
            seconds: elapsed.as_secs_f64(),
        });
    }

    /// Writes to `path`, or to stderr when there is no output location.
    pub fn finish(mut self, path: Option<&Path>) -> Result<(), CliError> {
        self.finished_unix_ms = unix_ms();
        let text = serde_json::to_string_pretty(&self)?;
        match path {
            Some(p) => std::fs::write(p, text + "\n")?,
            None => eprintln!("{text}"),
        }
        Ok(())
    }
}

/// `<output>.manifest.json` next to a single output file.
pub fn sidecar(output: &Path) -> std::path::PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(sidecar(Path::new("out/p.jsonl")), Path::new("out/p.jsonl.manifest.json"));
    }
}
