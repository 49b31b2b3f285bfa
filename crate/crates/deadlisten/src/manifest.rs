//! Run manifests written next to every output file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Full argument list, enough to rerun the command.
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<BTreeMap<&'static str, Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub elapsed_ms: u128,
    pub summary: BTreeMap<String, Value>,
}

fn unix_ms(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Collects manifest fields while a command runs.
pub struct ManifestBuilder {
    started: SystemTime,
    clock: Instant,
    manifest: RunManifest,
}

impl ManifestBuilder {
    pub fn start(command: &str, args: Vec<String>) -> Self {
        let started = SystemTime::now();
        ManifestBuilder {
            started,
            clock: Instant::now(),
            manifest: RunManifest {
                tool: "deadlisten",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                args,
                inputs: Vec::new(),
                config: None,
                grid: None,
                seed: None,
                started_unix_ms: unix_ms(started),
                finished_unix_ms: 0,
                elapsed_ms: 0,
                summary: BTreeMap::new(),
            },
        }
    }

    pub fn inputs<P: AsRef<Path>>(&mut self, inputs: &[P]) -> &mut Self {
        self.manifest.inputs = inputs.iter().map(|p| p.as_ref().display().to_string()).collect();
        self
    }

    pub fn config(&mut self, config: impl ToString) -> &mut Self {
        self.manifest.config = Some(config.to_string());
        self
    }

    pub fn grid(&mut self, rarity: &[f64], confidence: &[f64]) -> &mut Self {
        self.manifest.grid = Some(BTreeMap::from([("rarity", rarity.to_vec()), ("confidence", confidence.to_vec())]));
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.manifest.seed = Some(seed);
        self
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.manifest.summary.insert(key.to_string(), value);
        self
    }

    pub fn finish(mut self) -> RunManifest {
        self.manifest.finished_unix_ms = unix_ms(self.started) + self.clock.elapsed().as_millis();
        self.manifest.elapsed_ms = self.clock.elapsed().as_millis();
        self.manifest
    }
}

/// `out.json` → `out.json.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
