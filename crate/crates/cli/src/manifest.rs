use std::path::{Path, PathBuf};
use std::time::Instant;

use bellrange::rng::SUBSTREAM_SCHEME;
use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

/// Everything needed to reproduce a run, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub master_seed: Option<u64>,
    pub substream_scheme: &'static str,
    pub started: String,
    pub finished: Option<String>,
    pub wall_seconds: Option<f64>,
    pub outputs: Vec<PathBuf>,
    pub degenerate_discards: Option<u64>,
    pub summary: Value,
    pub error: Option<String>,
    pub failed_sample: Option<u64>,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunManifest {
    pub fn begin(command: &str, config: Value, master_seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            master_seed,
            substream_scheme: SUBSTREAM_SCHEME,
            started: now(),
            finished: None,
            wall_seconds: None,
            outputs: Vec::new(),
            degenerate_discards: None,
            summary: Value::Null,
            error: None,
            failed_sample: None,
            clock: Some(Instant::now()),
        }
    }

    pub fn finish(&mut self) {
        self.finished = Some(now());
        self.wall_seconds = self.clock.map(|c| c.elapsed().as_secs_f64());
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}
