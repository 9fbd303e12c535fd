//! Report files. Payloads are deterministic; wall-clock data goes to a
//! `.meta.json` side file next to each payload.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use crate::Failure;

pub struct RunInfo {
    pub seed: u64,
    started: SystemTime,
    clock: Instant,
}

impl RunInfo {
    pub fn start(seed: u64) -> Self {
        Self {
            seed,
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    fn meta(&self, payload: &Path) -> serde_json::Value {
        json!({
            "payload": payload.file_name().map(|n| n.to_string_lossy().into_owned()),
            "tool": "abel-lab",
            "version": env!("CARGO_PKG_VERSION"),
            "args": std::env::args().skip(1).collect::<Vec<_>>(),
            "seed": self.seed,
            "started_unix_ms": self.started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64),
            "elapsed_ms": self.clock.elapsed().as_secs_f64() * 1e3,
        })
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))
}

/// Writes `text` to `path` and its metadata to `path.meta.json`.
pub fn write_payload(run: &RunInfo, path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            ensure_dir(dir)?;
        }
    }
    std::fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut meta = path.as_os_str().to_owned();
    meta.push(".meta.json");
    let meta = PathBuf::from(meta);
    let body = serde_json::to_string_pretty(&run.meta(path))?;
    std::fs::write(&meta, body + "\n").map_err(|e| Failure::Config(format!("{}: {e}", meta.display())))?;
    Ok(())
}

pub fn write_json<T: Serialize>(run: &RunInfo, path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    write_payload(run, path, &(text + "\n"))
}
