//! Run manifest: configuration echo, input and output digests,
//! diagnostics, and per-stage wall-clock times.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use bkf_core::output::ConfigEcho;
use bkf_core::ValidationReport;

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub millis: u128,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub config: ConfigEcho,
    pub inputs: Vec<FileDigest>,
    pub diagnostics: ValidationReport,
    pub outputs: Vec<FileDigest>,
    pub stages: Vec<StageTime>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn file_digest(path: &Path, bytes: &[u8]) -> FileDigest {
    FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(bytes),
    }
}

/// Accumulates named wall-clock spans.
pub struct StageClock {
    started: Instant,
    stages: Vec<StageTime>,
}

impl StageClock {
    pub fn start() -> Self {
        StageClock {
            started: Instant::now(),
            stages: Vec::new(),
        }
    }

    /// Closes the current span under `stage` and starts the next one.
    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.stages.push(StageTime {
            stage: stage.to_string(),
            millis: now.duration_since(self.started).as_millis(),
        });
        self.started = now;
    }

    pub fn into_stages(self) -> Vec<StageTime> {
        self.stages
    }
}
