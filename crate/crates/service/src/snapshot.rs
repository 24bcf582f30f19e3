//! The whole session table as one JSON file.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::Session;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("snapshot {path} is malformed: {source}")]
    Format {
        path: String,
        source: serde_json::Error,
    },
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    sessions: Vec<Session>,
}

/// Sessions stored at `path`; a missing file is an empty table.
pub fn load(path: &Path) -> Result<Vec<Session>, SnapshotError> {
    let shown = path.display().to_string();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(SnapshotError::Io {
                path: shown,
                source,
            })
        }
    };
    let snap: Snapshot = serde_json::from_str(&text).map_err(|source| SnapshotError::Format {
        path: shown,
        source,
    })?;
    Ok(snap.sessions)
}

/// Writes through a temporary file so a crash never leaves half a snapshot.
pub fn save(path: &Path, sessions: Vec<Session>) -> Result<(), SnapshotError> {
    let shown = path.display().to_string();
    let io_err = |source| SnapshotError::Io {
        path: shown.clone(),
        source,
    };
    let text = serde_json::to_string(&Snapshot { sessions }).expect("sessions serialize");
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)
}
