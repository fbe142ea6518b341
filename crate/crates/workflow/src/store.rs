//! On-disk layout:
//!
//! ```text
//! <root>/sessions/<id>/events.jsonl      append-only, one event per line
//! <root>/sessions/<id>/runs/<n>/result.json
//! <root>/sessions/<id>/runs/<n>/series.csv
//! <root>/sessions/<id>/runs/<n>/plot.svg
//! ```

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::error::WorkflowError;
use crate::session::{Event, Session};

pub const EVENT_LOG: &str = "events.jsonl";

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

/// Session ids become directory names, so only a safe alphabet is accepted.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, WorkflowError> {
        let root = root.into();
        fs::create_dir_all(root.join("sessions")).map_err(|e| WorkflowError::storage(root.display(), e))?;
        Ok(Store { root, locks: Mutex::new(HashMap::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn session_dir(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(id)
    }

    pub fn run_dir(&self, id: &str, n: u32) -> PathBuf {
        self.session_dir(id).join("runs").join(n.to_string())
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.session_dir(id).join(EVENT_LOG)
    }

    /// The lock serializing transitions of one session.
    pub fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_id(id) && self.log_path(id).is_file()
    }

    pub fn create(&self, id: &str, first: &Event) -> Result<(), WorkflowError> {
        if !valid_id(id) {
            return Err(WorkflowError::InvalidInput { reason: format!("bad session id {id:?}") });
        }
        let dir = self.session_dir(id);
        fs::create_dir_all(&dir).map_err(|e| WorkflowError::storage(dir.display(), e))?;
        let path = self.log_path(id);
        let file = OpenOptions::new().write(true).create_new(true).open(&path);
        file.map_err(|e| WorkflowError::storage(path.display(), e))?;
        self.append(id, first)
    }

    /// Append one event as a single line, flushed to disk before returning.
    pub fn append(&self, id: &str, event: &Event) -> Result<(), WorkflowError> {
        let path = self.log_path(id);
        let mut line = serde_json::to_string(event).map_err(|e| WorkflowError::storage("encoding event", e))?;
        line.push('\n');
        let mut file =
            OpenOptions::new().append(true).open(&path).map_err(|e| WorkflowError::storage(path.display(), e))?;
        file.write_all(line.as_bytes()).and_then(|_| file.sync_data()).map_err(|e| WorkflowError::storage(path.display(), e))
    }

    /// All complete events of a session. A trailing line without a newline is a write
    /// in progress and is ignored.
    pub fn events(&self, id: &str) -> Result<Vec<Event>, WorkflowError> {
        if !self.exists(id) {
            return Err(WorkflowError::NotFound { id: id.to_string() });
        }
        let path = self.log_path(id);
        let text = fs::read_to_string(&path).map_err(|e| WorkflowError::storage(path.display(), e))?;
        let complete = match text.rfind('\n') {
            Some(i) => &text[..=i],
            None => "",
        };
        complete
            .lines()
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| WorkflowError::Corrupt { reason: format!("{} line {}: {e}", path.display(), i + 1) })
            })
            .collect()
    }

    pub fn load(&self, id: &str) -> Result<Session, WorkflowError> {
        Session::replay(&self.events(id)?)
    }

    pub fn ids(&self) -> Result<Vec<String>, WorkflowError> {
        let dir = self.root.join("sessions");
        let mut ids: Vec<String> = fs::read_dir(&dir)
            .map_err(|e| WorkflowError::storage(dir.display(), e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|id| self.exists(id))
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// Every session, oldest first.
    pub fn list(&self) -> Result<Vec<Session>, WorkflowError> {
        let mut all = self.ids()?.iter().map(|id| self.load(id)).collect::<Result<Vec<_>, _>>()?;
        all.sort_by(|a, b| (a.created_ms, &a.id).cmp(&(b.created_ms, &b.id)));
        Ok(all)
    }

    pub fn write_file(&self, path: &Path, bytes: &[u8]) -> Result<(), WorkflowError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| WorkflowError::storage(parent.display(), e))?;
        }
        fs::write(path, bytes).map_err(|e| WorkflowError::storage(path.display(), e))
    }

    pub fn read_file(&self, path: &Path) -> Result<Vec<u8>, WorkflowError> {
        fs::read(path).map_err(|e| WorkflowError::storage(path.display(), e))
    }

    /// Ids of sessions with a `runs/` directory on disk.
    pub fn sessions_with_runs(&self) -> Result<Vec<String>, WorkflowError> {
        Ok(self.ids()?.into_iter().filter(|id| self.session_dir(id).join("runs").exists()).collect())
    }
}
