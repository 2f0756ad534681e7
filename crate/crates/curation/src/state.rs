//! Review state as a fold over an append-only event log.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CurationError, Result};
use crate::model::{Choice, Decision, Item, Session, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        at: String,
        session: Session,
    },
    Decision {
        at: String,
        item_id: String,
        choice: Choice,
        reviewer: String,
        #[serde(default, rename = "override")]
        override_: bool,
    },
    SessionClosed {
        at: String,
        session_id: String,
        variant: String,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub sessions: Vec<Session>,
}

impl State {
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a Event>) -> Result<Self> {
        let mut state = State::default();
        for event in events {
            state.apply(event)?;
        }
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("state serializes");
        s.push('\n');
        s
    }

    pub fn session(&self, id: &str) -> Result<&Session> {
        self.sessions
            .iter()
            .find(|s| s.session_id == id)
            .ok_or_else(|| CurationError::NotFound(format!("session {id:?}")))
    }

    fn session_mut(&mut self, id: &str) -> Result<&mut Session> {
        self.sessions
            .iter_mut()
            .find(|s| s.session_id == id)
            .ok_or_else(|| CurationError::NotFound(format!("session {id:?}")))
    }

    pub fn item(&self, item_id: &str) -> Result<(&Session, &Item)> {
        self.sessions
            .iter()
            .find_map(|s| s.items.iter().find(|i| i.item_id == item_id).map(|i| (s, i)))
            .ok_or_else(|| CurationError::NotFound(format!("item {item_id:?}")))
    }

    pub fn next_session_id(&self) -> String {
        format!("s{}", self.sessions.len() + 1)
    }

    /// Checks whether `event` would change the state. `Ok(false)` means it
    /// is a harmless repeat (same decision submitted again).
    pub fn check(&self, event: &Event) -> Result<bool> {
        match event {
            Event::SessionCreated { session, .. } => {
                if self.session(&session.session_id).is_ok() {
                    return Err(CurationError::Conflict(format!(
                        "session {} already exists",
                        session.session_id
                    )));
                }
                Ok(true)
            }
            Event::Decision {
                item_id,
                choice,
                override_,
                ..
            } => {
                let (session, item) = self.item(item_id)?;
                if session.status == Status::Closed {
                    return Err(CurationError::Conflict(format!(
                        "session {} is closed",
                        session.session_id
                    )));
                }
                match &item.decision {
                    None => Ok(true),
                    Some(d) if d.choice == *choice => Ok(false),
                    Some(_) if *override_ => Ok(true),
                    Some(d) => Err(CurationError::Conflict(format!(
                        "item {item_id} already decided as {:?}; resubmit with override to change it",
                        d.choice
                    ))),
                }
            }
            Event::SessionClosed { session_id, variant, .. } => {
                let session = self.session(session_id)?;
                if let Some(existing) = &session.applied_variant {
                    return Err(CurationError::Conflict(format!(
                        "session {session_id} was already applied as {existing:?}, not {variant:?}"
                    )));
                }
                Ok(true)
            }
        }
    }

    pub fn apply(&mut self, event: &Event) -> Result<()> {
        if !self.check(event)? {
            return Ok(());
        }
        match event {
            Event::SessionCreated { session, .. } => self.sessions.push(session.clone()),
            Event::Decision {
                at,
                item_id,
                choice,
                reviewer,
                ..
            } => {
                let item = self
                    .sessions
                    .iter_mut()
                    .flat_map(|s| s.items.iter_mut())
                    .find(|i| &i.item_id == item_id)
                    .expect("checked above");
                item.decision = Some(Decision {
                    choice: *choice,
                    reviewer: reviewer.clone(),
                    decided_at: at.clone(),
                });
            }
            Event::SessionClosed { session_id, variant, .. } => {
                let session = self.session_mut(session_id)?;
                session.status = Status::Closed;
                session.applied_variant = Some(variant.clone());
            }
        }
        Ok(())
    }
}

/// Line-delimited JSON event log, one event per line, only ever appended.
pub struct DecisionLog {
    path: PathBuf,
    file: File,
}

impl DecisionLog {
    pub fn open(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| log_err(dir, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| log_err(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: &Event) -> Result<()> {
        let mut line = serde_json::to_string(event).expect("event serializes");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| log_err(&self.path, e))
    }

    /// Events in the log at `path`; a missing file is an empty log.
    pub fn read(path: &Path) -> Result<Vec<Event>> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(log_err(path, e)),
        };
        let mut events = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| log_err(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let event = serde_json::from_str(&line).map_err(|e| {
                CurationError::Log(format!("{}:{}: {e}", path.display(), n + 1))
            })?;
            events.push(event);
        }
        Ok(events)
    }
}

fn log_err(path: &Path, e: std::io::Error) -> CurationError {
    CurationError::Log(format!("{}: {e}", path.display()))
}

/// Writes `state` to `path` through a temporary file so readers never see a
/// partial snapshot.
pub fn write_snapshot(path: &Path, state: &State) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, state.to_json())
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| log_err(path, e))
}
