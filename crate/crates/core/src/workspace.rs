// SPDX-License-Identifier: Apache-2.0

//! On-disk workspace: a directory holding `evident.ekblog` and an advisory
//! lock file that serializes writers.

use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::engine::attach_observation_at;
use crate::model::{make_container_at, Association, Container, ContainerId, ContainerKind, EdgeKind, Outcome, Payload, Snapshot};
use crate::store::{verify_bytes, Event, EventBody, EventLog, Store, VerificationReport};

pub const LOG_FILE: &str = "evident.ekblog";
pub const LOCK_FILE: &str = ".evident.lock";

#[derive(Clone, Debug)]
pub struct Workspace {
    dir: PathBuf,
}

impl Workspace {
    /// Creates an empty log in `dir` (created if missing).
    pub fn init(dir: impl Into<PathBuf>) -> Result<Workspace> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let ws = Workspace { dir };
        match OpenOptions::new().write(true).create_new(true).open(ws.log_path()) {
            Ok(_) => Ok(ws),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::WorkspaceExists(ws.log_path().display().to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Opens an existing workspace.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Workspace> {
        let ws = Workspace { dir: dir.into() };
        if !ws.log_path().is_file() {
            return Err(Error::NoWorkspace(ws.log_path().display().to_string()));
        }
        Ok(ws)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn log_path(&self) -> PathBuf {
        self.dir.join(LOG_FILE)
    }

    pub fn read_bytes(&self) -> Result<Vec<u8>> {
        Ok(fs::read(self.log_path())?)
    }

    /// Byte-level verification of the stored log.
    pub fn verify(&self) -> Result<VerificationReport> {
        Ok(verify_bytes(&self.read_bytes()?))
    }

    pub fn load_log(&self) -> Result<EventLog> {
        EventLog::from_bytes(&self.read_bytes()?)
    }

    pub fn load(&self) -> Result<Store> {
        Store::open(self.load_log()?)
    }

    pub fn snapshot(&self) -> Result<Snapshot> {
        Ok(self.load()?.snapshot().clone())
    }

    /// Takes the writer lock and loads the store. Fails with
    /// `WorkspaceLocked` while another writer holds it.
    pub fn writer(&self) -> Result<WorkspaceWriter> {
        let lock = OpenOptions::new().create(true).truncate(false).write(true).open(self.dir.join(LOCK_FILE))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(TryLockError::WouldBlock) => {
                return Err(Error::WorkspaceLocked(self.dir.join(LOCK_FILE).display().to_string()))
            }
            Err(TryLockError::Error(e)) => return Err(e.into()),
        }
        let store = self.load()?;
        let file = OpenOptions::new().append(true).open(self.log_path())?;
        Ok(WorkspaceWriter { _lock: lock, file, store })
    }
}

/// Exclusive writer. The lock is released on drop.
#[derive(Debug)]
pub struct WorkspaceWriter {
    _lock: File,
    file: File,
    store: Store,
}

impl WorkspaceWriter {
    pub fn snapshot(&self) -> &Snapshot {
        self.store.snapshot()
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn append(&mut self, body: EventBody) -> Result<Event> {
        self.append_at(body, chrono::Utc::now().timestamp())
    }

    /// Validates, appends in memory, then writes the event line and syncs.
    pub fn append_at(&mut self, body: EventBody, timestamp: i64) -> Result<Event> {
        let before = self.store.clone();
        let event = self.store.append(body, timestamp)?.clone();
        let mut line = event.to_line().into_bytes();
        line.push(b'\n');
        if let Err(e) = self.file.write_all(&line).and_then(|_| self.file.sync_data()) {
            self.store = before;
            return Err(e.into());
        }
        Ok(event)
    }

    /// Creation time for the next container: the wall clock, nudged past
    /// every existing container so grid order follows registration order
    /// even within one second.
    pub fn next_created_at(&self) -> i64 {
        let latest = self.snapshot().containers().values().map(|c| c.created_at).max();
        let now = chrono::Utc::now().timestamp();
        latest.map_or(now, |l| now.max(l + 1))
    }

    /// Registers a new container; returns its id.
    pub fn add_container(
        &mut self,
        kind: ContainerKind,
        payload: Payload,
        period_tag: Option<String>,
        labels: Vec<String>,
    ) -> Result<ContainerId> {
        let now = self.next_created_at();
        let container = make_container_at(kind, payload, period_tag, labels, now)?;
        let id = container.id.clone();
        self.append_at(EventBody::AddContainer(container), now)?;
        Ok(id)
    }

    pub fn link(&mut self, source: ContainerId, target: ContainerId, kind: EdgeKind) -> Result<Event> {
        self.append(EventBody::AddAssociation(Association::new(source, target, kind)))
    }

    pub fn set_winner(&mut self, test: ContainerId, hypothesis: ContainerId) -> Result<Event> {
        self.append(EventBody::SetWinner { test, hypothesis })
    }

    /// Promotes a deduction in one event. An inline observation container
    /// is registered by the same event. Returns the successor id.
    pub fn promote(
        &mut self,
        test: ContainerId,
        observation: ContainerId,
        outcome: Outcome,
        confidence: Option<f64>,
        observation_container: Option<Container>,
    ) -> Result<ContainerId> {
        let mut now = self.next_created_at();
        let mut base = self.snapshot().clone();
        if let Some(c) = &observation_container {
            base.insert_container(c.clone())?;
            now = now.max(c.created_at + 1);
        }
        let promotion = attach_observation_at(&base, &test, &observation, outcome, confidence, now)?;
        let successor = promotion.successor.clone();
        self.append_at(
            EventBody::AttachObservation {
                test,
                observation,
                outcome,
                confidence,
                successor: promotion.successor,
                observation_container,
            },
            now,
        )?;
        Ok(successor)
    }
}

/// Resolves a full id or an unambiguous hex prefix (at least 8 digits,
/// with or without `sha256:`).
pub fn resolve_id(snapshot: &Snapshot, query: &str) -> Result<ContainerId> {
    if let Ok(id) = ContainerId::parse(query) {
        return if snapshot.contains(&id) { Ok(id) } else { Err(Error::UnknownId(query.to_owned())) };
    }
    let hex = query.strip_prefix("sha256:").unwrap_or(query);
    if hex.len() < 8 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::InvalidIdPrefix(query.to_owned()));
    }
    let prefix = format!("sha256:{}", hex.to_ascii_lowercase());
    let mut matches = snapshot
        .containers()
        .range(ContainerId::bound(prefix.clone())..)
        .map(|(id, _)| id)
        .take_while(|id| id.as_str().starts_with(&prefix));
    match (matches.next(), matches.next()) {
        (Some(id), None) => Ok(id.clone()),
        (None, _) => Err(Error::UnknownId(query.to_owned())),
        (Some(_), Some(_)) => Err(Error::AmbiguousId(query.to_owned())),
    }
}
