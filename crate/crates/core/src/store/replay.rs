// SPDX-License-Identifier: Apache-2.0

use super::event::{Event, EventBody};
use super::log::{verify_log, EventLog, VerificationReport};
use crate::engine::attach_observation_at;
use crate::error::{Error, Result};
use crate::model::{ContainerKind, Snapshot};

/// Applies one event body to `snapshot` in place. On error `snapshot` may
/// be partially updated; callers apply to a copy.
pub fn apply(snapshot: &mut Snapshot, body: &EventBody, timestamp: i64) -> Result<()> {
    match body {
        EventBody::AddContainer(c) => {
            snapshot.insert_container(c.clone())?;
        }
        EventBody::AddAssociation(a) => snapshot.insert_association(a.clone())?,
        EventBody::SetWinner { test, hypothesis } => snapshot.set_winner(test, hypothesis)?,
        EventBody::AttachObservation {
            test,
            observation,
            outcome,
            confidence,
            successor,
            observation_container,
        } => {
            if let Some(c) = observation_container {
                if &c.id != observation || c.kind != ContainerKind::Observation {
                    return Err(Error::MalformedInput(format!(
                        "inline container {} is not observation {observation}",
                        c.id
                    )));
                }
                snapshot.insert_container(c.clone())?;
            }
            let promotion =
                attach_observation_at(snapshot, test, observation, *outcome, *confidence, timestamp)?;
            if &promotion.successor != successor {
                return Err(Error::MalformedInput(format!(
                    "successor {} does not match recorded {successor}",
                    promotion.successor
                )));
            }
            *snapshot = promotion.snapshot;
        }
    }
    Ok(())
}

fn apply_event(snapshot: &mut Snapshot, event: &Event) -> Result<()> {
    let body = event.body()?;
    apply(snapshot, &body, event.timestamp).map_err(|e| match e {
        Error::DanglingReference(_) | Error::MalformedInput(_) => e,
        other => Error::ValidationRejected(Box::new(other)),
    })
}

/// Rebuilds the snapshot from a verified log.
pub fn replay(log: &EventLog) -> Result<Snapshot> {
    if let VerificationReport::Corrupt { first_bad_seq, reason } = verify_log(log) {
        return Err(Error::ChainCorrupt { seq: first_bad_seq, reason });
    }
    let mut snapshot = Snapshot::new();
    for event in log.events() {
        apply_event(&mut snapshot, event)?;
    }
    Ok(snapshot)
}

/// A log together with its replayed snapshot; the single-writer handle.
#[derive(Clone, Debug, Default)]
pub struct Store {
    log: EventLog,
    snapshot: Snapshot,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    /// Verifies and replays `log`.
    pub fn open(log: EventLog) -> Result<Store> {
        let snapshot = replay(&log)?;
        Ok(Store { log, snapshot })
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }

    /// Appends `body` if it applies cleanly; on failure nothing changes.
    pub fn append(&mut self, body: EventBody, timestamp: i64) -> Result<&Event> {
        let mut next = self.snapshot.clone();
        apply(&mut next, &body, timestamp).map_err(|e| Error::ValidationRejected(Box::new(e)))?;
        let event = Event::seal(self.log.len() as u64, timestamp, &body, self.log.head())?;
        self.log.push_unchecked(event);
        self.snapshot = next;
        Ok(self.log.events().last().expect("just pushed"))
    }
}
