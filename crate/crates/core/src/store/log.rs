// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::event::{Event, EventBody, GENESIS_HASH};
use super::replay::{apply, replay};
use crate::error::{Error, Result};

/// Append-only, hash-chained list of events.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        EventLog::default()
    }

    /// Wraps events as-is; nothing is verified. See [`verify_log`].
    pub fn from_events(events: Vec<Event>) -> Self {
        EventLog { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Hash of the last event, or the genesis hash.
    pub fn head(&self) -> &str {
        self.events.last().map(|e| e.hash.as_str()).unwrap_or(GENESIS_HASH)
    }

    /// Returns this log extended by `body`, stamped with the current time.
    pub fn append_event(&self, body: EventBody) -> Result<EventLog> {
        self.append_event_at(body, chrono::Utc::now().timestamp())
    }

    /// Returns this log extended by `body`. The existing chain is verified
    /// and replayed, and the event must apply cleanly to the result;
    /// otherwise the error is returned and `self` is untouched.
    pub fn append_event_at(&self, body: EventBody, timestamp: i64) -> Result<EventLog> {
        if let VerificationReport::Corrupt { first_bad_seq, reason } = verify_log(self) {
            return Err(Error::ChainCorrupt { seq: first_bad_seq, reason });
        }
        let mut snapshot = replay(self)?;
        let event = Event::seal(self.events.len() as u64, timestamp, &body, self.head())?;
        apply(&mut snapshot, &body, timestamp).map_err(|e| Error::ValidationRejected(Box::new(e)))?;
        let mut next = self.clone();
        next.events.push(event);
        Ok(next)
    }

    pub(crate) fn push_unchecked(&mut self, event: Event) {
        self.events.push(event);
    }

    /// Stored form: one canonical line per event, each ending in `\n`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for e in &self.events {
            out.extend_from_slice(e.to_line().as_bytes());
            out.push(b'\n');
        }
        out
    }

    /// Parses the stored form and verifies the chain.
    pub fn from_bytes(bytes: &[u8]) -> Result<EventLog> {
        match parse_and_verify(bytes) {
            (log, VerificationReport::Ok { .. }) => Ok(log),
            (_, VerificationReport::Corrupt { first_bad_seq, reason }) => {
                Err(Error::ChainCorrupt { seq: first_bad_seq, reason })
            }
        }
    }
}

/// Outcome of a chain check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum VerificationReport {
    Ok { events: u64, head: String },
    Corrupt { first_bad_seq: u64, reason: String },
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, VerificationReport::Ok { .. })
    }

    fn corrupt(seq: usize, reason: impl Into<String>) -> Self {
        VerificationReport::Corrupt { first_bad_seq: seq as u64, reason: reason.into() }
    }
}

fn is_hex64(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// Checks seq density, hash linkage and every event hash. Reports the
/// first event that fails.
pub fn verify_log(log: &EventLog) -> VerificationReport {
    let mut prev = GENESIS_HASH;
    for (i, e) in log.events.iter().enumerate() {
        if let Some(reason) = check_event(i, e, prev) {
            return VerificationReport::corrupt(i, reason);
        }
        prev = &e.hash;
    }
    VerificationReport::Ok { events: log.events.len() as u64, head: prev.to_owned() }
}

fn check_event(index: usize, e: &Event, prev: &str) -> Option<String> {
    if e.seq != index as u64 {
        return Some(format!("expected seq {index}, found {}", e.seq));
    }
    if e.prev_hash != prev {
        return Some("prev_hash does not match the preceding event".into());
    }
    if !is_hex64(&e.hash) {
        return Some("hash is not 64 lowercase hex".into());
    }
    if e.compute_hash() != e.hash {
        return Some("hash does not match event content".into());
    }
    None
}

/// Verifies the stored form byte for byte: every line must parse, be in
/// canonical form, end with a newline and chain correctly. Corruption is
/// reported at the line index where it is first seen.
pub fn verify_bytes(bytes: &[u8]) -> VerificationReport {
    parse_and_verify(bytes).1
}

fn parse_and_verify(bytes: &[u8]) -> (EventLog, VerificationReport) {
    let mut log = EventLog::new();
    let mut rest = bytes;
    let mut index = 0usize;
    while !rest.is_empty() {
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            return (log, VerificationReport::corrupt(index, "line is not newline-terminated"));
        };
        let line = &rest[..end];
        rest = &rest[end + 1..];
        let event = match parse_line(line) {
            Ok(e) => e,
            Err(reason) => return (log, VerificationReport::corrupt(index, reason)),
        };
        if let Some(reason) = check_event(index, &event, log.head()) {
            return (log, VerificationReport::corrupt(index, reason));
        }
        log.events.push(event);
        index += 1;
    }
    let report = VerificationReport::Ok { events: index as u64, head: log.head().to_owned() };
    (log, report)
}

fn parse_line(line: &[u8]) -> std::result::Result<Event, String> {
    let text = std::str::from_utf8(line).map_err(|_| "line is not UTF-8".to_owned())?;
    let event: Event = serde_json::from_str(text).map_err(|e| format!("unparsable event: {e}"))?;
    if event.to_line() != text {
        return Err("event is not in canonical form".into());
    }
    Ok(event)
}
