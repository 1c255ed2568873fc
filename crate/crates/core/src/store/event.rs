// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::canonical;
use crate::error::{Error, Result};
use crate::model::{Association, Container, ContainerId, Outcome};

/// `prev_hash` of the genesis event.
pub const GENESIS_HASH: &str = "0000000000000000000000000000000000000000000000000000000000000000";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    AddContainer,
    AddAssociation,
    SetWinner,
    AttachObservation,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::AddContainer => "AddContainer",
            EventKind::AddAssociation => "AddAssociation",
            EventKind::SetWinner => "SetWinner",
            EventKind::AttachObservation => "AttachObservation",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One entry of the hash chain.
///
/// `hash` is SHA-256 over the canonical text of
/// `{"kind","payload","prev_hash","seq","timestamp"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub seq: u64,
    pub timestamp: i64,
    pub kind: EventKind,
    pub payload: Value,
    pub prev_hash: String,
    pub hash: String,
}

impl Event {
    /// Seals a new event onto `prev_hash`.
    pub fn seal(seq: u64, timestamp: i64, body: &EventBody, prev_hash: &str) -> Result<Event> {
        let payload = canonical::normalize_nullable(&body.to_payload())?;
        let mut event = Event {
            seq,
            timestamp,
            kind: body.kind(),
            payload,
            prev_hash: prev_hash.to_owned(),
            hash: String::new(),
        };
        event.hash = event.compute_hash();
        Ok(event)
    }

    pub fn compute_hash(&self) -> String {
        let text = canonical::to_string(&json!({
            "kind": self.kind.name(),
            "payload": self.payload,
            "prev_hash": self.prev_hash,
            "seq": self.seq,
            "timestamp": self.timestamp,
        }));
        canonical::sha256_hex(text.as_bytes())
    }

    /// Stored form: one canonical line, without the trailing newline.
    pub fn to_line(&self) -> String {
        canonical::to_string(&json!({
            "hash": self.hash,
            "kind": self.kind.name(),
            "payload": self.payload,
            "prev_hash": self.prev_hash,
            "seq": self.seq,
            "timestamp": self.timestamp,
        }))
    }

    pub fn body(&self) -> Result<EventBody> {
        EventBody::from_payload(self.kind, &self.payload)
    }
}

/// Typed event payloads.
#[derive(Clone, Debug, PartialEq)]
pub enum EventBody {
    AddContainer(Container),
    AddAssociation(Association),
    SetWinner {
        test: ContainerId,
        hypothesis: ContainerId,
    },
    /// Promotion of a deduction. The successor Test is derived during
    /// replay (its creation time is the event timestamp) and must hash to
    /// `successor`. An inline observation container is added first.
    AttachObservation {
        test: ContainerId,
        observation: ContainerId,
        outcome: Outcome,
        confidence: Option<f64>,
        successor: ContainerId,
        observation_container: Option<Container>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WinnerPayload {
    test: ContainerId,
    hypothesis: ContainerId,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttachPayload {
    test: ContainerId,
    observation: ContainerId,
    outcome: Outcome,
    confidence: Option<f64>,
    successor: ContainerId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observation_container: Option<Container>,
}

impl EventBody {
    pub fn kind(&self) -> EventKind {
        match self {
            EventBody::AddContainer(_) => EventKind::AddContainer,
            EventBody::AddAssociation(_) => EventKind::AddAssociation,
            EventBody::SetWinner { .. } => EventKind::SetWinner,
            EventBody::AttachObservation { .. } => EventKind::AttachObservation,
        }
    }

    pub fn to_payload(&self) -> Value {
        let v = match self {
            EventBody::AddContainer(c) => serde_json::to_value(c),
            EventBody::AddAssociation(a) => serde_json::to_value(a),
            EventBody::SetWinner { test, hypothesis } => {
                serde_json::to_value(WinnerPayload { test: test.clone(), hypothesis: hypothesis.clone() })
            }
            EventBody::AttachObservation {
                test,
                observation,
                outcome,
                confidence,
                successor,
                observation_container,
            } => serde_json::to_value(AttachPayload {
                test: test.clone(),
                observation: observation.clone(),
                outcome: *outcome,
                confidence: *confidence,
                successor: successor.clone(),
                observation_container: observation_container.clone(),
            }),
        };
        v.expect("event payloads always serialize")
    }

    pub fn from_payload(kind: EventKind, payload: &Value) -> Result<EventBody> {
        fn parse<T: serde::de::DeserializeOwned>(kind: EventKind, v: &Value) -> Result<T> {
            T::deserialize(v).map_err(|e| Error::MalformedInput(format!("{kind} payload: {e}")))
        }
        Ok(match kind {
            EventKind::AddContainer => EventBody::AddContainer(parse(kind, payload)?),
            EventKind::AddAssociation => EventBody::AddAssociation(parse(kind, payload)?),
            EventKind::SetWinner => {
                let p: WinnerPayload = parse(kind, payload)?;
                EventBody::SetWinner { test: p.test, hypothesis: p.hypothesis }
            }
            EventKind::AttachObservation => {
                let p: AttachPayload = parse(kind, payload)?;
                EventBody::AttachObservation {
                    test: p.test,
                    observation: p.observation,
                    outcome: p.outcome,
                    confidence: p.confidence,
                    successor: p.successor,
                    observation_container: p.observation_container,
                }
            }
        })
    }
}
