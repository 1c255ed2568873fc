// SPDX-License-Identifier: Apache-2.0

//! Snapshot export format (`.ekb`): one canonical JSON document with
//! top-level keys `associations`, `containers` and `winners`, each sorted.

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::model::{Association, Container, ContainerId, Snapshot};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc {
    associations: Vec<Association>,
    containers: Vec<Container>,
    winners: Vec<WinnerDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WinnerDoc {
    hypothesis: ContainerId,
    test: ContainerId,
}

/// The snapshot document as a JSON value.
pub fn snapshot_value(snapshot: &Snapshot) -> serde_json::Value {
    let doc = SnapshotDoc {
        associations: snapshot.associations().iter().cloned().collect(),
        containers: snapshot.containers().values().cloned().collect(),
        winners: snapshot
            .winners()
            .iter()
            .map(|(t, h)| WinnerDoc { hypothesis: h.clone(), test: t.clone() })
            .collect(),
    };
    serde_json::to_value(doc).expect("snapshot documents always serialize")
}

/// Canonical text of the snapshot.
pub fn snapshot_canonical(snapshot: &Snapshot) -> String {
    let v = canonical::normalize_nullable(&snapshot_value(snapshot)).expect("payloads are already canonical");
    canonical::to_string(&v)
}

pub fn serialize_snapshot(snapshot: &Snapshot) -> Vec<u8> {
    snapshot_canonical(snapshot).into_bytes()
}

/// Parses a snapshot document. Container ids are checked against content;
/// structural rules are left to [`validate`](crate::model::validate).
pub fn deserialize_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let doc: SnapshotDoc =
        serde_json::from_slice(bytes).map_err(|e| Error::MalformedInput(format!("snapshot: {e}")))?;
    snapshot_from_doc(doc)
}

pub fn snapshot_from_value(value: &serde_json::Value) -> Result<Snapshot> {
    let doc = SnapshotDoc::deserialize(value).map_err(|e| Error::MalformedInput(format!("snapshot: {e}")))?;
    snapshot_from_doc(doc)
}

fn snapshot_from_doc(doc: SnapshotDoc) -> Result<Snapshot> {
    for c in &doc.containers {
        c.check().map_err(|e| Error::MalformedInput(format!("container {}: {e}", c.id)))?;
    }
    Ok(Snapshot::from_parts_unchecked(
        doc.containers,
        doc.associations,
        doc.winners.into_iter().map(|w| (w.test, w.hypothesis)),
    ))
}
