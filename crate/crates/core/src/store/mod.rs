// SPDX-License-Identifier: Apache-2.0

//! Tamper-evident persistence.
//!
//! Every mutation is an [`Event`] in an append-only [`EventLog`]. Each
//! event's hash covers its predecessor's hash, so changing any stored byte
//! breaks verification from that event on. Snapshots are rebuilt by
//! [`replay`]. Stored logs (`.ekblog`) hold one canonical JSON line per
//! event.

mod codec;
mod event;
mod log;
mod replay;

pub use codec::{
    deserialize_snapshot, serialize_snapshot, snapshot_canonical, snapshot_from_value, snapshot_value,
};
pub use event::{Event, EventBody, EventKind, GENESIS_HASH};
pub use log::{verify_bytes, verify_log, EventLog, VerificationReport};
pub use replay::{apply, replay, Store};
