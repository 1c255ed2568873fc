// SPDX-License-Identifier: Apache-2.0

//! Embeddable knowledge-base engine.
//!
//! Project artifacts are stored as immutable, content-addressed containers
//! (Observations, Hypotheses and Tests) linked by directed associations that
//! always point at a Test. Every mutation is recorded in an append-only,
//! hash-chained event log; snapshots are replayed from it and the derived
//! views (Knowledge classification, the Hypothesis x Observation grid, status
//! summaries, reports, backlog) are recomputed from the snapshot.
//!
//! Module map:
//!
//! - [`model`]: containers, associations, snapshots, classification, validation
//! - [`canonical`]: canonical JSON encoding and SHA-256 digests
//! - [`store`]: event log, replay, tamper verification, snapshot encoding
//! - [`engine`]: grid placement, promotion, status, reports, backlog
//! - [`algebra`]: permutation, join, restriction, projection, composition
//! - [`render`]: canonical documents and CSV/table/markdown exports
//! - [`workspace`]: on-disk workspace with a single-writer lock

pub mod algebra;
pub mod canonical;
pub mod engine;
pub mod error;
pub mod model;
pub mod render;
pub mod store;
#[doc(hidden)]
pub mod testkit;
pub mod workspace;

pub use error::{Error, Result};
pub use model::{
    Association, Container, ContainerId, ContainerKind, EdgeKind, KnowledgeKind, Outcome,
    Payload, Snapshot, Violation, ViolationRule,
};
