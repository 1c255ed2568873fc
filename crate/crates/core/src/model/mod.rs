// SPDX-License-Identifier: Apache-2.0

//! Containers, associations and snapshots, with every structural rule
//! enforced at construction time.
//!
//! Associations always point at a Test. A Test may have many hypothesis
//! edges but at most one observation edge, and premise edges (Test to Test)
//! never form a cycle.

mod association;
mod classify;
mod container;
mod snapshot;
mod validate;

pub use association::{Association, EdgeKind};
pub use classify::{classify_test, KnowledgeKind};
pub use container::{
    make_container, make_container_at, Container, ContainerId, ContainerKind, Outcome, Payload,
    TestFields, SUPERSEDES_LABEL,
};
pub use snapshot::{make_association, Snapshot};
pub use validate::{validate, Violation, ViolationRule};
