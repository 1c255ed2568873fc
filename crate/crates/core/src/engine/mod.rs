// SPDX-License-Identifier: Apache-2.0

//! Views derived from a snapshot: grid placement, deduction promotion,
//! hypothesis status, Knowledge reports and the TBD backlog.
//!
//! All functions are pure. Views only show *current* Tests; a Test that has
//! been superseded by a promotion successor remains in the snapshot and in
//! reports but leaves the grid.

mod backlog;
mod grid;
mod promote;
mod report;
mod status;

pub use backlog::{backlog, BacklogEntry, BacklogKind};
pub use grid::{current_tests, grid_view, place_test, placements, GridCoordinate, GridKey, GridView, PENDING};
pub use promote::{attach_observation, attach_observation_at, successor_of, Promotion};
pub use report::{knowledge_report, HypothesisEntry, KnowledgeReport, ObservationEntry, PremiseEntry};
pub use status::{hypothesis_status, Status, StatusSummary};
