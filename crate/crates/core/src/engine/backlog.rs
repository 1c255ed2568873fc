// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::grid::{grid_view, GridKey};
use crate::model::{ContainerId, Snapshot};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BacklogKind {
    /// Empty (Hypothesis, Observation) cell: a Test to be done.
    Tbd,
    /// Deduction waiting for a proving or disproving Observation.
    PendingDeduction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacklogEntry {
    pub kind: BacklogKind,
    pub period_tag: Option<String>,
    pub row: ContainerId,
    pub column: GridKey,
    /// The waiting Test, for pending deductions.
    pub test: Option<ContainerId>,
}

/// TBD cells and pending deductions, sorted by (period tag, row id,
/// column id). Untagged items sort after tagged ones. A TBD cell takes the
/// hypothesis's period tag, falling back to the observation's.
pub fn backlog(snapshot: &Snapshot) -> Vec<BacklogEntry> {
    let grid = grid_view(snapshot);
    let tag_of = |id: &ContainerId| snapshot.get(id).and_then(|c| c.period_tag.clone());

    let mut out: Vec<BacklogEntry> = Vec::new();
    for (row, column) in &grid.tbd {
        let (Some(h), Some(o)) = (row.id(), column.id()) else { continue };
        out.push(BacklogEntry {
            kind: BacklogKind::Tbd,
            period_tag: tag_of(h).or_else(|| tag_of(o)),
            row: h.clone(),
            column: column.clone(),
            test: None,
        });
    }
    for ((row, column), tests) in &grid.cells {
        if *column != GridKey::Pending {
            continue;
        }
        let Some(h) = row.id() else { continue };
        for t in tests {
            out.push(BacklogEntry {
                kind: BacklogKind::PendingDeduction,
                period_tag: tag_of(t),
                row: h.clone(),
                column: GridKey::Pending,
                test: Some(t.clone()),
            });
        }
    }
    out.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    out
}

fn sort_key(e: &BacklogEntry) -> (bool, Option<&str>, &ContainerId, &GridKey, Option<&ContainerId>) {
    (e.period_tag.is_none(), e.period_tag.as_deref(), &e.row, &e.column, e.test.as_ref())
}
