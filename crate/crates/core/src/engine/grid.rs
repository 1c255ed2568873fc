// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{classify_test, ContainerId, ContainerKind, KnowledgeKind, Snapshot};

pub const PENDING: &str = "PENDING";

/// A grid row or column key: a container id, or the shared PENDING sentinel.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GridKey {
    Id(ContainerId),
    Pending,
}

impl GridKey {
    pub fn as_str(&self) -> &str {
        match self {
            GridKey::Id(id) => id.as_str(),
            GridKey::Pending => PENDING,
        }
    }

    pub fn id(&self) -> Option<&ContainerId> {
        match self {
            GridKey::Id(id) => Some(id),
            GridKey::Pending => None,
        }
    }
}

impl fmt::Display for GridKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for GridKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridKey::Id(id) => write!(f, "{id:?}"),
            GridKey::Pending => f.write_str(PENDING),
        }
    }
}

impl Serialize for GridKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for GridKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == PENDING {
            Ok(GridKey::Pending)
        } else {
            ContainerId::parse(&s).map(GridKey::Id).map_err(serde::de::Error::custom)
        }
    }
}

/// Where a classified Test sits: its hypothesis row and observation column
/// (or PENDING).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridCoordinate {
    pub row: ContainerId,
    pub column: GridKey,
}

/// Places a classified Test.
///
/// Induction goes to (hypothesis, observation), abduction to (winner,
/// observation), deduction to (hypothesis, PENDING).
pub fn place_test(snapshot: &Snapshot, test: &ContainerId) -> Result<GridCoordinate> {
    let kind = classify_test(snapshot, test)?;
    let first_hypothesis = || snapshot.hypotheses_of(test).first().map(|h| (*h).clone());
    let observation = || snapshot.observation_of(test).cloned();
    let coordinate = match kind {
        KnowledgeKind::Induction => first_hypothesis().zip(observation()).map(|(row, o)| GridCoordinate {
            row,
            column: GridKey::Id(o),
        }),
        KnowledgeKind::Abduction => snapshot.winner(test).cloned().zip(observation()).map(|(row, o)| {
            GridCoordinate { row, column: GridKey::Id(o) }
        }),
        KnowledgeKind::Deduction => first_hypothesis().map(|row| GridCoordinate { row, column: GridKey::Pending }),
        KnowledgeKind::Incomplete => None,
    };
    coordinate.ok_or_else(|| Error::Unclassifiable(test.clone()))
}

/// Tests shown in derived views: every Test without a successor, ordered by
/// `(created_at, id)`. Superseded versions stay in the store.
pub fn current_tests(snapshot: &Snapshot) -> Vec<&ContainerId> {
    let superseded = snapshot.superseded();
    snapshot
        .ordered(ContainerKind::Test)
        .into_iter()
        .filter(|c| !superseded.contains(c.id.as_str()))
        .map(|c| &c.id)
        .collect()
}

/// Current, classified Tests with their coordinates.
pub fn placements(snapshot: &Snapshot) -> Vec<(ContainerId, GridCoordinate)> {
    current_tests(snapshot)
        .into_iter()
        .filter_map(|t| place_test(snapshot, t).ok().map(|c| (t.clone(), c)))
        .collect()
}

/// Materialized Hypothesis x Observation table.
///
/// Rows and columns follow `(created_at, id)` of their containers; the
/// PENDING column is always last. `cells` holds non-empty cells only and
/// `tbd` the empty (Hypothesis, Observation) pairs. `permute` swaps the
/// axes and flips `transposed`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GridView {
    pub rows: Vec<GridKey>,
    pub columns: Vec<GridKey>,
    pub cells: BTreeMap<(GridKey, GridKey), Vec<ContainerId>>,
    pub tbd: BTreeSet<(GridKey, GridKey)>,
    pub transposed: bool,
}

impl GridView {
    pub fn cell(&self, row: &GridKey, column: &GridKey) -> &[ContainerId] {
        self.cells
            .get(&(row.clone(), column.clone()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_tbd(&self, row: &GridKey, column: &GridKey) -> bool {
        self.tbd.contains(&(row.clone(), column.clone()))
    }

    /// Hypothesis axis, whichever way the grid is oriented.
    pub fn hypothesis_keys(&self) -> &[GridKey] {
        if self.transposed {
            &self.columns
        } else {
            &self.rows
        }
    }
}

pub fn grid_view(snapshot: &Snapshot) -> GridView {
    let rows: Vec<GridKey> = snapshot
        .ordered(ContainerKind::Hypothesis)
        .into_iter()
        .map(|c| GridKey::Id(c.id.clone()))
        .collect();
    let mut columns: Vec<GridKey> = snapshot
        .ordered(ContainerKind::Observation)
        .into_iter()
        .map(|c| GridKey::Id(c.id.clone()))
        .collect();
    columns.push(GridKey::Pending);

    let mut cells: BTreeMap<(GridKey, GridKey), Vec<ContainerId>> = BTreeMap::new();
    for (test, at) in placements(snapshot) {
        cells.entry((GridKey::Id(at.row), at.column)).or_default().push(test);
    }

    let tbd = rows
        .iter()
        .flat_map(|r| columns.iter().map(move |c| (r.clone(), c.clone())))
        .filter(|(_, c)| *c != GridKey::Pending)
        .filter(|key| !cells.contains_key(key))
        .collect();

    GridView { rows, columns, cells, tbd, transposed: false }
}
