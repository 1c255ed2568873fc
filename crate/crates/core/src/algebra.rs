// SPDX-License-Identifier: Apache-2.0

//! Relational operations over knowledge bases.
//!
//! Permutation and join work on any input. Restriction (select rows),
//! projection (select columns) and composition need a *selectable*
//! snapshot: one without premise edges, i.e. holding only induction and
//! abduction Knowledge, because dropping a row or column could otherwise
//! orphan a deduction's premise.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::{place_test, GridView};
use crate::error::{Error, Result};
use crate::model::{validate, Association, ContainerId, ContainerKind, Snapshot};

/// Swaps rows and columns. Applying it twice gives back the input.
pub fn permute(grid: &GridView) -> GridView {
    let swap = |(r, c): &(_, _)| (Clone::clone(c), Clone::clone(r));
    GridView {
        rows: grid.columns.clone(),
        columns: grid.rows.clone(),
        cells: grid.cells.iter().map(|(k, v)| (swap(k), v.clone())).collect(),
        tbd: grid.tbd.iter().map(swap).collect(),
        transposed: !grid.transposed,
    }
}

/// Union of two snapshots.
///
/// Containers merge by id; content addressing makes equal ids equal
/// content, and only the creation time can differ, in which case the
/// earlier one is kept. Winner designations must agree.
pub fn join(a: &Snapshot, b: &Snapshot) -> Result<Snapshot> {
    let mut out = a.clone();
    {
        let (containers, associations, winners) = out.parts_mut();
        for (id, c) in b.containers() {
            match containers.get_mut(id) {
                Some(existing) if existing.created_at <= c.created_at => {}
                Some(existing) => *existing = c.clone(),
                None => {
                    containers.insert(id.clone(), c.clone());
                }
            }
        }
        associations.extend(b.associations().iter().cloned());
        for (test, hyp) in b.winners() {
            match winners.get(test) {
                Some(existing) if existing != hyp => {
                    return Err(Error::WinnerConflict {
                        test: test.clone(),
                        existing: existing.clone(),
                        proposed: hyp.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    winners.insert(test.clone(), hyp.clone());
                }
            }
        }
    }
    let violations = validate(&out);
    if violations.is_empty() {
        Ok(out)
    } else {
        Err(Error::ResultInvalid(violations))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectabilityReport {
    pub selectable: bool,
    pub offending_premise_edges: Vec<Association>,
}

pub fn is_selectable(snapshot: &Snapshot) -> SelectabilityReport {
    let offending: Vec<Association> = snapshot.premise_edges().cloned().collect();
    SelectabilityReport { selectable: offending.is_empty(), offending_premise_edges: offending }
}

fn require_selectable(snapshot: &Snapshot) -> Result<()> {
    let report = is_selectable(snapshot);
    if report.selectable {
        Ok(())
    } else {
        Err(Error::NotSelectable(report.offending_premise_edges))
    }
}

/// Copies `snapshot` keeping only `keep` containers, the edges between
/// them and the winners of kept Tests.
fn filtered(snapshot: &Snapshot, keep: &BTreeSet<&ContainerId>) -> Snapshot {
    Snapshot::from_parts_unchecked(
        snapshot.containers().values().filter(|c| keep.contains(&c.id)).cloned(),
        snapshot
            .associations()
            .iter()
            .filter(|a| keep.contains(&a.source) && keep.contains(&a.target))
            .cloned(),
        snapshot
            .winners()
            .iter()
            .filter(|(t, _)| keep.contains(t))
            .map(|(t, h)| (t.clone(), h.clone())),
    )
}

/// Selects rows.
///
/// Keeps every Observation, the Hypotheses in `keep_rows`, and every Test
/// whose grid row is kept, together with all its hypotheses (losing
/// abduction candidates stay as containers so the Test remains intact).
/// An unplaced Test is kept when all of its hypotheses are kept.
pub fn restrict(snapshot: &Snapshot, keep_rows: &BTreeSet<ContainerId>) -> Result<Snapshot> {
    require_selectable(snapshot)?;
    for h in keep_rows {
        if snapshot.get(h).map(|c| c.kind) != Some(ContainerKind::Hypothesis) {
            return Err(Error::UnknownHypothesis(h.clone()));
        }
    }
    let mut keep: BTreeSet<&ContainerId> = keep_rows.iter().collect();
    for c in snapshot.containers().values() {
        match c.kind {
            ContainerKind::Observation => {
                keep.insert(&c.id);
            }
            ContainerKind::Hypothesis => {}
            ContainerKind::Test => {
                let hyps = snapshot.hypotheses_of(&c.id);
                let kept = match place_test(snapshot, &c.id) {
                    Ok(at) => keep_rows.contains(&at.row),
                    Err(_) => hyps.iter().all(|h| keep_rows.contains(*h)),
                };
                if kept {
                    keep.insert(&c.id);
                    keep.extend(hyps);
                }
            }
        }
    }
    Ok(filtered(snapshot, &keep))
}

/// Selects columns: keeps every Hypothesis, the Observations in
/// `keep_cols`, and the Tests whose observation is kept (Tests without an
/// observation stay).
pub fn project(snapshot: &Snapshot, keep_cols: &BTreeSet<ContainerId>) -> Result<Snapshot> {
    require_selectable(snapshot)?;
    for o in keep_cols {
        if snapshot.get(o).map(|c| c.kind) != Some(ContainerKind::Observation) {
            return Err(Error::UnknownObservation(o.clone()));
        }
    }
    let keep: BTreeSet<&ContainerId> = snapshot
        .containers()
        .values()
        .filter(|c| match c.kind {
            ContainerKind::Hypothesis => true,
            ContainerKind::Observation => keep_cols.contains(&c.id),
            ContainerKind::Test => snapshot.observation_of(&c.id).is_none_or(|o| keep_cols.contains(o)),
        })
        .map(|c| &c.id)
        .collect();
    Ok(filtered(snapshot, &keep))
}

/// One input of [`compose`]. `None` selects every row (or column).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComposePart {
    pub snapshot: Snapshot,
    pub rows: Option<BTreeSet<ContainerId>>,
    pub cols: Option<BTreeSet<ContainerId>>,
}

impl ComposePart {
    pub fn all(snapshot: Snapshot) -> Self {
        ComposePart { snapshot, rows: None, cols: None }
    }
}

fn all_of(snapshot: &Snapshot, kind: ContainerKind) -> BTreeSet<ContainerId> {
    snapshot.containers().values().filter(|c| c.kind == kind).map(|c| c.id.clone()).collect()
}

/// Projects and restricts every part, then joins the results left to right.
pub fn compose(parts: &[ComposePart]) -> Result<Snapshot> {
    for part in parts {
        require_selectable(&part.snapshot)?;
    }
    let mut acc = Snapshot::new();
    for part in parts {
        let cols = part.cols.clone().unwrap_or_else(|| all_of(&part.snapshot, ContainerKind::Observation));
        let projected = project(&part.snapshot, &cols)?;
        let rows = part.rows.clone().unwrap_or_else(|| all_of(&part.snapshot, ContainerKind::Hypothesis));
        let selected = restrict(&projected, &rows)?;
        acc = join(&acc, &selected)?;
    }
    Ok(acc)
}

/// Hypotheses a restriction keeps only as losing abduction candidates.
/// These are exactly what can differ between the two orders of
/// `restrict` and `project`.
pub fn retained_candidates(snapshot: &Snapshot, keep_rows: &BTreeSet<ContainerId>) -> BTreeSet<ContainerId> {
    let mut out = BTreeMap::new();
    for (test, hyp) in snapshot.winners() {
        if keep_rows.contains(hyp) {
            for h in snapshot.hypotheses_of(test) {
                if !keep_rows.contains(h) {
                    out.insert(h.clone(), ());
                }
            }
        }
    }
    out.into_keys().collect()
}
