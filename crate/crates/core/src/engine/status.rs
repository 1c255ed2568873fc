// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::placements;
use crate::error::{Error, Result};
use crate::model::{ContainerId, ContainerKind, Outcome, Snapshot};

/// Development status of a hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "proved")]
    Proved,
    #[serde(rename = "disproved")]
    Disproved,
    #[serde(rename = "overlooked")]
    Overlooked,
    /// Proved by some Tests and disproved by others.
    #[serde(rename = "contested")]
    Contested,
    /// No Tests in the row yet.
    #[serde(rename = "TBD")]
    Tbd,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Proved => "proved",
            Status::Disproved => "disproved",
            Status::Overlooked => "overlooked",
            Status::Contested => "contested",
            Status::Tbd => "TBD",
        }
    }

    /// Summary of a set of Test outcomes.
    ///
    /// Proved and disproved together are contested; otherwise the decisive
    /// outcome present wins. With no decisive outcome (only overlooked or
    /// still-pending predictions) the hypothesis is overlooked; with no
    /// Tests at all it is TBD.
    pub fn summarize<I: IntoIterator<Item = Outcome>>(outcomes: I) -> Status {
        let (mut any, mut proved, mut disproved) = (false, false, false);
        for o in outcomes {
            any = true;
            match o {
                Outcome::Proved => proved = true,
                Outcome::Disproved => disproved = true,
                Outcome::Overlooked | Outcome::Pending => {}
            }
        }
        match (any, proved, disproved) {
            (false, _, _) => Status::Tbd,
            (_, true, true) => Status::Contested,
            (_, true, false) => Status::Proved,
            (_, false, true) => Status::Disproved,
            (_, false, false) => Status::Overlooked,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusSummary {
    pub hypothesis: ContainerId,
    pub per_test: BTreeMap<ContainerId, Outcome>,
    pub summary: Status,
}

/// Status of `hypothesis` from every current classified Test in its row.
pub fn hypothesis_status(snapshot: &Snapshot, hypothesis: &ContainerId) -> Result<StatusSummary> {
    if snapshot.resolve(hypothesis)?.kind != ContainerKind::Hypothesis {
        return Err(Error::NotAHypothesis(hypothesis.clone()));
    }
    let per_test: BTreeMap<ContainerId, Outcome> = placements(snapshot)
        .into_iter()
        .filter(|(_, at)| &at.row == hypothesis)
        .filter_map(|(t, _)| snapshot.get(&t).and_then(|c| c.outcome()).map(|o| (t, o)))
        .collect();
    let summary = Status::summarize(per_test.values().copied());
    Ok(StatusSummary { hypothesis: hypothesis.clone(), per_test, summary })
}
