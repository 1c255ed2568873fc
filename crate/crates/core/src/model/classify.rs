// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ContainerId, EdgeKind, Outcome, Snapshot};
use crate::error::{Error, Result};

/// Knowledge a Test represents. Always derived from edges and outcome,
/// never stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KnowledgeKind {
    /// One hypothesis, one observation, decisive outcome.
    Induction,
    /// Several hypotheses, one observation, decisive outcome, a designated winner.
    Abduction,
    /// One hypothesis resting on an induction/abduction premise, evidence
    /// absent or overlooked.
    Deduction,
    /// Anything else: a Test still being wired up.
    Incomplete,
}

impl KnowledgeKind {
    pub fn name(self) -> &'static str {
        match self {
            KnowledgeKind::Induction => "Induction",
            KnowledgeKind::Abduction => "Abduction",
            KnowledgeKind::Deduction => "Deduction",
            KnowledgeKind::Incomplete => "Incomplete",
        }
    }
}

impl fmt::Display for KnowledgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies a Test.
pub fn classify_test(snapshot: &Snapshot, test: &ContainerId) -> Result<KnowledgeKind> {
    let container = snapshot.resolve(test)?;
    if !container.is_test() {
        return Err(Error::NotATest(test.clone()));
    }
    Ok(classify_unchecked(snapshot, test))
}

fn outcome_of(snapshot: &Snapshot, test: &ContainerId) -> Option<Outcome> {
    snapshot.get(test).and_then(|c| c.outcome())
}

/// Induction/Abduction/Incomplete, ignoring premise edges entirely. The
/// induction and abduction rules never look at premises, so a premise's
/// kind needs no recursion.
pub(crate) fn base_kind(snapshot: &Snapshot, test: &ContainerId) -> KnowledgeKind {
    let hyps = snapshot.hypotheses_of(test);
    let obs = snapshot.sources(test, EdgeKind::Observation).len();
    let decisive = outcome_of(snapshot, test).is_some_and(Outcome::is_decisive);
    if obs == 1 && decisive {
        if hyps.len() == 1 {
            return KnowledgeKind::Induction;
        }
        if hyps.len() >= 2 && snapshot.winner(test).is_some_and(|w| hyps.contains(&w)) {
            return KnowledgeKind::Abduction;
        }
    }
    KnowledgeKind::Incomplete
}

pub(crate) fn classify_unchecked(snapshot: &Snapshot, test: &ContainerId) -> KnowledgeKind {
    let base = base_kind(snapshot, test);
    if base != KnowledgeKind::Incomplete {
        return base;
    }
    let hyps = snapshot.hypotheses_of(test).len();
    let obs = snapshot.sources(test, EdgeKind::Observation).len();
    let unobserved = obs == 0 || (obs == 1 && outcome_of(snapshot, test) == Some(Outcome::Overlooked));
    if hyps == 1 && unobserved {
        let grounded = snapshot.premises_of(test).into_iter().any(|p| {
            matches!(base_kind(snapshot, p), KnowledgeKind::Induction | KnowledgeKind::Abduction)
        });
        if grounded {
            return KnowledgeKind::Deduction;
        }
    }
    KnowledgeKind::Incomplete
}
