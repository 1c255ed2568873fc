// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::model::{Association, ContainerId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report. [`Error::code`] gives the stable
/// name used by the CLI and the HTTP service.
#[derive(Debug, Error)]
pub enum Error {
    #[error("payload is empty")]
    EmptyPayload,
    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),
    #[error("malformed payload: {0}")]
    MalformedPayload(String),

    #[error("association target {target} is not a Test")]
    InvalidTarget { from: ContainerId, target: ContainerId },
    #[error("{edge} cannot start at {from} ({actual})")]
    KindMismatch { from: ContainerId, edge: String, actual: String },
    #[error("Test {test} already has observation {existing}")]
    SingleObservationViolation { test: ContainerId, existing: ContainerId },
    #[error("premise edges would form a cycle through {}", join_ids(.0))]
    CycleDetected(Vec<ContainerId>),
    #[error("premise {target} of {from} is not an induction or abduction Test")]
    InvalidPremise { from: ContainerId, target: ContainerId },
    #[error("unknown container {0}")]
    DanglingReference(ContainerId),
    #[error("winner {hypothesis} has no hypothesis edge into {test}")]
    InvalidWinner { test: ContainerId, hypothesis: ContainerId },
    #[error("Test {test} already has winner {existing}, not {proposed}")]
    WinnerConflict { test: ContainerId, existing: ContainerId, proposed: ContainerId },

    #[error("{0} is not a Test")]
    NotATest(ContainerId),
    #[error("{0} is not a Hypothesis")]
    NotAHypothesis(ContainerId),
    #[error("{0} is not an Observation")]
    NotAnObservation(ContainerId),
    #[error("Test {0} is incomplete and has no grid placement")]
    Unclassifiable(ContainerId),
    #[error("Test {0} is not an unobserved deduction")]
    NotDeduction(ContainerId),

    #[error("result violates {} rule(s): {}", .0.len(), join_violations(.0))]
    ResultInvalid(Vec<Violation>),
    #[error("snapshot has {} premise edge(s)", .0.len())]
    NotSelectable(Vec<Association>),
    #[error("unknown hypothesis {0}")]
    UnknownHypothesis(ContainerId),
    #[error("unknown observation {0}")]
    UnknownObservation(ContainerId),

    #[error("event rejected: {0}")]
    ValidationRejected(Box<Error>),
    #[error("hash chain broken at seq {seq}: {reason}")]
    ChainCorrupt { seq: u64, reason: String },
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("no container matches {0}")]
    UnknownId(String),
    #[error("{0} matches more than one container")]
    AmbiguousId(String),
    #[error("id prefix {0} is shorter than 8 hex characters")]
    InvalidIdPrefix(String),
    #[error("workspace is locked by another writer ({0})")]
    WorkspaceLocked(String),
    #[error("workspace already initialized at {0}")]
    WorkspaceExists(String),
    #[error("no workspace log at {0}")]
    NoWorkspace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable error name.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyPayload => "EmptyPayload",
            Error::InvalidOutcome(_) => "InvalidOutcome",
            Error::MalformedPayload(_) => "MalformedPayload",
            Error::InvalidTarget { .. } => "InvalidTarget",
            Error::KindMismatch { .. } => "KindMismatch",
            Error::SingleObservationViolation { .. } => "SingleObservationViolation",
            Error::CycleDetected(_) => "CycleDetected",
            Error::InvalidPremise { .. } => "InvalidPremise",
            Error::DanglingReference(_) => "DanglingReference",
            Error::InvalidWinner { .. } => "InvalidWinner",
            Error::WinnerConflict { .. } => "WinnerConflict",
            Error::NotATest(_) => "NotATest",
            Error::NotAHypothesis(_) => "NotAHypothesis",
            Error::NotAnObservation(_) => "NotAnObservation",
            Error::Unclassifiable(_) => "Unclassifiable",
            Error::NotDeduction(_) => "NotDeduction",
            Error::ResultInvalid(_) => "ResultInvalid",
            Error::NotSelectable(_) => "NotSelectable",
            Error::UnknownHypothesis(_) => "UnknownHypothesis",
            Error::UnknownObservation(_) => "UnknownObservation",
            Error::ValidationRejected(_) => "ValidationRejected",
            Error::ChainCorrupt { .. } => "ChainCorrupt",
            Error::MalformedInput(_) => "MalformedInput",
            Error::UnknownId(_) => "UnknownId",
            Error::AmbiguousId(_) => "AmbiguousId",
            Error::InvalidIdPrefix(_) => "InvalidIdPrefix",
            Error::WorkspaceLocked(_) => "WorkspaceLocked",
            Error::WorkspaceExists(_) => "WorkspaceExists",
            Error::NoWorkspace(_) => "NoWorkspace",
            Error::Io(_) => "Io",
        }
    }

    /// For wrapped errors, the innermost engine error.
    pub fn root(&self) -> &Error {
        match self {
            Error::ValidationRejected(inner) => inner.root(),
            other => other,
        }
    }

    /// Container ids the error is about, for API error bodies.
    pub fn ids(&self) -> Vec<ContainerId> {
        match self {
            Error::InvalidTarget { from, target } | Error::InvalidPremise { from, target } => {
                vec![from.clone(), target.clone()]
            }
            Error::KindMismatch { from, .. } => vec![from.clone()],
            Error::SingleObservationViolation { test, existing } => vec![test.clone(), existing.clone()],
            Error::CycleDetected(ids) => ids.clone(),
            Error::DanglingReference(id)
            | Error::NotATest(id)
            | Error::NotAHypothesis(id)
            | Error::NotAnObservation(id)
            | Error::Unclassifiable(id)
            | Error::NotDeduction(id)
            | Error::UnknownHypothesis(id)
            | Error::UnknownObservation(id) => vec![id.clone()],
            Error::InvalidWinner { test, hypothesis } => vec![test.clone(), hypothesis.clone()],
            Error::WinnerConflict { test, existing, proposed } => {
                vec![test.clone(), existing.clone(), proposed.clone()]
            }
            Error::ResultInvalid(violations) => {
                violations.iter().flat_map(|v| v.ids.iter().cloned()).collect()
            }
            Error::NotSelectable(edges) => {
                edges.iter().flat_map(|a| [a.source.clone(), a.target.clone()]).collect()
            }
            Error::ValidationRejected(inner) => inner.ids(),
            _ => Vec::new(),
        }
    }
}

fn join_ids(ids: &[ContainerId]) -> String {
    ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(" -> ")
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.rule.name()).collect::<Vec<_>>().join(", ")
}
