// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ContainerId, ContainerKind};
use crate::error::{Error, Result};

/// Edge type. Every edge points at a Test; the kind fixes the source kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "hypothesis-edge")]
    Hypothesis,
    #[serde(rename = "observation-edge")]
    Observation,
    /// Test to Test: the source is a deduction resting on the target.
    #[serde(rename = "premise-edge")]
    Premise,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [EdgeKind::Hypothesis, EdgeKind::Observation, EdgeKind::Premise];

    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Hypothesis => "hypothesis-edge",
            EdgeKind::Observation => "observation-edge",
            EdgeKind::Premise => "premise-edge",
        }
    }

    /// Container kind an edge of this kind must start from.
    pub fn source_kind(self) -> ContainerKind {
        match self {
            EdgeKind::Hypothesis => ContainerKind::Hypothesis,
            EdgeKind::Observation => ContainerKind::Observation,
            EdgeKind::Premise => ContainerKind::Test,
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeKind {
    type Err = Error;
    /// Accepts both `hypothesis-edge` and the short `hypothesis`.
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_suffix("-edge").unwrap_or(s) {
            "hypothesis" => Ok(EdgeKind::Hypothesis),
            "observation" => Ok(EdgeKind::Observation),
            "premise" => Ok(EdgeKind::Premise),
            _ => Err(Error::MalformedInput(format!("unknown edge kind {s:?}"))),
        }
    }
}

/// Directed edge into a Test.
///
/// Field order makes the derived ordering group edges by target, so a
/// Test's incoming edges form one contiguous range of a sorted set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Association {
    pub target: ContainerId,
    pub kind: EdgeKind,
    pub source: ContainerId,
}

impl Association {
    pub fn new(source: ContainerId, target: ContainerId, kind: EdgeKind) -> Self {
        Association { target, kind, source }
    }
}

impl fmt::Display for Association {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -[{}]-> {}", self.source.short(12), self.kind, self.target.short(12))
    }
}
