// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::grid::GridCoordinate;
use super::place_test;
use crate::error::{Error, Result};
use crate::model::{classify_test, ContainerId, KnowledgeKind, Outcome, Snapshot};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub id: ContainerId,
    pub text: String,
    /// Row owner: the single hypothesis, or the abduction winner.
    pub placed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationEntry {
    pub id: ContainerId,
    pub text: String,
    pub digest: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PremiseEntry {
    pub test: ContainerId,
    pub kind: KnowledgeKind,
    pub method: String,
    pub outcome: Outcome,
    pub hypotheses: Vec<String>,
}

/// Everything known about one piece of Knowledge, gathered from the
/// containers reachable from its Test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeReport {
    pub test: ContainerId,
    pub kind: KnowledgeKind,
    pub placement: GridCoordinate,
    pub hypotheses: Vec<HypothesisEntry>,
    pub observation: Option<ObservationEntry>,
    pub method: String,
    pub metric: Option<String>,
    pub strategy: Option<String>,
    pub outcome: Outcome,
    pub confidence: Option<f64>,
    pub premise_chain: Vec<PremiseEntry>,
    pub period_tag: Option<String>,
    pub created_at: i64,
    pub supersedes: Option<String>,
}

pub fn knowledge_report(snapshot: &Snapshot, test: &ContainerId) -> Result<KnowledgeReport> {
    let kind = classify_test(snapshot, test)?;
    if kind == KnowledgeKind::Incomplete {
        return Err(Error::Unclassifiable(test.clone()));
    }
    let placement = place_test(snapshot, test)?;
    let container = snapshot.resolve(test)?;
    let fields = container
        .test_fields()
        .ok_or_else(|| Error::MalformedPayload(format!("Test {test} has malformed fields")))?;

    let hypotheses = snapshot
        .hypotheses_of(test)
        .into_iter()
        .filter_map(|h| snapshot.get(h))
        .map(|h| HypothesisEntry { id: h.id.clone(), text: h.display_text(), placed: h.id == placement.row })
        .collect();

    let observation = snapshot.observation_of(test).and_then(|o| snapshot.get(o)).map(|o| ObservationEntry {
        id: o.id.clone(),
        text: o.display_text(),
        digest: o.payload.get_str("digest").map(str::to_owned),
    });

    Ok(KnowledgeReport {
        test: test.clone(),
        kind,
        placement,
        hypotheses,
        observation,
        method: fields.method.to_owned(),
        metric: fields.metric.map(str::to_owned),
        strategy: fields.strategy.map(str::to_owned),
        outcome: fields.outcome,
        confidence: fields.confidence,
        premise_chain: premise_chain(snapshot, test),
        period_tag: container.period_tag.clone(),
        created_at: container.created_at,
        supersedes: container.supersedes().map(str::to_owned),
    })
}

/// Premises reachable from `test`, depth first, each listed once.
fn premise_chain(snapshot: &Snapshot, test: &ContainerId) -> Vec<PremiseEntry> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut stack: Vec<ContainerId> = snapshot.premises_of(test).into_iter().rev().cloned().collect();
    while let Some(p) = stack.pop() {
        if !seen.insert(p.clone()) {
            continue;
        }
        let Some(c) = snapshot.get(&p) else { continue };
        let Some(fields) = c.test_fields() else { continue };
        out.push(PremiseEntry {
            test: p.clone(),
            kind: classify_test(snapshot, &p).unwrap_or(KnowledgeKind::Incomplete),
            method: fields.method.to_owned(),
            outcome: fields.outcome,
            hypotheses: snapshot
                .hypotheses_of(&p)
                .into_iter()
                .filter_map(|h| snapshot.get(h))
                .map(|h| h.display_text())
                .collect(),
        });
        stack.extend(snapshot.premises_of(&p).into_iter().rev().cloned());
    }
    out
}
