// SPDX-License-Identifier: Apache-2.0

use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{
    classify_test, make_container_at, Association, Container, ContainerId, ContainerKind, EdgeKind,
    KnowledgeKind, Outcome, Snapshot, SUPERSEDES_LABEL,
};

/// Result of attaching an observation to a deduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Promotion {
    pub snapshot: Snapshot,
    pub successor: ContainerId,
}

/// Attaches `observation` to the deduction `test`, stamping the successor
/// with the current time.
pub fn attach_observation(
    snapshot: &Snapshot,
    test: &ContainerId,
    observation: &ContainerId,
    outcome: Outcome,
    confidence: Option<f64>,
) -> Result<Promotion> {
    let now = chrono::Utc::now().timestamp();
    attach_observation_at(snapshot, test, observation, outcome, confidence, now)
}

/// Creates a successor of `test` carrying the observation and the new
/// outcome. The original Test and all its edges stay in place; the
/// successor copies its hypothesis and premise edges and is labeled
/// `supersedes:<test>`.
///
/// A decisive outcome turns the successor into an induction; `overlooked`
/// leaves it a deduction.
pub fn attach_observation_at(
    snapshot: &Snapshot,
    test: &ContainerId,
    observation: &ContainerId,
    outcome: Outcome,
    confidence: Option<f64>,
    created_at: i64,
) -> Result<Promotion> {
    let original = snapshot.resolve(test)?;
    if !original.is_test() {
        return Err(Error::NotATest(test.clone()));
    }
    if snapshot.resolve(observation)?.kind != ContainerKind::Observation {
        return Err(Error::NotAnObservation(observation.clone()));
    }
    if outcome == Outcome::Pending {
        return Err(Error::InvalidOutcome(format!("{outcome} cannot be attached")));
    }
    if let Some(existing) = snapshot.observation_of(test) {
        return Err(Error::SingleObservationViolation { test: test.clone(), existing: existing.clone() });
    }
    if classify_test(snapshot, test)? != KnowledgeKind::Deduction {
        return Err(Error::NotDeduction(test.clone()));
    }

    let successor = successor_of(original, outcome, confidence, created_at)?;
    if let Some(existing) = snapshot.observation_of(&successor.id) {
        return Err(Error::SingleObservationViolation {
            test: successor.id.clone(),
            existing: existing.clone(),
        });
    }

    let mut next = snapshot.clone();
    let successor_id = successor.id.clone();
    next.insert_container(successor)?;
    for h in snapshot.hypotheses_of(test) {
        next.insert_association(Association::new(h.clone(), successor_id.clone(), EdgeKind::Hypothesis))?;
    }
    for p in snapshot.premises_of(test) {
        next.insert_association(Association::new(successor_id.clone(), p.clone(), EdgeKind::Premise))?;
    }
    next.insert_association(Association::new(
        observation.clone(),
        successor_id.clone(),
        EdgeKind::Observation,
    ))?;
    Ok(Promotion { snapshot: next, successor: successor_id })
}

/// The successor container: same payload with outcome and confidence
/// replaced. A missing confidence removes the original's.
pub fn successor_of(
    original: &Container,
    outcome: Outcome,
    confidence: Option<f64>,
    created_at: i64,
) -> Result<Container> {
    let confidence = confidence
        .map(|c| {
            serde_json::Number::from_f64(c)
                .map(Value::Number)
                .ok_or_else(|| Error::MalformedPayload(format!("confidence {c} is not finite")))
        })
        .transpose()?;
    let payload = original
        .payload
        .with("outcome", Some(Value::String(outcome.name().to_owned())))?
        .with("confidence", confidence)?;
    let mut labels = original.labels.clone();
    labels.push(format!("{SUPERSEDES_LABEL}{}", original.id));
    make_container_at(ContainerKind::Test, payload, original.period_tag.clone(), labels, created_at)
}
