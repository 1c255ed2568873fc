// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::classify::base_kind;
use super::{ContainerId, ContainerKind, EdgeKind, KnowledgeKind, Snapshot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationRule {
    /// Container id, payload or Test fields are inconsistent.
    MalformedContainer,
    DanglingReference,
    InvalidTarget,
    KindMismatch,
    SingleObservationViolation,
    CycleDetected,
    InvalidPremise,
    InvalidWinner,
}

impl ViolationRule {
    pub fn name(self) -> &'static str {
        match self {
            ViolationRule::MalformedContainer => "MalformedContainer",
            ViolationRule::DanglingReference => "DanglingReference",
            ViolationRule::InvalidTarget => "InvalidTarget",
            ViolationRule::KindMismatch => "KindMismatch",
            ViolationRule::SingleObservationViolation => "SingleObservationViolation",
            ViolationRule::CycleDetected => "CycleDetected",
            ViolationRule::InvalidPremise => "InvalidPremise",
            ViolationRule::InvalidWinner => "InvalidWinner",
        }
    }
}

/// One broken invariant and the ids involved.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub rule: ViolationRule,
    pub ids: Vec<ContainerId>,
}

impl Violation {
    fn new(rule: ViolationRule, ids: Vec<ContainerId>) -> Self {
        Violation { rule, ids }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule.name())?;
        for id in &self.ids {
            write!(f, " {}", id.short(12))?;
        }
        Ok(())
    }
}

/// Re-checks every structural invariant. Empty result means valid.
pub fn validate(snapshot: &Snapshot) -> Vec<Violation> {
    let mut out = Vec::new();

    for c in snapshot.containers().values() {
        if c.check().is_err() {
            out.push(Violation::new(ViolationRule::MalformedContainer, vec![c.id.clone()]));
        }
    }

    let mut observation_edges: BTreeMap<&ContainerId, Vec<&ContainerId>> = BTreeMap::new();
    for a in snapshot.associations() {
        let ids = vec![a.source.clone(), a.target.clone()];
        let (src, dst) = (snapshot.get(&a.source), snapshot.get(&a.target));
        let (Some(src), Some(dst)) = (src, dst) else {
            out.push(Violation::new(ViolationRule::DanglingReference, ids));
            continue;
        };
        if dst.kind != ContainerKind::Test {
            out.push(Violation::new(ViolationRule::InvalidTarget, ids.clone()));
        }
        if src.kind != a.kind.source_kind() {
            out.push(Violation::new(ViolationRule::KindMismatch, ids.clone()));
        }
        if a.kind == EdgeKind::Observation {
            observation_edges.entry(&a.target).or_default().push(&a.source);
        }
    }
    for (test, sources) in observation_edges {
        if sources.len() > 1 {
            let mut ids = vec![test.clone()];
            ids.extend(sources.into_iter().cloned());
            out.push(Violation::new(ViolationRule::SingleObservationViolation, ids));
        }
    }

    for cycle in premise_cycles(snapshot) {
        out.push(Violation::new(ViolationRule::CycleDetected, cycle));
    }

    for a in snapshot.premise_edges() {
        if snapshot.contains(&a.target)
            && !matches!(base_kind(snapshot, &a.target), KnowledgeKind::Induction | KnowledgeKind::Abduction)
        {
            out.push(Violation::new(
                ViolationRule::InvalidPremise,
                vec![a.source.clone(), a.target.clone()],
            ));
        }
    }

    for (test, hyp) in snapshot.winners() {
        let ok = snapshot.contains(test)
            && snapshot.get(hyp).is_some_and(|h| h.kind == ContainerKind::Hypothesis)
            && snapshot.hypotheses_of(test).contains(&hyp);
        if !ok {
            let rule = if snapshot.contains(test) && snapshot.contains(hyp) {
                ViolationRule::InvalidWinner
            } else {
                ViolationRule::DanglingReference
            };
            out.push(Violation::new(rule, vec![test.clone(), hyp.clone()]));
        }
    }

    out
}

/// Every cycle closed by a back edge in a depth-first walk of the premise
/// relation, each reported as its node path (first node repeated at the end).
fn premise_cycles(snapshot: &Snapshot) -> Vec<Vec<ContainerId>> {
    let mut adjacency: BTreeMap<&ContainerId, Vec<&ContainerId>> = BTreeMap::new();
    for a in snapshot.premise_edges() {
        adjacency.entry(&a.source).or_default().push(&a.target);
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<&ContainerId, Mark> = BTreeMap::new();
    let mut cycles = Vec::new();
    let mut seen_sets: BTreeSet<BTreeSet<&ContainerId>> = BTreeSet::new();

    for &root in adjacency.keys() {
        if marks.contains_key(root) {
            continue;
        }
        // Iterative DFS: (node, next child index); `path` mirrors the stack.
        let mut stack: Vec<(&ContainerId, usize)> = vec![(root, 0)];
        let mut path: Vec<&ContainerId> = vec![root];
        marks.insert(root, Mark::Active);
        while let Some((node, idx)) = stack.last_mut() {
            let children = adjacency.get(*node).map(Vec::as_slice).unwrap_or(&[]);
            if *idx < children.len() {
                let child = children[*idx];
                *idx += 1;
                match marks.get(child) {
                    None => {
                        marks.insert(child, Mark::Active);
                        stack.push((child, 0));
                        path.push(child);
                    }
                    Some(Mark::Active) => {
                        let start = path.iter().position(|n| *n == child).unwrap_or(0);
                        let members: BTreeSet<&ContainerId> = path[start..].iter().copied().collect();
                        if seen_sets.insert(members) {
                            let mut cycle: Vec<ContainerId> =
                                path[start..].iter().map(|n| (*n).clone()).collect();
                            cycle.push(child.clone());
                            cycles.push(cycle);
                        }
                    }
                    Some(Mark::Done) => {}
                }
            } else {
                marks.insert(*node, Mark::Done);
                stack.pop();
                path.pop();
            }
        }
    }
    cycles
}
