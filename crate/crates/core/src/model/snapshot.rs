// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use super::classify::{base_kind, classify_test};
use super::{Association, Container, ContainerId, ContainerKind, EdgeKind, KnowledgeKind};
use crate::error::{Error, Result};

/// In-memory knowledge base state.
///
/// Value-semantic: equality compares container, association and winner
/// sets. Mutation goes through the checked `insert_*`/`set_winner` methods
/// (used by log replay) or the unchecked constructor for hand-built fixtures.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Snapshot {
    containers: BTreeMap<ContainerId, Container>,
    associations: BTreeSet<Association>,
    winners: BTreeMap<ContainerId, ContainerId>,
}

impl Snapshot {
    pub fn new() -> Self {
        Snapshot::default()
    }

    /// Builds a snapshot without checking any invariant. Run
    /// [`validate`](super::validate) on the result.
    pub fn from_parts_unchecked(
        containers: impl IntoIterator<Item = Container>,
        associations: impl IntoIterator<Item = Association>,
        winners: impl IntoIterator<Item = (ContainerId, ContainerId)>,
    ) -> Self {
        Snapshot {
            containers: containers.into_iter().map(|c| (c.id.clone(), c)).collect(),
            associations: associations.into_iter().collect(),
            winners: winners.into_iter().collect(),
        }
    }

    pub fn containers(&self) -> &BTreeMap<ContainerId, Container> {
        &self.containers
    }

    pub fn associations(&self) -> &BTreeSet<Association> {
        &self.associations
    }

    pub fn winners(&self) -> &BTreeMap<ContainerId, ContainerId> {
        &self.winners
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty()
    }

    pub fn get(&self, id: &ContainerId) -> Option<&Container> {
        self.containers.get(id)
    }

    pub fn contains(&self, id: &ContainerId) -> bool {
        self.containers.contains_key(id)
    }

    /// Resolves `id` or fails with `DanglingReference`.
    pub fn resolve(&self, id: &ContainerId) -> Result<&Container> {
        self.containers.get(id).ok_or_else(|| Error::DanglingReference(id.clone()))
    }

    pub fn winner(&self, test: &ContainerId) -> Option<&ContainerId> {
        self.winners.get(test)
    }

    /// Containers of `kind`, ordered by `(created_at, id)`.
    pub fn ordered(&self, kind: ContainerKind) -> Vec<&Container> {
        let mut v: Vec<&Container> = self.containers.values().filter(|c| c.kind == kind).collect();
        v.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        v
    }

    /// Edges pointing at `test`, in `(kind, source)` order.
    pub fn incoming(&self, test: &ContainerId) -> impl Iterator<Item = &Association> + '_ {
        let start = Association {
            target: test.clone(),
            kind: EdgeKind::Hypothesis,
            source: ContainerId::min_bound(),
        };
        let test = test.clone();
        self.associations.range(start..).take_while(move |a| a.target == test)
    }

    /// Sources of `kind` edges into `test`.
    pub fn sources(&self, test: &ContainerId, kind: EdgeKind) -> Vec<&ContainerId> {
        self.incoming(test).filter(|a| a.kind == kind).map(|a| &a.source).collect()
    }

    pub fn hypotheses_of(&self, test: &ContainerId) -> Vec<&ContainerId> {
        self.sources(test, EdgeKind::Hypothesis)
    }

    pub fn observation_of(&self, test: &ContainerId) -> Option<&ContainerId> {
        self.sources(test, EdgeKind::Observation).into_iter().next()
    }

    /// Tests that `test` rests on (outgoing premise edges).
    pub fn premises_of(&self, test: &ContainerId) -> Vec<&ContainerId> {
        self.associations
            .iter()
            .filter(|a| a.kind == EdgeKind::Premise && &a.source == test)
            .map(|a| &a.target)
            .collect()
    }

    pub fn premise_edges(&self) -> impl Iterator<Item = &Association> + '_ {
        self.associations.iter().filter(|a| a.kind == EdgeKind::Premise)
    }

    /// Tests that carry a successor (some Test labeled `supersedes:<id>`).
    pub fn superseded(&self) -> BTreeSet<&str> {
        self.containers
            .values()
            .filter(|c| c.is_test())
            .filter_map(|c| c.supersedes())
            .collect()
    }

    /// Adds a checked container. Returns `false` when the id is already
    /// present (re-registration is a no-op; the first copy is kept).
    pub fn insert_container(&mut self, container: Container) -> Result<bool> {
        container.check()?;
        if self.containers.contains_key(&container.id) {
            return Ok(false);
        }
        self.containers.insert(container.id.clone(), container);
        Ok(true)
    }

    /// Validates and inserts an edge. Re-inserting an existing edge is a no-op.
    pub fn insert_association(&mut self, assoc: Association) -> Result<()> {
        let assoc = make_association(self, &assoc.source, &assoc.target, assoc.kind)?;
        self.associations.insert(assoc);
        Ok(())
    }

    /// Designates the winning hypothesis of a multi-hypothesis Test.
    pub fn set_winner(&mut self, test: &ContainerId, hypothesis: &ContainerId) -> Result<()> {
        if !self.resolve(test)?.is_test() {
            return Err(Error::NotATest(test.clone()));
        }
        if self.resolve(hypothesis)?.kind != ContainerKind::Hypothesis {
            return Err(Error::NotAHypothesis(hypothesis.clone()));
        }
        if !self.hypotheses_of(test).contains(&hypothesis) {
            return Err(Error::InvalidWinner { test: test.clone(), hypothesis: hypothesis.clone() });
        }
        match self.winners.get(test) {
            Some(existing) if existing == hypothesis => Ok(()),
            Some(existing) => Err(Error::WinnerConflict {
                test: test.clone(),
                existing: existing.clone(),
                proposed: hypothesis.clone(),
            }),
            None => {
                self.winners.insert(test.clone(), hypothesis.clone());
                Ok(())
            }
        }
    }

    /// Crate-internal unchecked mutation for algebra results, which are
    /// validated as a whole afterwards.
    pub(crate) fn parts_mut(
        &mut self,
    ) -> (
        &mut BTreeMap<ContainerId, Container>,
        &mut BTreeSet<Association>,
        &mut BTreeMap<ContainerId, ContainerId>,
    ) {
        (&mut self.containers, &mut self.associations, &mut self.winners)
    }
}

/// Checks that `source -> target` of `kind` may be added to `snapshot`.
///
/// Does not mutate; the caller records the edge (through the event log).
pub fn make_association(
    snapshot: &Snapshot,
    source: &ContainerId,
    target: &ContainerId,
    kind: EdgeKind,
) -> Result<Association> {
    let src = snapshot.resolve(source)?;
    let dst = snapshot.resolve(target)?;
    if !dst.is_test() {
        return Err(Error::InvalidTarget { from: source.clone(), target: target.clone() });
    }
    if src.kind != kind.source_kind() {
        return Err(Error::KindMismatch {
            from: source.clone(),
            edge: kind.name().to_owned(),
            actual: src.kind.name().to_owned(),
        });
    }
    if source == target {
        return Err(Error::CycleDetected(vec![source.clone(), target.clone()]));
    }
    let assoc = Association::new(source.clone(), target.clone(), kind);
    if snapshot.associations.contains(&assoc) {
        return Ok(assoc);
    }
    match kind {
        EdgeKind::Observation => {
            if let Some(existing) = snapshot.observation_of(target) {
                return Err(Error::SingleObservationViolation {
                    test: target.clone(),
                    existing: existing.clone(),
                });
            }
        }
        EdgeKind::Premise => {
            if !matches!(classify_test(snapshot, target)?, KnowledgeKind::Induction | KnowledgeKind::Abduction) {
                return Err(Error::InvalidPremise { from: source.clone(), target: target.clone() });
            }
            if let Some(mut path) = premise_path(snapshot, target, source) {
                path.push(target.clone());
                return Err(Error::CycleDetected(path));
            }
        }
        EdgeKind::Hypothesis => {}
    }
    // A new hypothesis or observation edge must not demote a Test that
    // already serves as somebody's premise.
    if kind != EdgeKind::Premise {
        let dependents: Vec<&ContainerId> = snapshot
            .associations
            .iter()
            .filter(|a| a.kind == EdgeKind::Premise && &a.target == target)
            .map(|a| &a.source)
            .collect();
        if let Some(dependent) = dependents.first() {
            let mut next = snapshot.clone();
            next.associations.insert(assoc.clone());
            if !matches!(base_kind(&next, target), KnowledgeKind::Induction | KnowledgeKind::Abduction) {
                return Err(Error::InvalidPremise { from: (*dependent).clone(), target: target.clone() });
            }
        }
    }
    Ok(assoc)
}

/// Premise path `from ->* to`, if any (depth-first).
fn premise_path(snapshot: &Snapshot, from: &ContainerId, to: &ContainerId) -> Option<Vec<ContainerId>> {
    let mut stack = vec![(from.clone(), vec![from.clone()])];
    let mut seen = BTreeSet::new();
    while let Some((node, path)) = stack.pop() {
        if &node == to {
            return Some(path);
        }
        if !seen.insert(node.clone()) {
            continue;
        }
        for next in snapshot.premises_of(&node) {
            let mut p = path.clone();
            p.push(next.clone());
            stack.push((next.clone(), p));
        }
    }
    None
}
