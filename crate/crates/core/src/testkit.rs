// SPDX-License-Identifier: Apache-2.0

//! Fixture builder shared by unit and integration tests.

use serde_json::json;

use crate::model::{
    make_container_at, Container, ContainerId, ContainerKind, EdgeKind, Outcome, Payload, Snapshot,
};
use crate::model::Association;

/// Builds snapshots step by step with checked inserts. Creation times count
/// up from 1000 so grid order follows call order.
pub struct Kit {
    pub snap: Snapshot,
    pub clock: i64,
}

impl Default for Kit {
    fn default() -> Self {
        Kit::new()
    }
}

impl Kit {
    pub fn new() -> Self {
        Kit { snap: Snapshot::new(), clock: 1000 }
    }

    pub fn container(&mut self, kind: ContainerKind, payload: serde_json::Value) -> Container {
        self.clock += 1;
        make_container_at(kind, Payload::from_value(payload).unwrap(), None, vec![], self.clock).unwrap()
    }

    fn add(&mut self, kind: ContainerKind, payload: serde_json::Value) -> ContainerId {
        let c = self.container(kind, payload);
        let id = c.id.clone();
        self.snap.insert_container(c).unwrap();
        id
    }

    pub fn hyp(&mut self, text: &str) -> ContainerId {
        self.add(ContainerKind::Hypothesis, json!({ "text": text }))
    }

    pub fn obs(&mut self, dataset: &str) -> ContainerId {
        self.add(ContainerKind::Observation, json!({ "dataset": dataset }))
    }

    pub fn test(&mut self, method: &str, outcome: Outcome) -> ContainerId {
        self.add(ContainerKind::Test, json!({ "method": method, "outcome": outcome.name() }))
    }

    pub fn test_with(&mut self, payload: serde_json::Value) -> ContainerId {
        self.add(ContainerKind::Test, payload)
    }

    /// A Test id that is not in the snapshot.
    pub fn detached_test(&mut self, method: &str) -> ContainerId {
        self.container(ContainerKind::Test, json!({ "method": method, "outcome": "pending" })).id
    }

    pub fn link(&mut self, source: &ContainerId, target: &ContainerId, kind: EdgeKind) {
        self.snap
            .insert_association(Association::new(source.clone(), target.clone(), kind))
            .unwrap();
    }

    /// Hypothesis + Observation + Test wired as an induction.
    pub fn induction(&mut self, h: &str, o: &str, outcome: Outcome) -> (ContainerId, ContainerId, ContainerId) {
        let hid = self.hyp(h);
        let oid = self.obs(o);
        let t = self.test(&format!("test {h} on {o}"), outcome);
        self.link(&hid, &t, EdgeKind::Hypothesis);
        self.link(&oid, &t, EdgeKind::Observation);
        (hid, oid, t)
    }
}
