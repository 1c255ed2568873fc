// SPDX-License-Identifier: Apache-2.0

//! Generators and brute-force oracles for the integration suites.
//!
//! Oracles here read only the raw container/association/winner sets and
//! re-derive classification, placement and filters from the rule tables;
//! they do not call the engine functions they are compared against.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use evident_core::model::{make_container_at, Association, ContainerId, ContainerKind, EdgeKind};
use evident_core::model::{KnowledgeKind, Outcome, Payload, Snapshot};
use evident_core::store::{EventBody, EventLog, Store};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};
use serde_json::json;

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ContainerSpec {
    pub kind: ContainerKind,
    pub name: u8,
    pub outcome: Outcome,
}

#[derive(Clone, Debug)]
pub enum Step {
    Edge { source: usize, target: usize, kind: EdgeKind },
    Winner { test: usize, hypothesis: usize },
    Attach { test: usize, observation: usize, outcome: Outcome },
}

/// Wiring intent for one Test; indices are reduced modulo the number of
/// containers of the matching kind at build time.
#[derive(Clone, Debug)]
pub struct TestPlan {
    pub hyps: Vec<usize>,
    pub obs: Option<usize>,
    pub winner: Option<usize>,
    pub premises: Vec<usize>,
}

/// A random build script: containers, a wiring plan per Test, then raw
/// edge/winner/promotion attempts. Attempts the engine rejects are skipped.
#[derive(Clone, Debug)]
pub struct Script {
    pub containers: Vec<ContainerSpec>,
    pub plans: Vec<TestPlan>,
    pub steps: Vec<Step>,
}

fn kind_strategy() -> impl Strategy<Value = ContainerKind> {
    prop_oneof![
        3 => Just(ContainerKind::Hypothesis),
        2 => Just(ContainerKind::Observation),
        4 => Just(ContainerKind::Test),
    ]
}

fn outcome_strategy() -> impl Strategy<Value = Outcome> {
    prop_oneof![
        4 => Just(Outcome::Proved),
        2 => Just(Outcome::Disproved),
        1 => Just(Outcome::Overlooked),
        2 => Just(Outcome::Pending),
    ]
}

fn edge_kind_strategy(premise: bool) -> BoxedStrategy<EdgeKind> {
    if premise {
        prop_oneof![4 => Just(EdgeKind::Hypothesis), 3 => Just(EdgeKind::Observation), 2 => Just(EdgeKind::Premise)]
            .boxed()
    } else {
        prop_oneof![Just(EdgeKind::Hypothesis), Just(EdgeKind::Observation)].boxed()
    }
}

fn plan_strategy(premise: bool) -> impl Strategy<Value = TestPlan> {
    let premises = if premise { prop::collection::vec(0usize..16, 0..=2).boxed() } else { Just(vec![]).boxed() };
    (
        prop::collection::vec(0usize..16, 0..=3),
        prop::option::weighted(0.7, 0usize..16),
        prop::option::weighted(0.7, 0usize..16),
        premises,
    )
        .prop_map(|(hyps, obs, winner, premises)| TestPlan { hyps, obs, winner, premises })
}

/// Scripts over at most `max_containers` containers. Names come from a
/// small pool so separate scripts share content-addressed containers.
pub fn script_strategy(max_containers: usize, premise: bool) -> impl Strategy<Value = Script> {
    let spec = (kind_strategy(), 0u8..5, outcome_strategy())
        .prop_map(|(kind, name, outcome)| ContainerSpec { kind, name, outcome });
    let n = max_containers.max(1);
    let step = prop_oneof![
        8 => (0..n, 0..n, edge_kind_strategy(premise))
            .prop_map(|(source, target, kind)| Step::Edge { source, target, kind }),
        2 => (0..n, 0..n).prop_map(|(test, hypothesis)| Step::Winner { test, hypothesis }),
        2 => (0..n, 0..n, outcome_strategy())
            .prop_map(|(test, observation, outcome)| Step::Attach { test, observation, outcome }),
    ];
    let steps = prop::collection::vec(step, 0..12)
        .prop_map(move |v| v.into_iter().filter(|s| premise || !matches!(s, Step::Attach { .. })).collect());
    (
        prop::collection::vec(spec, 0..=max_containers),
        prop::collection::vec(plan_strategy(premise), 1..=max_containers.max(1)),
        steps,
    )
        .prop_map(|(containers, plans, steps)| Script { containers, plans, steps })
}

pub fn container_of(spec: &ContainerSpec, created_at: i64) -> evident_core::Container {
    let payload = match spec.kind {
        ContainerKind::Hypothesis => json!({ "text": format!("h{}", spec.name) }),
        ContainerKind::Observation => json!({ "dataset": format!("o{}", spec.name) }),
        ContainerKind::Test => json!({ "method": format!("m{}", spec.name), "outcome": spec.outcome.name() }),
    };
    make_container_at(spec.kind, Payload::from_value(payload).unwrap(), None, vec![], created_at).unwrap()
}

fn attach_body(store: &Store, test: &ContainerId, observation: &ContainerId, outcome: Outcome, at: i64) -> Option<EventBody> {
    let p = evident_core::engine::attach_observation_at(store.snapshot(), test, observation, outcome, None, at).ok()?;
    Some(EventBody::AttachObservation {
        test: test.clone(),
        observation: observation.clone(),
        outcome,
        confidence: None,
        successor: p.successor,
        observation_container: None,
    })
}

/// Runs a script through the store. Only accepted events reach the log.
pub fn build(script: &Script) -> Store {
    let mut store = Store::new();
    let mut ids = Vec::new();
    let mut clock = 1000;
    for spec in &script.containers {
        let c = container_of(spec, 1000 + ids.len() as i64);
        ids.push(c.id.clone());
        clock += 1;
        store.append(EventBody::AddContainer(c), clock).unwrap();
    }
    if ids.is_empty() {
        return store;
    }
    let of = |kind: ContainerKind| -> Vec<ContainerId> {
        let mut v: Vec<ContainerId> = Vec::new();
        for (spec, id) in script.containers.iter().zip(&ids) {
            if spec.kind == kind && !v.contains(id) {
                v.push(id.clone());
            }
        }
        v
    };
    let (hs, os, ts) = (of(ContainerKind::Hypothesis), of(ContainerKind::Observation), of(ContainerKind::Test));
    let edge = |s: &ContainerId, t: &ContainerId, k: EdgeKind| {
        EventBody::AddAssociation(Association::new(s.clone(), t.clone(), k))
    };
    let mut bodies = Vec::new();
    let mut premises = Vec::new();
    for (i, t) in ts.iter().enumerate() {
        let plan = &script.plans[i % script.plans.len()];
        if !hs.is_empty() {
            let chosen: Vec<&ContainerId> = plan.hyps.iter().map(|x| &hs[x % hs.len()]).collect();
            for h in &chosen {
                bodies.push(edge(h, t, EdgeKind::Hypothesis));
            }
            if let (Some(w), false) = (plan.winner, chosen.is_empty()) {
                premises.push(EventBody::SetWinner { test: t.clone(), hypothesis: chosen[w % chosen.len()].clone() });
            }
        }
        if let (Some(o), false) = (plan.obs, os.is_empty()) {
            bodies.push(edge(&os[o % os.len()], t, EdgeKind::Observation));
        }
        for p in &plan.premises {
            premises.push(edge(t, &ts[p % ts.len()], EdgeKind::Premise));
        }
    }
    // Winners before premises so abductions can already serve as premises.
    premises.sort_by_key(|b| !matches!(b, EventBody::SetWinner { .. }));
    bodies.extend(premises);
    for body in bodies {
        clock += 1;
        let _ = store.append(body, clock);
    }
    for step in &script.steps {
        clock += 1;
        let body = match step {
            Step::Edge { source, target, kind } => {
                edge(&ids[source % ids.len()], &ids[target % ids.len()], *kind)
            }
            Step::Winner { test, hypothesis } => EventBody::SetWinner {
                test: ids[test % ids.len()].clone(),
                hypothesis: ids[hypothesis % ids.len()].clone(),
            },
            Step::Attach { test, observation, outcome } => {
                match attach_body(&store, &ids[test % ids.len()], &ids[observation % ids.len()], *outcome, clock) {
                    Some(b) => b,
                    None => continue,
                }
            }
        };
        let _ = store.append(body, clock);
    }
    store
}

pub fn snapshot_strategy(max_containers: usize, premise: bool) -> impl Strategy<Value = Snapshot> {
    script_strategy(max_containers, premise).prop_map(|s| build(&s).snapshot().clone())
}

pub fn log_strategy(max_containers: usize) -> impl Strategy<Value = EventLog> {
    script_strategy(max_containers, true).prop_map(|s| build(&s).log().clone())
}

/// A sub-snapshot of `universe` closed under everything its Tests need:
/// incoming edges and their sources, winners, and premise targets
/// (recursively). Closed sub-snapshots of one valid universe always join
/// cleanly.
pub fn closed_subset(universe: &Snapshot, pick: &[bool]) -> Snapshot {
    let ids: Vec<&ContainerId> = universe.containers().keys().collect();
    let mut keep: BTreeSet<ContainerId> = BTreeSet::new();
    let mut queue: Vec<ContainerId> =
        ids.iter().zip(pick.iter().cycle()).filter(|(_, p)| **p).map(|(id, _)| (*id).clone()).collect();
    while let Some(id) = queue.pop() {
        if !keep.insert(id.clone()) {
            continue;
        }
        for a in universe.associations() {
            if a.target == id {
                queue.push(a.source.clone());
            }
            if a.source == id && a.kind == EdgeKind::Premise {
                queue.push(a.target.clone());
            }
        }
        // A Test whose successor is kept stays with it; keep supersedes pairs whole.
        if let Some(c) = universe.get(&id) {
            if let Some(orig) = c.supersedes() {
                if let Ok(orig) = ContainerId::parse(orig) {
                    queue.push(orig);
                }
            }
        }
    }
    Snapshot::from_parts_unchecked(
        universe.containers().values().filter(|c| keep.contains(&c.id)).cloned(),
        universe
            .associations()
            .iter()
            .filter(|a| keep.contains(&a.source) && keep.contains(&a.target))
            .cloned(),
        universe
            .winners()
            .iter()
            .filter(|(t, _)| keep.contains(*t))
            .map(|(t, h)| (t.clone(), h.clone())),
    )
}

/// `count` values drawn from `strategy` with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    (0..count).map(|_| strategy.new_tree(&mut runner).expect("strategy generates").current()).collect()
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

fn edges_into<'a>(s: &'a Snapshot, test: &ContainerId, kind: EdgeKind) -> Vec<&'a ContainerId> {
    s.associations().iter().filter(|a| &a.target == test && a.kind == kind).map(|a| &a.source).collect()
}

fn outcome_field(s: &Snapshot, test: &ContainerId) -> Option<String> {
    s.containers()
        .get(test)
        .and_then(|c| c.payload.as_map().get("outcome"))
        .and_then(|v| v.as_str())
        .map(str::to_owned)
}

/// Rule-table classification straight from the edge set.
pub fn oracle_classify(s: &Snapshot, test: &ContainerId) -> KnowledgeKind {
    oracle_classify_depth(s, test, 0)
}

fn oracle_classify_depth(s: &Snapshot, test: &ContainerId, depth: usize) -> KnowledgeKind {
    let hyps = edges_into(s, test, EdgeKind::Hypothesis);
    let obs = edges_into(s, test, EdgeKind::Observation);
    let outcome = outcome_field(s, test);
    let decisive = matches!(outcome.as_deref(), Some("proved") | Some("disproved"));
    let winner = s.winners().get(test);

    if hyps.len() == 1 && obs.len() == 1 && decisive {
        return KnowledgeKind::Induction;
    }
    if hyps.len() >= 2 && obs.len() == 1 && decisive && winner.is_some_and(|w| hyps.contains(&w)) {
        return KnowledgeKind::Abduction;
    }
    let premises: Vec<&ContainerId> = s
        .associations()
        .iter()
        .filter(|a| &a.source == test && a.kind == EdgeKind::Premise)
        .map(|a| &a.target)
        .collect();
    let grounded = depth < s.containers().len()
        && premises.iter().any(|p| {
            matches!(
                oracle_classify_depth(s, p, depth + 1),
                KnowledgeKind::Induction | KnowledgeKind::Abduction
            )
        });
    let unobserved = obs.is_empty() || (obs.len() == 1 && outcome.as_deref() == Some("overlooked"));
    if grounded && hyps.len() == 1 && unobserved {
        return KnowledgeKind::Deduction;
    }
    KnowledgeKind::Incomplete
}

/// Expected (row, column) for a Test; column `None` is PENDING.
pub fn oracle_place(s: &Snapshot, test: &ContainerId) -> Option<(ContainerId, Option<ContainerId>)> {
    let hyps = edges_into(s, test, EdgeKind::Hypothesis);
    let obs = edges_into(s, test, EdgeKind::Observation);
    match oracle_classify(s, test) {
        KnowledgeKind::Induction => Some((hyps[0].clone(), Some(obs[0].clone()))),
        KnowledgeKind::Abduction => Some((s.winners()[test].clone(), Some(obs[0].clone()))),
        KnowledgeKind::Deduction => Some((hyps[0].clone(), None)),
        KnowledgeKind::Incomplete => None,
    }
}

pub fn tests_of(s: &Snapshot) -> Vec<ContainerId> {
    s.containers().values().filter(|c| c.kind == ContainerKind::Test).map(|c| c.id.clone()).collect()
}

pub fn ids_of(s: &Snapshot, kind: ContainerKind) -> BTreeSet<ContainerId> {
    s.containers().values().filter(|c| c.kind == kind).map(|c| c.id.clone()).collect()
}

pub fn superseded(s: &Snapshot) -> BTreeSet<String> {
    s.containers()
        .values()
        .flat_map(|c| c.labels.iter())
        .filter_map(|l| l.strip_prefix("supersedes:"))
        .map(str::to_owned)
        .collect()
}

/// Expected cell contents: every current Test with a placement.
pub fn oracle_cells(s: &Snapshot) -> BTreeMap<(ContainerId, Option<ContainerId>), BTreeSet<ContainerId>> {
    let gone = superseded(s);
    let mut cells: BTreeMap<_, BTreeSet<ContainerId>> = BTreeMap::new();
    for t in tests_of(s) {
        if gone.contains(t.as_str()) {
            continue;
        }
        if let Some(at) = oracle_place(s, &t) {
            cells.entry(at).or_default().insert(t);
        }
    }
    cells
}

fn keep_only(s: &Snapshot, keep: &BTreeSet<ContainerId>) -> Snapshot {
    Snapshot::from_parts_unchecked(
        s.containers().values().filter(|c| keep.contains(&c.id)).cloned(),
        s.associations().iter().filter(|a| keep.contains(&a.source) && keep.contains(&a.target)).cloned(),
        s.winners().iter().filter(|(t, _)| keep.contains(*t)).map(|(t, h)| (t.clone(), h.clone())),
    )
}

/// Restriction by brute force over placement rows.
pub fn oracle_restrict(s: &Snapshot, rows: &BTreeSet<ContainerId>) -> Snapshot {
    let mut keep: BTreeSet<ContainerId> = ids_of(s, ContainerKind::Observation);
    keep.extend(rows.iter().cloned());
    for t in tests_of(s) {
        let hyps = edges_into(s, &t, EdgeKind::Hypothesis);
        let selected = match oracle_place(s, &t) {
            Some((row, _)) => rows.contains(&row),
            None => hyps.iter().all(|h| rows.contains(*h)),
        };
        if selected {
            keep.insert(t.clone());
            keep.extend(hyps.into_iter().cloned());
        }
    }
    keep_only(s, &keep)
}

/// Projection by brute force over observation columns.
pub fn oracle_project(s: &Snapshot, cols: &BTreeSet<ContainerId>) -> Snapshot {
    let mut keep: BTreeSet<ContainerId> = ids_of(s, ContainerKind::Hypothesis);
    keep.extend(cols.iter().cloned());
    for t in tests_of(s) {
        let obs = edges_into(s, &t, EdgeKind::Observation);
        if obs.iter().all(|o| cols.contains(*o)) {
            keep.insert(t);
        }
    }
    keep_only(s, &keep)
}

/// Set-union join oracle (no conflict handling; callers check validity).
pub fn oracle_union(parts: &[Snapshot]) -> Snapshot {
    let mut containers = BTreeMap::new();
    let mut edges = BTreeSet::new();
    let mut winners = BTreeMap::new();
    for p in parts {
        for (id, c) in p.containers() {
            containers.entry(id.clone()).or_insert_with(|| c.clone());
        }
        edges.extend(p.associations().iter().cloned());
        for (t, h) in p.winners() {
            winners.entry(t.clone()).or_insert_with(|| h.clone());
        }
    }
    Snapshot::from_parts_unchecked(containers.into_values(), edges, winners)
}

/// Random subset of `set` driven by `bits`.
pub fn pick_subset(set: &BTreeSet<ContainerId>, bits: &[bool]) -> BTreeSet<ContainerId> {
    if bits.is_empty() {
        return set.clone();
    }
    set.iter().zip(bits.iter().cycle()).filter(|(_, b)| **b).map(|(id, _)| id.clone()).collect()
}

// ---------------------------------------------------------------------------
// Scripted model-selection scenario
// ---------------------------------------------------------------------------

pub const GOLDEN_SCENARIO_CSV: &str = include_str!("../golden/scenario_grid.csv");

fn scenario_container(kind: ContainerKind, payload: serde_json::Value, at: i64, tag: &str) -> evident_core::Container {
    make_container_at(kind, Payload::from_value(payload).unwrap(), Some(tag.to_owned()), vec![], at).unwrap()
}

/// Three periods of model development: a cross-validated induction, an
/// abduction picking a winner among three models, and a production
/// deduction later promoted with fresh data.
pub fn scenario_store() -> Store {
    use ContainerKind::{Hypothesis as H, Observation as O, Test as T};
    let mut store = Store::new();
    let mut ts = 2000;
    let mut add = |store: &mut Store, body: EventBody| {
        ts += 1;
        store.append(body, ts).unwrap();
    };
    let digest = |d: char| format!("sha256:{}", d.to_string().repeat(64));

    let h1 = scenario_container(H, json!({"text":"logistic regression, C=1.0","model":"logreg","config":"C=1.0"}), 1000, "P1");
    let o1 = scenario_container(O, json!({"dataset":"q3-sales.csv","digest":digest('1')}), 1001, "P1");
    let t1 = scenario_container(
        T,
        json!({"method":"5-fold CV","metric":"AUC","strategy":"stratified 5-fold","outcome":"proved","confidence":0.95}),
        1002,
        "P1",
    );
    let h2 = scenario_container(H, json!({"text":"gradient boosted trees, depth=6"}), 1003, "P2");
    let h3 = scenario_container(H, json!({"text":"random forest, 500 trees"}), 1004, "P2");
    let o2 = scenario_container(O, json!({"dataset":"q4-sales.csv","digest":digest('2')}), 1005, "P2");
    let t2 = scenario_container(
        T,
        json!({"method":"holdout 80/20","metric":"RMSE","outcome":"proved","confidence":0.9}),
        1006,
        "P2",
    );
    let h4 = scenario_container(
        H,
        json!({"text":"production algo: gradient boosted trees, depth=6, retrained weekly"}),
        1007,
        "P3",
    );
    let t3 = scenario_container(
        T,
        json!({"method":"production monitoring","metric":"RMSE","outcome":"pending"}),
        1008,
        "P3",
    );
    let o3 = scenario_container(O, json!({"dataset":"production-2026w40.csv","digest":digest('3')}), 1009, "P3");

    let edge = |s: &evident_core::Container, t: &evident_core::Container, k: EdgeKind| {
        EventBody::AddAssociation(Association::new(s.id.clone(), t.id.clone(), k))
    };
    for c in [&h1, &o1, &t1] {
        add(&mut store, EventBody::AddContainer(c.clone()));
    }
    add(&mut store, edge(&h1, &t1, EdgeKind::Hypothesis));
    add(&mut store, edge(&o1, &t1, EdgeKind::Observation));
    for c in [&h2, &h3, &o2, &t2] {
        add(&mut store, EventBody::AddContainer(c.clone()));
    }
    for h in [&h1, &h2, &h3] {
        add(&mut store, edge(h, &t2, EdgeKind::Hypothesis));
    }
    add(&mut store, edge(&o2, &t2, EdgeKind::Observation));
    add(&mut store, EventBody::SetWinner { test: t2.id.clone(), hypothesis: h2.id.clone() });
    for c in [&h4, &t3] {
        add(&mut store, EventBody::AddContainer(c.clone()));
    }
    add(&mut store, edge(&h4, &t3, EdgeKind::Hypothesis));
    add(&mut store, edge(&t3, &t2, EdgeKind::Premise));
    add(&mut store, EventBody::AddContainer(o3.clone()));

    let promoted = evident_core::engine::attach_observation_at(
        store.snapshot(),
        &t3.id,
        &o3.id,
        Outcome::Proved,
        Some(0.8),
        1010,
    )
    .unwrap();
    store
        .append(
            EventBody::AttachObservation {
                test: t3.id.clone(),
                observation: o3.id.clone(),
                outcome: Outcome::Proved,
                confidence: Some(0.8),
                successor: promoted.successor,
                observation_container: None,
            },
            1010,
        )
        .unwrap();
    store
}

/// `s` plus a fresh induction and a pending deduction premised on it, so
/// promotion properties always have something to promote.
pub fn with_deduction(s: &Snapshot, outcome: Outcome) -> Snapshot {
    let mut s = s.clone();
    let mk = |kind, payload: serde_json::Value, at| {
        make_container_at(kind, Payload::from_value(payload).unwrap(), None, vec![], at).unwrap()
    };
    let h = mk(ContainerKind::Hypothesis, json!({"text": "hd"}), 5000);
    let hi = mk(ContainerKind::Hypothesis, json!({"text": "hi"}), 5001);
    let o = mk(ContainerKind::Observation, json!({"dataset": "od"}), 5002);
    let ti = mk(ContainerKind::Test, json!({"method": "ti", "outcome": outcome.name()}), 5003);
    let td = mk(ContainerKind::Test, json!({"method": "td", "outcome": "pending"}), 5004);
    for c in [&h, &hi, &o, &ti, &td] {
        s.insert_container(c.clone()).unwrap();
    }
    for (a, b, k) in [
        (&hi, &ti, EdgeKind::Hypothesis),
        (&o, &ti, EdgeKind::Observation),
        (&h, &td, EdgeKind::Hypothesis),
        (&td, &ti, EdgeKind::Premise),
    ] {
        s.insert_association(Association::new(a.id.clone(), b.id.clone(), k)).unwrap();
    }
    s
}
