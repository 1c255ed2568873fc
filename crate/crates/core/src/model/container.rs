// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::canonical;
use crate::error::{Error, Result};

const ID_PREFIX: &str = "sha256:";

/// Content address of a container: `sha256:` followed by 64 lowercase hex
/// characters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContainerId(String);

impl ContainerId {
    /// Id of the canonical text `canonical_text`.
    pub fn of_canonical(canonical_text: &str) -> Self {
        ContainerId(format!("{ID_PREFIX}{}", canonical::sha256_hex(canonical_text.as_bytes())))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let hex = s
            .strip_prefix(ID_PREFIX)
            .ok_or_else(|| Error::MalformedInput(format!("container id {s:?} lacks sha256: prefix")))?;
        if hex.len() != 64 || !hex.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
            return Err(Error::MalformedInput(format!("container id {s:?} is not 64 lowercase hex")));
        }
        Ok(ContainerId(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The 64 hex digits without the algorithm prefix.
    pub fn hex(&self) -> &str {
        &self.0[ID_PREFIX.len().min(self.0.len())..]
    }

    /// First `n` hex digits, for compact display.
    pub fn short(&self, n: usize) -> &str {
        let hex = self.hex();
        &hex[..n.min(hex.len())]
    }

    /// Sorts before every real id; used as a range bound.
    pub(crate) fn min_bound() -> Self {
        ContainerId(String::new())
    }

    /// Unvalidated id text, for range bounds over sorted ids.
    pub(crate) fn bound(text: String) -> Self {
        ContainerId(text)
    }
}

impl fmt::Display for ContainerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ContainerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContainerId({})", self.short(12))
    }
}

impl FromStr for ContainerId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ContainerId::parse(s)
    }
}

impl Serialize for ContainerId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ContainerId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ContainerId::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ContainerKind {
    Observation,
    Hypothesis,
    Test,
}

impl ContainerKind {
    pub fn name(self) -> &'static str {
        match self {
            ContainerKind::Observation => "Observation",
            ContainerKind::Hypothesis => "Hypothesis",
            ContainerKind::Test => "Test",
        }
    }
}

impl fmt::Display for ContainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ContainerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Observation" | "observation" => Ok(ContainerKind::Observation),
            "Hypothesis" | "hypothesis" => Ok(ContainerKind::Hypothesis),
            "Test" | "test" => Ok(ContainerKind::Test),
            other => Err(Error::MalformedInput(format!("unknown container kind {other:?}"))),
        }
    }
}

/// Result a Test reports for its hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Proved,
    Disproved,
    Overlooked,
    Pending,
}

impl Outcome {
    pub const ALL: [Outcome; 4] =
        [Outcome::Proved, Outcome::Disproved, Outcome::Overlooked, Outcome::Pending];

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Proved => "proved",
            Outcome::Disproved => "disproved",
            Outcome::Overlooked => "overlooked",
            Outcome::Pending => "pending",
        }
    }

    /// Proved or disproved.
    pub fn is_decisive(self) -> bool {
        matches!(self, Outcome::Proved | Outcome::Disproved)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Outcome {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::InvalidOutcome(s.to_owned()))
    }
}

/// Free-form container payload in canonical form.
///
/// Values are strings, numbers, booleans, lists and nested maps; `null` and
/// non-finite numbers are rejected. Large artifacts are referenced by digest,
/// never embedded.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Payload(Map<String, Value>);

impl Payload {
    pub fn new(map: Map<String, Value>) -> Result<Self> {
        match canonical::normalize(&Value::Object(map))? {
            Value::Object(m) => Ok(Payload(m)),
            _ => unreachable!("normalize preserves objects"),
        }
    }

    /// Builds a payload from a JSON object value.
    pub fn from_value(value: Value) -> Result<Self> {
        match value {
            Value::Object(m) => Payload::new(m),
            other => Err(Error::MalformedPayload(format!("payload must be an object, got {other}"))),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(Value::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_map(&self) -> &Map<String, Value> {
        &self.0
    }

    pub fn to_value(&self) -> Value {
        Value::Object(self.0.clone())
    }

    /// Copy with `key` set (or removed when `value` is `None`).
    pub fn with(&self, key: &str, value: Option<Value>) -> Result<Self> {
        let mut m = self.0.clone();
        match value {
            Some(v) => {
                m.insert(key.to_owned(), v);
            }
            None => {
                m.remove(key);
            }
        }
        Payload::new(m)
    }
}

impl<'de> Deserialize<'de> for Payload {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Payload::new(Map::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Typed view of a Test payload.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFields<'a> {
    pub method: &'a str,
    pub metric: Option<&'a str>,
    pub strategy: Option<&'a str>,
    pub outcome: Outcome,
    pub confidence: Option<f64>,
}

impl<'a> TestFields<'a> {
    pub fn parse(payload: &'a Payload) -> Result<Self> {
        let outcome = match payload.get("outcome") {
            Some(Value::String(s)) => s.parse()?,
            Some(other) => return Err(Error::InvalidOutcome(other.to_string())),
            None => return Err(Error::InvalidOutcome("missing outcome".into())),
        };
        let method = payload
            .get_str("method")
            .ok_or_else(|| Error::MalformedPayload("Test payload needs a string method".into()))?;
        let opt_str = |key: &str| -> Result<Option<&'a str>> {
            match payload.get(key) {
                None => Ok(None),
                Some(Value::String(s)) => Ok(Some(s.as_str())),
                Some(_) => Err(Error::MalformedPayload(format!("Test {key} must be a string"))),
            }
        };
        let confidence = match payload.get("confidence") {
            None => None,
            Some(v) => match v.as_f64() {
                Some(c) if (0.0..=1.0).contains(&c) => Some(c),
                _ => {
                    return Err(Error::MalformedPayload(format!(
                        "confidence must be a number in [0,1], got {v}"
                    )))
                }
            },
        };
        Ok(TestFields {
            method,
            metric: opt_str("metric")?,
            strategy: opt_str("strategy")?,
            outcome,
            confidence,
        })
    }
}

/// Immutable, content-addressed unit of storage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Container {
    pub id: ContainerId,
    pub kind: ContainerKind,
    pub payload: Payload,
    /// UTC seconds since the Unix epoch. Not part of the content hash.
    pub created_at: i64,
    pub period_tag: Option<String>,
    pub labels: Vec<String>,
}

/// Label prefix linking a successor Test to the version it replaces.
pub const SUPERSEDES_LABEL: &str = "supersedes:";

impl Container {
    /// Canonical text the id is computed from.
    pub fn identity_text(
        kind: ContainerKind,
        payload: &Payload,
        period_tag: Option<&str>,
        labels: &[String],
    ) -> String {
        canonical::to_string(&json!({
            "kind": kind.name(),
            "labels": labels,
            "payload": payload.to_value(),
            "period_tag": period_tag,
        }))
    }

    /// Recomputes the content address from the other fields.
    pub fn compute_id(&self) -> ContainerId {
        ContainerId::of_canonical(&Container::identity_text(
            self.kind,
            &self.payload,
            self.period_tag.as_deref(),
            &self.labels,
        ))
    }

    /// Checks the container-level invariants: id integrity, non-empty
    /// payload, well-formed Test fields.
    pub fn check(&self) -> Result<()> {
        if self.payload.is_empty() {
            return Err(Error::EmptyPayload);
        }
        if self.kind == ContainerKind::Test {
            TestFields::parse(&self.payload)?;
        }
        if self.compute_id() != self.id {
            return Err(Error::MalformedInput(format!("id {} does not match content", self.id)));
        }
        Ok(())
    }

    pub fn is_test(&self) -> bool {
        self.kind == ContainerKind::Test
    }

    /// Test fields; `None` for non-Tests (and for Tests that fail `check`).
    pub fn test_fields(&self) -> Option<TestFields<'_>> {
        if self.is_test() {
            TestFields::parse(&self.payload).ok()
        } else {
            None
        }
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.test_fields().map(|t| t.outcome)
    }

    /// Id of the container this one supersedes, from its labels.
    pub fn supersedes(&self) -> Option<&str> {
        self.labels.iter().find_map(|l| l.strip_prefix(SUPERSEDES_LABEL))
    }

    /// Short human text: `text`, then `name`, `dataset`, `method`, else the
    /// canonical payload.
    pub fn display_text(&self) -> String {
        ["text", "name", "dataset", "method"]
            .iter()
            .find_map(|k| self.payload.get_str(k))
            .map(str::to_owned)
            .unwrap_or_else(|| canonical::to_string(&self.payload.to_value()))
    }
}

/// Creates a container stamped with the current time.
pub fn make_container(
    kind: ContainerKind,
    payload: Payload,
    period_tag: Option<String>,
    labels: Vec<String>,
) -> Result<Container> {
    make_container_at(kind, payload, period_tag, labels, chrono::Utc::now().timestamp())
}

/// Creates a container with an explicit creation time. The id depends only
/// on kind, payload, period tag and labels.
pub fn make_container_at(
    kind: ContainerKind,
    payload: Payload,
    period_tag: Option<String>,
    labels: Vec<String>,
    created_at: i64,
) -> Result<Container> {
    if payload.is_empty() {
        return Err(Error::EmptyPayload);
    }
    if kind == ContainerKind::Test {
        TestFields::parse(&payload)?;
    }
    let id = ContainerId::of_canonical(&Container::identity_text(
        kind,
        &payload,
        period_tag.as_deref(),
        &labels,
    ));
    Ok(Container { id, kind, payload, created_at, period_tag, labels })
}
