// SPDX-License-Identifier: Apache-2.0

//! Canonical JSON encoding.
//!
//! Canonical text is compact UTF-8 JSON with object keys sorted by code
//! point, integers in base 10 and floats in shortest round-trip form. Floats
//! with an integral value inside the `i64` range are stored as integers, so
//! `1.0` and `1` encode identically. `null` and non-finite numbers are not
//! representable.

use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest magnitude at which every integer is exactly representable in f64.
const EXACT_F64_INT: f64 = 9_007_199_254_740_992.0;

/// Normalizes a value into canonical form, rejecting `null`.
pub fn normalize(value: &Value) -> Result<Value> {
    match value {
        Value::Null => Err(Error::MalformedPayload("null is not a payload value".into())),
        Value::Bool(_) | Value::String(_) => Ok(value.clone()),
        Value::Number(n) => normalize_number(n).map(Value::Number),
        Value::Array(items) => items.iter().map(normalize).collect::<Result<_>>().map(Value::Array),
        Value::Object(map) => {
            let mut out = Map::new();
            for (k, v) in map {
                out.insert(k.clone(), normalize(v)?);
            }
            Ok(Value::Object(out))
        }
    }
}

fn normalize_number(n: &Number) -> Result<Number> {
    if n.is_i64() || n.is_u64() {
        return Ok(n.clone());
    }
    let f = n
        .as_f64()
        .filter(|f| f.is_finite())
        .ok_or_else(|| Error::MalformedPayload(format!("non-finite number {n}")))?;
    if f.fract() == 0.0 && f.abs() <= EXACT_F64_INT {
        return Ok(Number::from(f as i64));
    }
    Number::from_f64(f).ok_or_else(|| Error::MalformedPayload(format!("non-finite number {n}")))
}

/// Encodes an already-normalized value. `serde_json`'s map is a `BTreeMap`
/// (the `preserve_order` feature is never enabled) so keys come out sorted.
pub fn to_string(value: &Value) -> String {
    serde_json::to_string(value).expect("serializing a JSON value cannot fail")
}

/// Encodes any serializable value canonically.
pub fn encode<T: serde::Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::MalformedPayload(e.to_string()))?;
    Ok(to_string(&normalize_nullable(&v)?))
}

/// Like [`normalize`] but lets `null` through, for documents (not payloads)
/// where an absent optional field is spelled `null`.
pub fn normalize_nullable(value: &Value) -> Result<Value> {
    match value {
        Value::Null => Ok(Value::Null),
        Value::Array(items) => items
            .iter()
            .map(normalize_nullable)
            .collect::<Result<_>>()
            .map(Value::Array),
        Value::Object(map) => {
            let mut out = Map::new();
            for (k, v) in map {
                out.insert(k.clone(), normalize_nullable(v)?);
            }
            Ok(Value::Object(out))
        }
        other => normalize(other),
    }
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
