// SPDX-License-Identifier: Apache-2.0

//! Output formats shared by the CLI and the HTTP service.
//!
//! `*_canonical` functions return the canonical JSON text served by the
//! service and printed by `--format canonical`; both front ends append one
//! newline. CSV, table and markdown forms are for people and spreadsheets.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::canonical;
use crate::engine::{BacklogEntry, BacklogKind, GridKey, GridView, KnowledgeReport, StatusSummary};
use crate::model::{classify_test, ContainerId, Snapshot};
use crate::store::VerificationReport;

fn encode(value: &Value) -> String {
    canonical::to_string(&canonical::normalize_nullable(value).expect("documents hold finite numbers"))
}

fn test_entry(snapshot: &Snapshot, id: &ContainerId) -> Value {
    let c = snapshot.get(id);
    let fields = c.and_then(|c| c.test_fields());
    json!({
        "id": id,
        "kind": classify_test(snapshot, id).map(|k| k.name()).unwrap_or("Incomplete"),
        "outcome": fields.as_ref().map(|f| f.outcome.name()),
        "metric": fields.as_ref().and_then(|f| f.metric),
        "confidence": fields.as_ref().and_then(|f| f.confidence),
        "method": fields.as_ref().map(|f| f.method),
    })
}

/// Grid document: axes, display text for every id on an axis, and every
/// cell in row-major order with its Tests and TBD flag.
pub fn grid_value(snapshot: &Snapshot, grid: &GridView) -> Value {
    let mut headers = Map::new();
    for key in grid.rows.iter().chain(&grid.columns) {
        if let Some(c) = key.id().and_then(|id| snapshot.get(id)) {
            headers.insert(c.id.to_string(), Value::String(c.display_text()));
        }
    }
    let cells: Vec<Value> = grid
        .rows
        .iter()
        .flat_map(|r| grid.columns.iter().map(move |c| (r, c)))
        .map(|(r, c)| {
            json!({
                "row": r,
                "column": c,
                "tests": grid.cell(r, c).iter().map(|t| test_entry(snapshot, t)).collect::<Vec<_>>(),
                "tbd": grid.is_tbd(r, c),
            })
        })
        .collect();
    json!({
        "rows": grid.rows,
        "columns": grid.columns,
        "headers": headers,
        "cells": cells,
        "transposed": grid.transposed,
    })
}

pub fn grid_canonical(snapshot: &Snapshot, grid: &GridView) -> String {
    encode(&grid_value(snapshot, grid))
}

/// CSV export. Header row: an empty corner, then the column keys. Each
/// following row starts with its row key; a cell holds `testid|outcome`
/// entries joined by `;`, `TBD` for an empty (Hypothesis, Observation)
/// pair, and nothing for an empty PENDING cell.
pub fn grid_csv(snapshot: &Snapshot, grid: &GridView) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("").chain(grid.columns.iter().map(GridKey::as_str)).collect();
    w.write_record(&header).expect("writing to memory");
    for r in &grid.rows {
        let mut record = vec![r.as_str().to_owned()];
        for c in &grid.columns {
            record.push(csv_cell(snapshot, grid, r, c));
        }
        w.write_record(&record).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv of UTF-8 fields")
}

fn csv_cell(snapshot: &Snapshot, grid: &GridView, r: &GridKey, c: &GridKey) -> String {
    let tests = grid.cell(r, c);
    if tests.is_empty() {
        return if grid.is_tbd(r, c) { "TBD".into() } else { String::new() };
    }
    tests
        .iter()
        .map(|t| {
            let outcome = snapshot.get(t).and_then(|c| c.outcome()).map(|o| o.name()).unwrap_or("?");
            format!("{t}|{outcome}")
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn short_key(k: &GridKey) -> String {
    match k {
        GridKey::Id(id) => id.short(8).to_owned(),
        GridKey::Pending => "PENDING".into(),
    }
}

/// Aligned plain-text table with 8-digit id prefixes.
pub fn grid_table(snapshot: &Snapshot, grid: &GridView) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::new()];
    header.extend(grid.columns.iter().map(short_key));
    rows.push(header);
    for r in &grid.rows {
        let mut line = vec![short_key(r)];
        for c in &grid.columns {
            let tests = grid.cell(r, c);
            line.push(if tests.is_empty() {
                if grid.is_tbd(r, c) { "TBD".into() } else { "-".into() }
            } else {
                tests
                    .iter()
                    .map(|t| {
                        let o = snapshot.get(t).and_then(|c| c.outcome()).map(|o| o.name()).unwrap_or("?");
                        format!("{}:{o}", t.short(8))
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            });
        }
        rows.push(line);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    let mut legend: Vec<String> = Vec::new();
    for key in grid.rows.iter().chain(&grid.columns) {
        if let Some(c) = key.id().and_then(|id| snapshot.get(id)) {
            legend.push(format!("{}  {}  {}", c.id.short(8), c.kind, c.display_text()));
        }
    }
    if !legend.is_empty() {
        out.push('\n');
        for l in legend {
            out.push_str(&l);
            out.push('\n');
        }
    }
    out
}

pub fn status_canonical(summary: &StatusSummary) -> String {
    encode(&serde_json::to_value(summary).expect("status serializes"))
}

pub fn status_text(snapshot: &Snapshot, summary: &StatusSummary) -> String {
    let mut out = String::new();
    let text = snapshot.get(&summary.hypothesis).map(|c| c.display_text()).unwrap_or_default();
    let _ = writeln!(out, "{}  {}  {}", summary.hypothesis.short(8), summary.summary, text);
    for (t, o) in &summary.per_test {
        let _ = writeln!(out, "  {}  {o}", t.short(8));
    }
    out
}

pub fn backlog_canonical(entries: &[BacklogEntry]) -> String {
    encode(&serde_json::to_value(entries).expect("backlog serializes"))
}

pub fn backlog_text(entries: &[BacklogEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let what = match e.kind {
            BacklogKind::Tbd => "TBD".to_owned(),
            BacklogKind::PendingDeduction => {
                format!("pending {}", e.test.as_ref().map(|t| t.short(8)).unwrap_or_default())
            }
        };
        let _ = writeln!(
            out,
            "{:<10}  {}  {:<8}  {what}",
            e.period_tag.as_deref().unwrap_or("-"),
            e.row.short(8),
            short_key(&e.column),
        );
    }
    out
}

pub fn report_canonical(report: &KnowledgeReport) -> String {
    encode(&serde_json::to_value(report).expect("report serializes"))
}

/// Markdown document describing one piece of Knowledge.
pub fn report_markdown(report: &KnowledgeReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {} Knowledge {}", report.kind, report.test.short(12));
    let _ = writeln!(out);
    let _ = writeln!(out, "- Test: `{}`", report.test);
    let _ = writeln!(out, "- Outcome: {}", report.outcome);
    if let Some(c) = report.confidence {
        let _ = writeln!(out, "- Confidence: {c}");
    }
    let _ = writeln!(out, "- Method: {}", report.method);
    if let Some(m) = &report.metric {
        let _ = writeln!(out, "- Metric: {m}");
    }
    if let Some(s) = &report.strategy {
        let _ = writeln!(out, "- Strategy: {s}");
    }
    if let Some(p) = &report.period_tag {
        let _ = writeln!(out, "- Period: {p}");
    }
    let created = chrono::DateTime::from_timestamp(report.created_at, 0)
        .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| report.created_at.to_string());
    let _ = writeln!(out, "- Created: {created}");
    let _ = writeln!(out, "- Placement: row `{}`, column `{}`", report.placement.row, report.placement.column);
    if let Some(s) = &report.supersedes {
        let _ = writeln!(out, "- Supersedes: `{s}`");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "## Hypotheses");
    let _ = writeln!(out);
    for h in &report.hypotheses {
        let mark = if h.placed { " (row)" } else { "" };
        let _ = writeln!(out, "- {}{mark} `{}`", h.text, h.id);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "## Observation");
    let _ = writeln!(out);
    match &report.observation {
        Some(o) => {
            let _ = write!(out, "- {} `{}`", o.text, o.id);
            if let Some(d) = &o.digest {
                let _ = write!(out, " digest `{d}`");
            }
            let _ = writeln!(out);
        }
        None => {
            let _ = writeln!(out, "- pending");
        }
    }
    if !report.premise_chain.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "## Premises");
        let _ = writeln!(out);
        for p in &report.premise_chain {
            let _ = writeln!(
                out,
                "- {} `{}`: {} ({}) on {}",
                p.kind,
                p.test,
                p.method,
                p.outcome,
                p.hypotheses.join(", ")
            );
        }
    }
    out
}

pub fn verify_canonical(report: &VerificationReport) -> String {
    encode(&serde_json::to_value(report).expect("report serializes"))
}

pub fn verify_text(report: &VerificationReport) -> String {
    match report {
        VerificationReport::Ok { events, head } => format!("ok: {events} events, head {head}\n"),
        VerificationReport::Corrupt { first_bad_seq, reason } => {
            format!("corrupt at seq {first_bad_seq}: {reason}\n")
        }
    }
}
