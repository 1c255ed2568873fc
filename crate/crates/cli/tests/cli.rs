// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use evident_cli::{run_command, Output};
use evident_core::workspace::{Workspace, LOG_FILE};

const GOLDEN: &str = include_str!("../../core/tests/golden/scenario_grid.csv");

fn ev(dir: &Path, args: &[&str]) -> Output {
    let mut full = vec!["evident", "--workspace", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    run_command(full, None, dir)
}

/// Runs a command that must succeed and returns its trimmed stdout.
fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ev(dir, args);
    assert_eq!(out.code, 0, "{args:?} failed: {}", out.stderr);
    out.stdout.trim_end().to_owned()
}

fn fresh() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["init"]);
    dir
}

fn log_bytes(dir: &Path) -> Vec<u8> {
    std::fs::read(dir.join(LOG_FILE)).unwrap()
}

fn event_count(dir: &Path) -> usize {
    log_bytes(dir).iter().filter(|&&b| b == b'\n').count()
}

/// Induction plus a deduction premised on it; returns (h, o, t, deduction).
fn with_deduction(dir: &Path) -> (String, String, String, String) {
    let h = ok(dir, &["add-hypothesis", "--text", "logreg"]);
    let o = ok(dir, &["add-observation", "--dataset", "q3.csv"]);
    let t = ok(dir, &["add-test", "--method", "5-fold CV", "--metric", "AUC", "--outcome", "proved"]);
    ok(dir, &["link", "--from", &h, "--to", &t, "--kind", "hypothesis"]);
    ok(dir, &["link", "--from", &o, "--to", &t, "--kind", "observation"]);
    let h2 = ok(dir, &["add-hypothesis", "--text", "deployed logreg"]);
    let d = ok(dir, &["add-test", "--method", "monitoring", "--outcome", "pending"]);
    ok(dir, &["link", "--from", &h2, "--to", &d, "--kind", "hypothesis"]);
    ok(dir, &["link", "--from", &d, "--to", &t, "--kind", "premise"]);
    (h, o, t, d)
}

#[test]
fn init_creates_an_empty_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = ev(dir.path(), &["init"]);
    assert_eq!(out.code, 0);
    assert_eq!(log_bytes(dir.path()), b"");
    let again = ev(dir.path(), &["init"]);
    assert_eq!(again.code, 1);
    assert!(again.stderr.contains("WorkspaceExists"), "{}", again.stderr);
}

#[test]
fn verbs_other_than_init_need_a_workspace() {
    let dir = tempfile::tempdir().unwrap();
    let out = ev(dir.path(), &["grid"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("NoWorkspace"), "{}", out.stderr);
}

#[test]
fn single_induction_lands_in_its_cell() {
    let dir = fresh();
    let d = dir.path();
    let h = ok(d, &["add-hypothesis", "--text", "logistic regression"]);
    let o = ok(d, &["add-observation", "--dataset", "q3-sales.csv"]);
    let t = ok(d, &["add-test", "--method", "5-fold CV", "--metric", "AUC", "--outcome", "proved"]);
    ok(d, &["link", "--from", &h, "--to", &t, "--kind", "hypothesis"]);
    ok(d, &["link", "--from", &o, "--to", &t, "--kind", "observation"]);
    let csv = ev(d, &["grid", "--format", "csv"]).stdout;
    assert_eq!(csv, format!(",{o},PENDING\n{h},{t}|proved,\n"));
}

#[test]
fn scenario_grid_matches_golden_file() {
    let dir = fresh();
    let d = dir.path();
    let digest = |c: char| format!("sha256:{}", c.to_string().repeat(64));
    let (d1, d2, d3) = (digest('1'), digest('2'), digest('3'));
    let h1 = ok(
        d,
        &[
            "add-hypothesis", "--text", "logistic regression, C=1.0", "--field", "model=logreg",
            "--field", "config=C=1.0", "--period", "P1",
        ],
    );
    let o1 = ok(d, &["add-observation", "--dataset", "q3-sales.csv", "--digest", &d1, "--period", "P1"]);
    let t1 = ok(
        d,
        &[
            "add-test", "--method", "5-fold CV", "--metric", "AUC", "--strategy", "stratified 5-fold",
            "--outcome", "proved", "--confidence", "0.95", "--period", "P1",
        ],
    );
    ok(d, &["link", "--from", &h1, "--to", &t1, "--kind", "hypothesis"]);
    ok(d, &["link", "--from", &o1, "--to", &t1, "--kind", "observation"]);

    let h2 = ok(d, &["add-hypothesis", "--text", "gradient boosted trees, depth=6", "--period", "P2"]);
    let h3 = ok(d, &["add-hypothesis", "--text", "random forest, 500 trees", "--period", "P2"]);
    let o2 = ok(d, &["add-observation", "--dataset", "q4-sales.csv", "--digest", &d2, "--period", "P2"]);
    let t2 = ok(
        d,
        &[
            "add-test", "--method", "holdout 80/20", "--metric", "RMSE", "--outcome", "proved",
            "--confidence", "0.9", "--period", "P2",
        ],
    );
    for h in [&h1, &h2, &h3] {
        ok(d, &["link", "--from", h, "--to", &t2, "--kind", "hypothesis"]);
    }
    ok(d, &["link", "--from", &o2, "--to", &t2, "--kind", "observation"]);
    ok(d, &["set-winner", "--test", &t2, "--hypothesis", &h2]);

    let h4 = ok(
        d,
        &["add-hypothesis", "--text", "production algo: gradient boosted trees, depth=6, retrained weekly", "--period", "P3"],
    );
    let t3 = ok(
        d,
        &["add-test", "--method", "production monitoring", "--metric", "RMSE", "--outcome", "pending", "--period", "P3"],
    );
    ok(d, &["link", "--from", &h4, "--to", &t3, "--kind", "hypothesis"]);
    ok(d, &["link", "--from", &t3, "--to", &t2, "--kind", "premise"]);
    let o3 = ok(d, &["add-observation", "--dataset", "production-2026w40.csv", "--digest", &d3, "--period", "P3"]);

    // Before promotion the deduction waits in PENDING.
    let before = ev(d, &["grid", "--format", "csv"]).stdout;
    assert!(before.lines().any(|l| l.starts_with(&h4) && l.ends_with(&format!("{t3}|pending"))), "{before}");

    ok(d, &["promote", "--test", &t3[..15], "--observation", &o3[..15], "--outcome", "proved", "--confidence", "0.8"]);
    assert_eq!(ev(d, &["grid", "--format", "csv"]).stdout, GOLDEN);
    assert_eq!(ok(d, &["verify"]).split(':').next(), Some("ok"));
}

#[test]
fn restrict_refuses_deduction_workspaces() {
    let dir = fresh();
    let (h, ..) = with_deduction(dir.path());
    for args in [
        vec!["restrict", "--rows", h.as_str()],
        vec!["project", "--cols"],
        vec!["compose", "--part", "@"],
    ] {
        let out = ev(dir.path(), &args);
        assert_eq!(out.code, 1, "{args:?}");
        assert!(out.stderr.contains("NotSelectable"), "{}", out.stderr);
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = fresh();
    let d = dir.path();
    for args in [
        vec!["frobnicate"],
        vec!["link", "--from", "abc"],
        vec!["link", "--from", "a", "--to", "b", "--kind", "sideways"],
        vec!["add-hypothesis", "--field", "no-equals-sign"],
        vec!["add-hypothesis", "--payload", "{not json"],
        vec!["grid", "--format", "xml"],
        vec!["compose", "--part", "@|rows"],
    ] {
        let out = ev(d, &args);
        assert_eq!(out.code, 2, "{args:?}: {}", out.stderr);
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(event_count(d), 0);
    assert_eq!(ev(d, &["--help"]).code, 0);
}

#[test]
fn domain_errors_name_the_rule() {
    let dir = fresh();
    let d = dir.path();
    let (h, o, t, _) = with_deduction(d);
    let o2 = ok(d, &["add-observation", "--dataset", "other.csv"]);
    let lonely = ok(d, &["add-hypothesis", "--text", "unlinked"]);
    let cases = [
        (vec!["link", "--from", &o, "--to", &h, "--kind", "observation"], "InvalidTarget"),
        (vec!["link", "--from", &o2, "--to", &t, "--kind", "observation"], "SingleObservationViolation"),
        (vec!["link", "--from", &h, "--to", &t, "--kind", "observation"], "KindMismatch"),
        (vec!["add-test", "--method", "m", "--outcome", "maybe"], "InvalidOutcome"),
        (vec!["add-hypothesis"], "EmptyPayload"),
        (vec!["set-winner", "--test", &t, "--hypothesis", &lonely], "InvalidWinner"),
        (vec!["report", "--test", "0123456789abcdef"], "UnknownId"),
        (vec!["report", "--test", &t[7..14]], "InvalidIdPrefix"),
        (vec!["promote", "--test", &t, "--observation", &o2, "--outcome", "proved"], "SingleObservationViolation"),
    ];
    let before = event_count(d);
    for (args, code) in cases {
        let out = ev(d, &args);
        assert_eq!(out.code, 1, "{args:?}");
        assert!(out.stderr.starts_with(&format!("error: {code}:")), "{args:?}: {}", out.stderr);
    }
    assert_eq!(event_count(d), before, "failed commands must not append");
}

#[test]
fn every_mutation_appends_one_event_and_reads_append_none() {
    let dir = fresh();
    let d = dir.path();
    let mut expected = 0;
    let mut step = |args: Vec<&str>| {
        let out = ev(d, &args);
        assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
        expected += 1;
        assert_eq!(event_count(d), expected, "{args:?}");
        out.stdout.trim_end().to_owned()
    };
    let h = step(vec!["add-hypothesis", "--text", "a"]);
    let h2 = step(vec!["add-hypothesis", "--text", "b"]);
    let o = step(vec!["add-observation", "--dataset", "x"]);
    let t = step(vec!["add-test", "--method", "m", "--outcome", "disproved"]);
    step(vec!["link", "--from", &h, "--to", &t, "--kind", "hypothesis"]);
    step(vec!["link", "--from", &h2, "--to", &t, "--kind", "hypothesis-edge"]);
    step(vec!["link", "--from", &o, "--to", &t, "--kind", "observation"]);
    step(vec!["set-winner", "--test", &t, "--hypothesis", &h2]);
    let hd = step(vec!["add-hypothesis", "--text", "c"]);
    let td = step(vec!["add-test", "--method", "n", "--outcome", "pending"]);
    step(vec!["link", "--from", &hd, "--to", &td, "--kind", "hypothesis"]);
    step(vec!["link", "--from", &td, "--to", &t, "--kind", "premise"]);
    let o2 = step(vec!["add-observation", "--dataset", "y"]);
    let succ = step(vec!["promote", "--test", &td, "--observation", &o2, "--outcome", "overlooked"]);

    let bytes = log_bytes(d);
    let reads: Vec<Vec<&str>> = vec![
        vec!["grid"],
        vec!["grid", "--format", "canonical", "--transpose"],
        vec!["status", "--hypothesis", &h2],
        vec!["backlog", "--format", "canonical"],
        vec!["report", "--test", &succ],
        vec!["export"],
        vec!["verify", "--format", "canonical"],
    ];
    for args in reads {
        assert_eq!(ev(d, &args).code, 0, "{args:?}");
    }
    assert_eq!(log_bytes(d), bytes);

    // Replaying the log reproduces the state the commands built.
    let snap = Workspace::open(d).unwrap().snapshot().unwrap();
    let exported = ok(d, &["export"]);
    assert_eq!(exported, evident_core::store::snapshot_canonical(&snap));
    let report = ok(d, &["report", "--test", &succ, "--format", "canonical"]);
    assert!(report.contains("\"kind\":\"Deduction\""), "{report}");
}

#[test]
fn canonical_output_is_the_render_document() {
    let dir = fresh();
    let d = dir.path();
    let (h, _, t, _) = with_deduction(d);
    let snap = Workspace::open(d).unwrap().snapshot().unwrap();
    let grid = evident_core::engine::grid_view(&snap);
    assert_eq!(
        ev(d, &["grid", "--format", "canonical"]).stdout,
        evident_core::render::grid_canonical(&snap, &grid) + "\n"
    );
    let status = evident_core::engine::hypothesis_status(&snap, &h.parse().unwrap()).unwrap();
    assert_eq!(
        ev(d, &["status", "--hypothesis", &h, "--format", "canonical"]).stdout,
        evident_core::render::status_canonical(&status) + "\n"
    );
    let report = evident_core::engine::knowledge_report(&snap, &t.parse().unwrap()).unwrap();
    assert_eq!(
        ev(d, &["report", "--test", &t, "--format", "canonical"]).stdout,
        evident_core::render::report_canonical(&report) + "\n"
    );
}

#[test]
fn id_prefixes_and_env_workspace() {
    let dir = fresh();
    let d = dir.path();
    let h = ok(d, &["add-hypothesis", "--text", "a"]);
    let out = run_command(
        ["evident", "status", "--hypothesis", &h["sha256:".len().."sha256:".len() + 8]],
        Some(d.as_os_str().to_owned()),
        Path::new("/"),
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("TBD"), "{}", out.stdout);
    // The flag wins over the environment.
    let other = tempfile::tempdir().unwrap();
    let out = run_command(
        ["evident", "--workspace", d.to_str().unwrap(), "status", "--hypothesis", &h],
        Some(other.path().as_os_str().to_owned()),
        Path::new("/"),
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
}

#[test]
fn verify_exit_code_tracks_the_chain() {
    let dir = fresh();
    let d = dir.path();
    with_deduction(d);
    assert_eq!(ev(d, &["verify"]).code, 0);
    let mut bytes = log_bytes(d);
    let at = bytes.len() / 2;
    bytes[at] ^= 0x01;
    std::fs::write(d.join(LOG_FILE), &bytes).unwrap();
    let out = ev(d, &["verify", "--format", "canonical"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("\"status\":\"corrupt\""), "{}", out.stdout);
    let grid = ev(d, &["grid"]);
    assert_eq!(grid.code, 1);
    assert!(grid.stderr.contains("ChainCorrupt"), "{}", grid.stderr);
}

#[test]
fn algebra_verbs_compose_through_files() {
    let dir = fresh();
    let d = dir.path();
    let h1 = ok(d, &["add-hypothesis", "--text", "a"]);
    let h2 = ok(d, &["add-hypothesis", "--text", "b"]);
    let o1 = ok(d, &["add-observation", "--dataset", "x"]);
    let o2 = ok(d, &["add-observation", "--dataset", "y"]);
    for (h, o, m) in [(&h1, &o1, "m1"), (&h2, &o2, "m2"), (&h1, &o2, "m3")] {
        let t = ok(d, &["add-test", "--method", m, "--outcome", "proved"]);
        ok(d, &["link", "--from", h, "--to", &t, "--kind", "hypothesis"]);
        ok(d, &["link", "--from", o, "--to", &t, "--kind", "observation"]);
    }
    ok(d, &["export", "--output", "all.ekb"]);
    let all = std::fs::read_to_string(d.join("all.ekb")).unwrap();
    assert_eq!(all.trim_end(), ok(d, &["export"]));

    let joined = ok(d, &["join", "--with", "all.ekb", "--with", "@"]);
    assert_eq!(joined, all.trim_end());

    let r = ok(d, &["restrict", "--rows", &h1, "--output", "r.ekb"]);
    assert!(r.is_empty());
    let restricted = std::fs::read_to_string(d.join("r.ekb")).unwrap();
    let rows_h2: Vec<_> = ev(d, &["grid", "--format", "csv", "--input", "r.ekb"]).stdout.lines().map(str::to_owned).collect();
    assert_eq!(rows_h2.len(), 2, "{rows_h2:?}");
    assert!(rows_h2[1].starts_with(&h1));

    let via_compose = ok(d, &["compose", "--part", &format!("@|rows={h1}")]);
    assert_eq!(via_compose, restricted.trim_end());

    let projected = ok(d, &["project", "--input", "r.ekb", "--cols", &o2[..16]]);
    let both = ok(d, &["compose", "--part", &format!("all.ekb|rows={h1}|cols={o2}")]);
    assert_eq!(projected, both);

    // Union of two disjoint selections gives back the original.
    ok(d, &["restrict", "--rows", &h2, "--output", "r2.ekb"]);
    assert_eq!(ok(d, &["join", "--with", "r.ekb", "--with", "r2.ekb"]), all.trim_end());
}

#[test]
fn writers_are_exclusive() {
    let dir = fresh();
    let d = dir.path();
    let ws = Workspace::open(d).unwrap();
    let _held = ws.writer().unwrap();
    let out = ev(d, &["add-hypothesis", "--text", "a"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("WorkspaceLocked"), "{}", out.stderr);
    assert_eq!(ev(d, &["grid"]).code, 0);
}
