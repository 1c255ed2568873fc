// SPDX-License-Identifier: Apache-2.0

//! The `evident` command line.
//!
//! [`run_command`] does all the work and returns the exit code and both
//! output streams, so the binary is a thin wrapper and tests need no
//! subprocess. Exit codes: 0 success, 1 domain error (stderr names the
//! error), 2 usage error.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use evident_core::algebra::{self, ComposePart};
use evident_core::engine::{backlog, grid_view, hypothesis_status, knowledge_report};
use evident_core::model::{ContainerKind, EdgeKind, Outcome, Payload};
use evident_core::render;
use evident_core::store::{deserialize_snapshot, serialize_snapshot};
use evident_core::workspace::{resolve_id, Workspace};
use evident_core::{ContainerId, Error, Snapshot};
use serde_json::{Map, Value};

pub const WORKSPACE_ENV: &str = "EVIDENT_WORKSPACE";

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "evident", version, about = "Evidence-based knowledge bases for DM/ML projects")]
struct Cli {
    /// Workspace directory (default: $EVIDENT_WORKSPACE, then the current directory).
    #[arg(long, global = true, value_name = "DIR")]
    workspace: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Create an empty workspace.
    Init,
    /// Register an Observation (data).
    AddObservation {
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        digest: Option<String>,
        #[command(flatten)]
        common: ContainerArgs,
    },
    /// Register a Hypothesis (an algorithm or model configuration).
    AddHypothesis {
        #[arg(long)]
        text: Option<String>,
        #[command(flatten)]
        common: ContainerArgs,
    },
    /// Register a Test (an experiment and its outcome).
    AddTest {
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        strategy: Option<String>,
        /// proved, disproved, overlooked or pending.
        #[arg(long)]
        outcome: Option<String>,
        #[arg(long)]
        confidence: Option<f64>,
        #[command(flatten)]
        common: ContainerArgs,
    },
    /// Add an edge into a Test.
    Link {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, value_parser = parse_edge_kind)]
        kind: EdgeKind,
    },
    /// Designate the winning hypothesis of an abduction Test.
    SetWinner {
        #[arg(long)]
        test: String,
        #[arg(long)]
        hypothesis: String,
    },
    /// Attach an observation to a deduction Test, creating its successor.
    Promote {
        #[arg(long)]
        test: String,
        #[arg(long)]
        observation: String,
        #[arg(long)]
        outcome: String,
        #[arg(long)]
        confidence: Option<f64>,
    },
    /// Hypothesis x Observation grid.
    Grid {
        #[arg(long, value_enum, default_value_t = GridFormat::Table)]
        format: GridFormat,
        /// Observations as rows, Hypotheses as columns.
        #[arg(long)]
        transpose: bool,
        #[command(flatten)]
        input: Input,
    },
    /// Development status of a hypothesis.
    Status {
        #[arg(long)]
        hypothesis: String,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
        #[command(flatten)]
        input: Input,
    },
    /// Open cells and pending deductions, grouped by period.
    Backlog {
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
        #[command(flatten)]
        input: Input,
    },
    /// Knowledge report for a classified Test.
    Report {
        #[arg(long)]
        test: String,
        #[arg(long, value_enum, default_value_t = ReportFormat::Markdown)]
        format: ReportFormat,
        #[command(flatten)]
        input: Input,
    },
    /// Write the current snapshot as a .ekb document.
    Export {
        #[command(flatten)]
        output: OutputFile,
    },
    /// Union of snapshots. SOURCE is a .ekb file or `@` for the workspace.
    Join {
        #[arg(long = "with", value_name = "SOURCE", required = true)]
        with: Vec<String>,
        #[command(flatten)]
        output: OutputFile,
    },
    /// Keep the given Hypothesis rows.
    Restrict {
        #[arg(long, value_delimiter = ',', num_args = 0.., value_name = "IDS")]
        rows: Vec<String>,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: OutputFile,
    },
    /// Keep the given Observation columns.
    Project {
        #[arg(long, value_delimiter = ',', num_args = 0.., value_name = "IDS")]
        cols: Vec<String>,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: OutputFile,
    },
    /// Restrict/project several sources and join the results.
    Compose {
        /// `SOURCE[|rows=ID,..][|cols=ID,..]`; omitted selectors keep everything.
        #[arg(long = "part", value_name = "PART", required = true)]
        parts: Vec<String>,
        #[command(flatten)]
        output: OutputFile,
    },
    /// Check the hash chain of the workspace log.
    Verify {
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
}

#[derive(Args, Debug)]
struct ContainerArgs {
    /// Base payload as a JSON object.
    #[arg(long, value_name = "JSON")]
    payload: Option<String>,
    /// Extra payload field; VALUE is parsed as JSON when possible.
    #[arg(long = "field", value_name = "KEY=VALUE")]
    fields: Vec<String>,
    #[arg(long, value_name = "TAG")]
    period: Option<String>,
    #[arg(long = "label")]
    labels: Vec<String>,
}

#[derive(Args, Debug)]
struct Input {
    /// Read a .ekb document instead of the workspace.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OutputFile {
    /// Write the .ekb document here instead of stdout.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GridFormat {
    Table,
    Csv,
    Canonical,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TextFormat {
    Text,
    Canonical,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Markdown,
    Canonical,
}

fn parse_edge_kind(s: &str) -> Result<EdgeKind, String> {
    s.parse().map_err(|_| format!("expected hypothesis, observation or premise, got {s:?}"))
}

enum Fail {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Domain(e)
    }
}

type Run = Result<(u8, String), Fail>;

/// Runs one invocation. `args` includes the program name; `env_workspace`
/// is the value of `EVIDENT_WORKSPACE`, if set.
pub fn run_command<I, T>(args: I, env_workspace: Option<OsString>, cwd: &Path) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output { code: 2, stdout: String::new(), stderr: text }
            } else {
                Output { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let dir = match (&cli.workspace, env_workspace) {
        (Some(d), _) => cwd.join(d),
        (None, Some(d)) if !d.is_empty() => cwd.join(d),
        _ => cwd.to_path_buf(),
    };
    match run(cli.command, &dir, cwd) {
        Ok((code, stdout)) => Output { code, stdout, stderr: String::new() },
        Err(Fail::Usage(msg)) => Output { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") },
        Err(Fail::Domain(e)) => {
            let root = e.root();
            let mut stderr = format!("error: {}: {root}\n", root.code());
            for id in root.ids() {
                stderr.push_str(&format!("  {id}\n"));
            }
            Output { code: 1, stdout: String::new(), stderr }
        }
    }
}

fn ok(text: String) -> Run {
    Ok((0, text))
}

fn canonical_line(doc: String) -> String {
    doc + "\n"
}

fn run(command: Command, dir: &Path, cwd: &Path) -> Run {
    let open = || Workspace::open(dir);
    match command {
        Command::Init => {
            let ws = Workspace::init(dir)?;
            ok(format!("initialized {}\n", ws.log_path().display()))
        }
        Command::AddObservation { dataset, digest, common } => {
            let extra = [("dataset", dataset.map(Value::String)), ("digest", digest.map(Value::String))];
            add(&open()?, ContainerKind::Observation, common, extra)
        }
        Command::AddHypothesis { text, common } => {
            add(&open()?, ContainerKind::Hypothesis, common, [("text", text.map(Value::String))])
        }
        Command::AddTest { method, metric, strategy, outcome, confidence, common } => {
            let confidence = match confidence {
                Some(c) => Some(Value::Number(
                    serde_json::Number::from_f64(c).ok_or_else(|| Fail::Usage(format!("confidence {c} is not finite")))?,
                )),
                None => None,
            };
            let extra = [
                ("method", method.map(Value::String)),
                ("metric", metric.map(Value::String)),
                ("strategy", strategy.map(Value::String)),
                ("outcome", outcome.map(Value::String)),
                ("confidence", confidence),
            ];
            add(&open()?, ContainerKind::Test, common, extra)
        }
        Command::Link { from, to, kind } => {
            let ws = open()?;
            let mut w = ws.writer()?;
            let (from, to) = (resolve_id(w.snapshot(), &from)?, resolve_id(w.snapshot(), &to)?);
            w.link(from.clone(), to.clone(), kind)?;
            ok(format!("{from} -> {to} ({kind})\n"))
        }
        Command::SetWinner { test, hypothesis } => {
            let ws = open()?;
            let mut w = ws.writer()?;
            let (test, hyp) = (resolve_id(w.snapshot(), &test)?, resolve_id(w.snapshot(), &hypothesis)?);
            w.set_winner(test.clone(), hyp.clone())?;
            ok(format!("{test} winner {hyp}\n"))
        }
        Command::Promote { test, observation, outcome, confidence } => {
            let outcome: Outcome = outcome.parse()?;
            let ws = open()?;
            let mut w = ws.writer()?;
            let (test, obs) = (resolve_id(w.snapshot(), &test)?, resolve_id(w.snapshot(), &observation)?);
            let successor = w.promote(test, obs, outcome, confidence, None)?;
            ok(format!("{successor}\n"))
        }
        Command::Grid { format, transpose, input } => {
            let snap = load(dir, cwd, &input)?;
            let mut grid = grid_view(&snap);
            if transpose {
                grid = algebra::permute(&grid);
            }
            ok(match format {
                GridFormat::Table => render::grid_table(&snap, &grid),
                GridFormat::Csv => render::grid_csv(&snap, &grid),
                GridFormat::Canonical => canonical_line(render::grid_canonical(&snap, &grid)),
            })
        }
        Command::Status { hypothesis, format, input } => {
            let snap = load(dir, cwd, &input)?;
            let summary = hypothesis_status(&snap, &resolve_id(&snap, &hypothesis)?)?;
            ok(match format {
                TextFormat::Text => render::status_text(&snap, &summary),
                TextFormat::Canonical => canonical_line(render::status_canonical(&summary)),
            })
        }
        Command::Backlog { format, input } => {
            let snap = load(dir, cwd, &input)?;
            let entries = backlog(&snap);
            ok(match format {
                TextFormat::Text => render::backlog_text(&entries),
                TextFormat::Canonical => canonical_line(render::backlog_canonical(&entries)),
            })
        }
        Command::Report { test, format, input } => {
            let snap = load(dir, cwd, &input)?;
            let report = knowledge_report(&snap, &resolve_id(&snap, &test)?)?;
            ok(match format {
                ReportFormat::Markdown => render::report_markdown(&report),
                ReportFormat::Canonical => canonical_line(render::report_canonical(&report)),
            })
        }
        Command::Export { output } => emit(&open()?.snapshot()?, &output, cwd),
        Command::Join { with, output } => {
            let mut acc = Snapshot::new();
            for source in &with {
                acc = algebra::join(&acc, &source_snapshot(source, dir, cwd)?)?;
            }
            emit(&acc, &output, cwd)
        }
        Command::Restrict { rows, input, output } => {
            let snap = load(dir, cwd, &input)?;
            let rows = resolve_all(&snap, &rows)?;
            emit(&algebra::restrict(&snap, &rows)?, &output, cwd)
        }
        Command::Project { cols, input, output } => {
            let snap = load(dir, cwd, &input)?;
            let cols = resolve_all(&snap, &cols)?;
            emit(&algebra::project(&snap, &cols)?, &output, cwd)
        }
        Command::Compose { parts, output } => {
            let mut resolved = Vec::new();
            for spec in &parts {
                resolved.push(parse_part(spec, dir, cwd)?);
            }
            emit(&algebra::compose(&resolved)?, &output, cwd)
        }
        Command::Verify { format } => {
            let report = open()?.verify()?;
            let code = if report.is_ok() { 0 } else { 1 };
            let text = match format {
                TextFormat::Text => render::verify_text(&report),
                TextFormat::Canonical => canonical_line(render::verify_canonical(&report)),
            };
            Ok((code, text))
        }
    }
}

fn add<const N: usize>(
    ws: &Workspace,
    kind: ContainerKind,
    common: ContainerArgs,
    extra: [(&str, Option<Value>); N],
) -> Run {
    let mut map = match &common.payload {
        None => Map::new(),
        Some(text) => match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(m)) => m,
            Ok(_) => return Err(Fail::Usage("--payload must be a JSON object".into())),
            Err(e) => return Err(Fail::Usage(format!("--payload is not valid JSON: {e}"))),
        },
    };
    for (key, value) in extra {
        if let Some(v) = value {
            map.insert(key.to_owned(), v);
        }
    }
    for field in &common.fields {
        let (key, raw) =
            field.split_once('=').ok_or_else(|| Fail::Usage(format!("--field expects KEY=VALUE, got {field:?}")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
        map.insert(key.to_owned(), value);
    }
    let payload = Payload::new(map)?;
    let mut w = ws.writer()?;
    let id = w.add_container(kind, payload, common.period, common.labels)?;
    ok(format!("{id}\n"))
}

fn load(dir: &Path, cwd: &Path, input: &Input) -> Result<Snapshot, Fail> {
    match &input.input {
        Some(path) => read_ekb(&cwd.join(path)),
        None => Ok(Workspace::open(dir)?.snapshot()?),
    }
}

fn read_ekb(path: &Path) -> Result<Snapshot, Fail> {
    let bytes = fs::read(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(deserialize_snapshot(&bytes)?)
}

fn source_snapshot(source: &str, dir: &Path, cwd: &Path) -> Result<Snapshot, Fail> {
    if source == "@" {
        Ok(Workspace::open(dir)?.snapshot()?)
    } else {
        read_ekb(&cwd.join(source))
    }
}

fn resolve_all(snap: &Snapshot, ids: &[String]) -> Result<BTreeSet<ContainerId>, Fail> {
    ids.iter().filter(|s| !s.is_empty()).map(|s| resolve_id(snap, s).map_err(Fail::from)).collect()
}

fn parse_part(spec: &str, dir: &Path, cwd: &Path) -> Result<ComposePart, Fail> {
    let mut pieces = spec.split('|');
    let source = pieces.next().unwrap_or_default();
    if source.is_empty() {
        return Err(Fail::Usage(format!("--part {spec:?} has no source")));
    }
    let snapshot = source_snapshot(source, dir, cwd)?;
    let mut part = ComposePart::all(snapshot);
    for piece in pieces {
        let (key, list) =
            piece.split_once('=').ok_or_else(|| Fail::Usage(format!("--part selector {piece:?} needs '='")))?;
        let ids: Vec<String> = list.split(',').map(str::to_owned).collect();
        let set = resolve_all(&part.snapshot, &ids)?;
        match key {
            "rows" => part.rows = Some(set),
            "cols" => part.cols = Some(set),
            _ => return Err(Fail::Usage(format!("unknown --part selector {key:?}"))),
        }
    }
    Ok(part)
}

fn emit(snapshot: &Snapshot, output: &OutputFile, cwd: &Path) -> Run {
    let mut bytes = serialize_snapshot(snapshot);
    bytes.push(b'\n');
    match &output.output {
        Some(path) => {
            let path = cwd.join(path);
            fs::write(&path, bytes).map_err(|e| Fail::Domain(Error::Io(e)))?;
            ok(String::new())
        }
        None => ok(String::from_utf8(bytes).expect("canonical JSON is UTF-8")),
    }
}
