//! Command dispatch and deterministic report rendering for the CLI.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::boundary::{self, primitive_integer_form, LogEntry};
use crate::fixture::{parse_fixture, Fixture, ParseError, SigmaFile};
use crate::linalg::Vector;
use crate::monodromy::{self, render_form, render_residues, Generator, MonodromyType};
use crate::validation::ValidationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check the graph, the adapted basis and any declared residues.
    Validate,
    /// Levelwise boundary equations.
    Boundary,
    /// Residue relations forced by the monodromy of an arc.
    Forced,
    /// Twist matrices and their logarithms.
    Monodromy,
    /// GRC and matching-residue generators per level.
    Grc,
    /// Validate, boundary, grc and (with weights) forced together.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Boundary => "boundary",
            Command::Forced => "forced",
            Command::Monodromy => "monodromy",
            Command::Grc => "grc",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Levelwise boundary equations of linear subvarieties of strata.
#[derive(Debug, Parser)]
#[command(name = "levelwise", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Fixture file (JSON).
    pub fixture: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Arc weights: a file, a JSON object, or `-1=2,e1=1`.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// A horizontal edge id, a lower level, or `all`.
    #[arg(long, default_value = "all", allow_hyphen_values = true)]
    pub generator: String,
    /// Process every `*.json` file in a directory, in name order.
    #[arg(long, conflicts_with = "fixture")]
    pub batch: Option<PathBuf>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Invalid,
    ParseError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::Invalid => EXIT_INVALID,
            Status::ParseError => EXIT_PARSE,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub fixture: String,
    pub digest: String,
    pub status: Status,
    pub payload: Value,
    #[serde(skip)]
    text: String,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Text => {
                let mut out = format!("{} {} (sha256 {})\nstatus: {}\n", self.command, self.fixture, self.digest, status_word(self.status));
                out.push_str(&self.text);
                out
            }
        }
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Invalid => "invalid",
        Status::ParseError => "parse error",
    }
}

/// A failure that ends a command early.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Failure {
    Parse(ParseError),
    Invalid(String),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Parse(e)
    }
}

/// Text and JSON for one part of a report.
struct Section {
    json: Value,
    text: String,
    ok: bool,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn vector_text(v: &[crate::scalar::Scalar], names: &[String]) -> String {
    render_form(v, |k| names[k].clone())
}

fn coefficient_map(v: &Vector, names: &[String]) -> Value {
    let map: serde_json::Map<String, Value> = v
        .iter()
        .zip(names)
        .filter(|(x, _)| !num_traits::Zero::is_zero(*x))
        .map(|(x, n)| (n.clone(), Value::String(x.to_string())))
        .collect();
    Value::Object(map)
}

fn validate_section(fx: &Fixture) -> Section {
    let mut report = fx.model.graph().validate(&fx.mu);
    report.extend(fx.model.validate());
    if let Some(r) = &fx.residues {
        report.extend(fx.model.residue_consistency(r));
    }
    findings_section(&report)
}

fn findings_section(report: &ValidationReport) -> Section {
    let mut text = String::new();
    if report.is_ok() {
        text.push_str("findings: none\n");
    }
    for f in report.findings() {
        let _ = writeln!(text, "finding {} [{}]: {}", f.rule, f.subject, f.detail);
    }
    Section { json: json!({ "findings": report }), text, ok: report.is_ok() }
}

fn cycle_names(fx: &Fixture) -> Vec<String> {
    fx.model.cycles().iter().map(|c| c.id.clone()).collect()
}

fn boundary_section(fx: &Fixture) -> Result<Section, Failure> {
    let model = &fx.model;
    let set = boundary::boundary_equations(model, &fx.equations).map_err(|e| Failure::Invalid(e.to_string()))?;
    let names = cycle_names(fx);
    let edge_id = |e: usize| model.graph().edges()[e].id.clone();
    let mut text = String::new();
    let mut levels = Vec::new();
    for block in &set.blocks {
        let basis = &model.level_homology(block.level).expect("block level").basis;
        let kind = match block.kind {
            boundary::BlockKind::Linear => "linear",
            boundary::BlockKind::Projective => "projective",
        };
        let _ = writeln!(text, "level {} ({kind}):", block.level);
        let mut equations = Vec::new();
        for v in block.span.basis() {
            let p = primitive_integer_form(v);
            let t = vector_text(&p, basis);
            let _ = writeln!(text, "  {t} = 0");
            equations.push(json!({ "coefficients": coefficient_map(&p, basis), "text": t }));
        }
        if block.span.dim() == 0 {
            text.push_str("  (none)\n");
        }
        levels.push(json!({ "level": block.level, "kind": kind, "equations": equations }));
    }
    let mut log = Vec::new();
    for entry in &set.log {
        let row = vector_text(&primitive_integer_form(entry.row()), &names);
        match entry {
            LogEntry::HorizontalCrossing { level, edges, .. } => {
                let edges: Vec<String> = edges.iter().map(|&e| edge_id(e)).collect();
                let _ = writeln!(text, "deleted at level {level}: {row} (crosses {})", edges.join(", "));
                log.push(json!({ "reason": "horizontal_crossing", "level": level, "row": row, "edges": edges }));
            }
            LogEntry::ReducedToZero { level, .. } => {
                let _ = writeln!(text, "vanished at level {level}: {row}");
                log.push(json!({ "reason": "reduced_to_zero", "level": level, "row": row }));
            }
        }
    }
    Ok(Section { json: json!({ "levels": levels, "log": log }), text, ok: true })
}

fn grc_section(fx: &Fixture) -> Result<Section, Failure> {
    let model = &fx.model;
    let mut text = String::new();
    let mut levels = Vec::new();
    for i in model.graph().levels() {
        let span = model.grc_span(i).map_err(|e| Failure::Invalid(e.to_string()))?;
        let basis = &model.level_homology(i).expect("graph level").basis;
        let _ = writeln!(text, "level {i}: span of dimension {}", span.span.dim());
        let mut gens = Vec::new();
        for g in &span.generators {
            let t = vector_text(&g.vector, basis);
            let source = match &g.source {
                crate::homology::GrcSource::Component { vertices, edges } => {
                    format!("component {{{}}} via {}", vertices.join(", "), edges.join(", "))
                }
                crate::homology::GrcSource::Horizontal { edge } => format!("horizontal {edge}"),
            };
            let _ = writeln!(text, "  {source}: {t}");
            gens.push(json!({ "source": g.source, "vector": t }));
        }
        levels.push(json!({ "level": i, "dimension": span.span.dim(), "generators": gens }));
    }
    Ok(Section { json: json!({ "levels": levels }), text, ok: true })
}

fn load_sigma(fx: &Fixture, flag: Option<&str>) -> Result<Option<MonodromyType>, Failure> {
    let file = match flag {
        Some(s) => {
            let path = Path::new(s);
            let text = if !s.trim_start().starts_with('{') && path.is_file() {
                std::fs::read_to_string(path).map_err(|e| ParseError { path: "sigma".into(), reason: e.to_string() })?
            } else {
                s.to_string()
            };
            Some(SigmaFile::parse_inline(&text)?)
        }
        None => fx.sigma.clone(),
    };
    let Some(file) = file else { return Ok(None) };
    let (levels, horizontal) = fx.resolve_sigma(&file)?;
    MonodromyType::new(&fx.model, levels, horizontal)
        .map(Some)
        .map_err(|e| Failure::Invalid(format!("MonodromyType: {e}")))
}

fn forced_section(fx: &Fixture, sigma: &MonodromyType) -> Result<Section, Failure> {
    let model = &fx.model;
    let invalid = |e: monodromy::MonodromyError| Failure::Invalid(e.to_string());
    let a = boundary::rref(&fx.equations, model.dim()).rows;
    let forms = monodromy::forced_residue_equations(model, &a, sigma).map_err(invalid)?;
    let n = monodromy::arc_log(model, sigma).map_err(invalid)?;
    let preserved = monodromy::preserves(&a, &n.matrix).map_err(invalid)?;
    let names = cycle_names(fx);
    let g = model.graph();
    let mut text = String::new();
    let mut weights = serde_json::Map::new();
    for e in 0..g.edges().len() {
        let w = sigma.edge_weight(model, e).map_err(invalid)?;
        weights.insert(g.edges()[e].id.clone(), json!(w));
    }
    let levels: serde_json::Map<String, Value> = sigma.levels().iter().map(|(l, w)| (l.to_string(), json!(w))).collect();
    let weight_text: Vec<String> = weights.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(text, "edge weights: {}", weight_text.join(", "));
    let mut out = Vec::new();
    for f in &forms {
        let row = vector_text(&a[f.row], &names);
        let raw = render_residues(model, &f.raw);
        let reduced = render_residues(model, &f.reduced);
        let equation = render_residues(model, &primitive_integer_form(&f.reduced));
        if f.vacuous {
            let _ = writeln!(text, "row {row}: {raw} -> 0 (vacuous)");
        } else {
            let _ = writeln!(text, "row {row}: {raw} -> {equation} = 0");
        }
        out.push(json!({ "row": row, "raw": raw, "reduced": reduced, "equation": equation, "vacuous": f.vacuous }));
    }
    let _ = writeln!(text, "monodromy preserves the equations: {preserved}");
    let json = json!({
        "sigma": { "levels": levels, "edges": weights },
        "forms": out,
        "preserves": preserved,
    });
    Ok(Section { json, text, ok: true })
}

fn monodromy_section(fx: &Fixture, which: &str) -> Result<Section, Failure> {
    let model = &fx.model;
    let generators = if which == "all" {
        Generator::all(model)
    } else {
        vec![Generator::parse(model, which).map_err(|e| Failure::Invalid(e.to_string()))?]
    };
    let names = cycle_names(fx);
    let mut text = format!("basis: {}\n", names.join(" "));
    let mut ops = Vec::new();
    for g in &generators {
        let t = monodromy::twist_matrix(model, g).map_err(|e| Failure::Invalid(e.to_string()))?;
        let n = monodromy::monodromy_log(model, g).map_err(|e| Failure::Invalid(e.to_string()))?;
        let _ = writeln!(text, "{}:", t.tag);
        for (l, name) in names.iter().enumerate() {
            let col: Vec<crate::scalar::Scalar> = n.matrix.column(l).into_iter().map(crate::scalar::Scalar::from_int).collect();
            if col.iter().any(|x| !num_traits::Zero::is_zero(x)) {
                let _ = writeln!(text, "  N({name}) = {}", vector_text(&col, &names));
            }
        }
        ops.push(json!({
            "generator": g.label(model),
            "tag": t.tag,
            "twist": t.matrix.rows(),
            "log": n.matrix.rows(),
        }));
    }
    Ok(Section { json: json!({ "basis": names, "operators": ops }), text, ok: true })
}

fn run_on_fixture(cli: &Cli, fx: &Fixture) -> Result<Section, Failure> {
    match cli.command {
        Command::Validate => Ok(validate_section(fx)),
        Command::Boundary | Command::Grc | Command::Forced => {
            let v = validate_section(fx);
            if !v.ok {
                return Ok(v);
            }
            match cli.command {
                Command::Boundary => boundary_section(fx),
                Command::Grc => grc_section(fx),
                _ => {
                    let sigma = load_sigma(fx, cli.sigma.as_deref())?.ok_or_else(|| {
                        Failure::Parse(ParseError { path: "sigma".into(), reason: "no weights given and none in the fixture".into() })
                    })?;
                    forced_section(fx, &sigma)
                }
            }
        }
        Command::Monodromy => {
            let v = validate_section(fx);
            if !v.ok {
                return Ok(v);
            }
            monodromy_section(fx, &cli.generator)
        }
        Command::Report => {
            let v = validate_section(fx);
            let mut json = serde_json::Map::new();
            let mut text = v.text.clone();
            json.insert("validate".into(), v.json);
            if !v.ok {
                return Ok(Section { json: Value::Object(json), text, ok: false });
            }
            let b = boundary_section(fx)?;
            let g = grc_section(fx)?;
            text.push_str(&b.text);
            text.push_str(&g.text);
            json.insert("boundary".into(), b.json);
            json.insert("grc".into(), g.json);
            if let Some(sigma) = load_sigma(fx, cli.sigma.as_deref())? {
                let f = forced_section(fx, &sigma)?;
                text.push_str(&f.text);
                json.insert("forced".into(), f.json);
            }
            Ok(Section { json: Value::Object(json), text, ok: true })
        }
    }
}

/// Runs one command on one fixture document.
pub fn run_bytes(cli: &Cli, label: &str, bytes: &[u8]) -> Report {
    let digest = digest(bytes);
    let result = parse_fixture(bytes).map_err(Failure::from).and_then(|fx| run_on_fixture(cli, &fx));
    let (status, payload, text) = match result {
        Ok(s) => (if s.ok { Status::Ok } else { Status::Invalid }, s.json, s.text),
        Err(Failure::Parse(e)) => (Status::ParseError, json!({ "error": { "path": e.path, "reason": e.reason } }), format!("error: {e}\n")),
        Err(Failure::Invalid(msg)) => (Status::Invalid, json!({ "error": msg }), format!("error: {msg}\n")),
    };
    Report { command: cli.command.name(), fixture: label.to_string(), digest, status, payload, text }
}

/// Runs the parsed command line; returns the rendered output and exit code.
pub fn run(cli: &Cli) -> (String, i32) {
    if let Some(dir) = &cli.batch {
        let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
            Ok(entries) => entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect(),
            Err(e) => return (format!("error: cannot read {}: {e}\n", dir.display()), EXIT_PARSE),
        };
        files.sort();
        let reports: Vec<Report> = files.iter().map(|p| run_path(cli, p)).collect();
        let exit = reports.iter().map(|r| r.status.exit_code()).max().unwrap_or(EXIT_OK);
        let out = match cli.format {
            Format::Json => serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n",
            Format::Text => reports.iter().map(|r| r.render(Format::Text)).collect::<Vec<_>>().join("\n"),
        };
        return (out, exit);
    }
    let Some(path) = &cli.fixture else {
        return ("error: a fixture file or --batch directory is required\n".into(), EXIT_PARSE);
    };
    let report = run_path(cli, path);
    (report.render(cli.format), report.status.exit_code())
}

fn run_path(cli: &Cli, path: &Path) -> Report {
    let label = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    match std::fs::read(path) {
        Ok(bytes) => run_bytes(cli, &label, &bytes),
        Err(e) => Report {
            command: cli.command.name(),
            fixture: label,
            digest: String::new(),
            status: Status::ParseError,
            payload: json!({ "error": { "path": "document", "reason": e.to_string() } }),
            text: format!("error: {e}\n"),
        },
    }
}
