//! System files and CSV reports.
//!
//! Two system formats are understood. JSON:
//!
//! ```text
//! {"name": "toggle", "variables": ["a", "b"],
//!  "actions": [{"pre": {"a": true}, "eff": {"b": false}}],
//!  "metadata": {...}}
//! ```
//!
//! and a line-based text form:
//!
//! ```text
//! # comment
//! name: toggle
//! vars: a b
//! pre: a -> eff: !b
//! ```
//!
//! Every variable must be declared. Serialization lists variables by id and
//! actions in the system's canonical order, so equal systems give equal
//! bytes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::compose::BoundReport;
use crate::error::{Error, Result};
use crate::oracle::TopoReport;
use crate::system::{Action, PartialState, System, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

impl Format {
    /// `.json` files are JSON; anything else is the text form.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Text,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Text => "sys",
        }
    }
}

/// A system together with its optional name and free-form metadata.
/// Metadata is kept by the JSON form only.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDocument {
    pub name: Option<String>,
    pub system: System,
    pub metadata: Map<String, Value>,
}

impl SystemDocument {
    pub fn new(system: System) -> Self {
        Self {
            name: None,
            system,
            metadata: Map::new(),
        }
    }
}

pub fn parse_system(text: &str, format: Format) -> Result<System> {
    parse_document(text, format).map(|d| d.system)
}

pub fn parse_document(text: &str, format: Format) -> Result<SystemDocument> {
    match format {
        Format::Json => parse_json(text),
        Format::Text => parse_text(text),
    }
}

pub fn serialize_system(sys: &System, format: Format) -> String {
    serialize_document(&SystemDocument::new(sys.clone()), format)
}

pub fn serialize_document(doc: &SystemDocument, format: Format) -> String {
    match format {
        Format::Json => to_json(doc),
        Format::Text => to_text(doc),
    }
}

pub fn read_system_file(path: &Path) -> Result<SystemDocument> {
    let text = fs::read_to_string(path)?;
    parse_document(&text, Format::from_path(path))
}

pub fn write_system_file(path: &Path, doc: &SystemDocument, format: Format) -> Result<()> {
    fs::write(path, serialize_document(doc, format))?;
    Ok(())
}

/// Resolves named literals, rejecting unknown names and contradictions.
fn resolve<'a>(
    names: &[String],
    lits: impl IntoIterator<Item = (&'a str, bool)>,
) -> Result<PartialState> {
    let mut out = PartialState::new();
    for (name, val) in lits {
        let v = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        if out.insert(v, val).is_some_and(|prev| prev != val) {
            return Err(Error::ContradictoryLiteral(name.to_string()));
        }
    }
    Ok(out)
}

// JSON

#[derive(Default)]
struct Literals(Vec<(String, bool)>);

impl<'de> Deserialize<'de> for Literals {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Literals;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping variable names to booleans")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Literals, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, bool>()? {
                    out.push(entry);
                }
                Ok(Literals(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonActionIn {
    #[serde(default)]
    pre: Literals,
    #[serde(default)]
    eff: Literals,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDocIn {
    #[serde(default)]
    name: Option<String>,
    variables: Vec<String>,
    #[serde(default)]
    actions: Vec<JsonActionIn>,
    #[serde(default)]
    metadata: Map<String, Value>,
}

#[derive(Serialize)]
struct JsonDocOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
    variables: Vec<&'a str>,
    actions: Vec<JsonActionOut>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    metadata: &'a Map<String, Value>,
}

#[derive(Serialize)]
struct JsonActionOut {
    pre: Map<String, Value>,
    eff: Map<String, Value>,
}

fn parse_json(text: &str) -> Result<SystemDocument> {
    let doc: JsonDocIn = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut actions = Vec::with_capacity(doc.actions.len());
    for a in &doc.actions {
        let pre = resolve(&doc.variables, a.pre.0.iter().map(|(n, b)| (n.as_str(), *b)))?;
        let eff = resolve(&doc.variables, a.eff.0.iter().map(|(n, b)| (n.as_str(), *b)))?;
        actions.push(Action::new(pre, eff));
    }
    Ok(SystemDocument {
        name: doc.name,
        system: System::new(doc.variables, actions)?,
        metadata: doc.metadata,
    })
}

fn to_json(doc: &SystemDocument) -> String {
    let sys = &doc.system;
    let lits = |s: &PartialState| -> Map<String, Value> {
        s.iter().map(|(v, b)| (sys.var_name(v).to_string(), Value::Bool(b))).collect()
    };
    let out = JsonDocOut {
        name: doc.name.as_deref(),
        variables: sys.variables().iter().map(|v| v.name.as_str()).collect(),
        actions: sys
            .actions()
            .iter()
            .map(|a| JsonActionOut {
                pre: lits(&a.pre),
                eff: lits(&a.eff),
            })
            .collect(),
        metadata: &doc.metadata,
    };
    let mut s = serde_json::to_string_pretty(&out).expect("system serializes");
    s.push('\n');
    s
}

// Text

struct Line<'a> {
    no: usize,
    text: &'a str,
}

impl Line<'_> {
    /// Syntax error at byte offset `at` of this line.
    fn error(&self, at: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.no,
            column: self.text[..at.min(self.text.len())].chars().count() + 1,
            message: message.into(),
        }
    }

    /// Byte offset of the subslice `part` within the line.
    fn offset(&self, part: &str) -> usize {
        part.as_ptr() as usize - self.text.as_ptr() as usize
    }

    /// Splits a comma-separated literal list; an empty list is allowed.
    fn literals<'a>(&'a self, list: &'a str) -> Result<Vec<(&'a str, bool, usize)>> {
        if list.trim().is_empty() {
            return Ok(Vec::new());
        }
        list.split(',')
            .map(|item| {
                let lit = item.trim();
                let at = self.offset(item) + (item.len() - item.trim_start().len());
                let (name, val) = match lit.strip_prefix('!') {
                    Some(rest) => (rest.trim_start(), false),
                    None => (lit, true),
                };
                if name.is_empty() {
                    return Err(self.error(at, "empty literal"));
                }
                if name.contains(char::is_whitespace) {
                    return Err(self.error(at, format!("literals must be separated by commas: {lit:?}")));
                }
                let name_at = self.offset(name);
                Ok((name, val, name_at))
            })
            .collect()
    }
}

fn parse_text(text: &str) -> Result<SystemDocument> {
    let mut name = None;
    let mut vars: Vec<String> = Vec::new();
    let mut actions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = Line { no: i + 1, text: raw };
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let start = line.offset(trimmed);
        if let Some(rest) = trimmed.strip_prefix("name:") {
            if name.is_some() {
                return Err(line.error(start, "name given twice"));
            }
            name = Some(rest.trim().to_string());
        } else if let Some(rest) = trimmed.strip_prefix("vars:") {
            for v in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                if vars.iter().any(|w| w == v) {
                    return Err(Error::DuplicateVariable(v.to_string()));
                }
                vars.push(v.to_string());
            }
        } else if let Some(rest) = trimmed.strip_prefix("pre:") {
            let Some((pre, eff_part)) = rest.split_once("->") else {
                return Err(line.error(start, "expected `pre: ... -> eff: ...`"));
            };
            let eff_trim = eff_part.trim_start();
            let Some(eff) = eff_trim.strip_prefix("eff:") else {
                return Err(line.error(line.offset(eff_trim), "expected `eff:` after `->`"));
            };
            let mut sides = Vec::with_capacity(2);
            for list in [pre, eff] {
                let mut ps = PartialState::new();
                for (n, val, at) in line.literals(list)? {
                    let Some(v) = vars.iter().position(|w| w == n) else {
                        return Err(line.error(at, format!("unknown variable {n}")));
                    };
                    if ps.insert(v as VarId, val).is_some_and(|prev| prev != val) {
                        return Err(Error::ContradictoryLiteral(format!("{n} (line {})", line.no)));
                    }
                }
                sides.push(ps);
            }
            let eff = sides.pop().unwrap();
            let pre = sides.pop().unwrap();
            actions.push(Action::new(pre, eff));
        } else {
            return Err(line.error(start, "expected `vars:`, `name:` or `pre: ... -> eff: ...`"));
        }
    }
    Ok(SystemDocument {
        name,
        system: System::new(vars, actions)?,
        metadata: Map::new(),
    })
}

fn to_text(doc: &SystemDocument) -> String {
    let sys = &doc.system;
    let mut s = String::new();
    if let Some(name) = &doc.name {
        s.push_str(&format!("name: {name}\n"));
    }
    s.push_str("vars:");
    for v in sys.variables() {
        s.push(' ');
        s.push_str(&v.name);
    }
    s.push('\n');
    let lits = |p: &PartialState| {
        p.iter()
            .map(|(v, b)| format!("{}{}", if b { "" } else { "!" }, sys.var_name(v)))
            .collect::<Vec<_>>()
            .join(",")
    };
    for a in sys.actions() {
        let pre = lits(&a.pre);
        let sep = if pre.is_empty() { "" } else { " " };
        s.push_str(&format!("pre:{sep}{pre} -> eff: {}\n", lits(&a.eff)));
    }
    s
}

// Reports

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}

/// One row of the bound CSV. A problem that failed outright has empty
/// numeric columns and `degraded = error`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRow {
    pub problem: String,
    pub base: String,
    pub total_bound: Option<u64>,
    pub num_clusters: Option<usize>,
    pub max_cluster_vars: Option<usize>,
    pub rd_queries: Option<usize>,
    pub rd_time_ms: Option<u64>,
    pub td_time_ms: Option<u64>,
    pub total_time_ms: Option<u64>,
    pub degraded: String,
}

pub const BOUND_COLUMNS: [&str; 10] = [
    "problem",
    "base",
    "total_bound",
    "num_clusters",
    "max_cluster_vars",
    "rd_queries",
    "rd_time_ms",
    "td_time_ms",
    "total_time_ms",
    "degraded",
];

pub const BOUND_TIMING_COLUMNS: [&str; 3] = ["rd_time_ms", "td_time_ms", "total_time_ms"];

impl BoundRow {
    pub fn from_report(problem: &str, report: &BoundReport, elapsed: Duration) -> Self {
        Self {
            problem: problem.to_string(),
            base: report.base.kind.as_str().to_string(),
            total_bound: Some(report.total),
            num_clusters: Some(report.clusters.len()),
            max_cluster_vars: Some(report.max_cluster_vars()),
            rd_queries: Some(report.rd_queries()),
            rd_time_ms: Some(ms(report.rd_time())),
            td_time_ms: Some(ms(report.td_time())),
            total_time_ms: Some(ms(elapsed)),
            degraded: report.degraded().to_string(),
        }
    }

    pub fn failed(problem: &str, base: &str) -> Self {
        Self {
            problem: problem.to_string(),
            base: base.to_string(),
            total_bound: None,
            num_clusters: None,
            max_cluster_vars: None,
            rd_queries: None,
            rd_time_ms: None,
            td_time_ms: None,
            total_time_ms: None,
            degraded: "error".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopoRow {
    pub problem: String,
    pub exp: u64,
    pub d: u64,
    pub rd: u64,
    pub td: u64,
    pub d_time_ms: u64,
    pub rd_time_ms: u64,
    pub td_time_ms: u64,
}

pub const TOPO_COLUMNS: [&str; 8] = ["problem", "exp", "d", "rd", "td", "d_time_ms", "rd_time_ms", "td_time_ms"];

impl TopoRow {
    pub fn from_report(problem: &str, r: &TopoReport) -> Self {
        Self {
            problem: problem.to_string(),
            exp: r.exp,
            d: r.d,
            rd: r.rd,
            td: r.td,
            d_time_ms: ms(r.timings.d),
            rd_time_ms: ms(r.timings.rd),
            td_time_ms: ms(r.timings.td),
        }
    }
}

fn write_csv<W: Write, R: Serialize>(out: W, columns: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(columns)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes bound rows with a fixed header; an empty slice gives the header
/// alone.
pub fn write_bound_csv<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    write_csv(out, &BOUND_COLUMNS, rows)
}

pub fn write_topo_csv<W: Write>(out: W, rows: &[TopoRow]) -> Result<()> {
    write_csv(out, &TOPO_COLUMNS, rows)
}

pub fn read_bound_csv(text: &str) -> Result<Vec<BoundRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != BOUND_COLUMNS {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
