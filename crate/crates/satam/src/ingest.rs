//! Workspace loading: parses the six canonical files of a workspace
//! directory into domain records.
//!
//! Parsing never stops at the first problem. Every recoverable error becomes
//! its own diagnostic so a whole editing session can be fixed in one pass,
//! and diagnostics come back sorted by (file, location, rule code).

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::diag::{sort_diagnostics, Diagnostic, RuleCode, SourceLocation};
use crate::model::{
    AdrRecord, ArchitectureModel, CarafRecord, CryptoAsset, SecurityQas, ThreatRecord,
};

pub const ARCHITECTURE_FILE: &str = "architecture.json";
pub const THREATS_FILE: &str = "threats.json";
pub const QAS_FILE: &str = "qas.json";
pub const ADRS_FILE: &str = "adrs.json";
pub const CARAF_FILE: &str = "caraf.json";
pub const ASSETS_FILE: &str = "assets.json";

/// The six files every workspace directory must contain.
pub const WORKSPACE_FILES: [&str; 6] = [
    ARCHITECTURE_FILE,
    THREATS_FILE,
    QAS_FILE,
    ADRS_FILE,
    CARAF_FILE,
    ASSETS_FILE,
];

/// Only this schema version is accepted.
pub const SCHEMA_VERSION: u64 = 1;

/// Record namespaces. Ids must be unique within a namespace; the same id may
/// appear in different namespaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Namespace {
    Element,
    Flow,
    TrustBoundary,
    Threat,
    Qas,
    Adr,
    Caraf,
    Asset,
}

impl Namespace {
    pub fn as_str(self) -> &'static str {
        match self {
            Namespace::Element => "element",
            Namespace::Flow => "flow",
            Namespace::TrustBoundary => "trust_boundary",
            Namespace::Threat => "threat",
            Namespace::Qas => "qas",
            Namespace::Adr => "adr",
            Namespace::Caraf => "caraf",
            Namespace::Asset => "asset",
        }
    }
}

impl std::fmt::Display for Namespace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A fully parsed workspace. Declaration order of every record list is
/// preserved; asset order drives CBOM component order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Workspace {
    pub root: PathBuf,
    pub architecture: ArchitectureModel,
    pub threats: Vec<ThreatRecord>,
    pub qas: Vec<SecurityQas>,
    pub adrs: Vec<AdrRecord>,
    pub caraf: Vec<CarafRecord>,
    pub assets: Vec<CryptoAsset>,
    /// Every record's origin, for diagnostics: (namespace, id) -> location.
    pub source_map: BTreeMap<(Namespace, String), SourceLocation>,
}

impl Workspace {
    pub fn location_of(&self, ns: Namespace, id: &str) -> Option<&SourceLocation> {
        self.source_map.get(&(ns, id.to_string()))
    }
}

/// Kinds accepted by [`parse_record`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Threat,
    Qas,
    Adr,
    Caraf,
    Asset,
}

impl RecordKind {
    fn section(self) -> &'static str {
        match self {
            RecordKind::Threat => "threats",
            RecordKind::Qas => "qas",
            RecordKind::Adr => "adrs",
            RecordKind::Caraf => "caraf",
            RecordKind::Asset => "assets",
        }
    }
}

/// A single parsed record of any artifact kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Threat(ThreatRecord),
    Qas(SecurityQas),
    Adr(AdrRecord),
    Caraf(CarafRecord),
    Asset(CryptoAsset),
}

/// Loads and parses a workspace directory.
///
/// On success every record carries a source location and all local
/// invariants hold. On failure the full, sorted diagnostic list is returned:
/// P1 missing file, P2 malformed syntax, P3 schema or invariant violation,
/// P4 duplicate id.
pub fn load_workspace(root: &Path) -> Result<Workspace, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut ws = Workspace {
        root: root.to_path_buf(),
        ..Workspace::default()
    };
    let mut seen: BTreeMap<(Namespace, String), SourceLocation> = BTreeMap::new();

    // architecture.json carries the three baseline arrays.
    if let Some(value) = read_json(root, ARCHITECTURE_FILE, &mut diags) {
        if let Some(obj) = check_document(
            ARCHITECTURE_FILE,
            &value,
            &["elements", "flows", "trust_boundaries"],
            &mut diags,
        ) {
            let mut arch = ArchitectureModel::default();
            for (section, ns) in [
                ("elements", Namespace::Element),
                ("flows", Namespace::Flow),
                ("trust_boundaries", Namespace::TrustBoundary),
            ] {
                for (i, item) in section_items(ARCHITECTURE_FILE, obj, section, &mut diags)
                    .iter()
                    .enumerate()
                {
                    let loc = SourceLocation::item(ARCHITECTURE_FILE, section, i);
                    match ns {
                        Namespace::Element => {
                            if let Some(el) =
                                parse_item::<crate::model::Element>(item, &loc, &mut diags)
                            {
                                register(ns, el.id.as_str(), &loc, &mut seen, &mut diags);
                                arch.elements.push(el);
                            }
                        }
                        Namespace::Flow => {
                            if let Some(flow) =
                                parse_item::<crate::model::Flow>(item, &loc, &mut diags)
                            {
                                register(ns, flow.id.as_str(), &loc, &mut seen, &mut diags);
                                arch.flows.push(flow);
                            }
                        }
                        _ => {
                            if let Some(tb) =
                                parse_item::<crate::model::TrustBoundary>(item, &loc, &mut diags)
                            {
                                register(ns, tb.id.as_str(), &loc, &mut seen, &mut diags);
                                arch.trust_boundaries.push(tb);
                            }
                        }
                    }
                }
            }
            // Architecture-internal references are a local invariant of the
            // baseline: flows and boundaries may only point at declared
            // elements.
            for violation in arch.check_local() {
                diags.push(
                    Diagnostic::new(RuleCode::P3, violation.message).at(SourceLocation {
                        file: ARCHITECTURE_FILE.to_string(),
                        item: item_index_of(&violation.field),
                        path: violation.field,
                    }),
                );
            }
            ws.architecture = arch;
        }
    }

    load_records(
        root,
        THREATS_FILE,
        RecordKind::Threat,
        Namespace::Threat,
        &mut ws.threats,
        |t| t.id.as_str().to_string(),
        &mut seen,
        &mut diags,
    );
    load_records(
        root,
        QAS_FILE,
        RecordKind::Qas,
        Namespace::Qas,
        &mut ws.qas,
        |q| q.id.as_str().to_string(),
        &mut seen,
        &mut diags,
    );
    load_records(
        root,
        ADRS_FILE,
        RecordKind::Adr,
        Namespace::Adr,
        &mut ws.adrs,
        |a| a.id.as_str().to_string(),
        &mut seen,
        &mut diags,
    );
    load_records(
        root,
        CARAF_FILE,
        RecordKind::Caraf,
        Namespace::Caraf,
        &mut ws.caraf,
        |c| c.id.as_str().to_string(),
        &mut seen,
        &mut diags,
    );
    load_records(
        root,
        ASSETS_FILE,
        RecordKind::Asset,
        Namespace::Asset,
        &mut ws.assets,
        |a| a.id.as_str().to_string(),
        &mut seen,
        &mut diags,
    );

    ws.source_map = seen;
    sort_diagnostics(&mut diags);
    if diags.is_empty() {
        Ok(ws)
    } else {
        Err(diags)
    }
}

/// Parses a single record document of the given kind, enforcing the record's
/// local invariants. Problems come back as P2/P3 diagnostics.
pub fn parse_record(kind: RecordKind, text: &str) -> Result<Record, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            diags.push(
                Diagnostic::new(RuleCode::P2, format!("malformed document syntax: {e}"))
                    .at(SourceLocation::file_level("<input>")),
            );
            return Err(diags);
        }
    };
    let loc = SourceLocation::item("<input>", kind.section(), 0);
    let record = match kind {
        RecordKind::Threat => {
            parse_checked::<ThreatRecord>(&value, &loc, &mut diags, |_| Vec::new())
                .map(Record::Threat)
        }
        RecordKind::Qas => {
            parse_checked::<SecurityQas>(&value, &loc, &mut diags, SecurityQas::check_local)
                .map(Record::Qas)
        }
        RecordKind::Adr => {
            parse_checked::<AdrRecord>(&value, &loc, &mut diags, AdrRecord::check_local)
                .map(Record::Adr)
        }
        RecordKind::Caraf => {
            parse_checked::<CarafRecord>(&value, &loc, &mut diags, CarafRecord::check_local)
                .map(Record::Caraf)
        }
        RecordKind::Asset => {
            parse_checked::<CryptoAsset>(&value, &loc, &mut diags, CryptoAsset::check_local)
                .map(Record::Asset)
        }
    };
    match record {
        Some(r) if diags.is_empty() => Ok(r),
        _ => {
            sort_diagnostics(&mut diags);
            Err(diags)
        }
    }
}

/// Writes a workspace back to its six canonical files (pretty-printed).
pub fn save_workspace(ws: &Workspace, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let arch = serde_json::json!({
        "version": SCHEMA_VERSION,
        "elements": ws.architecture.elements,
        "flows": ws.architecture.flows,
        "trust_boundaries": ws.architecture.trust_boundaries,
    });
    write_json(dir, ARCHITECTURE_FILE, &arch)?;
    write_json(
        dir,
        THREATS_FILE,
        &serde_json::json!({ "version": SCHEMA_VERSION, "threats": ws.threats }),
    )?;
    write_json(
        dir,
        QAS_FILE,
        &serde_json::json!({ "version": SCHEMA_VERSION, "qas": ws.qas }),
    )?;
    write_json(
        dir,
        ADRS_FILE,
        &serde_json::json!({ "version": SCHEMA_VERSION, "adrs": ws.adrs }),
    )?;
    write_json(
        dir,
        CARAF_FILE,
        &serde_json::json!({ "version": SCHEMA_VERSION, "caraf": ws.caraf }),
    )?;
    write_json(
        dir,
        ASSETS_FILE,
        &serde_json::json!({ "version": SCHEMA_VERSION, "assets": ws.assets }),
    )?;
    Ok(())
}

fn write_json(dir: &Path, file: &str, value: &Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    text.push('\n');
    fs::write(dir.join(file), text)
}

fn read_json(root: &Path, file: &str, diags: &mut Vec<Diagnostic>) -> Option<Value> {
    let path = root.join(file);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            diags.push(
                Diagnostic::new(RuleCode::P1, format!("required file {file} is missing"))
                    .at(SourceLocation::file_level(file)),
            );
            return None;
        }
        Err(e) => {
            diags.push(
                Diagnostic::new(RuleCode::P1, format!("cannot read {file}: {e}"))
                    .at(SourceLocation::file_level(file)),
            );
            return None;
        }
    };
    match serde_json::from_str(&text) {
        Ok(v) => Some(v),
        Err(e) => {
            diags.push(
                Diagnostic::new(RuleCode::P2, format!("malformed document syntax: {e}"))
                    .at(SourceLocation::file_level(file)),
            );
            None
        }
    }
}

/// Checks the document envelope: a JSON object with `version: 1` and only the
/// allowed section keys. Returns the object for section extraction.
fn check_document<'v>(
    file: &str,
    value: &'v Value,
    sections: &[&str],
    diags: &mut Vec<Diagnostic>,
) -> Option<&'v serde_json::Map<String, Value>> {
    let obj = match value.as_object() {
        Some(o) => o,
        None => {
            diags.push(
                Diagnostic::new(RuleCode::P3, "document must be a JSON object")
                    .at(SourceLocation::file_level(file)),
            );
            return None;
        }
    };
    match obj.get("version").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => {
            diags.push(
                Diagnostic::new(
                    RuleCode::P3,
                    format!(
                        "unsupported version {other}: this loader reads version {SCHEMA_VERSION}"
                    ),
                )
                .at(SourceLocation::file_level(file)),
            );
            return None;
        }
        None => {
            diags.push(
                Diagnostic::new(RuleCode::P3, "missing or non-integer `version` field")
                    .at(SourceLocation::file_level(file)),
            );
            return None;
        }
    }
    for key in obj.keys() {
        if key != "version" && !sections.contains(&key.as_str()) {
            diags.push(
                Diagnostic::new(RuleCode::P3, format!("unknown field `{key}`"))
                    .at(SourceLocation::file_level(file)),
            );
        }
    }
    Some(obj)
}

fn section_items<'v>(
    file: &str,
    obj: &'v serde_json::Map<String, Value>,
    section: &str,
    diags: &mut Vec<Diagnostic>,
) -> &'v [Value] {
    match obj.get(section) {
        Some(Value::Array(items)) => items,
        Some(_) => {
            diags.push(
                Diagnostic::new(RuleCode::P3, format!("field `{section}` must be an array"))
                    .at(SourceLocation::file_level(file)),
            );
            &[]
        }
        None => {
            diags.push(
                Diagnostic::new(RuleCode::P3, format!("missing required field `{section}`"))
                    .at(SourceLocation::file_level(file)),
            );
            &[]
        }
    }
}

/// Deserializes one array element, turning serde errors into P3 diagnostics
/// that carry the offending field path.
fn parse_item<T: DeserializeOwned>(
    item: &Value,
    loc: &SourceLocation,
    diags: &mut Vec<Diagnostic>,
) -> Option<T> {
    match serde_path_to_error::deserialize::<_, T>(item) {
        Ok(v) => Some(v),
        Err(e) => {
            let path = e.path().to_string();
            let location = if path == "." {
                loc.clone()
            } else {
                loc.field(&path)
            };
            diags.push(Diagnostic::new(RuleCode::P3, e.inner().to_string()).at(location));
            None
        }
    }
}

fn parse_checked<T: DeserializeOwned>(
    value: &Value,
    loc: &SourceLocation,
    diags: &mut Vec<Diagnostic>,
    check: impl Fn(&T) -> Vec<crate::model::InvariantViolation>,
) -> Option<T> {
    let record = parse_item::<T>(value, loc, diags)?;
    let violations = check(&record);
    if violations.is_empty() {
        Some(record)
    } else {
        for v in violations {
            diags.push(Diagnostic::new(RuleCode::P3, v.message).at(loc.field(&v.field)));
        }
        None
    }
}

fn register(
    ns: Namespace,
    id: &str,
    loc: &SourceLocation,
    seen: &mut BTreeMap<(Namespace, String), SourceLocation>,
    diags: &mut Vec<Diagnostic>,
) {
    if let Some(first) = seen.get(&(ns, id.to_string())) {
        diags.push(
            Diagnostic::new(
                RuleCode::P4,
                format!("duplicate id {id} in namespace {ns}: already declared at {first}"),
            )
            .at(loc.clone())
            .with_related([id.to_string()]),
        );
    } else {
        seen.insert((ns, id.to_string()), loc.clone());
    }
}

#[allow(clippy::too_many_arguments)]
fn load_records<T: DeserializeOwned + LocalChecks>(
    root: &Path,
    file: &'static str,
    kind: RecordKind,
    ns: Namespace,
    out: &mut Vec<T>,
    id_of: impl Fn(&T) -> String,
    seen: &mut BTreeMap<(Namespace, String), SourceLocation>,
    diags: &mut Vec<Diagnostic>,
) {
    let Some(value) = read_json(root, file, diags) else {
        return;
    };
    let Some(obj) = check_document(file, &value, &[kind.section()], diags) else {
        return;
    };
    let items = section_items(file, obj, kind.section(), diags).to_vec();
    for (i, item) in items.iter().enumerate() {
        let loc = SourceLocation::item(file, kind.section(), i);
        if let Some(record) = parse_checked::<T>(item, &loc, diags, T::check) {
            register(ns, &id_of(&record), &loc, seen, diags);
            out.push(record);
        }
    }
}

/// Adapter so the generic loader can run each record type's local checks.
trait LocalChecks: Sized {
    fn check(&self) -> Vec<crate::model::InvariantViolation>;
}

impl LocalChecks for ThreatRecord {
    fn check(&self) -> Vec<crate::model::InvariantViolation> {
        Vec::new()
    }
}
impl LocalChecks for SecurityQas {
    fn check(&self) -> Vec<crate::model::InvariantViolation> {
        self.check_local()
    }
}
impl LocalChecks for AdrRecord {
    fn check(&self) -> Vec<crate::model::InvariantViolation> {
        self.check_local()
    }
}
impl LocalChecks for CarafRecord {
    fn check(&self) -> Vec<crate::model::InvariantViolation> {
        self.check_local()
    }
}
impl LocalChecks for CryptoAsset {
    fn check(&self) -> Vec<crate::model::InvariantViolation> {
        self.check_local()
    }
}

/// Best-effort extraction of the array index from a violation field path
/// like `flows[2].source`, so architecture diagnostics sort with their item.
fn item_index_of(field: &str) -> Option<usize> {
    let open = field.find('[')?;
    let close = field[open..].find(']')? + open;
    field[open + 1..close].parse().ok()
}
