//! Diagnostics shared by the workspace loader and the graph validator.
//!
//! Every finding carries a rule code from the documented catalog: `P*` for
//! parse/schema problems, `R*` for traceability rules, `W*` for advisory
//! warnings. Diagnostics sort deterministically by (file, location, code).

use std::fmt;

/// Severity of a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// The rule catalog. Each code has a fixed severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleCode {
    /// Missing required workspace file.
    P1,
    /// Malformed document syntax.
    P2,
    /// Schema violation: unknown field or kind, wrong value type, local
    /// invariant failure.
    P3,
    /// Duplicate id within a namespace.
    P4,
    /// Unique ids per namespace (graph-level re-check of P4).
    R1,
    /// Dangling reference.
    R2,
    /// Asset not anchored to any flow or element.
    R3,
    /// Asset missing threat, QAS, or ADR references.
    R4,
    /// QAS without threat references.
    R5,
    /// ADR without QAS references.
    R6,
    /// CARAF record without ADR references.
    R7,
    /// STRIDE category not one of S, T, R, I, D, E.
    R8,
    /// Flow endpoints undeclared, or termination label matching no endpoint.
    R9,
    /// Asset without CARAF reference: migration metadata absent.
    W1,
    /// Threat refined by no QAS.
    W2,
    /// Crypto horizon Z = 0: degenerate Mosca input.
    W3,
}

impl RuleCode {
    pub fn severity(self) -> Severity {
        match self {
            RuleCode::W1 | RuleCode::W2 | RuleCode::W3 => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RuleCode::P1 => "P1",
            RuleCode::P2 => "P2",
            RuleCode::P3 => "P3",
            RuleCode::P4 => "P4",
            RuleCode::R1 => "R1",
            RuleCode::R2 => "R2",
            RuleCode::R3 => "R3",
            RuleCode::R4 => "R4",
            RuleCode::R5 => "R5",
            RuleCode::R6 => "R6",
            RuleCode::R7 => "R7",
            RuleCode::R8 => "R8",
            RuleCode::R9 => "R9",
            RuleCode::W1 => "W1",
            RuleCode::W2 => "W2",
            RuleCode::W3 => "W3",
        }
    }
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Points at the origin of a record or problem inside the workspace.
///
/// `item` is the index within the file's array section (None for file-level
/// problems, which sort before record-level ones); `path` is a human-readable
/// locator such as `assets[2].termination`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLocation {
    pub file: String,
    pub item: Option<usize>,
    pub path: String,
}

impl SourceLocation {
    pub fn file_level(file: impl Into<String>) -> Self {
        let file = file.into();
        SourceLocation {
            path: file.clone(),
            file,
            item: None,
        }
    }

    pub fn item(file: impl Into<String>, section: &str, index: usize) -> Self {
        SourceLocation {
            file: file.into(),
            item: Some(index),
            path: format!("{section}[{index}]"),
        }
    }

    /// Same location narrowed to a field, e.g. `threats[3].category`.
    pub fn field(&self, field: &str) -> Self {
        SourceLocation {
            file: self.file.clone(),
            item: self.item,
            path: format!("{}.{}", self.path, field),
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.item.is_some() || self.path != self.file {
            write!(f, "{}: {}", self.file, self.path)
        } else {
            f.write_str(&self.file)
        }
    }
}

/// A single parse or validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: RuleCode,
    pub message: String,
    pub location: Option<SourceLocation>,
    /// Ids of the records involved beyond the one at `location`.
    pub related: Vec<String>,
}

impl Diagnostic {
    pub fn new(code: RuleCode, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: code.severity(),
            code,
            message: message.into(),
            location: None,
            related: Vec::new(),
        }
    }

    pub fn at(mut self, location: SourceLocation) -> Self {
        self.location = Some(location);
        self
    }

    pub fn with_related(mut self, ids: impl IntoIterator<Item = String>) -> Self {
        self.related.extend(ids);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.severity, self.code)?;
        if let Some(loc) = &self.location {
            write!(f, " {loc}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Deterministic order: (file, location, rule code), then message.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| (&a.location, a.code, &a.message).cmp(&(&b.location, b.code, &b.message)));
}

/// True when any diagnostic in the list is an error.
pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn severity_follows_code() {
        assert_eq!(RuleCode::P3.severity(), Severity::Error);
        assert_eq!(RuleCode::R9.severity(), Severity::Error);
        assert_eq!(RuleCode::W2.severity(), Severity::Warning);
    }

    #[test]
    fn sort_is_by_file_location_code() {
        let mut diags = vec![
            Diagnostic::new(RuleCode::R4, "b").at(SourceLocation::item("b.json", "assets", 1)),
            Diagnostic::new(RuleCode::R2, "a").at(SourceLocation::item("b.json", "assets", 1)),
            Diagnostic::new(RuleCode::P1, "missing").at(SourceLocation::file_level("a.json")),
        ];
        sort_diagnostics(&mut diags);
        assert_eq!(diags[0].code, RuleCode::P1);
        assert_eq!(diags[1].code, RuleCode::R2);
        assert_eq!(diags[2].code, RuleCode::R4);
    }

    #[test]
    fn file_level_sorts_before_items() {
        let mut diags = vec![
            Diagnostic::new(RuleCode::P3, "x").at(SourceLocation::item("a.json", "threats", 0)),
            Diagnostic::new(RuleCode::P2, "y").at(SourceLocation::file_level("a.json")),
        ];
        sort_diagnostics(&mut diags);
        assert_eq!(diags[0].code, RuleCode::P2);
    }

    #[test]
    fn display_includes_code_and_location() {
        let d = Diagnostic::new(RuleCode::R2, "dangling reference").at(SourceLocation::item(
            "assets.json",
            "assets",
            2,
        )
        .field("adr_refs"));
        assert_eq!(
            d.to_string(),
            "error[R2] assets.json: assets[2].adr_refs: dangling reference"
        );
    }
}
