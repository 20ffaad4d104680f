//! CBOM assembly, deterministic emission, and import.
//!
//! The output is a CycloneDX-1.7-shaped JSON document with one
//! `cryptographic-asset` component per workspace asset, annotated through
//! `satam.*` component properties. The property vocabulary and its order are
//! the wire contract: emission is byte-deterministic, and import restores the
//! traceability reference lists for re-validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostic;
use crate::ingest::Namespace;
use crate::model::{join_stride_tags, Identifier, StrideCategory};
use crate::trace::{render_flow, validate, TraceGraph};

/// The closed `satam.*` property vocabulary, in emission order. A component's
/// properties are always a subsequence of this list (non-`satam.` properties
/// from imported documents are carried after it, untouched).
pub const PROPERTY_SCHEMA: [&str; 10] = [
    "satam.context.flow",
    "satam.context.termination",
    "satam.stride",
    "satam.securityQasRefs",
    "satam.adrRefs",
    "satam.caraf.correctness",
    "satam.caraf.agility",
    "satam.caraf.agilityNote",
    "satam.caraf.futureProofing",
    "satam.caraf.availability",
];

pub const COMPONENT_TYPE: &str = "cryptographic-asset";
pub const BOM_FORMAT: &str = "CycloneDX";
pub const SPEC_VERSION: &str = "1.7";

/// Envelope fields without semantic content get fixed placeholders so golden
/// files stay byte-stable; the CLI can override both.
pub const DEFAULT_SERIAL_NUMBER: &str = "urn:uuid:00000000-0000-0000-0000-000000000000";
pub const DEFAULT_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbomProperty {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbomComponent {
    #[serde(rename = "bom-ref")]
    pub bom_ref: Identifier,
    #[serde(rename = "type")]
    pub component_type: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default)]
    pub properties: Vec<CbomProperty>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbomMetadata {
    pub timestamp: String,
}

/// The CycloneDX-shaped output document. Component order equals asset
/// declaration order in the workspace; serialization is byte-deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CbomDocument {
    #[serde(rename = "bomFormat")]
    pub bom_format: String,
    #[serde(rename = "specVersion")]
    pub spec_version: String,
    #[serde(rename = "serialNumber")]
    pub serial_number: String,
    pub version: u32,
    pub metadata: CbomMetadata,
    pub components: Vec<CbomComponent>,
}

/// Overridable envelope values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeOptions {
    pub serial_number: String,
    pub timestamp: String,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            serial_number: DEFAULT_SERIAL_NUMBER.to_string(),
            timestamp: DEFAULT_TIMESTAMP.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssembleError {
    /// The graph still carries validation errors; an architecture-derived
    /// CBOM that violates the traceability chain would be meaningless.
    #[error("refusing to assemble: the workspace has {} validation error(s)", .0.len())]
    ValidationFailed(Vec<Diagnostic>),
}

/// Assembles the annotated CBOM from a validated graph: one component per
/// asset, properties in schema order, absent data omitted entirely.
///
/// Multi-value properties are comma-joined without spaces ("T,I,E"); the
/// reference lists are ordered by workspace declaration order. When an asset
/// references several CARAF records, the first by declaration order supplies
/// the `satam.caraf.*` values.
pub fn assemble(
    graph: &TraceGraph<'_>,
    envelope: &EnvelopeOptions,
) -> Result<CbomDocument, AssembleError> {
    let errors: Vec<Diagnostic> = validate(graph)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(AssembleError::ValidationFailed(errors));
    }

    let ws = graph.workspace();
    let mut components = Vec::with_capacity(ws.assets.len());
    for asset in &ws.assets {
        let mut properties = Vec::new();
        let mut push = |name: &str, value: String| {
            if !value.is_empty() {
                properties.push(CbomProperty {
                    name: name.to_string(),
                    value,
                });
            }
        };

        if let Some(flow_id) = &asset.flow_ref {
            if let Some(flow) = ws.architecture.flow(flow_id) {
                push("satam.context.flow", render_flow(ws, flow));
            }
        }
        push("satam.context.termination", asset.termination.join(","));

        // Validation passed, so every threat reference resolves.
        let tags = graph
            .stride_tags_checked(asset)
            .expect("threat references resolve in a validated graph");
        push("satam.stride", join_stride_tags(&tags));

        push(
            "satam.securityQasRefs",
            join_in_declaration_order(graph, Namespace::Qas, &asset.qas_refs),
        );
        push(
            "satam.adrRefs",
            join_in_declaration_order(graph, Namespace::Adr, &asset.adr_refs),
        );

        let first_caraf = asset
            .caraf_refs
            .iter()
            .filter_map(|id| {
                graph
                    .declaration_index(Namespace::Caraf, id.as_str())
                    .map(|i| &ws.caraf[i])
            })
            .min_by_key(|c| graph.declaration_index(Namespace::Caraf, c.id.as_str()));
        if let Some(caraf) = first_caraf {
            if let Some(note) = &caraf.correctness_note {
                push("satam.caraf.correctness", note.clone());
            }
            // The grade, qualified by what drives migration time when the
            // record names any drivers: "high (cert lifecycle coupling,
            // coordinated rollout)".
            let agility = if caraf.y_drivers.is_empty() {
                caraf.agility.to_string()
            } else {
                format!("{} ({})", caraf.agility, caraf.y_drivers.join(", "))
            };
            push("satam.caraf.agility", agility);
            if let Some(note) = &caraf.agility_note {
                push("satam.caraf.agilityNote", note.clone());
            }
            push("satam.caraf.futureProofing", caraf.future_proofing.clone());
            if let Some(note) = &caraf.availability_note {
                push("satam.caraf.availability", note.clone());
            }
        }

        components.push(CbomComponent {
            bom_ref: asset.id.clone(),
            component_type: COMPONENT_TYPE.to_string(),
            name: asset.name.clone(),
            version: asset.version.clone(),
            properties,
        });
    }

    Ok(CbomDocument {
        bom_format: BOM_FORMAT.to_string(),
        spec_version: SPEC_VERSION.to_string(),
        serial_number: envelope.serial_number.clone(),
        version: 1,
        metadata: CbomMetadata {
            timestamp: envelope.timestamp.clone(),
        },
        components,
    })
}

fn join_in_declaration_order(graph: &TraceGraph<'_>, ns: Namespace, refs: &[Identifier]) -> String {
    let mut ordered: Vec<&Identifier> = refs.iter().collect();
    ordered.sort_by_key(|id| graph.declaration_index(ns, id.as_str()));
    ordered
        .iter()
        .map(|id| id.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// Serializes a document to UTF-8 JSON. Key order is fixed by the schema.
/// Pretty mode uses two-space indentation and ends with a newline; non-pretty
/// output is minified with no trailing newline. Emission is a pure function
/// of the document.
pub fn emit(doc: &CbomDocument, pretty: bool) -> Vec<u8> {
    let mut text = if pretty {
        serde_json::to_string_pretty(doc).expect("CBOM serialization cannot fail")
    } else {
        serde_json::to_string(doc).expect("CBOM serialization cannot fail")
    };
    if pretty {
        text.push('\n');
    }
    text.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error("malformed CBOM document: {0}")]
    Syntax(String),
    #[error("component at index {index} is missing bom-ref")]
    MissingBomRef { index: usize },
    #[error("component {component} carries unknown satam property {name:?}")]
    UnknownSatamProperty { component: String, name: String },
    #[error("component {component} declares satam property {name:?} more than once")]
    DuplicateSatamProperty { component: String, name: String },
    #[error("component {component} property {name:?}: {message}")]
    BadPropertyValue {
        component: String,
        name: String,
        message: String,
    },
}

/// An asset reconstructed from an imported component: ids, names, and the
/// reference lists recovered by splitting the comma-joined properties.
/// Suitable for re-validation against a workspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetSkeleton {
    pub id: Identifier,
    pub name: String,
    pub version: Option<String>,
    /// The "Source->Target" context string, verbatim.
    pub flow: Option<String>,
    pub termination: Vec<String>,
    pub stride: Vec<StrideCategory>,
    pub qas_refs: Vec<Identifier>,
    pub adr_refs: Vec<Identifier>,
}

/// Result of importing a CBOM: the parsed document plus one skeleton per
/// component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportOutcome {
    pub document: CbomDocument,
    pub skeletons: Vec<AssetSkeleton>,
}

/// Parses an emitted CBOM back into a document and asset skeletons.
///
/// Unknown `satam.*` property names are errors (the vocabulary is closed);
/// properties outside the `satam.` prefix are preserved opaquely on the
/// document and ignored for skeletons.
pub fn import(bytes: &[u8]) -> Result<ImportOutcome, ImportError> {
    // Locate structural problems before the typed parse so the errors can
    // name the component.
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| ImportError::Syntax(e.to_string()))?;
    if let Some(components) = value.get("components").and_then(|c| c.as_array()) {
        for (index, component) in components.iter().enumerate() {
            if component.get("bom-ref").and_then(|v| v.as_str()).is_none() {
                return Err(ImportError::MissingBomRef { index });
            }
        }
    }
    let document: CbomDocument = serde_path_to_error::deserialize(&value)
        .map_err(|e| ImportError::Syntax(format!("{}: {}", e.path(), e.inner())))?;

    let mut skeletons = Vec::with_capacity(document.components.len());
    for component in &document.components {
        skeletons.push(skeleton_of(component)?);
    }
    Ok(ImportOutcome {
        document,
        skeletons,
    })
}

fn skeleton_of(component: &CbomComponent) -> Result<AssetSkeleton, ImportError> {
    let mut skeleton = AssetSkeleton {
        id: component.bom_ref.clone(),
        name: component.name.clone(),
        version: component.version.clone(),
        flow: None,
        termination: Vec::new(),
        stride: Vec::new(),
        qas_refs: Vec::new(),
        adr_refs: Vec::new(),
    };
    let component_id = component.bom_ref.as_str();
    let mut seen: Vec<&str> = Vec::new();
    for property in &component.properties {
        let name = property.name.as_str();
        if !name.starts_with("satam.") {
            continue; // foreign property, preserved opaquely on the document
        }
        if !PROPERTY_SCHEMA.contains(&name) {
            return Err(ImportError::UnknownSatamProperty {
                component: component_id.to_string(),
                name: name.to_string(),
            });
        }
        if seen.contains(&name) {
            return Err(ImportError::DuplicateSatamProperty {
                component: component_id.to_string(),
                name: name.to_string(),
            });
        }
        seen.push(name);

        let bad = |message: String| ImportError::BadPropertyValue {
            component: component_id.to_string(),
            name: name.to_string(),
            message,
        };
        match name {
            "satam.context.flow" => skeleton.flow = Some(property.value.clone()),
            "satam.context.termination" => {
                skeleton.termination = split_list(&property.value);
            }
            "satam.stride" => {
                for tag in split_list(&property.value) {
                    skeleton.stride.push(
                        tag.parse()
                            .map_err(|e: crate::model::UnknownStrideTag| bad(e.to_string()))?,
                    );
                }
            }
            "satam.securityQasRefs" => {
                skeleton.qas_refs = parse_id_list(&property.value).map_err(bad)?;
            }
            "satam.adrRefs" => {
                skeleton.adr_refs = parse_id_list(&property.value).map_err(bad)?;
            }
            _ => {} // satam.caraf.* notes carry no reference structure
        }
    }
    Ok(skeleton)
}

fn split_list(value: &str) -> Vec<String> {
    if value.is_empty() {
        Vec::new()
    } else {
        value.split(',').map(str::to_string).collect()
    }
}

fn parse_id_list(value: &str) -> Result<Vec<Identifier>, String> {
    split_list(value)
        .into_iter()
        .map(|s| Identifier::new(s).map_err(|e| e.to_string()))
        .collect()
}
