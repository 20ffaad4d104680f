//! Architecture-derived CBOMs.
//!
//! Turns an authored security-architecture workspace — architecture
//! baseline, STRIDE threats, security quality attribute scenarios, decision
//! records, CARAF risk records, and crypto-asset declarations — into a
//! validated traceability graph and a deterministic, annotated
//! CycloneDX-style CBOM, with migration-impact and risk-prioritization
//! queries on top.
//!
//! The pipeline: [`ingest`] loads the six workspace files, [`trace`] builds
//! the reference graph and applies the rule catalog, [`caraf`] computes
//! Mosca urgency and `risk = t_r x cost`, [`cbom`] assembles and emits the
//! annotated document (and imports it back), and [`report`] renders the
//! human-readable views. [`cli`] wires everything behind the `satam`
//! binary.
//!
//! All domain data is immutable after construction; validation, queries,
//! and rendering are pure, so identical inputs always produce byte-identical
//! outputs.

pub mod caraf;
pub mod cbom;
pub mod cli;
pub mod diag;
pub mod ingest;
pub mod model;
pub mod report;
pub mod trace;

pub use caraf::{compute_cost, compute_risk, mosca_check, prioritize, MoscaResult, RiskResult};
pub use cbom::{assemble, emit, import, CbomComponent, CbomDocument, EnvelopeOptions};
pub use diag::{Diagnostic, RuleCode, Severity, SourceLocation};
pub use ingest::{load_workspace, parse_record, save_workspace, Namespace, Workspace};
pub use model::{
    derive_stride_tags, AdrRecord, ArchitectureModel, CarafRecord, CryptoAsset, Identifier,
    SecurityQas, StrideCategory, ThreatRecord,
};
pub use report::{render_asset_tables, render_caraf_sheet, RenderedReport, ReportFormat};
pub use trace::{build_graph, query_impact, validate, ImpactReport, TraceGraph};
