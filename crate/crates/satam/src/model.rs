//! Domain types for the security-architecture workspace: the architecture
//! baseline, the four analysis artifacts (threats, QAS, ADRs, CARAF records),
//! and crypto assets. This module is the single source of truth for the
//! workspace schema and for local (single-record) invariants.
//!
//! All types are immutable value data after construction and safe to share
//! across threads.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact decimal quantity for costs and risk values. No binary floating
/// point anywhere in the arithmetic, so reports and golden files stay
/// byte-stable.
pub type Money = Decimal;

/// Exact decimal quantity for Mosca parameters (data lifetime, migration
/// time, crypto horizon), in years.
pub type Years = Decimal;

/// A record identifier: non-empty, `[A-Za-z0-9._-]+`, unique within its
/// record kind's namespace. The charset keeps ids safe as CBOM bom-refs and
/// as file names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(try_from = "String")]
pub struct Identifier(String);

impl Identifier {
    pub fn new(value: impl Into<String>) -> Result<Self, InvalidIdentifier> {
        let value = value.into();
        if value.is_empty() {
            return Err(InvalidIdentifier { value });
        }
        let ok = value
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
        if ok {
            Ok(Identifier(value))
        } else {
            Err(InvalidIdentifier { value })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier {value:?}: must be non-empty and match [A-Za-z0-9._-]+")]
pub struct InvalidIdentifier {
    pub value: String,
}

impl TryFrom<String> for Identifier {
    type Error = InvalidIdentifier;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Identifier::new(value)
    }
}

impl FromStr for Identifier {
    type Err = InvalidIdentifier;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identifier::new(s)
    }
}

impl Serialize for Identifier {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for Identifier {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Identifier {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// A violated local invariant, reported with the offending field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantViolation {
    pub field: String,
    pub message: String,
}

impl InvariantViolation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        InvariantViolation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Architecture baseline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Service,
    Gateway,
    Datastore,
    External,
    Client,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ElementKind::Service => "service",
            ElementKind::Gateway => "gateway",
            ElementKind::Datastore => "datastore",
            ElementKind::External => "external",
            ElementKind::Client => "client",
        };
        f.write_str(s)
    }
}

/// An architectural element: a component in the security-readable baseline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Element {
    pub id: Identifier,
    pub name: String,
    pub kind: ElementKind,
}

/// A directed data flow between two declared elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flow {
    pub id: Identifier,
    pub name: String,
    pub source: Identifier,
    pub target: Identifier,
    pub crosses_boundary: bool,
}

/// A trust boundary grouping declared elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrustBoundary {
    pub id: Identifier,
    pub name: String,
    #[serde(default)]
    pub members: Vec<Identifier>,
}

/// The security-readable architecture baseline: elements, data flows, and
/// trust boundaries. Architectural elements anchor every other record.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureModel {
    #[serde(default)]
    pub elements: Vec<Element>,
    #[serde(default)]
    pub flows: Vec<Flow>,
    #[serde(default)]
    pub trust_boundaries: Vec<TrustBoundary>,
}

impl ArchitectureModel {
    pub fn element(&self, id: &Identifier) -> Option<&Element> {
        self.elements.iter().find(|e| &e.id == id)
    }

    pub fn flow(&self, id: &Identifier) -> Option<&Flow> {
        self.flows.iter().find(|f| &f.id == id)
    }

    /// Flow endpoints and boundary members must resolve to declared elements.
    pub fn check_local(&self) -> Vec<InvariantViolation> {
        let ids: BTreeSet<&str> = self.elements.iter().map(|e| e.id.as_str()).collect();
        let mut out = Vec::new();
        for (i, flow) in self.flows.iter().enumerate() {
            if !ids.contains(flow.source.as_str()) {
                out.push(InvariantViolation::new(
                    &format!("flows[{i}].source"),
                    format!(
                        "flow {} source {} is not a declared element",
                        flow.id, flow.source
                    ),
                ));
            }
            if !ids.contains(flow.target.as_str()) {
                out.push(InvariantViolation::new(
                    &format!("flows[{i}].target"),
                    format!(
                        "flow {} target {} is not a declared element",
                        flow.id, flow.target
                    ),
                ));
            }
        }
        for (i, tb) in self.trust_boundaries.iter().enumerate() {
            for member in &tb.members {
                if !ids.contains(member.as_str()) {
                    out.push(InvariantViolation::new(
                        &format!("trust_boundaries[{i}].members"),
                        format!(
                            "trust boundary {} member {} is not a declared element",
                            tb.id, member
                        ),
                    ));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// STRIDE
// ---------------------------------------------------------------------------

/// STRIDE threat category. The derived `Ord` gives the canonical rendering
/// order S, T, R, I, D, E; every rendered tag list follows it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrideCategory {
    /// Spoofing
    S,
    /// Tampering
    T,
    /// Repudiation
    R,
    /// Information disclosure
    I,
    /// Denial of service
    D,
    /// Elevation of privilege
    E,
}

impl StrideCategory {
    pub const ALL: [StrideCategory; 6] = [
        StrideCategory::S,
        StrideCategory::T,
        StrideCategory::R,
        StrideCategory::I,
        StrideCategory::D,
        StrideCategory::E,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrideCategory::S => "S",
            StrideCategory::T => "T",
            StrideCategory::R => "R",
            StrideCategory::I => "I",
            StrideCategory::D => "D",
            StrideCategory::E => "E",
        }
    }
}

impl fmt::Display for StrideCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrideCategory {
    type Err = UnknownStrideTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" => Ok(StrideCategory::S),
            "T" => Ok(StrideCategory::T),
            "R" => Ok(StrideCategory::R),
            "I" => Ok(StrideCategory::I),
            "D" => Ok(StrideCategory::D),
            "E" => Ok(StrideCategory::E),
            _ => Err(UnknownStrideTag { tag: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown STRIDE tag {tag:?}: expected one of S, T, R, I, D, E")]
pub struct UnknownStrideTag {
    pub tag: String,
}

/// Joins categories with a bare comma, the wire syntax used for `satam.stride`
/// property values and table cells ("T,I,E").
pub fn join_stride_tags(tags: &[StrideCategory]) -> String {
    tags.iter()
        .map(|t| t.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// Analysis artifacts
// ---------------------------------------------------------------------------

/// A STRIDE threat against an architectural element or data flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreatRecord {
    pub id: Identifier,
    pub category: StrideCategory,
    /// Element id or flow id; resolved against the architecture baseline.
    pub target_ref: Identifier,
    pub description: String,
}

/// A security quality attribute scenario: a measurable refinement of one or
/// more identified threats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecurityQas {
    pub id: Identifier,
    pub source: String,
    pub stimulus: String,
    pub environment: String,
    pub artifact: String,
    pub response: String,
    #[serde(default)]
    pub response_measures: Vec<String>,
    /// Includes data-lifetime statements feeding the Mosca X parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<String>,
    #[serde(default)]
    pub threat_refs: Vec<Identifier>,
}

impl SecurityQas {
    pub fn check_local(&self) -> Vec<InvariantViolation> {
        let mut out = Vec::new();
        if self.response_measures.is_empty() {
            out.push(InvariantViolation::new(
                "response_measures",
                "response_measures must be non-empty",
            ));
        }
        if self.threat_refs.is_empty() {
            out.push(InvariantViolation::new(
                "threat_refs",
                "a QAS must reference at least one threat",
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdrStatus {
    Proposed,
    Accepted,
    Superseded,
    Deprecated,
}

impl fmt::Display for AdrStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AdrStatus::Proposed => "proposed",
            AdrStatus::Accepted => "accepted",
            AdrStatus::Superseded => "superseded",
            AdrStatus::Deprecated => "deprecated",
        };
        f.write_str(s)
    }
}

/// An architecture decision record: the carrier of cryptographic design
/// intent, written in response to security scenarios.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdrRecord {
    pub id: Identifier,
    pub title: String,
    pub status: AdrStatus,
    pub context: String,
    pub decision: String,
    pub rationale: String,
    pub consequences: String,
    #[serde(default)]
    pub threat_refs: Vec<Identifier>,
    #[serde(default)]
    pub qas_refs: Vec<Identifier>,
    #[serde(default)]
    pub caraf_refs: Vec<Identifier>,
}

impl AdrRecord {
    pub fn check_local(&self) -> Vec<InvariantViolation> {
        let mut out = Vec::new();
        if self.qas_refs.is_empty() {
            out.push(InvariantViolation::new(
                "qas_refs",
                "an ADR must reference at least one QAS (decisions respond to scenarios)",
            ));
        }
        out
    }
}

/// Mosca parameters in years: data lifetime X, migration time Y, crypto
/// horizon Z.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoscaParams {
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub data_lifetime_x: Years,
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub migration_time_y: Years,
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub crypto_horizon_z: Years,
}

/// Cost model for a CARAF record: either affected-records x loss-per-record
/// or a fixed amount.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "CostModelRaw")]
pub enum CostModel {
    RecordsTimesLpp {
        affected_records: u64,
        #[serde(with = "rust_decimal::serde::arbitrary_precision")]
        loss_per_record: Money,
    },
    Fixed {
        #[serde(with = "rust_decimal::serde::arbitrary_precision")]
        amount: Money,
    },
}

/// Strict deserialization shim: rejects unknown fields and mixed variants,
/// which the internally tagged derive would let through.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostModelRaw {
    kind: String,
    #[serde(default)]
    affected_records: Option<u64>,
    #[serde(default, with = "rust_decimal::serde::arbitrary_precision_option")]
    loss_per_record: Option<Money>,
    #[serde(default, with = "rust_decimal::serde::arbitrary_precision_option")]
    amount: Option<Money>,
}

impl TryFrom<CostModelRaw> for CostModel {
    type Error = String;

    fn try_from(raw: CostModelRaw) -> Result<Self, Self::Error> {
        match raw.kind.as_str() {
            "records_times_lpp" => {
                if raw.amount.is_some() {
                    return Err("cost model records_times_lpp does not take `amount`".into());
                }
                let affected_records = raw
                    .affected_records
                    .ok_or("cost model records_times_lpp requires `affected_records`")?;
                let loss_per_record = raw
                    .loss_per_record
                    .ok_or("cost model records_times_lpp requires `loss_per_record`")?;
                Ok(CostModel::RecordsTimesLpp {
                    affected_records,
                    loss_per_record,
                })
            }
            "fixed" => {
                if raw.affected_records.is_some() || raw.loss_per_record.is_some() {
                    return Err("cost model fixed takes only `amount`".into());
                }
                let amount = raw.amount.ok_or("cost model fixed requires `amount`")?;
                Ok(CostModel::Fixed { amount })
            }
            other => Err(format!(
                "unknown cost model kind {other:?}: expected records_times_lpp or fixed"
            )),
        }
    }
}

impl CostModel {
    fn check_local(&self) -> Vec<InvariantViolation> {
        let mut out = Vec::new();
        match self {
            CostModel::RecordsTimesLpp {
                loss_per_record, ..
            } => {
                if loss_per_record.is_sign_negative() {
                    out.push(InvariantViolation::new(
                        "cost_model.loss_per_record",
                        "loss_per_record must be nonnegative",
                    ));
                }
            }
            CostModel::Fixed { amount } => {
                if amount.is_sign_negative() {
                    out.push(InvariantViolation::new(
                        "cost_model.amount",
                        "amount must be nonnegative",
                    ));
                }
            }
        }
        out
    }
}

/// Crypto-agility grade of a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agility {
    Low,
    Medium,
    High,
}

impl fmt::Display for Agility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Agility::Low => "low",
            Agility::Medium => "medium",
            Agility::High => "high",
        };
        f.write_str(s)
    }
}

/// A CARAF migration-risk record assessing the decisions it references:
/// Mosca urgency inputs, threat realization factor, cost model, and
/// qualitative migration notes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarafRecord {
    pub id: Identifier,
    pub protected_asset: String,
    #[serde(default)]
    pub adr_refs: Vec<Identifier>,
    #[serde(default)]
    pub qas_refs: Vec<Identifier>,
    pub mosca: MoscaParams,
    /// What drives migration time Y: rollout constraints, certificate
    /// lifecycles, interoperability coupling.
    #[serde(default)]
    pub y_drivers: Vec<String>,
    /// Opaque threat realization factor in [0, 1]; user-supplied.
    #[serde(with = "rust_decimal::serde::arbitrary_precision")]
    pub threat_realization_t_r: Decimal,
    pub cost_model: CostModel,
    pub mitigation_direction: String,
    /// Estimated cost of carrying out the mitigation; absent means the
    /// record cannot take part in budgeted prioritization.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "rust_decimal::serde::arbitrary_precision_option"
    )]
    pub mitigation_cost: Option<Money>,
    pub agility: Agility,
    pub future_proofing: String,
    pub key_risks: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correctness_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agility_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub availability_note: Option<String>,
}

impl CarafRecord {
    pub fn check_local(&self) -> Vec<InvariantViolation> {
        let mut out = Vec::new();
        let t_r = self.threat_realization_t_r;
        if t_r.is_sign_negative() || t_r > Decimal::ONE {
            out.push(InvariantViolation::new(
                "threat_realization_t_r",
                format!("threat_realization_t_r must be within [0, 1], got {t_r}"),
            ));
        }
        for (field, value) in [
            ("mosca.data_lifetime_x", self.mosca.data_lifetime_x),
            ("mosca.migration_time_y", self.mosca.migration_time_y),
            ("mosca.crypto_horizon_z", self.mosca.crypto_horizon_z),
        ] {
            if value.is_sign_negative() {
                out.push(InvariantViolation::new(
                    field,
                    format!("Mosca years must be nonnegative, got {value}"),
                ));
            }
        }
        if self.adr_refs.is_empty() {
            out.push(InvariantViolation::new(
                "adr_refs",
                "a CARAF record must reference at least one ADR",
            ));
        }
        out.extend(self.cost_model.check_local());
        if let Some(cost) = self.mitigation_cost {
            if cost.is_sign_negative() {
                out.push(InvariantViolation::new(
                    "mitigation_cost",
                    "mitigation_cost must be nonnegative",
                ));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Crypto assets
// ---------------------------------------------------------------------------

/// A cryptographic mechanism anchored to the architecture, with reference
/// lists into the four analysis artifact kinds. The id doubles as the CBOM
/// bom-ref.
///
/// STRIDE tags are never stored on the asset; they are derived from
/// `threat_refs` so the threat records stay the single source of truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CryptoAsset {
    pub id: Identifier,
    pub name: String,
    /// Stored verbatim, uninterpreted (protocol or mechanism version).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub context_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_ref: Option<Identifier>,
    #[serde(default)]
    pub element_refs: Vec<Identifier>,
    /// Ordered endpoint labels of the protected channel, e.g. "service,db".
    #[serde(default)]
    pub termination: Vec<String>,
    #[serde(default)]
    pub threat_refs: Vec<Identifier>,
    #[serde(default)]
    pub qas_refs: Vec<Identifier>,
    #[serde(default)]
    pub adr_refs: Vec<Identifier>,
    #[serde(default)]
    pub caraf_refs: Vec<Identifier>,
}

impl CryptoAsset {
    pub fn check_local(&self) -> Vec<InvariantViolation> {
        let mut out = Vec::new();
        if self.flow_ref.is_none() && self.element_refs.is_empty() {
            out.push(InvariantViolation::new(
                "flow_ref",
                "an asset must be anchored to at least one flow or element",
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// A reference that does not resolve, carrying the dangling id.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unresolved threat reference: {id}")]
pub struct DanglingReference {
    pub id: Identifier,
}

/// Derives the STRIDE tags of an asset from its referenced threats:
/// deduplicated categories in canonical S, T, R, I, D, E order. The output
/// never depends on the order of `threat_refs`.
pub fn derive_stride_tags<'a>(
    asset: &CryptoAsset,
    resolve: impl Fn(&Identifier) -> Option<&'a ThreatRecord>,
) -> Result<Vec<StrideCategory>, DanglingReference> {
    let mut set = BTreeSet::new();
    for id in &asset.threat_refs {
        let threat = resolve(id).ok_or_else(|| DanglingReference { id: id.clone() })?;
        set.insert(threat.category);
    }
    Ok(set.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rust_decimal_macros::dec;

    fn threat(id: &str, category: StrideCategory) -> ThreatRecord {
        ThreatRecord {
            id: Identifier::new(id).unwrap(),
            category,
            target_ref: Identifier::new("flow-1").unwrap(),
            description: String::new(),
        }
    }

    fn asset_with_threats(ids: &[&str]) -> CryptoAsset {
        CryptoAsset {
            id: Identifier::new("A-1").unwrap(),
            name: "TLS".into(),
            version: None,
            context_label: "ctx".into(),
            flow_ref: Some(Identifier::new("flow-1").unwrap()),
            element_refs: vec![],
            termination: vec![],
            threat_refs: ids.iter().map(|i| Identifier::new(*i).unwrap()).collect(),
            qas_refs: vec![],
            adr_refs: vec![],
            caraf_refs: vec![],
        }
    }

    fn resolve_in<'a>(
        threats: &'a [ThreatRecord],
    ) -> impl Fn(&Identifier) -> Option<&'a ThreatRecord> + 'a {
        move |id| threats.iter().find(|t| &t.id == id)
    }

    #[test]
    fn identifier_rejects_empty_and_whitespace() {
        assert!(Identifier::new("").is_err());
        assert!(Identifier::new("a b").is_err());
        assert!(Identifier::new("QAS DB 1").is_err());
        assert!(Identifier::new("CBOM-DB-TLS-1").is_ok());
        assert!(Identifier::new("a.b_c-d9").is_ok());
    }

    #[test]
    fn stride_tags_for_tls_service_db_asset() {
        // Threats of categories {T, I, E} yield exactly [T, I, E].
        let threats = vec![
            threat("t1", StrideCategory::T),
            threat("t2", StrideCategory::I),
            threat("t3", StrideCategory::E),
        ];
        let asset = asset_with_threats(&["t1", "t2", "t3"]);
        let tags = derive_stride_tags(&asset, resolve_in(&threats)).unwrap();
        assert_eq!(
            tags,
            vec![StrideCategory::T, StrideCategory::I, StrideCategory::E]
        );
        assert_eq!(join_stride_tags(&tags), "T,I,E");
    }

    #[test]
    fn stride_tags_empty_for_no_threat_refs() {
        let asset = asset_with_threats(&[]);
        let tags = derive_stride_tags(&asset, |_| None).unwrap();
        assert!(tags.is_empty());
    }

    #[test]
    fn stride_tags_follow_canonical_order_not_file_order() {
        // Supplied in order E, S, T; rendered as S, T, E.
        let threats = vec![
            threat("e", StrideCategory::E),
            threat("s", StrideCategory::S),
            threat("t", StrideCategory::T),
        ];
        let asset = asset_with_threats(&["e", "s", "t"]);
        let tags = derive_stride_tags(&asset, resolve_in(&threats)).unwrap();
        assert_eq!(
            tags,
            vec![StrideCategory::S, StrideCategory::T, StrideCategory::E]
        );
    }

    #[test]
    fn stride_tags_error_carries_dangling_id() {
        let asset = asset_with_threats(&["missing-threat"]);
        let err = derive_stride_tags(&asset, |_| None).unwrap_err();
        assert_eq!(err.id.as_str(), "missing-threat");
    }

    #[test]
    fn qas_local_invariants() {
        let qas = SecurityQas {
            id: Identifier::new("QAS-1").unwrap(),
            source: String::new(),
            stimulus: String::new(),
            environment: String::new(),
            artifact: String::new(),
            response: String::new(),
            response_measures: vec![],
            assumptions: None,
            threat_refs: vec![],
        };
        let violations = qas.check_local();
        assert_eq!(violations.len(), 2);
        assert!(violations.iter().any(|v| v.field == "response_measures"));
        assert!(violations.iter().any(|v| v.field == "threat_refs"));
    }

    #[test]
    fn caraf_t_r_range_checked() {
        let mut record = CarafRecord {
            id: Identifier::new("C-1").unwrap(),
            protected_asset: String::new(),
            adr_refs: vec![Identifier::new("ADR-1").unwrap()],
            qas_refs: vec![],
            mosca: MoscaParams {
                data_lifetime_x: dec!(1),
                migration_time_y: dec!(1),
                crypto_horizon_z: dec!(10),
            },
            y_drivers: vec![],
            threat_realization_t_r: dec!(1.5),
            cost_model: CostModel::Fixed { amount: dec!(100) },
            mitigation_direction: String::new(),
            mitigation_cost: None,
            agility: Agility::Low,
            future_proofing: String::new(),
            key_risks: String::new(),
            correctness_note: None,
            agility_note: None,
            availability_note: None,
        };
        let violations = record.check_local();
        assert!(violations
            .iter()
            .any(|v| v.field == "threat_realization_t_r"));

        record.threat_realization_t_r = dec!(0.3);
        assert!(record.check_local().is_empty());

        record.mosca.migration_time_y = dec!(-1);
        assert!(record
            .check_local()
            .iter()
            .any(|v| v.field == "mosca.migration_time_y"));
    }

    #[test]
    fn cost_model_rejects_mixed_fields() {
        let err = serde_json::from_str::<CostModel>(
            r#"{"kind": "fixed", "amount": 5, "affected_records": 3}"#,
        );
        assert!(err.is_err());
        let err = serde_json::from_str::<CostModel>(r#"{"kind": "records_times_lpp"}"#);
        assert!(err.is_err());
        let ok: CostModel = serde_json::from_str(
            r#"{"kind": "records_times_lpp", "affected_records": 1000, "loss_per_record": 150}"#,
        )
        .unwrap();
        assert_eq!(
            ok,
            CostModel::RecordsTimesLpp {
                affected_records: 1000,
                loss_per_record: dec!(150),
            }
        );
    }

    #[test]
    fn asset_must_be_anchored() {
        let mut asset = asset_with_threats(&[]);
        asset.flow_ref = None;
        asset.element_refs.clear();
        assert_eq!(asset.check_local().len(), 1);
        asset.element_refs.push(Identifier::new("db").unwrap());
        assert!(asset.check_local().is_empty());
    }

    proptest! {
        /// Output is invariant under any permutation of threat_refs.
        #[test]
        fn stride_tags_order_independent(mut indices in proptest::collection::vec(0usize..6, 0..12)) {
            let threats: Vec<ThreatRecord> = StrideCategory::ALL
                .iter()
                .enumerate()
                .map(|(i, c)| threat(&format!("t{i}"), *c))
                .collect();
            let ids: Vec<String> = indices.iter().map(|i| format!("t{i}")).collect();
            let asset = asset_with_threats(&ids.iter().map(String::as_str).collect::<Vec<_>>());
            let tags = derive_stride_tags(&asset, resolve_in(&threats)).unwrap();

            indices.reverse();
            let ids_rev: Vec<String> = indices.iter().map(|i| format!("t{i}")).collect();
            let asset_rev =
                asset_with_threats(&ids_rev.iter().map(String::as_str).collect::<Vec<_>>());
            let tags_rev = derive_stride_tags(&asset_rev, resolve_in(&threats)).unwrap();

            prop_assert_eq!(&tags, &tags_rev);
            // No duplicates, never more than the six categories.
            prop_assert!(tags.len() <= 6);
            let mut deduped = tags.clone();
            deduped.dedup();
            prop_assert_eq!(deduped.len(), tags.len());
            // Canonical order is ascending in the enum ordering.
            prop_assert!(tags.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
