//! The resolved traceability graph over all workspace records, the rule
//! catalog enforcing the traceability chain, and impact queries.
//!
//! The graph is immutable after build; validation and queries are pure and
//! deterministic, so the same workspace always yields byte-identical
//! diagnostics and reports.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::caraf::{self, MoscaResult};
use crate::diag::{sort_diagnostics, Diagnostic, RuleCode};
use crate::ingest::{Namespace, Workspace};
use crate::model::{derive_stride_tags, Agility, CryptoAsset, Flow, Identifier, StrideCategory};

/// Typed reference relationships tracked by the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    AssetElement,
    AssetFlow,
    AssetThreat,
    AssetQas,
    AssetAdr,
    AssetCaraf,
    QasThreat,
    AdrQas,
    AdrThreat,
    AdrCaraf,
    CarafAdr,
    CarafQas,
    /// threat -> element or flow, whichever the target id resolves to.
    ThreatTarget,
}

/// A node address: namespace plus id, borrowed from the workspace.
pub type NodeKey<'w> = (Namespace, &'w str);

/// The traceability graph. Holds resolvable edges in both directions plus
/// the R2 diagnostics for every reference that did not resolve; nothing is
/// silently dropped.
pub struct TraceGraph<'w> {
    ws: &'w Workspace,
    forward: BTreeMap<NodeKey<'w>, Vec<(EdgeKind, NodeKey<'w>)>>,
    reverse: BTreeMap<NodeKey<'w>, Vec<(EdgeKind, NodeKey<'w>)>>,
    dangling: Vec<Diagnostic>,
}

impl<'w> TraceGraph<'w> {
    pub fn workspace(&self) -> &'w Workspace {
        self.ws
    }

    /// R2 diagnostics collected while building: one per unresolved reference.
    pub fn dangling(&self) -> &[Diagnostic] {
        &self.dangling
    }

    pub fn forward_edges(&self, key: NodeKey<'w>) -> &[(EdgeKind, NodeKey<'w>)] {
        self.forward.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn reverse_edges(&self, key: NodeKey<'w>) -> &[(EdgeKind, NodeKey<'w>)] {
        self.reverse.get(&key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, ns: Namespace, id: &str) -> bool {
        self.declaration_index(ns, id).is_some()
    }

    /// Position of a record in its file's declaration order.
    pub fn declaration_index(&self, ns: Namespace, id: &str) -> Option<usize> {
        match ns {
            Namespace::Element => index_of(self.ws.architecture.elements.iter().map(|e| &e.id), id),
            Namespace::Flow => index_of(self.ws.architecture.flows.iter().map(|f| &f.id), id),
            Namespace::TrustBoundary => index_of(
                self.ws.architecture.trust_boundaries.iter().map(|t| &t.id),
                id,
            ),
            Namespace::Threat => index_of(self.ws.threats.iter().map(|t| &t.id), id),
            Namespace::Qas => index_of(self.ws.qas.iter().map(|q| &q.id), id),
            Namespace::Adr => index_of(self.ws.adrs.iter().map(|a| &a.id), id),
            Namespace::Caraf => index_of(self.ws.caraf.iter().map(|c| &c.id), id),
            Namespace::Asset => index_of(self.ws.assets.iter().map(|a| &a.id), id),
        }
    }

    /// STRIDE tags of an asset derived from its resolved threat references,
    /// in canonical order. Unresolved references (already reported as R2)
    /// are skipped here.
    pub fn derived_stride_tags(&self, asset: &CryptoAsset) -> Vec<StrideCategory> {
        let mut set = BTreeSet::new();
        for (kind, (ns, id)) in self.forward_edges((Namespace::Asset, asset.id.as_str())) {
            if *kind == EdgeKind::AssetThreat && *ns == Namespace::Threat {
                if let Some(t) = self.ws.threats.iter().find(|t| t.id.as_str() == *id) {
                    set.insert(t.category);
                }
            }
        }
        set.into_iter().collect()
    }

    /// Strict variant used once the graph validated clean: every threat
    /// reference must resolve.
    pub fn stride_tags_checked(
        &self,
        asset: &CryptoAsset,
    ) -> Result<Vec<StrideCategory>, crate::model::DanglingReference> {
        derive_stride_tags(asset, |id| self.ws.threats.iter().find(|t| &t.id == id))
    }
}

fn index_of<'a>(ids: impl Iterator<Item = &'a Identifier>, id: &str) -> Option<usize> {
    ids.enumerate()
        .find(|(_, candidate)| candidate.as_str() == id)
        .map(|(i, _)| i)
}

/// Builds the traceability graph. Every resolvable reference becomes a
/// forward edge plus its transpose; every unresolvable one becomes an R2
/// diagnostic retrievable from [`TraceGraph::dangling`].
pub fn build_graph(ws: &Workspace) -> TraceGraph<'_> {
    let mut g = TraceGraph {
        ws,
        forward: BTreeMap::new(),
        reverse: BTreeMap::new(),
        dangling: Vec::new(),
    };

    let elements: BTreeSet<&str> = ws
        .architecture
        .elements
        .iter()
        .map(|e| e.id.as_str())
        .collect();
    let flows: BTreeSet<&str> = ws
        .architecture
        .flows
        .iter()
        .map(|f| f.id.as_str())
        .collect();
    let threats: BTreeSet<&str> = ws.threats.iter().map(|t| t.id.as_str()).collect();
    let qas: BTreeSet<&str> = ws.qas.iter().map(|q| q.id.as_str()).collect();
    let adrs: BTreeSet<&str> = ws.adrs.iter().map(|a| a.id.as_str()).collect();
    let caraf: BTreeSet<&str> = ws.caraf.iter().map(|c| c.id.as_str()).collect();

    let exists = |ns: Namespace, id: &str| -> bool {
        match ns {
            Namespace::Element => elements.contains(id),
            Namespace::Flow => flows.contains(id),
            Namespace::Threat => threats.contains(id),
            Namespace::Qas => qas.contains(id),
            Namespace::Adr => adrs.contains(id),
            Namespace::Caraf => caraf.contains(id),
            _ => false,
        }
    };

    struct Builder<'w> {
        forward: BTreeMap<NodeKey<'w>, Vec<(EdgeKind, NodeKey<'w>)>>,
        reverse: BTreeMap<NodeKey<'w>, Vec<(EdgeKind, NodeKey<'w>)>>,
        dangling: Vec<Diagnostic>,
    }

    impl<'w> Builder<'w> {
        #[allow(clippy::too_many_arguments)]
        fn link(
            &mut self,
            ws: &'w Workspace,
            kind: EdgeKind,
            from: NodeKey<'w>,
            field: &str,
            to_ns: Namespace,
            to_id: &'w Identifier,
            resolved: bool,
            target_desc: &str,
        ) {
            if resolved {
                let to = (to_ns, to_id.as_str());
                self.forward.entry(from).or_default().push((kind, to));
                self.reverse.entry(to).or_default().push((kind, from));
            } else {
                let mut d = Diagnostic::new(
                    RuleCode::R2,
                    format!(
                        "{} {} field {field} references missing {target_desc} {to_id}",
                        from.0, from.1
                    ),
                )
                .with_related([to_id.as_str().to_string()]);
                if let Some(loc) = ws.location_of(from.0, from.1) {
                    d = d.at(loc.field(field));
                }
                self.dangling.push(d);
            }
        }
    }

    let mut b = Builder {
        forward: BTreeMap::new(),
        reverse: BTreeMap::new(),
        dangling: Vec::new(),
    };

    // Trust boundary membership is a reference too; a dangling member is R2.
    for tb in &ws.architecture.trust_boundaries {
        for member in &tb.members {
            if !elements.contains(member.as_str()) {
                let mut d = Diagnostic::new(
                    RuleCode::R2,
                    format!(
                        "trust_boundary {} field members references missing element {member}",
                        tb.id
                    ),
                )
                .with_related([member.as_str().to_string()]);
                if let Some(loc) = ws.location_of(Namespace::TrustBoundary, tb.id.as_str()) {
                    d = d.at(loc.field("members"));
                }
                b.dangling.push(d);
            }
        }
    }

    for t in &ws.threats {
        let from = (Namespace::Threat, t.id.as_str());
        // A threat targets an element or a flow; elements win when an id
        // exists in both namespaces.
        if elements.contains(t.target_ref.as_str()) {
            b.link(
                ws,
                EdgeKind::ThreatTarget,
                from,
                "target_ref",
                Namespace::Element,
                &t.target_ref,
                true,
                "element or flow",
            );
        } else if flows.contains(t.target_ref.as_str()) {
            b.link(
                ws,
                EdgeKind::ThreatTarget,
                from,
                "target_ref",
                Namespace::Flow,
                &t.target_ref,
                true,
                "element or flow",
            );
        } else {
            b.link(
                ws,
                EdgeKind::ThreatTarget,
                from,
                "target_ref",
                Namespace::Element,
                &t.target_ref,
                false,
                "element or flow",
            );
        }
    }

    for q in &ws.qas {
        let from = (Namespace::Qas, q.id.as_str());
        for r in &q.threat_refs {
            b.link(
                ws,
                EdgeKind::QasThreat,
                from,
                "threat_refs",
                Namespace::Threat,
                r,
                exists(Namespace::Threat, r.as_str()),
                "threat",
            );
        }
    }

    for a in &ws.adrs {
        let from = (Namespace::Adr, a.id.as_str());
        for r in &a.threat_refs {
            b.link(
                ws,
                EdgeKind::AdrThreat,
                from,
                "threat_refs",
                Namespace::Threat,
                r,
                exists(Namespace::Threat, r.as_str()),
                "threat",
            );
        }
        for r in &a.qas_refs {
            b.link(
                ws,
                EdgeKind::AdrQas,
                from,
                "qas_refs",
                Namespace::Qas,
                r,
                exists(Namespace::Qas, r.as_str()),
                "qas",
            );
        }
        for r in &a.caraf_refs {
            b.link(
                ws,
                EdgeKind::AdrCaraf,
                from,
                "caraf_refs",
                Namespace::Caraf,
                r,
                exists(Namespace::Caraf, r.as_str()),
                "caraf record",
            );
        }
    }

    for c in &ws.caraf {
        let from = (Namespace::Caraf, c.id.as_str());
        for r in &c.adr_refs {
            b.link(
                ws,
                EdgeKind::CarafAdr,
                from,
                "adr_refs",
                Namespace::Adr,
                r,
                exists(Namespace::Adr, r.as_str()),
                "adr",
            );
        }
        for r in &c.qas_refs {
            b.link(
                ws,
                EdgeKind::CarafQas,
                from,
                "qas_refs",
                Namespace::Qas,
                r,
                exists(Namespace::Qas, r.as_str()),
                "qas",
            );
        }
    }

    for asset in &ws.assets {
        let from = (Namespace::Asset, asset.id.as_str());
        for r in &asset.element_refs {
            b.link(
                ws,
                EdgeKind::AssetElement,
                from,
                "element_refs",
                Namespace::Element,
                r,
                exists(Namespace::Element, r.as_str()),
                "element",
            );
        }
        if let Some(r) = &asset.flow_ref {
            b.link(
                ws,
                EdgeKind::AssetFlow,
                from,
                "flow_ref",
                Namespace::Flow,
                r,
                exists(Namespace::Flow, r.as_str()),
                "flow",
            );
        }
        for r in &asset.threat_refs {
            b.link(
                ws,
                EdgeKind::AssetThreat,
                from,
                "threat_refs",
                Namespace::Threat,
                r,
                exists(Namespace::Threat, r.as_str()),
                "threat",
            );
        }
        for r in &asset.qas_refs {
            b.link(
                ws,
                EdgeKind::AssetQas,
                from,
                "qas_refs",
                Namespace::Qas,
                r,
                exists(Namespace::Qas, r.as_str()),
                "qas",
            );
        }
        for r in &asset.adr_refs {
            b.link(
                ws,
                EdgeKind::AssetAdr,
                from,
                "adr_refs",
                Namespace::Adr,
                r,
                exists(Namespace::Adr, r.as_str()),
                "adr",
            );
        }
        for r in &asset.caraf_refs {
            b.link(
                ws,
                EdgeKind::AssetCaraf,
                from,
                "caraf_refs",
                Namespace::Caraf,
                r,
                exists(Namespace::Caraf, r.as_str()),
                "caraf record",
            );
        }
    }

    g.forward = b.forward;
    g.reverse = b.reverse;
    g.dangling = b.dangling;
    sort_diagnostics(&mut g.dangling);
    g
}

/// Applies the full rule catalog. Total and pure: the same graph always
/// yields byte-identical diagnostics. R2 findings from the build phase are
/// included.
///
/// Rules: R1 unique ids per namespace; R2 references resolve; R3 asset
/// anchoring; R4 asset must reference a threat, a QAS, and an ADR (missing
/// CARAF is the W1 warning); R5 QAS refines a threat; R6 ADR responds to a
/// QAS; R7 CARAF assesses an ADR; R8 STRIDE categories well-formed; R9 flow
/// endpoints declared and termination labels matching the endpoints; W2
/// unrefined threat; W3 degenerate crypto horizon.
pub fn validate(graph: &TraceGraph<'_>) -> Vec<Diagnostic> {
    let ws = graph.ws;
    let mut diags = graph.dangling.to_vec();

    let mut check_unique = |ns: Namespace, ids: Vec<&str>| {
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for id in ids {
            *seen.entry(id).or_default() += 1;
        }
        for (id, count) in seen {
            if count > 1 {
                let mut d = Diagnostic::new(
                    RuleCode::R1,
                    format!("id {id} is declared {count} times in namespace {ns}"),
                )
                .with_related([id.to_string()]);
                if let Some(loc) = ws.location_of(ns, id) {
                    d = d.at(loc.clone());
                }
                diags.push(d);
            }
        }
    };
    check_unique(
        Namespace::Element,
        ws.architecture
            .elements
            .iter()
            .map(|e| e.id.as_str())
            .collect(),
    );
    check_unique(
        Namespace::Flow,
        ws.architecture
            .flows
            .iter()
            .map(|f| f.id.as_str())
            .collect(),
    );
    check_unique(
        Namespace::TrustBoundary,
        ws.architecture
            .trust_boundaries
            .iter()
            .map(|t| t.id.as_str())
            .collect(),
    );
    check_unique(
        Namespace::Threat,
        ws.threats.iter().map(|t| t.id.as_str()).collect(),
    );
    check_unique(
        Namespace::Qas,
        ws.qas.iter().map(|q| q.id.as_str()).collect(),
    );
    check_unique(
        Namespace::Adr,
        ws.adrs.iter().map(|a| a.id.as_str()).collect(),
    );
    check_unique(
        Namespace::Caraf,
        ws.caraf.iter().map(|c| c.id.as_str()).collect(),
    );
    check_unique(
        Namespace::Asset,
        ws.assets.iter().map(|a| a.id.as_str()).collect(),
    );

    let located = |ns: Namespace, id: &str, d: Diagnostic, field: Option<&str>| -> Diagnostic {
        match (ws.location_of(ns, id), field) {
            (Some(loc), Some(f)) => d.at(loc.field(f)),
            (Some(loc), None) => d.at(loc.clone()),
            (None, _) => d,
        }
    };

    for asset in &ws.assets {
        let id = asset.id.as_str();
        if asset.flow_ref.is_none() && asset.element_refs.is_empty() {
            diags.push(located(
                Namespace::Asset,
                id,
                Diagnostic::new(
                    RuleCode::R3,
                    format!("asset {id} is not anchored to any flow or element"),
                ),
                None,
            ));
        }
        for (field, empty, what) in [
            ("threat_refs", asset.threat_refs.is_empty(), "threat"),
            ("qas_refs", asset.qas_refs.is_empty(), "QAS"),
            ("adr_refs", asset.adr_refs.is_empty(), "ADR"),
        ] {
            if empty {
                diags.push(located(
                    Namespace::Asset,
                    id,
                    Diagnostic::new(
                        RuleCode::R4,
                        format!(
                            "asset {id} references no {what}: the traceability chain is broken"
                        ),
                    ),
                    Some(field),
                ));
            }
        }
        if asset.caraf_refs.is_empty() {
            diags.push(located(
                Namespace::Asset,
                id,
                Diagnostic::new(
                    RuleCode::W1,
                    format!("migration metadata absent: asset {id} references no CARAF record"),
                ),
                Some("caraf_refs"),
            ));
        }
    }

    for q in &ws.qas {
        if q.threat_refs.is_empty() {
            diags.push(located(
                Namespace::Qas,
                q.id.as_str(),
                Diagnostic::new(
                    RuleCode::R5,
                    format!(
                        "QAS {} references no threat: scenarios refine identified threats",
                        q.id
                    ),
                ),
                Some("threat_refs"),
            ));
        }
    }

    for a in &ws.adrs {
        if a.qas_refs.is_empty() {
            diags.push(located(
                Namespace::Adr,
                a.id.as_str(),
                Diagnostic::new(
                    RuleCode::R6,
                    format!(
                        "ADR {} references no QAS: decisions respond to scenarios",
                        a.id
                    ),
                ),
                Some("qas_refs"),
            ));
        }
    }

    for c in &ws.caraf {
        if c.adr_refs.is_empty() {
            diags.push(located(
                Namespace::Caraf,
                c.id.as_str(),
                Diagnostic::new(
                    RuleCode::R7,
                    format!("CARAF record {} references no ADR", c.id),
                ),
                Some("adr_refs"),
            ));
        }
        if c.mosca.crypto_horizon_z.is_zero() {
            diags.push(located(
                Namespace::Caraf,
                c.id.as_str(),
                Diagnostic::new(
                    RuleCode::W3,
                    format!(
                        "CARAF record {} has crypto horizon z = 0: degenerate Mosca input",
                        c.id
                    ),
                ),
                Some("mosca.crypto_horizon_z"),
            ));
        }
    }

    // R8: typed parsing already constrains categories to the six letters;
    // checked rather than assumed so the catalog stays total over
    // hand-constructed workspaces too.
    for t in &ws.threats {
        if !StrideCategory::ALL.contains(&t.category) {
            diags.push(located(
                Namespace::Threat,
                t.id.as_str(),
                Diagnostic::new(
                    RuleCode::R8,
                    format!("threat {} carries a malformed STRIDE category", t.id),
                ),
                Some("category"),
            ));
        }
    }

    // R9: flow endpoints declared, and asset termination labels naming the
    // endpoints of the asset's flow (case-insensitive on element id or name).
    for f in &ws.architecture.flows {
        for (field, endpoint) in [("source", &f.source), ("target", &f.target)] {
            if ws.architecture.element(endpoint).is_none() {
                diags.push(located(
                    Namespace::Flow,
                    f.id.as_str(),
                    Diagnostic::new(
                        RuleCode::R9,
                        format!("flow {} {field} {endpoint} is not a declared element", f.id),
                    ),
                    Some(field),
                ));
            }
        }
    }
    for asset in &ws.assets {
        let Some(flow_id) = &asset.flow_ref else {
            continue;
        };
        let Some(flow) = ws.architecture.flow(flow_id) else {
            continue;
        };
        let mut endpoints: Vec<&crate::model::Element> = Vec::new();
        endpoints.extend(ws.architecture.element(&flow.source));
        endpoints.extend(ws.architecture.element(&flow.target));
        for label in &asset.termination {
            let matched = endpoints.iter().any(|e| {
                label.eq_ignore_ascii_case(e.id.as_str()) || label.eq_ignore_ascii_case(&e.name)
            });
            if !matched {
                diags.push(located(
                    Namespace::Asset,
                    asset.id.as_str(),
                    Diagnostic::new(
                        RuleCode::R9,
                        format!(
                            "asset {} termination label {label:?} matches no endpoint of flow {}",
                            asset.id, flow.id
                        ),
                    ),
                    Some("termination"),
                ));
            }
        }
    }

    // W2: a threat nothing refines. QAS records are the refinement carriers.
    for t in &ws.threats {
        let refined = graph
            .reverse_edges((Namespace::Threat, t.id.as_str()))
            .iter()
            .any(|(kind, _)| *kind == EdgeKind::QasThreat);
        if !refined {
            diags.push(located(
                Namespace::Threat,
                t.id.as_str(),
                Diagnostic::new(
                    RuleCode::W2,
                    format!("threat {} is refined by no QAS", t.id),
                ),
                None,
            ));
        }
    }

    sort_diagnostics(&mut diags);
    diags
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImpactError {
    #[error("unknown asset id: {0}")]
    UnknownAsset(String),
}

/// A flow reached by the asset, rendered with its endpoint element names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowImpact {
    pub id: Identifier,
    /// "Source->Target" using element names.
    pub rendering: String,
    pub crosses_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementImpact {
    pub id: Identifier,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreatImpact {
    pub id: Identifier,
    pub category: StrideCategory,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdrImpact {
    pub id: Identifier,
    pub decision: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarafImpact {
    pub id: Identifier,
    pub agility: Agility,
    pub mosca: MoscaResult,
    pub mitigation_direction: String,
}

/// Everything a migration of one asset touches: the forward closure of the
/// asset's edges plus the assets co-impacted through a shared ADR or flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpactReport {
    pub asset_id: Identifier,
    pub asset_name: String,
    pub asset_version: Option<String>,
    pub flows: Vec<FlowImpact>,
    pub elements: Vec<ElementImpact>,
    pub threats: Vec<ThreatImpact>,
    pub qas_ids: Vec<Identifier>,
    pub adrs: Vec<AdrImpact>,
    pub caraf: Vec<CarafImpact>,
    pub co_impacted: Vec<Identifier>,
}

/// Renders "Source->Target" for a flow using element names, falling back to
/// the raw id for an endpoint that does not resolve.
pub fn render_flow(ws: &Workspace, flow: &Flow) -> String {
    let name_of = |id: &Identifier| -> String {
        ws.architecture
            .element(id)
            .map(|e| e.name.clone())
            .unwrap_or_else(|| id.as_str().to_string())
    };
    format!("{}->{}", name_of(&flow.source), name_of(&flow.target))
}

/// Enumerates the impact of replacing one asset. Lists exactly the resolved
/// forward closure, in declaration order; co-impact is symmetric and never
/// includes the asset itself.
pub fn query_impact(graph: &TraceGraph<'_>, asset_id: &str) -> Result<ImpactReport, ImpactError> {
    let ws = graph.ws;
    let asset = ws
        .assets
        .iter()
        .find(|a| a.id.as_str() == asset_id)
        .ok_or_else(|| ImpactError::UnknownAsset(asset_id.to_string()))?;

    let mut report = ImpactReport {
        asset_id: asset.id.clone(),
        asset_name: asset.name.clone(),
        asset_version: asset.version.clone(),
        flows: Vec::new(),
        elements: Vec::new(),
        threats: Vec::new(),
        qas_ids: Vec::new(),
        adrs: Vec::new(),
        caraf: Vec::new(),
        co_impacted: Vec::new(),
    };

    for (kind, (_, id)) in graph.forward_edges((Namespace::Asset, asset.id.as_str())) {
        match kind {
            EdgeKind::AssetFlow => {
                if let Some(flow) = ws.architecture.flows.iter().find(|f| f.id.as_str() == *id) {
                    report.flows.push(FlowImpact {
                        id: flow.id.clone(),
                        rendering: render_flow(ws, flow),
                        crosses_boundary: flow.crosses_boundary,
                    });
                }
            }
            EdgeKind::AssetElement => {
                if let Some(el) = ws
                    .architecture
                    .elements
                    .iter()
                    .find(|e| e.id.as_str() == *id)
                {
                    report.elements.push(ElementImpact {
                        id: el.id.clone(),
                        name: el.name.clone(),
                    });
                }
            }
            EdgeKind::AssetThreat => {
                if let Some(t) = ws.threats.iter().find(|t| t.id.as_str() == *id) {
                    report.threats.push(ThreatImpact {
                        id: t.id.clone(),
                        category: t.category,
                    });
                }
            }
            EdgeKind::AssetQas => {
                if let Some(q) = ws.qas.iter().find(|q| q.id.as_str() == *id) {
                    report.qas_ids.push(q.id.clone());
                }
            }
            EdgeKind::AssetAdr => {
                if let Some(a) = ws.adrs.iter().find(|a| a.id.as_str() == *id) {
                    report.adrs.push(AdrImpact {
                        id: a.id.clone(),
                        decision: a.decision.clone(),
                    });
                }
            }
            EdgeKind::AssetCaraf => {
                if let Some(c) = ws.caraf.iter().find(|c| c.id.as_str() == *id) {
                    report.caraf.push(CarafImpact {
                        id: c.id.clone(),
                        agility: c.agility,
                        mosca: caraf::compute_risk(c).mosca,
                        mitigation_direction: c.mitigation_direction.clone(),
                    });
                }
            }
            _ => {}
        }
    }

    let adr_set: BTreeSet<&str> = asset.adr_refs.iter().map(|a| a.as_str()).collect();
    for other in &ws.assets {
        if other.id == asset.id {
            continue;
        }
        let shares_flow = match (&asset.flow_ref, &other.flow_ref) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        let shares_adr = other.adr_refs.iter().any(|a| adr_set.contains(a.as_str()));
        if shares_flow || shares_adr {
            report.co_impacted.push(other.id.clone());
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::{has_errors, Severity};
    use crate::ingest::load_workspace;
    use proptest::prelude::*;
    use std::path::Path;

    fn fixture() -> Workspace {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/poc");
        load_workspace(&dir).expect("fixture loads")
    }

    #[test]
    fn fixture_graph_reaches_the_db_chain() {
        let ws = fixture();
        let graph = build_graph(&ws);
        let edges = graph.forward_edges((Namespace::Asset, "CBOM-DB-TLS-1"));
        let targets: Vec<&str> = edges.iter().map(|(_, (_, id))| *id).collect();
        assert!(targets.contains(&"QAS-DB-1"));
        assert!(targets.contains(&"ADR-DB-1"));
        assert!(targets.contains(&"CARAF-DB-1"));
        assert!(targets.contains(&"flow-svc-db"));
    }

    #[test]
    fn reverse_index_is_the_exact_transpose() {
        let ws = fixture();
        let graph = build_graph(&ws);
        let mut forward_pairs = Vec::new();
        for (from, edges) in &graph.forward {
            for (kind, to) in edges {
                forward_pairs.push((*kind, *from, *to));
            }
        }
        let mut reverse_pairs = Vec::new();
        for (to, edges) in &graph.reverse {
            for (kind, from) in edges {
                reverse_pairs.push((*kind, *from, *to));
            }
        }
        forward_pairs.sort_unstable();
        reverse_pairs.sort_unstable();
        assert_eq!(forward_pairs, reverse_pairs);
        assert!(!forward_pairs.is_empty());
    }

    #[test]
    fn empty_workspace_builds_an_empty_graph_with_no_diagnostics() {
        let ws = Workspace::default();
        let graph = build_graph(&ws);
        assert!(graph.dangling().is_empty());
        assert!(validate(&graph).is_empty());
    }

    #[test]
    fn fixture_validates_clean() {
        let ws = fixture();
        let graph = build_graph(&ws);
        let diags = validate(&graph);
        assert!(diags.is_empty(), "expected no findings, got: {:#?}", diags);
    }

    #[test]
    fn deleting_adr_db_1_reports_r2_from_both_referrers() {
        // Hand-enumerated referrers of ADR-DB-1 in the fixture: the asset
        // CBOM-DB-TLS-1 (adr_refs) and CARAF-DB-1 (adr_refs).
        let mut ws = fixture();
        ws.adrs.retain(|a| a.id.as_str() != "ADR-DB-1");
        let graph = build_graph(&ws);
        let r2: Vec<&Diagnostic> = graph
            .dangling()
            .iter()
            .filter(|d| d.code == RuleCode::R2)
            .collect();
        assert_eq!(r2.len(), 2);
        let messages: Vec<&str> = r2.iter().map(|d| d.message.as_str()).collect();
        assert!(messages.iter().any(|m| m.contains("asset CBOM-DB-TLS-1")));
        assert!(messages.iter().any(|m| m.contains("caraf CARAF-DB-1")));
    }

    #[test]
    fn duplicate_ids_in_a_hand_built_workspace_are_r1() {
        let mut ws = fixture();
        let copy = ws.assets[0].clone();
        ws.assets.push(copy);
        let graph = build_graph(&ws);
        let diags = validate(&graph);
        assert!(diags
            .iter()
            .any(|d| d.code == RuleCode::R1 && d.message.contains("CBOM-API-mTLS-1")));
    }

    #[test]
    fn asset_without_threats_is_r4() {
        let mut ws = fixture();
        ws.assets[0].threat_refs.clear();
        let graph = build_graph(&ws);
        let diags = validate(&graph);
        assert!(diags
            .iter()
            .any(|d| d.code == RuleCode::R4 && d.message.contains("CBOM-API-mTLS-1")));
    }

    #[test]
    fn qas_without_threats_is_r5() {
        let mut ws = fixture();
        ws.qas[1].threat_refs.clear();
        let graph = build_graph(&ws);
        let diags = validate(&graph);
        assert!(diags
            .iter()
            .any(|d| d.code == RuleCode::R5 && d.message.contains("QAS-DB-1")));
    }

    #[test]
    fn termination_label_matching_no_endpoint_is_r9() {
        let mut ws = fixture();
        ws.assets[1].termination = vec!["service".into(), "mainframe".into()];
        let graph = build_graph(&ws);
        let diags = validate(&graph);
        assert!(diags
            .iter()
            .any(|d| d.code == RuleCode::R9 && d.message.contains("mainframe")));
    }

    #[test]
    fn termination_labels_match_ids_or_names_case_insensitively() {
        let mut ws = fixture();
        // Element names work as labels too.
        ws.assets[1].termination = vec!["BACKENDSERVICE".into(), "Database".into()];
        let graph = build_graph(&ws);
        assert!(!validate(&graph).iter().any(|d| d.code == RuleCode::R9));
    }

    #[test]
    fn unrefined_threat_is_w2_warning() {
        let mut ws = fixture();
        ws.qas[0].threat_refs.retain(|r| r.as_str() != "THR-API-T");
        let graph = build_graph(&ws);
        let diags = validate(&graph);
        let w2: Vec<_> = diags.iter().filter(|d| d.code == RuleCode::W2).collect();
        assert_eq!(w2.len(), 1);
        assert_eq!(w2[0].severity, Severity::Warning);
        assert!(w2[0].message.contains("THR-API-T"));
        assert!(!has_errors(&diags));
    }

    #[test]
    fn zero_horizon_is_w3_warning() {
        let mut ws = fixture();
        ws.caraf[0].mosca.crypto_horizon_z = rust_decimal::Decimal::ZERO;
        let graph = build_graph(&ws);
        let diags = validate(&graph);
        assert!(diags
            .iter()
            .any(|d| d.code == RuleCode::W3 && d.message.contains("CARAF-API-1")));
    }

    #[test]
    fn validate_is_idempotent_and_deterministic() {
        let mut ws = fixture();
        ws.assets[2].qas_refs.clear();
        ws.adrs.remove(0);
        let graph = build_graph(&ws);
        let first = validate(&graph);
        let second = validate(&graph);
        assert_eq!(first, second);
        assert!(!first.is_empty());
    }

    #[test]
    fn impact_of_the_tls_asset_names_the_db_chain() {
        let ws = fixture();
        let graph = build_graph(&ws);
        let report = query_impact(&graph, "CBOM-DB-TLS-1").unwrap();
        assert_eq!(report.flows.len(), 1);
        assert_eq!(report.flows[0].rendering, "BackendService->Database");
        let categories: Vec<StrideCategory> = report.threats.iter().map(|t| t.category).collect();
        assert!(categories.contains(&StrideCategory::T));
        assert!(categories.contains(&StrideCategory::I));
        assert!(categories.contains(&StrideCategory::E));
        assert_eq!(report.qas_ids.len(), 1);
        assert_eq!(report.qas_ids[0], "QAS-DB-1");
        assert_eq!(report.adrs.len(), 1);
        assert_eq!(report.adrs[0].id, "ADR-DB-1");
        assert_eq!(report.caraf.len(), 1);
        assert_eq!(report.caraf[0].id, "CARAF-DB-1");
        assert!(report.caraf[0].mosca.action_required);
    }

    #[test]
    fn impact_with_no_caraf_refs_has_empty_caraf_section() {
        let mut ws = fixture();
        ws.assets[3].caraf_refs.clear();
        let graph = build_graph(&ws);
        let report = query_impact(&graph, "CBOM-DB-AES-1").unwrap();
        assert!(report.caraf.is_empty());
    }

    #[test]
    fn unknown_asset_is_a_not_found_error() {
        let ws = fixture();
        let graph = build_graph(&ws);
        let err = query_impact(&graph, "CBOM-NOPE-1").unwrap_err();
        assert_eq!(err, ImpactError::UnknownAsset("CBOM-NOPE-1".into()));
    }

    #[test]
    fn assets_sharing_a_flow_co_impact_each_other() {
        let mut ws = fixture();
        // Put a second asset on the svc-db flow.
        let mut twin = ws.assets[1].clone();
        twin.id = Identifier::new("CBOM-DB-TLS-2").unwrap();
        ws.assets.push(twin);
        let graph = build_graph(&ws);

        let a = query_impact(&graph, "CBOM-DB-TLS-1").unwrap();
        let b = query_impact(&graph, "CBOM-DB-TLS-2").unwrap();
        assert!(a.co_impacted.iter().any(|i| i == "CBOM-DB-TLS-2"));
        assert!(b.co_impacted.iter().any(|i| i == "CBOM-DB-TLS-1"));
        // Irreflexive.
        assert!(!a.co_impacted.iter().any(|i| i == "CBOM-DB-TLS-1"));
    }

    #[test]
    fn impact_lists_only_ids_present_in_the_graph() {
        let mut ws = fixture();
        // Dangle one reference; the report must skip it, not invent it.
        ws.assets[1]
            .qas_refs
            .push(Identifier::new("QAS-GONE").unwrap());
        let graph = build_graph(&ws);
        let report = query_impact(&graph, "CBOM-DB-TLS-1").unwrap();
        assert_eq!(report.qas_ids, vec![Identifier::new("QAS-DB-1").unwrap()]);
    }

    proptest! {
        /// Removing any single referenced record from the clean fixture
        /// breaks the chain with at least one error.
        #[test]
        fn single_deletion_always_produces_an_error(choice in 0usize..20) {
            let mut ws = fixture();
            // Build the list of deletable, referenced records.
            let threats = ws.threats.len();
            let qas = ws.qas.len();
            let adrs = ws.adrs.len();
            let caraf = ws.caraf.len();
            let total = threats + qas + adrs + caraf;
            let idx = choice % total;
            if idx < threats {
                ws.threats.remove(idx);
            } else if idx < threats + qas {
                ws.qas.remove(idx - threats);
            } else if idx < threats + qas + adrs {
                ws.adrs.remove(idx - threats - qas);
            } else {
                ws.caraf.remove(idx - threats - qas - adrs);
            }
            let graph = build_graph(&ws);
            let diags = validate(&graph);
            prop_assert!(has_errors(&diags), "deletion {idx} produced no error");
        }
    }
}
