//! Human-readable analysis outputs: the asset inventory tables, CARAF
//! assessment sheets, impact reports, and prioritization plans.
//!
//! Rendering is pure: identical inputs give byte-identical output. Markdown
//! is the canonical format; the plain format renders the same data as
//! labeled lines. Risk values carry the currency-free unit tag "cost-units"
//! since workspace cost figures are not tied to a currency.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::caraf::{BudgetedPlan, Plan, PlanItem, RiskResult};
use crate::model::{join_stride_tags, CarafRecord, CryptoAsset, Money, StrideCategory};
use crate::trace::{ImpactReport, TraceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Plain,
}

/// A rendered document: a title plus the full body text (title included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedReport {
    pub format: ReportFormat,
    pub title: String,
    pub body: String,
}

/// Decimal rendering with trailing zeros stripped: multiplication widens the
/// scale (0.3 x 15000000 = 4500000.0), which would leak into reports.
fn dec(value: Money) -> String {
    value.normalize().to_string()
}

fn money(value: Money) -> String {
    format!("{} cost-units", dec(value))
}

fn asset_label(asset: &CryptoAsset) -> String {
    match &asset.version {
        Some(v) => format!("{} {}", asset.name, v),
        None => asset.name.clone(),
    }
}

/// Renders the two inventory tables: (a) assets with context, STRIDE tags,
/// and QAS/ADR references; (b) the CARAF-derived migration notes. Rows
/// follow asset declaration order.
pub fn render_asset_tables(graph: &TraceGraph<'_>, format: ReportFormat) -> RenderedReport {
    let ws = graph.workspace();
    let title = "Crypto asset inventory".to_string();

    struct Row {
        label: String,
        context: String,
        stride: String,
        refs: String,
        agility: String,
        future_proofing: String,
        key_risks: String,
    }

    let rows: Vec<Row> = ws
        .assets
        .iter()
        .map(|asset| {
            let stride = join_stride_tags(&graph.derived_stride_tags(asset));
            let qas = asset
                .qas_refs
                .iter()
                .map(|i| i.as_str())
                .collect::<Vec<_>>()
                .join(", ");
            let adr = asset
                .adr_refs
                .iter()
                .map(|i| i.as_str())
                .collect::<Vec<_>>()
                .join(", ");
            let refs = match (qas.is_empty(), adr.is_empty()) {
                (false, false) => format!("{qas}; {adr}"),
                (false, true) => qas,
                (true, false) => adr,
                (true, true) => "-".to_string(),
            };
            let caraf = asset
                .caraf_refs
                .iter()
                .find_map(|id| ws.caraf.iter().find(|c| &c.id == id));
            Row {
                label: asset_label(asset),
                context: asset.context_label.clone(),
                stride: if stride.is_empty() {
                    "-".into()
                } else {
                    stride
                },
                refs,
                agility: caraf.map(|c| c.agility.to_string()).unwrap_or("-".into()),
                future_proofing: caraf
                    .map(|c| c.future_proofing.clone())
                    .unwrap_or("-".into()),
                key_risks: caraf.map(|c| c.key_risks.clone()).unwrap_or("-".into()),
            }
        })
        .collect();

    let mut body = String::new();
    match format {
        ReportFormat::Markdown => {
            let _ = writeln!(body, "# {title}");
            body.push('\n');
            body.push_str("## Assets and traceability references\n\n");
            body.push_str("| Crypto asset | Context | STRIDE | Refs (QAS, ADR) |\n");
            body.push_str("| --- | --- | --- | --- |\n");
            for r in &rows {
                let _ = writeln!(
                    body,
                    "| {} | {} | {} | {} |",
                    r.label, r.context, r.stride, r.refs
                );
            }
            body.push('\n');
            body.push_str("## Migration notes\n\n");
            body.push_str("| Crypto asset | Agility | Future-proofing | Key risks |\n");
            body.push_str("| --- | --- | --- | --- |\n");
            for r in &rows {
                let _ = writeln!(
                    body,
                    "| {} | {} | {} | {} |",
                    r.label, r.agility, r.future_proofing, r.key_risks
                );
            }
        }
        ReportFormat::Plain => {
            let _ = writeln!(body, "{title}");
            body.push('\n');
            body.push_str("Assets and traceability references\n");
            for r in &rows {
                body.push('\n');
                let _ = writeln!(body, "Crypto asset: {}", r.label);
                let _ = writeln!(body, "Context: {}", r.context);
                let _ = writeln!(body, "STRIDE: {}", r.stride);
                let _ = writeln!(body, "Refs (QAS, ADR): {}", r.refs);
            }
            body.push('\n');
            body.push_str("Migration notes\n");
            for r in &rows {
                body.push('\n');
                let _ = writeln!(body, "Crypto asset: {}", r.label);
                let _ = writeln!(body, "Agility: {}", r.agility);
                let _ = writeln!(body, "Future-proofing: {}", r.future_proofing);
                let _ = writeln!(body, "Key risks: {}", r.key_risks);
            }
        }
    }

    RenderedReport {
        format,
        title,
        body,
    }
}

/// Renders one CARAF assessment sheet: Mosca inputs with margin and verdict,
/// the risk value, mitigation direction, and the cross-references recovered
/// through the record's ADRs.
pub fn render_caraf_sheet(
    graph: &TraceGraph<'_>,
    record: &CarafRecord,
    risk: &RiskResult,
    format: ReportFormat,
) -> RenderedReport {
    let ws = graph.workspace();
    let title = format!("CARAF assessment: {}", record.id);

    // STRIDE letters via the ADR -> threat closure.
    let mut categories: BTreeSet<StrideCategory> = BTreeSet::new();
    for adr_id in &record.adr_refs {
        if let Some(adr) = ws.adrs.iter().find(|a| &a.id == adr_id) {
            for threat_id in &adr.threat_refs {
                if let Some(t) = ws.threats.iter().find(|t| &t.id == threat_id) {
                    categories.insert(t.category);
                }
            }
        }
    }
    let stride = categories
        .iter()
        .map(|c| c.as_str())
        .collect::<Vec<_>>()
        .join(", ");
    let qas = record
        .qas_refs
        .iter()
        .map(|i| i.as_str())
        .collect::<Vec<_>>()
        .join(", ");
    let adrs = record
        .adr_refs
        .iter()
        .map(|i| i.as_str())
        .collect::<Vec<_>>()
        .join(", ");

    let verdict = if risk.mosca.action_required {
        "action required (harvest now, decrypt later)"
    } else {
        "no action required under current assumptions"
    };
    let y_drivers = if record.y_drivers.is_empty() {
        "(none)".to_string()
    } else {
        record.y_drivers.join("; ")
    };

    let mut body = String::new();
    match format {
        ReportFormat::Markdown => {
            let _ = writeln!(body, "# {title}");
        }
        ReportFormat::Plain => {
            let _ = writeln!(body, "{title}");
        }
    }
    body.push('\n');
    let _ = writeln!(body, "Protected asset: {}", record.protected_asset);
    let _ = writeln!(
        body,
        "Mosca parameters: X={}, Y={}, Z={} (years)",
        dec(risk.mosca.x),
        dec(risk.mosca.y),
        dec(risk.mosca.z)
    );
    let _ = writeln!(body, "Mosca margin: {} years", dec(risk.mosca.margin));
    let _ = writeln!(body, "Verdict: {verdict}");
    let _ = writeln!(body, "Y drivers: {y_drivers}");
    let _ = writeln!(body, "Threat realization T_r: {}", dec(risk.t_r));
    let _ = writeln!(body, "Cost: {}", money(risk.cost));
    let _ = writeln!(body, "Risk: {}", money(risk.risk));
    let _ = writeln!(
        body,
        "Mitigation direction: {}",
        record.mitigation_direction
    );
    if let Some(cost) = record.mitigation_cost {
        let _ = writeln!(body, "Mitigation cost: {}", money(cost));
    }
    let _ = writeln!(body, "Agility: {}", record.agility);
    if let Some(note) = &record.agility_note {
        let _ = writeln!(body, "Agility note: {note}");
    }
    let _ = writeln!(body, "Future-proofing: {}", record.future_proofing);
    let _ = writeln!(body, "Key risks: {}", record.key_risks);
    if let Some(note) = &record.correctness_note {
        let _ = writeln!(body, "Correctness note: {note}");
    }
    if let Some(note) = &record.availability_note {
        let _ = writeln!(body, "Availability note: {note}");
    }
    let _ = writeln!(
        body,
        "References: STRIDE: {stride}; QAS: {qas}; ADR: {adrs}"
    );

    RenderedReport {
        format,
        title,
        body,
    }
}

/// Renders all risk results as one table, in workspace declaration order.
pub fn render_risk_table(results: &[RiskResult], format: ReportFormat) -> RenderedReport {
    let title = "CARAF risk results".to_string();
    let mut body = String::new();
    match format {
        ReportFormat::Markdown => {
            let _ = writeln!(body, "# {title}");
            body.push('\n');
            body.push_str(
                "| CARAF record | Cost | T_r | Risk | Mosca margin | Action required |\n",
            );
            body.push_str("| --- | --- | --- | --- | --- | --- |\n");
            for r in results {
                let _ = writeln!(
                    body,
                    "| {} | {} | {} | {} | {} | {} |",
                    r.caraf_id,
                    money(r.cost),
                    dec(r.t_r),
                    money(r.risk),
                    dec(r.mosca.margin),
                    if r.mosca.action_required { "yes" } else { "no" }
                );
            }
        }
        ReportFormat::Plain => {
            let _ = writeln!(body, "{title}");
            for r in results {
                body.push('\n');
                let _ = writeln!(body, "CARAF record: {}", r.caraf_id);
                let _ = writeln!(body, "Cost: {}", money(r.cost));
                let _ = writeln!(body, "T_r: {}", dec(r.t_r));
                let _ = writeln!(body, "Risk: {}", money(r.risk));
                let _ = writeln!(body, "Mosca margin: {}", dec(r.mosca.margin));
                let _ = writeln!(
                    body,
                    "Action required: {}",
                    if r.mosca.action_required { "yes" } else { "no" }
                );
            }
        }
    }
    RenderedReport {
        format,
        title,
        body,
    }
}

/// Renders a prioritization plan: the pure ranking, or the budgeted
/// selection with spend and residual risk.
pub fn render_plan(plan: &Plan, format: ReportFormat) -> RenderedReport {
    let title = "Mitigation prioritization".to_string();
    let mut body = String::new();
    match format {
        ReportFormat::Markdown => {
            let _ = writeln!(body, "# {title}");
        }
        ReportFormat::Plain => {
            let _ = writeln!(body, "{title}");
        }
    }
    body.push('\n');

    let line = |body: &mut String, position: usize, item: &PlanItem| {
        let cost = item
            .mitigation_cost
            .map(money)
            .unwrap_or_else(|| "unknown mitigation cost".to_string());
        let mosca = if item.result.mosca.action_required {
            "action required"
        } else {
            "no action required"
        };
        let _ = writeln!(
            body,
            "{position}. {} risk {} (margin {}, {mosca}; mitigation cost {cost})",
            item.result.caraf_id,
            money(item.result.risk),
            dec(item.result.mosca.margin),
        );
    };

    match plan {
        Plan::Ranking(items) => {
            let _ = writeln!(body, "Ranking by risk (no budget):");
            if items.is_empty() {
                let _ = writeln!(body, "(empty plan)");
            }
            for (i, item) in items.iter().enumerate() {
                line(&mut body, i + 1, item);
            }
        }
        Plan::Budgeted(BudgetedPlan {
            budget,
            selected,
            skipped,
            unbudgetable,
            total_spent,
            selected_risk,
            residual_risk,
        }) => {
            let _ = writeln!(body, "Budget: {}", money(*budget));
            body.push('\n');
            let _ = writeln!(body, "Selected (greedy by risk density):");
            if selected.is_empty() {
                let _ = writeln!(body, "(nothing selected)");
            }
            for (i, item) in selected.iter().enumerate() {
                line(&mut body, i + 1, item);
            }
            if !skipped.is_empty() {
                body.push('\n');
                let _ = writeln!(body, "Skipped (over remaining budget):");
                for (i, item) in skipped.iter().enumerate() {
                    line(&mut body, i + 1, item);
                }
            }
            if !unbudgetable.is_empty() {
                body.push('\n');
                let _ = writeln!(body, "Unbudgetable (no mitigation cost declared):");
                for (i, item) in unbudgetable.iter().enumerate() {
                    line(&mut body, i + 1, item);
                }
            }
            body.push('\n');
            let _ = writeln!(
                body,
                "Total spent: {} of {}",
                money(*total_spent),
                money(*budget)
            );
            let _ = writeln!(body, "Selected risk: {}", money(*selected_risk));
            let _ = writeln!(body, "Residual risk: {}", money(*residual_risk));
        }
    }

    RenderedReport {
        format,
        title,
        body,
    }
}

/// Renders an impact report for one asset.
pub fn render_impact(report: &ImpactReport, format: ReportFormat) -> RenderedReport {
    let label = match &report.asset_version {
        Some(v) => format!("{} {}", report.asset_name, v),
        None => report.asset_name.clone(),
    };
    let title = format!("Impact: {} ({label})", report.asset_id);
    let mut body = String::new();
    match format {
        ReportFormat::Markdown => {
            let _ = writeln!(body, "# {title}");
        }
        ReportFormat::Plain => {
            let _ = writeln!(body, "{title}");
        }
    }
    body.push('\n');

    let join_or_none = |items: Vec<String>| -> String {
        if items.is_empty() {
            "(none)".to_string()
        } else {
            items.join("; ")
        }
    };

    let _ = writeln!(
        body,
        "Affected flows: {}",
        join_or_none(
            report
                .flows
                .iter()
                .map(|f| format!("{} ({})", f.rendering, f.id))
                .collect()
        )
    );
    let _ = writeln!(
        body,
        "Affected elements: {}",
        join_or_none(
            report
                .elements
                .iter()
                .map(|e| format!("{} ({})", e.name, e.id))
                .collect()
        )
    );
    let _ = writeln!(
        body,
        "Mitigated threats: {}",
        join_or_none(
            report
                .threats
                .iter()
                .map(|t| format!("{} ({})", t.id, t.category))
                .collect()
        )
    );
    let _ = writeln!(
        body,
        "Supporting QAS: {}",
        join_or_none(report.qas_ids.iter().map(|q| q.to_string()).collect())
    );
    if report.adrs.is_empty() {
        let _ = writeln!(body, "Justifying ADRs: (none)");
    } else {
        let _ = writeln!(body, "Justifying ADRs:");
        for adr in &report.adrs {
            let _ = writeln!(body, "- {}: {}", adr.id, adr.decision);
        }
    }
    if report.caraf.is_empty() {
        let _ = writeln!(body, "CARAF findings: (none)");
    } else {
        let _ = writeln!(body, "CARAF findings:");
        for c in &report.caraf {
            let mosca = if c.mosca.action_required {
                "action required"
            } else {
                "no action required"
            };
            let _ = writeln!(
                body,
                "- {}: agility {}; Mosca margin {} ({mosca}); {}",
                c.id,
                c.agility,
                dec(c.mosca.margin),
                c.mitigation_direction
            );
        }
    }
    let _ = writeln!(
        body,
        "Co-impacted assets: {}",
        join_or_none(report.co_impacted.iter().map(|a| a.to_string()).collect())
    );

    RenderedReport {
        format,
        title,
        body,
    }
}
