//! CARAF risk arithmetic: the Mosca urgency check, cost models, the risk
//! score, and mitigation prioritization.
//!
//! All quantities are exact decimals, so `x + y = z` sits exactly on the
//! boundary and risk values reproduce byte-for-byte across runs.

use rust_decimal::Decimal;
use thiserror::Error;

use crate::model::{CarafRecord, CostModel, Identifier, Money, Years};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CarafError {
    #[error("Mosca parameters must be nonnegative: x={x}, y={y}, z={z}")]
    NegativeYears { x: Years, y: Years, z: Years },
    #[error("budget must be nonnegative, got {budget}")]
    NegativeBudget { budget: Money },
}

/// Outcome of the Mosca urgency test. Action is required exactly when the
/// margin `(x + y) - z` is strictly positive: data that must stay protected
/// longer than the remaining crypto horizon is already exposed to
/// harvest-now-decrypt-later collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoscaResult {
    pub x: Years,
    pub y: Years,
    pub z: Years,
    /// `(x + y) - z`, in years.
    pub margin: Years,
    pub action_required: bool,
}

/// Runs the Mosca test on data lifetime `x`, migration time `y`, and crypto
/// horizon `z`. The boundary `x + y = z` is not action-required.
pub fn mosca_check(x: Years, y: Years, z: Years) -> Result<MoscaResult, CarafError> {
    if x.is_sign_negative() || y.is_sign_negative() || z.is_sign_negative() {
        return Err(CarafError::NegativeYears { x, y, z });
    }
    Ok(mosca_unchecked(x, y, z))
}

fn mosca_unchecked(x: Years, y: Years, z: Years) -> MoscaResult {
    let margin = x + y - z;
    MoscaResult {
        x,
        y,
        z,
        margin,
        action_required: margin > Decimal::ZERO,
    }
}

/// Evaluates a cost model to a monetary amount.
pub fn compute_cost(model: &CostModel) -> Money {
    match model {
        CostModel::RecordsTimesLpp {
            affected_records,
            loss_per_record,
        } => Decimal::from(*affected_records) * *loss_per_record,
        CostModel::Fixed { amount } => *amount,
    }
}

/// The risk assessment of one CARAF record: `risk = t_r x cost`, exactly,
/// plus the record's Mosca outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiskResult {
    pub caraf_id: Identifier,
    pub cost: Money,
    pub t_r: Decimal,
    pub risk: Money,
    pub mosca: MoscaResult,
}

/// Combines the record's cost model, threat realization factor, and Mosca
/// parameters into a [`RiskResult`]. No hidden scaling: `risk == t_r * cost`.
pub fn compute_risk(record: &CarafRecord) -> RiskResult {
    let cost = compute_cost(&record.cost_model);
    let t_r = record.threat_realization_t_r;
    RiskResult {
        caraf_id: record.id.clone(),
        cost,
        t_r,
        risk: t_r * cost,
        mosca: mosca_unchecked(
            record.mosca.data_lifetime_x,
            record.mosca.migration_time_y,
            record.mosca.crypto_horizon_z,
        ),
    }
}

/// One prioritization input: a risk result plus the mitigation cost where the
/// record declared one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanItem {
    pub result: RiskResult,
    pub mitigation_cost: Option<Money>,
}

impl PlanItem {
    pub fn new(result: RiskResult, mitigation_cost: Option<Money>) -> Self {
        PlanItem {
            result,
            mitigation_cost,
        }
    }
}

/// A prioritization plan: a pure risk ranking when no budget is given, or a
/// greedy budget selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plan {
    /// Descending by risk; ties broken by descending Mosca margin, then
    /// ascending id. A permutation of the input.
    Ranking(Vec<PlanItem>),
    Budgeted(BudgetedPlan),
}

/// Greedy selection by risk density (risk per unit of mitigation cost) under
/// a budget. Records without a known mitigation cost cannot be scheduled and
/// are listed as unbudgetable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetedPlan {
    pub budget: Money,
    /// Chosen in selection order; spending never exceeds the budget.
    pub selected: Vec<PlanItem>,
    /// Budgetable items that did not fit the remaining budget.
    pub skipped: Vec<PlanItem>,
    /// Items with no mitigation_cost; reported separately, never selected.
    pub unbudgetable: Vec<PlanItem>,
    pub total_spent: Money,
    pub selected_risk: Money,
    /// Sum of all unselected risk, including unbudgetable items.
    pub residual_risk: Money,
}

/// Ranks mitigation work. Without a budget the result is a pure ordering of
/// the inputs; with a budget, a greedy pick by risk density that skips items
/// exceeding the remaining budget.
pub fn prioritize(items: Vec<PlanItem>, budget: Option<Money>) -> Result<Plan, CarafError> {
    match budget {
        None => {
            let mut ranked = items;
            ranked.sort_by(|a, b| rank_order(&a.result, &b.result));
            Ok(Plan::Ranking(ranked))
        }
        Some(budget) if budget.is_sign_negative() => Err(CarafError::NegativeBudget { budget }),
        Some(budget) => Ok(Plan::Budgeted(select_under_budget(items, budget))),
    }
}

fn rank_order(a: &RiskResult, b: &RiskResult) -> std::cmp::Ordering {
    b.risk
        .cmp(&a.risk)
        .then_with(|| b.mosca.margin.cmp(&a.mosca.margin))
        .then_with(|| a.caraf_id.cmp(&b.caraf_id))
}

fn select_under_budget(items: Vec<PlanItem>, budget: Money) -> BudgetedPlan {
    let total_risk: Money = items.iter().map(|i| i.result.risk).sum();
    let (mut budgetable, unbudgetable): (Vec<_>, Vec<_>) =
        items.into_iter().partition(|i| i.mitigation_cost.is_some());

    // Density compare without division: r1/c1 > r2/c2 <=> r1*c2 > r2*c1 for
    // nonnegative costs. A zero cost counts as infinite density.
    budgetable.sort_by(|a, b| {
        let (ra, ca) = (a.result.risk, a.mitigation_cost.unwrap());
        let (rb, cb) = (b.result.risk, b.mitigation_cost.unwrap());
        (rb * ca)
            .cmp(&(ra * cb))
            .then_with(|| rank_order(&a.result, &b.result))
    });

    let mut selected = Vec::new();
    let mut skipped = Vec::new();
    let mut remaining = budget;
    let mut total_spent = Decimal::ZERO;
    let mut selected_risk = Decimal::ZERO;
    for item in budgetable {
        let cost = item.mitigation_cost.unwrap();
        if cost <= remaining {
            remaining -= cost;
            total_spent += cost;
            selected_risk += item.result.risk;
            selected.push(item);
        } else {
            skipped.push(item);
        }
    }

    BudgetedPlan {
        budget,
        selected,
        skipped,
        unbudgetable,
        total_spent,
        selected_risk,
        residual_risk: total_risk - selected_risk,
    }
}
