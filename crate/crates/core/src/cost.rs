//! Change costs: per-cell cost functions, per-row reliability multipliers
//! and the class-level induced cost `c(v)`.
//!
//! All costs are non-negative integers. Changing a value into null is not
//! allowed (`None`); filling a null costs `alpha` whatever the target.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::rules::EditRule;
use crate::schema::{AttrId, Cell, Schema, Value};

pub type Cost = u64;

/// Asymmetric from→to cost table of one attribute. Pairs not listed fall
/// back to the model's `alpha`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreferenceTable {
    costs: HashMap<(Value, Value), Cost>,
}

impl PreferenceTable {
    /// Validates positive-definiteness: zero on the diagonal, positive
    /// everywhere else.
    pub fn new(attr: &str, entries: impl IntoIterator<Item = ((Value, Value), Cost)>) -> Result<Self> {
        let mut costs = HashMap::new();
        for ((from, to), cost) in entries {
            if from == to && cost != 0 {
                return Err(Error::Preference {
                    attr: attr.to_string(),
                    message: format!("diagonal entry for value #{} must be 0", from.0),
                });
            }
            if from != to && cost == 0 {
                return Err(Error::Preference {
                    attr: attr.to_string(),
                    message: format!("entry #{} -> #{} must be positive", from.0, to.0),
                });
            }
            costs.insert((from, to), cost);
        }
        Ok(PreferenceTable { costs })
    }

    pub fn get(&self, from: Value, to: Value) -> Option<Cost> {
        self.costs.get(&(from, to)).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostModel {
    /// `alpha` for every change.
    Constant { alpha: Cost },
    /// `alpha` times a per-row multiplier `(|R1 ∪ R2| - badness)^omega`.
    Reliability { alpha: Cost, omega: u32 },
    /// Per-attribute preference tables; other changes cost `alpha`.
    Preference {
        alpha: Cost,
        tables: BTreeMap<AttrId, PreferenceTable>,
    },
}

impl CostModel {
    pub fn constant(alpha: Cost) -> Self {
        CostModel::Constant { alpha }
    }

    pub fn alpha(&self) -> Cost {
        match self {
            CostModel::Constant { alpha }
            | CostModel::Reliability { alpha, .. }
            | CostModel::Preference { alpha, .. } => *alpha,
        }
    }

    /// Per-cell cost without the row multiplier. `None` marks a forbidden
    /// change (a value into null).
    pub fn cell_cost(&self, attr: AttrId, from: Cell, to: Cell) -> Option<Cost> {
        if from == to {
            return Some(0);
        }
        let to = to?;
        let alpha = self.alpha();
        let Some(from) = from else {
            return Some(alpha);
        };
        match self {
            CostModel::Preference { tables, .. } => Some(
                tables
                    .get(&attr)
                    .and_then(|t| t.get(from, to))
                    .unwrap_or(alpha),
            ),
            _ => Some(alpha),
        }
    }

    /// Multipliers of every row, computed once from the data as given.
    pub fn multipliers(&self, rows: &[Vec<Cell>], rules: &[EditRule], attrs: &[AttrId]) -> Vec<Cost> {
        match self {
            CostModel::Reliability { omega, .. } => rows
                .iter()
                .map(|r| row_multiplier(r, rules, attrs, *omega))
                .collect(),
            _ => vec![1; rows.len()],
        }
    }
}

/// `(|attrs| - |bad|)^omega`, clamped below at 1, where `bad` holds the
/// null attributes and the attributes involved in a rule the row fails.
pub fn row_multiplier(row: &[Cell], rules: &[EditRule], attrs: &[AttrId], omega: u32) -> Cost {
    let mut bad = vec![false; row.len()];
    for &a in attrs {
        if row[a].is_none() {
            bad[a] = true;
        }
    }
    for rule in rules.iter().filter(|r| r.fails(row)) {
        for a in rule.involves() {
            bad[a] = true;
        }
    }
    let good = attrs.iter().filter(|a| !bad[**a]).count() as Cost;
    good.saturating_pow(omega).max(1)
}

/// `Δ(row, candidate)` over `attrs`; `None` if some change is forbidden.
pub fn delta(model: &CostModel, row: &[Cell], multiplier: Cost, candidate: &[Cell], attrs: &[AttrId]) -> Option<Cost> {
    attrs.iter().try_fold(0 as Cost, |acc, &a| {
        let c = model.cell_cost(a, row[a], candidate[a])?;
        Some(acc.saturating_add(c.saturating_mul(multiplier)))
    })
}

/// Rows of one key class with their frozen multipliers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRows {
    pub rows: Vec<Vec<Cell>>,
    pub multipliers: Vec<Cost>,
}

impl ClassRows {
    pub fn new(rows: Vec<Vec<Cell>>, multipliers: Vec<Cost>) -> Self {
        assert_eq!(rows.len(), multipliers.len());
        ClassRows { rows, multipliers }
    }

    pub fn uniform(rows: Vec<Vec<Cell>>) -> Self {
        let multipliers = vec![1; rows.len()];
        ClassRows { rows, multipliers }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `β(k, t)`: summed row-level cost of replacing `attrs` of every row
    /// by `t`.
    pub fn beta(&self, model: &CostModel, candidate: &[Cell], attrs: &[AttrId]) -> Option<Cost> {
        self.rows
            .iter()
            .zip(&self.multipliers)
            .try_fold(0 as Cost, |acc, (row, m)| {
                Some(acc.saturating_add(delta(model, row, *m, candidate, attrs)?))
            })
    }
}

/// Candidate cells of an attribute: every domain value and null.
pub fn candidates(schema: &Schema, attr: AttrId) -> impl Iterator<Item = Cell> + '_ {
    std::iter::once(None).chain(schema.attr(attr).values().map(Some))
}

/// `c(v)` for every candidate with a finite cost, in candidate order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedClassCost {
    pub attr: AttrId,
    pub entries: Vec<(Cell, Cost)>,
}

impl InducedClassCost {
    pub fn get(&self, cell: Cell) -> Option<Cost> {
        self.entries.iter().find(|(c, _)| *c == cell).map(|(_, k)| *k)
    }

    pub fn min(&self) -> Cost {
        self.entries.iter().map(|(_, k)| *k).min().unwrap_or(0)
    }
}

pub fn class_cost(schema: &Schema, class: &ClassRows, attr: AttrId, model: &CostModel) -> InducedClassCost {
    if let CostModel::Preference { .. } = model {
        return class_cost_generic(schema, class, attr, model);
    }
    // every change costs alpha * multiplier, so c(v) = alpha * (M - M_v)
    let alpha = model.alpha();
    let domain = schema.domain_len(attr);
    let mut per_value: Vec<Cost> = vec![0; domain];
    let mut total: Cost = 0;
    let mut all_null = true;
    for (row, m) in class.rows.iter().zip(&class.multipliers) {
        total = total.saturating_add(*m);
        if let Some(v) = row[attr] {
            all_null = false;
            per_value[v.index()] = per_value[v.index()].saturating_add(*m);
        }
    }
    let mut entries = Vec::with_capacity(domain + 1);
    if all_null {
        entries.push((None, 0));
    }
    entries.extend(
        per_value
            .iter()
            .enumerate()
            .map(|(i, mv)| (Some(Value(i as u32)), alpha.saturating_mul(total - mv))),
    );
    InducedClassCost { attr, entries }
}

fn class_cost_generic(schema: &Schema, class: &ClassRows, attr: AttrId, model: &CostModel) -> InducedClassCost {
    class_cost_for(class, attr, model, candidates(schema, attr))
}

/// `c(v)` for the given candidates only, keeping those with a finite cost.
pub fn class_cost_for(
    class: &ClassRows,
    attr: AttrId,
    model: &CostModel,
    candidates: impl Iterator<Item = Cell>,
) -> InducedClassCost {
    let entries = candidates
        .filter_map(|v| {
            class
                .rows
                .iter()
                .zip(&class.multipliers)
                .try_fold(0 as Cost, |acc, (row, m)| {
                    let c = model.cell_cost(attr, row[attr], v)?;
                    Some(acc.saturating_add(c.saturating_mul(*m)))
                })
                .map(|c| (v, c))
        })
        .collect();
    InducedClassCost { attr, entries }
}

/// Values strictly costlier than `anchor`, with cost `c(v) - c(anchor)`,
/// ordered by (excess, value).
pub fn induced_model(base: &InducedClassCost, anchor: Cell) -> Vec<(Cell, Cost)> {
    let anchor_cost = base.get(anchor).expect("anchor must be a finite-cost candidate");
    let mut out: Vec<(Cell, Cost)> = base
        .entries
        .iter()
        .filter(|(_, c)| *c > anchor_cost)
        .map(|(v, c)| (*v, c - anchor_cost))
        .collect();
    out.sort_by_key(|(v, c)| (*c, *v));
    out
}
