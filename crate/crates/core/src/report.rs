//! The JSON report written next to a repaired relation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cost::Cost;
use crate::engine::RelationRepair;
use crate::evaluation::{Metrics, ViolationReport};
use crate::rules::EpkSet;
use crate::schema::{Cell, Schema};
use crate::sufficient::SufficientSet;

/// Settings of the run, echoed back.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: String,
    pub rules: String,
    pub cost: String,
    pub alpha: Cost,
    pub omega: Option<u32>,
    pub pref_dir: Option<String>,
    pub select: String,
    pub seed: u64,
    pub null_token: String,
    pub no_rules: bool,
    pub oracle_verify: bool,
    pub closed_domains: bool,
    pub rule_cap: usize,
    pub key: Vec<String>,
    pub determined: Vec<String>,
    pub free: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SufficientSetStats {
    pub user_rules: usize,
    pub rules: usize,
    pub implied: usize,
    pub independent_parts: usize,
}

impl SufficientSetStats {
    pub fn new(epk: &EpkSet, sigma: &SufficientSet, parts: usize) -> Self {
        let implied = sigma
            .rules()
            .iter()
            .filter(|r| !epk.rules.contains(r))
            .count();
        SufficientSetStats {
            user_rules: epk.rules.len(),
            rules: sigma.len(),
            implied,
            independent_parts: parts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChangeReport {
    /// 1-based data row.
    pub row: usize,
    pub attribute: String,
    pub from: Option<String>,
    pub to: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub key: Vec<Option<String>>,
    pub rows: usize,
    pub cost: Cost,
    pub alternatives: u128,
    pub chosen: BTreeMap<String, Option<String>>,
    pub changes: Vec<ChangeReport>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub classes: usize,
    pub cost: Cost,
    pub changed_cells: usize,
    pub fallback_classes: usize,
    pub unverified_classes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub sufficient_set_stats: SufficientSetStats,
    pub totals: Totals,
    pub per_class: Vec<ClassReport>,
    pub violations_before: ViolationReport,
    pub violations_after: ViolationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    pub wall_time: f64,
}

fn text(schema: &Schema, attr: usize, cell: Cell) -> Option<String> {
    schema.text(attr, cell).map(str::to_string)
}

pub fn class_reports(schema: &Schema, epk: &EpkSet, repair: &RelationRepair) -> Vec<ClassReport> {
    repair
        .classes
        .iter()
        .map(|c| ClassReport {
            key: epk
                .key
                .iter()
                .zip(&c.key)
                .map(|(a, v)| text(schema, *a, *v))
                .collect(),
            rows: c.rows.len(),
            cost: c.cost,
            alternatives: c.alternatives,
            chosen: c
                .chosen
                .iter()
                .map(|(a, v)| (schema.name(*a).to_string(), text(schema, *a, *v)))
                .collect(),
            changes: c
                .changes
                .iter()
                .map(|ch| ChangeReport {
                    row: ch.row + 1,
                    attribute: schema.name(ch.attr).to_string(),
                    from: text(schema, ch.attr, ch.from),
                    to: text(schema, ch.attr, ch.to),
                })
                .collect(),
            fallback: c.fallback,
            verified: c.verified,
        })
        .collect()
}

impl Totals {
    pub fn new(repair: &RelationRepair) -> Self {
        Totals {
            classes: repair.classes.len(),
            cost: repair.classes.iter().map(|c| c.cost).sum(),
            changed_cells: repair.classes.iter().map(|c| c.changes.len()).sum(),
            fallback_classes: repair.classes.iter().filter(|c| c.fallback).count(),
            unverified_classes: repair
                .classes
                .iter()
                .filter(|c| c.verified == Some(false))
                .count(),
        }
    }
}
