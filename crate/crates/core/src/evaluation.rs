//! Cell-level repair quality against a gold standard, and rule and key
//! violation counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rules::EpkSet;
use crate::schema::{Cell, RawTable, Relation};

/// Precision, recall and F1 from raw counts. A ratio with a zero
/// denominator is 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Scores {
    pub repairs: u64,
    pub correct: u64,
    pub errors: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Scores {
    pub fn from_counts(repairs: u64, correct: u64, errors: u64) -> Self {
        let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(correct, repairs);
        let recall = ratio(correct, errors);
        Scores {
            repairs,
            correct,
            errors,
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision == 0.0 || recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttributeScores {
    pub attribute: String,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(flatten)]
    pub overall: Scores,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub per_attribute: Vec<AttributeScores>,
}

/// Scores the repaired table against gold, cell by cell.
///
/// `dirty` and `repaired` must have the same rows in the same order. Gold
/// rows are matched on the `ids` columns when given, otherwise by position;
/// dirty rows without a gold row are skipped. A repair is a cell where
/// repaired differs from dirty, an error one where dirty differs from gold.
/// Id columns and columns missing from gold are not scored.
pub fn score(dirty: &RawTable, repaired: &RawTable, gold: &RawTable, ids: &[String]) -> Result<Metrics> {
    if dirty.header != repaired.header || dirty.rows.len() != repaired.rows.len() {
        return Err(Error::Alignment("repaired table does not match the dirty table's shape".into()));
    }
    let id_cols = |t: &RawTable, which: &str| -> Result<Vec<usize>> {
        ids.iter()
            .map(|name| {
                t.column(name)
                    .ok_or_else(|| Error::Alignment(format!("{which} table has no id column `{name}`")))
            })
            .collect()
    };
    let pairs: Vec<(usize, usize)> = if ids.is_empty() {
        if gold.rows.len() != dirty.rows.len() {
            return Err(Error::Alignment(format!(
                "gold has {} rows and dirty has {}; pass id columns to align them",
                gold.rows.len(),
                dirty.rows.len()
            )));
        }
        (0..dirty.rows.len()).map(|i| (i, i)).collect()
    } else {
        let dirty_ids = id_cols(dirty, "dirty")?;
        let gold_ids = id_cols(gold, "gold")?;
        let mut by_id: HashMap<Vec<Option<&str>>, usize> = HashMap::new();
        for (i, row) in dirty.rows.iter().enumerate() {
            let id: Vec<Option<&str>> = dirty_ids.iter().map(|c| row[*c].as_deref()).collect();
            if by_id.insert(id, i).is_some() {
                return Err(Error::Alignment(format!("duplicate id in dirty row {}", i + 1)));
            }
        }
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::with_capacity(gold.rows.len());
        for (g, row) in gold.rows.iter().enumerate() {
            let id: Vec<Option<&str>> = gold_ids.iter().map(|c| row[*c].as_deref()).collect();
            let Some(&d) = by_id.get(&id) else {
                return Err(Error::Alignment(format!("gold row {} has no matching dirty row", g + 1)));
            };
            if !seen.insert(d) {
                return Err(Error::Alignment(format!("duplicate id in gold row {}", g + 1)));
            }
            pairs.push((d, g));
        }
        pairs
    };
    let columns: Vec<(usize, usize)> = dirty
        .header
        .iter()
        .enumerate()
        .filter(|(_, name)| !ids.contains(name))
        .filter_map(|(d, name)| gold.column(name).map(|g| (d, g)))
        .collect();
    let mut counts = vec![(0u64, 0u64, 0u64); columns.len()];
    for (d, g) in pairs {
        for (k, (dc, gc)) in columns.iter().enumerate() {
            let before = &dirty.rows[d][*dc];
            let after = &repaired.rows[d][*dc];
            let truth = &gold.rows[g][*gc];
            let entry = &mut counts[k];
            if after != before {
                entry.0 += 1;
                if after == truth {
                    entry.1 += 1;
                }
            }
            if before != truth {
                entry.2 += 1;
            }
        }
    }
    let per_attribute: Vec<AttributeScores> = columns
        .iter()
        .zip(&counts)
        .map(|((dc, _), (r, c, e))| AttributeScores {
            attribute: dirty.header[*dc].clone(),
            scores: Scores::from_counts(*r, *c, *e),
        })
        .collect();
    let total = counts
        .iter()
        .fold((0, 0, 0), |acc, (r, c, e)| (acc.0 + r, acc.1 + c, acc.2 + e));
    let n = per_attribute.len().max(1) as f64;
    let macro_precision = per_attribute.iter().map(|a| a.scores.precision).sum::<f64>() / n;
    let macro_recall = per_attribute.iter().map(|a| a.scores.recall).sum::<f64>() / n;
    let macro_f1 = per_attribute.iter().map(|a| a.scores.f1).sum::<f64>() / n;
    Ok(Metrics {
        overall: Scores::from_counts(total.0, total.1, total.2),
        macro_precision,
        macro_recall,
        macro_f1,
        per_attribute,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleViolations {
    pub rule: String,
    pub rows: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub rules: Vec<RuleViolations>,
    pub rule_violations: u64,
    /// Key classes holding two different non-null values on some determined
    /// attribute.
    pub fd_violations: u64,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.rule_violations == 0 && self.fd_violations == 0
    }
}

/// Rows failing each rule (a null on an involved attribute never fails),
/// and key classes that disagree on a determined attribute.
pub fn violation_report(rel: &Relation, epk: &EpkSet) -> ViolationReport {
    let schema = rel.schema();
    let rules: Vec<RuleViolations> = epk
        .rules
        .iter()
        .map(|r| RuleViolations {
            rule: r.display(schema).to_string(),
            rows: rel.rows().iter().filter(|row| r.fails(row)).count() as u64,
        })
        .collect();
    let rule_violations = rules.iter().map(|r| r.rows).sum();
    let mut seen: BTreeMap<Vec<Cell>, Vec<BTreeSet<Cell>>> = BTreeMap::new();
    for row in rel.rows() {
        let key: Vec<Cell> = epk.key.iter().map(|a| row[*a]).collect();
        let values = seen
            .entry(key)
            .or_insert_with(|| vec![BTreeSet::new(); epk.determined.len()]);
        for (set, a) in values.iter_mut().zip(&epk.determined) {
            if row[*a].is_some() {
                set.insert(row[*a]);
            }
        }
    }
    let fd_violations = seen
        .values()
        .filter(|sets| sets.iter().any(|s| s.len() > 1))
        .count() as u64;
    ViolationReport {
        rules,
        rule_violations,
        fd_violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{EditRule, ValueSet};
    use crate::schema::{AttributeSchema, Schema, Value};
    use std::sync::Arc;

    fn table(header: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|c| if c.is_empty() { None } else { Some(c.to_string()) })
                        .collect()
                })
                .collect(),
        }
    }

    /// 10 dirty cells, 8 repairs of which 6 restore the gold value.
    fn ten_eight_six() -> (RawTable, RawTable, RawTable) {
        let n = 12;
        let mut dirty = Vec::new();
        let mut repaired = Vec::new();
        let mut gold = Vec::new();
        for i in 0..n {
            let g = "ok".to_string();
            let d = if i < 10 { "bad".to_string() } else { g.clone() };
            let r = match i {
                0..=5 => g.clone(),
                6 | 7 => "other".to_string(),
                _ => d.clone(),
            };
            dirty.push(vec![Some(i.to_string()), Some(d)]);
            repaired.push(vec![Some(i.to_string()), Some(r)]);
            gold.push(vec![Some(i.to_string()), Some(g)]);
        }
        let h = vec!["id".to_string(), "a".to_string()];
        (
            RawTable { header: h.clone(), rows: dirty },
            RawTable { header: h.clone(), rows: repaired },
            RawTable { header: h, rows: gold },
        )
    }

    #[test]
    fn ten_errors_eight_repairs_six_correct() {
        let (d, r, g) = ten_eight_six();
        let m = score(&d, &r, &g, &["id".to_string()]).unwrap();
        assert_eq!((m.overall.errors, m.overall.repairs, m.overall.correct), (10, 8, 6));
        assert_eq!(m.overall.precision, 0.75);
        assert_eq!(m.overall.recall, 0.6);
        assert!((m.overall.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.macro_f1, m.overall.f1);
    }

    #[test]
    fn perfect_and_empty_repairs() {
        let d = table(&["a", "b"], &[&["x", "1"], &["y", "2"]]);
        let g = table(&["a", "b"], &[&["x", "3"], &["y", "2"]]);
        let m = score(&d, &g, &g, &[]).unwrap();
        assert_eq!((m.overall.precision, m.overall.recall, m.overall.f1), (1.0, 1.0, 1.0));
        let none = score(&d, &d, &g, &[]).unwrap();
        assert_eq!((none.overall.precision, none.overall.recall, none.overall.f1), (0.0, 0.0, 0.0));
        assert_eq!(none.macro_precision, 0.0);
    }

    #[test]
    fn misaligned_ids_are_rejected() {
        let d = table(&["id", "a"], &[&["1", "x"]]);
        let g = table(&["id", "a"], &[&["2", "x"]]);
        assert!(matches!(score(&d, &d, &g, &["id".into()]), Err(Error::Alignment(_))));
        let short = table(&["id", "a"], &[]);
        assert!(matches!(score(&d, &d, &short, &[]), Err(Error::Alignment(_))));
    }

    #[test]
    fn counts_rule_and_key_violations() {
        let s = Schema::new(vec![
            AttributeSchema::new("k", ["k1", "k2"], false),
            AttributeSchema::new("a", ["0", "1"], false),
            AttributeSchema::new("b", ["0", "1"], false),
        ])
        .unwrap();
        let one = || ValueSet::new(vec![Value(1)]);
        let rule = EditRule::new(&s, vec![(1, one()), (2, one())], 1).unwrap();
        let epk = EpkSet::new(&s, vec![0], vec![1], vec![rule]).unwrap();
        let c = |v: u32| Some(Value(v));
        let rows = vec![
            vec![c(0), c(1), c(1)],
            vec![c(0), c(1), c(0)],
            vec![c(0), c(0), c(1)],
            vec![c(1), None, c(1)],
            vec![c(1), c(1), c(0)],
        ];
        let rel = Relation::new(Arc::new(s), rows).unwrap();
        let report = violation_report(&rel, &epk);
        assert_eq!(report.rules[0].rows, 1);
        assert_eq!(report.fd_violations, 1);
        assert!(!report.is_clean());
    }
}
