//! Brute-force minimal repairs for small classes.
//!
//! Tries every shared assignment and, for each row, every completion of the
//! free attributes, checking the rules directly. Nothing from the search
//! is reused apart from the cost functions.

use crate::cost::{candidates, delta, Cost};
use crate::engine::{Bundle, ClassInput, RepairSet};
use crate::error::{Error, Result};
use crate::rules::EditRule;
use crate::schema::{AttrId, Cell, Schema, Tuple};

/// Default bound on the product of candidate counts.
pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;

fn assignments(schema: &Schema, attrs: &[AttrId]) -> Vec<Vec<Cell>> {
    let mut out: Vec<Vec<Cell>> = vec![Vec::new()];
    for &a in attrs {
        out = out
            .into_iter()
            .flat_map(|p| {
                candidates(schema, a).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

fn with(row: &[Cell], attrs: &[AttrId], values: &[Cell]) -> Tuple {
    let mut t = row.to_vec();
    for (a, v) in attrs.iter().zip(values) {
        t[*a] = *v;
    }
    t
}

/// Exact minimal repairs by enumeration. Fails with [`Error::OracleCap`]
/// when the candidate product exceeds `cap`.
pub fn brute_force_repairs(input: &ClassInput<'_>, rules: &[EditRule], cap: u128) -> Result<RepairSet> {
    let schema = input.schema;
    let size = input
        .shared
        .iter()
        .chain(input.free)
        .fold(1u128, |acc, a| acc.saturating_mul(schema.domain_len(*a) as u128 + 1));
    if size > cap {
        return Err(Error::OracleCap { size, cap });
    }
    if rules.iter().any(|r| r.is_contradiction()) {
        return Err(Error::Unsatisfiable);
    }
    let completions = assignments(schema, input.free);
    let mut best: Option<Cost> = None;
    let mut bundles = Vec::new();
    'shared: for t1 in assignments(schema, input.shared) {
        let mut total: Cost = 0;
        let mut rows = Vec::with_capacity(input.class.len());
        for (row, m) in input.class.rows.iter().zip(&input.class.multipliers) {
            let Some(c1) = delta(input.model, row, *m, &with(row, input.shared, &t1), input.shared) else {
                continue 'shared;
            };
            total += c1;
            let fixed = with(row, input.shared, &t1);
            let mut row_best: Option<Cost> = None;
            let mut options: Vec<Vec<Cell>> = Vec::new();
            for t2 in &completions {
                let candidate = with(&fixed, input.free, t2);
                if rules.iter().any(|r| r.fails(&candidate)) {
                    continue;
                }
                let Some(c2) = delta(input.model, row, *m, &candidate, input.free) else {
                    continue;
                };
                match row_best {
                    Some(b) if c2 > b => {}
                    Some(b) if c2 == b => options.push(t2.clone()),
                    _ => {
                        row_best = Some(c2);
                        options = vec![t2.clone()];
                    }
                }
            }
            let Some(rb) = row_best else {
                continue 'shared;
            };
            total += rb;
            rows.push(options);
        }
        if input.free.is_empty() {
            rows.clear();
        }
        match best {
            Some(b) if total > b => {}
            Some(b) if total == b => bundles.push(Bundle { shared: t1, rows }),
            _ => {
                best = Some(total);
                bundles = vec![Bundle { shared: t1, rows }];
            }
        }
    }
    let cost = best.ok_or(Error::Unsatisfiable)?;
    let mut set = RepairSet {
        cost,
        shared_attrs: input.shared.to_vec(),
        row_attrs: input.free.to_vec(),
        bundles,
    };
    set.normalize();
    Ok(set)
}
