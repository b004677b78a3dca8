//! Per-class search for every minimal-cost repair, and the relation-level
//! driver that applies one of them to each key class.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::cost::{class_cost, class_cost_for, induced_model, ClassRows, Cost, CostModel, InducedClassCost};
use crate::covers::{failing_rules, minimal_covers_avoiding};
use crate::error::{Error, Result};
use crate::lcf::{first_batch, lcf_iterate, RankedDomain};
use crate::rules::{EditRule, EpkSet};
use crate::schema::{AttrId, Cell, Relation, Schema, Tuple, Value};
use crate::selection::{class_seed, Choice, Selector};
use crate::sufficient::{partition_independent, RuleBook, SufficientSet, DEFAULT_RULE_CAP};

/// Search-space reductions that do not change the result. Turning them off
/// makes the search exhaustive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pruning {
    /// Abandon value combinations costlier than the best repair so far.
    pub cost_bound: bool,
    /// Only consider new values that leave some rule the old value was in.
    pub necessity: bool,
}

impl Pruning {
    pub const ALL: Pruning = Pruning {
        cost_bound: true,
        necessity: true,
    };
    pub const NONE: Pruning = Pruning {
        cost_bound: false,
        necessity: false,
    };
}

impl Default for Pruning {
    fn default() -> Self {
        Pruning::ALL
    }
}

/// Repairs sharing one assignment of the key-determined attributes.
///
/// `rows[i]` lists the minimal completions of row `i` over the free
/// attributes; every combination of one option per row is a repair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bundle {
    pub shared: Vec<Cell>,
    pub rows: Vec<Vec<Vec<Cell>>>,
}

impl Bundle {
    /// Number of repairs represented, saturating.
    pub fn count(&self) -> u128 {
        self.rows
            .iter()
            .fold(1u128, |acc, opts| acc.saturating_mul(opts.len() as u128))
    }
}

/// One fully expanded repair of a class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Repair {
    pub shared: Vec<Cell>,
    pub rows: Vec<Vec<Cell>>,
}

/// Every minimal-cost repair of one class over one set of attributes.
///
/// `shared_attrs` take one value for the whole class; `row_attrs` are
/// completed row by row. With no row attributes, bundles carry no rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairSet {
    pub cost: Cost,
    pub shared_attrs: Vec<AttrId>,
    pub row_attrs: Vec<AttrId>,
    pub bundles: Vec<Bundle>,
}

impl RepairSet {
    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    /// Number of distinct repairs, saturating.
    pub fn count(&self) -> u128 {
        self.bundles
            .iter()
            .fold(0u128, |acc, b| acc.saturating_add(b.count()))
    }

    /// Sorts bundles and row options so equal sets compare equal.
    pub fn normalize(&mut self) {
        for b in &mut self.bundles {
            for opts in &mut b.rows {
                opts.sort();
                opts.dedup();
            }
        }
        self.bundles.sort();
        self.bundles.dedup();
    }

    pub fn expand(&self) -> Vec<Repair> {
        let mut out = Vec::new();
        for b in &self.bundles {
            let mut partial: Vec<Vec<Vec<Cell>>> = vec![Vec::new()];
            for opts in &b.rows {
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        opts.iter().map(move |o| {
                            let mut q = p.clone();
                            q.push(o.clone());
                            q
                        })
                    })
                    .collect();
            }
            out.extend(partial.into_iter().map(|rows| Repair {
                shared: b.shared.clone(),
                rows,
            }));
        }
        out
    }

    /// Writes a choice into the class rows.
    pub fn apply(&self, choice: &Choice, rows: &mut [Tuple]) {
        let bundle = &self.bundles[choice.bundle];
        for row in rows.iter_mut() {
            for (a, v) in self.shared_attrs.iter().zip(&bundle.shared) {
                row[*a] = *v;
            }
        }
        for (i, opt) in choice.options.iter().enumerate() {
            for (a, v) in self.row_attrs.iter().zip(&bundle.rows[i][*opt]) {
                rows[i][*a] = *v;
            }
        }
    }
}

/// One class and the attribute split to repair it over.
#[derive(Clone, Copy)]
pub struct ClassInput<'a> {
    pub schema: &'a Schema,
    pub class: &'a ClassRows,
    /// Attributes that take one value per class.
    pub shared: &'a [AttrId],
    /// Attributes repaired row by row.
    pub free: &'a [AttrId],
    pub model: &'a CostModel,
}

/// Minimal-cost repairs of a single tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleRepairs {
    pub cost: Cost,
    /// Full-width repaired tuples, sorted.
    pub tuples: Vec<Tuple>,
}

struct Search<'a> {
    rules: &'a [EditRule],
    alts: Vec<Option<RankedDomain>>,
    pruning: Pruning,
    limit: Option<Cost>,
    best: Option<Cost>,
    found: BTreeSet<Tuple>,
}

impl<'a> Search<'a> {
    fn new(rules: &'a [EditRule], width: usize, pruning: Pruning, limit: Option<Cost>) -> Self {
        Search {
            rules,
            alts: vec![None; width],
            pruning,
            limit,
            best: None,
            found: BTreeSet::new(),
        }
    }

    fn bound(&self) -> Option<Cost> {
        if !self.pruning.cost_bound {
            return None;
        }
        match (self.best, self.limit) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn offer(&mut self, tuple: &[Cell], cost: Cost) {
        if self.limit.is_some_and(|l| cost > l) {
            return;
        }
        match self.best {
            Some(b) if cost > b => {}
            Some(b) if cost == b => {
                self.found.insert(tuple.to_vec());
            }
            _ => {
                self.best = Some(cost);
                self.found.clear();
                self.found.insert(tuple.to_vec());
            }
        }
    }

    /// Depth-first over minimal covers of the failing rules; each attribute
    /// changes at most once along a path.
    fn explore(&mut self, tuple: &mut Tuple, spent: Cost, frozen: &mut [bool]) {
        let failing = failing_rules(tuple, self.rules);
        if failing.is_empty() {
            self.offer(tuple, spent);
            return;
        }
        let covers = minimal_covers_avoiding(&failing, frozen);
        for cover in covers {
            let domains: Vec<RankedDomain> = cover
                .iter()
                .map(|a| self.alts[*a].clone().expect("unfrozen attribute without alternatives"))
                .collect();
            let saved: Vec<Cell> = cover.iter().map(|a| tuple[*a]).collect();
            for a in &cover {
                frozen[*a] = true;
            }
            for combo in lcf_iterate(&domains) {
                let cost = spent.saturating_add(combo.beta);
                if self.bound().is_some_and(|b| cost > b) {
                    break;
                }
                for (a, v) in cover.iter().zip(combo.values(&domains)) {
                    tuple[*a] = v;
                }
                self.explore(tuple, cost, frozen);
            }
            for (a, v) in cover.iter().zip(saved) {
                tuple[*a] = v;
                frozen[*a] = false;
            }
        }
    }
}

/// Keeps `v` only if some rule holds the current value but not `v`;
/// otherwise reverting to the current value would be a cheaper repair.
fn necessary(rules: &[EditRule], attr: AttrId, cur: Value, v: Cell) -> bool {
    rules.iter().any(|r| {
        r.component(attr)
            .is_some_and(|set| set.contains(cur) && !matches!(v, Some(x) if set.contains(x)))
    })
}

fn alternatives(
    rules: &[EditRule],
    attr: AttrId,
    current: Cell,
    entries: Vec<(Cell, Cost)>,
    pruning: Pruning,
) -> RankedDomain {
    // a null never fails a rule, so filling it is never needed
    let Some(cur) = current else {
        return RankedDomain::new(attr, Vec::new());
    };
    let kept = entries
        .into_iter()
        .filter(|(v, _)| *v != current)
        .filter(|(v, _)| !pruning.necessity || necessary(rules, attr, cur, *v))
        .collect();
    RankedDomain::new(attr, kept)
}

/// Every minimal-cost repair of `row` that changes only `attrs`, each
/// change weighted by `multiplier`. `None` when no repair exists within
/// `limit`.
///
/// Null cells are kept, so `rules` must be the sufficient set matching the
/// row's nulls (see [`RuleBook::for_tuple`]).
#[allow(clippy::too_many_arguments)]
pub fn repair_tuple(
    schema: &Schema,
    row: &[Cell],
    rules: &[EditRule],
    attrs: &[AttrId],
    model: &CostModel,
    multiplier: Cost,
    pruning: Pruning,
    limit: Option<Cost>,
) -> Option<TupleRepairs> {
    let alts: Vec<(AttrId, RankedDomain)> = attrs
        .iter()
        .map(|&a| (a, row_alternatives(schema, row, a, rules, model, multiplier, pruning)))
        .collect();
    search_row(row, rules, &alts, pruning, limit)
}

fn row_alternatives(
    schema: &Schema,
    row: &[Cell],
    attr: AttrId,
    rules: &[EditRule],
    model: &CostModel,
    multiplier: Cost,
    pruning: Pruning,
) -> RankedDomain {
    if !rules.iter().any(|r| r.involves_attr(attr)) {
        return RankedDomain::new(attr, Vec::new());
    }
    let entries = crate::cost::candidates(schema, attr)
        .filter_map(|v| {
            model
                .cell_cost(attr, row[attr], v)
                .map(|c| (v, c.saturating_mul(multiplier)))
        })
        .collect();
    alternatives(rules, attr, row[attr], entries, pruning)
}

fn search_row(
    row: &[Cell],
    rules: &[EditRule],
    alts: &[(AttrId, RankedDomain)],
    pruning: Pruning,
    limit: Option<Cost>,
) -> Option<TupleRepairs> {
    let width = row.len();
    let mut search = Search::new(rules, width, pruning, limit);
    let mut frozen = vec![true; width];
    for (a, d) in alts {
        search.alts[*a] = Some(d.clone());
        frozen[*a] = false;
    }
    let mut tuple = row.to_vec();
    search.explore(&mut tuple, 0, &mut frozen);
    let cost = search.best?;
    Some(TupleRepairs {
        cost,
        tuples: search.found.into_iter().collect(),
    })
}

fn project(tuple: &[Cell], attrs: &[AttrId]) -> Vec<Cell> {
    attrs.iter().map(|a| tuple[*a]).collect()
}

fn ranked_class_domains(
    input: &ClassInput<'_>,
    attrs: &[AttrId],
    observed_only: bool,
) -> (Vec<InducedClassCost>, Vec<RankedDomain>) {
    let costs: Vec<InducedClassCost> = attrs
        .iter()
        .map(|&a| {
            if observed_only {
                let seen: BTreeSet<Cell> = input.class.rows.iter().map(|r| r[a]).collect();
                class_cost_for(input.class, a, input.model, seen.into_iter())
            } else {
                class_cost(input.schema, input.class, a, input.model)
            }
        })
        .collect();
    let domains = costs
        .iter()
        .map(|c| RankedDomain::new(c.attr, c.entries.clone()))
        .collect();
    (costs, domains)
}

/// Minimal repairs of a class when every attribute takes one value per
/// class (`input.free` must be empty).
///
/// Starts from the cheapest assignments; if none is valid, searches from
/// each of them under costs measured relative to it.
pub fn repair_class_full_key(input: &ClassInput<'_>, book: &RuleBook, pruning: Pruning) -> Result<RepairSet> {
    debug_assert!(input.free.is_empty());
    let attrs = input.shared;
    let width = input.schema.len();
    // without rules and with uniform change costs, a value missing from the
    // class is never cheapest
    let observed_only = book.user().is_empty() && !matches!(input.model, CostModel::Preference { .. });
    let (costs, domains) = ranked_class_domains(input, attrs, observed_only);
    let (batch, beta_min) = first_batch(&domains);
    // nulls survive only on attributes null in every row, the same for all anchors
    let rules = match batch.first() {
        Some(r) => {
            let mut t = vec![None; width];
            for (a, v) in attrs.iter().zip(r.values(&domains)) {
                t[*a] = v;
            }
            book.for_tuple(input.schema, &t, attrs)?
        }
        None => return Err(Error::EmptyRepairSet),
    };
    let rules: &[EditRule] = &rules;
    let anchors: Vec<Tuple> = batch
        .iter()
        .map(|r| {
            let mut t = vec![None; width];
            for (a, v) in attrs.iter().zip(r.values(&domains)) {
                t[*a] = v;
            }
            t
        })
        .collect();
    let valid: Vec<Vec<Cell>> = anchors
        .iter()
        .filter(|t| failing_rules(t, rules).is_empty())
        .map(|t| project(t, attrs))
        .collect();
    let mut set = RepairSet {
        cost: beta_min,
        shared_attrs: attrs.to_vec(),
        row_attrs: Vec::new(),
        bundles: Vec::new(),
    };
    if !valid.is_empty() {
        set.bundles = valid
            .into_iter()
            .map(|shared| Bundle {
                shared,
                rows: Vec::new(),
            })
            .collect();
        set.normalize();
        return Ok(set);
    }
    let mut search = Search::new(rules, width, pruning, None);
    let mut frozen = vec![true; width];
    for a in attrs {
        frozen[*a] = false;
    }
    for anchor in &anchors {
        for (a, c) in attrs.iter().zip(&costs) {
            let entries = induced_model(c, anchor[*a]);
            search.alts[*a] = Some(alternatives(rules, *a, anchor[*a], entries, pruning));
        }
        let mut tuple = anchor.clone();
        search.explore(&mut tuple, beta_min, &mut frozen);
    }
    let Some(cost) = search.best else {
        return Err(Error::EmptyRepairSet);
    };
    set.cost = cost;
    set.bundles = search
        .found
        .iter()
        .map(|t| Bundle {
            shared: project(t, attrs),
            rows: Vec::new(),
        })
        .collect();
    set.normalize();
    Ok(set)
}

/// Rows with the same projection and multiplier share their completions.
struct RowGroup {
    row: Tuple,
    multiplier: Cost,
    members: Vec<usize>,
}

fn row_groups(input: &ClassInput<'_>) -> Vec<RowGroup> {
    let mut scope: Vec<AttrId> = input.shared.iter().chain(input.free).copied().collect();
    scope.sort_unstable();
    let mut index: HashMap<(Vec<Cell>, Cost), usize> = HashMap::new();
    let mut groups: Vec<RowGroup> = Vec::new();
    for (i, (row, m)) in input.class.rows.iter().zip(&input.class.multipliers).enumerate() {
        let key = (project(row, &scope), *m);
        match index.get(&key) {
            Some(&g) => groups[g].members.push(i),
            None => {
                index.insert(key, groups.len());
                groups.push(RowGroup {
                    row: row.clone(),
                    multiplier: *m,
                    members: vec![i],
                });
            }
        }
    }
    groups
}

/// Minimal repairs of a class whose shared attributes are fixed per class
/// while the free attributes are completed row by row.
///
/// Shared assignments are visited cheapest first; each is completed with
/// every row's cheapest valid free values, and the walk stops once the
/// shared cost alone exceeds the best total.
/// Rules picked by a row's nulls and the ranked alternatives they leave.
type RowAlternatives = (Arc<[EditRule]>, Vec<(AttrId, RankedDomain)>);

pub fn repair_class_partial_key(input: &ClassInput<'_>, book: &RuleBook, pruning: Pruning) -> Result<RepairSet> {
    let shared = input.shared;
    let mut scope: Vec<AttrId> = shared.iter().chain(input.free).copied().collect();
    scope.sort_unstable();
    let (_, domains) = ranked_class_domains(input, shared, false);
    let groups = row_groups(input);
    let n_rows = input.class.len();
    let mut best: Option<Cost> = None;
    let mut bundles: Vec<Bundle> = Vec::new();
    // alternatives depend on the row and on the rules picked by its nulls
    let mut alts_cache: HashMap<(usize, Vec<AttrId>), RowAlternatives> = HashMap::new();

    'outer: for r1 in lcf_iterate(&domains) {
        if best.is_some_and(|b| r1.beta > b) {
            break;
        }
        let values = r1.values(&domains);
        let mut total = r1.beta;
        let mut rows: Vec<Vec<Vec<Cell>>> = vec![Vec::new(); n_rows];
        for (gi, g) in groups.iter().enumerate() {
            let mut row = g.row.clone();
            for (a, v) in shared.iter().zip(&values) {
                row[*a] = *v;
            }
            let nulls: Vec<AttrId> = scope.iter().copied().filter(|a| row[*a].is_none()).collect();
            let (rules, alts) = match alts_cache.entry((gi, nulls)) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    let rules = book.for_nulls(input.schema, &e.key().1)?;
                    let alts = input
                        .free
                        .iter()
                        .map(|&a| {
                            let d = row_alternatives(input.schema, &row, a, &rules, input.model, g.multiplier, pruning);
                            (a, d)
                        })
                        .collect();
                    e.insert((rules, alts))
                }
            };
            let count = g.members.len() as Cost;
            let limit = match best {
                Some(b) if pruning.cost_bound => Some(b.saturating_sub(total) / count),
                _ => None,
            };
            let Some(found) = search_row(&row, rules, alts, pruning, limit) else {
                continue 'outer;
            };
            total = total.saturating_add(found.cost.saturating_mul(count));
            let options: Vec<Vec<Cell>> = found.tuples.iter().map(|t| project(t, input.free)).collect();
            for &i in &g.members {
                rows[i] = options.clone();
            }
        }
        if best.is_some_and(|b| total > b) {
            continue;
        }
        if best.is_none_or(|b| total < b) {
            best = Some(total);
            bundles.clear();
        }
        if input.free.is_empty() {
            rows.clear();
        }
        bundles.push(Bundle { shared: values, rows });
    }
    let Some(cost) = best else {
        return Err(Error::EmptyRepairSet);
    };
    let mut set = RepairSet {
        cost,
        shared_attrs: shared.to_vec(),
        row_attrs: input.free.to_vec(),
        bundles,
    };
    set.normalize();
    Ok(set)
}

/// Dispatches on whether the input has free attributes.
pub fn repair_class(input: &ClassInput<'_>, book: &RuleBook, pruning: Pruning) -> Result<RepairSet> {
    if input.free.is_empty() {
        repair_class_full_key(input, book, pruning)
    } else {
        repair_class_partial_key(input, book, pruning)
    }
}

/// Attributes and rules of one independent part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    pub shared: Vec<AttrId>,
    pub free: Vec<AttrId>,
    pub user: Vec<EditRule>,
    pub sufficient: Vec<EditRule>,
}

/// Splits the non-key attributes into parts that share no user rule, and
/// hands each sufficient-set rule to the part holding its attributes.
pub fn independent_parts(epk: &EpkSet, sigma: &SufficientSet) -> Vec<Part> {
    let components = partition_independent(&epk.rules, &epk.non_key());
    let mut parts: Vec<Part> = components
        .iter()
        .filter(|c| !c.attrs.is_empty())
        .map(|c| Part {
            shared: c.attrs.iter().copied().filter(|a| epk.determined.contains(a)).collect(),
            free: c.attrs.iter().copied().filter(|a| epk.free.contains(a)).collect(),
            user: c.rules.iter().map(|k| epk.rules[*k].clone()).collect(),
            sufficient: Vec::new(),
        })
        .collect();
    for rule in sigma.rules() {
        if let Some(first) = rule.involves().next() {
            if let Some(p) = parts
                .iter_mut()
                .find(|p| p.shared.contains(&first) || p.free.contains(&first))
            {
                p.sufficient.push(rule.clone());
            }
        }
    }
    parts
}

#[derive(Clone, Debug)]
pub struct RepairOptions {
    pub pruning: Pruning,
    pub seed: u64,
    pub rule_cap: usize,
    /// Cross-check each class against brute force when it is small enough.
    pub oracle_cap: Option<u128>,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions {
            pruning: Pruning::ALL,
            seed: 0,
            rule_cap: DEFAULT_RULE_CAP,
            oracle_cap: None,
        }
    }
}

/// Changed cell of a class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellChange {
    pub row: usize,
    pub attr: AttrId,
    pub from: Cell,
    pub to: Cell,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassOutcome {
    pub key: Vec<Cell>,
    pub rows: Vec<usize>,
    pub cost: Cost,
    /// Number of minimal repairs, saturating.
    pub alternatives: u128,
    /// Chosen class-wide values, by attribute.
    pub chosen: Vec<(AttrId, Cell)>,
    pub changes: Vec<CellChange>,
    /// Frequency selection had no evidence and fell back to uniform.
    pub fallback: bool,
    /// Brute force agreed with the search, when it was run.
    pub verified: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct RelationRepair {
    pub relation: Relation,
    pub classes: Vec<ClassOutcome>,
    pub parts: Vec<Part>,
}

/// Key classes in key order, each with its row indices.
pub fn key_classes(rel: &Relation, key: &[AttrId]) -> Result<Vec<(Vec<Cell>, Vec<usize>)>> {
    let mut classes: BTreeMap<Vec<Cell>, Vec<usize>> = BTreeMap::new();
    for (i, row) in rel.rows().iter().enumerate() {
        if let Some(&a) = key.iter().find(|a| row[**a].is_none()) {
            return Err(Error::NullKey {
                row: i + 1,
                attr: rel.schema().name(a).to_string(),
            });
        }
        classes.entry(project(row, key)).or_default().push(i);
    }
    Ok(classes.into_iter().collect())
}

/// Repairs every key class and applies one selected minimal repair to it.
pub fn repair_relation(
    rel: &Relation,
    epk: &EpkSet,
    sigma: &SufficientSet,
    model: &CostModel,
    selector: &Selector,
    options: &RepairOptions,
) -> Result<RelationRepair> {
    if !sigma.is_satisfiable() {
        return Err(Error::Unsatisfiable);
    }
    let schema = rel.schema().as_ref();
    let classes = key_classes(rel, &epk.key)?;
    let non_key = epk.non_key();
    let multipliers = model.multipliers(rel.rows(), &epk.rules, &non_key);
    let parts = independent_parts(epk, sigma);
    let books: Vec<RuleBook> = parts
        .iter()
        .map(|p| RuleBook::new(p.user.clone(), p.sufficient.clone(), options.rule_cap))
        .collect();

    let outcomes: Vec<(ClassOutcome, Vec<Tuple>)> = classes
        .par_iter()
        .map(|(key, members)| {
            let class = ClassRows::new(
                members.iter().map(|i| rel.rows()[*i].clone()).collect(),
                members.iter().map(|i| multipliers[*i]).collect(),
            );
            let mut rows = class.rows.clone();
            let mut cost: Cost = 0;
            let mut alternatives: u128 = 1;
            let mut fallback = false;
            let mut verified: Option<bool> = None;
            for (p, part) in parts.iter().enumerate() {
                let input = ClassInput {
                    schema,
                    class: &class,
                    shared: &part.shared,
                    free: &part.free,
                    model,
                };
                let set = repair_class(&input, &books[p], options.pruning)?;
                if let Some(cap) = options.oracle_cap {
                    match crate::oracle::brute_force_repairs(&input, &part.user, cap) {
                        Ok(expected) => {
                            let ok = expected == set;
                            verified = Some(verified.unwrap_or(true) && ok);
                        }
                        Err(Error::OracleCap { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                cost = cost.saturating_add(set.cost);
                alternatives = alternatives.saturating_mul(set.count());
                let seed = class_seed(options.seed, key, p);
                let choice = selector.choose(&set, seed);
                fallback |= choice.fallback;
                set.apply(&choice, &mut rows);
            }
            let mut changes = Vec::new();
            for (i, (before, after)) in class.rows.iter().zip(&rows).enumerate() {
                for a in 0..schema.len() {
                    if before[a] != after[a] {
                        changes.push(CellChange {
                            row: members[i],
                            attr: a,
                            from: before[a],
                            to: after[a],
                        });
                    }
                }
            }
            let chosen = epk
                .determined
                .iter()
                .map(|&a| (a, rows.first().and_then(|r| r[a])))
                .collect();
            let outcome = ClassOutcome {
                key: key.clone(),
                rows: members.clone(),
                cost,
                alternatives,
                chosen,
                changes,
                fallback,
                verified,
            };
            Ok((outcome, rows))
        })
        .collect::<Result<_>>()?;

    let mut repaired = rel.rows().to_vec();
    let mut classes_out = Vec::with_capacity(outcomes.len());
    for (outcome, rows) in outcomes {
        for (i, row) in outcome.rows.iter().zip(rows) {
            repaired[*i] = row;
        }
        classes_out.push(outcome);
    }
    Ok(RelationRepair {
        relation: rel.with_rows(repaired),
        classes: classes_out,
        parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::ValueSet;
    use crate::schema::{AttributeSchema, Value};
    use crate::sufficient::generate_sufficient_set;

    fn binary_schema(n: usize) -> Schema {
        Schema::new(
            (0..n)
                .map(|i| AttributeSchema::new(format!("a{i}"), ["0", "1"], false))
                .collect(),
        )
        .unwrap()
    }

    fn rule(s: &Schema, comps: &[(AttrId, u32)]) -> EditRule {
        EditRule::new(
            s,
            comps
                .iter()
                .map(|(a, v)| (*a, ValueSet::new(vec![Value(*v)])))
                .collect(),
            0,
        )
        .unwrap()
    }

    fn c(v: u32) -> Cell {
        Some(Value(v))
    }

    #[test]
    fn f1_full_key() {
        // key a0, determined a1 a2; rule forbids a1=1 & a2=1
        let s = binary_schema(3);
        let rules = vec![rule(&s, &[(1, 1), (2, 1)])];
        let class = ClassRows::uniform(vec![
            vec![c(0), c(1), c(1)],
            vec![c(0), c(1), c(0)],
            vec![c(0), c(0), c(1)],
        ]);
        let model = CostModel::constant(1);
        let input = ClassInput {
            schema: &s,
            class: &class,
            shared: &[1, 2],
            free: &[],
            model: &model,
        };
        let book = RuleBook::generate(&s, rules, DEFAULT_RULE_CAP).unwrap();
        let set = repair_class_full_key(&input, &book, Pruning::ALL).unwrap();
        assert_eq!(set.cost, 3);
        let shared: Vec<Vec<Cell>> = set.bundles.iter().map(|b| b.shared.clone()).collect();
        assert_eq!(shared, vec![vec![c(0), c(1)], vec![c(1), c(0)]]);
        assert_eq!(repair_class_full_key(&input, &book, Pruning::NONE).unwrap(), set);
        assert_eq!(repair_class_partial_key(&input, &book, Pruning::ALL).unwrap(), set);
    }

    #[test]
    fn consistent_tuple_is_its_own_repair() {
        let s = binary_schema(2);
        let rules = vec![rule(&s, &[(0, 1), (1, 1)])];
        let row = vec![c(0), c(1)];
        let model = CostModel::constant(1);
        let out = repair_tuple(&s, &row, &rules, &[0, 1], &model, 1, Pruning::ALL, None).unwrap();
        assert_eq!(out.cost, 0);
        assert_eq!(out.tuples, vec![row]);
    }

    #[test]
    fn f2_tuple_needs_implied_rule() {
        let s = binary_schema(2);
        let user = vec![rule(&s, &[(0, 1)]), rule(&s, &[(0, 0), (1, 1)])];
        let sigma = generate_sufficient_set(&s, &user, DEFAULT_RULE_CAP).unwrap();
        let row = vec![c(1), c(1)];
        let model = CostModel::constant(1);
        let out = repair_tuple(&s, &row, sigma.rules(), &[0, 1], &model, 1, Pruning::ALL, None).unwrap();
        assert_eq!(out.cost, 2);
        assert_eq!(out.tuples, vec![vec![c(0), c(0)]]);
    }

    #[test]
    fn changing_control_beats_two_changes() {
        // control=0, placebo=1, active_compare=2; value 1 is "yes"
        let s = binary_schema(3);
        let rules = vec![rule(&s, &[(0, 0), (1, 1)]), rule(&s, &[(2, 1), (0, 0)])];
        let row = vec![c(0), c(1), c(1)];
        let model = CostModel::constant(1);
        let out = repair_tuple(&s, &row, &rules, &[0, 1, 2], &model, 1, Pruning::ALL, None).unwrap();
        assert_eq!(out.cost, 1);
        assert_eq!(out.tuples, vec![vec![c(1), c(1), c(1)]]);
    }

    #[test]
    fn unsatisfiable_rules_are_rejected() {
        let s = binary_schema(2);
        let user = vec![rule(&s, &[(1, 1)]), rule(&s, &[(1, 0)])];
        let sigma = generate_sufficient_set(&s, &user, DEFAULT_RULE_CAP).unwrap();
        let epk = EpkSet::new(&s, vec![0], vec![1], user).unwrap();
        let rel = Relation::new(std::sync::Arc::new(s), vec![vec![c(0), c(0)]]).unwrap();
        let err = repair_relation(
            &rel,
            &epk,
            &sigma,
            &CostModel::constant(1),
            &Selector::Random,
            &RepairOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unsatisfiable));
    }

    #[test]
    fn null_key_is_rejected() {
        let s = binary_schema(2);
        let epk = EpkSet::new(&s, vec![0], vec![1], vec![]).unwrap();
        let sigma = generate_sufficient_set(&s, &[], DEFAULT_RULE_CAP).unwrap();
        let rel = Relation::new(std::sync::Arc::new(s), vec![vec![None, c(0)]]).unwrap();
        let err = repair_relation(
            &rel,
            &epk,
            &sigma,
            &CostModel::constant(1),
            &Selector::Random,
            &RepairOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NullKey { row: 1, .. }));
    }

    #[test]
    fn empty_relation() {
        let s = binary_schema(2);
        let epk = EpkSet::new(&s, vec![0], vec![1], vec![]).unwrap();
        let sigma = generate_sufficient_set(&s, &[], DEFAULT_RULE_CAP).unwrap();
        let rel = Relation::new(std::sync::Arc::new(s), vec![]).unwrap();
        let out = repair_relation(
            &rel,
            &epk,
            &sigma,
            &CostModel::constant(1),
            &Selector::Random,
            &RepairOptions::default(),
        )
        .unwrap();
        assert!(out.relation.is_empty());
        assert!(out.classes.is_empty());
    }

    #[test]
    fn free_attributes_without_rules_are_untouched() {
        let s = binary_schema(3);
        let rows = vec![vec![c(0), c(0), c(1)], vec![c(0), c(1), c(0)], vec![c(0), c(0), c(0)]];
        let epk = EpkSet::new(&s, vec![0], vec![1], vec![]).unwrap();
        let sigma = generate_sufficient_set(&s, &[], DEFAULT_RULE_CAP).unwrap();
        let rel = Relation::new(std::sync::Arc::new(s), rows).unwrap();
        let out = repair_relation(
            &rel,
            &epk,
            &sigma,
            &CostModel::constant(1),
            &Selector::Random,
            &RepairOptions::default(),
        )
        .unwrap();
        let repaired: Vec<Cell> = out.relation.rows().iter().map(|r| r[1]).collect();
        assert_eq!(repaired, vec![c(0); 3]);
        let free: Vec<Cell> = out.relation.rows().iter().map(|r| r[2]).collect();
        assert_eq!(free, vec![c(1), c(0), c(0)]);
        assert_eq!(out.classes[0].cost, 1);
    }
}
