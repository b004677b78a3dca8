//! Sufficient sets of edit rules and independent rule partitions.
//!
//! The sufficient set is the closure of the user rules under implied-edit
//! generation: for a generating attribute `a` and rules `E¹..Eⁿ` whose
//! `a`-components cover the whole domain of `a`, the rule with a full
//! component on `a` and `∩ₖ Eᵏ_j` on every other attribute is implied.
//! Dominated rules are dropped after every round.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::rules::{EditRule, ValueSet};
use crate::schema::{AttrId, Schema};

/// Default bound on the number of rules held during generation.
pub const DEFAULT_RULE_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SufficientSet {
    rules: Vec<EditRule>,
    contradiction: bool,
}

impl SufficientSet {
    pub fn rules(&self) -> &[EditRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn has_contradiction(&self) -> bool {
        self.contradiction
    }

    pub fn is_satisfiable(&self) -> bool {
        !self.contradiction
    }
}

pub fn is_satisfiable(sigma: &SufficientSet) -> bool {
    sigma.is_satisfiable()
}

/// Closes `rules` under implied-edit generation.
///
/// Fails with [`Error::SufficientSetCap`] once more than `cap` rules would
/// be held.
pub fn generate_sufficient_set(
    schema: &Schema,
    rules: &[EditRule],
    cap: usize,
) -> Result<SufficientSet> {
    let mut current = prune(rules.to_vec());
    if current.len() > cap {
        return Err(Error::SufficientSetCap { cap });
    }
    loop {
        if current.iter().any(EditRule::is_contradiction) {
            break;
        }
        let mut generated: Vec<EditRule> = Vec::new();
        let mut attrs: Vec<AttrId> = current.iter().flat_map(|r| r.involves()).collect();
        attrs.sort_unstable();
        attrs.dedup();
        for attr in attrs {
            let involving: Vec<&EditRule> = current.iter().filter(|r| r.involves_attr(attr)).collect();
            let mut found = Vec::new();
            implied_on(schema.domain_len(attr), attr, &involving, &mut found);
            for rule in found {
                let known = current
                    .iter()
                    .chain(&generated)
                    .any(|r| rule.dominated_by(r));
                if !known {
                    generated.push(rule);
                    if current.len() + generated.len() > cap {
                        return Err(Error::SufficientSetCap { cap });
                    }
                }
            }
        }
        if generated.is_empty() {
            break;
        }
        current.extend(generated);
        current = prune(current);
    }
    let contradiction = current.iter().any(EditRule::is_contradiction);
    Ok(SufficientSet {
        rules: current,
        contradiction,
    })
}

/// Implied rules generated on `attr` from minimal covering subsets of
/// `involving`, in order of increasing subset size.
fn implied_on(domain_len: usize, attr: AttrId, involving: &[&EditRule], out: &mut Vec<EditRule>) {
    let mut by_size: BTreeMap<usize, Vec<EditRule>> = BTreeMap::new();
    let mut chosen = Vec::new();
    extend_subset(
        domain_len,
        attr,
        involving,
        0,
        &mut chosen,
        &ValueSet::default(),
        None,
        &mut by_size,
    );
    for (_, rules) in by_size {
        out.extend(rules);
    }
}

#[allow(clippy::too_many_arguments)]
fn extend_subset(
    domain_len: usize,
    attr: AttrId,
    involving: &[&EditRule],
    start: usize,
    chosen: &mut Vec<usize>,
    union: &ValueSet,
    meet: Option<&[(AttrId, ValueSet)]>,
    out: &mut BTreeMap<usize, Vec<EditRule>>,
) {
    for k in start..involving.len() {
        let rule = involving[k];
        let own = rule.component(attr).expect("rule involves attr");
        if own.is_subset(union) {
            // cannot contribute to a minimal cover
            continue;
        }
        let others: Vec<(AttrId, ValueSet)> = rule
            .components()
            .iter()
            .filter(|(a, _)| *a != attr)
            .cloned()
            .collect();
        let next_meet = match meet {
            Some(m) => match conjoin(m, &others) {
                Some(c) => c,
                None => continue,
            },
            None => others,
        };
        let next_union = union.union(own);
        chosen.push(k);
        if next_union.len() == domain_len {
            if is_minimal_cover(attr, involving, chosen) {
                out.entry(chosen.len())
                    .or_default()
                    .push(EditRule::from_strict(next_meet));
            }
        } else {
            extend_subset(
                domain_len,
                attr,
                involving,
                k + 1,
                chosen,
                &next_union,
                Some(&next_meet),
                out,
            );
        }
        chosen.pop();
    }
}

fn is_minimal_cover(attr: AttrId, involving: &[&EditRule], chosen: &[usize]) -> bool {
    chosen.iter().all(|&drop| {
        let own = involving[drop].component(attr).unwrap();
        own.iter().any(|v| {
            !chosen
                .iter()
                .filter(|&&k| k != drop)
                .any(|&k| involving[k].component(attr).unwrap().contains(v))
        })
    })
}

/// Component-wise intersection of two sorted component lists; `None` when
/// some component becomes empty.
fn conjoin(a: &[(AttrId, ValueSet)], b: &[(AttrId, ValueSet)]) -> Option<Vec<(AttrId, ValueSet)>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.0 == y.0 => {
                let set = x.1.intersection(&y.1);
                if set.is_empty() {
                    return None;
                }
                i += 1;
                j += 1;
                (x.0, set)
            }
            (Some(x), Some(y)) if x.0 < y.0 => {
                i += 1;
                x.clone()
            }
            (Some(x), None) => {
                i += 1;
                x.clone()
            }
            (_, Some(y)) => {
                j += 1;
                y.clone()
            }
            (None, None) => unreachable!(),
        };
        out.push(take);
    }
    Some(out)
}

/// Deduplicates, removes dominated rules and sorts canonically.
fn prune(mut rules: Vec<EditRule>) -> Vec<EditRule> {
    rules.sort();
    rules.dedup();
    let keep: Vec<bool> = (0..rules.len())
        .map(|i| {
            !rules
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && rules[i].dominated_by(other))
        })
        .collect();
    rules
        .into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect()
}

/// Sufficient sets per pattern of null attributes.
///
/// Implied rules assume every generating attribute holds a value, so a
/// tuple with nulls is judged by the sufficient set of the user rules that
/// avoid its null attributes. Sets are generated on first use.
pub struct RuleBook {
    user: Vec<EditRule>,
    cap: usize,
    cache: Mutex<HashMap<Vec<AttrId>, Arc<[EditRule]>>>,
}

impl RuleBook {
    /// `sigma` must be the sufficient set of `user`.
    pub fn new(user: Vec<EditRule>, sigma: Vec<EditRule>, cap: usize) -> Self {
        let mut cache = HashMap::new();
        cache.insert(Vec::new(), Arc::from(sigma));
        RuleBook {
            user,
            cap,
            cache: Mutex::new(cache),
        }
    }

    pub fn generate(schema: &Schema, user: Vec<EditRule>, cap: usize) -> Result<Self> {
        let sigma = generate_sufficient_set(schema, &user, cap)?;
        if !sigma.is_satisfiable() {
            return Err(Error::Unsatisfiable);
        }
        Ok(RuleBook::new(user, sigma.rules, cap))
    }

    pub fn user(&self) -> &[EditRule] {
        &self.user
    }

    /// Rules deciding validity of tuples whose nulls are exactly `nulls`
    /// (sorted), with those nulls kept.
    pub fn for_nulls(&self, schema: &Schema, nulls: &[AttrId]) -> Result<Arc<[EditRule]>> {
        if let Some(rules) = self.cache.lock().unwrap().get(nulls) {
            return Ok(Arc::clone(rules));
        }
        let kept: Vec<EditRule> = self
            .user
            .iter()
            .filter(|r| !r.involves().any(|a| nulls.contains(&a)))
            .cloned()
            .collect();
        let sigma = generate_sufficient_set(schema, &kept, self.cap)?;
        let rules: Arc<[EditRule]> = Arc::from(sigma.rules);
        self.cache
            .lock()
            .unwrap()
            .insert(nulls.to_vec(), Arc::clone(&rules));
        Ok(rules)
    }

    /// Rules for `tuple`, looking at nulls among `attrs` only.
    pub fn for_tuple(&self, schema: &Schema, tuple: &[crate::schema::Cell], attrs: &[AttrId]) -> Result<Arc<[EditRule]>> {
        let mut nulls: Vec<AttrId> = attrs.iter().copied().filter(|a| tuple[*a].is_none()).collect();
        nulls.sort_unstable();
        self.for_nulls(schema, &nulls)
    }
}

/// A connected group of attributes and the rules over them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub attrs: Vec<AttrId>,
    /// Indices into the partitioned rule slice.
    pub rules: Vec<usize>,
}

/// Connected components of the attribute/rule incidence graph. Attributes in
/// `attrs` that no rule touches become singleton components without rules.
pub fn partition_independent(rules: &[EditRule], attrs: &[AttrId]) -> Vec<Component> {
    let mut universe: Vec<AttrId> = attrs.to_vec();
    universe.extend(rules.iter().flat_map(|r| r.involves()));
    universe.sort_unstable();
    universe.dedup();
    let pos = |a: AttrId| universe.binary_search(&a).unwrap();
    let mut parent: Vec<usize> = (0..universe.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for rule in rules {
        let mut involved = rule.involves();
        if let Some(first) = involved.next() {
            let root = find(&mut parent, pos(first));
            for a in involved {
                let other = find(&mut parent, pos(a));
                if other != root {
                    parent[other] = root;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Component> = BTreeMap::new();
    let mut root_of_first: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &attr) in universe.iter().enumerate() {
        let root = find(&mut parent, i);
        let first = *root_of_first.entry(root).or_insert(i);
        groups
            .entry(first)
            .or_insert_with(|| Component {
                attrs: Vec::new(),
                rules: Vec::new(),
            })
            .attrs
            .push(attr);
    }
    let mut empty = Vec::new();
    for (k, rule) in rules.iter().enumerate() {
        match rule.involves().next() {
            Some(a) => {
                let root = find(&mut parent, pos(a));
                let first = root_of_first[&root];
                groups.get_mut(&first).unwrap().rules.push(k);
            }
            None => empty.push(k),
        }
    }
    let mut out: Vec<Component> = groups.into_values().collect();
    if !empty.is_empty() {
        out.push(Component {
            attrs: Vec::new(),
            rules: empty,
        });
    }
    out
}
