#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use epk_repair::cost::{ClassRows, CostModel, PreferenceTable};
use epk_repair::engine::ClassInput;
use epk_repair::rules::{EditRule, EpkSet, ValueSet};
use epk_repair::schema::{AttrId, AttributeSchema, Cell, Relation, Schema, Tuple, Value};
use epk_repair::sufficient::{generate_sufficient_set, RuleBook, SufficientSet, DEFAULT_RULE_CAP};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub schema: Schema,
    pub epk: EpkSet,
    pub sigma: SufficientSet,
    pub class: ClassRows,
    pub model: CostModel,
}

impl Instance {
    pub fn input(&self) -> ClassInput<'_> {
        ClassInput {
            schema: &self.schema,
            class: &self.class,
            shared: &self.epk.determined,
            free: &self.epk.free,
            model: &self.model,
        }
    }

    pub fn book(&self) -> RuleBook {
        RuleBook::new(self.epk.rules.clone(), self.sigma.rules().to_vec(), DEFAULT_RULE_CAP)
    }

    pub fn relation(&self) -> Relation {
        Relation::new(Arc::new(self.schema.clone()), self.class.rows.clone()).unwrap()
    }
}

/// Attribute 0 is a one-valued key; attributes 1.. have closed domains.
pub fn schema_with_domains(sizes: &[usize]) -> Schema {
    let mut attrs = vec![AttributeSchema::new("k", ["k"], false)];
    for (i, n) in sizes.iter().enumerate() {
        attrs.push(AttributeSchema::new(
            format!("a{i}"),
            (0..*n).map(|v| format!("v{v}")),
            false,
        ));
    }
    Schema::new(attrs).unwrap()
}

pub fn random_rule(rng: &mut ChaCha8Rng, schema: &Schema, max_attrs: usize) -> EditRule {
    let mut attrs: Vec<AttrId> = (1..schema.len()).collect();
    attrs.shuffle(rng);
    let k = rng.random_range(1..=max_attrs.min(attrs.len()));
    let comps = attrs[..k]
        .iter()
        .map(|&a| {
            let n = schema.domain_len(a);
            let size = rng.random_range(1..n);
            let mut vals: Vec<u32> = (0..n as u32).collect();
            vals.shuffle(rng);
            (a, ValueSet::new(vals[..size].iter().map(|v| Value(*v)).collect()))
        })
        .collect();
    EditRule::new(schema, comps, 0).unwrap()
}

pub fn random_model(rng: &mut ChaCha8Rng, schema: &Schema) -> CostModel {
    match rng.random_range(0..3) {
        0 => CostModel::constant(rng.random_range(1..=2)),
        1 => CostModel::Reliability {
            alpha: rng.random_range(1..=2),
            omega: [0, 2, 4][rng.random_range(0..3)],
        },
        _ => {
            let mut tables = BTreeMap::new();
            for a in 1..schema.len() {
                if rng.random_bool(0.2) {
                    continue;
                }
                let n = schema.domain_len(a) as u32;
                let mut entries = Vec::new();
                for from in 0..n {
                    for to in 0..n {
                        if from != to && rng.random_bool(0.8) {
                            entries.push(((Value(from), Value(to)), rng.random_range(1..=4)));
                        }
                    }
                }
                tables.insert(a, PreferenceTable::new(schema.name(a), entries).unwrap());
            }
            CostModel::Preference {
                alpha: rng.random_range(1..=2),
                tables,
            }
        }
    }
}

pub fn random_row(rng: &mut ChaCha8Rng, schema: &Schema, null_rate: f64) -> Tuple {
    let mut row = vec![Some(Value(0))];
    for a in 1..schema.len() {
        let cell: Cell = if rng.random_bool(null_rate) {
            None
        } else {
            Some(Value(rng.random_range(0..schema.domain_len(a) as u32)))
        };
        row.push(cell);
    }
    row
}

/// A satisfiable small instance: 2-4 non-key attributes, domains of 2-4
/// values, 1-5 rows, 0-4 rules. `partial` decides whether some non-key
/// attributes are left free.
pub fn random_instance(seed: u64, partial: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n_attrs = rng.random_range(2..=4);
        let sizes: Vec<usize> = (0..n_attrs).map(|_| rng.random_range(2..=4)).collect();
        let schema = schema_with_domains(&sizes);
        let n_rules = rng.random_range(0..=4);
        let rules: Vec<EditRule> = (0..n_rules).map(|_| random_rule(&mut rng, &schema, 3)).collect();
        let sigma = generate_sufficient_set(&schema, &rules, DEFAULT_RULE_CAP).unwrap();
        if !sigma.is_satisfiable() {
            continue;
        }
        let mut non_key: Vec<AttrId> = (1..schema.len()).collect();
        let determined: Vec<AttrId> = if partial {
            non_key.shuffle(&mut rng);
            let k = rng.random_range(0..non_key.len());
            let mut d = non_key[..k].to_vec();
            d.sort_unstable();
            d
        } else {
            non_key
        };
        let epk = EpkSet::new(&schema, vec![0], determined, rules).unwrap();
        let n_rows = rng.random_range(1..=5);
        let rows: Vec<Tuple> = (0..n_rows).map(|_| random_row(&mut rng, &schema, 0.1)).collect();
        let model = random_model(&mut rng, &schema);
        let multipliers = model.multipliers(&rows, &epk.rules, &epk.non_key());
        return Instance {
            class: ClassRows::new(rows, multipliers),
            schema,
            epk,
            sigma,
            model,
        };
    }
}
