mod common;

use std::sync::Arc;

use epk_repair::engine::{repair_relation, RepairOptions};
use epk_repair::evaluation::violation_report;
use epk_repair::oracle::DEFAULT_ORACLE_CAP;
use epk_repair::schema::{AttributeSchema, Relation, Schema, Tuple, Value};
use epk_repair::selection::Selector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random instance spread over several key values.
fn multi_class(seed: u64, partial: bool) -> (common::Instance, Relation) {
    let inst = common::random_instance(seed, partial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let keys = ["k", "k1", "k2", "k3"];
    let mut attrs = inst.schema.attrs().to_vec();
    attrs[0] = AttributeSchema::new("k", keys, false);
    let schema = Schema::new(attrs).unwrap();
    let rows: Vec<Tuple> = (0..rng.random_range(1..20))
        .map(|_| {
            let mut row = common::random_row(&mut rng, &schema, 0.1);
            row[0] = Some(Value(rng.random_range(0..keys.len() as u32)));
            row
        })
        .collect();
    let rel = Relation::new(Arc::new(schema), rows).unwrap();
    (inst, rel)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn repaired_relations_are_clean_and_verified(seed in any::<u64>(), partial in any::<bool>()) {
        let (inst, rel) = multi_class(seed, partial);
        let options = RepairOptions { seed, oracle_cap: Some(DEFAULT_ORACLE_CAP), ..RepairOptions::default() };
        let out = repair_relation(&rel, &inst.epk, &inst.sigma, &inst.model, &Selector::Random, &options).unwrap();
        let report = violation_report(&out.relation, &inst.epk);
        prop_assert!(report.is_clean(), "{:?}", report);
        prop_assert!(out.classes.iter().all(|c| c.verified != Some(false)));
        for (before, after) in rel.rows().iter().zip(out.relation.rows()) {
            prop_assert_eq!(before[0], after[0]);
            for a in 1..before.len() {
                if before[a].is_some() {
                    prop_assert!(after[a].is_some());
                }
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_the_result(seed in any::<u64>()) {
        let (inst, rel) = multi_class(seed, true);
        let options = RepairOptions { seed, ..RepairOptions::default() };
        let run = |n| {
            rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| {
                repair_relation(&rel, &inst.epk, &inst.sigma, &inst.model, &Selector::Random, &options).unwrap()
            })
        };
        let (one, four) = (run(1), run(4));
        prop_assert_eq!(one.relation.rows(), four.relation.rows());
        prop_assert_eq!(one.classes, four.classes);
    }
}
