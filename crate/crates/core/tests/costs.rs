mod common;

use epk_repair::cost::{candidates, class_cost, class_cost_for, induced_model};
use epk_repair::schema::Cell;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn class_cost_sums_row_costs(seed in any::<u64>()) {
        let inst = common::random_instance(seed, false);
        for a in 1..inst.schema.len() {
            let mut fast = class_cost(&inst.schema, &inst.class, a, &inst.model).entries;
            let mut slow = class_cost_for(&inst.class, a, &inst.model, candidates(&inst.schema, a)).entries;
            fast.sort();
            slow.sort();
            prop_assert_eq!(fast, slow);
        }
    }

    #[test]
    fn beta_is_the_sum_of_class_costs(seed in any::<u64>()) {
        let inst = common::random_instance(seed, false);
        let attrs = inst.epk.non_key();
        let costs: Vec<_> = attrs.iter().map(|a| class_cost(&inst.schema, &inst.class, *a, &inst.model)).collect();
        let mut candidate = inst.class.rows[0].clone();
        for (a, c) in attrs.iter().zip(&costs) {
            candidate[*a] = c.entries[seed as usize % c.entries.len()].0;
        }
        let expected: u64 = attrs.iter().zip(&costs).map(|(a, c)| c.get(candidate[*a]).unwrap()).sum();
        prop_assert_eq!(inst.class.beta(&inst.model, &candidate, &attrs), Some(expected));
    }

    #[test]
    fn induced_costs_are_positive_and_ordered(seed in any::<u64>()) {
        let inst = common::random_instance(seed, false);
        for a in 1..inst.schema.len() {
            let base = class_cost(&inst.schema, &inst.class, a, &inst.model);
            for (anchor, anchor_cost) in &base.entries {
                let induced = induced_model(&base, *anchor);
                prop_assert!(induced.iter().all(|(v, c)| *c > 0 && v != anchor));
                prop_assert!(induced.windows(2).all(|w| (w[0].1, w[0].0) <= (w[1].1, w[1].0)));
                let costlier = base.entries.iter().filter(|(_, c)| c > anchor_cost).count();
                prop_assert_eq!(induced.len(), costlier);
                let back: Vec<(Cell, u64)> = induced.iter().map(|(v, c)| (*v, c + anchor_cost)).collect();
                prop_assert!(back.iter().all(|e| base.entries.contains(e)));
            }
        }
    }
}
