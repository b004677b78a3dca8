mod common;

use epk_repair::covers::{failing_rules, minimal_covers};
use epk_repair::rules::EditRule;
use epk_repair::schema::{AttrId, Cell, Schema, Tuple, Value};
use proptest::prelude::*;

/// Every complete tuple over the non-key attributes, key fixed to 0.
fn complete_tuples(schema: &Schema) -> Vec<Tuple> {
    let mut out: Vec<Tuple> = vec![vec![Some(Value(0))]];
    for a in 1..schema.len() {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..schema.domain_len(a) as u32).map(move |v| {
                    let mut t = t.clone();
                    t.push(Some(Value(v)));
                    t
                })
            })
            .collect();
    }
    out
}

fn valid(rules: &[EditRule], t: &[Cell]) -> bool {
    !rules.iter().any(|r| r.fails(t))
}

/// Some valid tuple agrees with `t` outside `subset`.
fn is_solution(all: &[Tuple], rules: &[EditRule], t: &[Cell], subset: &[AttrId]) -> bool {
    all.iter().any(|u| {
        valid(rules, u) && (1..t.len()).all(|a| subset.contains(&a) || u[a] == t[a])
    })
}

fn subsets(n: usize) -> Vec<Vec<AttrId>> {
    (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn implied_rules_forbid_nothing_new(seed in any::<u64>()) {
        let inst = common::random_instance(seed, false);
        for t in complete_tuples(&inst.schema) {
            prop_assert_eq!(valid(&inst.epk.rules, &t), valid(inst.sigma.rules(), &t));
        }
    }

    #[test]
    fn covers_of_failing_rules_are_exactly_the_solutions(seed in any::<u64>()) {
        let inst = common::random_instance(seed, false);
        let all = complete_tuples(&inst.schema);
        let n = inst.schema.len() - 1;
        for t in &all {
            let failing = failing_rules(t, inst.sigma.rules());
            let hits = |s: &[AttrId]| failing.iter().all(|r| r.involves().any(|a| s.contains(&a)));
            for s in subsets(n) {
                prop_assert_eq!(hits(&s), is_solution(&all, &inst.epk.rules, t, &s), "tuple {:?} subset {:?}", t, s);
            }
            for cover in minimal_covers(&failing) {
                prop_assert!(is_solution(&all, &inst.epk.rules, t, &cover));
            }
        }
    }
}
