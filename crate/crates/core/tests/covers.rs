use epk_repair::covers::minimal_hitting_sets;
use epk_repair::schema::AttrId;
use proptest::prelude::*;

fn brute_force(edges: &[Vec<AttrId>], n: usize) -> Vec<Vec<AttrId>> {
    let hits = |s: &[AttrId]| edges.iter().all(|e| e.iter().any(|a| s.contains(a)));
    let hitting: Vec<Vec<AttrId>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s| hits(s))
        .collect();
    let mut minimal: Vec<Vec<AttrId>> = hitting
        .iter()
        .filter(|s| !hitting.iter().any(|o| o.len() < s.len() && o.iter().all(|a| s.contains(a))))
        .cloned()
        .collect();
    minimal.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    minimal
}

fn edges_strategy() -> impl Strategy<Value = Vec<Vec<AttrId>>> {
    prop::collection::vec(prop::collection::btree_set(0usize..6, 0..4), 0..6)
        .prop_map(|es| es.into_iter().map(|e| e.into_iter().collect()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn minimal_hitting_sets_match_enumeration(edges in edges_strategy()) {
        prop_assert_eq!(minimal_hitting_sets(&edges), brute_force(&edges, 6));
    }
}

#[test]
fn single_edge_and_disjoint_edges() {
    assert_eq!(minimal_hitting_sets(&[vec![1, 2]]), vec![vec![1], vec![2]]);
    assert_eq!(
        minimal_hitting_sets(&[vec![0], vec![1, 2]]),
        vec![vec![0, 1], vec![0, 2]]
    );
    assert!(minimal_hitting_sets(&[vec![]]).is_empty());
    assert_eq!(minimal_hitting_sets(&[]), vec![Vec::<AttrId>::new()]);
}
