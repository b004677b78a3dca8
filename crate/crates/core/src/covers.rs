//! Failing rules and their ⊂-minimal attribute covers.

use crate::rules::EditRule;
use crate::schema::{AttrId, Cell};

/// Set of attributes hitting every failing rule.
pub type Cover = Vec<AttrId>;

pub fn failing_rules<'r>(tuple: &[Cell], rules: &'r [EditRule]) -> Vec<&'r EditRule> {
    rules.iter().filter(|r| r.fails(tuple)).collect()
}

/// All ⊂-minimal covers of the involved sets of `failing`, sorted by size and
/// then by attribute ids.
pub fn minimal_covers(failing: &[&EditRule]) -> Vec<Cover> {
    let edges: Vec<Vec<AttrId>> = failing.iter().map(|r| r.involves().collect()).collect();
    minimal_hitting_sets(&edges)
}

/// Minimal covers that avoid `frozen` attributes. A rule whose involved
/// attributes are all frozen cannot be covered, and the result is empty.
pub fn minimal_covers_avoiding(failing: &[&EditRule], frozen: &[bool]) -> Vec<Cover> {
    let edges: Vec<Vec<AttrId>> = failing
        .iter()
        .map(|r| r.involves().filter(|a| !frozen[*a]).collect())
        .collect();
    minimal_hitting_sets(&edges)
}

/// Enumerates the minimal hitting sets of `edges` by branching on the
/// smallest unhit edge. An empty edge makes the instance infeasible.
pub fn minimal_hitting_sets(edges: &[Vec<AttrId>]) -> Vec<Cover> {
    if edges.is_empty() {
        return vec![Vec::new()];
    }
    if edges.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut found: Vec<Cover> = Vec::new();
    let mut current = Vec::new();
    branch(edges, &mut current, &mut found);
    let mut minimal: Vec<Cover> = found
        .into_iter()
        .filter(|c| is_minimal(edges, c))
        .collect();
    minimal.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    minimal.dedup();
    minimal
}

fn branch(edges: &[Vec<AttrId>], current: &mut Vec<AttrId>, found: &mut Vec<Cover>) {
    if found.iter().any(|f| f.iter().all(|a| current.contains(a))) {
        return;
    }
    let unhit = edges
        .iter()
        .filter(|e| !e.iter().any(|a| current.contains(a)))
        .min_by_key(|e| e.len());
    match unhit {
        None => {
            let mut cover = current.clone();
            cover.sort_unstable();
            found.push(cover);
        }
        Some(edge) => {
            for &a in edge {
                current.push(a);
                branch(edges, current, found);
                current.pop();
            }
        }
    }
}

fn hits_all(edges: &[Vec<AttrId>], set: &[AttrId]) -> bool {
    edges.iter().all(|e| e.iter().any(|a| set.contains(a)))
}

fn is_minimal(edges: &[Vec<AttrId>], cover: &[AttrId]) -> bool {
    (0..cover.len()).all(|skip| {
        let reduced: Vec<AttrId> = cover
            .iter()
            .enumerate()
            .filter_map(|(i, a)| (i != skip).then_some(*a))
            .collect();
        !hits_all(edges, &reduced)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        assert_eq!(minimal_hitting_sets(&[vec![3]]), vec![vec![3]]);
    }

    #[test]
    fn control_or_placebo_and_comparator() {
        // control=0, placebo=1, active_compare=2
        let covers = minimal_hitting_sets(&[vec![0, 1], vec![0, 2]]);
        assert_eq!(covers, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn chained_edges() {
        // {a,b} and {b,c}: brute force over the 8 subsets leaves {b} and {a,c}
        let covers = minimal_hitting_sets(&[vec![0, 1], vec![1, 2]]);
        assert_eq!(covers, vec![vec![1], vec![0, 2]]);
    }

    #[test]
    fn empty_and_infeasible() {
        assert_eq!(minimal_hitting_sets(&[]), vec![Vec::<AttrId>::new()]);
        assert!(minimal_hitting_sets(&[vec![1], vec![]]).is_empty());
    }

    #[test]
    fn frozen_attributes_are_avoided() {
        use crate::rules::{EditRule, ValueSet};
        use crate::schema::{AttributeSchema, Schema, Value};
        let s = Schema::new(
            (0..3)
                .map(|i| AttributeSchema::new(format!("a{i}"), ["0", "1"], false))
                .collect(),
        )
        .unwrap();
        let one = || ValueSet::new(vec![Value(1)]);
        let r1 = EditRule::new(&s, vec![(0, one()), (1, one())], 0).unwrap();
        let r2 = EditRule::new(&s, vec![(0, one()), (2, one())], 0).unwrap();
        let failing = vec![&r1, &r2];
        assert_eq!(minimal_covers(&failing), vec![vec![0], vec![1, 2]]);
        assert_eq!(
            minimal_covers_avoiding(&failing, &[true, false, false]),
            vec![vec![1, 2]]
        );
        assert!(minimal_covers_avoiding(&failing, &[true, true, false]).is_empty());
        let t = [Some(Value(1)), Some(Value(1)), Some(Value(0))];
        let rules = vec![r1.clone(), r2.clone()];
        assert_eq!(failing_rules(&t, &rules), vec![&r1]);
    }
}
