//! Lowest-cost-first enumeration of value combinations.
//!
//! Each attribute's candidates are ranked by cost; the iterator walks the
//! product lattice from the all-cheapest assignment outwards, emitting
//! assignments in non-decreasing total cost.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::cost::Cost;
use crate::schema::{AttrId, Cell};

/// Candidates of one attribute sorted by (cost, value).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedDomain {
    pub attr: AttrId,
    entries: Vec<(Cell, Cost)>,
}

impl RankedDomain {
    pub fn new(attr: AttrId, mut entries: Vec<(Cell, Cost)>) -> Self {
        entries.sort_by_key(|(v, c)| (*c, *v));
        entries.dedup_by_key(|(v, _)| *v);
        RankedDomain { attr, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Cell, Cost)] {
        &self.entries
    }

    pub fn value(&self, i: u32) -> Cell {
        self.entries[i as usize].0
    }

    pub fn cost(&self, i: u32) -> Cost {
        self.entries[i as usize].1
    }

    /// Cost of the cheapest entry.
    pub fn min_cost(&self) -> Option<Cost> {
        self.entries.first().map(|(_, c)| *c)
    }
}

/// One emitted point of the lattice: an index per domain and its total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranked {
    pub indices: Vec<u32>,
    pub beta: Cost,
}

impl Ranked {
    pub fn values(&self, domains: &[RankedDomain]) -> Vec<Cell> {
        self.indices
            .iter()
            .zip(domains)
            .map(|(i, d)| d.value(*i))
            .collect()
    }
}

/// Frontier-driven iterator. Equal totals come out in lexicographic index
/// order; a visited set makes every assignment appear once.
pub struct LcfIter<'d> {
    domains: &'d [RankedDomain],
    frontier: BinaryHeap<Reverse<(Cost, Vec<u32>)>>,
    visited: HashSet<Vec<u32>>,
}

impl<'d> LcfIter<'d> {
    pub fn new(domains: &'d [RankedDomain]) -> Self {
        let mut frontier = BinaryHeap::new();
        let mut visited = HashSet::new();
        if domains.iter().all(|d| !d.is_empty()) {
            let start = vec![0u32; domains.len()];
            let beta = total(domains, &start);
            visited.insert(start.clone());
            frontier.push(Reverse((beta, start)));
        }
        LcfIter {
            domains,
            frontier,
            visited,
        }
    }

    /// Total of the next assignment without consuming it.
    pub fn peek_beta(&self) -> Option<Cost> {
        self.frontier.peek().map(|Reverse((b, _))| *b)
    }
}

fn total(domains: &[RankedDomain], indices: &[u32]) -> Cost {
    indices
        .iter()
        .zip(domains)
        .fold(0, |acc: Cost, (i, d)| acc.saturating_add(d.cost(*i)))
}

impl Iterator for LcfIter<'_> {
    type Item = Ranked;

    fn next(&mut self) -> Option<Ranked> {
        let Reverse((beta, indices)) = self.frontier.pop()?;
        for (pos, domain) in self.domains.iter().enumerate() {
            let next = indices[pos] + 1;
            if (next as usize) < domain.len() {
                let mut child = indices.clone();
                child[pos] = next;
                if self.visited.insert(child.clone()) {
                    let b = beta - domain.cost(indices[pos]) + domain.cost(next);
                    self.frontier.push(Reverse((b, child)));
                }
            }
        }
        Some(Ranked { indices, beta })
    }
}

pub fn lcf_iterate(domains: &[RankedDomain]) -> LcfIter<'_> {
    LcfIter::new(domains)
}

/// Every assignment tied with the cheapest one, and that cost.
pub fn first_batch(domains: &[RankedDomain]) -> (Vec<Ranked>, Cost) {
    let mut iter = lcf_iterate(domains);
    let Some(first) = iter.next() else {
        return (Vec::new(), 0);
    };
    let beta = first.beta;
    let mut batch = vec![first];
    while iter.peek_beta() == Some(beta) {
        batch.extend(iter.next());
    }
    (batch, beta)
}
