//! Picking one repair out of a class's minimal set: uniformly at random, or
//! in proportion to how often the repaired values occur in clean rows.

use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::RepairSet;
use crate::rules::EditRule;
use crate::schema::{AttrId, Cell, Relation};
use crate::sufficient::SufficientSet;

/// Index of the chosen bundle and of each row's chosen option.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Choice {
    pub bundle: usize,
    pub options: Vec<usize>,
    /// No frequency evidence was available and the choice was uniform.
    pub fallback: bool,
}

/// Value combinations of clean rows, counted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyModel {
    pub attrs: Vec<AttrId>,
    pub counts: HashMap<Vec<Cell>, u64>,
    pub total: u64,
}

impl FrequencyModel {
    pub fn count(&self, combination: &[Cell]) -> u64 {
        self.counts.get(combination).copied().unwrap_or(0)
    }

    /// Counts projected onto `attrs`, which must be a subset of the model's
    /// attributes.
    pub fn marginal(&self, attrs: &[AttrId]) -> HashMap<Vec<Cell>, u64> {
        let pos: Vec<usize> = attrs
            .iter()
            .map(|a| {
                self.attrs
                    .iter()
                    .position(|b| b == a)
                    .expect("attribute outside the frequency model")
            })
            .collect();
        let mut out: HashMap<Vec<Cell>, u64> = HashMap::new();
        for (combo, n) in &self.counts {
            let key: Vec<Cell> = pos.iter().map(|p| combo[*p]).collect();
            *out.entry(key).or_default() += n;
        }
        out
    }
}

/// Counts the `attrs` projection of every row that has no null and fails no
/// rule of `sigma`.
pub fn build_frequency_model(rel: &Relation, sigma: &SufficientSet, attrs: &[AttrId]) -> FrequencyModel {
    let mut model = FrequencyModel {
        attrs: attrs.to_vec(),
        ..FrequencyModel::default()
    };
    for row in rel.rows() {
        if row.iter().any(Option::is_none) || sigma.rules().iter().any(|r: &EditRule| r.fails(row)) {
            continue;
        }
        let key: Vec<Cell> = attrs.iter().map(|a| row[*a]).collect();
        *model.counts.entry(key).or_default() += 1;
        model.total += 1;
    }
    model
}

/// Frequency model with marginals cached per attribute list.
#[derive(Clone, Debug, Default)]
pub struct FrequencyIndex {
    model: FrequencyModel,
    marginals: BTreeMap<Vec<AttrId>, HashMap<Vec<Cell>, u64>>,
}

impl FrequencyIndex {
    pub fn new(model: FrequencyModel) -> Self {
        FrequencyIndex {
            model,
            marginals: BTreeMap::new(),
        }
    }

    /// Caches the marginals that choosing from sets over these attributes
    /// will need.
    pub fn prepare(&mut self, shared: &[AttrId], free: &[AttrId]) {
        let joint: Vec<AttrId> = shared.iter().chain(free).copied().collect();
        for attrs in [shared.to_vec(), joint] {
            if !self.marginals.contains_key(&attrs) {
                let m = self.model.marginal(&attrs);
                self.marginals.insert(attrs, m);
            }
        }
    }

    pub fn model(&self) -> &FrequencyModel {
        &self.model
    }

    fn weight(&self, attrs: &[AttrId], combination: &[Cell]) -> u64 {
        match self.marginals.get(attrs) {
            Some(m) => m.get(combination).copied().unwrap_or(0),
            None => self.model.marginal(attrs).get(combination).copied().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub enum Selector {
    #[default]
    Random,
    Frequency(FrequencyIndex),
}

impl Selector {
    pub fn choose(&self, set: &RepairSet, seed: u64) -> Choice {
        match self {
            Selector::Random => select_random(set, seed),
            Selector::Frequency(index) => select_frequent(set, index, seed),
        }
    }
}

/// Seed for one class and part, independent of scheduling.
pub fn class_seed(seed: u64, key: &[Cell], part: usize) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(&seed.to_le_bytes());
    for cell in key {
        match cell {
            Some(v) => {
                feed(&[1]);
                feed(&v.0.to_le_bytes());
            }
            None => feed(&[0]),
        }
    }
    feed(&(part as u64).to_le_bytes());
    h
}

fn uniform_bundle(set: &RepairSet, rng: &mut ChaCha8Rng) -> usize {
    let counts: Vec<u128> = set.bundles.iter().map(|b| b.count()).collect();
    if counts.windows(2).all(|w| w[0] == w[1]) {
        return rng.random_range(0..set.bundles.len());
    }
    let max = *counts.iter().max().unwrap() as f64;
    let weights: Vec<f64> = counts.iter().map(|c| *c as f64 / max).collect();
    WeightedIndex::new(&weights).unwrap().sample(rng)
}

fn uniform_options(set: &RepairSet, bundle: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    set.bundles[bundle]
        .rows
        .iter()
        .map(|opts| rng.random_range(0..opts.len()))
        .collect()
}

/// Uniform over every repair the set represents.
///
/// Panics on an empty set.
pub fn select_random(set: &RepairSet, seed: u64) -> Choice {
    assert!(!set.is_empty(), "cannot select from an empty repair set");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bundle = uniform_bundle(set, &mut rng);
    let options = uniform_options(set, bundle, &mut rng);
    Choice {
        bundle,
        options,
        fallback: false,
    }
}

fn weighted(weights: &[u64], rng: &mut ChaCha8Rng) -> Option<usize> {
    if weights.iter().all(|w| *w == 0) {
        return None;
    }
    Some(WeightedIndex::new(weights).unwrap().sample(rng))
}

/// Picks the shared values in proportion to their clean-row count, then
/// each row's free values in proportion to the count of the completed
/// combination. Without any count the pick is uniform and flagged.
///
/// Panics on an empty set.
pub fn select_frequent(set: &RepairSet, index: &FrequencyIndex, seed: u64) -> Choice {
    assert!(!set.is_empty(), "cannot select from an empty repair set");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared_weights: Vec<u64> = set
        .bundles
        .iter()
        .map(|b| index.weight(&set.shared_attrs, &b.shared))
        .collect();
    let Some(bundle) = weighted(&shared_weights, &mut rng) else {
        let bundle = uniform_bundle(set, &mut rng);
        let options = uniform_options(set, bundle, &mut rng);
        return Choice {
            bundle,
            options,
            fallback: true,
        };
    };
    let joint: Vec<AttrId> = set.shared_attrs.iter().chain(&set.row_attrs).copied().collect();
    let b = &set.bundles[bundle];
    let mut fallback = false;
    let options = b
        .rows
        .iter()
        .map(|opts| {
            let weights: Vec<u64> = opts
                .iter()
                .map(|o| {
                    let combo: Vec<Cell> = b.shared.iter().chain(o).copied().collect();
                    index.weight(&joint, &combo)
                })
                .collect();
            weighted(&weights, &mut rng).unwrap_or_else(|| {
                fallback = true;
                rng.random_range(0..opts.len())
            })
        })
        .collect();
    Choice {
        bundle,
        options,
        fallback,
    }
}
