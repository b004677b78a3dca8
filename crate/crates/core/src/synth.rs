//! Seeded synthetic trial registry: clean data following the masking and
//! control rules, and a copy with injected errors and nulls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::schema::RawTable;

pub const RULES: &str = "\
key: trial
determined: double_blind, single_blind, open, control
rule: double_blind = 'yes' & open = 'yes'
rule: single_blind = 'yes' & open = 'yes'
rule: double_blind = 'yes' & single_blind = 'yes'
rule: double_blind = 'no' & single_blind = 'no' & open = 'no'
rule: control = 'no' & placebo = 'yes'
rule: control = 'no' & active_compare = 'yes'
";

pub const HEADER: [&str; 7] = [
    "trial",
    "double_blind",
    "single_blind",
    "open",
    "control",
    "placebo",
    "active_compare",
];

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub rows: usize,
    pub classes: usize,
    /// Chance that a non-key cell is flipped.
    pub error_rate: f64,
    /// Chance that a non-key cell is blanked.
    pub null_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rows: 100_000,
            classes: 10_000,
            error_rate: 0.05,
            null_rate: 0.01,
            seed: 0,
        }
    }
}

pub struct Synth {
    pub dirty: RawTable,
    pub gold: RawTable,
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

/// Rows are spread evenly over the classes, in class order.
pub fn generate(config: &SynthConfig) -> Synth {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let classes = config.classes.max(1);
    let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    let mut gold = Vec::with_capacity(config.rows);
    let mut dirty = Vec::with_capacity(config.rows);
    let width = classes.to_string().len();
    for k in 0..classes {
        let n = config.rows / classes + usize::from(k < config.rows % classes);
        let trial = format!("T{k:0width$}");
        let masking = rng.random_range(0..3);
        let control = rng.random_bool(0.7);
        for _ in 0..n {
            let (placebo, active) = if control {
                (rng.random_bool(0.5), rng.random_bool(0.5))
            } else {
                (false, false)
            };
            let clean: Vec<Option<String>> = vec![
                Some(trial.clone()),
                Some(yes_no(masking == 0)),
                Some(yes_no(masking == 1)),
                Some(yes_no(masking == 2)),
                Some(yes_no(control)),
                Some(yes_no(placebo)),
                Some(yes_no(active)),
            ];
            let noisy = clean
                .iter()
                .enumerate()
                .map(|(a, cell)| {
                    if a == 0 {
                        return cell.clone();
                    }
                    if rng.random_bool(config.null_rate) {
                        None
                    } else if rng.random_bool(config.error_rate) {
                        Some(yes_no(cell.as_deref() == Some("no")))
                    } else {
                        cell.clone()
                    }
                })
                .collect();
            gold.push(clean);
            dirty.push(noisy);
        }
    }
    Synth {
        dirty: RawTable {
            header: header.clone(),
            rows: dirty,
        },
        gold: RawTable { header, rows: gold },
    }
}
