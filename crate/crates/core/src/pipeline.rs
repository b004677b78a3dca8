//! End-to-end repair of a raw table: encoding, rule binding, sufficient set,
//! cost model, selection and the report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::ValueEnum;

use crate::cost::{Cost, CostModel, PreferenceTable};
use crate::dsl;
use crate::engine::{independent_parts, repair_relation, Pruning, RepairOptions};
use crate::error::{Error, Result};
use crate::evaluation::violation_report;
use crate::io::load_preferences;
use crate::oracle::DEFAULT_ORACLE_CAP;
use crate::report::{class_reports, Report, RunConfig, SufficientSetStats, Totals};
use crate::rules::EpkSet;
use crate::schema::{RawTable, Relation, Schema};
use crate::selection::{build_frequency_model, FrequencyIndex, Selector};
use crate::sufficient::{generate_sufficient_set, DEFAULT_RULE_CAP};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum CostKind {
    #[default]
    Constant,
    Reliability,
    Preference,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum SelectKind {
    #[default]
    Random,
    Frequency,
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(text, true).map_err(|_| Error::Input(format!("unknown cost model `{text}`")))
    }
}

impl FromStr for SelectKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(text, true).map_err(|_| Error::Input(format!("unknown selection `{text}`")))
    }
}

/// (from, to, cost) triples by attribute name.
pub type PreferenceEntries = BTreeMap<String, Vec<(String, String, Cost)>>;

/// Where preference tables come from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Preferences {
    #[default]
    None,
    /// `<attribute>.csv` matrices in a directory.
    Dir(PathBuf),
    Entries(PreferenceEntries),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairSettings {
    pub cost: CostKind,
    pub alpha: Cost,
    pub omega: u32,
    pub preferences: Preferences,
    pub select: SelectKind,
    pub seed: u64,
    pub no_rules: bool,
    pub oracle_verify: bool,
    pub closed_domains: bool,
    pub rule_cap: usize,
    pub threads: Option<usize>,
}

impl Default for RepairSettings {
    fn default() -> Self {
        RepairSettings {
            cost: CostKind::Constant,
            alpha: 1,
            omega: 4,
            preferences: Preferences::None,
            select: SelectKind::Random,
            seed: 0,
            no_rules: false,
            oracle_verify: false,
            closed_domains: false,
            rule_cap: DEFAULT_RULE_CAP,
            threads: None,
        }
    }
}

pub struct RepairRun {
    pub repaired: RawTable,
    pub report: Report,
}

/// Encodes `raw` with the rule constants in its domains and binds the rules.
pub fn bind(raw: &RawTable, rules: &str, no_rules: bool, closed_domains: bool) -> Result<(Relation, EpkSet)> {
    let spec = dsl::parse(rules)?;
    let constants = if no_rules { Vec::new() } else { spec.constants() };
    let rel = Relation::encode(raw, &constants, !closed_domains)?;
    let epk = spec.bind(rel.schema(), no_rules)?;
    Ok((rel, epk))
}

fn cost_model(settings: &RepairSettings, schema: &Schema) -> Result<CostModel> {
    Ok(match settings.cost {
        CostKind::Constant => CostModel::Constant { alpha: settings.alpha },
        CostKind::Reliability => CostModel::Reliability {
            alpha: settings.alpha,
            omega: settings.omega,
        },
        CostKind::Preference => {
            let tables = match &settings.preferences {
                Preferences::None => {
                    return Err(Error::Input("preference costs need preference tables".into()));
                }
                Preferences::Dir(dir) => load_preferences(dir, schema)?,
                Preferences::Entries(by_attr) => {
                    let mut tables = BTreeMap::new();
                    for (name, entries) in by_attr {
                        let attr = schema.id(name).ok_or_else(|| Error::Preference {
                            attr: name.clone(),
                            message: "no such attribute".into(),
                        })?;
                        let known = entries.iter().filter_map(|(from, to, cost)| {
                            Some(((schema.value(attr, from)?, schema.value(attr, to)?), *cost))
                        });
                        tables.insert(attr, PreferenceTable::new(name, known)?);
                    }
                    tables
                }
            };
            CostModel::Preference {
                alpha: settings.alpha,
                tables,
            }
        }
    })
}

/// Repairs `raw` under the rule file text `rules`. The report's input and
/// rules fields are left empty for the caller.
pub fn repair_table(raw: &RawTable, rules: &str, settings: &RepairSettings) -> Result<RepairRun> {
    let start = Instant::now();
    let (rel, epk) = bind(raw, rules, settings.no_rules, settings.closed_domains)?;
    let schema = rel.schema().clone();
    let sigma = generate_sufficient_set(&schema, &epk.rules, settings.rule_cap)?;
    if !sigma.is_satisfiable() {
        return Err(Error::Unsatisfiable);
    }
    let model = cost_model(settings, &schema)?;
    let selector = match settings.select {
        SelectKind::Random => Selector::Random,
        SelectKind::Frequency => {
            let mut index = FrequencyIndex::new(build_frequency_model(&rel, &sigma, &epk.non_key()));
            for p in independent_parts(&epk, &sigma) {
                index.prepare(&p.shared, &p.free);
            }
            Selector::Frequency(index)
        }
    };
    let options = RepairOptions {
        pruning: Pruning::ALL,
        seed: settings.seed,
        rule_cap: settings.rule_cap,
        oracle_cap: settings.oracle_verify.then_some(DEFAULT_ORACLE_CAP),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = settings.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker threads: {e}")))?;
    let repair = pool.install(|| repair_relation(&rel, &epk, &sigma, &model, &selector, &options))?;

    let name = |a: &usize| schema.name(*a).to_string();
    let report = Report {
        config: RunConfig {
            input: String::new(),
            rules: String::new(),
            cost: format!("{:?}", settings.cost).to_lowercase(),
            alpha: settings.alpha,
            omega: (settings.cost == CostKind::Reliability).then_some(settings.omega),
            pref_dir: match &settings.preferences {
                Preferences::Dir(dir) => Some(dir.display().to_string()),
                _ => None,
            },
            select: format!("{:?}", settings.select).to_lowercase(),
            seed: settings.seed,
            null_token: String::new(),
            no_rules: settings.no_rules,
            oracle_verify: settings.oracle_verify,
            closed_domains: settings.closed_domains,
            rule_cap: settings.rule_cap,
            key: epk.key.iter().map(name).collect(),
            determined: epk.determined.iter().map(name).collect(),
            free: epk.free.iter().map(name).collect(),
        },
        sufficient_set_stats: SufficientSetStats::new(&epk, &sigma, repair.parts.len()),
        totals: Totals::new(&repair),
        per_class: class_reports(&schema, &epk, &repair),
        violations_before: violation_report(&rel, &epk),
        violations_after: violation_report(&repair.relation, &epk),
        metrics: None,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(RepairRun {
        repaired: repair.relation.decode(),
        report,
    })
}
