//! Command-line front end: `repair`, `check`, `eval` and `synth`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::evaluation::{score, violation_report};
use crate::io::{load_table, save_table};
use crate::pipeline::{bind, repair_table, CostKind, Preferences, RepairRun, RepairSettings, SelectKind};
use crate::rules::EpkSet;
use crate::schema::Relation;
use crate::sufficient::DEFAULT_RULE_CAP;
use crate::synth::{self, SynthConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_UNSATISFIABLE: u8 = 3;
pub const EXIT_RULE_CAP: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "epk-repair", version, about = "Repair CSV data under edit rules and a partial key")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repair a relation and write the result and a JSON report.
    Repair(RepairArgs),
    /// Print rule and key violations of a relation.
    Check(CheckArgs),
    /// Score a repaired relation against a gold standard.
    Eval(EvalArgs),
    /// Write a synthetic dirty/gold pair and its rule file.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rules: PathBuf,
    /// Cell text read and written as null.
    #[arg(long, default_value = "")]
    pub null_token: String,
    /// Drop the synthetic fresh value from every active domain.
    #[arg(long)]
    pub closed_domains: bool,
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    #[command(flatten)]
    pub data: InputArgs,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "constant")]
    pub cost: CostKind,
    #[arg(long, default_value_t = 1)]
    pub alpha: Cost,
    #[arg(long, default_value_t = 4)]
    pub omega: u32,
    /// Directory of `<attribute>.csv` cost matrices.
    #[arg(long)]
    pub pref_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "random")]
    pub select: SelectKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only the key constraint.
    #[arg(long)]
    pub no_rules: bool,
    /// Check every class small enough against brute force.
    #[arg(long)]
    pub oracle_verify: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RULE_CAP)]
    pub rule_cap: usize,
    /// Gold standard; adds metrics to the report.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Columns aligning gold rows with input rows.
    #[arg(long = "id", value_delimiter = ',')]
    pub ids: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub data: InputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// The dirty relation.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub repaired: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long = "id", value_delimiter = ',')]
    pub ids: Vec<String>,
    #[arg(long, default_value = "")]
    pub null_token: String,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 10_000)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.05)]
    pub error_rate: f64,
    #[arg(long, default_value_t = 0.01)]
    pub null_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dirty relation.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    /// Rule file.
    #[arg(long = "rules-out")]
    pub rules_out: PathBuf,
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Unsatisfiable => EXIT_UNSATISFIABLE,
        Error::SufficientSetCap { .. } => EXIT_RULE_CAP,
        _ => EXIT_ERROR,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Repair(args) => run_repair(&args),
        Command::Check(args) => run_check(&args),
        Command::Eval(args) => run_eval(&args),
        Command::Synth(args) => run_synth(&args),
    }
}

fn load(data: &InputArgs) -> Result<(Relation, EpkSet)> {
    let raw = load_table(&data.input, &data.null_token)?;
    bind(&raw, &fs::read_to_string(&data.rules)?, false, data.closed_domains)
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    text.push('\n');
    Ok(text)
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn run_repair(args: &RepairArgs) -> Result<()> {
    let start = Instant::now();
    let raw = load_table(&args.data.input, &args.data.null_token)?;
    let rules = fs::read_to_string(&args.data.rules)?;
    let settings = RepairSettings {
        cost: args.cost,
        alpha: args.alpha,
        omega: args.omega,
        preferences: match &args.pref_dir {
            Some(dir) => Preferences::Dir(dir.clone()),
            None => Preferences::None,
        },
        select: args.select,
        seed: args.seed,
        no_rules: args.no_rules,
        oracle_verify: args.oracle_verify,
        closed_domains: args.data.closed_domains,
        rule_cap: args.rule_cap,
        threads: args.threads,
    };
    let RepairRun { repaired, mut report } = repair_table(&raw, &rules, &settings)?;
    if let Some(path) = &args.gold {
        let gold = load_table(path, &args.data.null_token)?;
        report.metrics = Some(score(&raw, &repaired, &gold, &args.ids)?);
    }
    if report.totals.unverified_classes > 0 {
        eprintln!(
            "warning: {} classes disagree with brute force",
            report.totals.unverified_classes
        );
    }
    report.config.input = display(&args.data.input);
    report.config.rules = display(&args.data.rules);
    report.config.null_token = args.data.null_token.clone();
    save_table(&args.output, &repaired, &args.data.null_token)?;
    if let Some(path) = &args.report {
        report.wall_time = start.elapsed().as_secs_f64();
        fs::write(path, json(&report)?)?;
    }
    Ok(())
}

pub fn run_check(args: &CheckArgs) -> Result<()> {
    let (rel, epk) = load(&args.data)?;
    let text = json(&violation_report(&rel, &epk))?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

pub fn run_eval(args: &EvalArgs) -> Result<()> {
    let dirty = load_table(&args.input, &args.null_token)?;
    let repaired = load_table(&args.repaired, &args.null_token)?;
    let gold = load_table(&args.gold, &args.null_token)?;
    let text = json(&score(&dirty, &repaired, &gold, &args.ids)?)?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    let rate = |name: &str, p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(Error::Input(format!("--{name} must lie in [0, 1]")))
        }
    };
    rate("error-rate", args.error_rate)?;
    rate("null-rate", args.null_rate)?;
    let data = synth::generate(&SynthConfig {
        rows: args.rows,
        classes: args.classes,
        error_rate: args.error_rate,
        null_rate: args.null_rate,
        seed: args.seed,
    });
    save_table(&args.output, &data.dirty, "")?;
    save_table(&args.gold, &data.gold, "")?;
    fs::write(&args.rules_out, synth::RULES)?;
    Ok(())
}
