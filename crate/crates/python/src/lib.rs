//! Python bindings for the repair engine.

use ::epk_repair as core;
use core::pipeline::{CostKind, PreferenceEntries, Preferences, RepairSettings, SelectKind};
use core::schema::RawTable;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

create_exception!(epk_repair, EpkError, PyValueError, "Invalid input, rules or data.");
create_exception!(epk_repair, UnsatisfiableError, EpkError, "The edit rules admit no valid tuple.");
create_exception!(epk_repair, RuleCapError, EpkError, "Sufficient-set generation exceeded its rule cap.");

fn to_py(err: core::Error) -> PyErr {
    let text = err.to_string();
    match err {
        core::Error::Unsatisfiable => UnsatisfiableError::new_err(text),
        core::Error::SufficientSetCap { .. } => RuleCapError::new_err(text),
        _ => EpkError::new_err(text),
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| EpkError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A table of optional strings with a header row.
#[pyclass(module = "epk_repair", from_py_object)]
#[derive(Clone)]
pub struct Table {
    inner: RawTable,
}

#[pymethods]
impl Table {
    #[new]
    fn new(header: Vec<String>, rows: Vec<Vec<Option<String>>>) -> PyResult<Self> {
        if let Some(i) = rows.iter().position(|r| r.len() != header.len()) {
            return Err(EpkError::new_err(format!(
                "row {} has {} cells, expected {}",
                i + 1,
                rows[i].len(),
                header.len()
            )));
        }
        Ok(Table {
            inner: RawTable { header, rows },
        })
    }

    #[getter]
    fn header(&self) -> Vec<String> {
        self.inner.header.clone()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<Option<String>>> {
        self.inner.rows.clone()
    }

    fn column(&self, name: &str) -> PyResult<Vec<Option<String>>> {
        let c = self
            .inner
            .column(name)
            .ok_or_else(|| EpkError::new_err(format!("no column `{name}`")))?;
        Ok(self.inner.rows.iter().map(|r| r[c].clone()).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    fn __eq__(&self, other: &Table) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Table(columns={:?}, rows={})", self.inner.header, self.inner.rows.len())
    }
}

/// Repaired table and its report.
#[pyclass(module = "epk_repair")]
pub struct RepairResult {
    #[pyo3(get)]
    table: Table,
    report: core::report::Report,
}

#[pymethods]
impl RepairResult {
    #[getter]
    fn total_cost(&self) -> u64 {
        self.report.totals.cost
    }

    #[getter]
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.report)
    }

    fn __repr__(&self) -> String {
        format!(
            "RepairResult(classes={}, cost={}, changed_cells={})",
            self.report.totals.classes, self.report.totals.cost, self.report.totals.changed_cells
        )
    }
}

#[pyfunction]
#[pyo3(signature = (path, null_token = ""))]
fn read_csv(path: &str, null_token: &str) -> PyResult<Table> {
    let inner = core::io::load_table(path.as_ref(), null_token).map_err(to_py)?;
    Ok(Table { inner })
}

#[pyfunction]
#[pyo3(signature = (table, path, null_token = ""))]
fn write_csv(table: &Table, path: &str, null_token: &str) -> PyResult<()> {
    core::io::save_table(path.as_ref(), &table.inner, null_token).map_err(to_py)
}

/// Repairs `table` under the rule file text `rules`.
///
/// `preferences` maps an attribute name to `(from, to, cost)` triples.
#[pyfunction]
#[pyo3(signature = (
    table, rules, *, cost = "constant", alpha = 1, omega = 4, preferences = None,
    select = "random", seed = 0, no_rules = false, oracle_verify = false,
    closed_domains = false, rule_cap = core::sufficient::DEFAULT_RULE_CAP, threads = None
))]
#[allow(clippy::too_many_arguments)]
fn repair(
    py: Python<'_>,
    table: &Table,
    rules: &str,
    cost: &str,
    alpha: u64,
    omega: u32,
    preferences: Option<PreferenceEntries>,
    select: &str,
    seed: u64,
    no_rules: bool,
    oracle_verify: bool,
    closed_domains: bool,
    rule_cap: usize,
    threads: Option<usize>,
) -> PyResult<RepairResult> {
    let settings = RepairSettings {
        cost: cost.parse::<CostKind>().map_err(to_py)?,
        alpha,
        omega,
        preferences: preferences.map_or(Preferences::None, Preferences::Entries),
        select: select.parse::<SelectKind>().map_err(to_py)?,
        seed,
        no_rules,
        oracle_verify,
        closed_domains,
        rule_cap,
        threads,
    };
    let raw = table.inner.clone();
    let rules = rules.to_string();
    let run = py
        .detach(move || core::pipeline::repair_table(&raw, &rules, &settings))
        .map_err(to_py)?;
    Ok(RepairResult {
        table: Table { inner: run.repaired },
        report: run.report,
    })
}

/// Rule and key violations of `table`.
#[pyfunction]
#[pyo3(signature = (table, rules, closed_domains = false))]
fn check<'py>(py: Python<'py>, table: &Table, rules: &str, closed_domains: bool) -> PyResult<Bound<'py, PyAny>> {
    let (rel, epk) = core::pipeline::bind(&table.inner, rules, false, closed_domains).map_err(to_py)?;
    to_dict(py, &core::evaluation::violation_report(&rel, &epk))
}

/// Precision, recall and F1 of a repair against gold.
#[pyfunction]
#[pyo3(signature = (dirty, repaired, gold, ids = Vec::new()))]
fn evaluate<'py>(
    py: Python<'py>,
    dirty: &Table,
    repaired: &Table,
    gold: &Table,
    ids: Vec<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let m = core::evaluation::score(&dirty.inner, &repaired.inner, &gold.inner, &ids).map_err(to_py)?;
    to_dict(py, &m)
}

/// The rules of the sufficient set, in rule-file syntax.
#[pyfunction]
#[pyo3(signature = (table, rules, closed_domains = false, rule_cap = core::sufficient::DEFAULT_RULE_CAP))]
fn sufficient_set(table: &Table, rules: &str, closed_domains: bool, rule_cap: usize) -> PyResult<Vec<String>> {
    let (rel, epk) = core::pipeline::bind(&table.inner, rules, false, closed_domains).map_err(to_py)?;
    let schema = rel.schema();
    let sigma = core::sufficient::generate_sufficient_set(schema, &epk.rules, rule_cap).map_err(to_py)?;
    Ok(sigma.rules().iter().map(|r| r.display(schema).to_string()).collect())
}

/// Minimal hitting sets of the given attribute-index sets.
#[pyfunction]
fn minimal_covers(edges: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let edges: Vec<Vec<usize>> = edges
        .into_iter()
        .map(|mut e| {
            e.sort_unstable();
            e.dedup();
            e
        })
        .collect();
    core::covers::minimal_hitting_sets(&edges)
}

/// A seeded dirty/gold pair and its rule file text.
#[pyfunction]
#[pyo3(signature = (rows = 1000, classes = 100, error_rate = 0.05, null_rate = 0.01, seed = 0))]
fn synthesize(rows: usize, classes: usize, error_rate: f64, null_rate: f64, seed: u64) -> PyResult<(Table, Table, String)> {
    for (name, p) in [("error_rate", error_rate), ("null_rate", null_rate)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(EpkError::new_err(format!("{name} must lie in [0, 1]")));
        }
    }
    let data = core::synth::generate(&core::synth::SynthConfig {
        rows,
        classes,
        error_rate,
        null_rate,
        seed,
    });
    Ok((
        Table { inner: data.dirty },
        Table { inner: data.gold },
        core::synth::RULES.to_string(),
    ))
}

#[pymodule(name = "epk_repair")]
fn epk_repair_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("EpkError", py.get_type::<EpkError>())?;
    m.add("UnsatisfiableError", py.get_type::<UnsatisfiableError>())?;
    m.add("RuleCapError", py.get_type::<RuleCapError>())?;
    m.add_class::<Table>()?;
    m.add_class::<RepairResult>()?;
    m.add_function(wrap_pyfunction!(read_csv, m)?)?;
    m.add_function(wrap_pyfunction!(write_csv, m)?)?;
    m.add_function(wrap_pyfunction!(repair, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(sufficient_set, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_covers, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    Ok(())
}
