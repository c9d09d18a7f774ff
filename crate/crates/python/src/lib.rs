//! Python bindings for the bank-mapping solver.
//!
//! Banks are plain integers on the Python side; mappings are passed around
//! as per-bank data lists (`banks[b]` = data stored in bank `b`).

use bankmap::baseline::{baseline_solve, build_tiles};
use bankmap::network::{self, ColumnPattern, ControlWord, NetworkObjective, OrderControls};
use bankmap::schedule::{build_schedules, Permutation, ProblemSpec, SchedulePair};
use bankmap::solver::{memmap_solve, BankMapping, SolveOptions, SolveStatus};
use bankmap::verify::{brute_force_solve, verify_mapping_with};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

type Rows = Vec<Vec<usize>>;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_objective(name: &str) -> PyResult<NetworkObjective> {
    match name {
        "crossbar" => Ok(NetworkObjective::Crossbar),
        "barrel-shifter" | "barrel_shifter" | "barrel" => Ok(NetworkObjective::BarrelShifter),
        other => Err(value_err(format!("unknown objective {other:?}"))),
    }
}

fn problem(permutation: Vec<usize>, parallelism: usize) -> PyResult<(ProblemSpec, SchedulePair)> {
    let perm = Permutation::new(permutation).map_err(value_err)?;
    let spec = ProblemSpec::new(perm, parallelism).map_err(value_err)?;
    let schedules = build_schedules(&spec);
    Ok((spec, schedules))
}

fn words(controls: &OrderControls) -> Vec<Vec<usize>> {
    controls
        .words
        .iter()
        .map(|w| match w {
            ControlWord::Rotation(r) => vec![*r],
            ControlWord::Permutation(p) => p.iter().map(|b| b.id()).collect(),
        })
        .collect()
}

/// Outcome of `solve`.
#[pyclass(frozen, get_all)]
pub struct SolveResult {
    /// "solved", "infeasible" or "budget-exhausted".
    pub status: String,
    /// Data per bank, or None when unsolved.
    pub banks: Option<Vec<Vec<usize>>>,
    /// Bank per datum, or None when unsolved.
    pub bank_of: Option<Vec<usize>>,
    pub objective_met: bool,
    pub relaxed: bool,
    pub nodes: u64,
    pub backtracks: u64,
    pub max_depth: usize,
    /// Per-cycle control words: `[r]` for a rotation, the PE->bank list for a crossbar.
    pub natural_controls: Option<Vec<Vec<usize>>>,
    pub interleaved_controls: Option<Vec<Vec<usize>>>,
    pub natural_distinct_words: Option<usize>,
    pub trace: Vec<String>,
}

#[pymethods]
impl SolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(status={:?}, objective_met={}, banks={:?})",
            self.status, self.objective_met, self.banks
        )
    }
}

/// Outcome of `verify`.
#[pyclass(frozen, get_all)]
pub struct VerifyResult {
    pub valid: bool,
    /// `(order, cycle, bank, datum_a, datum_b)` per collision.
    pub conflicts: Vec<(String, usize, usize, usize, usize)>,
    pub barrel_compatible: bool,
    pub bank_contents: Vec<Vec<usize>>,
}

/// Natural and interleaved access matrices, each as rows of data indices.
#[pyfunction]
fn schedules(permutation: Vec<usize>, parallelism: usize) -> PyResult<(Rows, Rows)> {
    let (_, s) = problem(permutation, parallelism)?;
    Ok((s.natural.to_rows(), s.interleaved.to_rows()))
}

#[pyfunction]
#[pyo3(signature = (permutation, parallelism, objective = "barrel-shifter", strict = false, max_nodes = None, trace = false))]
fn solve(
    permutation: Vec<usize>,
    parallelism: usize,
    objective: &str,
    strict: bool,
    max_nodes: Option<u64>,
    trace: bool,
) -> PyResult<SolveResult> {
    let objective = parse_objective(objective)?;
    let (spec, schedules) = problem(permutation, parallelism)?;
    let options = SolveOptions {
        relax_on_objective_failure: !strict,
        max_nodes,
        trace,
    };
    let out = memmap_solve(&spec, objective, &options);
    let controls = out.mapping.as_ref().and_then(|m| {
        let obj = if out.objective_met {
            objective
        } else {
            NetworkObjective::Crossbar
        };
        network::derive_controls(m, &schedules, obj).ok()
    });
    Ok(SolveResult {
        status: match out.status {
            SolveStatus::Solved => "solved",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::BudgetExhausted => "budget-exhausted",
        }
        .to_string(),
        banks: out.mapping.as_ref().map(BankMapping::bank_contents),
        bank_of: out
            .mapping
            .as_ref()
            .map(|m| m.banks().iter().map(|b| b.id()).collect()),
        objective_met: out.objective_met,
        relaxed: out.relaxed,
        nodes: out.stats.nodes,
        backtracks: out.stats.backtracks,
        max_depth: out.stats.max_depth,
        natural_controls: controls.as_ref().map(|c| words(&c.natural)),
        interleaved_controls: controls.as_ref().map(|c| words(&c.interleaved)),
        natural_distinct_words: controls.as_ref().map(|c| c.natural.distinct_word_count),
        trace: out.trace.iter().map(ToString::to_string).collect(),
    })
}

#[pyfunction]
fn verify(
    permutation: Vec<usize>,
    parallelism: usize,
    banks: Vec<Vec<usize>>,
) -> PyResult<VerifyResult> {
    let (spec, schedules) = problem(permutation, parallelism)?;
    let mapping = BankMapping::from_bank_lists(&banks, spec.len()).map_err(value_err)?;
    let report = verify_mapping_with(&mapping, &schedules, &[NetworkObjective::BarrelShifter])
        .map_err(value_err)?;
    Ok(VerifyResult {
        valid: report.valid,
        conflicts: report
            .conflicts
            .iter()
            .map(|c| {
                let order = format!("{:?}", c.order).to_lowercase();
                (order, c.cycle, c.bank.id(), c.data.0, c.data.1)
            })
            .collect(),
        barrel_compatible: report.objective_met[&NetworkObjective::BarrelShifter],
        bank_contents: report.bank_contents,
    })
}

/// Greedy fill plus chain repair; returns data per bank.
#[pyfunction]
#[pyo3(signature = (permutation, parallelism, seed = 0))]
fn baseline(permutation: Vec<usize>, parallelism: usize, seed: u64) -> PyResult<Vec<Vec<usize>>> {
    let (_, schedules) = problem(permutation, parallelism)?;
    let m = baseline_solve(&schedules, seed).map_err(value_err)?;
    Ok(m.bank_contents())
}

/// Interleaved cycle of each natural-layout cell.
#[pyfunction]
fn tiles(permutation: Vec<usize>, parallelism: usize) -> PyResult<Vec<Vec<usize>>> {
    let (_, schedules) = problem(permutation, parallelism)?;
    Ok(build_tiles(&schedules).to_rows())
}

#[pyfunction]
fn rotation_offset(reference: Vec<usize>, column: Vec<usize>) -> Option<usize> {
    network::rotation_offset(
        &ColumnPattern::from_ids(&reference),
        &ColumnPattern::from_ids(&column),
    )
}

/// Every mapping of a small instance, as bank-per-datum lists.
#[pyfunction]
#[pyo3(signature = (permutation, parallelism, objective = "crossbar", fix_first_column = true))]
fn brute_force(
    permutation: Vec<usize>,
    parallelism: usize,
    objective: &str,
    fix_first_column: bool,
) -> PyResult<Vec<Vec<usize>>> {
    let objective = parse_objective(objective)?;
    let (_, schedules) = problem(permutation, parallelism)?;
    let all = brute_force_solve(&schedules, objective, fix_first_column).map_err(value_err)?;
    Ok(all
        .iter()
        .map(|m| m.banks().iter().map(|b| b.id()).collect())
        .collect())
}

#[pymodule]
fn pybankmap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SolveResult>()?;
    m.add_class::<VerifyResult>()?;
    m.add_function(wrap_pyfunction!(schedules, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(baseline, m)?)?;
    m.add_function(wrap_pyfunction!(tiles, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_offset, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    Ok(())
}
