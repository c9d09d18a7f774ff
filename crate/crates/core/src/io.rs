//! Problem, mapping and report files, plus letter-grid rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::network::{ControlSchedule, ControlWord, NetworkObjective};
use crate::schedule::{AccessSchedule, LayoutConventions, Permutation, ProblemSpec, SchedulePair};
use crate::solver::{BankMapping, SolveStats, SolveStatus, TraceEvent};
use crate::verify::Conflict;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum InputError {
    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("field \"{field}\": {source}")]
    Field {
        field: &'static str,
        #[source]
        source: Error,
    },
}

/// Problem input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub permutation: Vec<usize>,
    pub parallelism: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<NetworkObjective>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conventions: Option<LayoutConventions>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_spec(&self) -> Result<ProblemSpec, InputError> {
        let permutation =
            Permutation::new(self.permutation.clone()).map_err(|source| InputError::Field {
                field: "permutation",
                source,
            })?;
        ProblemSpec::with_conventions(
            permutation,
            self.parallelism,
            self.conventions.unwrap_or_default(),
        )
        .map_err(|source| InputError::Field {
            field: "parallelism",
            source,
        })
    }

    pub fn objective(&self) -> NetworkObjective {
        self.objective.unwrap_or_default()
    }
}

/// Mapping file: `banks[b]` lists the data stored in bank `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingFile {
    pub banks: Vec<Vec<usize>>,
}

impl MappingFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_mapping(mapping: &BankMapping) -> Self {
        Self {
            banks: mapping.bank_contents(),
        }
    }

    pub fn to_mapping(&self, len: usize) -> Result<BankMapping, InputError> {
        BankMapping::from_bank_lists(&self.banks, len).map_err(|source| InputError::Field {
            field: "banks",
            source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Backtrack,
    Baseline,
    Oracle,
}

/// Bank-letter rendering of both mapping matrices, one string per PE row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedMatrices {
    pub natural: Vec<String>,
    pub interleaved: Vec<String>,
}

impl RenderedMatrices {
    pub fn of(mapping: &BankMapping, schedules: &SchedulePair) -> Self {
        Self {
            natural: render_mapping(mapping, &schedules.natural),
            interleaved: render_mapping(mapping, &schedules.interleaved),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub tool_version: String,
    pub solver: SolverKind,
    pub problem: ProblemFile,
    pub objective: NetworkObjective,
    pub status: SolveStatus,
    pub objective_met: bool,
    #[serde(default)]
    pub relaxed: bool,
    /// `banks[b]` = data stored in bank `b`; empty when unsolved.
    pub banks: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<RenderedMatrices>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<ControlSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<SolveStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conflicts: Vec<Conflict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
}

impl SolveReport {
    pub fn new(
        solver: SolverKind,
        problem: ProblemFile,
        objective: NetworkObjective,
        status: SolveStatus,
    ) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            solver,
            problem,
            objective,
            status,
            objective_met: false,
            relaxed: false,
            banks: Vec::new(),
            matrices: None,
            controls: None,
            stats: None,
            seed: None,
            solution_count: None,
            conflicts: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn mapping_file(&self) -> MappingFile {
        MappingFile {
            banks: self.banks.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub backtrack: SolveReport,
    pub baseline: Vec<SolveReport>,
}

/// Rows of bank letters, `-` for cells without a bank.
pub fn render_grid<F>(schedule: &AccessSchedule, bank_of: F) -> Vec<String>
where
    F: Fn(usize) -> Option<String>,
{
    (0..schedule.rows())
        .map(|p| {
            schedule
                .row(p)
                .iter()
                .map(|&d| bank_of(d).unwrap_or_else(|| "-".to_string()))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn render_mapping(mapping: &BankMapping, schedule: &AccessSchedule) -> Vec<String> {
    render_grid(schedule, |d| Some(mapping.bank(d).label()))
}

/// Rows of data indices.
pub fn render_schedule(schedule: &AccessSchedule) -> Vec<String> {
    (0..schedule.rows())
        .map(|p| {
            schedule
                .row(p)
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

fn render_words(words: &[ControlWord]) -> String {
    words
        .iter()
        .map(|w| match w {
            ControlWord::Rotation(r) => r.to_string(),
            ControlWord::Permutation(p) => p.iter().map(|b| b.label()).collect::<String>(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Human-readable summary of a report.
pub fn render_pretty(report: &SolveReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:?} solver, objective {}: {:?}{}",
        report.solver,
        report.objective.name(),
        report.status,
        if report.objective_met {
            " (objective met)"
        } else {
            ""
        }
    );
    if let Some(m) = &report.matrices {
        let _ = writeln!(out, "natural mapping:");
        for row in &m.natural {
            let _ = writeln!(out, "  {row}");
        }
        let _ = writeln!(out, "interleaved mapping:");
        for row in &m.interleaved {
            let _ = writeln!(out, "  {row}");
        }
    }
    for (b, data) in report.banks.iter().enumerate() {
        let list = data
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "bank {} = {{{list}}}", crate::solver::Bank(b).label());
    }
    if let Some(c) = &report.controls {
        let _ = writeln!(
            out,
            "natural controls: {} ({} distinct)",
            render_words(&c.natural.words),
            c.natural.distinct_word_count
        );
        let _ = writeln!(
            out,
            "interleaved controls: {} ({} distinct)",
            render_words(&c.interleaved.words),
            c.interleaved.distinct_word_count
        );
    }
    for c in &report.conflicts {
        let _ = writeln!(
            out,
            "conflict: {:?} cycle {} bank {} data {} and {}",
            c.order, c.cycle, c.bank, c.data.0, c.data.1
        );
    }
    out
}
