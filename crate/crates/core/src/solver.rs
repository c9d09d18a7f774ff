//! Most-constrained-column backtracking search for a collision-free mapping.
//!
//! The search keeps the natural and interleaved mapping matrices side by side.
//! Column 0 of the natural matrix is seeded with the identity (bank `p` on row
//! `p`); every bank relabeling of a solution is a solution, and the rotation
//! objective is invariant under relabeling, so this loses nothing. Each step
//! then picks the column with the fewest legal completions, tries its
//! completions in objective-preferred order, mirrors every decided datum into
//! the other matrix, and backtracks chronologically on dead ends.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{self, NetworkObjective};
use crate::schedule::{build_schedules, AccessOrder, ProblemSpec, SchedulePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bank(pub usize);

impl Bank {
    pub fn id(self) -> usize {
        self.0
    }

    fn bit(self) -> u64 {
        1u64 << self.0
    }

    /// Spreadsheet-style label: A, B, ..., Z, AA, AB, ...
    pub fn label(self) -> String {
        let mut n = self.0;
        let mut out = Vec::new();
        loop {
            out.push(b'A' + (n % 26) as u8);
            if n < 26 {
                break;
            }
            n = n / 26 - 1;
        }
        out.reverse();
        String::from_utf8(out).unwrap()
    }
}

impl fmt::Display for Bank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A total assignment of data to banks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BankMapping {
    parallelism: usize,
    bank_of: Vec<Bank>,
}

impl BankMapping {
    pub fn new(bank_of: Vec<Bank>, parallelism: usize) -> Result<Self> {
        if let Some(b) = bank_of.iter().find(|b| b.0 >= parallelism) {
            return Err(Error::Invalid(format!(
                "bank {} out of range for {} banks",
                b.0, parallelism
            )));
        }
        Ok(Self {
            parallelism,
            bank_of,
        })
    }

    /// Builds a mapping from per-bank data lists (`lists[b]` = data stored in bank `b`).
    pub fn from_bank_lists(lists: &[Vec<usize>], len: usize) -> Result<Self> {
        let mut bank_of = vec![None; len];
        for (b, data) in lists.iter().enumerate() {
            for &d in data {
                let slot = bank_of
                    .get_mut(d)
                    .ok_or_else(|| Error::Invalid(format!("datum {d} out of range")))?;
                if slot.is_some() {
                    return Err(Error::Invalid(format!(
                        "datum {d} assigned to more than one bank"
                    )));
                }
                *slot = Some(Bank(b));
            }
        }
        let missing: Vec<usize> = (0..len).filter(|&d| bank_of[d].is_none()).collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteMapping(missing));
        }
        Self::new(
            bank_of.into_iter().map(Option::unwrap).collect(),
            lists.len(),
        )
    }

    pub fn parallelism(&self) -> usize {
        self.parallelism
    }

    pub fn len(&self) -> usize {
        self.bank_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bank_of.is_empty()
    }

    pub fn bank(&self, d: usize) -> Bank {
        self.bank_of[d]
    }

    pub fn banks(&self) -> &[Bank] {
        &self.bank_of
    }

    /// Data held by each bank, ascending.
    pub fn bank_contents(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.parallelism];
        for (d, b) in self.bank_of.iter().enumerate() {
            out[b.0].push(d);
        }
        out
    }

    /// Applies `sigma` to every bank id.
    pub fn relabel(&self, sigma: &[usize]) -> Self {
        Self {
            parallelism: self.parallelism,
            bank_of: self.bank_of.iter().map(|b| Bank(sigma[b.0])).collect(),
        }
    }

    /// Relabels banks in order of first use over data `0..L`, so two mappings
    /// that differ only by bank names become equal.
    pub fn canonical(&self) -> Self {
        let mut sigma = vec![usize::MAX; self.parallelism];
        let mut next = 0;
        for b in &self.bank_of {
            if sigma[b.0] == usize::MAX {
                sigma[b.0] = next;
                next += 1;
            }
        }
        for s in sigma.iter_mut().filter(|s| **s == usize::MAX) {
            *s = next;
            next += 1;
        }
        self.relabel(&sigma)
    }

    pub fn equivalent_up_to_relabeling(&self, other: &Self) -> bool {
        self.parallelism == other.parallelism && self.canonical() == other.canonical()
    }
}

/// A column of one of the two mapping matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    pub matrix: AccessOrder,
    pub index: usize,
}

impl ColumnRef {
    pub fn new(matrix: AccessOrder, index: usize) -> Self {
        Self { matrix, index }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.matrix {
            AccessOrder::Natural => "nat",
            AccessOrder::Interleaved => "int",
        };
        write!(f, "{side}[{}]", self.index)
    }
}

/// The pair of partial mapping matrices plus the datum-to-bank table.
///
/// Both matrices are stored explicitly and kept in lockstep; `trail` records
/// assignment order so any suffix can be undone exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingState {
    schedules: SchedulePair,
    map_nat: Vec<Option<Bank>>,
    map_int: Vec<Option<Bank>>,
    bank_of: Vec<Option<Bank>>,
    used_nat: Vec<u64>,
    used_int: Vec<u64>,
    trail: Vec<usize>,
}

impl MappingState {
    pub fn new(schedules: SchedulePair) -> Self {
        let len = schedules.len();
        let n = schedules.cycles();
        Self {
            schedules,
            map_nat: vec![None; len],
            map_int: vec![None; len],
            bank_of: vec![None; len],
            used_nat: vec![0; n],
            used_int: vec![0; n],
            trail: Vec::with_capacity(len),
        }
    }

    pub fn schedules(&self) -> &SchedulePair {
        &self.schedules
    }

    pub fn parallelism(&self) -> usize {
        self.schedules.parallelism()
    }

    pub fn cycles(&self) -> usize {
        self.schedules.cycles()
    }

    fn matrix(&self, order: AccessOrder) -> &[Option<Bank>] {
        match order {
            AccessOrder::Natural => &self.map_nat,
            AccessOrder::Interleaved => &self.map_int,
        }
    }

    fn used(&self, order: AccessOrder) -> &[u64] {
        match order {
            AccessOrder::Natural => &self.used_nat,
            AccessOrder::Interleaved => &self.used_int,
        }
    }

    pub fn cell(&self, order: AccessOrder, row: usize, col: usize) -> Option<Bank> {
        self.matrix(order)[row * self.cycles() + col]
    }

    pub fn bank_of(&self, d: usize) -> Option<Bank> {
        self.bank_of[d]
    }

    /// Bank pattern of a column, top row first.
    pub fn column_view(&self, col: ColumnRef) -> Vec<Option<Bank>> {
        (0..self.parallelism())
            .map(|p| self.cell(col.matrix, p, col.index))
            .collect()
    }

    /// `(row, datum)` of each empty cell in `col`.
    pub fn empty_cells(&self, col: ColumnRef) -> Vec<(usize, usize)> {
        let sched = self.schedules.get(col.matrix);
        (0..self.parallelism())
            .filter(|&p| self.cell(col.matrix, p, col.index).is_none())
            .map(|p| (p, sched.cell(p, col.index)))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.trail.len() == self.bank_of.len()
    }

    pub fn assigned_count(&self) -> usize {
        self.trail.len()
    }

    /// Banks still usable for datum `d` in both of its columns, as a bit mask.
    pub fn free_banks(&self, d: usize) -> u64 {
        let all = if self.parallelism() == 64 {
            u64::MAX
        } else {
            (1u64 << self.parallelism()) - 1
        };
        let (_, tn) = self.schedules.natural.position(d);
        let (_, ti) = self.schedules.interleaved.position(d);
        all & !(self.used_nat[tn] | self.used_int[ti])
    }

    /// Places `d` in `bank` and mirrors it into the other matrix.
    pub fn assign(&mut self, d: usize, bank: Bank) -> Result<()> {
        if bank.0 >= self.parallelism() {
            return Err(Error::InvariantViolation(format!(
                "bank {} out of range",
                bank.0
            )));
        }
        if self.bank_of[d].is_some() {
            return Err(Error::InvariantViolation(format!(
                "datum {d} already assigned"
            )));
        }
        if self.free_banks(d) & bank.bit() == 0 {
            return Err(Error::InvariantViolation(format!(
                "bank {bank} already used in a column of datum {d}"
            )));
        }
        let n = self.cycles();
        let (pn, tn) = self.schedules.natural.position(d);
        let (pi, ti) = self.schedules.interleaved.position(d);
        self.map_nat[pn * n + tn] = Some(bank);
        self.map_int[pi * n + ti] = Some(bank);
        self.used_nat[tn] |= bank.bit();
        self.used_int[ti] |= bank.bit();
        self.bank_of[d] = Some(bank);
        self.trail.push(d);
        Ok(())
    }

    /// Length of the assignment trail, usable as an undo mark.
    pub fn mark(&self) -> usize {
        self.trail.len()
    }

    /// Removes every assignment made after `mark`.
    pub fn undo_to(&mut self, mark: usize) {
        let n = self.cycles();
        while self.trail.len() > mark {
            let d = self.trail.pop().unwrap();
            let bank = self.bank_of[d].take().unwrap();
            let (pn, tn) = self.schedules.natural.position(d);
            let (pi, ti) = self.schedules.interleaved.position(d);
            self.map_nat[pn * n + tn] = None;
            self.map_int[pi * n + ti] = None;
            self.used_nat[tn] &= !bank.bit();
            self.used_int[ti] &= !bank.bit();
        }
    }

    /// Column views of one matrix with `placements` overlaid.
    fn overlaid_columns(
        &self,
        order: AccessOrder,
        placements: &[(usize, Bank)],
    ) -> Vec<Vec<Option<Bank>>> {
        let sched = self.schedules.get(order);
        let mut cols: Vec<Vec<Option<Bank>>> = (0..self.cycles())
            .map(|t| self.column_view(ColumnRef::new(order, t)))
            .collect();
        for &(d, b) in placements {
            let (p, t) = sched.position(d);
            cols[t][p] = Some(b);
        }
        cols
    }

    /// Whether tentatively placing `placements` keeps every column that
    /// receives one of them pairwise consistent with all other columns of the
    /// same matrix under `objective`.
    pub fn objective_consistent_with(
        &self,
        objective: NetworkObjective,
        placements: &[(usize, Bank)],
    ) -> bool {
        if objective.is_unconstrained() {
            return true;
        }
        for order in [AccessOrder::Natural, AccessOrder::Interleaved] {
            let sched = self.schedules.get(order);
            let mut touched: Vec<usize> = placements
                .iter()
                .map(|&(d, _)| sched.position(d).1)
                .collect();
            touched.sort_unstable();
            touched.dedup();
            if touched.is_empty() {
                continue;
            }
            let cols = self.overlaid_columns(order, placements);
            for &a in &touched {
                for (c, other) in cols.iter().enumerate() {
                    if c != a && !objective.columns_consistent(&cols[a], other) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether the whole state is objective-consistent (every column pair).
    pub fn objective_consistent(&self, objective: NetworkObjective) -> bool {
        if objective.is_unconstrained() {
            return true;
        }
        [AccessOrder::Natural, AccessOrder::Interleaved]
            .into_iter()
            .all(|order| {
                let cols = self.overlaid_columns(order, &[]);
                (0..cols.len()).all(|a| {
                    (a + 1..cols.len()).all(|c| objective.columns_consistent(&cols[a], &cols[c]))
                })
            })
    }

    /// Re-derives both structural invariants from scratch.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.cycles();
        for d in 0..self.bank_of.len() {
            let (pn, tn) = self.schedules.natural.position(d);
            let (pi, ti) = self.schedules.interleaved.position(d);
            if self.map_nat[pn * n + tn] != self.bank_of[d]
                || self.map_int[pi * n + ti] != self.bank_of[d]
            {
                return Err(Error::InvariantViolation(format!(
                    "matrices disagree on datum {d}"
                )));
            }
        }
        for order in [AccessOrder::Natural, AccessOrder::Interleaved] {
            for t in 0..n {
                let mut mask = 0u64;
                for b in self
                    .column_view(ColumnRef::new(order, t))
                    .into_iter()
                    .flatten()
                {
                    if mask & b.bit() != 0 {
                        return Err(Error::InvariantViolation(format!(
                            "bank {b} repeated in {}",
                            ColumnRef::new(order, t)
                        )));
                    }
                    mask |= b.bit();
                }
                if mask != self.used(order)[t] {
                    return Err(Error::InvariantViolation("stale column mask".into()));
                }
            }
        }
        Ok(())
    }

    pub fn to_mapping(&self) -> Option<BankMapping> {
        let banks: Option<Vec<Bank>> = self.bank_of.iter().copied().collect();
        banks.map(|b| BankMapping {
            parallelism: self.parallelism(),
            bank_of: b,
        })
    }
}

/// Seeds natural column 0 with the identity pattern.
pub fn initialize(state: &mut MappingState) -> Result<()> {
    for p in 0..state.parallelism() {
        let d = state.schedules.natural.cell(p, 0);
        state.assign(d, Bank(p))?;
    }
    Ok(())
}

/// A full assignment of the empty cells of one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnAssignment {
    pub column: ColumnRef,
    /// `(datum, bank)` per empty cell, top row first.
    pub cells: Vec<(usize, Bank)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellCandidates {
    pub row: usize,
    pub datum: usize,
    pub banks: Vec<Bank>,
}

/// Ordered candidate banks for every empty cell of a column, plus an iterator
/// over whole-column assignments in lexicographic order of those lists.
///
/// Tuples that repeat a bank are skipped. With a strict objective, tuples
/// whose joint placement breaks objective consistency are skipped as well.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub column: ColumnRef,
    pub cells: Vec<CellCandidates>,
    strict: Option<NetworkObjective>,
    cursor: Vec<usize>,
    started: bool,
    exhausted: bool,
    yielded: usize,
}

impl CandidateSet {
    /// Whether some cell has no admissible bank, so no tuple exists.
    pub fn has_dead_cell(&self) -> bool {
        self.cells.iter().any(|c| c.banks.is_empty())
    }

    /// Number of tuples yielded so far.
    pub fn yielded(&self) -> usize {
        self.yielded
    }

    pub fn next_tuple(&mut self, state: &MappingState) -> Option<ColumnAssignment> {
        if self.exhausted || self.cells.is_empty() || self.has_dead_cell() {
            self.exhausted = true;
            return None;
        }
        let last = self.cells.len() - 1;
        let mut level;
        if self.started {
            level = last;
            self.cursor[level] += 1;
        } else {
            self.started = true;
            level = 0;
            self.cursor[0] = 0;
        }
        loop {
            if self.cursor[level] >= self.cells[level].banks.len() {
                if level == 0 {
                    self.exhausted = true;
                    return None;
                }
                self.cursor[level] = 0;
                level -= 1;
                self.cursor[level] += 1;
                continue;
            }
            let bank = self.cells[level].banks[self.cursor[level]];
            let repeated = (0..level).any(|k| self.cells[k].banks[self.cursor[k]] == bank);
            if repeated {
                self.cursor[level] += 1;
                continue;
            }
            if level < last {
                level += 1;
                self.cursor[level] = 0;
                continue;
            }
            let cells: Vec<(usize, Bank)> = self
                .cells
                .iter()
                .zip(&self.cursor)
                .map(|(c, &i)| (c.datum, c.banks[i]))
                .collect();
            if let Some(obj) = self.strict {
                if !state.objective_consistent_with(obj, &cells) {
                    self.cursor[level] += 1;
                    continue;
                }
            }
            self.yielded += 1;
            return Some(ColumnAssignment {
                column: self.column,
                cells,
            });
        }
    }

    /// Counts the remaining tuples, stopping once `limit` is reached.
    pub fn count_remaining(mut self, state: &MappingState, limit: usize) -> usize {
        let mut n = 0;
        while n < limit && self.next_tuple(state).is_some() {
            n += 1;
        }
        n
    }
}

/// Candidate assignments for the empty cells of `col`.
///
/// `strict` drops banks (and tuples) that would break `objective`; otherwise
/// they are only ordered after the objective-preserving ones.
pub fn candidate_assignments(
    state: &MappingState,
    col: ColumnRef,
    objective: NetworkObjective,
    strict: bool,
) -> CandidateSet {
    let cells: Vec<CellCandidates> = state
        .empty_cells(col)
        .into_iter()
        .map(|(row, datum)| CellCandidates {
            row,
            datum,
            banks: network::admissible_banks(state, datum, objective, strict),
        })
        .collect();
    let k = cells.len();
    CandidateSet {
        column: col,
        cells,
        strict: (strict && !objective.is_unconstrained()).then_some(objective),
        cursor: vec![0; k],
        started: false,
        exhausted: false,
        yielded: 0,
    }
}

/// Picks the open column with the fewest legal completions.
///
/// Ties go to the column with fewer empty cells, then the interleaved matrix,
/// then the lower column index. Returns the column and its completion count.
pub fn select_target_column(
    state: &MappingState,
    objective: NetworkObjective,
    strict: bool,
) -> Option<(ColumnRef, usize)> {
    let mut best: Option<(usize, usize, ColumnRef)> = None;
    for matrix in [AccessOrder::Interleaved, AccessOrder::Natural] {
        for index in 0..state.cycles() {
            let col = ColumnRef::new(matrix, index);
            let empties = state.empty_cells(col).len();
            if empties == 0 {
                continue;
            }
            let limit = best.map_or(usize::MAX, |(c, _, _)| c.saturating_add(1));
            let count =
                candidate_assignments(state, col, objective, strict).count_remaining(state, limit);
            let better = match best {
                None => true,
                Some((bc, be, _)) => count < bc || (count == bc && empties < be),
            };
            if better {
                best = Some((count, empties, col));
            }
        }
    }
    best.map(|(count, _, col)| (col, count))
}

/// Fills the empty cells named by `assignment` and mirrors them into the
/// other matrix. Fails only if the assignment is not drawn from the current
/// candidate set.
pub fn affect_and_report(state: &mut MappingState, assignment: &ColumnAssignment) -> Result<()> {
    let sched = state.schedules.get(assignment.column.matrix);
    for &(d, _) in &assignment.cells {
        if sched.position(d).1 != assignment.column.index {
            return Err(Error::InvariantViolation(format!(
                "datum {d} is not in column {}",
                assignment.column
            )));
        }
    }
    let mark = state.mark();
    for &(d, b) in &assignment.cells {
        if let Err(e) = state.assign(d, b) {
            state.undo_to(mark);
            return Err(e);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// After a failed objective-constrained search, search again with the
    /// objective used for ordering only.
    pub relax_on_objective_failure: bool,
    /// Maximum number of column assignments tried over the whole solve.
    pub max_nodes: Option<u64>,
    /// Record every selection, assignment and backtrack.
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            relax_on_objective_failure: true,
            max_nodes: None,
            trace: false,
        }
    }
}

impl SolveOptions {
    pub fn strict() -> Self {
        Self {
            relax_on_objective_failure: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Solved,
    Infeasible,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Column assignments applied.
    pub nodes: u64,
    /// Column assignments undone.
    pub backtracks: u64,
    /// Deepest stack of simultaneously applied column assignments.
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Initialized {
        cells: Vec<(usize, Bank)>,
    },
    Selected {
        column: ColumnRef,
        completions: usize,
    },
    Assigned {
        column: ColumnRef,
        rank: usize,
        cells: Vec<(usize, Bank)>,
    },
    Backtracked {
        column: ColumnRef,
    },
    Relaxed,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = |c: &[(usize, Bank)]| {
            c.iter()
                .map(|(d, b)| format!("{d}->{b}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            TraceEvent::Initialized { cells: c } => write!(f, "init {}", cells(c)),
            TraceEvent::Selected {
                column,
                completions,
            } => {
                write!(f, "select {column} ({completions} completions)")
            }
            TraceEvent::Assigned {
                column,
                rank,
                cells: c,
            } => write!(f, "assign {column} #{rank}: {}", cells(c)),
            TraceEvent::Backtracked { column } => write!(f, "backtrack {column}"),
            TraceEvent::Relaxed => write!(f, "objective unreachable, relaxing"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub mapping: Option<BankMapping>,
    pub objective_met: bool,
    /// The returned mapping came from the relaxed second search.
    pub relaxed: bool,
    pub stats: SolveStats,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEvent>,
}

struct Frame {
    candidates: CandidateSet,
    mark: Option<usize>,
}

struct Search<'a> {
    objective: NetworkObjective,
    options: &'a SolveOptions,
    stats: SolveStats,
    trace: Vec<TraceEvent>,
}

impl Search<'_> {
    fn log(&mut self, ev: impl FnOnce() -> TraceEvent) {
        if self.options.trace {
            self.trace.push(ev());
        }
    }

    fn over_budget(&self) -> bool {
        self.options
            .max_nodes
            .is_some_and(|m| self.stats.nodes >= m)
    }

    /// One exhaustive depth-first pass from a freshly initialized state.
    fn run(&mut self, state: &mut MappingState, strict: bool) -> Result<SolveStatus> {
        let base = state.mark();
        let mut stack: Vec<Frame> = Vec::new();
        loop {
            // descend
            match select_target_column(state, self.objective, strict) {
                None => return Ok(SolveStatus::Solved),
                Some((col, completions)) => {
                    self.log(|| TraceEvent::Selected {
                        column: col,
                        completions,
                    });
                    stack.push(Frame {
                        candidates: candidate_assignments(state, col, self.objective, strict),
                        mark: None,
                    });
                }
            }
            // advance the deepest frame that still has candidates
            loop {
                let Some(top) = stack.last_mut() else {
                    state.undo_to(base);
                    return Ok(SolveStatus::Infeasible);
                };
                if let Some(mark) = top.mark.take() {
                    state.undo_to(mark);
                    self.stats.backtracks += 1;
                    let column = top.candidates.column;
                    if self.options.trace {
                        self.trace.push(TraceEvent::Backtracked { column });
                    }
                }
                match top.candidates.next_tuple(state) {
                    Some(assignment) => {
                        if self.over_budget() {
                            return Ok(SolveStatus::BudgetExhausted);
                        }
                        let mark = state.mark();
                        affect_and_report(state, &assignment)?;
                        top.mark = Some(mark);
                        self.stats.nodes += 1;
                        let rank = top.candidates.yielded() - 1;
                        let depth = stack.len();
                        self.stats.max_depth = self.stats.max_depth.max(depth);
                        self.log(|| TraceEvent::Assigned {
                            column: assignment.column,
                            rank,
                            cells: assignment.cells,
                        });
                        break;
                    }
                    None => {
                        stack.pop();
                    }
                }
            }
        }
    }
}

/// Searches for a collision-free mapping of `spec` that, when possible,
/// satisfies `objective`.
pub fn memmap_solve(
    spec: &ProblemSpec,
    objective: NetworkObjective,
    options: &SolveOptions,
) -> SolveOutcome {
    let schedules = build_schedules(spec);
    solve_schedules(&schedules, objective, options)
}

/// [`memmap_solve`] on prebuilt schedules.
pub fn solve_schedules(
    schedules: &SchedulePair,
    objective: NetworkObjective,
    options: &SolveOptions,
) -> SolveOutcome {
    let mut search = Search {
        objective,
        options,
        stats: SolveStats::default(),
        trace: Vec::new(),
    };
    let mut state = MappingState::new(schedules.clone());
    initialize(&mut state).expect("identity seed on an empty state is always legal");
    search.log(|| TraceEvent::Initialized {
        cells: (0..schedules.parallelism())
            .map(|p| (schedules.natural.cell(p, 0), Bank(p)))
            .collect(),
    });

    let constrained = !objective.is_unconstrained();
    let mut relaxed = false;
    let mut status = if constrained && !state.objective_consistent(objective) {
        SolveStatus::Infeasible
    } else {
        search
            .run(&mut state, constrained)
            .expect("candidate tuples are always legal")
    };
    if status == SolveStatus::Infeasible && constrained && options.relax_on_objective_failure {
        search.log(|| TraceEvent::Relaxed);
        relaxed = true;
        status = search
            .run(&mut state, false)
            .expect("candidate tuples are always legal");
    }

    let mapping =
        (status == SolveStatus::Solved).then(|| state.to_mapping().expect("solved state is total"));
    let objective_met = mapping
        .as_ref()
        .is_some_and(|m| network::objective_compatible(m, schedules, objective));
    SolveOutcome {
        status,
        mapping,
        objective_met,
        relaxed,
        stats: search.stats,
        trace: search.trace,
    }
}
