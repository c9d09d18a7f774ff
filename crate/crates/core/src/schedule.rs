//! Interleaving laws and the two reference access matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the parallelism degree. Banks are tracked as bits of a `u64`.
pub const MAX_PARALLELISM: usize = 64;

/// A validated interleaving law: a bijection on `0..L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        validate_permutation(&entries)?;
        Ok(Self(entries))
    }

    pub fn identity(len: usize) -> Self {
        Self((0..len).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

/// Checks that `entries` is a bijection on `0..entries.len()`.
pub fn validate_permutation(entries: &[usize]) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut seen = vec![false; entries.len()];
    for &e in entries {
        let slot = seen.get_mut(e).ok_or(Error::OutOfRange(e))?;
        if *slot {
            return Err(Error::DuplicateEntry(e));
        }
        *slot = true;
    }
    Ok(())
}

/// How a linear access sequence is laid out over the `X x N` matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FillOrder {
    /// PE `p` owns the contiguous block `p*N .. (p+1)*N`: `cell(p, t) = seq[p*N + t]`.
    RowMajorBlocks,
    /// `X` consecutive elements per cycle: `cell(p, t) = seq[t*X + p]`.
    ColumnMajorSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConventions {
    #[serde(default = "default_natural")]
    pub natural_fill: FillOrder,
    #[serde(default = "default_interleaved")]
    pub interleaved_fill: FillOrder,
}

fn default_natural() -> FillOrder {
    FillOrder::RowMajorBlocks
}

fn default_interleaved() -> FillOrder {
    FillOrder::ColumnMajorSequence
}

impl Default for LayoutConventions {
    fn default() -> Self {
        Self {
            natural_fill: default_natural(),
            interleaved_fill: default_interleaved(),
        }
    }
}

/// A permutation together with the parallelism degree `X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    pub permutation: Permutation,
    parallelism: usize,
    pub conventions: LayoutConventions,
}

impl ProblemSpec {
    pub fn new(permutation: Permutation, parallelism: usize) -> Result<Self> {
        Self::with_conventions(permutation, parallelism, LayoutConventions::default())
    }

    pub fn with_conventions(
        permutation: Permutation,
        parallelism: usize,
        conventions: LayoutConventions,
    ) -> Result<Self> {
        let len = permutation.len();
        if parallelism == 0 || parallelism > MAX_PARALLELISM {
            return Err(Error::UnsupportedParallelism {
                got: parallelism,
                max: MAX_PARALLELISM,
            });
        }
        if !len.is_multiple_of(parallelism) {
            return Err(Error::NonDivisorParallelism(parallelism, len));
        }
        Ok(Self {
            permutation,
            parallelism,
            conventions,
        })
    }

    /// Block length `L`.
    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    /// Number of PEs and banks, `X`.
    pub fn parallelism(&self) -> usize {
        self.parallelism
    }

    /// Number of cycles, `N = L / X`.
    pub fn cycles(&self) -> usize {
        self.len() / self.parallelism
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessOrder {
    Natural,
    Interleaved,
}

impl AccessOrder {
    pub fn other(self) -> Self {
        match self {
            AccessOrder::Natural => AccessOrder::Interleaved,
            AccessOrder::Interleaved => AccessOrder::Natural,
        }
    }
}

/// An `X`-row by `N`-column matrix of data indices. Column `t` holds the data
/// accessed concurrently at cycle `t`; row `p` is the access stream of PE `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessSchedule {
    order: AccessOrder,
    rows: usize,
    cols: usize,
    cells: Vec<usize>,
    // datum -> (row, col)
    position: Vec<(usize, usize)>,
}

impl AccessSchedule {
    fn from_sequence(order: AccessOrder, seq: &[usize], rows: usize, fill: FillOrder) -> Self {
        let len = seq.len();
        let cols = len / rows;
        let mut cells = vec![0; len];
        let mut position = vec![(0, 0); len];
        for p in 0..rows {
            for t in 0..cols {
                let d = match fill {
                    FillOrder::RowMajorBlocks => seq[p * cols + t],
                    FillOrder::ColumnMajorSequence => seq[t * rows + p],
                };
                cells[p * cols + t] = d;
                position[d] = (p, t);
            }
        }
        Self {
            order,
            rows,
            cols,
            cells,
            position,
        }
    }

    pub fn order(&self) -> AccessOrder {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, row: usize, col: usize) -> usize {
        self.cells[row * self.cols + col]
    }

    /// `(row, col)` of datum `d`.
    pub fn position(&self, d: usize) -> (usize, usize) {
        self.position[d]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows).map(move |p| self.cell(p, col))
    }

    pub fn row(&self, row: usize) -> &[usize] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        (0..self.rows).map(|p| self.row(p).to_vec()).collect()
    }
}

impl fmt::Display for AccessSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in 0..self.rows {
            let row: Vec<String> = self.row(p).iter().map(|d| d.to_string()).collect();
            writeln!(f, "{}", row.join("\t"))?;
        }
        Ok(())
    }
}

/// The natural and interleaved access schedules of one problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulePair {
    pub natural: AccessSchedule,
    pub interleaved: AccessSchedule,
}

impl SchedulePair {
    pub fn get(&self, order: AccessOrder) -> &AccessSchedule {
        match order {
            AccessOrder::Natural => &self.natural,
            AccessOrder::Interleaved => &self.interleaved,
        }
    }

    pub fn parallelism(&self) -> usize {
        self.natural.rows
    }

    pub fn cycles(&self) -> usize {
        self.natural.cols
    }

    pub fn len(&self) -> usize {
        self.natural.len()
    }

    pub fn is_empty(&self) -> bool {
        self.natural.is_empty()
    }
}

/// Lays out the natural sequence `0..L` and the interleaved sequence `Π`
/// according to the problem's conventions.
pub fn build_schedules(spec: &ProblemSpec) -> SchedulePair {
    let x = spec.parallelism();
    let natural_seq: Vec<usize> = (0..spec.len()).collect();
    SchedulePair {
        natural: AccessSchedule::from_sequence(
            AccessOrder::Natural,
            &natural_seq,
            x,
            spec.conventions.natural_fill,
        ),
        interleaved: AccessSchedule::from_sequence(
            AccessOrder::Interleaved,
            spec.permutation.as_slice(),
            x,
            spec.conventions.interleaved_fill,
        ),
    }
}
