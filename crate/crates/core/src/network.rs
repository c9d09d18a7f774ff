//! Steering-network objectives and control-word synthesis.
//!
//! A barrel shifter between `X` PEs and `X` banks can only realize cyclic
//! rotations. A mapping suits it when, within each access order, every
//! cycle's bank pattern (read top row first) is a rotation of the pattern at
//! cycle 0. Offsets follow `col[j] = reference[(j - r) mod X]`: offset `r`
//! moves the reference pattern `r` rows down.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{AccessOrder, AccessSchedule, SchedulePair};
use crate::solver::{Bank, BankMapping, MappingState};

/// The steering component the interconnect is built from.
///
/// Adding a kind means supplying a column-pair predicate
/// ([`NetworkObjective::columns_consistent`]) and a control-word derivation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkObjective {
    /// Any per-cycle permutation is routable.
    #[default]
    Crossbar,
    /// Only cyclic rotations of a reference pattern are routable.
    BarrelShifter,
}

impl NetworkObjective {
    pub fn is_unconstrained(self) -> bool {
        matches!(self, NetworkObjective::Crossbar)
    }

    pub fn name(self) -> &'static str {
        match self {
            NetworkObjective::Crossbar => "crossbar",
            NetworkObjective::BarrelShifter => "barrel-shifter",
        }
    }

    /// Whether two partially filled columns of the same matrix can still both
    /// be completed into patterns the network can switch between.
    pub fn columns_consistent(self, a: &[Option<Bank>], b: &[Option<Bank>]) -> bool {
        match self {
            NetworkObjective::Crossbar => true,
            NetworkObjective::BarrelShifter => partial_rotation_exists(a, b),
        }
    }
}

/// Is there a shift `s` with `b[j] = a[(j - s) mod X]` on every row where
/// both are known, and with every bank common to both sitting exactly `s`
/// rows apart?
fn partial_rotation_exists(a: &[Option<Bank>], b: &[Option<Bank>]) -> bool {
    let x = a.len();
    if a.iter().all(Option::is_none) || b.iter().all(Option::is_none) {
        return true;
    }
    (0..x).any(|s| {
        (0..x).all(|j| match (b[j], a[(j + x - s) % x]) {
            (Some(u), Some(v)) => u == v,
            _ => true,
        }) && a.iter().enumerate().all(|(i, ai)| match ai {
            Some(bank) => b
                .iter()
                .position(|bj| *bj == Some(*bank))
                .is_none_or(|j| j == (i + s) % x),
            None => true,
        })
    })
}

/// The banks of one column, indexed by PE row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnPattern(pub Vec<Bank>);

impl ColumnPattern {
    pub fn of(mapping: &BankMapping, schedule: &AccessSchedule, col: usize) -> Self {
        Self(schedule.column(col).map(|d| mapping.bank(d)).collect())
    }

    pub fn from_ids(ids: &[usize]) -> Self {
        Self(ids.iter().map(|&b| Bank(b)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Shifts the pattern `r` rows down.
    pub fn rotated(&self, r: usize) -> Self {
        let x = self.0.len();
        Self((0..x).map(|j| self.0[(j + x - r % x) % x]).collect())
    }

    pub fn is_permutation(&self) -> bool {
        let set: HashSet<Bank> = self.0.iter().copied().collect();
        set.len() == self.0.len() && self.0.iter().all(|b| b.0 < self.0.len())
    }
}

/// The offset `r` with `col[j] = reference[(j - r) mod X]`, if `col` is a
/// rotation of `reference`.
pub fn rotation_offset(reference: &ColumnPattern, col: &ColumnPattern) -> Option<usize> {
    let x = reference.len();
    if x == 0 || col.len() != x {
        return None;
    }
    let k = reference.0.iter().position(|b| *b == col.0[0])?;
    let r = (x - k) % x;
    (0..x)
        .all(|j| col.0[j] == reference.0[(j + x - r) % x])
        .then_some(r)
}

/// Whether `mapping` can be routed by the given network in both orders.
pub fn objective_compatible(
    mapping: &BankMapping,
    schedules: &SchedulePair,
    objective: NetworkObjective,
) -> bool {
    match objective {
        NetworkObjective::Crossbar => true,
        NetworkObjective::BarrelShifter => [&schedules.natural, &schedules.interleaved]
            .into_iter()
            .all(|s| {
                let reference = ColumnPattern::of(mapping, s, 0);
                (0..s.cols()).all(|t| {
                    rotation_offset(&reference, &ColumnPattern::of(mapping, s, t)).is_some()
                })
            }),
    }
}

/// Structurally legal banks for datum `d`, objective-preserving ones first,
/// ascending id within each group. `strict` drops the second group.
pub fn admissible_banks(
    state: &MappingState,
    d: usize,
    objective: NetworkObjective,
    strict: bool,
) -> Vec<Bank> {
    let free = state.free_banks(d);
    let legal = (0..state.parallelism())
        .filter(|b| free & (1u64 << b) != 0)
        .map(Bank);
    let (mut preferred, rest): (Vec<Bank>, Vec<Bank>) =
        legal.partition(|&b| state.objective_consistent_with(objective, &[(d, b)]));
    if !strict {
        preferred.extend(rest);
    }
    preferred
}

/// One cycle's network configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ControlWord {
    /// Barrel-shifter offset.
    Rotation(usize),
    /// Crossbar setting: bank reached by each PE.
    Permutation(Vec<Bank>),
}

impl ControlWord {
    /// Bank reached by PE `pe` under this word.
    pub fn route(&self, reference: &ColumnPattern, pe: usize) -> Bank {
        match self {
            ControlWord::Rotation(r) => {
                let x = reference.len();
                reference.0[(pe + x - r % x) % x]
            }
            ControlWord::Permutation(p) => p[pe],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderControls {
    /// Pattern at cycle 0; rotation words are relative to it.
    pub reference: ColumnPattern,
    pub words: Vec<ControlWord>,
    pub distinct_word_count: usize,
}

impl OrderControls {
    fn new(reference: ColumnPattern, words: Vec<ControlWord>) -> Self {
        let distinct_word_count = words.iter().collect::<HashSet<_>>().len();
        Self {
            reference,
            words,
            distinct_word_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub objective: NetworkObjective,
    pub natural: OrderControls,
    pub interleaved: OrderControls,
}

impl ControlSchedule {
    pub fn get(&self, order: AccessOrder) -> &OrderControls {
        match order {
            AccessOrder::Natural => &self.natural,
            AccessOrder::Interleaved => &self.interleaved,
        }
    }

    pub fn get_mut(&mut self, order: AccessOrder) -> &mut OrderControls {
        match order {
            AccessOrder::Natural => &mut self.natural,
            AccessOrder::Interleaved => &mut self.interleaved,
        }
    }
}

/// Per-cycle control words for both access orders.
pub fn derive_controls(
    mapping: &BankMapping,
    schedules: &SchedulePair,
    objective: NetworkObjective,
) -> Result<ControlSchedule> {
    let for_order = |s: &AccessSchedule| -> Result<OrderControls> {
        let reference = ColumnPattern::of(mapping, s, 0);
        let words = (0..s.cols())
            .map(|t| {
                let pattern = ColumnPattern::of(mapping, s, t);
                match objective {
                    NetworkObjective::Crossbar => Ok(ControlWord::Permutation(pattern.0)),
                    NetworkObjective::BarrelShifter => rotation_offset(&reference, &pattern)
                        .map(ControlWord::Rotation)
                        .ok_or(Error::ObjectiveIncompatible),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OrderControls::new(reference, words))
    };
    Ok(ControlSchedule {
        objective,
        natural: for_order(&schedules.natural)?,
        interleaved: for_order(&schedules.interleaved)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{build_schedules, Permutation, ProblemSpec};
    use crate::solver::{affect_and_report, initialize, ColumnAssignment, ColumnRef};
    use proptest::prelude::*;

    const SAMPLE_PERM: [usize; 12] = [1, 9, 10, 5, 0, 11, 2, 7, 3, 6, 8, 4];

    fn sample() -> SchedulePair {
        build_schedules(
            &ProblemSpec::new(Permutation::new(SAMPLE_PERM.to_vec()).unwrap(), 3).unwrap(),
        )
    }

    fn sample_mapping() -> BankMapping {
        BankMapping::from_bank_lists(
            &[vec![0, 1, 6, 3], vec![4, 5, 10, 7], vec![8, 9, 2, 11]],
            12,
        )
        .unwrap()
    }

    // natural-layout bank letters of the baseline's final mapping
    fn baseline_mapping() -> BankMapping {
        let rows = ["CAAC", "BBCB", "ACBA"];
        let banks = rows
            .concat()
            .bytes()
            .map(|c| Bank((c - b'A') as usize))
            .collect();
        BankMapping::new(banks, 3).unwrap()
    }

    fn p(ids: &[usize]) -> ColumnPattern {
        ColumnPattern::from_ids(ids)
    }

    #[test]
    fn rotation_offsets() {
        assert_eq!(rotation_offset(&p(&[0, 1, 2]), &p(&[2, 0, 1])), Some(1));
        assert_eq!(rotation_offset(&p(&[0, 1, 2]), &p(&[0, 1, 2])), Some(0));
        assert_eq!(rotation_offset(&p(&[0, 2, 1]), &p(&[1, 2, 0])), None);
        assert_eq!(p(&[0, 1, 2]).rotated(1), p(&[2, 0, 1]));
    }

    #[test]
    fn sample_mapping_is_barrel_compatible() {
        let s = sample();
        assert!(objective_compatible(
            &sample_mapping(),
            &s,
            NetworkObjective::BarrelShifter
        ));
        assert!(!objective_compatible(
            &baseline_mapping(),
            &s,
            NetworkObjective::BarrelShifter
        ));
        assert!(objective_compatible(
            &baseline_mapping(),
            &s,
            NetworkObjective::Crossbar
        ));
    }

    #[test]
    fn sample_controls() {
        let c = derive_controls(
            &sample_mapping(),
            &sample(),
            NetworkObjective::BarrelShifter,
        )
        .unwrap();
        let rot = |ws: &[ControlWord]| -> Vec<usize> {
            ws.iter()
                .map(|w| match w {
                    ControlWord::Rotation(r) => *r,
                    _ => panic!(),
                })
                .collect()
        };
        assert_eq!(rot(&c.natural.words), vec![0, 0, 1, 0]);
        assert_eq!(c.natural.distinct_word_count, 2);
        assert_eq!(c.natural.reference, p(&[0, 1, 2]));
        assert_eq!(rot(&c.interleaved.words), vec![0, 1, 2, 0]);
        assert_eq!(c.interleaved.reference, p(&[0, 2, 1]));
        assert_eq!(
            derive_controls(
                &baseline_mapping(),
                &sample(),
                NetworkObjective::BarrelShifter
            ),
            Err(Error::ObjectiveIncompatible)
        );
    }

    #[test]
    fn crossbar_controls_are_column_patterns() {
        let c =
            derive_controls(&baseline_mapping(), &sample(), NetworkObjective::Crossbar).unwrap();
        assert_eq!(
            c.natural.words[0],
            ControlWord::Permutation(p(&[2, 1, 0]).0)
        );
        assert_eq!(c.interleaved.distinct_word_count, 4);
    }

    #[test]
    fn single_bank_controls() {
        let s = build_schedules(
            &ProblemSpec::new(Permutation::new(vec![1, 0, 2]).unwrap(), 1).unwrap(),
        );
        let m = BankMapping::new(vec![Bank(0); 3], 1).unwrap();
        for obj in [NetworkObjective::Crossbar, NetworkObjective::BarrelShifter] {
            assert!(objective_compatible(&m, &s, obj));
        }
        let c = derive_controls(&m, &s, NetworkObjective::BarrelShifter).unwrap();
        assert!(c
            .natural
            .words
            .iter()
            .all(|w| *w == ControlWord::Rotation(0)));
        assert_eq!(c.natural.distinct_word_count, 1);
    }

    #[test]
    fn column_head_is_forced_rotation() {
        let mut state = MappingState::new(sample());
        initialize(&mut state).unwrap();
        affect_and_report(
            &mut state,
            &ColumnAssignment {
                column: ColumnRef::new(AccessOrder::Interleaved, 3),
                cells: vec![(6, Bank(0))],
            },
        )
        .unwrap();
        assert_eq!(
            admissible_banks(&state, 2, NetworkObjective::BarrelShifter, false),
            vec![Bank(2), Bank(1)]
        );
        assert_eq!(
            admissible_banks(&state, 2, NetworkObjective::BarrelShifter, true),
            vec![Bank(2)]
        );
        assert_eq!(
            admissible_banks(&state, 2, NetworkObjective::Crossbar, true),
            vec![Bank(1), Bank(2)]
        );
    }

    #[test]
    fn broken_column_has_no_preferred_banks() {
        // Natural column 0 is (0, 3, 6) and column 1 is (1, 4, 7). Column 1 gets
        // (B, A, ?), a swap of (A, B, C) that no rotation produces, while datum 7
        // still has C available.
        let law = Permutation::new(vec![2, 3, 6, 0, 8, 1, 5, 4, 7]).unwrap();
        let s = build_schedules(&ProblemSpec::new(law, 3).unwrap());
        let mut state = MappingState::new(s);
        initialize(&mut state).unwrap();
        state.assign(1, Bank(1)).unwrap();
        state.assign(4, Bank(0)).unwrap();
        let preferred: Vec<Bank> = (0..3)
            .map(Bank)
            .filter(|&b| state.free_banks(7) & (1 << b.0) != 0)
            .filter(|&b| {
                state.objective_consistent_with(NetworkObjective::BarrelShifter, &[(7, b)])
            })
            .collect();
        assert!(preferred.is_empty());
        assert_eq!(
            admissible_banks(&state, 7, NetworkObjective::BarrelShifter, false),
            vec![Bank(2)]
        );
        assert!(admissible_banks(&state, 7, NetworkObjective::BarrelShifter, true).is_empty());
    }

    #[test]
    fn partial_rotation_checks() {
        let a = [Some(Bank(0)), Some(Bank(1)), Some(Bank(2))];
        assert!(partial_rotation_exists(&a, &[None, Some(Bank(0)), None]));
        assert!(!partial_rotation_exists(
            &a,
            &[Some(Bank(1)), Some(Bank(0)), None]
        ));
        // bank 2 forced to row 0 by the shift implied by bank 0
        assert!(!partial_rotation_exists(
            &[Some(Bank(0)), None, Some(Bank(2))],
            &[None, Some(Bank(0)), Some(Bank(2))]
        ));
        assert!(partial_rotation_exists(&[None, None, None], &a));
    }

    fn perm_strategy(x: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..x).collect::<Vec<usize>>()).prop_shuffle()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn rotation_commutes_with_relabeling(
            (u, v, sigma) in (1usize..7).prop_flat_map(|x| (perm_strategy(x), perm_strategy(x), perm_strategy(x))),
            r in 0usize..7,
        ) {
            let u = ColumnPattern::from_ids(&u);
            let v = ColumnPattern::from_ids(&v);
            let relabel = |c: &ColumnPattern| ColumnPattern(c.0.iter().map(|b| Bank(sigma[b.0])).collect());
            prop_assert_eq!(rotation_offset(&relabel(&u), &relabel(&v)), rotation_offset(&u, &v));
            let w = u.rotated(r);
            prop_assert_eq!(rotation_offset(&u, &w), Some(r % u.len()));
            prop_assert_eq!(rotation_offset(&relabel(&u), &relabel(&w)), Some(r % u.len()));
        }
    }
}
