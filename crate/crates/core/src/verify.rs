//! Independent checks: collision verifier, access simulator and an exhaustive
//! mapping enumerator for small instances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{objective_compatible, ControlSchedule, NetworkObjective};
use crate::schedule::{AccessOrder, SchedulePair};
use crate::solver::{Bank, BankMapping};

/// Two data accessed in the same cycle that live in the same bank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub order: AccessOrder,
    pub cycle: usize,
    pub bank: Bank,
    pub data: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub conflicts: Vec<Conflict>,
    /// Compatibility with each objective that was asked about.
    pub objective_met: BTreeMap<NetworkObjective, bool>,
    /// Data held by each bank, ascending.
    pub bank_contents: Vec<Vec<usize>>,
}

fn check_shape(mapping: &BankMapping, schedules: &SchedulePair) -> Result<()> {
    let len = schedules.len();
    if mapping.len() < len {
        return Err(Error::IncompleteMapping((mapping.len()..len).collect()));
    }
    if mapping.len() > len {
        return Err(Error::Invalid(format!(
            "mapping covers {} data but the block has {len}",
            mapping.len()
        )));
    }
    if mapping.parallelism() != schedules.parallelism() {
        return Err(Error::Invalid(format!(
            "mapping uses {} banks but the problem has {}",
            mapping.parallelism(),
            schedules.parallelism()
        )));
    }
    Ok(())
}

/// Checks that no cycle of either order touches a bank twice.
pub fn verify_mapping(
    mapping: &BankMapping,
    schedules: &SchedulePair,
) -> Result<VerificationReport> {
    verify_mapping_with(mapping, schedules, &[])
}

/// [`verify_mapping`], also reporting compatibility with each of `objectives`.
pub fn verify_mapping_with(
    mapping: &BankMapping,
    schedules: &SchedulePair,
    objectives: &[NetworkObjective],
) -> Result<VerificationReport> {
    check_shape(mapping, schedules)?;
    let mut conflicts = Vec::new();
    for order in [AccessOrder::Natural, AccessOrder::Interleaved] {
        let sched = schedules.get(order);
        for t in 0..sched.cols() {
            let mut holder: Vec<Option<usize>> = vec![None; mapping.parallelism()];
            for d in sched.column(t) {
                let b = mapping.bank(d);
                match holder[b.0] {
                    Some(first) => conflicts.push(Conflict {
                        order,
                        cycle: t,
                        bank: b,
                        data: (first, d),
                    }),
                    None => holder[b.0] = Some(d),
                }
            }
        }
    }
    let objective_met = objectives
        .iter()
        .map(|&o| (o, objective_compatible(mapping, schedules, o)))
        .collect();
    Ok(VerificationReport {
        valid: conflicts.is_empty(),
        conflicts,
        objective_met,
        bank_contents: mapping.bank_contents(),
    })
}

/// Pairwise restatement of the mapping-function definition: any two distinct
/// data in the same block of either partition must get different banks.
/// Shares no code with [`verify_mapping`].
pub fn satisfies_definition(mapping: &BankMapping, schedules: &SchedulePair) -> bool {
    let len = schedules.len();
    if mapping.len() != len {
        return false;
    }
    // datum -> block index, one table per partition
    let mut natural_block = vec![0; len];
    let mut interleaved_block = vec![0; len];
    for p in 0..schedules.parallelism() {
        for (t, &d) in schedules.natural.row(p).iter().enumerate() {
            natural_block[d] = t;
        }
        for (t, &d) in schedules.interleaved.row(p).iter().enumerate() {
            interleaved_block[d] = t;
        }
    }
    let banks = mapping.banks();
    for i in 0..len {
        for j in i + 1..len {
            let same_block = natural_block[i] == natural_block[j]
                || interleaved_block[i] == interleaved_block[j];
            if same_block && banks[i] == banks[j] {
                return false;
            }
        }
    }
    true
}

/// One PE's access in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Access {
    pub pe: usize,
    pub datum: usize,
    pub bank: Bank,
}

/// Cycle-by-cycle record of both access orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessTrace {
    pub natural: Vec<Vec<Access>>,
    pub interleaved: Vec<Vec<Access>>,
}

/// Executes both access orders against `mapping`. When `controls` is given,
/// every access is also routed through the control word of its cycle and must
/// land in the bank the mapping prescribes.
pub fn simulate(
    mapping: &BankMapping,
    schedules: &SchedulePair,
    controls: Option<&ControlSchedule>,
) -> Result<AccessTrace> {
    check_shape(mapping, schedules)?;
    let run = |order: AccessOrder| -> Result<Vec<Vec<Access>>> {
        let sched = schedules.get(order);
        (0..sched.cols())
            .map(|t| {
                (0..sched.rows())
                    .map(|pe| {
                        let datum = sched.cell(pe, t);
                        let bank = mapping.bank(datum);
                        if let Some(c) = controls {
                            let oc = c.get(order);
                            let routed = oc.words.get(t).map(|w| w.route(&oc.reference, pe));
                            if routed != Some(bank) {
                                return Err(Error::ControlMismatch {
                                    order,
                                    cycle: t,
                                    pe,
                                });
                            }
                        }
                        Ok(Access { pe, datum, bank })
                    })
                    .collect()
            })
            .collect()
    };
    Ok(AccessTrace {
        natural: run(AccessOrder::Natural)?,
        interleaved: run(AccessOrder::Interleaved)?,
    })
}

pub const ORACLE_MAX_LEN: usize = 16;
pub const ORACLE_MAX_PARALLELISM: usize = 4;

/// Every collision-free mapping (that also satisfies `objective`), found by
/// trying each permutation of banks on each natural column. With
/// `fix_first_column` only mappings with bank `p` on row `p` of natural
/// column 0 are listed. Order is lexicographic in the per-column permutations.
pub fn brute_force_solve(
    schedules: &SchedulePair,
    objective: NetworkObjective,
    fix_first_column: bool,
) -> Result<Vec<BankMapping>> {
    let len = schedules.len();
    let x = schedules.parallelism();
    if len > ORACLE_MAX_LEN || x > ORACLE_MAX_PARALLELISM {
        return Err(Error::InstanceTooLarge(len, x));
    }
    let perms = permutations(x);
    let mut out = Vec::new();
    let mut banks = vec![Bank(0); len];
    let mut int_used = vec![vec![false; x]; schedules.cycles()];
    enumerate_column(
        0,
        schedules,
        &perms,
        fix_first_column,
        &mut banks,
        &mut int_used,
        &mut |banks| {
            let m = BankMapping::new(banks.to_vec(), x).expect("banks below x");
            if objective_compatible(&m, schedules, objective) {
                out.push(m);
            }
        },
    );
    Ok(out)
}

fn enumerate_column(
    t: usize,
    schedules: &SchedulePair,
    perms: &[Vec<usize>],
    fix_first_column: bool,
    banks: &mut Vec<Bank>,
    int_used: &mut Vec<Vec<bool>>,
    emit: &mut dyn FnMut(&[Bank]),
) {
    if t == schedules.cycles() {
        emit(banks);
        return;
    }
    let x = schedules.parallelism();
    let column: Vec<usize> = schedules.natural.column(t).collect();
    let choices: &[Vec<usize>] = if t == 0 && fix_first_column {
        &perms[..1]
    } else {
        perms
    };
    for perm in choices {
        let clash = (0..x).any(|p| {
            let (_, ti) = schedules.interleaved.position(column[p]);
            int_used[ti][perm[p]]
        });
        if clash {
            continue;
        }
        for p in 0..x {
            let (_, ti) = schedules.interleaved.position(column[p]);
            int_used[ti][perm[p]] = true;
            banks[column[p]] = Bank(perm[p]);
        }
        enumerate_column(
            t + 1,
            schedules,
            perms,
            fix_first_column,
            banks,
            int_used,
            emit,
        );
        for p in 0..x {
            let (_, ti) = schedules.interleaved.position(column[p]);
            int_used[ti][perm[p]] = false;
        }
    }
}

/// All permutations of `0..n` in lexicographic order, identity first.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(n, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}
