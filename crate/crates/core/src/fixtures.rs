//! Pinned oracle results, keyed by an instance hash.
//!
//! The checked-in file is regenerated with
//! `cargo run -p bankmap --example gen_fixtures`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::network::NetworkObjective;
use crate::schedule::{build_schedules, ProblemSpec};
use crate::verify::brute_force_solve;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub permutation: Vec<usize>,
    pub parallelism: usize,
    pub objective: NetworkObjective,
    /// Oracle solutions with the identity first natural column.
    pub solution_count: usize,
    /// First oracle solution as a bank id per datum.
    pub sample_solution: Option<Vec<usize>>,
}

pub type Fixtures = BTreeMap<String, FixtureEntry>;

/// First 16 hex digits of SHA-256 over a canonical text form of the instance.
pub fn instance_hash(
    permutation: &[usize],
    parallelism: usize,
    objective: NetworkObjective,
) -> String {
    let perm = permutation
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",");
    let text = format!("x={parallelism};objective={};perm={perm}", objective.name());
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Runs the oracle on one instance.
pub fn compute_entry(spec: &ProblemSpec, objective: NetworkObjective) -> Result<FixtureEntry> {
    let all = brute_force_solve(&build_schedules(spec), objective, true)?;
    Ok(FixtureEntry {
        permutation: spec.permutation.as_slice().to_vec(),
        parallelism: spec.parallelism(),
        objective,
        solution_count: all.len(),
        sample_solution: all
            .first()
            .map(|m| m.banks().iter().map(|b| b.id()).collect()),
    })
}

pub fn parse(text: &str) -> serde_json::Result<Fixtures> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_objective_sensitive() {
        let a = instance_hash(&[1, 0], 1, NetworkObjective::Crossbar);
        assert_eq!(a.len(), 16);
        assert_eq!(a, instance_hash(&[1, 0], 1, NetworkObjective::Crossbar));
        assert_ne!(
            a,
            instance_hash(&[1, 0], 1, NetworkObjective::BarrelShifter)
        );
    }
}
