//! Regenerates `tests/fixtures/oracle_counts.json`.
//!
//! cargo run -p bankmap --example gen_fixtures > crates/core/tests/fixtures/oracle_counts.json

use bankmap::fixtures::{compute_entry, instance_hash, Fixtures};
use bankmap::{NetworkObjective, Permutation, ProblemSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut instances: Vec<(Vec<usize>, usize)> = vec![
        (vec![1, 9, 10, 5, 0, 11, 2, 7, 3, 6, 8, 4], 3),
        ((0..4).collect(), 2),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (len, x) in [(8, 2), (12, 2), (9, 3), (12, 3), (12, 3), (12, 4), (16, 4)] {
        let mut v: Vec<usize> = (0..len).collect();
        v.shuffle(&mut rng);
        instances.push((v, x));
    }
    // first seeded law of length 9 with no barrel-shifter mapping
    let infeasible = (0..)
        .map(|_| {
            let mut v: Vec<usize> = (0..9).collect();
            v.shuffle(&mut rng);
            v
        })
        .find(|v| {
            let spec = ProblemSpec::new(Permutation::new(v.clone()).unwrap(), 3).unwrap();
            compute_entry(&spec, NetworkObjective::BarrelShifter)
                .unwrap()
                .solution_count
                == 0
        })
        .unwrap();
    instances.push((infeasible, 3));

    let mut fixtures = Fixtures::new();
    for (perm, x) in instances {
        let spec = ProblemSpec::new(Permutation::new(perm.clone()).unwrap(), x).unwrap();
        for objective in [NetworkObjective::Crossbar, NetworkObjective::BarrelShifter] {
            let entry = compute_entry(&spec, objective).unwrap();
            fixtures.insert(instance_hash(&perm, x, objective), entry);
        }
    }
    println!("{}", serde_json::to_string_pretty(&fixtures).unwrap());
}
