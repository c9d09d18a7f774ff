//! Collision-free memory bank mapping for parallel interleavers.
//!
//! A block of `L` data is processed by `X` processing elements over `N = L / X`
//! cycles, once in natural order and once in the order given by an
//! interleaving permutation. Every datum lives in one of `X` single-port
//! banks, so the data touched in any single cycle must sit in distinct banks
//! for both orders. [`solver::memmap_solve`] finds such a mapping with a
//! most-constrained-column backtracking search, optionally restricted to
//! mappings whose per-cycle bank patterns are rotations of one another so the
//! PE/bank interconnect can be a barrel shifter. [`network::derive_controls`]
//! then produces the per-cycle control words for that network.
//!
//! ```
//! use bankmap::{Permutation, ProblemSpec, NetworkObjective, SolveOptions, memmap_solve};
//!
//! let perm = Permutation::new(vec![1, 9, 10, 5, 0, 11, 2, 7, 3, 6, 8, 4]).unwrap();
//! let spec = ProblemSpec::new(perm, 3).unwrap();
//! let out = memmap_solve(&spec, NetworkObjective::BarrelShifter, &SolveOptions::default());
//! assert!(out.mapping.is_some());
//! assert!(out.objective_met);
//! ```

pub mod baseline;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod network;
pub mod schedule;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use network::{
    derive_controls, objective_compatible, rotation_offset, ControlSchedule, NetworkObjective,
};
pub use schedule::{
    build_schedules, AccessOrder, AccessSchedule, FillOrder, LayoutConventions, Permutation,
    ProblemSpec, SchedulePair,
};
pub use solver::{memmap_solve, Bank, BankMapping, SolveOptions, SolveOutcome, SolveStatus};
pub use verify::{brute_force_solve, simulate, verify_mapping, VerificationReport};
