//! Drives the `bankmap` binary end to end and checks exit codes and reports.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bankmap::io::{CompareReport, SolveReport, SolverKind};
use bankmap::{NetworkObjective, SolveStatus};
use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn bankmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bankmap"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn problem_json(perm: &[usize], x: usize) -> String {
    serde_json::json!({ "permutation": perm, "parallelism": x }).to_string()
}

#[test]
fn solves_sample_with_barrel_controls() {
    let out = bankmap(&["solve", path(&data("sample_problem.json"))]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: SolveReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.solver, SolverKind::Backtrack);
    assert_eq!(report.status, SolveStatus::Solved);
    assert!(report.objective_met);
    let m = report.matrices.unwrap();
    assert_eq!(m.natural, vec!["A A C A", "B B A B", "C C B C"]);
    assert_eq!(m.interleaved, vec!["A B C A", "C A B C", "B C A B"]);
    let controls = report.controls.unwrap();
    assert_eq!(controls.objective, NetworkObjective::BarrelShifter);
    assert_eq!(controls.natural.distinct_word_count, 2);
}

#[test]
fn trace_goes_to_stderr() {
    let out = bankmap(&["solve", path(&data("sample_problem.json")), "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.lines().nth(1).unwrap().starts_with("select int[3]"),
        "{stderr}"
    );
}

#[test]
fn pretty_rendering_lists_banks() {
    let out = bankmap(&["solve", path(&data("sample_problem.json")), "--pretty"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bank A = {0, 1, 3, 6}"), "{stderr}");
    assert!(
        stderr.contains("natural controls: 0 0 1 0 (2 distinct)"),
        "{stderr}"
    );
}

#[test]
fn non_divisor_parallelism_is_bad_input() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "p.json",
        &problem_json(&[1, 9, 10, 5, 0, 11, 2, 7, 3, 6, 8, 4], 5),
    );
    let out = bankmap(&["solve", path(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parallelism"));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_inputs_are_bad_input() {
    let dir = TempDir::new().unwrap();
    for (i, text) in [
        "{",
        r#"{"permutation": [0, 0], "parallelism": 1}"#,
        r#"{"permutation": [0, 1], "parallelism": 1, "colour": 2}"#,
    ]
    .iter()
    .enumerate()
    {
        let p = write(&dir, &format!("p{i}.json"), text);
        assert_eq!(
            bankmap(&["solve", path(&p)]).status.code(),
            Some(1),
            "{text}"
        );
    }
    assert_eq!(
        bankmap(&["solve", "/nonexistent/problem.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(bankmap(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bankmap(&["--help"]).status.code(), Some(0));
}

#[test]
fn strict_unreachable_objective_exits_unsolved() {
    let out = bankmap(&[
        "solve",
        path(&data("no_barrel_problem.json")),
        "--strict-objective",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let report: SolveReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.status, SolveStatus::Infeasible);
    assert!(report.banks.is_empty());
}

#[test]
fn relaxed_unreachable_objective_exits_relaxed() {
    let out = bankmap(&["solve", path(&data("no_barrel_problem.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let report: SolveReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.relaxed && !report.objective_met);
    assert_eq!(
        report.controls.unwrap().objective,
        NetworkObjective::Crossbar
    );
}

#[test]
fn budget_exhaustion_exits_unsolved() {
    let out = bankmap(&[
        "solve",
        path(&data("sample_problem.json")),
        "--max-nodes",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verifies_sample_mapping() {
    let out = bankmap(&[
        "verify",
        path(&data("sample_problem.json")),
        path(&data("sample_mapping.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["objective_met"]["barrel-shifter"], true);
}

#[test]
fn single_bank_mapping_has_conflicts() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.json",
        r#"{"banks": [[0,1,2,3,4,5,6,7,8,9,10,11], [], []]}"#,
    );
    let out = bankmap(&[
        "verify",
        path(&data("sample_problem.json")),
        path(&m),
        "--pretty",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert!(!v["conflicts"].as_array().unwrap().is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("INVALID"));
}

#[test]
fn incomplete_mapping_is_bad_input() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.json",
        r#"{"banks": [[0,1,6,3], [4,5,10,7], [8,9,2]]}"#,
    );
    let out = bankmap(&["verify", path(&data("sample_problem.json")), path(&m)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("11"));
}

#[test]
fn solve_report_round_trips_through_verify() {
    let dir = TempDir::new().unwrap();
    let out = bankmap(&["solve", path(&data("sample_problem.json"))]);
    let report = write(
        &dir,
        "report.json",
        std::str::from_utf8(&out.stdout).unwrap(),
    );
    let out = bankmap(&["verify", path(&data("sample_problem.json")), path(&report)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn objective_override_on_command_line() {
    let out = bankmap(&[
        "solve",
        path(&data("no_barrel_problem.json")),
        "--objective",
        "crossbar",
        "--strict-objective",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        bankmap(&[
            "solve",
            path(&data("sample_problem.json")),
            "--objective",
            "mesh"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn baseline_is_valid_but_not_barrel() {
    let out = bankmap(&[
        "baseline",
        path(&data("sample_problem.json")),
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: SolveReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.solver, SolverKind::Baseline);
    assert_eq!(report.seed, Some(3));
    assert!(report.conflicts.is_empty());
    assert!(!report.objective_met);
}

fn compare(problem: &Path, extra: &[&str]) -> CompareReport {
    let mut args = vec!["compare", path(problem)];
    args.extend_from_slice(extra);
    let out = bankmap(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn compare_sample_instance() {
    let r = compare(&data("sample_problem.json"), &["--seed-range", "0..5"]);
    assert!(r.backtrack.objective_met);
    assert_eq!(r.baseline.len(), 5);
    assert!(r
        .baseline
        .iter()
        .all(|b| b.conflicts.is_empty() && b.status == SolveStatus::Solved));
    assert_eq!(
        bankmap(&[
            "compare",
            path(&data("sample_problem.json")),
            "--seed-range",
            "4..2"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn compare_single_bank_instance() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", &problem_json(&[2, 0, 3, 1], 1));
    let r = compare(&p, &[]);
    assert!(r.backtrack.objective_met);
    assert_eq!(r.baseline[0].banks, vec![vec![0, 1, 2, 3]]);
}

#[test]
fn compare_random_instances() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let dir = TempDir::new().unwrap();
    for i in 0..20 {
        let mut perm: Vec<usize> = (0..24).collect();
        perm.shuffle(&mut rng);
        let p = write(&dir, &format!("p{i}.json"), &problem_json(&perm, 3));
        let r = compare(&p, &["--seed", &i.to_string(), "--objective", "crossbar"]);
        assert_eq!(r.backtrack.status, SolveStatus::Solved);
        assert!(r.baseline[0].conflicts.is_empty(), "instance {i}");
    }
}

#[test]
fn oracle_counts_solutions() {
    let out = bankmap(&["oracle", path(&data("sample_problem.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let report: SolveReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.solver, SolverKind::Oracle);
    assert_eq!(report.solution_count, Some(1));
    let out = bankmap(&["oracle", path(&data("no_barrel_problem.json"))]);
    assert_eq!(out.status.code(), Some(3));
    let dir = TempDir::new().unwrap();
    let big: Vec<usize> = (0..20).collect();
    let p = write(&dir, "big.json", &problem_json(&big, 4));
    assert_eq!(bankmap(&["oracle", path(&p)]).status.code(), Some(1));
}
