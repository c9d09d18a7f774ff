//! Command dispatch for the `bankmap` binary.
//!
//! Exit codes: 0 solved with the objective met (or mapping valid), 1 bad
//! input, 2 solved only after relaxing the objective, 3 infeasible or search
//! budget exhausted, 4 mapping has collisions.

use std::fs;
use std::path::{Path, PathBuf};

use bankmap::baseline::baseline_solve;
use bankmap::io::{
    CompareReport, InputError, MappingFile, ProblemFile, RenderedMatrices, SolveReport, SolverKind,
};
use bankmap::network::{derive_controls, objective_compatible, NetworkObjective};
use bankmap::schedule::{build_schedules, ProblemSpec, SchedulePair};
use bankmap::solver::{solve_schedules, BankMapping, SolveOptions, SolveStatus};
use bankmap::verify::{brute_force_solve, verify_mapping_with};
use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 1;
pub const EXIT_RELAXED: i32 = 2;
pub const EXIT_UNSOLVED: i32 = 3;
pub const EXIT_CONFLICTS: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "bankmap",
    version,
    about = "Collision-free memory bank mapping for parallel interleavers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map a problem with the backtracking solver and derive network controls.
    Solve {
        problem: PathBuf,
        /// Fail instead of relaxing when the objective cannot be met.
        #[arg(long)]
        strict_objective: bool,
        /// Search budget in column assignments.
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Print every column selection, assignment and backtrack to stderr.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check a mapping file against a problem.
    Verify {
        problem: PathBuf,
        mapping: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Map a problem with the greedy + chain-repair baseline.
    Baseline {
        problem: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the backtracking solver and the baseline side by side.
    Compare {
        problem: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run the baseline for every seed in `START..END` instead of `--seed`.
        #[arg(long, value_parser = parse_range)]
        seed_range: Option<(u64, u64)>,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate every mapping of a small problem exhaustively.
    Oracle {
        problem: PathBuf,
        /// Do not pin natural column 0 to the identity pattern.
        #[arg(long)]
        free_first_column: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Override the problem file's objective.
    #[arg(long, value_parser = parse_objective)]
    pub objective: Option<NetworkObjective>,
    /// Also print a human-readable rendering to stderr.
    #[arg(long)]
    pub pretty: bool,
}

fn parse_objective(s: &str) -> Result<NetworkObjective, String> {
    match s {
        "crossbar" => Ok(NetworkObjective::Crossbar),
        "barrel-shifter" => Ok(NetworkObjective::BarrelShifter),
        other => Err(format!(
            "unknown objective {other:?} (expected crossbar or barrel-shifter)"
        )),
    }
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or("expected START..END")?;
    let a = a.parse::<u64>().map_err(|e| e.to_string())?;
    let b = b.parse::<u64>().map_err(|e| e.to_string())?;
    if a >= b {
        return Err("empty seed range".into());
    }
    Ok((a, b))
}

/// Result of one command: what goes to stdout, what goes to stderr, and the exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn bad_input(msg: impl std::fmt::Display) -> Self {
        Self {
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
            code: EXIT_BAD_INPUT,
        }
    }
}

struct Loaded {
    file: ProblemFile,
    spec: ProblemSpec,
    schedules: SchedulePair,
    objective: NetworkObjective,
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_problem(path: &Path, common: &Common) -> Result<Loaded, String> {
    let text = read(path)?;
    let file = ProblemFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let spec = file
        .to_spec()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let schedules = build_schedules(&spec);
    let objective = common.objective.unwrap_or_else(|| file.objective());
    Ok(Loaded {
        file,
        spec,
        schedules,
        objective,
    })
}

/// Accepts a mapping file or a solve report.
fn load_mapping(path: &Path, len: usize) -> Result<BankMapping, String> {
    let text = read(path)?;
    let file = match MappingFile::parse(&text) {
        Ok(f) => f,
        Err(InputError::Parse(first)) => match serde_json::from_str::<SolveReport>(&text) {
            Ok(report) => report.mapping_file(),
            Err(_) => return Err(format!("{}: {first}", path.display())),
        },
        Err(e) => return Err(e.to_string()),
    };
    file.to_mapping(len)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn finish(report: &SolveReport, pretty: bool, code: i32, mut stderr: String) -> Outcome {
    if pretty {
        stderr.push_str(&bankmap::io::render_pretty(report));
    }
    Outcome {
        stdout: serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        stderr,
        code,
    }
}

fn fill_mapping(
    report: &mut SolveReport,
    mapping: &BankMapping,
    schedules: &SchedulePair,
    objective: NetworkObjective,
) {
    report.banks = mapping.bank_contents();
    report.matrices = Some(RenderedMatrices::of(mapping, schedules));
    report.objective_met = objective_compatible(mapping, schedules, objective);
    // controls follow the objective when it is met, otherwise fall back to full permutations
    let control_objective = if report.objective_met {
        objective
    } else {
        NetworkObjective::Crossbar
    };
    report.controls = derive_controls(mapping, schedules, control_objective).ok();
}

fn backtrack_report(p: &Loaded, options: &SolveOptions) -> SolveReport {
    let out = solve_schedules(&p.schedules, p.objective, options);
    let mut report = SolveReport::new(
        SolverKind::Backtrack,
        p.file.clone(),
        p.objective,
        out.status,
    );
    if let Some(m) = &out.mapping {
        fill_mapping(&mut report, m, &p.schedules, p.objective);
    }
    report.relaxed = out.relaxed;
    report.stats = Some(out.stats);
    report.trace = out.trace;
    report
}

fn baseline_report(p: &Loaded, seed: u64) -> Result<SolveReport, String> {
    let m = baseline_solve(&p.schedules, seed).map_err(|e| e.to_string())?;
    let mut report = SolveReport::new(
        SolverKind::Baseline,
        p.file.clone(),
        p.objective,
        SolveStatus::Solved,
    );
    fill_mapping(&mut report, &m, &p.schedules, p.objective);
    report.seed = Some(seed);
    let check = verify_mapping_with(&m, &p.schedules, &[]).map_err(|e| e.to_string())?;
    report.conflicts = check.conflicts;
    Ok(report)
}

fn cmd_solve(
    path: &Path,
    strict: bool,
    max_nodes: Option<u64>,
    trace: bool,
    common: &Common,
) -> Outcome {
    let p = match load_problem(path, common) {
        Ok(p) => p,
        Err(e) => return Outcome::bad_input(e),
    };
    let options = SolveOptions {
        relax_on_objective_failure: !strict,
        max_nodes,
        trace,
    };
    let report = backtrack_report(&p, &options);
    let mut stderr = String::new();
    if trace {
        for ev in &report.trace {
            stderr.push_str(&format!("{ev}\n"));
        }
    }
    let code = match report.status {
        SolveStatus::Solved if report.objective_met => EXIT_OK,
        SolveStatus::Solved => EXIT_RELAXED,
        SolveStatus::Infeasible | SolveStatus::BudgetExhausted => EXIT_UNSOLVED,
    };
    finish(&report, common.pretty, code, stderr)
}

fn cmd_verify(problem: &Path, mapping: &Path, common: &Common) -> Outcome {
    let p = match load_problem(problem, common) {
        Ok(p) => p,
        Err(e) => return Outcome::bad_input(e),
    };
    let m = match load_mapping(mapping, p.spec.len()) {
        Ok(m) => m,
        Err(e) => return Outcome::bad_input(e),
    };
    let report = match verify_mapping_with(&m, &p.schedules, &[p.objective]) {
        Ok(r) => r,
        Err(e) => return Outcome::bad_input(e),
    };
    let mut stderr = String::new();
    if common.pretty {
        for c in &report.conflicts {
            stderr.push_str(&format!(
                "conflict: {:?} cycle {} bank {} data {} and {}\n",
                c.order, c.cycle, c.bank, c.data.0, c.data.1
            ));
        }
        stderr.push_str(if report.valid { "valid\n" } else { "INVALID\n" });
    }
    Outcome {
        stdout: serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        stderr,
        code: if report.valid {
            EXIT_OK
        } else {
            EXIT_CONFLICTS
        },
    }
}

fn cmd_baseline(path: &Path, seed: u64, common: &Common) -> Outcome {
    let p = match load_problem(path, common) {
        Ok(p) => p,
        Err(e) => return Outcome::bad_input(e),
    };
    match baseline_report(&p, seed) {
        Ok(r) => {
            let code = if r.conflicts.is_empty() {
                EXIT_OK
            } else {
                EXIT_CONFLICTS
            };
            finish(&r, common.pretty, code, String::new())
        }
        Err(e) => Outcome {
            stderr: format!("error: {e}\n"),
            code: EXIT_UNSOLVED,
            ..Outcome::default()
        },
    }
}

fn cmd_compare(path: &Path, seeds: (u64, u64), common: &Common) -> Outcome {
    let p = match load_problem(path, common) {
        Ok(p) => p,
        Err(e) => return Outcome::bad_input(e),
    };
    let backtrack = backtrack_report(&p, &SolveOptions::default());
    let mut baseline = Vec::new();
    for seed in seeds.0..seeds.1 {
        match baseline_report(&p, seed) {
            Ok(r) => baseline.push(r),
            Err(e) => {
                return Outcome {
                    stderr: format!("error: baseline seed {seed}: {e}\n"),
                    code: EXIT_UNSOLVED,
                    ..Outcome::default()
                }
            }
        }
    }
    let mut stderr = String::new();
    if common.pretty {
        stderr.push_str(&bankmap::io::render_pretty(&backtrack));
        for b in &baseline {
            stderr.push_str(&format!("-- seed {}\n", b.seed.unwrap_or_default()));
            stderr.push_str(&bankmap::io::render_pretty(b));
        }
    }
    let code = if backtrack.status != SolveStatus::Solved {
        EXIT_UNSOLVED
    } else if baseline.iter().any(|b| !b.conflicts.is_empty()) {
        EXIT_CONFLICTS
    } else {
        EXIT_OK
    };
    Outcome {
        stdout: serde_json::to_string_pretty(&CompareReport {
            backtrack,
            baseline,
        })
        .expect("report serializes")
            + "\n",
        stderr,
        code,
    }
}

fn cmd_oracle(path: &Path, free_first_column: bool, common: &Common) -> Outcome {
    let p = match load_problem(path, common) {
        Ok(p) => p,
        Err(e) => return Outcome::bad_input(e),
    };
    let all = match brute_force_solve(&p.schedules, p.objective, !free_first_column) {
        Ok(all) => all,
        Err(e) => return Outcome::bad_input(e),
    };
    let status = if all.is_empty() {
        SolveStatus::Infeasible
    } else {
        SolveStatus::Solved
    };
    let mut report = SolveReport::new(SolverKind::Oracle, p.file.clone(), p.objective, status);
    report.solution_count = Some(all.len());
    if let Some(m) = all.first() {
        fill_mapping(&mut report, m, &p.schedules, p.objective);
    }
    let code = if all.is_empty() {
        EXIT_UNSOLVED
    } else {
        EXIT_OK
    };
    finish(&report, common.pretty, code, String::new())
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve {
            problem,
            strict_objective,
            max_nodes,
            trace,
            common,
        } => cmd_solve(&problem, strict_objective, max_nodes, trace, &common),
        Command::Verify {
            problem,
            mapping,
            common,
        } => cmd_verify(&problem, &mapping, &common),
        Command::Baseline {
            problem,
            seed,
            common,
        } => cmd_baseline(&problem, seed, &common),
        Command::Compare {
            problem,
            seed,
            seed_range,
            common,
        } => cmd_compare(&problem, seed_range.unwrap_or((seed, seed + 1)), &common),
        Command::Oracle {
            problem,
            free_first_column,
            common,
        } => cmd_oracle(&problem, free_first_column, &common),
    }
}
