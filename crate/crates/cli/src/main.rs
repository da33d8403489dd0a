use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sasplan_core::cnf::{parse_solver_output, read_dimacs, write_dimacs, KeyNamer, SolverOutput};
use sasplan_core::pe::{derive_strips, PeNamer, PeOptions};
use sasplan_core::plan::{
    encode, oracle_makespan, plan, read_decision_log, read_plan, validate_plan, write_decision_log, write_plan,
    write_telemetry, Encoded, EncodingChoice, OracleLimits, PlanError, PlanStatus, Validation,
};
use sasplan_core::sase::{EncodeError, SaseNamer, SaseOptions};
use sasplan_core::solver::{solve, Engine, SolveError, SolveStatus, SolverConfig};
use sasplan_core::stats::{
    branching_frequency, h_values, role_summaries, transition_index, write_branching_csv, write_index_csv,
    write_summary_csv,
};
use sasplan_core::{fixtures, parse_sas, write_sas, CliqueMode, SasTask, TransitionTable};

const OK: u8 = 0;
const REJECTED: u8 = 1;
const UNSOLVABLE: u8 = 10;
const INPUT_ERROR: u8 = 20;
const SOLVER_UNKNOWN: u8 = 30;

#[derive(Parser)]
#[command(name = "sasplan", version, about = "SAS+ planning as satisfiability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the CNF of one horizon, with a key map in comment lines.
    Encode {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        enc: EncodingArgs,
        #[arg(long)]
        horizon: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search horizons 1..=max for a plan of minimum makespan.
    Plan {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        enc: EncodingArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 20)]
        max_horizon: usize,
        /// Plan file; stdout when omitted.
        #[arg(long)]
        plan_out: Option<PathBuf>,
        /// Per-horizon CSV.
        #[arg(long)]
        telemetry: Option<PathBuf>,
        /// Decision log of the last solved horizon (embedded engine only).
        #[arg(long)]
        decision_log: Option<PathBuf>,
    },
    /// Turn a solver's competition output for an `encode` instance into a plan.
    Decode {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        enc: EncodingArgs,
        #[arg(long)]
        horizon: usize,
        /// File with `s` and `v` lines.
        #[arg(long)]
        model: PathBuf,
        /// Plan file; stdout when omitted.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Check a plan file against a task.
    Validate {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Minimum makespan by exhaustive search over parallel steps.
    Oracle {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long, default_value_t = 10)]
        max_horizon: usize,
        #[arg(long, default_value_t = 100_000)]
        max_states: usize,
    },
    /// Occurrence statistics of one encoding, plus optional branching epochs.
    Stats {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        enc: EncodingArgs,
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
        percentiles: Vec<f64>,
        /// Decision log CSV written by `plan --decision-log` at the same horizon.
        #[arg(long)]
        branch_log: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        epoch: usize,
        /// Summary CSV; `<stem>.index.csv` and `<stem>.branching.csv` go next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a DIMACS file with the embedded engine and print competition output.
    Solve {
        cnf: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_conflicts: Option<u64>,
    },
    /// Print a built-in task in translator format.
    Fixture {
        /// Fixture name; lists all names when omitted.
        name: Option<String>,
    },
}

#[derive(Args)]
struct TaskArgs {
    /// Translator output (SAS+ version 3).
    #[arg(long)]
    sas: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingKind {
    Sase,
    Pe,
}

#[derive(Clone, Copy, ValueEnum)]
enum Clique {
    Pairwise,
    Binary,
}

#[derive(Args)]
struct EncodingArgs {
    #[arg(long, value_enum, default_value = "sase")]
    encoding: EncodingKind,
    #[arg(long, value_enum, default_value = "binary")]
    clique: Clique,
    #[arg(long)]
    no_reduce_subsumed: bool,
    #[arg(long)]
    no_reduce_unary: bool,
    #[arg(long)]
    no_reduce_difference: bool,
    /// PE: exclude two values of one variable at each time step.
    #[arg(long)]
    fact_mutex: bool,
    /// PE: exclude actions with competing preconditions.
    #[arg(long)]
    competing_needs: bool,
}

impl EncodingArgs {
    fn choice(&self) -> EncodingChoice {
        match self.encoding {
            EncodingKind::Sase => EncodingChoice::Sase(SaseOptions {
                clique_mode: match self.clique {
                    Clique::Pairwise => CliqueMode::Pairwise,
                    Clique::Binary => CliqueMode::Binary,
                },
                reduce_subsumed: !self.no_reduce_subsumed,
                reduce_unary_transition: !self.no_reduce_unary,
                reduce_unary_difference: !self.no_reduce_difference,
            }),
            EncodingKind::Pe => EncodingChoice::Pe(PeOptions {
                fact_mutex: self.fact_mutex,
                competing_needs: self.competing_needs,
            }),
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    /// `embedded` or `external:CMD`, where CMD contains `{cnf}`.
    #[arg(long, default_value = "embedded")]
    solver: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_conflicts: Option<u64>,
}

impl SolverArgs {
    fn config(&self, decision_log: bool) -> Result<SolverConfig> {
        let engine = match self.solver.as_str() {
            "embedded" => Engine::Embedded,
            s => match s.strip_prefix("external:") {
                Some(cmd) if cmd.contains("{cnf}") => Engine::External {
                    command: cmd.to_string(),
                    workdir: None,
                },
                Some(_) => bail!("external solver command needs a {{cnf}} placeholder"),
                None => bail!("unknown solver {s:?}; use embedded or external:CMD"),
            },
        };
        if decision_log && engine != Engine::Embedded {
            bail!("--decision-log requires the embedded solver");
        }
        Ok(SolverConfig {
            engine,
            seed: self.seed,
            decision_log,
            max_conflicts: self.max_conflicts,
            ..Default::default()
        })
    }
}

fn load_task(args: &TaskArgs) -> Result<SasTask> {
    let text = fs::read_to_string(&args.sas).with_context(|| format!("reading {}", args.sas.display()))?;
    parse_sas(&text).with_context(|| format!("parsing {}", args.sas.display()))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(bytes).context("writing stdout"),
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn cmd_encode(task: &SasTask, table: &TransitionTable, choice: &EncodingChoice, n: usize, out: Option<&Path>) -> Result<u8> {
    if n == 0 {
        bail!("--horizon must be at least 1");
    }
    let encoded = match encode(task, table, choice, n) {
        Ok(e) => e,
        Err(EncodeError::GoalUnsupported { var, value }) => {
            eprintln!(
                "goal {}={} has no incoming transition; every horizon is unsatisfiable",
                task.variables[var].name,
                task.value_name(var, value)
            );
            return Ok(UNSOLVABLE);
        }
        Err(e) => return Err(e.into()),
    };
    let view;
    let sase_namer;
    let pe_namer;
    let namer: &dyn KeyNamer = match &encoded {
        Encoded::Sase(_) => {
            sase_namer = SaseNamer { task, table };
            &sase_namer
        }
        Encoded::Pe(_) => {
            view = derive_strips(task, table);
            pe_namer = PeNamer { task, view: &view };
            &pe_namer
        }
    };
    let mut buf = Vec::new();
    write_dimacs(encoded.cnf(), &mut buf, Some(namer))?;
    write_output(out, &buf)?;
    report(&encoded);
    Ok(OK)
}

fn report(encoded: &Encoded) {
    let cnf = encoded.cnf();
    eprintln!("vars {} clauses {}", cnf.var_count(), cnf.num_clauses());
    let mut tally: Vec<(&str, usize)> = Vec::new();
    for &tag in cnf.tags() {
        match tally.iter_mut().find(|(t, _)| *t == tag) {
            Some((_, n)) => *n += 1,
            None => tally.push((tag, 1)),
        }
    }
    for (tag, n) in tally {
        eprintln!("class {tag}: {n}");
    }
    if let Encoded::Sase(e) = encoded {
        let r = &e.report;
        eprintln!(
            "transition vars {} action vars {} aux vars {}",
            r.transition_vars, r.action_vars, r.aux_vars
        );
        eprintln!(
            "action cliques {} (mean size {:.2}) -> {} (mean size {:.2})",
            r.action_cliques_before.count,
            r.action_cliques_before.mean_size,
            r.action_cliques_after.count,
            r.action_cliques_after.mean_size
        );
        eprintln!(
            "substituted actions: {} unary transition, {} unary difference, of {}",
            r.reduced_unary, r.reduced_difference, r.num_actions
        );
    }
}

struct PlanCmd<'a> {
    choice: EncodingChoice,
    cfg: SolverConfig,
    max_horizon: usize,
    plan_out: Option<&'a Path>,
    telemetry: Option<&'a Path>,
    decision_log: Option<&'a Path>,
}

fn cmd_plan(task: &SasTask, table: &TransitionTable, c: PlanCmd) -> Result<u8> {
    let outcome = plan(task, table, &c.choice, &c.cfg, c.max_horizon)?;
    if let Some(path) = c.telemetry {
        let mut buf = Vec::new();
        write_telemetry(&outcome.records, &mut buf)?;
        write_output(Some(path), &buf)?;
    }
    if let Some(path) = c.decision_log {
        let mut buf = Vec::new();
        write_decision_log(&outcome.decisions, &mut buf)?;
        write_output(Some(path), &buf)?;
    }
    match outcome.status {
        PlanStatus::Plan { plan, makespan } => {
            let mut buf = Vec::new();
            write_plan(&plan, task, &mut buf)?;
            write_output(c.plan_out, &buf)?;
            eprintln!("makespan {makespan}, {} actions", plan.num_actions());
            Ok(OK)
        }
        PlanStatus::UnsolvableWithin(n) => {
            eprintln!("no plan within {n} steps");
            Ok(UNSOLVABLE)
        }
    }
}

fn cmd_decode(
    task: &SasTask,
    table: &TransitionTable,
    choice: &EncodingChoice,
    n: usize,
    model: &Path,
    out: Option<&Path>,
) -> Result<u8> {
    if n == 0 {
        bail!("--horizon must be at least 1");
    }
    let text = fs::read_to_string(model).with_context(|| format!("reading {}", model.display()))?;
    let assignment = match parse_solver_output(&text).with_context(|| format!("parsing {}", model.display()))? {
        SolverOutput::Sat(a) => a,
        SolverOutput::Unsat => {
            eprintln!("solver reported UNSATISFIABLE");
            return Ok(UNSOLVABLE);
        }
        SolverOutput::Unknown => {
            eprintln!("no status line in {}", model.display());
            return Ok(SOLVER_UNKNOWN);
        }
    };
    let encoded = encode(task, table, choice, n)?;
    if let Some(clause) = assignment.first_falsified(encoded.cnf()) {
        return Err(SolveError::Integrity { clause }.into());
    }
    let plan = encoded.decode(&assignment);
    let mut buf = Vec::new();
    write_plan(&plan, task, &mut buf)?;
    write_output(out, &buf)?;
    Ok(OK)
}

fn cmd_validate(task: &SasTask, table: &TransitionTable, plan_path: &Path) -> Result<u8> {
    let text = fs::read_to_string(plan_path).with_context(|| format!("reading {}", plan_path.display()))?;
    let plan = read_plan(&text, task).with_context(|| format!("parsing {}", plan_path.display()))?;
    match validate_plan(task, table, &plan) {
        Validation::Accept => {
            println!("valid plan, makespan {}", plan.makespan());
            Ok(OK)
        }
        Validation::Reject(why) => {
            eprintln!("invalid plan: {why}");
            Ok(REJECTED)
        }
    }
}

fn cmd_oracle(task: &SasTask, table: &TransitionTable, bound: usize, max_states: usize) -> Result<u8> {
    let limits = OracleLimits {
        max_states,
        ..Default::default()
    };
    match oracle_makespan(task, table, bound, &limits)? {
        Some(m) => {
            println!("makespan {m}");
            Ok(OK)
        }
        None => {
            println!("no plan within {bound} steps");
            Ok(UNSOLVABLE)
        }
    }
}

struct StatsCmd<'a> {
    choice: EncodingChoice,
    horizon: usize,
    percentiles: &'a [f64],
    branch_log: Option<&'a Path>,
    epoch: usize,
    out: &'a Path,
}

fn cmd_stats(task: &SasTask, table: &TransitionTable, c: StatsCmd) -> Result<u8> {
    if c.horizon == 0 {
        bail!("--horizon must be at least 1");
    }
    let encoded = encode(task, table, &c.choice, c.horizon)?;
    let profile = h_values(encoded.cnf());
    let rows = role_summaries(&profile, c.percentiles)?;
    let mut buf = Vec::new();
    write_summary_csv(&rows, &mut buf)?;
    write_output(Some(c.out), &buf)?;

    let mut series = Vec::new();
    for &p in c.percentiles.iter().chain([100.0].iter()) {
        series.push((p, transition_index(&profile, p)?));
    }
    series.dedup_by(|a, b| a.0 == b.0);
    let mut buf = Vec::new();
    write_index_csv(&series, &mut buf)?;
    write_output(Some(&sibling(c.out, "index")), &buf)?;

    if let Some(path) = c.branch_log {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let log = read_decision_log(&text).with_context(|| format!("parsing {}", path.display()))?;
        let bf = branching_frequency(&log, &profile, c.epoch)?;
        let mut buf = Vec::new();
        write_branching_csv(&bf, &mut buf)?;
        write_output(Some(&sibling(c.out, "branching")), &buf)?;
    }
    Ok(OK)
}

fn cmd_solve(path: &Path, seed: u64, max_conflicts: Option<u64>) -> Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cnf = read_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?;
    let cfg = SolverConfig {
        seed,
        max_conflicts,
        ..Default::default()
    };
    let result = solve(&cnf, &cfg)?;
    let mut out = io::stdout().lock();
    match result.status {
        SolveStatus::Sat => {
            writeln!(out, "s SATISFIABLE")?;
            let model = result.assignment.expect("SAT carries a model");
            let mut line = String::from("v");
            for v in 1..=cnf.var_count() {
                let lit = if model.value(v) { v as i64 } else { -(v as i64) };
                line.push_str(&format!(" {lit}"));
            }
            writeln!(out, "{line} 0")?;
            Ok(OK)
        }
        SolveStatus::Unsat => {
            writeln!(out, "s UNSATISFIABLE")?;
            Ok(UNSOLVABLE)
        }
        SolveStatus::Unknown => {
            writeln!(out, "s UNKNOWN")?;
            Ok(SOLVER_UNKNOWN)
        }
    }
}

fn cmd_fixture(name: Option<&str>) -> Result<u8> {
    match name {
        None => {
            for f in fixtures::all() {
                println!("{}", f.name);
            }
        }
        Some(n) => {
            let task = fixtures::by_name(n).ok_or_else(|| anyhow!("unknown fixture {n:?}"))?;
            print!("{}", write_sas(&task));
        }
    }
    Ok(OK)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Encode { task, enc, horizon, out } => {
            let task = load_task(&task)?;
            let table = sasplan_core::extract_transitions(&task);
            cmd_encode(&task, &table, &enc.choice(), horizon, out.as_deref())
        }
        Command::Plan {
            task,
            enc,
            solver,
            max_horizon,
            plan_out,
            telemetry,
            decision_log,
        } => {
            let task = load_task(&task)?;
            let table = sasplan_core::extract_transitions(&task);
            let cmd = PlanCmd {
                choice: enc.choice(),
                cfg: solver.config(decision_log.is_some())?,
                max_horizon,
                plan_out: plan_out.as_deref(),
                telemetry: telemetry.as_deref(),
                decision_log: decision_log.as_deref(),
            };
            cmd_plan(&task, &table, cmd)
        }
        Command::Decode {
            task,
            enc,
            horizon,
            model,
            plan_out,
        } => {
            let task = load_task(&task)?;
            let table = sasplan_core::extract_transitions(&task);
            cmd_decode(&task, &table, &enc.choice(), horizon, &model, plan_out.as_deref())
        }
        Command::Validate { task, plan } => {
            let task = load_task(&task)?;
            let table = sasplan_core::extract_transitions(&task);
            cmd_validate(&task, &table, &plan)
        }
        Command::Oracle {
            task,
            max_horizon,
            max_states,
        } => {
            let task = load_task(&task)?;
            let table = sasplan_core::extract_transitions(&task);
            cmd_oracle(&task, &table, max_horizon, max_states)
        }
        Command::Stats {
            task,
            enc,
            horizon,
            percentiles,
            branch_log,
            epoch,
            out,
        } => {
            let task = load_task(&task)?;
            let table = sasplan_core::extract_transitions(&task);
            let cmd = StatsCmd {
                choice: enc.choice(),
                horizon,
                percentiles: &percentiles,
                branch_log: branch_log.as_deref(),
                epoch,
                out: &out,
            };
            cmd_stats(&task, &table, cmd)
        }
        Command::Solve {
            cnf,
            seed,
            max_conflicts,
        } => cmd_solve(&cnf, seed, max_conflicts),
        Command::Fixture { name } => cmd_fixture(name.as_deref()),
    }
}

/// Solver failures map to 30, everything else is an input error.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<PlanError>() {
        Some(PlanError::Unknown { .. } | PlanError::InvalidPlan { .. } | PlanError::Solve(SolveError::Integrity { .. })) => {
            SOLVER_UNKNOWN
        }
        _ => match err.downcast_ref::<SolveError>() {
            Some(SolveError::Integrity { .. }) => SOLVER_UNKNOWN,
            _ => INPUT_ERROR,
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/run.csv"), "index"), PathBuf::from("out/run.index.csv"));
        assert_eq!(sibling(Path::new("run"), "branching"), PathBuf::from("run.branching.csv"));
    }

    #[test]
    fn defaults_are_binary_sase_with_every_reduction() {
        let cli = Cli::try_parse_from(["sasplan", "encode", "--sas", "t.sas", "--horizon", "2"]).unwrap();
        let Command::Encode { enc, .. } = cli.command else { panic!() };
        assert_eq!(enc.choice(), EncodingChoice::Sase(SaseOptions::default()));
    }

    #[test]
    fn solver_spec() {
        let args = |s: &str| SolverArgs {
            solver: s.into(),
            seed: 1,
            max_conflicts: None,
        };
        assert_eq!(args("embedded").config(true).unwrap().engine, Engine::Embedded);
        assert!(matches!(args("external:minisat {cnf}").config(false).unwrap().engine, Engine::External { .. }));
        assert!(args("external:minisat").config(false).is_err());
        assert!(args("external:x {cnf}").config(true).is_err());
        assert!(args("glucose").config(false).is_err());
    }

    #[test]
    fn solver_failures_are_not_input_errors() {
        let unknown = anyhow::Error::from(PlanError::Unknown {
            horizon: 3,
            reason: "limit".into(),
        });
        assert_eq!(exit_code(&unknown), SOLVER_UNKNOWN);
        assert_eq!(exit_code(&SolveError::Integrity { clause: 0 }.into()), SOLVER_UNKNOWN);
        assert_eq!(exit_code(&anyhow!("bad file")), INPUT_ERROR);
    }
}
