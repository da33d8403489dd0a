//! Parallel plans, plan validation, the incremental-horizon planning loop
//! and a brute-force reference search.

use std::collections::{HashSet, VecDeque};
use std::io::{self, Write};
use std::time::Instant;

use thiserror::Error;

use crate::cnf::{Assignment, CnfInstance, Role};
use crate::pe::{decode_pe, derive_strips, encode_pe, PeEncoding, PeOptions};
use crate::sas::{SasTask, State};
use crate::sase::{decode_sase, encode_sase, EncodeError, SaseEncoding, SaseOptions};
use crate::solver::{solve, SolveError, SolveStats, SolveStatus, SolverConfig};
use crate::transition::TransitionTable;

/// A sequence of action sets; step `t` is `steps[t - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParallelPlan {
    pub steps: Vec<Vec<usize>>,
}

impl ParallelPlan {
    /// Normalizes every step to a sorted, duplicate-free list.
    pub fn new(mut steps: Vec<Vec<usize>>) -> Self {
        for s in &mut steps {
            s.sort_unstable();
            s.dedup();
        }
        ParallelPlan { steps }
    }

    pub fn makespan(&self) -> usize {
        self.steps.len()
    }

    pub fn num_actions(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Accept,
    Reject(String),
}

impl Validation {
    pub fn is_accept(&self) -> bool {
        *self == Validation::Accept
    }
}

fn apply_action(task: &SasTask, state: &mut [usize], a: usize) {
    for e in &task.operators[a].effects {
        state[e.var] = e.post;
    }
}

/// Simulates the plan from the initial state, checking applicability and
/// S-mutex freedom of every step, then the goal.
pub fn validate_plan(task: &SasTask, table: &TransitionTable, plan: &ParallelPlan) -> Validation {
    let mut state: State = task.initial.clone();
    for (i, step) in plan.steps.iter().enumerate() {
        let t = i + 1;
        if let Some(&a) = step.iter().find(|&&a| a >= task.operators.len()) {
            return Validation::Reject(format!("step {t}: unknown action index {a}"));
        }
        for (k, &a) in step.iter().enumerate() {
            for &b in &step[k + 1..] {
                if table.s_mutex(a, b) {
                    return Validation::Reject(format!(
                        "step {t}: actions {} and {} are S-mutex",
                        task.operators[a].name, task.operators[b].name
                    ));
                }
            }
        }
        for &a in step {
            if !task.operators[a].is_applicable(&state) {
                return Validation::Reject(format!(
                    "step {t}: action {} is not applicable",
                    task.operators[a].name
                ));
            }
        }
        for &a in step {
            apply_action(task, &mut state, a);
        }
    }
    if let Some(&(x, g)) = task.goal.iter().find(|&&(x, g)| state[x] != g) {
        return Validation::Reject(format!(
            "goal {}={} not reached (final value {})",
            task.variables[x].name,
            task.value_name(x, g),
            task.value_name(x, state[x])
        ));
    }
    Validation::Accept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_states: usize,
    /// Largest number of applicable actions in one state before the subset
    /// enumeration is refused.
    pub max_applicable: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_states: 100_000,
            max_applicable: 16,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("more than {0} states visited")]
    TooManyStates(usize),
    #[error("{found} applicable actions in one state exceed the limit of {limit}")]
    TooManyApplicable { found: usize, limit: usize },
}

/// Enumerates every non-empty set of pairwise non-S-mutex actions drawn
/// from `candidates`.
fn compatible_sets(table: &TransitionTable, candidates: &[usize], out: &mut Vec<Vec<usize>>) {
    fn rec(table: &TransitionTable, cands: &[usize], from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for i in from..cands.len() {
            let a = cands[i];
            if cur.iter().any(|&b| table.s_mutex(a, b)) {
                continue;
            }
            cur.push(a);
            out.push(cur.clone());
            rec(table, cands, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(table, candidates, 0, &mut Vec::new(), out);
}

/// Minimum number of parallel steps to reach the goal, by breadth-first
/// search over states with every S-mutex-free applicable action set as a
/// successor. `None` when no plan of at most `bound` steps exists.
pub fn oracle_makespan(
    task: &SasTask,
    table: &TransitionTable,
    bound: usize,
    limits: &OracleLimits,
) -> Result<Option<usize>, OracleError> {
    if task.goal_satisfied(&task.initial) {
        return Ok(Some(0));
    }
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(task.initial.clone());
    let mut frontier: VecDeque<State> = VecDeque::from([task.initial.clone()]);
    let mut sets = Vec::new();
    for depth in 1..=bound {
        let mut next = VecDeque::new();
        for state in frontier {
            let applicable: Vec<usize> = (0..task.operators.len())
                .filter(|&a| task.operators[a].is_applicable(&state))
                .collect();
            if applicable.len() > limits.max_applicable {
                return Err(OracleError::TooManyApplicable {
                    found: applicable.len(),
                    limit: limits.max_applicable,
                });
            }
            sets.clear();
            compatible_sets(table, &applicable, &mut sets);
            for set in &sets {
                let mut s = state.clone();
                for &a in set {
                    apply_action(task, &mut s, a);
                }
                if task.goal_satisfied(&s) {
                    return Ok(Some(depth));
                }
                if seen.insert(s.clone()) {
                    if seen.len() > limits.max_states {
                        return Err(OracleError::TooManyStates(limits.max_states));
                    }
                    next.push_back(s);
                }
            }
        }
        if next.is_empty() {
            return Ok(None);
        }
        frontier = next;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingChoice {
    Sase(SaseOptions),
    Pe(PeOptions),
}

impl EncodingChoice {
    pub fn name(&self) -> &'static str {
        match self {
            EncodingChoice::Sase(_) => "sase",
            EncodingChoice::Pe(_) => "pe",
        }
    }
}

impl Default for EncodingChoice {
    fn default() -> Self {
        EncodingChoice::Sase(SaseOptions::default())
    }
}

/// A CNF for one horizon together with what is needed to decode it.
#[derive(Debug, Clone)]
pub enum Encoded {
    Sase(SaseEncoding),
    Pe(PeEncoding),
}

impl Encoded {
    pub fn cnf(&self) -> &CnfInstance {
        match self {
            Encoded::Sase(e) => &e.cnf,
            Encoded::Pe(e) => &e.cnf,
        }
    }

    pub fn decode(&self, assignment: &Assignment) -> ParallelPlan {
        match self {
            Encoded::Sase(e) => decode_sase(assignment, e),
            Encoded::Pe(e) => decode_pe(assignment, e),
        }
    }
}

pub fn encode(task: &SasTask, table: &TransitionTable, choice: &EncodingChoice, n: usize) -> Result<Encoded, EncodeError> {
    match choice {
        EncodingChoice::Sase(opts) => encode_sase(task, table, n, opts).map(Encoded::Sase),
        EncodingChoice::Pe(opts) => {
            let view = derive_strips(task, table);
            encode_pe(&view, table, n, opts).map(Encoded::Pe)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonRecord {
    pub horizon: usize,
    pub vars: u32,
    pub clauses: usize,
    pub stats: SolveStats,
    pub status: SolveStatus,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanStatus {
    Plan { plan: ParallelPlan, makespan: usize },
    UnsolvableWithin(usize),
}

/// One decision of the solver, with the role of the decided variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub var: u32,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub status: PlanStatus,
    pub records: Vec<HorizonRecord>,
    /// Decisions of the last solver call, when logging is enabled.
    pub decisions: Vec<Decision>,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("solver returned UNKNOWN at horizon {horizon}: {reason}")]
    Unknown { horizon: usize, reason: String },
    #[error("decoded plan at horizon {horizon} is invalid: {reason}")]
    InvalidPlan { horizon: usize, reason: String },
}

/// Result of checking one horizon.
#[derive(Debug, Clone)]
pub struct HorizonResult {
    pub record: HorizonRecord,
    pub plan: Option<ParallelPlan>,
    pub decisions: Vec<Decision>,
    pub diagnostic: Option<String>,
}

/// Encodes and solves a single horizon. A goal value without any incoming
/// transition makes the horizon UNSAT without calling the solver.
pub fn solve_horizon(
    task: &SasTask,
    table: &TransitionTable,
    choice: &EncodingChoice,
    cfg: &SolverConfig,
    n: usize,
) -> Result<HorizonResult, PlanError> {
    let start = Instant::now();
    let encoded = match encode(task, table, choice, n) {
        Ok(e) => e,
        Err(EncodeError::GoalUnsupported { .. }) => {
            return Ok(HorizonResult {
                record: HorizonRecord {
                    horizon: n,
                    vars: 0,
                    clauses: 0,
                    stats: SolveStats::default(),
                    status: SolveStatus::Unsat,
                    wall_time_ms: start.elapsed().as_millis(),
                },
                plan: None,
                decisions: Vec::new(),
                diagnostic: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let cnf = encoded.cnf();
    let result = solve(cnf, cfg)?;
    let plan = result.assignment.as_ref().map(|a| encoded.decode(a));
    let decisions = result
        .decision_log
        .iter()
        .map(|&var| Decision {
            var,
            role: cnf.key_of(var).map_or(Role::Auxiliary, |k| k.role),
        })
        .collect();
    Ok(HorizonResult {
        record: HorizonRecord {
            horizon: n,
            vars: cnf.var_count(),
            clauses: cnf.num_clauses(),
            stats: result.stats,
            status: result.status,
            wall_time_ms: start.elapsed().as_millis(),
        },
        plan,
        decisions,
        diagnostic: result.diagnostic,
    })
}

/// Tries horizons `1..=n_max` in order and returns the first plan found.
pub fn plan(
    task: &SasTask,
    table: &TransitionTable,
    choice: &EncodingChoice,
    cfg: &SolverConfig,
    n_max: usize,
) -> Result<PlanOutcome, PlanError> {
    if task.goal_satisfied(&task.initial) {
        return Ok(PlanOutcome {
            status: PlanStatus::Plan {
                plan: ParallelPlan::default(),
                makespan: 0,
            },
            records: Vec::new(),
            decisions: Vec::new(),
        });
    }
    let mut records = Vec::new();
    let mut decisions = Vec::new();
    for n in 1..=n_max {
        let h = solve_horizon(task, table, choice, cfg, n)?;
        records.push(h.record.clone());
        decisions = h.decisions;
        match h.record.status {
            SolveStatus::Sat => {
                let plan = h.plan.expect("SAT carries a model");
                if let Validation::Reject(reason) = validate_plan(task, table, &plan) {
                    return Err(PlanError::InvalidPlan { horizon: n, reason });
                }
                return Ok(PlanOutcome {
                    status: PlanStatus::Plan { plan, makespan: n },
                    records,
                    decisions,
                });
            }
            SolveStatus::Unsat => {}
            SolveStatus::Unknown => {
                return Err(PlanError::Unknown {
                    horizon: n,
                    reason: h.diagnostic.unwrap_or_else(|| "conflict limit reached".into()),
                })
            }
        }
    }
    Ok(PlanOutcome {
        status: PlanStatus::UnsolvableWithin(n_max),
        records,
        decisions,
    })
}

fn quote_name(name: &str) -> String {
    if name.is_empty() || name.contains(char::is_whitespace) || name.starts_with('(') {
        format!("({name})")
    } else {
        name.to_string()
    }
}

/// Writes `step <t>: <names>` lines followed by a makespan comment.
pub fn write_plan(plan: &ParallelPlan, task: &SasTask, sink: &mut impl Write) -> io::Result<()> {
    for (i, step) in plan.steps.iter().enumerate() {
        write!(sink, "step {}:", i + 1)?;
        for &a in step {
            write!(sink, " {}", quote_name(&task.operators[a].name))?;
        }
        writeln!(sink)?;
    }
    writeln!(sink, ";; makespan {}", plan.makespan())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown action {name:?}")]
    UnknownAction { line: usize, name: String },
}

fn split_names(s: &str) -> Option<Vec<String>> {
    let mut names = Vec::new();
    let mut rest = s.trim_start();
    while !rest.is_empty() {
        if let Some(inner) = rest.strip_prefix('(') {
            let end = inner.find(')')?;
            names.push(inner[..end].to_string());
            rest = inner[end + 1..].trim_start();
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            names.push(rest[..end].to_string());
            rest = rest[end..].trim_start();
        }
    }
    Some(names)
}

/// Reads the format produced by [`write_plan`]. Lines starting with `;` are comments.
pub fn read_plan(text: &str, task: &SasTask) -> Result<ParallelPlan, PlanParseError> {
    let mut steps = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let no = no + 1;
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let syntax = |msg: &str| PlanParseError::Syntax {
            line: no,
            msg: msg.to_string(),
        };
        let rest = line.strip_prefix("step ").ok_or_else(|| syntax("expected 'step <t>:'"))?;
        let (num, names) = rest.split_once(':').ok_or_else(|| syntax("missing ':'"))?;
        let t: usize = num.trim().parse().map_err(|_| syntax("bad step number"))?;
        if t != steps.len() + 1 {
            return Err(syntax(&format!("expected step {}, found {t}", steps.len() + 1)));
        }
        let names = split_names(names).ok_or_else(|| syntax("unbalanced parenthesis"))?;
        let mut step = Vec::with_capacity(names.len());
        for name in names {
            match task.operator_index(&name) {
                Some(a) => step.push(a),
                None => return Err(PlanParseError::UnknownAction { line: no, name }),
            }
        }
        steps.push(step);
    }
    Ok(ParallelPlan::new(steps))
}

/// Per-horizon CSV: `N,vars,clauses,decisions,conflicts,status,wall_time_ms`.
pub fn write_telemetry(records: &[HorizonRecord], sink: &mut impl Write) -> io::Result<()> {
    writeln!(sink, "N,vars,clauses,decisions,conflicts,status,wall_time_ms")?;
    for r in records {
        writeln!(
            sink,
            "{},{},{},{},{},{},{}",
            r.horizon,
            r.vars,
            r.clauses,
            r.stats.decisions,
            r.stats.conflicts,
            r.status.as_str(),
            r.wall_time_ms
        )?;
    }
    Ok(())
}

/// Decision log CSV: `decision_ordinal,variable_id,role`.
pub fn write_decision_log(decisions: &[Decision], sink: &mut impl Write) -> io::Result<()> {
    writeln!(sink, "decision_ordinal,variable_id,role")?;
    for (i, d) in decisions.iter().enumerate() {
        writeln!(sink, "{},{},{}", i + 1, d.var, d.role)?;
    }
    Ok(())
}

pub fn read_decision_log(text: &str) -> Result<Vec<Decision>, PlanParseError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if no == 0 || line.is_empty() {
            continue;
        }
        let bad = || PlanParseError::Syntax {
            line: no + 1,
            msg: format!("malformed decision row {line:?}"),
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(bad());
        }
        let var = cols[1].parse().map_err(|_| bad())?;
        let role = Role::parse(cols[2]).ok_or_else(bad)?;
        out.push(Decision { var, role });
    }
    Ok(out)
}
