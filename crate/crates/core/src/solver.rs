//! Embedded CDCL solver with decision logging, and an adapter for external
//! DIMACS solvers.
//!
//! The embedded engine uses two watched literals, first-UIP learning,
//! VSIDS-style activities initialized to clause occurrence counts, additive
//! bumping of learned-clause variables, periodic multiplicative decay,
//! fixed-interval restarts and phase saving. Ties on activity are broken by
//! a random per-variable rank drawn from the configured seed.

use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{parse_solver_output, write_dimacs, Assignment, CnfInstance, SolverOutput};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Engine {
    Embedded,
    /// `command` is run through `sh -c` after replacing `{cnf}` with the
    /// path of the written instance.
    External { command: String, workdir: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub engine: Engine,
    pub decay_interval: u64,
    pub decay_factor: f64,
    pub restart_interval: u64,
    pub seed: u64,
    pub decision_log: bool,
    /// Give up with `Unknown` after this many conflicts.
    pub max_conflicts: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            engine: Engine::Embedded,
            decay_interval: 256,
            decay_factor: 0.5,
            restart_interval: 512,
            seed: 0,
            decision_log: false,
            max_conflicts: None,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<(), SolveError> {
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return Err(SolveError::Config(format!(
                "decay factor must be in (0, 1], got {}",
                self.decay_factor
            )));
        }
        if self.decay_interval == 0 || self.restart_interval == 0 {
            return Err(SolveError::Config("intervals must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Unknown,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Sat => "SAT",
            SolveStatus::Unsat => "UNSAT",
            SolveStatus::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub assignment: Option<Assignment>,
    pub stats: SolveStats,
    /// Decided variable ids in order, when logging is enabled.
    pub decision_log: Vec<u32>,
    pub diagnostic: Option<String>,
}

impl SolveResult {
    fn unknown(diagnostic: String) -> Self {
        SolveResult {
            status: SolveStatus::Unknown,
            assignment: None,
            stats: SolveStats::default(),
            decision_log: Vec::new(),
            diagnostic: Some(diagnostic),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("solver reported SAT but the model falsifies clause {clause}")]
    Integrity { clause: usize },
    #[error("cannot write instance: {0}")]
    Io(#[from] std::io::Error),
}

/// Solves with the configured engine. A SAT answer is only returned after
/// the model has been checked against every clause.
pub fn solve(cnf: &CnfInstance, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    cfg.check()?;
    match &cfg.engine {
        Engine::Embedded => {
            let result = Cdcl::new(cnf, cfg).run();
            verify(cnf, result)
        }
        Engine::External { command, workdir } => {
            let dir = workdir.clone().unwrap_or_else(std::env::temp_dir);
            solve_external(cnf, command, &dir)
        }
    }
}

fn verify(cnf: &CnfInstance, result: SolveResult) -> Result<SolveResult, SolveError> {
    if let Some(a) = &result.assignment {
        if let Some(clause) = a.first_falsified(cnf) {
            return Err(SolveError::Integrity { clause });
        }
    }
    Ok(result)
}

static INSTANCE_SERIAL: AtomicU64 = AtomicU64::new(0);

/// Writes the instance to `workdir`, runs the command template and parses
/// its SAT-competition output.
pub fn solve_external(cnf: &CnfInstance, template: &str, workdir: &std::path::Path) -> Result<SolveResult, SolveError> {
    if !template.contains("{cnf}") {
        return Err(SolveError::Config("command template lacks a {cnf} placeholder".into()));
    }
    let serial = INSTANCE_SERIAL.fetch_add(1, Ordering::Relaxed);
    let path = workdir.join(format!("sasplan-{}-{serial}.cnf", std::process::id()));
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        write_dimacs(cnf, &mut f, None)?;
        std::io::Write::flush(&mut f)?;
    }
    let command = template.replace("{cnf}", &path.display().to_string());
    let output = Command::new("sh").arg("-c").arg(&command).output();
    let _ = std::fs::remove_file(&path);
    let output = match output {
        Ok(o) => o,
        Err(e) => return Ok(SolveResult::unknown(format!("cannot run {command:?}: {e}"))),
    };
    let stdout = String::from_utf8_lossy(&output.stdout);
    let parsed = match parse_solver_output(&stdout) {
        Ok(p) => p,
        Err(e) => return Ok(SolveResult::unknown(e.to_string())),
    };
    let (status, assignment) = match parsed {
        SolverOutput::Sat(a) => (SolveStatus::Sat, Some(a)),
        SolverOutput::Unsat => (SolveStatus::Unsat, None),
        SolverOutput::Unknown => {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Ok(SolveResult::unknown(format!(
                "no status line from {command:?} ({}): {}",
                output.status,
                stderr.trim()
            )));
        }
    };
    verify(
        cnf,
        SolveResult {
            status,
            assignment,
            stats: SolveStats::default(),
            decision_log: Vec::new(),
            diagnostic: None,
        },
    )
}

// Literal codes: 2*v for v, 2*v+1 for ¬v.
type L = usize;

fn code(l: crate::cnf::Lit) -> L {
    2 * l.var() as usize + usize::from(!l.is_positive())
}

const UNDEF: i8 = 0;

/// Value of a literal code under per-variable values (1 true, -1 false).
fn lit_value(assign: &[i8], l: L) -> i8 {
    let v = assign[l >> 1];
    if l & 1 == 1 {
        -v
    } else {
        v
    }
}

/// Max-heap of variables ordered by (activity, random rank).
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(n),
            pos: vec![ABSENT; n + 1],
        }
    }

    fn better(a: usize, b: usize, act: &[f64], rank: &[u32]) -> bool {
        act[a] > act[b] || (act[a] == act[b] && rank[a] < rank[b])
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != ABSENT
    }

    fn up(&mut self, mut i: usize, act: &[f64], rank: &[u32]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(v, self.heap[parent], act, rank) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn down(&mut self, mut i: usize, act: &[f64], rank: &[u32]) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len() && Self::better(self.heap[right], self.heap[left], act, rank) {
                right
            } else {
                left
            };
            if !Self::better(self.heap[child], v, act, rank) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i]] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn insert(&mut self, v: usize, act: &[f64], rank: &[u32]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.pos[v] = self.heap.len() - 1;
        self.up(self.heap.len() - 1, act, rank);
    }

    fn pop(&mut self, act: &[f64], rank: &[u32]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top] = ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.down(0, act, rank);
        }
        Some(top)
    }

    fn increased(&mut self, v: usize, act: &[f64], rank: &[u32]) {
        if self.contains(v) {
            self.up(self.pos[v], act, rank);
        }
    }

    fn rebuild(&mut self, act: &[f64], rank: &[u32]) {
        for i in (0..self.heap.len() / 2).rev() {
            self.down(i, act, rank);
        }
    }
}

/// The embedded CDCL engine for one instance.
pub struct Cdcl {
    num_vars: usize,
    clauses: Vec<Vec<L>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<L>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    rank: Vec<u32>,
    phase: Vec<bool>,
    heap: VarHeap,
    seen: Vec<bool>,
    units: Vec<L>,
    trivially_unsat: bool,
    cfg: SolverConfig,
    stats: SolveStats,
    log: Vec<u32>,
}

impl Cdcl {
    pub fn new(cnf: &CnfInstance, cfg: &SolverConfig) -> Self {
        let n = cnf.var_count() as usize;
        let mut activity = vec![0.0; n + 1];
        let mut clauses = Vec::with_capacity(cnf.num_clauses());
        let mut watches = vec![Vec::new(); 2 * n + 2];
        let mut units = Vec::new();
        for c in cnf.clauses() {
            for l in c {
                activity[l.var() as usize] += 1.0;
            }
            let lits: Vec<L> = c.iter().map(|&l| code(l)).collect();
            if lits.len() == 1 {
                units.push(lits[0]);
            } else {
                watches[lits[0]].push(clauses.len());
                watches[lits[1]].push(clauses.len());
                clauses.push(lits);
            }
        }
        let mut rank: Vec<u32> = (0..=n as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rank[1..].shuffle(&mut rng);
        let mut heap = VarHeap::new(n);
        for v in 1..=n {
            heap.insert(v, &activity, &rank);
        }
        Cdcl {
            num_vars: n,
            clauses,
            watches,
            assign: vec![UNDEF; n + 1],
            level: vec![0; n + 1],
            reason: vec![None; n + 1],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            rank,
            phase: vec![false; n + 1],
            heap,
            seen: vec![false; n + 1],
            units,
            trivially_unsat: false,
            cfg: cfg.clone(),
            stats: SolveStats::default(),
            log: Vec::new(),
        }
    }

    /// Current activity of every variable, indexed by id (entry 0 unused).
    pub fn activity(&self) -> &[f64] {
        &self.activity
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: L, reason: Option<usize>) {
        let v = l >> 1;
        self.assign[v] = if l & 1 == 1 { -1 } else { 1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause index.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                if lit_value(&self.assign, c[0]) == 1 {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                if let Some(k) = (2..c.len()).find(|&k| lit_value(&self.assign, c[k]) != -1) {
                    c.swap(1, k);
                    self.watches[c[1]].push(ci);
                    continue;
                }
                ws[j] = ci;
                j += 1;
                let first = c[0];
                if lit_value(&self.assign, first) == -1 {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(j);
            self.watches[false_lit] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP analysis. Returns the learned clause (asserting literal
    /// first, a literal of the backjump level second) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<L>, u32) {
        let mut learnt: Vec<L> = vec![0];
        let mut pending = 0;
        let mut p: Option<L> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            for k in 0..self.clauses[confl].len() {
                let q = self.clauses[confl][k];
                if Some(q) == p {
                    continue;
                }
                let v = q >> 1;
                if self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                if self.level[v] >= current {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx] >> 1] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit >> 1] = false;
            pending -= 1;
            if pending == 0 {
                learnt[0] = lit ^ 1;
                break;
            }
            p = Some(lit);
            confl = self.reason[lit >> 1].expect("implied literal has a reason");
        }
        for &q in &learnt[1..] {
            self.seen[q >> 1] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let (best, _) = learnt[1..]
                .iter()
                .enumerate()
                .max_by_key(|(_, &q)| self.level[q >> 1])
                .expect("non-empty");
            learnt.swap(1, best + 1);
            back = self.level[learnt[1] >> 1];
        }
        (learnt, back)
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l >> 1;
            self.phase[v] = l & 1 == 0;
            self.assign[v] = UNDEF;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity, &self.rank);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn bump(&mut self, lits: &[L]) {
        for &l in lits {
            let v = l >> 1;
            self.activity[v] += 1.0;
            self.heap.increased(v, &self.activity, &self.rank);
        }
    }

    fn decay(&mut self) {
        let f = self.cfg.decay_factor;
        for a in &mut self.activity {
            *a *= f;
        }
        self.heap.rebuild(&self.activity, &self.rank);
    }

    fn pick_branch(&mut self) -> Option<usize> {
        while let Some(v) = self.heap.pop(&self.activity, &self.rank) {
            if self.assign[v] == UNDEF {
                return Some(v);
            }
        }
        None
    }

    fn finish(self, status: SolveStatus) -> SolveResult {
        let assignment = (status == SolveStatus::Sat).then(|| {
            let mut a = Assignment::new(self.num_vars as u32);
            for v in 1..=self.num_vars {
                a.set(v as u32, self.assign[v] == 1);
            }
            a
        });
        SolveResult {
            status,
            assignment,
            stats: self.stats,
            decision_log: self.log,
            diagnostic: None,
        }
    }

    pub fn run(mut self) -> SolveResult {
        for l in std::mem::take(&mut self.units) {
            match lit_value(&self.assign, l) {
                1 => {}
                -1 => self.trivially_unsat = true,
                _ => self.enqueue(l, None),
            }
        }
        if self.trivially_unsat || self.propagate().is_some() {
            return self.finish(SolveStatus::Unsat);
        }
        let mut conflicts_since_restart = 0;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    return self.finish(SolveStatus::Unsat);
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                self.bump(&learnt);
                self.stats.learned += 1;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let ci = self.clauses.len();
                    self.watches[learnt[0]].push(ci);
                    self.watches[learnt[1]].push(ci);
                    let asserting = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(asserting, Some(ci));
                }
                if self.cfg.max_conflicts.is_some_and(|m| self.stats.conflicts >= m) {
                    return self.finish(SolveStatus::Unknown);
                }
                if conflicts_since_restart >= self.cfg.restart_interval {
                    conflicts_since_restart = 0;
                    self.stats.restarts += 1;
                    self.backtrack(0);
                }
                continue;
            }
            let Some(v) = self.pick_branch() else {
                return self.finish(SolveStatus::Sat);
            };
            self.stats.decisions += 1;
            if self.cfg.decision_log {
                self.log.push(v as u32);
            }
            if self.stats.decisions.is_multiple_of(self.cfg.decay_interval) {
                self.decay();
            }
            self.trail_lim.push(self.trail.len());
            let l = 2 * v + usize::from(!self.phase[v]);
            self.enqueue(l, None);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Lit;

    fn cnf(n: u32, clauses: &[&[i32]]) -> CnfInstance {
        let mut c = CnfInstance::with_vars(n);
        for cl in clauses {
            let lits: Vec<Lit> = cl.iter().map(|&v| Lit::from_dimacs(v)).collect();
            c.add_clause(&lits, "t").unwrap();
        }
        c
    }

    fn brute_force(c: &CnfInstance) -> bool {
        let n = c.var_count();
        (0..1u64 << n).any(|bits| {
            let a = Assignment::from_true_vars(n, (1..=n).filter(|v| bits >> (v - 1) & 1 == 1));
            a.satisfies(c)
        })
    }

    #[test]
    fn unit_forcing() {
        let c = cnf(2, &[&[1, 2], &[-1]]);
        let r = solve(&c, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Sat);
        assert!(r.assignment.unwrap().value(2));
    }

    #[test]
    fn contradictory_units() {
        let c = cnf(1, &[&[1], &[-1]]);
        assert_eq!(solve(&c, &SolverConfig::default()).unwrap().status, SolveStatus::Unsat);
    }

    #[test]
    fn empty_instance_is_sat() {
        let c = CnfInstance::with_vars(3);
        assert_eq!(solve(&c, &SolverConfig::default()).unwrap().status, SolveStatus::Sat);
    }

    #[test]
    fn pigeonhole_three_into_two() {
        // p(i,h) = 2*i + h + 1
        let mut cl: Vec<Vec<i32>> = Vec::new();
        for i in 0..3 {
            cl.push(vec![2 * i + 1, 2 * i + 2]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    cl.push(vec![-(2 * i + h + 1), -(2 * j + h + 1)]);
                }
            }
        }
        let refs: Vec<&[i32]> = cl.iter().map(|c| c.as_slice()).collect();
        let r = solve(&cnf(6, &refs), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Unsat);
        assert!(r.stats.conflicts > 0);
    }

    #[test]
    fn random_3cnf_matches_truth_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        use rand::Rng;
        for _ in 0..60 {
            let n = rng.gen_range(3..=12u32);
            let m = rng.gen_range(1..=(5 * n) as usize);
            let mut c = CnfInstance::with_vars(n);
            for _ in 0..m {
                let lits: Vec<Lit> = (0..3)
                    .map(|_| {
                        let v = rng.gen_range(1..=n) as i32;
                        Lit::from_dimacs(if rng.gen_bool(0.5) { v } else { -v })
                    })
                    .collect();
                c.add_clause(&lits, "t").unwrap();
            }
            let r = solve(&c, &SolverConfig::default()).unwrap();
            assert_eq!(r.status == SolveStatus::Sat, brute_force(&c));
        }
    }

    #[test]
    fn initial_activity_is_occurrence_count() {
        let c = cnf(3, &[&[1, 2], &[-1, 2], &[2, -3]]);
        let s = Cdcl::new(&c, &SolverConfig::default());
        assert_eq!(&s.activity()[1..], &[2.0, 3.0, 1.0]);
    }

    #[test]
    fn decision_log_is_deterministic_and_complete() {
        let c = cnf(5, &[&[1, 2, 3], &[-1, -2], &[-2, -3], &[3, 4, 5], &[-4, -5], &[-1, 4]]);
        let cfg = SolverConfig {
            decision_log: true,
            seed: 42,
            ..Default::default()
        };
        let r1 = solve(&c, &cfg).unwrap();
        let r2 = solve(&c, &cfg).unwrap();
        assert_eq!(r1.decision_log, r2.decision_log);
        assert_eq!(r1.decision_log.len() as u64, r1.stats.decisions);
    }

    #[test]
    fn conflict_limit_gives_unknown() {
        let mut cl: Vec<Vec<i32>> = Vec::new();
        for i in 0..5 {
            cl.push((0..4).map(|h| 4 * i + h + 1).collect());
        }
        for h in 0..4 {
            for i in 0..5 {
                for j in i + 1..5 {
                    cl.push(vec![-(4 * i + h + 1), -(4 * j + h + 1)]);
                }
            }
        }
        let refs: Vec<&[i32]> = cl.iter().map(|c| c.as_slice()).collect();
        let cfg = SolverConfig {
            max_conflicts: Some(1),
            ..Default::default()
        };
        assert_eq!(solve(&cnf(20, &refs), &cfg).unwrap().status, SolveStatus::Unknown);
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = SolverConfig {
            decay_factor: 0.0,
            ..Default::default()
        };
        assert!(matches!(solve(&CnfInstance::new(), &cfg), Err(SolveError::Config(_))));
    }

    #[test]
    fn external_lying_solver_is_caught() {
        let dir = tempfile::tempdir().unwrap();
        let c = cnf(2, &[&[1], &[2]]);
        let err = solve_external(&c, "cat {cnf} >/dev/null; echo 's SATISFIABLE'; echo 'v -1 -2 0'", dir.path()).unwrap_err();
        assert!(matches!(err, SolveError::Integrity { .. }));
    }

    #[test]
    fn external_unsat_and_missing_binary() {
        let dir = tempfile::tempdir().unwrap();
        let c = cnf(1, &[&[1]]);
        let r = solve_external(&c, "echo 's UNSATISFIABLE' # {cnf}", dir.path()).unwrap();
        assert_eq!(r.status, SolveStatus::Unsat);
        let r = solve_external(&c, "/nonexistent/solver-binary {cnf}", dir.path()).unwrap();
        assert_eq!(r.status, SolveStatus::Unknown);
        assert!(r.diagnostic.unwrap().contains("no status line"));
    }

    #[test]
    fn external_template_needs_placeholder() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            solve_external(&CnfInstance::new(), "minisat", dir.path()),
            Err(SolveError::Config(_))
        ));
    }
}
