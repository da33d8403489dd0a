//! CNF construction: variable identities, clause storage, at-most-one
//! encodings, DIMACS I/O and SAT-competition output parsing.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::ops::Not;

use thiserror::Error;

/// A DIMACS-style signed literal. The variable id is `abs()`, always >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn pos(var: u32) -> Lit {
        debug_assert!(var > 0);
        Lit(var as i32)
    }

    pub fn neg(var: u32) -> Lit {
        debug_assert!(var > 0);
        Lit(-(var as i32))
    }

    pub fn from_dimacs(v: i32) -> Lit {
        debug_assert!(v != 0);
        Lit(v)
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Action,
    Transition,
    Fact,
    Auxiliary,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Action => "action",
            Role::Transition => "transition",
            Role::Fact => "fact",
            Role::Auxiliary => "aux",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "action" => Some(Role::Action),
            "transition" => Some(Role::Transition),
            "fact" => Some(Role::Fact),
            "aux" => Some(Role::Auxiliary),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a CNF variable stands for. Auxiliary keys carry a serial number and no time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub role: Role,
    pub object: u32,
    pub time: Option<u32>,
}

impl VarKey {
    pub fn action(object: usize, time: usize) -> Self {
        VarKey {
            role: Role::Action,
            object: object as u32,
            time: Some(time as u32),
        }
    }

    pub fn transition(object: usize, time: usize) -> Self {
        VarKey {
            role: Role::Transition,
            object: object as u32,
            time: Some(time as u32),
        }
    }

    pub fn fact(object: usize, time: usize) -> Self {
        VarKey {
            role: Role::Fact,
            object: object as u32,
            time: Some(time as u32),
        }
    }

    pub fn aux(serial: u32) -> Self {
        VarKey {
            role: Role::Auxiliary,
            object: serial,
            time: None,
        }
    }
}

/// Names the object behind a key for DIMACS comment dumps.
pub trait KeyNamer {
    fn object_name(&self, key: &VarKey) -> String;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("variable key {0:?} is already allocated")]
    DuplicateKey(VarKey),
    #[error("clause references unallocated variable {0}")]
    UnknownVariable(u32),
    #[error("empty clause")]
    EmptyClause,
    #[error("at-most-one over an empty set")]
    EmptyAtMostOne,
    #[error("line {line}: {msg}")]
    Dimacs { line: usize, msg: String },
    #[error("solver output: {0}")]
    SolverOutput(String),
}

/// Allocation of fresh auxiliary variables.
pub trait AuxAllocator {
    fn fresh_aux(&mut self) -> u32;
}

#[derive(Debug, Clone, Default)]
pub struct CnfInstance {
    keys: Vec<VarKey>,
    by_key: HashMap<VarKey, u32>,
    next_aux: u32,
    clauses: Vec<Vec<Lit>>,
    tags: Vec<&'static str>,
}

impl CnfInstance {
    pub fn new() -> Self {
        Self::default()
    }

    /// An instance with `n` anonymous (auxiliary) variables.
    pub fn with_vars(n: u32) -> Self {
        let mut cnf = Self::new();
        for _ in 0..n {
            cnf.fresh_aux();
        }
        cnf
    }

    pub fn alloc(&mut self, key: VarKey) -> Result<u32, CnfError> {
        if self.by_key.contains_key(&key) {
            return Err(CnfError::DuplicateKey(key));
        }
        self.keys.push(key);
        let id = self.keys.len() as u32;
        self.by_key.insert(key, id);
        Ok(id)
    }

    pub fn lookup(&self, key: &VarKey) -> Option<u32> {
        self.by_key.get(key).copied()
    }

    pub fn key_of(&self, var: u32) -> Option<&VarKey> {
        self.keys.get((var as usize).checked_sub(1)?)
    }

    pub fn var_count(&self) -> u32 {
        self.keys.len() as u32
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Class label of each clause, parallel to [`clauses`](Self::clauses).
    pub fn tags(&self) -> &[&'static str] {
        &self.tags
    }

    pub fn clauses_tagged<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a [Lit]> + 'a {
        self.clauses
            .iter()
            .zip(&self.tags)
            .filter(move |(_, t)| **t == tag)
            .map(|(c, _)| c.as_slice())
    }

    /// Adds a clause after removing duplicate literals. Tautologies are
    /// dropped; the return value says whether the clause was stored.
    pub fn add_clause(&mut self, lits: &[Lit], tag: &'static str) -> Result<bool, CnfError> {
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable_by_key(|l| (l.var(), l.is_positive()));
        c.dedup();
        if c.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        for w in c.windows(2) {
            if w[0].var() == w[1].var() {
                return Ok(false);
            }
        }
        if let Some(l) = c.iter().find(|l| l.var() > self.var_count()) {
            return Err(CnfError::UnknownVariable(l.var()));
        }
        self.clauses.push(c);
        self.tags.push(tag);
        Ok(true)
    }

    pub fn count_by_role(&self, role: Role) -> usize {
        self.keys.iter().filter(|k| k.role == role).count()
    }
}

impl AuxAllocator for CnfInstance {
    fn fresh_aux(&mut self) -> u32 {
        let key = VarKey::aux(self.next_aux);
        self.next_aux += 1;
        self.alloc(key).expect("aux serials are unique")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CliqueMode {
    Pairwise,
    #[default]
    Binary,
}

fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Clauses allowing at most one of `members` to be true.
///
/// Binary mode gives every member a distinct codeword over `ceil(log2 n)`
/// fresh bits and emits only `member -> codeword`, so all members may be false.
pub fn at_most_one(members: &[Lit], mode: CliqueMode, alloc: &mut impl AuxAllocator) -> Result<Vec<Vec<Lit>>, CnfError> {
    if members.is_empty() {
        return Err(CnfError::EmptyAtMostOne);
    }
    let n = members.len();
    let mut out = Vec::new();
    match mode {
        CliqueMode::Pairwise => {
            for i in 0..n {
                for j in i + 1..n {
                    out.push(vec![!members[i], !members[j]]);
                }
            }
        }
        CliqueMode::Binary => {
            let bits: Vec<u32> = (0..ceil_log2(n)).map(|_| alloc.fresh_aux()).collect();
            for (code, &m) in members.iter().enumerate() {
                for (j, &b) in bits.iter().enumerate() {
                    let bit = if code >> j & 1 == 1 { Lit::pos(b) } else { Lit::neg(b) };
                    out.push(vec![!m, bit]);
                }
            }
        }
    }
    Ok(out)
}

/// Writes DIMACS CNF; with a namer, comment lines map ids to keys first.
pub fn write_dimacs(cnf: &CnfInstance, sink: &mut impl Write, namer: Option<&dyn KeyNamer>) -> io::Result<()> {
    if let Some(namer) = namer {
        for (i, key) in cnf.keys.iter().enumerate() {
            let name = namer.object_name(key);
            match key.time {
                Some(t) => writeln!(sink, "c var {} = {}:{}@{}", i + 1, key.role, name, t)?,
                None => writeln!(sink, "c var {} = {}:{}", i + 1, key.role, name)?,
            }
        }
    }
    writeln!(sink, "p cnf {} {}", cnf.var_count(), cnf.num_clauses())?;
    let mut line = String::new();
    for c in &cnf.clauses {
        line.clear();
        for l in c {
            line.push_str(&l.to_dimacs().to_string());
            line.push(' ');
        }
        line.push('0');
        writeln!(sink, "{line}")?;
    }
    Ok(())
}

/// Reads DIMACS CNF. Clauses may span lines; comments and a trailing `%` are skipped.
pub fn read_dimacs(text: &str) -> Result<CnfInstance, CnfError> {
    let err = |line: usize, msg: &str| CnfError::Dimacs {
        line,
        msg: msg.to_string(),
    };
    let mut header: Option<(u32, usize)> = None;
    let mut cnf = CnfInstance::new();
    let mut current: Vec<Lit> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let no = no + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" || header.is_some() {
                return Err(err(no, "malformed problem line"));
            }
            let vars = parts[2].parse().map_err(|_| err(no, "bad variable count"))?;
            let clauses = parts[3].parse().map_err(|_| err(no, "bad clause count"))?;
            header = Some((vars, clauses));
            cnf = CnfInstance::with_vars(vars);
            continue;
        }
        let (vars, _) = header.ok_or_else(|| err(no, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let v: i32 = tok.parse().map_err(|_| err(no, "bad literal"))?;
            if v == 0 {
                let added = if current.is_empty() {
                    Err(CnfError::EmptyClause)
                } else {
                    cnf.add_clause(&current, "dimacs")
                };
                added.map_err(|e| err(no, &e.to_string()))?;
                current.clear();
            } else {
                if v.unsigned_abs() > vars {
                    return Err(err(no, "literal exceeds declared variable count"));
                }
                current.push(Lit::from_dimacs(v));
            }
        }
    }
    if !current.is_empty() {
        cnf.add_clause(&current, "dimacs")
            .map_err(|e| err(text.lines().count(), &e.to_string()))?;
    }
    if header.is_none() {
        return Err(err(0, "missing problem line"));
    }
    Ok(cnf)
}

/// A total truth assignment indexed by variable id; unmentioned variables are false.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(var_count: u32) -> Self {
        Assignment {
            values: vec![false; var_count as usize + 1],
        }
    }

    pub fn from_true_vars(var_count: u32, true_vars: impl IntoIterator<Item = u32>) -> Self {
        let mut a = Self::new(var_count);
        for v in true_vars {
            a.set(v, true);
        }
        a
    }

    pub fn value(&self, var: u32) -> bool {
        self.values.get(var as usize).copied().unwrap_or(false)
    }

    pub fn lit_true(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn set(&mut self, var: u32, value: bool) {
        let i = var as usize;
        if i >= self.values.len() {
            self.values.resize(i + 1, false);
        }
        self.values[i] = value;
    }

    pub fn satisfies(&self, cnf: &CnfInstance) -> bool {
        self.first_falsified(cnf).is_none()
    }

    /// Index of the first clause the assignment falsifies.
    pub fn first_falsified(&self, cnf: &CnfInstance) -> Option<usize> {
        cnf.clauses().iter().position(|c| !c.iter().any(|&l| self.lit_true(l)))
    }

    pub fn true_vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.values.iter().enumerate().skip(1).filter(|(_, &v)| v).map(|(i, _)| i as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverOutput {
    Sat(Assignment),
    Unsat,
    Unknown,
}

/// Parses SAT-competition style output (`s` status and `v` value lines).
pub fn parse_solver_output(text: &str) -> Result<SolverOutput, CnfError> {
    let mut status: Option<&str> = None;
    let mut seen: HashMap<u32, bool> = HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(rest.trim());
        } else if let Some(rest) = line.strip_prefix("v ").or_else(|| (line == "v").then_some("")) {
            for tok in rest.split_whitespace() {
                let v: i32 = tok
                    .parse()
                    .map_err(|_| CnfError::SolverOutput(format!("bad value literal {tok:?}")))?;
                if v == 0 {
                    continue;
                }
                let (var, val) = (v.unsigned_abs(), v > 0);
                if let Some(&prev) = seen.get(&var) {
                    if prev != val {
                        return Err(CnfError::SolverOutput(format!("variable {var} given both polarities")));
                    }
                }
                seen.insert(var, val);
            }
        }
    }
    Ok(match status {
        Some("SATISFIABLE") => {
            let max = seen.keys().copied().max().unwrap_or(0);
            let true_vars = seen.iter().filter(|(_, &v)| v).map(|(&k, _)| k);
            SolverOutput::Sat(Assignment::from_true_vars(max, true_vars))
        }
        Some("UNSATISFIABLE") => SolverOutput::Unsat,
        _ => SolverOutput::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Counter(u32);
    impl AuxAllocator for Counter {
        fn fresh_aux(&mut self) -> u32 {
            self.0 += 1;
            self.0
        }
    }

    #[test]
    fn alloc_is_dense_and_bijective() {
        let mut cnf = CnfInstance::new();
        let k = VarKey::transition(3, 1);
        assert_eq!(cnf.alloc(k).unwrap(), 1);
        assert_eq!(cnf.lookup(&k), Some(1));
        assert_eq!(cnf.key_of(1), Some(&k));
        assert_eq!(cnf.alloc(VarKey::action(0, 1)).unwrap(), 2);
        assert_eq!(cnf.alloc(k), Err(CnfError::DuplicateKey(k)));
    }

    #[test]
    fn add_clause_normalizes() {
        let mut cnf = CnfInstance::with_vars(2);
        assert!(cnf.add_clause(&[Lit::pos(1), Lit::pos(1), Lit::neg(2)], "t").unwrap());
        assert_eq!(cnf.clauses()[0], vec![Lit::pos(1), Lit::neg(2)]);
        assert!(!cnf.add_clause(&[Lit::pos(1), Lit::neg(1)], "t").unwrap());
        assert_eq!(cnf.add_clause(&[], "t"), Err(CnfError::EmptyClause));
        assert_eq!(cnf.add_clause(&[Lit::pos(3)], "t"), Err(CnfError::UnknownVariable(3)));
    }

    #[test]
    fn at_most_one_counts() {
        let lits = |n: u32| (100..100 + n).map(Lit::pos).collect::<Vec<_>>();
        let mut c = Counter(0);
        assert_eq!(at_most_one(&lits(3), CliqueMode::Binary, &mut c).unwrap().len(), 6);
        assert_eq!(c.0, 2);
        for mode in [CliqueMode::Binary, CliqueMode::Pairwise] {
            let mut c = Counter(0);
            assert!(at_most_one(&lits(1), mode, &mut c).unwrap().is_empty());
            assert_eq!(c.0, 0);
        }
        assert_eq!(at_most_one(&lits(4), CliqueMode::Pairwise, &mut Counter(0)).unwrap().len(), 6);
        assert_eq!(at_most_one(&[], CliqueMode::Pairwise, &mut Counter(0)), Err(CnfError::EmptyAtMostOne));
    }

    #[test]
    fn dimacs_format() {
        let mut cnf = CnfInstance::with_vars(2);
        cnf.add_clause(&[Lit::pos(1), Lit::neg(2)], "t").unwrap();
        let mut out = Vec::new();
        write_dimacs(&cnf, &mut out, None).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "p cnf 2 1\n1 -2 0\n");

        let empty = CnfInstance::with_vars(5);
        let mut out = Vec::new();
        write_dimacs(&empty, &mut out, None).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "p cnf 5 0\n");
    }

    #[test]
    fn key_dump_comments() {
        struct N;
        impl KeyNamer for N {
            fn object_name(&self, key: &VarKey) -> String {
                format!("o{}", key.object)
            }
        }
        let mut cnf = CnfInstance::new();
        cnf.alloc(VarKey::action(2, 3)).unwrap();
        cnf.fresh_aux();
        let mut out = Vec::new();
        write_dimacs(&cnf, &mut out, Some(&N)).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "c var 1 = action:o2@3\nc var 2 = aux:o0\np cnf 2 0\n"
        );
    }

    #[test]
    fn read_dimacs_multiline_clause() {
        let cnf = read_dimacs("c hi\np cnf 3 2\n1 -3\n 2 0 -1 0\n").unwrap();
        assert_eq!(cnf.var_count(), 3);
        assert_eq!(cnf.clauses(), &[vec![Lit::pos(1), Lit::pos(2), Lit::neg(3)], vec![Lit::neg(1)]]);
        assert!(read_dimacs("1 2 0\n").is_err());
        assert!(read_dimacs("p cnf 1 1\n2 0\n").is_err());
    }

    #[test]
    fn solver_output_parsing() {
        assert_eq!(parse_solver_output("s UNSATISFIABLE\n").unwrap(), SolverOutput::Unsat);
        let SolverOutput::Sat(a) = parse_solver_output("c x\ns SATISFIABLE\nv 1 -2 0\n").unwrap() else {
            panic!()
        };
        assert!(a.value(1));
        assert!(!a.value(2));
        assert!(!a.value(7));
        assert_eq!(parse_solver_output("c nothing\n").unwrap(), SolverOutput::Unknown);
        assert!(parse_solver_output("s SATISFIABLE\nv 1 -1 0\n").is_err());
    }

    /// Brute-force check of the at-most-one projection property.
    fn projection_holds(n: usize, mode: CliqueMode) -> bool {
        let members: Vec<Lit> = (1..=n as u32).map(Lit::pos).collect();
        let mut c = Counter(n as u32);
        let clauses = at_most_one(&members, mode, &mut c).unwrap();
        let total = c.0 as usize;
        let aux = total - n;
        for m in 0u32..(1 << n) {
            let extendable = (0u32..(1 << aux)).any(|x| {
                let val = |v: u32| -> bool {
                    let i = v as usize - 1;
                    if i < n {
                        m >> i & 1 == 1
                    } else {
                        x >> (i - n) & 1 == 1
                    }
                };
                clauses.iter().all(|cl| cl.iter().any(|l| val(l.var()) == l.is_positive()))
            });
            if extendable != (m.count_ones() <= 1) {
                return false;
            }
        }
        true
    }

    #[test]
    fn at_most_one_projection_exhaustive() {
        for n in 1..=8 {
            assert!(projection_holds(n, CliqueMode::Binary), "binary n={n}");
            assert!(projection_holds(n, CliqueMode::Pairwise), "pairwise n={n}");
        }
    }

    proptest! {
        #[test]
        fn dimacs_round_trip(clauses in proptest::collection::vec(
            proptest::collection::vec((1u32..=12, any::<bool>()), 1..6), 0..30)) {
            let mut cnf = CnfInstance::with_vars(12);
            for c in &clauses {
                let lits: Vec<Lit> = c.iter().map(|&(v, p)| if p { Lit::pos(v) } else { Lit::neg(v) }).collect();
                cnf.add_clause(&lits, "dimacs").unwrap();
            }
            let mut out = Vec::new();
            write_dimacs(&cnf, &mut out, None).unwrap();
            let back = read_dimacs(std::str::from_utf8(&out).unwrap()).unwrap();
            let mut a = cnf.clauses().to_vec();
            let mut b = back.clauses().to_vec();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
            prop_assert_eq!(back.var_count(), 12);
        }
    }
}
