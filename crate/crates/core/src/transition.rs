//! Transitions, supporting action sets and the mutex relations between
//! transitions and between actions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::sas::{SasTask, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    Regular,
    Prevailing,
    Mechanical,
}

/// A value change on one variable. `source == None` is the mechanical case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub var: usize,
    pub source: Option<usize>,
    pub target: usize,
}

impl Transition {
    pub fn kind(&self) -> TransitionKind {
        match self.source {
            None => TransitionKind::Mechanical,
            Some(s) if s == self.target => TransitionKind::Prevailing,
            Some(_) => TransitionKind::Regular,
        }
    }

    pub fn is_prevailing(&self) -> bool {
        self.kind() == TransitionKind::Prevailing
    }

    pub fn is_mechanical(&self) -> bool {
        self.source.is_none()
    }

    pub fn applicable(&self, state: &[usize]) -> bool {
        self.source.is_none_or(|s| state[self.var] == s)
    }

    /// Human-readable form such as `x:f->g` or `x:*->g`.
    pub fn display<'a>(&'a self, task: &'a SasTask) -> TransitionDisplay<'a> {
        TransitionDisplay { t: self, task }
    }
}

pub struct TransitionDisplay<'a> {
    t: &'a Transition,
    task: &'a SasTask,
}

impl fmt::Display for TransitionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = &self.task.variables[self.t.var];
        let src = self.t.source.map_or("*", |s| var.domain[s].as_str());
        write!(f, "{}:{}->{}", var.name, src, var.domain[self.t.target])
    }
}

/// Two distinct transitions on the same variable are mutex unless one of them
/// is mechanical and both reach the same value.
pub fn transition_mutex(d1: &Transition, d2: &Transition) -> bool {
    if d1 == d2 || d1.var != d2.var {
        return false;
    }
    if !d1.is_mechanical() && !d2.is_mechanical() {
        return true;
    }
    d1.target != d2.target
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("transition {0} is not applicable in the current state")]
    Inapplicable(String),
    #[error("transitions {0} and {1} are mutually exclusive")]
    Mutex(String, String),
}

/// The interned transition structure of a task.
///
/// Only transitions that some operator performs are instantiated, plus every
/// prevailing transition of every variable. Transitions are grouped by
/// variable, so `per_variable(x)` is a contiguous index range.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    all: Vec<Transition>,
    index: HashMap<Transition, usize>,
    per_variable: Vec<Vec<usize>>,
    supporters: Vec<Vec<usize>>,
    trans_of: Vec<Vec<usize>>,
}

impl TransitionTable {
    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn all(&self) -> &[Transition] {
        &self.all
    }

    pub fn get(&self, id: usize) -> &Transition {
        &self.all[id]
    }

    pub fn id_of(&self, t: &Transition) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// `T(x)` as transition ids.
    pub fn per_variable(&self, var: usize) -> &[usize] {
        &self.per_variable[var]
    }

    pub fn num_variables(&self) -> usize {
        self.per_variable.len()
    }

    /// `A(δ)`, sorted.
    pub fn supporters(&self, id: usize) -> &[usize] {
        &self.supporters[id]
    }

    /// `Trans(a)`, sorted.
    pub fn trans_of(&self, action: usize) -> &[usize] {
        &self.trans_of[action]
    }

    pub fn num_actions(&self) -> usize {
        self.trans_of.len()
    }

    pub fn non_prevailing(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.all.len()).filter(|&i| !self.all[i].is_prevailing())
    }

    pub fn mutex(&self, a: usize, b: usize) -> bool {
        transition_mutex(&self.all[a], &self.all[b])
    }

    /// Definition-level S-mutex check for two distinct actions.
    pub fn s_mutex(&self, a1: usize, a2: usize) -> bool {
        if a1 == a2 {
            return false;
        }
        let (t1, t2) = (&self.trans_of[a1], &self.trans_of[a2]);
        t1.iter().any(|&d| !self.all[d].is_prevailing() && t2.contains(&d))
            || t1.iter().any(|&d| t2.iter().any(|&e| self.mutex(d, e)))
    }

    /// Every S-mutex pair `(a, b)` with `a < b`. Only actions that touch a
    /// common variable are compared.
    pub fn s_mutex_pairs(&self) -> BTreeSet<(usize, usize)> {
        let mut by_var: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.per_variable.len()];
        for (a, ts) in self.trans_of.iter().enumerate() {
            for &d in ts {
                by_var[self.all[d].var].push((a, d));
            }
        }
        let mut pairs = BTreeSet::new();
        for entries in &by_var {
            for (i, &(a, d)) in entries.iter().enumerate() {
                for &(b, e) in &entries[i + 1..] {
                    if a == b {
                        continue;
                    }
                    let shared = d == e && !self.all[d].is_prevailing();
                    if shared || self.mutex(d, e) {
                        pairs.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
        pairs
    }

    /// Applies a set of transitions in parallel.
    pub fn apply_transition_set(&self, state: &[usize], ids: &[usize], task: &SasTask) -> Result<State, ApplyError> {
        for &d in ids {
            if !self.all[d].applicable(state) {
                return Err(ApplyError::Inapplicable(self.all[d].display(task).to_string()));
            }
        }
        for (i, &d) in ids.iter().enumerate() {
            for &e in &ids[i + 1..] {
                if self.mutex(d, e) {
                    return Err(ApplyError::Mutex(
                        self.all[d].display(task).to_string(),
                        self.all[e].display(task).to_string(),
                    ));
                }
            }
        }
        let mut next = state.to_vec();
        for &d in ids {
            next[self.all[d].var] = self.all[d].target;
        }
        Ok(next)
    }
}

/// Builds `Trans(a)` for every operator and interns the transitions.
pub fn extract_transitions(task: &SasTask) -> TransitionTable {
    let mut per_action: Vec<Vec<Transition>> = Vec::with_capacity(task.operators.len());
    let mut instantiated: BTreeSet<(usize, u8, usize, usize)> = BTreeSet::new();
    // sort key: variable, mechanical last, source, target
    let key = |t: &Transition| (t.var, t.source.is_none() as u8, t.source.unwrap_or(0), t.target);

    for op in &task.operators {
        let mut ts = Vec::new();
        for &(var, val) in &op.prevails {
            ts.push(Transition {
                var,
                source: Some(val),
                target: val,
            });
        }
        for e in &op.effects {
            ts.push(Transition {
                var: e.var,
                source: e.pre,
                target: e.post,
            });
        }
        for t in &ts {
            instantiated.insert(key(t));
        }
        per_action.push(ts);
    }
    for (var, v) in task.variables.iter().enumerate() {
        for val in 0..v.domain_size() {
            instantiated.insert((var, 0, val, val));
        }
    }

    let all: Vec<Transition> = instantiated
        .into_iter()
        .map(|(var, mech, src, target)| Transition {
            var,
            source: (mech == 0).then_some(src),
            target,
        })
        .collect();
    let index: HashMap<Transition, usize> = all.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let mut per_variable = vec![Vec::new(); task.variables.len()];
    for (i, t) in all.iter().enumerate() {
        per_variable[t.var].push(i);
    }
    let mut supporters = vec![Vec::new(); all.len()];
    let mut trans_of = Vec::with_capacity(per_action.len());
    for (a, ts) in per_action.iter().enumerate() {
        let mut ids: Vec<usize> = ts.iter().map(|t| index[t]).collect();
        ids.sort_unstable();
        for &d in &ids {
            supporters[d].push(a);
        }
        trans_of.push(ids);
    }
    TransitionTable {
        all,
        index,
        per_variable,
        supporters,
        trans_of,
    }
}
