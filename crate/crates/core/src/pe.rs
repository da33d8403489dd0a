//! The fact-based baseline encoding over the STRIPS view of a SAS+ task.
//!
//! Every `(variable, value)` pair becomes a fact; every operator becomes a
//! real action and every fact `f` gets a dummy action `dum_f` that keeps it
//! true. Actions are indexed over `A+`: real actions `0..m`, then the dummy
//! of fact `f` at `m + f`. Clause classes are tagged `"I"`..`"VI"`, with
//! optional competing-needs clauses tagged `"CN"`.

use std::collections::BTreeSet;

use crate::cnf::{CnfInstance, KeyNamer, Lit, Role, VarKey};
use crate::plan::ParallelPlan;
use crate::sas::SasTask;
use crate::sase::EncodeError;
use crate::transition::TransitionTable;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StripsAction {
    pub pre: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripsView {
    fact_offset: Vec<usize>,
    fact_var: Vec<usize>,
    pub real: Vec<StripsAction>,
    pub initial: Vec<usize>,
    pub goal: Vec<usize>,
    add_of: Vec<Vec<usize>>,
    del_of: Vec<Vec<usize>>,
    pre_of: Vec<Vec<usize>>,
}

impl StripsView {
    pub fn num_facts(&self) -> usize {
        self.fact_var.len()
    }

    pub fn num_real(&self) -> usize {
        self.real.len()
    }

    /// `|A+|`: real actions plus one dummy per fact.
    pub fn num_actions(&self) -> usize {
        self.real.len() + self.fact_var.len()
    }

    pub fn fact(&self, var: usize, value: usize) -> usize {
        self.fact_offset[var] + value
    }

    /// `(variable, value)` of a fact.
    pub fn fact_assignment(&self, f: usize) -> (usize, usize) {
        let x = self.fact_var[f];
        (x, f - self.fact_offset[x])
    }

    pub fn dummy(&self, f: usize) -> usize {
        self.real.len() + f
    }

    pub fn is_dummy(&self, a: usize) -> bool {
        a >= self.real.len()
    }

    /// Pre/add/del of any action in `A+`.
    pub fn action(&self, a: usize) -> StripsAction {
        if a < self.real.len() {
            self.real[a].clone()
        } else {
            let f = a - self.real.len();
            StripsAction {
                pre: vec![f],
                add: vec![f],
                del: vec![],
            }
        }
    }

    /// `ADD(f)` including the dummy.
    pub fn adders(&self, f: usize) -> &[usize] {
        &self.add_of[f]
    }

    pub fn deleters(&self, f: usize) -> &[usize] {
        &self.del_of[f]
    }

    /// `PRE(f)` including the dummy.
    pub fn requirers(&self, f: usize) -> &[usize] {
        &self.pre_of[f]
    }
}

/// Builds the STRIPS view from the transition sets of the operators.
pub fn derive_strips(task: &SasTask, table: &TransitionTable) -> StripsView {
    let mut fact_offset = Vec::with_capacity(task.variables.len());
    let mut fact_var = Vec::new();
    for (x, v) in task.variables.iter().enumerate() {
        fact_offset.push(fact_var.len());
        fact_var.extend(std::iter::repeat_n(x, v.domain_size()));
    }
    let nf = fact_var.len();
    let fact = |x: usize, v: usize| fact_offset[x] + v;

    let mut real = Vec::with_capacity(table.num_actions());
    for a in 0..table.num_actions() {
        let mut act = StripsAction::default();
        for &d in table.trans_of(a) {
            let tr = table.get(d);
            match tr.source {
                Some(s) if s == tr.target => act.pre.push(fact(tr.var, s)),
                Some(s) => {
                    act.pre.push(fact(tr.var, s));
                    act.add.push(fact(tr.var, tr.target));
                    act.del.push(fact(tr.var, s));
                }
                None => {
                    act.add.push(fact(tr.var, tr.target));
                    let size = task.variables[tr.var].domain_size();
                    act.del.extend((0..size).filter(|&v| v != tr.target).map(|v| fact(tr.var, v)));
                }
            }
        }
        act.pre.sort_unstable();
        act.add.sort_unstable();
        act.del.sort_unstable();
        real.push(act);
    }

    let m = real.len();
    let mut add_of = vec![Vec::new(); nf];
    let mut del_of = vec![Vec::new(); nf];
    let mut pre_of = vec![Vec::new(); nf];
    for (a, act) in real.iter().enumerate() {
        for &f in &act.add {
            add_of[f].push(a);
        }
        for &f in &act.del {
            del_of[f].push(a);
        }
        for &f in &act.pre {
            pre_of[f].push(a);
        }
    }
    for f in 0..nf {
        add_of[f].push(m + f);
        pre_of[f].push(m + f);
    }

    let initial = task.initial.iter().enumerate().map(|(x, &v)| fact(x, v)).collect();
    let goal = task.goal.iter().map(|&(x, v)| fact(x, v)).collect();
    StripsView {
        fact_offset,
        fact_var,
        real,
        initial,
        goal,
        add_of,
        del_of,
        pre_of,
    }
}

fn intersects(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.contains(x))
}

/// Time-invariant P-mutex between two distinct actions of `A+`: inconsistent
/// effects, interference, or preconditions on two values of one variable.
pub fn p_mutex(view: &StripsView, a: usize, b: usize) -> bool {
    if a == b {
        return false;
    }
    let (x, y) = (view.action(a), view.action(b));
    intersects(&x.add, &y.del)
        || intersects(&y.add, &x.del)
        || intersects(&x.del, &y.pre)
        || intersects(&y.del, &x.pre)
        || competing_needs(view, &x, &y)
}

fn competing_needs(view: &StripsView, x: &StripsAction, y: &StripsAction) -> bool {
    x.pre.iter().any(|&f| {
        y.pre
            .iter()
            .any(|&g| f != g && view.fact_assignment(f).0 == view.fact_assignment(g).0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PeOptions {
    /// Emit class VI (pairwise exclusion of facts on one variable).
    pub fact_mutex: bool,
    /// Emit competing-needs action exclusions not already covered by class V.
    pub competing_needs: bool,
}

impl PeOptions {
    pub fn all_combinations() -> [PeOptions; 4] {
        [
            PeOptions::default(),
            PeOptions {
                fact_mutex: true,
                competing_needs: false,
            },
            PeOptions {
                fact_mutex: false,
                competing_needs: true,
            },
            PeOptions {
                fact_mutex: true,
                competing_needs: true,
            },
        ]
    }
}

#[derive(Debug, Clone)]
pub struct PeEncoding {
    pub cnf: CnfInstance,
    pub horizon: usize,
    pub num_real: usize,
    pub num_facts: usize,
}

impl PeEncoding {
    /// `W(f,t)`, `t ∈ [1, N+1]`.
    pub fn fact_var(&self, f: usize, t: usize) -> u32 {
        self.cnf.lookup(&VarKey::fact(f, t)).expect("fact variable allocated")
    }

    /// `W(a,t)` for `a ∈ A+`, `t ∈ [1, N]`.
    pub fn action_var(&self, a: usize, t: usize) -> u32 {
        self.cnf.lookup(&VarKey::action(a, t)).expect("action variable allocated")
    }
}

/// Pairs of `A+` that class V excludes: S-mutex real actions, and each dummy
/// against the real actions deleting its fact.
pub fn action_mutex_pairs(view: &StripsView, table: &TransitionTable) -> BTreeSet<(usize, usize)> {
    let mut pairs = table.s_mutex_pairs();
    for f in 0..view.num_facts() {
        for &a in view.deleters(f) {
            pairs.insert((a, view.dummy(f)));
        }
    }
    pairs
}

/// Compiles the STRIPS view into the fact-based CNF for horizon `n`.
pub fn encode_pe(view: &StripsView, table: &TransitionTable, n: usize, opts: &PeOptions) -> Result<PeEncoding, EncodeError> {
    if n < 1 {
        return Err(EncodeError::Horizon(n));
    }
    let nf = view.num_facts();
    let na = view.num_actions();
    let mut cnf = CnfInstance::new();
    for t in 1..=n + 1 {
        for f in 0..nf {
            cnf.alloc(VarKey::fact(f, t))?;
        }
        if t <= n {
            for a in 0..na {
                cnf.alloc(VarKey::action(a, t))?;
            }
        }
    }
    let w = |cnf: &CnfInstance, key: VarKey| Lit::pos(cnf.lookup(&key).expect("allocated"));

    // I: initial state, closed world
    for f in 0..nf {
        let l = w(&cnf, VarKey::fact(f, 1));
        let lit = if view.initial.contains(&f) { l } else { !l };
        cnf.add_clause(&[lit], "I")?;
    }

    // II: goal
    for &f in &view.goal {
        let l = w(&cnf, VarKey::fact(f, n + 1));
        cnf.add_clause(&[l], "II")?;
    }

    // III: add effects
    for t in 1..=n {
        for f in 0..nf {
            let mut c = vec![!w(&cnf, VarKey::fact(f, t + 1))];
            c.extend(view.adders(f).iter().map(|&a| w(&cnf, VarKey::action(a, t))));
            cnf.add_clause(&c, "III")?;
        }
    }

    // IV: preconditions
    for t in 1..=n {
        for a in 0..na {
            let act = view.action(a);
            for &f in &act.pre {
                let c = [!w(&cnf, VarKey::action(a, t)), w(&cnf, VarKey::fact(f, t))];
                cnf.add_clause(&c, "IV")?;
            }
        }
    }

    // V: action mutex
    let pairs = action_mutex_pairs(view, table);
    for t in 1..=n {
        for &(a, b) in &pairs {
            let c = [!w(&cnf, VarKey::action(a, t)), !w(&cnf, VarKey::action(b, t))];
            cnf.add_clause(&c, "V")?;
        }
    }

    if opts.competing_needs {
        let actions: Vec<StripsAction> = (0..na).map(|a| view.action(a)).collect();
        for t in 1..=n {
            for a in 0..na {
                for b in a + 1..na {
                    if !pairs.contains(&(a, b)) && competing_needs(view, &actions[a], &actions[b]) {
                        let c = [!w(&cnf, VarKey::action(a, t)), !w(&cnf, VarKey::action(b, t))];
                        cnf.add_clause(&c, "CN")?;
                    }
                }
            }
        }
    }

    // VI: fact mutex
    if opts.fact_mutex {
        for t in 1..=n + 1 {
            for f in 0..nf {
                for g in f + 1..nf {
                    if view.fact_assignment(f).0 == view.fact_assignment(g).0 {
                        let c = [!w(&cnf, VarKey::fact(f, t)), !w(&cnf, VarKey::fact(g, t))];
                        cnf.add_clause(&c, "VI")?;
                    }
                }
            }
        }
    }

    Ok(PeEncoding {
        cnf,
        horizon: n,
        num_real: view.num_real(),
        num_facts: nf,
    })
}

/// Real actions true at each step; dummies are dropped.
pub fn decode_pe(assignment: &crate::cnf::Assignment, enc: &PeEncoding) -> ParallelPlan {
    let steps = (1..=enc.horizon)
        .map(|t| {
            (0..enc.num_real)
                .filter(|&a| assignment.value(enc.action_var(a, t)))
                .collect()
        })
        .collect();
    ParallelPlan::new(steps)
}

/// Names facts `x=f`, real actions by operator name and dummies `dum_x=f`.
pub struct PeNamer<'a> {
    pub task: &'a SasTask,
    pub view: &'a StripsView,
}

impl PeNamer<'_> {
    fn fact_name(&self, f: usize) -> String {
        let (x, v) = self.view.fact_assignment(f);
        format!("{}={}", self.task.variables[x].name, self.task.value_name(x, v))
    }
}

impl KeyNamer for PeNamer<'_> {
    fn object_name(&self, key: &VarKey) -> String {
        let i = key.object as usize;
        match key.role {
            Role::Fact => self.fact_name(i),
            Role::Action if self.view.is_dummy(i) => format!("dum_{}", self.fact_name(i - self.view.num_real())),
            Role::Action => self.task.operators[i].name.clone(),
            Role::Transition | Role::Auxiliary => format!("aux{i}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Assignment;
    use crate::sas::{toy_fixture, Effect, Operator, StateVariable};
    use crate::solver::{solve, SolveStatus, SolverConfig};
    use crate::transition::extract_transitions;

    fn toy_view() -> (SasTask, TransitionTable, StripsView) {
        let task = toy_fixture();
        let table = extract_transitions(&task);
        let view = derive_strips(&task, &table);
        (task, table, view)
    }

    #[test]
    fn toy_view_shape() {
        let (_, _, view) = toy_view();
        assert_eq!(view.num_facts(), 5);
        assert_eq!(view.num_real(), 3);
        assert_eq!(view.num_actions(), 8);
        // facts: x=f 0, x=g 1, x=h 2, y=d 3, y=e 4
        assert_eq!(
            view.real[0],
            StripsAction {
                pre: vec![0, 3],
                add: vec![1, 4],
                del: vec![0, 3],
            }
        );
        let dum = view.action(view.dummy(0));
        assert_eq!((dum.pre, dum.add, dum.del), (vec![0], vec![0], vec![]));
        assert_eq!(view.initial, vec![0, 3]);
        assert_eq!(view.goal, vec![2, 3]);
    }

    #[test]
    fn mechanical_effect_deletes_other_values() {
        let task = SasTask::new(
            vec![StateVariable::new("v", &["a", "b", "c"])],
            vec![Operator::new("reset", vec![], vec![Effect { var: 0, pre: None, post: 2 }])],
            vec![0],
            vec![(0, 2)],
        )
        .unwrap();
        let table = extract_transitions(&task);
        let view = derive_strips(&task, &table);
        assert_eq!(
            view.real[0],
            StripsAction {
                pre: vec![],
                add: vec![2],
                del: vec![0, 1],
            }
        );
    }

    #[test]
    fn toy_satisfiability_by_horizon() {
        let (_, table, view) = toy_view();
        for opts in PeOptions::all_combinations() {
            let r1 = solve(&encode_pe(&view, &table, 1, &opts).unwrap().cnf, &SolverConfig::default()).unwrap();
            assert_eq!(r1.status, SolveStatus::Unsat);
            let enc = encode_pe(&view, &table, 2, &opts).unwrap();
            let r2 = solve(&enc.cnf, &SolverConfig::default()).unwrap();
            assert_eq!(r2.status, SolveStatus::Sat);
            assert_eq!(decode_pe(&r2.assignment.unwrap(), &enc).steps, vec![vec![0], vec![2]]);
        }
    }

    #[test]
    fn all_dummy_step_decodes_empty() {
        let (_, table, view) = toy_view();
        let enc = encode_pe(&view, &table, 1, &PeOptions::default()).unwrap();
        let mut a = Assignment::new(enc.cnf.var_count());
        a.set(enc.action_var(view.dummy(0), 1), true);
        a.set(enc.action_var(view.dummy(3), 1), true);
        assert_eq!(decode_pe(&a, &enc).steps, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn dummy_mutex_only_with_deleters() {
        let (_, table, view) = toy_view();
        let pairs = action_mutex_pairs(&view, &table);
        // x=f is deleted by a1 and a2
        assert!(pairs.contains(&(0, view.dummy(0))));
        assert!(pairs.contains(&(1, view.dummy(0))));
        assert!(!pairs.contains(&(2, view.dummy(0))));
        let dummies = (view.num_real()..view.num_actions()).collect::<Vec<_>>();
        assert!(!pairs.iter().any(|(a, b)| dummies.contains(a) && dummies.contains(b)));
    }

    /// Flips every dummy that is false while its fact holds and no deleter
    /// runs; each flip must keep the model satisfying.
    fn free_dummy_flips(view: &StripsView, enc: &PeEncoding, model: &Assignment) -> usize {
        let mut flipped = 0;
        for t in 1..=enc.horizon {
            for f in 0..view.num_facts() {
                let dum = enc.action_var(view.dummy(f), t);
                let free = !model.value(dum)
                    && model.value(enc.fact_var(f, t))
                    && view.deleters(f).iter().all(|&a| !model.value(enc.action_var(a, t)));
                if free {
                    let mut alt = model.clone();
                    alt.set(dum, true);
                    assert!(alt.satisfies(&enc.cnf), "flip of dummy {f} at {t}");
                    flipped += 1;
                }
            }
        }
        flipped
    }

    #[test]
    fn dummy_flips_preserve_satisfaction() {
        let mut total = 0;
        for fx in crate::fixtures::all() {
            let table = extract_transitions(&fx.task);
            let view = derive_strips(&fx.task, &table);
            for n in 1..=4 {
                let enc = encode_pe(&view, &table, n, &PeOptions::default()).unwrap();
                let r = solve(&enc.cnf, &SolverConfig::default()).unwrap();
                if let Some(model) = r.assignment {
                    total += free_dummy_flips(&view, &enc, &model);
                }
            }
        }
        assert!(total > 0);
    }

    #[test]
    fn p_mutex_matches_s_mutex_on_toy() {
        let (_, table, view) = toy_view();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert_eq!(p_mutex(&view, a, b), table.s_mutex(a, b), "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn mechanical_sharing_diverges_from_p_mutex() {
        // Two actions performing the same v:*->c are S-mutex, yet neither
        // deletes what the other adds or needs.
        let task = SasTask::new(
            vec![StateVariable::new("v", &["a", "b", "c"])],
            vec![
                Operator::new("r1", vec![], vec![Effect { var: 0, pre: None, post: 2 }]),
                Operator::new("r2", vec![], vec![Effect { var: 0, pre: None, post: 2 }]),
                Operator::new("step", vec![], vec![Effect { var: 0, pre: Some(0), post: 2 }]),
            ],
            vec![0],
            vec![(0, 2)],
        )
        .unwrap();
        let table = extract_transitions(&task);
        let view = derive_strips(&task, &table);
        assert!(table.s_mutex(0, 1) && !p_mutex(&view, 0, 1));
        // *->c next to a->c: no transition mutex, but r1 deletes v=a
        assert!(!table.s_mutex(0, 2) && p_mutex(&view, 0, 2));
    }

    #[test]
    fn namer_formats() {
        let (task, table, view) = toy_view();
        let enc = encode_pe(&view, &table, 1, &PeOptions::default()).unwrap();
        let namer = PeNamer { task: &task, view: &view };
        assert_eq!(namer.object_name(enc.cnf.key_of(1).unwrap()), "x=f");
        assert_eq!(namer.object_name(&VarKey::action(view.dummy(4), 1)), "dum_y=e");
        assert_eq!(namer.object_name(&VarKey::action(2, 1)), "a3");
    }
}
