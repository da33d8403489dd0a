//! Transition-based encoding of a SAS+ task into CNF.
//!
//! Variables are `U(δ,t)` for every instantiated transition and step
//! `t ∈ [1, N]`, plus one `U(a,t)` per action that is not substituted by
//! transition literals. Clause classes are tagged `"A"`..`"H"` in the
//! resulting [`CnfInstance`]; auxiliary definitions are tagged `"aux"`.
//!
//! Three optional size reductions apply:
//!
//! * subsumed action cliques: the clique `A(δ1)` is skipped when it is
//!   contained in another encoded clique `A(δ2)`;
//! * unary transitions: when `A(δ) = {a}`, `a` is replaced by `U(δ,t)`;
//! * unary difference sets: when every action in `A(δ1)` differs from the
//!   common core of the set by one transition `θ_i`, and the `θ_i` are
//!   pairwise mutex, `a_i` is replaced by `U(δ1,t) ∧ U(θ_i,t)`.
//!
//! All three keep the formula equisatisfiable with the unreduced one, with
//! a one-to-one correspondence on the decoded plans.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::cnf::{at_most_one, AuxAllocator, CliqueMode, CnfError, CnfInstance, KeyNamer, Lit, Role, VarKey};
use crate::plan::ParallelPlan;
use crate::sas::SasTask;
use crate::transition::TransitionTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaseOptions {
    pub clique_mode: CliqueMode,
    pub reduce_subsumed: bool,
    pub reduce_unary_transition: bool,
    pub reduce_unary_difference: bool,
}

impl Default for SaseOptions {
    fn default() -> Self {
        SaseOptions {
            clique_mode: CliqueMode::Binary,
            reduce_subsumed: true,
            reduce_unary_transition: true,
            reduce_unary_difference: true,
        }
    }
}

impl SaseOptions {
    pub fn unreduced(clique_mode: CliqueMode) -> Self {
        SaseOptions {
            clique_mode,
            reduce_subsumed: false,
            reduce_unary_transition: false,
            reduce_unary_difference: false,
        }
    }

    pub fn fully_reduced(clique_mode: CliqueMode) -> Self {
        SaseOptions {
            clique_mode,
            ..Default::default()
        }
    }

    /// The 16 combinations of clique mode and reduction flags.
    pub fn all_combinations() -> Vec<SaseOptions> {
        let mut out = Vec::with_capacity(16);
        for clique_mode in [CliqueMode::Pairwise, CliqueMode::Binary] {
            for bits in 0..8u8 {
                out.push(SaseOptions {
                    clique_mode,
                    reduce_subsumed: bits & 1 != 0,
                    reduce_unary_transition: bits & 2 != 0,
                    reduce_unary_difference: bits & 4 != 0,
                });
            }
        }
        out
    }
}

/// How an action is represented in the formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitute {
    /// Equivalent to its only supported transition.
    Unary { transition: usize },
    /// Equivalent to `shared ∧ differing`.
    Difference { shared: usize, differing: usize },
}

impl Substitute {
    pub fn transitions(&self) -> Vec<usize> {
        match *self {
            Substitute::Unary { transition } => vec![transition],
            Substitute::Difference { shared, differing } => vec![shared, differing],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActionSubstitution {
    per_action: Vec<Option<Substitute>>,
}

impl ActionSubstitution {
    pub fn none(num_actions: usize) -> Self {
        ActionSubstitution {
            per_action: vec![None; num_actions],
        }
    }

    pub fn get(&self, action: usize) -> Option<Substitute> {
        self.per_action[action]
    }

    pub fn num_substituted(&self) -> usize {
        self.per_action.iter().filter(|s| s.is_some()).count()
    }

    pub fn count_unary(&self) -> usize {
        self.per_action
            .iter()
            .filter(|s| matches!(s, Some(Substitute::Unary { .. })))
            .count()
    }

    pub fn count_difference(&self) -> usize {
        self.per_action
            .iter()
            .filter(|s| matches!(s, Some(Substitute::Difference { .. })))
            .count()
    }
}

/// Non-prevailing transitions whose action clique is covered by another one.
///
/// Among transitions with identical supporter sets only the lowest id survives,
/// and only when no strictly larger set contains it.
pub fn find_subsumed_cliques(table: &TransitionTable) -> BTreeSet<usize> {
    let mut skipped = BTreeSet::new();
    for d1 in table.non_prevailing() {
        let a1 = table.supporters(d1);
        // any superset must contain a1[0], so only its transitions are candidates
        let covered = table.trans_of(a1[0]).iter().any(|&d2| {
            if d2 == d1 || table.get(d2).is_prevailing() {
                return false;
            }
            let a2 = table.supporters(d2);
            is_subset(a1, a2) && (a1.len() < a2.len() || d2 < d1)
        });
        if covered {
            skipped.insert(d1);
        }
    }
    skipped
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// Chooses substitutions: unary transitions first, then unary difference
/// sets, both scanning transitions in id order. Each action is substituted
/// at most once.
pub fn find_action_substitutions(table: &TransitionTable, opts: &SaseOptions) -> ActionSubstitution {
    let mut subst = ActionSubstitution::none(table.num_actions());
    if opts.reduce_unary_transition {
        for d in table.non_prevailing() {
            if let [a] = table.supporters(d) {
                subst.per_action[*a].get_or_insert(Substitute::Unary { transition: d });
            }
        }
    }
    if opts.reduce_unary_difference {
        for d in table.non_prevailing() {
            let Some(thetas) = unary_difference(table, d) else {
                continue;
            };
            for (&a, &theta) in table.supporters(d).iter().zip(&thetas) {
                subst.per_action[a].get_or_insert(Substitute::Difference {
                    shared: d,
                    differing: theta,
                });
            }
        }
    }
    subst
}

/// For a unary difference set `A(δ)` whose differing transitions are pairwise
/// mutex, the differing transition of each supporter (in supporter order).
pub fn unary_difference(table: &TransitionTable, d: usize) -> Option<Vec<usize>> {
    let sup = table.supporters(d);
    if sup.len() < 2 {
        return None;
    }
    let mut core: Vec<usize> = table.trans_of(sup[0]).to_vec();
    for &a in &sup[1..] {
        let ts = table.trans_of(a);
        core.retain(|x| ts.contains(x));
    }
    let mut thetas = Vec::with_capacity(sup.len());
    for &a in sup {
        let rest: Vec<usize> = table.trans_of(a).iter().copied().filter(|x| !core.contains(x)).collect();
        match rest.as_slice() {
            [theta] => thetas.push(*theta),
            _ => return None,
        }
    }
    // without pairwise mutex, U(δ) ∧ U(θ_i) does not imply a_i
    for (i, &t1) in thetas.iter().enumerate() {
        if thetas[i + 1..].iter().any(|&t2| !table.mutex(t1, t2)) {
            return None;
        }
    }
    Some(thetas)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("horizon must be at least 1, got {0}")]
    Horizon(usize),
    #[error("goal is empty")]
    EmptyGoal,
    #[error("goal value {value} of variable {var} has no incoming transition")]
    GoalUnsupported { var: usize, value: usize },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CliqueSummary {
    pub count: usize,
    pub mean_size: f64,
}

impl CliqueSummary {
    fn of(sizes: impl Iterator<Item = usize>) -> Self {
        let (count, total) = sizes.fold((0, 0), |(c, t), s| (c + 1, t + s));
        CliqueSummary {
            count,
            mean_size: if count == 0 { 0.0 } else { total as f64 / count as f64 },
        }
    }
}

/// Size counters of one encoding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SaseReport {
    pub horizon: usize,
    pub transition_vars: usize,
    pub action_vars: usize,
    pub aux_vars: usize,
    pub clauses_per_class: BTreeMap<&'static str, usize>,
    pub action_cliques_before: CliqueSummary,
    pub action_cliques_after: CliqueSummary,
    pub reduced_unary: usize,
    pub reduced_difference: usize,
    pub num_actions: usize,
}

#[derive(Debug, Clone)]
pub struct SaseEncoding {
    pub cnf: CnfInstance,
    pub substitution: ActionSubstitution,
    pub horizon: usize,
    pub report: SaseReport,
}

impl SaseEncoding {
    pub fn transition_var(&self, d: usize, t: usize) -> u32 {
        self.cnf.lookup(&VarKey::transition(d, t)).expect("transition variable allocated")
    }

    pub fn action_var(&self, a: usize, t: usize) -> Option<u32> {
        self.cnf.lookup(&VarKey::action(a, t))
    }

    /// The literals whose conjunction stands for action `a` at step `t`.
    pub fn action_term(&self, a: usize, t: usize) -> Vec<Lit> {
        match self.substitution.get(a) {
            None => vec![Lit::pos(self.action_var(a, t).expect("unsubstituted action has a variable"))],
            Some(s) => s
                .transitions()
                .into_iter()
                .map(|d| Lit::pos(self.transition_var(d, t)))
                .collect(),
        }
    }
}

/// One disjunct of an action-existence clause, as a conjunction of
/// disjunctions.
type Term = Vec<Vec<Lit>>;

/// Above this many two-fragment disjuncts, class G uses auxiliary variables
/// instead of distributing.
const MAX_DISTRIBUTED_GROUPS: usize = 6;

struct Encoder<'a> {
    table: &'a TransitionTable,
    subst: &'a ActionSubstitution,
    cnf: CnfInstance,
    opts: SaseOptions,
    /// binary-mode stand-ins for conjunctive action terms, per (action, step)
    conj_aux: HashMap<(usize, usize), u32>,
}

impl Encoder<'_> {
    fn u(&self, d: usize, t: usize) -> Lit {
        Lit::pos(self.cnf.lookup(&VarKey::transition(d, t)).expect("allocated"))
    }

    fn term(&self, a: usize, t: usize) -> Vec<Lit> {
        match self.subst.get(a) {
            None => vec![Lit::pos(self.cnf.lookup(&VarKey::action(a, t)).expect("allocated"))],
            Some(s) => s.transitions().into_iter().map(|d| self.u(d, t)).collect(),
        }
    }

    fn add(&mut self, lits: &[Lit], tag: &'static str) -> Result<(), EncodeError> {
        self.cnf.add_clause(lits, tag)?;
        Ok(())
    }

    fn add_all(&mut self, clauses: Vec<Vec<Lit>>, tag: &'static str) -> Result<(), EncodeError> {
        for c in clauses {
            self.add(&c, tag)?;
        }
        Ok(())
    }

    /// A single literal equivalent to the action term, for binary cliques.
    fn single_literal(&mut self, a: usize, t: usize) -> Result<Lit, EncodeError> {
        let term = self.term(a, t);
        if let [l] = term.as_slice() {
            return Ok(*l);
        }
        if let Some(&v) = self.conj_aux.get(&(a, t)) {
            return Ok(Lit::pos(v));
        }
        let v = self.cnf.fresh_aux();
        self.conj_aux.insert((a, t), v);
        let mut def: Vec<Lit> = term.iter().map(|&l| !l).collect();
        def.push(Lit::pos(v));
        self.add(&def, "aux")?;
        for &l in &term {
            self.add(&[Lit::neg(v), l], "aux")?;
        }
        Ok(Lit::pos(v))
    }

    fn action_existence(&mut self, d: usize, t: usize) -> Result<(), EncodeError> {
        let antecedent = self.u(d, t);
        let mut base = vec![!antecedent];
        // Difference-substituted supporters grouped by their shared transition:
        // ∨_i (s ∧ θ_i) = s ∧ (∨_i θ_i).
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &a in self.table.supporters(d) {
            match self.subst.get(a) {
                None => base.push(self.term(a, t)[0]),
                Some(Substitute::Unary { transition }) => {
                    if transition == d {
                        return Ok(());
                    }
                    base.push(self.u(transition, t));
                }
                Some(Substitute::Difference { shared, differing }) => {
                    groups.entry(shared).or_default().push(differing);
                }
            }
        }
        let mut terms: Vec<Term> = Vec::new();
        for (shared, differing) in groups {
            // simplify under the antecedent being true
            if differing.contains(&d) {
                if shared == d {
                    return Ok(());
                }
                base.push(self.u(shared, t));
                continue;
            }
            let thetas: Vec<Lit> = differing.iter().map(|&x| self.u(x, t)).collect();
            if shared == d {
                terms.push(vec![thetas]);
            } else {
                terms.push(vec![vec![self.u(shared, t)], thetas]);
            }
        }
        let (single, mut double): (Vec<Term>, Vec<Term>) = terms.into_iter().partition(|t| t.len() == 1);
        for term in single {
            base.extend(term.into_iter().flatten());
        }
        while double.len() > MAX_DISTRIBUTED_GROUPS {
            let term = double.pop().expect("non-empty");
            let v = self.cnf.fresh_aux();
            for frag in term {
                let mut c = frag;
                c.push(Lit::neg(v));
                self.add(&c, "aux")?;
            }
            base.push(Lit::pos(v));
        }
        // distribute: one clause per choice of fragment in each term
        for choice in 0..(1usize << double.len()) {
            let mut c = base.clone();
            for (i, term) in double.iter().enumerate() {
                c.extend_from_slice(&term[choice >> i & 1]);
            }
            self.add(&c, "G")?;
        }
        Ok(())
    }
}

/// Compiles a task into the transition-based CNF for horizon `n`.
pub fn encode_sase(task: &SasTask, table: &TransitionTable, n: usize, opts: &SaseOptions) -> Result<SaseEncoding, EncodeError> {
    if n < 1 {
        return Err(EncodeError::Horizon(n));
    }
    if task.goal.is_empty() {
        return Err(EncodeError::EmptyGoal);
    }
    let subst = find_action_substitutions(table, opts);
    let all_cliques: Vec<usize> = table.non_prevailing().collect();
    let skipped = if opts.reduce_subsumed {
        find_subsumed_cliques(table)
    } else {
        BTreeSet::new()
    };

    let mut enc = Encoder {
        table,
        subst: &subst,
        cnf: CnfInstance::new(),
        opts: *opts,
        conj_aux: HashMap::new(),
    };

    for t in 1..=n {
        for d in 0..table.len() {
            enc.cnf.alloc(VarKey::transition(d, t))?;
        }
        for a in 0..table.num_actions() {
            if subst.get(a).is_none() {
                enc.cnf.alloc(VarKey::action(a, t))?;
            }
        }
    }

    let transitions = table.all();
    let nvars = table.num_variables();
    let has_mechanical: Vec<bool> = (0..nvars)
        .map(|x| table.per_variable(x).iter().any(|&d| transitions[d].is_mechanical()))
        .collect();

    // A: initial state
    for (x, &mechanical) in has_mechanical.iter().enumerate() {
        let f = task.initial[x];
        let lits: Vec<Lit> = table
            .per_variable(x)
            .iter()
            .filter(|&&d| transitions[d].source.is_none_or(|s| s == f))
            .map(|&d| enc.u(d, 1))
            .collect();
        enc.add(&lits, "A")?;
        // With a mechanical transition available the disjunction above no
        // longer pins the source, so rule out the other sources directly.
        if mechanical {
            for &d in table.per_variable(x) {
                if transitions[d].source.is_some_and(|s| s != f) {
                    enc.add(&[!enc.u(d, 1)], "A")?;
                }
            }
        }
    }

    // B: goal
    for &(x, g) in &task.goal {
        let lits: Vec<Lit> = table
            .per_variable(x)
            .iter()
            .filter(|&&d| transitions[d].target == g)
            .map(|&d| enc.u(d, n))
            .collect();
        if lits.is_empty() {
            return Err(EncodeError::GoalUnsupported { var: x, value: g });
        }
        enc.add(&lits, "B")?;
    }

    // C: progression
    for t in 1..n {
        for (d, tr) in transitions.iter().enumerate() {
            let mut c = vec![!enc.u(d, t)];
            c.extend(
                table
                    .per_variable(tr.var)
                    .iter()
                    .filter(|&&e| transitions[e].source.is_none_or(|s| s == tr.target))
                    .map(|&e| enc.u(e, t + 1)),
            );
            enc.add(&c, "C")?;
        }
    }

    // D: regression
    for t in 2..=n {
        for (d, tr) in transitions.iter().enumerate() {
            let Some(src) = tr.source else { continue };
            let mut c = vec![!enc.u(d, t)];
            c.extend(
                table
                    .per_variable(tr.var)
                    .iter()
                    .filter(|&&e| transitions[e].target == src)
                    .map(|&e| enc.u(e, t - 1)),
            );
            enc.add(&c, "D")?;
        }
    }

    // E: transition mutex
    for x in 0..nvars {
        let members = table.per_variable(x);
        let complete = members
            .iter()
            .enumerate()
            .all(|(i, &d)| members[i + 1..].iter().all(|&e| table.mutex(d, e)));
        for t in 1..=n {
            let lits: Vec<Lit> = members.iter().map(|&d| enc.u(d, t)).collect();
            if complete {
                let clauses = at_most_one(&lits, enc.opts.clique_mode, &mut enc.cnf)?;
                enc.add_all(clauses, "E")?;
            } else {
                for (i, &d) in members.iter().enumerate() {
                    for &e in &members[i + 1..] {
                        if table.mutex(d, e) {
                            enc.add(&[!enc.u(d, t), !enc.u(e, t)], "E")?;
                        }
                    }
                }
            }
        }
    }

    // F: composition
    for t in 1..=n {
        for a in 0..table.num_actions() {
            let neg_term: Vec<Lit> = enc.term(a, t).into_iter().map(|l| !l).collect();
            for &d in table.trans_of(a) {
                let mut c = neg_term.clone();
                c.push(enc.u(d, t));
                enc.add(&c, "F")?;
            }
        }
    }

    // G: action existence
    for t in 1..=n {
        for &d in &all_cliques {
            enc.action_existence(d, t)?;
        }
    }

    // H: action mutex
    for t in 1..=n {
        for &d in &all_cliques {
            let sup = table.supporters(d);
            if sup.len() < 2 || skipped.contains(&d) {
                continue;
            }
            match enc.opts.clique_mode {
                CliqueMode::Pairwise => {
                    for (i, &a) in sup.iter().enumerate() {
                        for &b in &sup[i + 1..] {
                            let c: Vec<Lit> = enc.term(a, t).into_iter().chain(enc.term(b, t)).map(|l| !l).collect();
                            enc.add(&c, "H")?;
                        }
                    }
                }
                CliqueMode::Binary => {
                    let lits = sup
                        .iter()
                        .map(|&a| enc.single_literal(a, t))
                        .collect::<Result<Vec<_>, _>>()?;
                    let clauses = at_most_one(&lits, CliqueMode::Binary, &mut enc.cnf)?;
                    enc.add_all(clauses, "H")?;
                }
            }
        }
    }

    let cnf = enc.cnf;
    let mut clauses_per_class = BTreeMap::new();
    for tag in cnf.tags() {
        *clauses_per_class.entry(*tag).or_insert(0) += 1;
    }
    let report = SaseReport {
        horizon: n,
        transition_vars: cnf.count_by_role(Role::Transition),
        action_vars: cnf.count_by_role(Role::Action),
        aux_vars: cnf.count_by_role(Role::Auxiliary),
        clauses_per_class,
        action_cliques_before: CliqueSummary::of(all_cliques.iter().map(|&d| table.supporters(d).len())),
        action_cliques_after: CliqueSummary::of(
            all_cliques
                .iter()
                .filter(|d| !skipped.contains(d))
                .map(|&d| table.supporters(d).len()),
        ),
        reduced_unary: subst.count_unary(),
        reduced_difference: subst.count_difference(),
        num_actions: table.num_actions(),
    };
    Ok(SaseEncoding {
        cnf,
        substitution: subst,
        horizon: n,
        report,
    })
}

/// Reads the action plan off a satisfying assignment.
pub fn decode_sase(assignment: &crate::cnf::Assignment, enc: &SaseEncoding) -> ParallelPlan {
    let num_actions = enc.substitution.per_action.len();
    let steps = (1..=enc.horizon)
        .map(|t| {
            (0..num_actions)
                .filter(|&a| enc.action_term(a, t).iter().all(|&l| assignment.lit_true(l)))
                .collect()
        })
        .collect();
    ParallelPlan::new(steps)
}

/// Names SASE variables as `x:f->g`, operator names and `aux<serial>`.
pub struct SaseNamer<'a> {
    pub task: &'a SasTask,
    pub table: &'a TransitionTable,
}

impl KeyNamer for SaseNamer<'_> {
    fn object_name(&self, key: &VarKey) -> String {
        let i = key.object as usize;
        match key.role {
            Role::Transition => self.table.get(i).display(self.task).to_string(),
            Role::Action => self.task.operators[i].name.clone(),
            Role::Fact | Role::Auxiliary => format!("aux{i}"),
        }
    }
}
