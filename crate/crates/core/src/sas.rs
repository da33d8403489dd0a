//! SAS+ planning tasks and the Fast Downward translator file format (version 3).
//!
//! Only the propositional subset is supported: axioms, derived variables and
//! conditional effects are rejected with [`SasError::Unsupported`]. Action
//! costs and the metric flag are read and discarded.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

/// A full assignment: one value index per state variable.
pub type State = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SasError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unsupported feature: {feature}")]
    Unsupported { line: usize, feature: String },
    #[error("invalid task: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVariable {
    pub name: String,
    pub domain: Vec<String>,
}

impl StateVariable {
    pub fn new(name: impl Into<String>, domain: &[&str]) -> Self {
        StateVariable {
            name: name.into(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn domain_size(&self) -> usize {
        self.domain.len()
    }
}

/// A value change on one variable. `pre == None` means the old value is
/// unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Effect {
    pub var: usize,
    pub pre: Option<usize>,
    pub post: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operator {
    pub name: String,
    /// `(variable, value)` pairs that must hold and stay unchanged, sorted by variable.
    pub prevails: Vec<(usize, usize)>,
    /// Sorted by variable.
    pub effects: Vec<Effect>,
}

impl Operator {
    pub fn new(name: impl Into<String>, prevails: Vec<(usize, usize)>, effects: Vec<Effect>) -> Self {
        Operator {
            name: name.into(),
            prevails,
            effects,
        }
    }

    /// Every `(variable, value)` the operator requires before execution.
    pub fn preconditions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.prevails
            .iter()
            .copied()
            .chain(self.effects.iter().filter_map(|e| e.pre.map(|p| (e.var, p))))
    }

    pub fn is_applicable(&self, state: &[usize]) -> bool {
        self.preconditions().all(|(v, val)| state[v] == val)
    }

    /// Moves `pre == post` effects into the prevail list and sorts both lists.
    fn normalize(&mut self) {
        let mut kept = Vec::with_capacity(self.effects.len());
        for e in self.effects.drain(..) {
            if e.pre == Some(e.post) {
                self.prevails.push((e.var, e.post));
            } else {
                kept.push(e);
            }
        }
        self.effects = kept;
        self.prevails.sort_unstable();
        self.effects.sort_unstable();
    }
}

/// A SAS+ task: variables, operators, initial state and goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SasTask {
    pub variables: Vec<StateVariable>,
    pub operators: Vec<Operator>,
    pub initial: State,
    /// Partial assignment sorted by variable.
    pub goal: Vec<(usize, usize)>,
    /// Mutex groups from the translator. Advisory only; no encoder reads them.
    pub mutex_groups: Vec<Vec<(usize, usize)>>,
}

impl SasTask {
    /// Builds a task, normalizing operators and checking every invariant.
    pub fn new(
        variables: Vec<StateVariable>,
        mut operators: Vec<Operator>,
        initial: State,
        mut goal: Vec<(usize, usize)>,
    ) -> Result<Self, SasError> {
        for op in &mut operators {
            op.normalize();
        }
        goal.sort_unstable();
        let task = SasTask {
            variables,
            operators,
            initial,
            goal,
            mutex_groups: Vec::new(),
        };
        task.validate()?;
        Ok(task)
    }

    pub fn with_mutex_groups(mut self, groups: Vec<Vec<(usize, usize)>>) -> Result<Self, SasError> {
        self.mutex_groups = groups;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SasError> {
        let invalid = |m: String| Err(SasError::Invalid(m));
        let check = |var: usize, val: usize, ctx: &str| -> Result<(), SasError> {
            match self.variables.get(var) {
                None => Err(SasError::Invalid(format!("{ctx}: variable {var} does not exist"))),
                Some(v) if val >= v.domain_size() => Err(SasError::Invalid(format!(
                    "{ctx}: value {val} outside domain of {} (size {})",
                    v.name,
                    v.domain_size()
                ))),
                _ => Ok(()),
            }
        };

        for v in &self.variables {
            if v.domain.is_empty() {
                return invalid(format!("variable {} has an empty domain", v.name));
            }
            let mut names = HashSet::new();
            for d in &v.domain {
                if !names.insert(d) {
                    return invalid(format!("variable {} repeats value {d:?}", v.name));
                }
            }
        }
        if self.initial.len() != self.variables.len() {
            return invalid(format!(
                "initial state assigns {} values for {} variables",
                self.initial.len(),
                self.variables.len()
            ));
        }
        for (var, &val) in self.initial.iter().enumerate() {
            check(var, val, "initial state")?;
        }
        let mut seen = HashSet::new();
        for &(var, val) in &self.goal {
            check(var, val, "goal")?;
            if !seen.insert(var) {
                return invalid(format!("goal assigns variable {var} twice"));
            }
        }
        let mut op_names = HashSet::new();
        for op in &self.operators {
            let ctx = format!("operator {:?}", op.name);
            if !op_names.insert(op.name.as_str()) {
                return invalid(format!("duplicate operator name {:?}", op.name));
            }
            let mut touched = HashSet::new();
            for &(var, val) in &op.prevails {
                check(var, val, &ctx)?;
                if !touched.insert(var) {
                    return invalid(format!("{ctx}: variable {var} appears twice in prevail conditions"));
                }
            }
            for e in &op.effects {
                check(e.var, e.post, &ctx)?;
                if let Some(pre) = e.pre {
                    check(e.var, pre, &ctx)?;
                    if pre == e.post {
                        return invalid(format!("{ctx}: effect on variable {} does not change its value", e.var));
                    }
                }
                if !touched.insert(e.var) {
                    return invalid(format!("{ctx}: variable {} is both a prevail and an effect, or has two effects", e.var));
                }
            }
        }
        for group in &self.mutex_groups {
            for &(var, val) in group {
                check(var, val, "mutex group")?;
            }
        }
        Ok(())
    }

    pub fn goal_satisfied(&self, state: &[usize]) -> bool {
        self.goal.iter().all(|&(v, val)| state[v] == val)
    }

    pub fn operator_index(&self, name: &str) -> Option<usize> {
        self.operators.iter().position(|o| o.name == name)
    }

    pub fn value_name(&self, var: usize, val: usize) -> &str {
        &self.variables[var].domain[val]
    }
}

/// The two-variable example task: `Dom(x) = {f, g, h}`, `Dom(y) = {d, e}`.
pub fn toy_fixture() -> SasTask {
    const X: usize = 0;
    const Y: usize = 1;
    let (f, g, h) = (0, 1, 2);
    let (d, e) = (0, 1);
    let eff = |var, pre, post| Effect {
        var,
        pre: Some(pre),
        post,
    };
    SasTask::new(
        vec![
            StateVariable::new("x", &["f", "g", "h"]),
            StateVariable::new("y", &["d", "e"]),
        ],
        vec![
            Operator::new("a1", vec![], vec![eff(X, f, g), eff(Y, d, e)]),
            Operator::new("a2", vec![], vec![eff(X, f, g), eff(Y, e, d)]),
            Operator::new("a3", vec![], vec![eff(X, g, h), eff(Y, e, d)]),
        ],
        vec![f, d],
        vec![(X, h), (Y, d)],
    )
    .expect("toy fixture is well formed")
}

struct LineReader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        LineReader {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    /// 1-based number of the line most recently returned.
    fn line_no(&self) -> usize {
        self.pos
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SasError> {
        Err(SasError::Parse {
            line: self.line_no(),
            msg: msg.into(),
        })
    }

    fn next_raw(&mut self) -> Result<&'a str, SasError> {
        match self.lines.get(self.pos) {
            Some(l) => {
                self.pos += 1;
                Ok(l.trim_end_matches(['\r', ' ', '\t']))
            }
            None => {
                self.pos += 1;
                self.err("unexpected end of input")
            }
        }
    }

    /// Next line that is not blank.
    fn next_line(&mut self) -> Result<&'a str, SasError> {
        loop {
            let l = self.next_raw()?;
            if !l.trim().is_empty() {
                return Ok(l);
            }
        }
    }

    fn expect(&mut self, sentinel: &str) -> Result<(), SasError> {
        let l = self.next_line()?;
        if l.trim() == sentinel {
            Ok(())
        } else if l.trim() == "begin_rule" {
            Err(SasError::Unsupported {
                line: self.line_no(),
                feature: "axiom rules".into(),
            })
        } else {
            self.err(format!("expected {sentinel:?}, found {:?}", l.trim()))
        }
    }

    fn ints(&mut self) -> Result<Vec<i64>, SasError> {
        let l = self.next_line()?;
        if l.trim() == "begin_rule" {
            return Err(SasError::Unsupported {
                line: self.line_no(),
                feature: "axiom rules".into(),
            });
        }
        l.split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .or_else(|_| self.err(format!("expected integers, found {:?}", l.trim())))
    }

    fn int(&mut self) -> Result<i64, SasError> {
        let v = self.ints()?;
        if v.len() != 1 {
            return self.err(format!("expected one integer, found {}", v.len()));
        }
        Ok(v[0])
    }

    fn count(&mut self) -> Result<usize, SasError> {
        let v = self.int()?;
        usize::try_from(v).or_else(|_| self.err(format!("negative count {v}")))
    }
}

fn to_index(r: &LineReader<'_>, v: i64) -> Result<usize, SasError> {
    usize::try_from(v).or_else(|_| r.err(format!("negative index {v}")))
}

/// Parses translator output, version 3.
pub fn parse_sas(text: &str) -> Result<SasTask, SasError> {
    let mut r = LineReader::new(text);

    r.expect("begin_version")?;
    let version = r.int()?;
    if version != 3 {
        return r.err(format!("unsupported SAS version {version}; expected 3"));
    }
    r.expect("end_version")?;
    r.expect("begin_metric")?;
    r.int()?;
    r.expect("end_metric")?;

    let nvars = r.count()?;
    let mut variables = Vec::with_capacity(nvars);
    for _ in 0..nvars {
        r.expect("begin_variable")?;
        let name = r.next_line()?.trim().to_string();
        let layer = r.int()?;
        if layer != -1 {
            return Err(SasError::Unsupported {
                line: r.line_no(),
                feature: format!("derived variable {name} (axiom layer {layer})"),
            });
        }
        let size = r.count()?;
        let mut domain = Vec::with_capacity(size);
        for _ in 0..size {
            domain.push(r.next_line()?.trim().to_string());
        }
        r.expect("end_variable")?;
        variables.push(StateVariable { name, domain });
    }

    let ngroups = r.count()?;
    let mut mutex_groups = Vec::with_capacity(ngroups);
    for _ in 0..ngroups {
        r.expect("begin_mutex_group")?;
        let n = r.count()?;
        let mut group = Vec::with_capacity(n);
        for _ in 0..n {
            group.push(pair(&mut r)?);
        }
        r.expect("end_mutex_group")?;
        mutex_groups.push(group);
    }

    r.expect("begin_state")?;
    let mut initial = Vec::with_capacity(nvars);
    for _ in 0..nvars {
        let v = r.int()?;
        initial.push(to_index(&r, v)?);
    }
    r.expect("end_state")?;

    r.expect("begin_goal")?;
    let ngoal = r.count()?;
    let mut goal = Vec::with_capacity(ngoal);
    for _ in 0..ngoal {
        goal.push(pair(&mut r)?);
    }
    r.expect("end_goal")?;

    let nops = r.count()?;
    let mut operators = Vec::with_capacity(nops);
    for _ in 0..nops {
        r.expect("begin_operator")?;
        let name = r.next_line()?.trim().to_string();
        let nprevail = r.count()?;
        let mut prevails = Vec::with_capacity(nprevail);
        for _ in 0..nprevail {
            prevails.push(pair(&mut r)?);
        }
        let neffects = r.count()?;
        let mut effects = Vec::with_capacity(neffects);
        for _ in 0..neffects {
            let nums = r.ints()?;
            let nconds = nums.first().copied().unwrap_or(-1);
            if nconds > 0 {
                return Err(SasError::Unsupported {
                    line: r.line_no(),
                    feature: format!("conditional effect in operator {name:?}"),
                });
            }
            if nums.len() != 4 || nconds != 0 {
                return r.err(format!("malformed effect line in operator {name:?}"));
            }
            let var = to_index(&r, nums[1])?;
            let pre = if nums[2] == -1 {
                None
            } else {
                Some(to_index(&r, nums[2])?)
            };
            let post = to_index(&r, nums[3])?;
            effects.push(Effect { var, pre, post });
        }
        // action cost, unused
        r.int()?;
        r.expect("end_operator")?;
        operators.push(Operator::new(name, prevails, effects));
    }

    let naxioms = r.count()?;
    if naxioms > 0 {
        return Err(SasError::Unsupported {
            line: r.line_no(),
            feature: format!("{naxioms} axiom rules"),
        });
    }

    SasTask::new(variables, operators, initial, goal)?.with_mutex_groups(mutex_groups)
}

fn pair(r: &mut LineReader<'_>) -> Result<(usize, usize), SasError> {
    let v = r.ints()?;
    if v.len() != 2 {
        return r.err("expected a `variable value` pair");
    }
    Ok((to_index(r, v[0])?, to_index(r, v[1])?))
}

/// Writes the task back in translator format (version 3, unit costs).
pub fn write_sas(task: &SasTask) -> String {
    let mut out = String::new();
    out.push_str("begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n");
    let _ = writeln!(out, "{}", task.variables.len());
    for v in &task.variables {
        let _ = writeln!(out, "begin_variable\n{}\n-1\n{}", v.name, v.domain.len());
        for d in &v.domain {
            let _ = writeln!(out, "{d}");
        }
        out.push_str("end_variable\n");
    }
    let _ = writeln!(out, "{}", task.mutex_groups.len());
    for g in &task.mutex_groups {
        let _ = writeln!(out, "begin_mutex_group\n{}", g.len());
        for (var, val) in g {
            let _ = writeln!(out, "{var} {val}");
        }
        out.push_str("end_mutex_group\n");
    }
    out.push_str("begin_state\n");
    for v in &task.initial {
        let _ = writeln!(out, "{v}");
    }
    out.push_str("end_state\nbegin_goal\n");
    let _ = writeln!(out, "{}", task.goal.len());
    for (var, val) in &task.goal {
        let _ = writeln!(out, "{var} {val}");
    }
    out.push_str("end_goal\n");
    let _ = writeln!(out, "{}", task.operators.len());
    for op in &task.operators {
        let _ = writeln!(out, "begin_operator\n{}\n{}", op.name, op.prevails.len());
        for (var, val) in &op.prevails {
            let _ = writeln!(out, "{var} {val}");
        }
        let _ = writeln!(out, "{}", op.effects.len());
        for e in &op.effects {
            let pre = e.pre.map_or(-1, |p| p as i64);
            let _ = writeln!(out, "0 {} {} {}", e.var, pre, e.post);
        }
        out.push_str("1\nend_operator\n");
    }
    out.push_str("0\n");
    out
}

/// Looks up a goal or state value by names, e.g. `("x", "h")`.
pub fn named_assignment(task: &SasTask, pairs: &[(&str, &str)]) -> Option<Vec<(usize, usize)>> {
    let index: BTreeMap<&str, usize> = task
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    pairs
        .iter()
        .map(|(var, val)| {
            let vi = *index.get(var)?;
            let di = task.variables[vi].domain.iter().position(|d| d == val)?;
            Some((vi, di))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_OP: &str = "begin_version
3
end_version
begin_metric
0
end_metric
1
begin_variable
var0
-1
2
Atom on(a)
NegatedAtom on(a)
end_variable
0
begin_state
1
end_state
begin_goal
1
0 0
end_goal
1
begin_operator
switch a
0
1
0 0 -1 0
1
end_operator
0
";

    #[test]
    fn parses_single_operator_task() {
        let task = parse_sas(ONE_OP).unwrap();
        assert_eq!(task.variables.len(), 1);
        assert_eq!(task.operators.len(), 1);
        assert_eq!(task.variables[0].domain, vec!["Atom on(a)", "NegatedAtom on(a)"]);
        assert_eq!(task.operators[0].name, "switch a");
        assert_eq!(
            task.operators[0].effects,
            vec![Effect {
                var: 0,
                pre: None,
                post: 0
            }]
        );
        assert_eq!(task.initial, vec![1]);
        assert_eq!(task.goal, vec![(0, 0)]);
    }

    #[test]
    fn conditional_effect_is_rejected() {
        let text = ONE_OP.replace("0 0 -1 0", "1 0 1 0 -1 0");
        assert!(matches!(parse_sas(&text), Err(SasError::Unsupported { .. })));
    }

    #[test]
    fn begin_rule_is_rejected() {
        let text = ONE_OP.replace("switch a\n0\n1\n0 0 -1 0\n1\nend_operator", "switch a\nbegin_rule\n");
        assert!(matches!(parse_sas(&text), Err(SasError::Unsupported { .. })));
    }

    #[test]
    fn axioms_are_rejected() {
        let text = ONE_OP.trim_end().strip_suffix('0').unwrap().to_string() + "1\nbegin_rule\n";
        assert!(matches!(parse_sas(&text), Err(SasError::Unsupported { .. })));
    }

    #[test]
    fn derived_variable_is_rejected() {
        let text = ONE_OP.replacen("var0\n-1", "var0\n0", 1);
        assert!(matches!(parse_sas(&text), Err(SasError::Unsupported { .. })));
    }

    #[test]
    fn bad_sentinel_reports_line() {
        let text = ONE_OP.replace("end_metric", "end_metrik");
        match parse_sas(&text) {
            Err(SasError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_domain_value_is_a_validation_error() {
        let text = ONE_OP.replace("begin_state\n1", "begin_state\n2");
        assert!(matches!(parse_sas(&text), Err(SasError::Invalid(_))));
    }

    #[test]
    fn wrong_version_is_a_parse_error() {
        let text = ONE_OP.replacen("3", "2", 1);
        assert!(matches!(parse_sas(&text), Err(SasError::Parse { .. })));
    }

    #[test]
    fn truncated_input_is_a_parse_error() {
        let text = &ONE_OP[..ONE_OP.find("begin_goal").unwrap()];
        assert!(matches!(parse_sas(text), Err(SasError::Parse { .. })));
    }

    #[test]
    fn same_value_effect_becomes_prevail() {
        let text = ONE_OP.replace("0 0 -1 0", "0 0 1 1");
        let task = parse_sas(&text).unwrap();
        assert_eq!(task.operators[0].prevails, vec![(0, 1)]);
        assert!(task.operators[0].effects.is_empty());
    }

    #[test]
    fn costs_and_metric_are_ignored() {
        let text = ONE_OP.replace("begin_metric\n0", "begin_metric\n1").replace("1\nend_operator", "17\nend_operator");
        assert_eq!(parse_sas(&text).unwrap(), parse_sas(ONE_OP).unwrap());
    }

    #[test]
    fn duplicate_operator_names_are_invalid() {
        let mut task = toy_fixture();
        task.operators[1].name = "a1".into();
        assert!(task.validate().is_err());
    }

    #[test]
    fn toy_fixture_shape() {
        let t = toy_fixture();
        assert_eq!(t.variables.len(), 2);
        assert_eq!(t.operators.len(), 3);
        assert_eq!(named_assignment(&t, &[("x", "f"), ("y", "d")]).unwrap(), vec![(0, 0), (1, 0)]);
        assert_eq!(t.initial, vec![0, 0]);
        assert_eq!(t.goal, named_assignment(&t, &[("x", "h"), ("y", "d")]).unwrap());
    }

    #[test]
    fn toy_round_trips_through_text() {
        let t = toy_fixture();
        assert_eq!(parse_sas(&write_sas(&t)).unwrap(), t);
    }

    #[test]
    fn mutex_groups_are_retained() {
        let text = ONE_OP.replace("end_variable\n0\n", "end_variable\n1\nbegin_mutex_group\n2\n0 0\n0 1\nend_mutex_group\n");
        let task = parse_sas(&text).unwrap();
        assert_eq!(task.mutex_groups, vec![vec![(0, 0), (0, 1)]]);
        assert_eq!(parse_sas(&write_sas(&task)).unwrap(), task);
    }
}
