#![allow(dead_code)]

use proptest::prelude::*;
use sasplan_core::plan::{oracle_makespan, solve_horizon, EncodingChoice, OracleLimits};
use sasplan_core::sas::{Effect, Operator, SasTask, StateVariable};
use sasplan_core::solver::{SolveStatus, SolverConfig};
use sasplan_core::transition::TransitionTable;

/// Whether horizon `n` is satisfiable; panics on UNKNOWN.
pub fn horizon_sat(task: &SasTask, table: &TransitionTable, choice: &EncodingChoice, n: usize) -> bool {
    let h = solve_horizon(task, table, choice, &SolverConfig::default(), n).expect("encode and solve");
    match h.record.status {
        SolveStatus::Sat => true,
        SolveStatus::Unsat => false,
        SolveStatus::Unknown => panic!("solver gave up at horizon {n}"),
    }
}

pub fn oracle(task: &SasTask, table: &TransitionTable, bound: usize) -> Option<usize> {
    oracle_makespan(task, table, bound, &OracleLimits::default()).expect("fixture within oracle limits")
}

#[derive(Debug, Clone)]
enum Slot {
    Free,
    Prevail(usize),
    Change(Option<usize>, usize),
}

fn slot(domain: usize, mechanical: bool) -> impl Strategy<Value = Slot> {
    let pre = if mechanical {
        prop::option::weighted(0.7, 0..domain).boxed()
    } else {
        (0..domain).prop_map(Some).boxed()
    };
    prop_oneof![
        3 => Just(Slot::Free),
        1 => (0..domain).prop_map(Slot::Prevail),
        3 => (pre, 0..domain).prop_map(|(p, q)| Slot::Change(p, q)),
    ]
}

/// Small random tasks: up to 3 variables with 2..=3 values and up to 5 operators.
pub fn small_task(mechanical: bool) -> impl Strategy<Value = SasTask> {
    prop::collection::vec(2usize..=3, 1..=3)
        .prop_flat_map(move |domains| {
            let op = domains.iter().map(|&d| slot(d, mechanical)).collect::<Vec<_>>();
            let init = domains.iter().map(|&d| (0..d).boxed()).collect::<Vec<_>>();
            let goal = domains
                .iter()
                .map(|&d| prop::option::of(0..d).boxed())
                .collect::<Vec<_>>();
            (Just(domains), prop::collection::vec(op, 1..=5), init, goal)
        })
        .prop_filter_map("needs a goal and an effect", |(domains, ops, init, goal)| {
            let variables = domains
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let vals: Vec<String> = (0..d).map(|v| format!("v{v}")).collect();
                    let refs: Vec<&str> = vals.iter().map(String::as_str).collect();
                    StateVariable::new(format!("x{i}"), &refs)
                })
                .collect();
            let operators: Vec<Operator> = ops
                .iter()
                .enumerate()
                .map(|(i, slots)| {
                    let mut prevails = Vec::new();
                    let mut effects = Vec::new();
                    for (var, s) in slots.iter().enumerate() {
                        match *s {
                            Slot::Free => {}
                            Slot::Prevail(v) => prevails.push((var, v)),
                            Slot::Change(pre, post) => effects.push(Effect { var, pre, post }),
                        }
                    }
                    Operator::new(format!("op{i}"), prevails, effects)
                })
                .collect();
            if operators.iter().all(|o| o.effects.is_empty()) {
                return None;
            }
            let goal: Vec<(usize, usize)> = goal.iter().enumerate().filter_map(|(x, g)| g.map(|g| (x, g))).collect();
            if goal.is_empty() {
                return None;
            }
            SasTask::new(variables, operators, init, goal).ok()
        })
}
