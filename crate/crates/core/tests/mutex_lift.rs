mod common;

use common::small_task;
use proptest::prelude::*;
use sasplan_core::fixtures;
use sasplan_core::pe::{derive_strips, p_mutex};
use sasplan_core::transition::{extract_transitions, TransitionTable};

fn mismatches(table: &TransitionTable, view: &sasplan_core::pe::StripsView) -> Vec<(usize, usize)> {
    let m = table.num_actions();
    let mut out = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if table.s_mutex(a, b) != p_mutex(view, a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

#[test]
fn fixtures_have_identical_mutex_matrices() {
    for fx in fixtures::all() {
        let table = extract_transitions(&fx.task);
        let view = derive_strips(&fx.task, &table);
        assert_eq!(mismatches(&table, &view), vec![], "{}", fx.name);
    }
}

#[test]
fn s_mutex_pairs_agree_with_the_pairwise_definition() {
    for fx in fixtures::all() {
        let table = extract_transitions(&fx.task);
        let pairs = table.s_mutex_pairs();
        for a in 0..table.num_actions() {
            for b in a + 1..table.num_actions() {
                assert_eq!(pairs.contains(&(a, b)), table.s_mutex(a, b), "{} {a} {b}", fx.name);
                assert_eq!(table.s_mutex(a, b), table.s_mutex(b, a));
            }
        }
    }
}

/// The only disagreements with mechanical transitions: two actions sharing a
/// `*->g`, or `*->g` beside a regular `f->g`.
fn mechanical_pattern(table: &TransitionTable, a: usize, b: usize) -> bool {
    let ta = table.trans_of(a);
    let tb = table.trans_of(b);
    let shared = ta.iter().any(|&d| table.get(d).is_mechanical() && tb.contains(&d));
    let same_target = |x: &[usize], y: &[usize]| {
        x.iter().any(|&d| {
            let m = table.get(d);
            m.is_mechanical()
                && y.iter().any(|&e| {
                    let r = table.get(e);
                    r.var == m.var && r.target == m.target && r.source.is_some_and(|s| s != r.target)
                })
        })
    };
    shared || same_target(ta, tb) || same_target(tb, ta)
}

proptest! {
    #[test]
    fn lift_holds_without_mechanical_transitions(task in small_task(false)) {
        let table = extract_transitions(&task);
        let view = derive_strips(&task, &table);
        prop_assert_eq!(mismatches(&table, &view), vec![]);
    }

    #[test]
    fn mechanical_disagreements_are_the_known_patterns(task in small_task(true)) {
        let table = extract_transitions(&task);
        let view = derive_strips(&task, &table);
        for (a, b) in mismatches(&table, &view) {
            prop_assert!(mechanical_pattern(&table, a, b), "{} vs {}", task.operators[a].name, task.operators[b].name);
        }
    }
}
