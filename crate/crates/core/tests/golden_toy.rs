use std::collections::BTreeSet;

use sasplan_core::cnf::{write_dimacs, CliqueMode, KeyNamer, Lit};
use sasplan_core::sas::toy_fixture;
use sasplan_core::sase::{decode_sase, encode_sase, SaseEncoding, SaseNamer, SaseOptions};
use sasplan_core::solver::{solve, SolveStatus, SolverConfig};
use sasplan_core::transition::extract_transitions;

fn named_class(enc: &SaseEncoding, namer: &dyn KeyNamer, tag: &str) -> BTreeSet<BTreeSet<String>> {
    enc.cnf
        .clauses_tagged(tag)
        .map(|c| c.iter().map(|&l| literal_name(enc, namer, l)).collect())
        .collect()
}

fn literal_name(enc: &SaseEncoding, namer: &dyn KeyNamer, l: Lit) -> String {
    let key = enc.cnf.key_of(l.var()).unwrap();
    let sign = if l.is_positive() { "" } else { "-" };
    format!("{sign}{}", namer.object_name(key))
}

fn set(clauses: &[&[&str]]) -> BTreeSet<BTreeSet<String>> {
    clauses
        .iter()
        .map(|c| c.iter().map(|s| s.to_string()).collect())
        .collect()
}

#[test]
fn composition_and_existence_clauses_at_horizon_one() {
    let task = toy_fixture();
    let table = extract_transitions(&task);
    let enc = encode_sase(&task, &table, 1, &SaseOptions::unreduced(CliqueMode::Pairwise)).unwrap();
    let namer = SaseNamer { task: &task, table: &table };
    assert_eq!(
        named_class(&enc, &namer, "F"),
        set(&[
            &["-a1", "x:f->g"],
            &["-a1", "y:d->e"],
            &["-a2", "x:f->g"],
            &["-a2", "y:e->d"],
            &["-a3", "x:g->h"],
            &["-a3", "y:e->d"],
        ])
    );
    assert_eq!(
        named_class(&enc, &namer, "G"),
        set(&[
            &["-x:f->g", "a1", "a2"],
            &["-x:g->h", "a3"],
            &["-y:d->e", "a1"],
            &["-y:e->d", "a2", "a3"],
        ])
    );
}

#[test]
fn variables_per_step() {
    let task = toy_fixture();
    let table = extract_transitions(&task);
    let names: BTreeSet<String> = table.all().iter().map(|t| t.display(&task).to_string()).collect();
    let expected: BTreeSet<String> = [
        "x:f->g", "x:f->f", "x:g->h", "x:g->g", "x:h->h", "y:d->e", "y:e->d", "y:d->d", "y:e->e",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    assert_eq!(names, expected);
    for n in 1..=3 {
        let enc = encode_sase(&task, &table, n, &SaseOptions::unreduced(CliqueMode::Pairwise)).unwrap();
        assert_eq!(enc.report.transition_vars, 9 * n);
        assert_eq!(enc.report.action_vars, 3 * n);
    }
}

#[test]
fn first_satisfiable_horizon_is_two() {
    let task = toy_fixture();
    let table = extract_transitions(&task);
    for opts in SaseOptions::all_combinations() {
        let one = encode_sase(&task, &table, 1, &opts).unwrap();
        assert_eq!(solve(&one.cnf, &SolverConfig::default()).unwrap().status, SolveStatus::Unsat);
        let two = encode_sase(&task, &table, 2, &opts).unwrap();
        let r = solve(&two.cnf, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Sat);
        assert_eq!(decode_sase(&r.assignment.unwrap(), &two).steps, vec![vec![0], vec![2]]);
    }
}

#[test]
fn full_reduction_removes_every_action_variable() {
    let task = toy_fixture();
    let table = extract_transitions(&task);
    for mode in [CliqueMode::Pairwise, CliqueMode::Binary] {
        let full = encode_sase(&task, &table, 2, &SaseOptions::fully_reduced(mode)).unwrap();
        let none = encode_sase(&task, &table, 2, &SaseOptions::unreduced(mode)).unwrap();
        assert_eq!(full.report.action_vars, 0);
        assert_eq!(none.report.action_vars, 6);
        assert!(full.cnf.var_count() < none.cnf.var_count());
        assert_eq!(full.report.reduced_unary + full.report.reduced_difference, 3);
        assert_eq!(full.report.action_cliques_before.count, 4);
        assert_eq!(full.report.action_cliques_after.count, 2);
    }
}

#[test]
fn dimacs_dump_names_every_variable() {
    let task = toy_fixture();
    let table = extract_transitions(&task);
    let enc = encode_sase(&task, &table, 1, &SaseOptions::unreduced(CliqueMode::Binary)).unwrap();
    let namer = SaseNamer { task: &task, table: &table };
    let mut out = Vec::new();
    write_dimacs(&enc.cnf, &mut out, Some(&namer)).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("c var 1 = transition:x:f->f@1\n"), "{text}");
    assert!(text.contains("= action:a1@1\n"));
    let comments = text.lines().filter(|l| l.starts_with("c var ")).count();
    assert_eq!(comments as u32, enc.cnf.var_count());
    let header = format!("p cnf {} {}", enc.cnf.var_count(), enc.cnf.num_clauses());
    assert!(text.contains(&header));
}
