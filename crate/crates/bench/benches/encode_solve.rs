use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sasplan_core::pe::PeOptions;
use sasplan_core::plan::{encode, plan, EncodingChoice};
use sasplan_core::sase::SaseOptions;
use sasplan_core::solver::SolverConfig;
use sasplan_core::{extract_transitions, CliqueMode};
use sasplan_core::fixtures;

const FIXTURES: [&str; 4] = ["toy", "workshop", "fuel_truck", "door_key"];

fn choices() -> [(&'static str, EncodingChoice); 4] {
    [
        ("sase-binary", EncodingChoice::Sase(SaseOptions::default())),
        ("sase-unreduced", EncodingChoice::Sase(SaseOptions::unreduced(CliqueMode::Pairwise))),
        ("pe", EncodingChoice::Pe(PeOptions::default())),
        (
            "pe-mutex",
            EncodingChoice::Pe(PeOptions {
                fact_mutex: true,
                competing_needs: true,
            }),
        ),
    ]
}

fn bench_encode(c: &mut Criterion) {
    let mut group = c.benchmark_group("encode_n8");
    for name in FIXTURES {
        let task = fixtures::by_name(name).unwrap();
        let table = extract_transitions(&task);
        for (label, choice) in choices() {
            group.bench_with_input(BenchmarkId::new(label, name), &choice, |b, choice| {
                b.iter(|| encode(&task, &table, choice, 8).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_plan(c: &mut Criterion) {
    let mut group = c.benchmark_group("plan");
    let cfg = SolverConfig::default();
    for name in FIXTURES {
        let task = fixtures::by_name(name).unwrap();
        let table = extract_transitions(&task);
        for (label, choice) in choices() {
            group.bench_with_input(BenchmarkId::new(label, name), &choice, |b, choice| {
                b.iter(|| plan(&task, &table, choice, &cfg, 8).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_encode, bench_plan);
criterion_main!(benches);
