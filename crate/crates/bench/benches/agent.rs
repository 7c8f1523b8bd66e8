use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use facework_bench::contested_state;
use facework_core::harness::{run_episode, PolicyKind, ScriptedPolicy};
use facework_core::{legal_actions, select_action};

fn selection(c: &mut Criterion) {
    let (variant, current, human_pref, history) = contested_state();
    let mut group = c.benchmark_group("select_action");
    for facework in [true, false] {
        let profile = variant.agent_profile(facework, 1);
        let name = if facework { "facework" } else { "baseline" };
        group.bench_function(name, |b| {
            b.iter(|| {
                select_action(
                    black_box(&current),
                    black_box(&history),
                    &human_pref,
                    &profile,
                )
                .unwrap()
            })
        });
    }
    group.finish();
    c.bench_function("legal_actions", |b| {
        b.iter(|| legal_actions(black_box(&current)))
    });
}

fn episodes(c: &mut Criterion) {
    let (variant, ..) = contested_state();
    let mut group = c.benchmark_group("run_episode");
    for kind in [PolicyKind::Compliant, PolicyKind::Stubborn { p: 0.5 }] {
        group.bench_function(kind.label(), |b| {
            b.iter(|| {
                let policy = ScriptedPolicy::for_variant(kind, &variant, 3).unwrap();
                run_episode(&variant, policy, true, 3, 50).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, selection, episodes);
criterion_main!(benches);
