use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hplsv::{learner, observe_scene, RewardConfig, TrainConfig};
use hplsv_bench::{demo, trained_demo_model, DEMO_START};

fn bench_learner(c: &mut Criterion) {
    let s = demo();
    let mut g = c.benchmark_group("train");
    g.sample_size(10);
    g.bench_function("demo_1000_episodes", |b| {
        let cfg = TrainConfig::with_episodes(1000);
        b.iter(|| learner::train(&s, &cfg, &RewardConfig::default()).unwrap())
    });
    g.finish();

    let dq = trained_demo_model();
    let obs = observe_scene(&s.scene, DEMO_START);
    c.bench_function("quantize", |b| b.iter(|| dq.quantizer.quantize(black_box(&obs))));
    c.bench_function("greedy_rollout/demo", |b| b.iter(|| dq.greedy_rollout(&s, DEMO_START, 200).unwrap()));
}

criterion_group!(benches, bench_learner);
criterion_main!(benches);
