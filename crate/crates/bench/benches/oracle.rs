use criterion::{criterion_group, criterion_main, Criterion};

use hplsv::oracle;
use hplsv_bench::{demo, DEMO_START};

fn bench_oracle(c: &mut Criterion) {
    let s = demo();
    c.bench_function("value_iteration/demo", |b| {
        b.iter(|| oracle::social_value_iteration(&s, 0.95, 1.0, 1e-9).unwrap())
    });
    c.bench_function("social_optimal_path/demo_w12", |b| {
        b.iter(|| oracle::social_optimal_path(&s, DEMO_START, 12.0, 1.0).unwrap())
    });
    c.bench_function("dijkstra/demo", |b| {
        b.iter(|| oracle::dijkstra_actions(&s.map, DEMO_START, s.goal()).unwrap())
    });
}

criterion_group!(benches, bench_oracle);
criterion_main!(benches);
