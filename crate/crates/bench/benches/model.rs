use criterion::{criterion_group, criterion_main, Criterion};
use glt_bench::fixture;
use glt_core::train::{backward, train, TrainConfig};

fn model(c: &mut Criterion) {
    let f = fixture(20, 10);
    let batch = &f.windows[..10];
    c.bench_function("forward n20 k3 m10", |b| b.iter(|| f.model.forward(f.windows[0].inputs.view()).unwrap()));
    c.bench_function("backward batch10 n20 k3 m10", |b| b.iter(|| backward(&f.model, batch).unwrap()));

    let cfg = TrainConfig {
        learning_rate: 3e-4,
        batch_size: 1,
        max_epochs: 1,
        ..TrainConfig::default()
    };
    let subset = &f.windows[..200];
    let mut group = c.benchmark_group("epoch");
    group.sample_size(10);
    group.bench_function("200 windows batch1", |b| {
        b.iter(|| train(f.model.clone(), subset, &f.windows[200..220], &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, model);
criterion_main!(benches);
