use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use reupload::classify::fit_lda;
use reupload::data::{gen_circles, CIRCLES_FACTOR, CIRCLES_NOISE};
use reupload::model::{batch_p0, batch_p0_gradients, CircuitSpec, Scheme};
use reupload::noise::{mc_accuracy, NoiseConfig};
use reupload::train::initial_params;
use reupload::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn forward_and_gradients(c: &mut Criterion) {
    let ds = gen_circles(2000, CIRCLES_FACTOR, CIRCLES_NOISE, 7).unwrap();
    let mut group = c.benchmark_group("batch");
    for layers in [1usize, 4] {
        let spec = CircuitSpec::new(Scheme::Original, 2, layers).unwrap();
        let params = initial_params(spec.n_params(), 0);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(format!("p0/{name}"), layers), &layers, |b, _| {
                b.iter(|| batch_p0(&spec, black_box(&params), &ds.features, exec).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("grad/{name}"), layers), &layers, |b, _| {
                b.iter(|| batch_p0_gradients(&spec, black_box(&params), &ds.features, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn shot_noise(c: &mut Criterion) {
    let ds = gen_circles(500, CIRCLES_FACTOR, CIRCLES_NOISE, 7).unwrap();
    let spec = CircuitSpec::new(Scheme::Original, 2, 3).unwrap();
    let params = initial_params(spec.n_params(), 0);
    let test = ds.test();
    let p = batch_p0(&spec, &params, &test.rows, Exec::Sequential).unwrap();
    let lda = fit_lda(&p, &test.labels).unwrap();
    let cfg = NoiseConfig { mc_repetitions: 200, ..NoiseConfig::default() };
    let mut group = c.benchmark_group("mc_accuracy");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| mc_accuracy(&spec, &params, &lda, &test, &cfg, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, forward_and_gradients, shot_noise);
criterion_main!(benches);
