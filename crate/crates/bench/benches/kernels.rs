use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use memnet_core::harness::model::{click_effects, effect_probabilities};
use memnet_core::harness::sampler::{draw_counts, Categorical};
use memnet_core::harness::{thread_pool, ExperimentConfig, HeraldModel, InterferenceConfig};
use memnet_core::interference::{
    averaged_swap_fidelity, connect_three, map_pair, EnvelopeShape, SwapEnvelopes, TimeGrid,
};
use memnet_core::node::{entangled_pair_state, NodeConfig};
use memnet_core::quantum::MeasurementBasis;
use memnet_core::NodeId;

fn interference(c: &mut Criterion) {
    let dw = 2.0 * PI / 5.28;
    let pairs: Vec<_> = NodeId::ALL
        .iter()
        .map(|&n| {
            let cfg = NodeConfig::operating_point(n);
            map_pair(&entangled_pair_state(&cfg, 0.0).unwrap(), n).unwrap()
        })
        .collect();
    let emitters = InterferenceConfig::gaussian(0.05, dw).build_emitters().unwrap();
    c.bench_function("connect_three", |b| {
        b.iter(|| connect_three(black_box(&pairs), &emitters, dw).unwrap())
    });

    let shape = EnvelopeShape::gaussian(0.05);
    let grid = TimeGrid::covering(std::slice::from_ref(&shape), 512).unwrap();
    let e = shape.sample(&grid).unwrap();
    let env = SwapEnvelopes::new(e.clone(), e).unwrap();
    c.bench_function("averaged_swap_fidelity", |b| {
        b.iter(|| averaged_swap_fidelity(false, black_box(&env), dw).unwrap())
    });
}

fn harness(c: &mut Criterion) {
    let cfg = ExperimentConfig::three_node_fit();
    let mut group = c.benchmark_group("harness");
    group.sample_size(10);
    group.bench_function("herald_model", |b| b.iter(|| HeraldModel::new(black_box(&cfg)).unwrap()));
    group.finish();

    let model = HeraldModel::new(&cfg).unwrap();
    let rho = model.heralded_state().unwrap();
    let effects: Vec<_> = (0..6)
        .map(|_| click_effects(&MeasurementBasis::computational(), [0.4, 0.3], 0.002))
        .collect();
    c.bench_function("effect_probabilities_6q", |b| {
        b.iter(|| effect_probabilities(black_box(rho.matrix()), &effects).unwrap())
    });

    let pool = thread_pool(0).unwrap();
    let dist = Categorical::new(&model.herald_weights()).unwrap();
    c.bench_function("draw_counts_1e6", |b| {
        b.iter(|| draw_counts(&pool, black_box(&dist), 1_000_000, 0, 0).unwrap())
    });
}

criterion_group!(benches, interference, harness);
criterion_main!(benches);
