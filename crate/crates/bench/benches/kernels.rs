use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rgrl_core::control::{make_environment, Environment, TaskConfig, TaskKind};
use rgrl_core::cv_env::{cat_state, homodyne_distribution, HomodyneSpec};
use rgrl_core::neural::{init_mlp, Activation, OutputActivation};
use rgrl_core::ppo::{actor_distribution, ppo_update, ActionStructure, AdamPair, PolicySpec, PpoHyper, RolloutBuffer, Transition};
use rgrl_core::qcore::lanczos_ground_state;
use rgrl_core::seed::rng_from_seed;
use rgrl_core::spin_env::{build_xxz_hamiltonian, XxzParams};
use rgrl_core::C64;

fn lanczos(c: &mut Criterion) {
    let mut g = c.benchmark_group("lanczos_xxz");
    for l in [6, 8, 10] {
        let h = build_xxz_hamiltonian(&XxzParams { j_ratio: 1.0, delta: 0.5, chain_length: l }).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(l), &h, |b, h| b.iter(|| lanczos_ground_state(black_box(h), 300, 1e-10, 0).unwrap()));
    }
    g.finish();
}

fn homodyne(c: &mut Criterion) {
    let cat = cat_state(C64::new(0.5, -1.8), 60).unwrap();
    let spec = HomodyneSpec::new(0.7);
    c.bench_function("homodyne_cat_cutoff60", |b| b.iter(|| homodyne_distribution(black_box(&cat), &spec).unwrap()));
}

fn mlp(c: &mut Criterion) {
    let net = init_mlp(&[94, 128, 128, 32], Activation::Tanh, OutputActivation::Identity, 0).unwrap();
    let x = nalgebra::DMatrix::from_fn(94, 64, |i, j| ((i * 31 + j * 17) % 13) as f64 / 13.0 - 0.5);
    let w = nalgebra::DMatrix::from_element(32, 64, 1.0);
    c.bench_function("mlp_encoder_forward_backward_64", |b| {
        b.iter(|| {
            let (_, cache) = net.forward_batch(black_box(&x)).unwrap();
            net.backward_batch(&cache, &w).unwrap()
        })
    });
}

fn ppo(c: &mut Criterion) {
    let h = PpoHyper::default();
    let spec = PolicySpec::new(64, h.hidden, ActionStructure::Discrete(4), 1).unwrap();
    let mut rng = rng_from_seed(2);
    let mut buf = RolloutBuffer::new(h.k_step);
    for t in 0..h.k_step {
        let observation: Vec<f64> = (0..64).map(|i| ((t * 7 + i) % 11) as f64 / 11.0).collect();
        let d = actor_distribution(&spec, &observation).unwrap();
        let action = d.sample(&mut rng);
        let log_prob = d.log_prob(&action).unwrap();
        let value = spec.value(&observation).unwrap();
        buf.push(Transition { observation, action, log_prob, reward: -1.0, value, done: t % 20 == 19 }).unwrap();
    }
    c.bench_function("ppo_update_512", |b| {
        b.iter(|| {
            let mut s = spec.clone();
            let mut adam = AdamPair::new(&s);
            ppo_update(&mut s, black_box(&buf), 0.0, &h, &mut adam, h.alpha0, 0).unwrap()
        })
    });
}

fn env_step(c: &mut Criterion) {
    let cfg = TaskConfig::defaults(TaskKind::Cat);
    let mut env = make_environment(&cfg).unwrap();
    let start = env.sample_start(&mut rng_from_seed(0));
    c.bench_function("cat_env_step_and_measure", |b| {
        b.iter(|| {
            env.reset(&start, 0).unwrap();
            env.step(&[1]).unwrap();
            env.measure(0).unwrap()
        })
    });
}

criterion_group!(benches, lanczos, homodyne, mlp, ppo, env_step);
criterion_main!(benches);
