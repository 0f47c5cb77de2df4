use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use exp3iss::{
    build_quadrotor_pool, build_scalar_pool, run_exp3_iss, BanditState, CertParams,
    DisturbanceSpec, GeometricPd, NoiseSequence, PlanarQuadrotor, Plant, Policy,
    QuadrotorParams, RunConfig, ScalarPlant, ScalarQuadraticCost,
};

fn scalar_trial(c: &mut Criterion) {
    let pool = build_scalar_pool(&[-1.0, 0.0, 1.0]).unwrap();
    let spec = DisturbanceSpec::Uniform {
        lo: -0.3,
        hi: 0.7,
        dim: 1,
    };
    let cert = CertParams::new(1.5, 0.995, 75.0).unwrap();
    let horizon = 10_000;
    let mut nrng = exp3iss::rng::noise_rng(1, 0);
    let noise = NoiseSequence::generate(&spec, horizon + 1, &mut nrng);
    let cfg = RunConfig::new(horizon, 0.01, 289, vec![0.0]);
    c.bench_function("scalar_exp3iss_trial_10k", |b| {
        b.iter(|| {
            let mut rng = exp3iss::rng::arm_rng(1, 0, 0);
            black_box(
                run_exp3_iss(
                    &ScalarPlant,
                    &pool,
                    &cert,
                    None,
                    &ScalarQuadraticCost,
                    &noise,
                    &cfg,
                    &mut rng,
                )
                .unwrap(),
            )
        })
    });
}

fn quadrotor_step(c: &mut Criterion) {
    let plant = PlanarQuadrotor::new(QuadrotorParams::default());
    let pd = GeometricPd::nominal(2.0, 1.0);
    let x = [1.0, 0.5, 0.1, -0.2, 0.3, 0.05];
    let w = [0.05, -0.02];
    let mut u = [0.0; 2];
    let mut next = [0.0; 6];
    c.bench_function("quadrotor_controller_plus_step", |b| {
        b.iter(|| {
            pd.act(black_box(&x), &mut u);
            plant.step(black_box(&x), &u, &w, &mut next);
            black_box(next[0])
        })
    });
}

fn probabilities_81(c: &mut Criterion) {
    let mut state = BanditState::new(81, 5.342e-4, 227);
    for (i, g) in state.g_cum.iter_mut().enumerate() {
        *g = (i as f64).sqrt();
    }
    c.bench_function("probabilities_n81", |b| {
        b.iter(|| black_box(state.probabilities().unwrap()))
    });
}

criterion_group!(benches, scalar_trial, quadrotor_step, probabilities_81);
criterion_main!(benches);
