//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::sync::OnceLock;

use exp3iss::{
    benchmark_costs, benchmark_value, build_quadrotor_pool, build_scalar_pool,
    finite_gain_sums, min_batch_length, recommended_params, rng, run_exp3_batch, run_exp3_iss, DEFAULT_C_ETA,
    run_fbs, theoretical_l1_bound, total_cost, verify_envelope_by_construction, AlgorithmKind,
    CertParams, DisturbanceSpec, Experiment, GeometricPd, L1BoundInputs, NoiseSequence,
    PlanarQuadrotor, Plant, Policy, QuadrotorParams, RunConfig, ScalarPlant,
    ScalarQuadraticCost, TrialOutcome, TrialResult,
};

const SCALAR_CERT: CertParams = CertParams {
    kappa: 1.5,
    rho: 0.995,
    margin: 75.0,
};
const SCALAR_DIST: DisturbanceSpec = DisturbanceSpec::Uniform {
    lo: -0.3,
    hi: 0.7,
    dim: 1,
};

fn verdict(id: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {id:02} ({name}): {} {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id:02} ({name}) failed: {detail}");
}

fn scalar_noise(seed: u64, steps: usize) -> NoiseSequence {
    let mut nrng = rng::noise_rng(7, seed);
    NoiseSequence::generate(&SCALAR_DIST, steps, &mut nrng)
}

/// One seed of the Figure 1(b) setup: pool {-1, 0, 1}, T = 1e5, tau = 289,
/// recommended eta; Exp3-ISS with the default guard, Exp3-batch against the
/// 1e6 state-norm guard.
fn fig1b_pair(seed: u64) -> (TrialResult, TrialResult) {
    let pool = build_scalar_pool(&[-1.0, 0.0, 1.0]).unwrap();
    let horizon = 100_000;
    let noise = scalar_noise(seed, horizon + 1);
    let (eta, tau) = recommended_params(3, horizon, &SCALAR_CERT, DEFAULT_C_ETA);
    assert_eq!(tau, 289);
    let cfg = RunConfig::new(horizon, eta, tau, vec![0.0]);

    let mut rng_iss = rng::arm_rng(7, seed, 0);
    let iss = run_exp3_iss(
        &ScalarPlant,
        &pool,
        &SCALAR_CERT,
        None,
        &ScalarQuadraticCost,
        &noise,
        &cfg,
        &mut rng_iss,
    )
    .unwrap();

    let cfg_batch = RunConfig {
        overflow_guard: 1e6,
        ..cfg
    };
    let mut rng_batch = rng::arm_rng(7, seed, 2);
    let batch = run_exp3_batch(
        &ScalarPlant,
        &pool,
        &ScalarQuadraticCost,
        &noise,
        &cfg_batch,
        &mut rng_batch,
    )
    .unwrap();
    (iss, batch)
}

fn fig1b_runs() -> &'static Vec<(TrialResult, TrialResult)> {
    static RUNS: OnceLock<Vec<(TrialResult, TrialResult)>> = OnceLock::new();
    RUNS.get_or_init(|| (0..50).map(fig1b_pair).collect())
}

#[test]
fn c01_batch_count_bound() {
    let mut violations = Vec::new();
    for (seed, (iss, _)) in fig1b_runs().iter().enumerate() {
        let j = iss.num_batches();
        let m = iss.num_breaks();
        let bound = (iss.horizon - m).div_ceil(iss.tau) + m;
        if j > bound {
            violations.push(format!("seed {seed}: J={j} > bound={bound} (M={m})"));
        }
    }
    verdict(
        1,
        "batch-count bound",
        violations.is_empty(),
        &format!("50 runs checked{}", violations.join("; ")),
    );
}

#[test]
fn c02_distribution_invariants() {
    let mut violations = Vec::new();
    for (seed, (iss, _)) in fig1b_runs().iter().take(20).enumerate() {
        let mut dead: Vec<usize> = Vec::new();
        let mut deact = iss.deactivations.iter().peekable();
        for ep in &iss.episodes {
            if ep.probs.len() != ep.active_arms.len() {
                violations.push(format!("seed {seed} batch {}: support mismatch", ep.batch));
            }
            let sum: f64 = ep.probs.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                violations.push(format!("seed {seed} batch {}: sum {sum}", ep.batch));
            }
            if ep.probs.iter().any(|&p| p < 0.0) {
                violations.push(format!("seed {seed} batch {}: negative mass", ep.batch));
            }
            if !ep.active_arms.contains(&ep.arm) {
                violations.push(format!("seed {seed} batch {}: inactive arm chosen", ep.batch));
            }
            for &d in &dead {
                if ep.active_arms.contains(&d) {
                    violations.push(format!(
                        "seed {seed} batch {}: deactivated arm {d} has support",
                        ep.batch
                    ));
                }
            }
            while deact.peek().is_some_and(|(_, b)| *b <= ep.batch) {
                dead.push(deact.next().unwrap().0);
            }
        }
    }
    verdict(
        2,
        "probability invariants",
        violations.is_empty(),
        &format!("20 full runs checked{}", violations.join("; ")),
    );
}

#[test]
fn c03_estimator_unbiasedness() {
    // Frozen 3-arm history: fixed distribution, fixed batch costs. Resample
    // the arm 1e5 times and compare the importance-weighted mean per arm.
    let probs = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
    let g = [0.5, 1.0, 2.0];
    let n = 100_000usize;
    let mut rng = rng::arm_rng(123, 0, 0);
    let mut sums = [0.0f64; 3];
    let mut sq_sums = [0.0f64; 3];
    use rand::Rng;
    for _ in 0..n {
        let u: f64 = rng.random();
        let pos = if u < probs[0] {
            0
        } else if u < probs[0] + probs[1] {
            1
        } else {
            2
        };
        for k in 0..3 {
            let est = if pos == k { g[k] / probs[k] } else { 0.0 };
            sums[k] += est;
            sq_sums[k] += est * est;
        }
    }
    let mut ok = true;
    let mut detail = String::new();
    for k in 0..3 {
        let mean = sums[k] / n as f64;
        let var = sq_sums[k] / n as f64 - mean * mean;
        let tol = 3.0 * (var / n as f64).sqrt();
        detail.push_str(&format!("arm{k}: {mean:.4} vs {} (tol {tol:.4}); ", g[k]));
        ok &= (mean - g[k]).abs() <= tol;
    }
    verdict(3, "estimator unbiasedness", ok, &detail);
}

#[test]
fn c04_envelope_by_construction() {
    let mut ok = true;
    for (iss, _) in fig1b_runs() {
        ok &= verify_envelope_by_construction(iss);
    }
    verdict(4, "envelope replay", ok, "50 Exp3-ISS runs replayed");
}

#[test]
fn c05_fig1b_reproduction() {
    let runs = fig1b_runs();
    let batch_tripped = runs
        .iter()
        .filter(|(_, b)| b.outcome == TrialOutcome::Diverged)
        .count();
    let iss_bounded = runs.iter().filter(|(i, _)| i.max_state_norm <= 1e5).count();
    let iss_pool_k_minus_1 = runs.iter().filter(|(i, _)| i.final_active == [0]).count();
    let ok = batch_tripped >= 40 && iss_bounded == 50 && iss_pool_k_minus_1 >= 48;
    verdict(
        5,
        "Figure 1(b) reproduction",
        ok,
        &format!(
            "exp3batch tripped 1e6 guard {batch_tripped}/50 (need >=40), \
             exp3iss norm<=1e5 {iss_bounded}/50 (need 50), \
             exp3iss pool=={{K=-1}} {iss_pool_k_minus_1}/50 (need >=48)"
        ),
    );
}

#[test]
fn c06_fig1c_spikes() {
    // Pool {-1, -0.3, 1}: Exp3-batch spikes at least 5x above Exp3-ISS.
    let pool = build_scalar_pool(&[-1.0, -0.3, 1.0]).unwrap();
    let horizon = 100_000;
    let (eta, tau) = recommended_params(3, horizon, &SCALAR_CERT, DEFAULT_C_ETA);
    let cfg = RunConfig::new(horizon, eta, tau, vec![0.0]);
    let cfg_batch = RunConfig {
        overflow_guard: 1e6,
        ..cfg.clone()
    };
    let mut wins = 0;
    for seed in 0..50 {
        let noise = scalar_noise(100 + seed, horizon + 1);
        let mut rng_iss = rng::arm_rng(7, 100 + seed, 0);
        let iss = run_exp3_iss(
            &ScalarPlant,
            &pool,
            &SCALAR_CERT,
            None,
            &ScalarQuadraticCost,
            &noise,
            &cfg,
            &mut rng_iss,
        )
        .unwrap();
        let mut rng_batch = rng::arm_rng(7, 100 + seed, 2);
        let batch = run_exp3_batch(
            &ScalarPlant,
            &pool,
            &ScalarQuadraticCost,
            &noise,
            &cfg_batch,
            &mut rng_batch,
        )
        .unwrap();
        if batch.max_state_norm >= 5.0 * iss.max_state_norm {
            wins += 1;
        }
    }
    verdict(
        6,
        "Figure 1(c) spike ratio",
        wins > 25,
        &format!("exp3batch >= 5x exp3iss max norm in {wins}/50 seeds (need majority)"),
    );
}

#[test]
fn c07_theorem1_dominance() {
    let mut violations = Vec::new();
    for (seed, (iss, _)) in fig1b_runs().iter().enumerate() {
        if !iss.completed() {
            continue;
        }
        let (s1, _, _) = finite_gain_sums(&iss.state_norms);
        let bound = theoretical_l1_bound(&L1BoundInputs {
            kappa: SCALAR_CERT.kappa,
            rho: SCALAR_CERT.rho,
            tau: iss.tau,
            margin: SCALAR_CERT.margin,
            l_f: 1.0,
            l_pi: 1.0,
            m: iss.num_breaks(),
            j: iss.num_batches(),
            t: iss.horizon,
            x0_norm: 0.0,
            pi0_bar: 0.0,
        })
        .unwrap();
        if s1 > bound {
            violations.push(format!("seed {seed}: S1 {s1:.3e} > bound {bound:.3e}"));
        }
    }
    verdict(
        7,
        "Theorem 1 dominance",
        violations.is_empty(),
        &format!("50 certified runs checked{}", violations.join("; ")),
    );
}

/// Mean policy regret of one algorithm over `seeds` fresh trials.
fn mean_regret(
    kind: AlgorithmKind,
    gains: &[f64],
    horizon: usize,
    seeds: u64,
    seed_base: u64,
) -> f64 {
    let pool = build_scalar_pool(gains).unwrap();
    let (eta, tau) = recommended_params(pool.len(), horizon, &SCALAR_CERT, DEFAULT_C_ETA);
    let cfg = RunConfig::new(horizon, eta, tau, vec![0.0]);
    let mut regrets = Vec::new();
    for seed in 0..seeds {
        let noise = scalar_noise(seed_base + seed, horizon + 1);
        let trial = match kind {
            AlgorithmKind::Exp3Iss => {
                let mut r = rng::arm_rng(7, seed_base + seed, 0);
                run_exp3_iss(
                    &ScalarPlant,
                    &pool,
                    &SCALAR_CERT,
                    None,
                    &ScalarQuadraticCost,
                    &noise,
                    &cfg,
                    &mut r,
                )
                .unwrap()
            }
            AlgorithmKind::Fbs => {
                let mut r = rng::arm_rng(7, seed_base + seed, 3);
                run_fbs(
                    &ScalarPlant,
                    &pool,
                    &SCALAR_CERT,
                    &ScalarQuadraticCost,
                    &noise,
                    &cfg,
                    &mut r,
                )
                .unwrap()
            }
            _ => unreachable!("only certified algorithms used here"),
        };
        let entries = benchmark_costs(
            &pool,
            &ScalarPlant,
            &noise,
            &SCALAR_CERT,
            &ScalarQuadraticCost,
            &[0.0],
            horizon,
        );
        let (_, bench) = benchmark_value(&entries).unwrap();
        let j_t = total_cost(&trial);
        if j_t.is_finite() {
            regrets.push(j_t - bench);
        }
    }
    regrets.iter().sum::<f64>() / regrets.len() as f64
}

#[test]
fn c08_regret_scaling() {
    let horizons = [1usize << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16];
    let mut points = Vec::new();
    for (i, &t) in horizons.iter().enumerate() {
        let r = mean_regret(
            AlgorithmKind::Exp3Iss,
            &[-1.0, 0.0, 1.0],
            t,
            100,
            1_000 * (i as u64 + 1),
        );
        points.push(((t as f64).ln(), r.max(1e-9).ln(), r));
    }
    // Least-squares slope of ln(regret) on ln(T).
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let regrets: Vec<String> = points.iter().map(|p| format!("{:.3e}", p.2)).collect();
    verdict(
        8,
        "regret scaling exponent",
        (0.55..=0.85).contains(&slope),
        &format!(
            "slope {slope:.3} (need [0.55, 0.85]); mean regrets {}",
            regrets.join(", ")
        ),
    );
}

#[test]
fn c09_fbs_linear_regret() {
    // Pool {-1, -0.5, 1}: both -1 and -0.5 certify, so FBS settles on the
    // suboptimal arm in half the permutations and pays linear regret there.
    let gains = [-1.0, -0.5, 1.0];
    let t = 20_000;
    let fbs_t = mean_regret(AlgorithmKind::Fbs, &gains, t, 100, 50_000);
    let fbs_2t = mean_regret(AlgorithmKind::Fbs, &gains, 2 * t, 100, 50_000);
    let iss_t = mean_regret(AlgorithmKind::Exp3Iss, &gains, t, 100, 50_000);
    let iss_2t = mean_regret(AlgorithmKind::Exp3Iss, &gains, 2 * t, 100, 50_000);
    let fbs_ratio = fbs_2t / fbs_t;
    let iss_ratio = iss_2t / iss_t;
    verdict(
        9,
        "FBS linear vs Exp3-ISS sublinear regret",
        (1.7..=2.3).contains(&fbs_ratio) && iss_ratio < 1.7,
        &format!(
            "fbs regret({},{}) = ({fbs_t:.3e},{fbs_2t:.3e}) ratio {fbs_ratio:.3} \
             (need [1.7, 2.3]); exp3iss ratio {iss_ratio:.3} (need < 1.7)",
            t,
            2 * t
        ),
    );
}

#[test]
fn c10_quadrotor_pool_and_sanity() {
    let nominal = GeometricPd::nominal(2.0, 1.0);
    let pool = build_quadrotor_pool(&nominal, &[0.1, 1.0, 10.0]);
    let pool_ok = pool.len() == 81;

    // Perfect mass estimate, nominal gains, unit offset, no disturbance:
    // position must settle below 0.1 within 10 s (1000 steps at dt = 0.01).
    let plant = PlanarQuadrotor::new(QuadrotorParams::default());
    let pd = GeometricPd::nominal(1.0, 1.0);
    let mut x = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut next = vec![0.0; 6];
    let mut u = vec![0.0; 2];
    let w = [0.0, 0.0];
    let mut settled_at = None;
    for t in 0..1000 {
        pd.act(&x, &mut u);
        plant.step(&x, &u, &w, &mut next);
        std::mem::swap(&mut x, &mut next);
        if (x[0] * x[0] + x[1] * x[1]).sqrt() < 0.1 {
            settled_at = Some(t + 1);
            break;
        }
    }
    verdict(
        10,
        "quadrotor pool size and settling",
        pool_ok && settled_at.is_some(),
        &format!(
            "pool {} (need 81), ||(x,y)|| < 0.1 at step {:?} (need <= 1000)",
            pool.len(),
            settled_at
        ),
    );
}

#[test]
fn c11_min_batch_length_values() {
    let a = min_batch_length(1.1, 0.995);
    let b = min_batch_length(1.0, 0.5);
    verdict(
        11,
        "minimum batch length",
        a == 227 && b == 2,
        &format!("(1.1, 0.995) -> {a} (need 227), (1, 0.5) -> {b} (need 2)"),
    );
}

#[test]
fn c12_determinism_across_workers() {
    let base = tempfile::tempdir().unwrap();
    let mut outputs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for workers in [1usize, 4] {
        let dir = base.path().join(format!("w{workers}"));
        let mut exp = Experiment::from_toml(
            r#"
preset = "scalar-b"
horizon = 2000
trials = 8
master_seed = 42
[algorithm]
tau = 289
"#,
        )
        .unwrap();
        exp.out_dir = dir.clone();
        exp.workers = workers;
        exp3iss::compare_algorithms(&exp, &[AlgorithmKind::Exp3Iss, AlgorithmKind::Exp3Batch])
            .unwrap();

        let mut files = Vec::new();
        let mut stack = vec![dir.clone()];
        while let Some(d) = stack.pop() {
            for entry in std::fs::read_dir(&d).unwrap() {
                let p = entry.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push((
                        p.strip_prefix(&dir).unwrap().to_string_lossy().into_owned(),
                        std::fs::read(&p).unwrap(),
                    ));
                }
            }
        }
        files.sort();
        outputs.push(files);
    }
    let same = outputs[0] == outputs[1];
    verdict(
        12,
        "byte-identical output across worker counts",
        same,
        &format!("{} files compared", outputs[0].len()),
    );
}
