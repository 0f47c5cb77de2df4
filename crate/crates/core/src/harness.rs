//! Trial orchestration, aggregation, and file output.
//!
//! One experiment spawns `trials` independent trials. Trial `i` draws its
//! disturbances from RNG stream `(master_seed, i, channel 0)` and algorithm
//! randomness from stream `(master_seed, i, 1 + algorithm index)`, so every
//! algorithm sees byte-identical noise (paired comparison) and any single
//! trial replays in isolation. Trials run in parallel; aggregation is a
//! sequential reduce over the trial-ordered results, so the worker count
//! never changes any output byte.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::Experiment;
use crate::controllers::Policy;
use crate::dynamics::{norm, NoiseSequence, Plant};
use crate::error::{Error, Result};
use crate::metrics::{
    aux_regret, batch_count_bound, benchmark_costs, benchmark_value, finite_gain_sums,
    theoretical_l1_bound, total_cost, verify_envelope_by_construction, CostFunction,
    L1BoundInputs,
};
use crate::rng;
use crate::switching::{
    run_exp3, run_exp3_batch, run_exp3_iss, run_fbs, AlgorithmKind, RunConfig, TrialOutcome,
    TrialResult,
};

/// Embedded in every CSV header and JSON summary; bump on any column change.
pub const SCHEMA_VERSION: &str = "v1";

/// Fixed arm-stream channel per algorithm, independent of request order, so
/// `run` and `compare` produce identical trials for the same algorithm.
fn arm_channel(kind: AlgorithmKind) -> u64 {
    match kind {
        AlgorithmKind::Exp3Iss => 0,
        AlgorithmKind::Exp3 => 1,
        AlgorithmKind::Exp3Batch => 2,
        AlgorithmKind::Fbs => 3,
    }
}

/// Everything reported about one trial of one algorithm.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub outcome: TrialOutcome,
    /// +infinity sentinel when the trial did not cover the horizon.
    pub total_cost: f64,
    /// Number of batches J.
    pub num_batches: usize,
    /// Number of certificate breaks M.
    pub num_breaks: usize,
    pub restarts: u32,
    pub max_state_norm: f64,
    pub final_active: Vec<usize>,
    /// Best certified arm on this trial's noise, if any certifies.
    pub benchmark_arm: Option<usize>,
    pub benchmark_cost: Option<f64>,
    /// `total_cost - benchmark_cost`; +infinity sentinel for diverged trials.
    pub regret: Option<f64>,
    /// Auxiliary regret against the benchmark arm (counterfactual anchors).
    pub aux_regret: Option<f64>,
    /// (sum ||x||, sum ||x||^2, sum ||x||^4) over the recorded trajectory.
    pub finite_gain: (f64, f64, f64),
    /// Worst-case l1 bound with this trial's observed J and M, when the
    /// Lipschitz constants are available and the algorithm is certified.
    pub l1_bound: Option<f64>,
    /// Observed J within the batch-count bound for observed M.
    pub batch_bound_ok: bool,
    /// Envelope replay of the recorded trajectory against each batch's
    /// certificate (vacuously true for uncertified algorithms).
    pub envelope_ok: bool,
    /// FNV-1a checksum of the disturbance sequence this trial consumed.
    pub noise_checksum: u64,
}

/// Per-step series kept long enough to write files, then dropped.
struct TrialSeries {
    state_norms: Vec<f64>,
    costs: Vec<f64>,
    /// Cumulative algorithm cost minus cumulative benchmark cost, per step.
    /// Empty when no arm certifies on this trial's noise.
    cum_regret: Vec<f64>,
    step_arms: Vec<u32>,
    step_batches: Vec<u32>,
    step_pool_sizes: Vec<u32>,
    /// Steps whose batch broke at that step (last step of a broken batch).
    break_steps: Vec<usize>,
}

struct ProcessedTrial {
    report: TrialReport,
    series: TrialSeries,
}

/// Aggregate view of one algorithm over all trials.
#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmReport {
    pub algorithm: AlgorithmKind,
    pub eta: f64,
    pub tau: usize,
    pub trials: usize,
    pub completed: usize,
    pub diverged: usize,
    pub empty_pool: usize,
    pub restart_budget_exhausted: usize,
    /// Mean total cost over completed trials.
    pub mean_total_cost: Option<f64>,
    /// Mean regret over completed trials with a feasible benchmark;
    /// None when no trial qualifies.
    pub mean_regret: Option<f64>,
    pub mean_batches: f64,
    pub mean_breaks: f64,
    pub batch_bound_ok: bool,
    pub envelope_ok: bool,
    pub trial_reports: Vec<TrialReport>,
}

/// Top-level summary serialized to `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub schema_version: &'static str,
    pub preset: String,
    pub horizon: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub pool_size: usize,
    pub algorithms: Vec<AlgorithmReport>,
    /// Per-trial disturbance checksums (shared by all algorithms).
    pub noise_checksums: Vec<u64>,
}

fn run_one(
    kind: AlgorithmKind,
    exp: &Experiment,
    plant: &dyn Plant,
    pool: &[Box<dyn Policy>],
    cost: &dyn CostFunction,
    noise: &NoiseSequence,
    cfg: &RunConfig,
    trial: usize,
) -> Result<TrialResult> {
    let mut arng = rng::arm_rng(exp.master_seed, trial as u64, arm_channel(kind));
    match kind {
        AlgorithmKind::Exp3Iss => run_exp3_iss(
            plant,
            pool,
            &exp.cert,
            if exp.escalation.enabled {
                Some(&exp.escalation)
            } else {
                None
            },
            cost,
            noise,
            cfg,
            &mut arng,
        ),
        AlgorithmKind::Exp3 => run_exp3(plant, pool, cost, noise, cfg, &mut arng),
        AlgorithmKind::Exp3Batch => run_exp3_batch(plant, pool, cost, noise, cfg, &mut arng),
        AlgorithmKind::Fbs => run_fbs(plant, pool, &exp.cert, cost, noise, cfg, &mut arng),
    }
}

fn process_trial(
    kind: AlgorithmKind,
    exp: &Experiment,
    plant: &dyn Plant,
    pool: &[Box<dyn Policy>],
    cost: &dyn CostFunction,
    noise: &NoiseSequence,
    cfg: &RunConfig,
    trial: usize,
) -> Result<ProcessedTrial> {
    let result = run_one(kind, exp, plant, pool, cost, noise, cfg, trial)?;

    let entries = benchmark_costs(pool, plant, noise, &exp.cert, cost, &exp.x0, exp.horizon);
    let bench = benchmark_value(&entries).ok();
    let j_t = total_cost(&result);
    let regret = bench.map(|(_, v)| j_t - v);
    let aux = bench.map(|(arm, _)| aux_regret(&result, arm, plant, pool, noise, cost));

    let cum_regret = match &bench {
        Some((arm, _)) => {
            let bench_steps = &entries[*arm].step_costs;
            let mut cum = Vec::with_capacity(result.costs.len());
            let mut acc = 0.0;
            for (t, &c) in result.costs.iter().enumerate() {
                acc += c - bench_steps[t];
                cum.push(acc);
            }
            cum
        }
        None => Vec::new(),
    };

    let l1_bound = match (exp.bound, kind) {
        (Some((l_f, l_pi, pi0_bar)), AlgorithmKind::Exp3Iss | AlgorithmKind::Fbs) => {
            theoretical_l1_bound(&L1BoundInputs {
                kappa: exp.cert.kappa,
                rho: exp.cert.rho,
                tau: result.tau,
                margin: exp.cert.margin,
                l_f,
                l_pi,
                m: result.num_breaks(),
                j: result.num_batches(),
                t: exp.horizon,
                x0_norm: norm(&exp.x0),
                pi0_bar,
            })
            .ok()
        }
        _ => None,
    };

    let break_steps = result
        .episodes
        .iter()
        .filter(|e| e.broke)
        .map(|e| e.t_end - 1)
        .collect();

    let report = TrialReport {
        trial,
        outcome: result.outcome,
        total_cost: j_t,
        num_batches: result.num_batches(),
        num_breaks: result.num_breaks(),
        restarts: result.restarts,
        max_state_norm: result.max_state_norm,
        final_active: result.final_active.clone(),
        benchmark_arm: bench.map(|(a, _)| a),
        benchmark_cost: bench.map(|(_, v)| v),
        regret,
        aux_regret: aux,
        finite_gain: finite_gain_sums(&result.state_norms),
        l1_bound,
        batch_bound_ok: result.num_batches()
            <= batch_count_bound(exp.horizon, result.tau, result.num_breaks()),
        envelope_ok: verify_envelope_by_construction(&result),
        noise_checksum: noise.checksum(),
    };

    Ok(ProcessedTrial {
        report,
        series: TrialSeries {
            state_norms: result.state_norms,
            costs: result.costs,
            cum_regret,
            step_arms: result.step_arms,
            step_batches: result.step_batches,
            step_pool_sizes: result.step_pool_sizes,
            break_steps,
        },
    })
}

fn summarize(
    kind: AlgorithmKind,
    eta: f64,
    tau: usize,
    reports: Vec<TrialReport>,
) -> AlgorithmReport {
    let count = |o: TrialOutcome| reports.iter().filter(|r| r.outcome == o).count();
    let completed: Vec<&TrialReport> = reports
        .iter()
        .filter(|r| r.outcome == TrialOutcome::Completed)
        .collect();
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            None
        } else {
            Some(xs.iter().sum::<f64>() / xs.len() as f64)
        }
    };
    AlgorithmReport {
        algorithm: kind,
        eta,
        tau,
        trials: reports.len(),
        completed: completed.len(),
        diverged: count(TrialOutcome::Diverged),
        empty_pool: count(TrialOutcome::EmptyPool),
        restart_budget_exhausted: count(TrialOutcome::RestartBudgetExhausted),
        mean_total_cost: mean(completed.iter().map(|r| r.total_cost).collect()),
        mean_regret: mean(completed.iter().filter_map(|r| r.regret).collect()),
        mean_batches: reports.iter().map(|r| r.num_batches as f64).sum::<f64>()
            / reports.len() as f64,
        mean_breaks: reports.iter().map(|r| r.num_breaks as f64).sum::<f64>()
            / reports.len() as f64,
        batch_bound_ok: reports.iter().all(|r| r.batch_bound_ok),
        envelope_ok: reports.iter().all(|r| r.envelope_ok),
        trial_reports: reports,
    }
}

/// Runs `trials` paired trials of every requested algorithm and writes the
/// per-algorithm files plus `summary.json` (and `regret_comparison.csv` when
/// comparing more than one algorithm). Returns the summary.
pub fn compare_algorithms(exp: &Experiment, algorithms: &[AlgorithmKind]) -> Result<RunSummary> {
    if algorithms.is_empty() {
        return Err(Error::Config("no algorithms requested".into()));
    }
    let plant = exp.build_plant();
    let pool = exp.build_pool()?;
    let cost = exp.build_cost();
    let (eta, tau) = exp.resolve_params(pool.len());
    let cfg = RunConfig {
        horizon: exp.horizon,
        eta,
        tau,
        clip_ceiling: exp.clip_ceiling,
        x0: exp.x0.clone(),
        overflow_guard: crate::dynamics::OVERFLOW_GUARD,
    };

    let run_all = || -> Result<Vec<Vec<ProcessedTrial>>> {
        (0..exp.trials)
            .into_par_iter()
            .map(|trial| {
                let mut nrng = rng::noise_rng(exp.master_seed, trial as u64);
                let noise =
                    NoiseSequence::generate(&exp.disturbance, exp.horizon + 1, &mut nrng);
                algorithms
                    .iter()
                    .map(|&kind| {
                        process_trial(
                            kind,
                            exp,
                            plant.as_ref(),
                            &pool,
                            cost.as_ref(),
                            &noise,
                            &cfg,
                            trial,
                        )
                    })
                    .collect()
            })
            .collect()
    };

    // A worker count of 0 means the rayon default.
    let per_trial: Vec<Vec<ProcessedTrial>> = if exp.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(exp.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run_all)?
    } else {
        run_all()?
    };

    fs::create_dir_all(&exp.out_dir)?;

    let noise_checksums: Vec<u64> = per_trial
        .iter()
        .map(|algs| algs[0].report.noise_checksum)
        .collect();

    let mut algorithm_reports = Vec::with_capacity(algorithms.len());
    let mut regret_series_per_alg = Vec::with_capacity(algorithms.len());
    for (a, &kind) in algorithms.iter().enumerate() {
        let column: Vec<&ProcessedTrial> = per_trial.iter().map(|algs| &algs[a]).collect();
        let dir = exp.out_dir.join(kind.name());
        fs::create_dir_all(&dir)?;

        if exp.per_step_csv {
            write_per_step_csv(&dir.join("per_step.csv"), &column)?;
        }
        let norm_series: Vec<&[f64]> = column
            .iter()
            .map(|p| p.series.state_norms.as_slice())
            .collect();
        write_aggregate_csv(&dir.join("state_norm.csv"), &norm_series, exp.horizon)?;
        let regret_series: Vec<&[f64]> = column
            .iter()
            .map(|p| p.series.cum_regret.as_slice())
            .collect();
        write_aggregate_csv(&dir.join("cum_regret.csv"), &regret_series, exp.horizon)?;
        regret_series_per_alg.push(aggregate_rows(&regret_series, exp.horizon));

        let reports: Vec<TrialReport> = column.iter().map(|p| p.report.clone()).collect();
        algorithm_reports.push(summarize(kind, eta, tau, reports));
    }

    if algorithms.len() > 1 {
        write_regret_comparison(
            &exp.out_dir.join("regret_comparison.csv"),
            algorithms,
            &regret_series_per_alg,
        )?;
    }

    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        preset: exp.preset.name().to_string(),
        horizon: exp.horizon,
        trials: exp.trials,
        master_seed: exp.master_seed,
        pool_size: pool.len(),
        algorithms: algorithm_reports,
        noise_checksums,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(exp.out_dir.join("summary.json"), json)?;
    Ok(summary)
}

/// Single-algorithm entry point; identical numbers to `compare_algorithms`
/// with a one-element list.
pub fn run_experiment(exp: &Experiment) -> Result<RunSummary> {
    compare_algorithms(exp, &[exp.algorithm])
}

/// One row of an aggregate series.
#[derive(Debug, Clone, Copy)]
pub struct AggregateRow {
    pub t: usize,
    pub mean: f64,
    pub p75_lo: f64,
    pub p75_hi: f64,
    pub min: f64,
    pub max: f64,
    /// Trials with no recorded value at this step.
    pub diverged_count: usize,
}

/// Interpolated percentile of a sorted slice, q in [0, 1].
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Per-step bands over trials. Rows cover t = 0..=horizon even when every
/// series has ended; trials without a value at t count as diverged there.
/// The band is the central 75% (12.5th to 87.5th percentile).
pub fn aggregate_rows(series: &[&[f64]], horizon: usize) -> Vec<AggregateRow> {
    let mut rows = Vec::with_capacity(horizon + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(series.len());
    for t in 0..=horizon {
        vals.clear();
        vals.extend(series.iter().filter_map(|s| s.get(t)).copied());
        let diverged_count = series.len() - vals.len();
        if vals.is_empty() {
            rows.push(AggregateRow {
                t,
                mean: f64::NAN,
                p75_lo: f64::NAN,
                p75_hi: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                diverged_count,
            });
            continue;
        }
        vals.sort_by(|a, b| a.partial_cmp(b).expect("finite recorded values"));
        rows.push(AggregateRow {
            t,
            mean: vals.iter().sum::<f64>() / vals.len() as f64,
            p75_lo: percentile(&vals, 0.125),
            p75_hi: percentile(&vals, 0.875),
            min: vals[0],
            max: vals[vals.len() - 1],
            diverged_count,
        });
    }
    rows
}

fn write_aggregate_csv(path: &Path, series: &[&[f64]], horizon: usize) -> Result<()> {
    let rows = aggregate_rows(series, horizon);
    let mut out = String::with_capacity(rows.len() * 64);
    writeln!(out, "# schema={SCHEMA_VERSION}").expect("string write");
    writeln!(out, "t,mean,p75_lo,p75_hi,min,max,diverged_count").expect("string write");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t, r.mean, r.p75_lo, r.p75_hi, r.min, r.max, r.diverged_count
        )
        .expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_per_step_csv(path: &Path, trials: &[&ProcessedTrial]) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "# schema={SCHEMA_VERSION}")?;
    writeln!(w, "trial,t,batch,arm,pool_size,state_norm,cost,broke_flag")?;
    for p in trials {
        let s = &p.series;
        let mut breaks = s.break_steps.iter().copied().peekable();
        for t in 0..s.state_norms.len() {
            let broke = if breaks.peek() == Some(&t) {
                breaks.next();
                1
            } else {
                0
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                p.report.trial,
                t,
                s.step_batches[t],
                s.step_arms[t],
                s.step_pool_sizes[t],
                s.state_norms[t],
                s.costs[t],
                broke
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Joined comparison: mean cumulative regret and divergence count per
/// algorithm, one column pair per algorithm, shared time axis.
fn write_regret_comparison(
    path: &Path,
    algorithms: &[AlgorithmKind],
    rows_per_alg: &[Vec<AggregateRow>],
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# schema={SCHEMA_VERSION}").expect("string write");
    let mut header = String::from("t");
    for kind in algorithms {
        write!(
            header,
            ",{0}_mean,{0}_p75_lo,{0}_p75_hi,{0}_diverged_count",
            kind.name()
        )
        .expect("string write");
    }
    writeln!(out, "{header}").expect("string write");
    let steps = rows_per_alg[0].len();
    for t in 0..steps {
        write!(out, "{t}").expect("string write");
        for rows in rows_per_alg {
            let r = rows[t];
            write!(out, ",{},{},{},{}", r.mean, r.p75_lo, r.p75_hi, r.diverged_count)
                .expect("string write");
        }
        writeln!(out).expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    fn small_experiment(out: &Path, workers: usize) -> Experiment {
        let mut exp = Experiment::from_toml(
            r#"
preset = "scalar-b"
horizon = 3000
trials = 6
master_seed = 11
[algorithm]
tau = 289
"#,
        )
        .unwrap();
        exp.out_dir = out.to_path_buf();
        exp.workers = workers;
        exp
    }

    fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
        let mut files = Vec::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for entry in fs::read_dir(&d).unwrap() {
                let p = entry.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    let name = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                    files.push((name, fs::read(&p).unwrap()));
                }
            }
        }
        files.sort();
        files
    }

    #[test]
    fn outputs_are_byte_identical_across_worker_counts() {
        let base = tempfile::tempdir().unwrap();
        let mut outputs = Vec::new();
        for workers in [1, 3] {
            let dir = base.path().join(format!("w{workers}"));
            let exp = small_experiment(&dir, workers);
            run_experiment(&exp).unwrap();
            outputs.push(read_all(&dir));
        }
        assert_eq!(outputs[0].len(), outputs[1].len());
        for (a, b) in outputs[0].iter().zip(&outputs[1]) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1, "file {} differs across worker counts", a.0);
        }
    }

    #[test]
    fn rerun_is_byte_identical() {
        let base = tempfile::tempdir().unwrap();
        let mut outputs = Vec::new();
        for run in 0..2 {
            let dir = base.path().join(format!("r{run}"));
            let exp = small_experiment(&dir, 2);
            run_experiment(&exp).unwrap();
            outputs.push(read_all(&dir));
        }
        assert_eq!(outputs[0], outputs[1]);
    }

    #[test]
    fn aggregate_file_has_horizon_plus_one_rows_and_ordered_bands() {
        let dir = tempfile::tempdir().unwrap();
        let exp = small_experiment(dir.path(), 2);
        run_experiment(&exp).unwrap();
        let text = fs::read_to_string(dir.path().join("exp3iss/state_norm.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# schema="));
        assert_eq!(lines[1], "t,mean,p75_lo,p75_hi,min,max,diverged_count");
        assert_eq!(lines.len(), 2 + exp.horizon + 1);
        for line in &lines[2..] {
            let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            let (mean, lo, hi, min, max) = (f[1], f[2], f[3], f[4], f[5]);
            assert!(min <= mean && mean <= max, "{line}");
            assert!(min <= lo && lo <= hi && hi <= max, "{line}");
        }
    }

    #[test]
    fn compare_pairs_noise_across_algorithms() {
        let dir = tempfile::tempdir().unwrap();
        let exp = small_experiment(dir.path(), 2);
        let summary =
            compare_algorithms(&exp, &[AlgorithmKind::Exp3Iss, AlgorithmKind::Fbs]).unwrap();
        assert_eq!(summary.algorithms.len(), 2);
        for alg in &summary.algorithms {
            for (r, &cs) in alg.trial_reports.iter().zip(&summary.noise_checksums) {
                assert_eq!(r.noise_checksum, cs);
            }
        }
        assert!(dir.path().join("regret_comparison.csv").exists());
    }

    #[test]
    fn compare_single_algorithm_matches_run() {
        let base = tempfile::tempdir().unwrap();
        let run_dir = base.path().join("run");
        let cmp_dir = base.path().join("cmp");
        let exp_run = small_experiment(&run_dir, 2);
        let exp_cmp = small_experiment(&cmp_dir, 2);
        run_experiment(&exp_run).unwrap();
        compare_algorithms(&exp_cmp, &[AlgorithmKind::Exp3Iss]).unwrap();
        let a = fs::read(run_dir.join("exp3iss/per_step.csv")).unwrap();
        let b = fs::read(cmp_dir.join("exp3iss/per_step.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn percentile_interpolation() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 5.0);
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert_eq!(percentile(&v, 0.125), 1.5);
        assert_eq!(percentile(&[7.0], 0.875), 7.0);
    }

    #[test]
    fn summary_reports_invariants() {
        let dir = tempfile::tempdir().unwrap();
        let exp = small_experiment(dir.path(), 2);
        let summary = run_experiment(&exp).unwrap();
        let alg = &summary.algorithms[0];
        assert_eq!(alg.trials, 6);
        assert!(alg.batch_bound_ok);
        assert!(alg.envelope_ok);
        for r in &alg.trial_reports {
            if r.outcome == TrialOutcome::Completed {
                assert!(r.total_cost.is_finite());
                assert_eq!(r.benchmark_arm, Some(0));
            }
        }
    }
}
