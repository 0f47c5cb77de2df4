//! The four online switching algorithms: Exp3-ISS, per-step Exp3, Exp3-batch,
//! and Falsification-Based Switching, all driving one shared trial engine.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{check_envelope, escalate, min_batch_length, CertParams, EscalationRule};
use crate::controllers::Policy;
use crate::dynamics::{norm, NoiseSequence, Plant};
use crate::error::{Error, Result};
use crate::metrics::CostFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    /// Batched exponential weights with the per-step stability certificate.
    Exp3Iss,
    /// Classic per-step Exp3: batch length 1, no certificate.
    Exp3,
    /// Same batching and estimator as Exp3-ISS, but no certificate.
    Exp3Batch,
    /// Deterministic: lowest-index unfalsified arm in a random permutation.
    Fbs,
}

impl AlgorithmKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exp3Iss => "exp3iss",
            Self::Exp3 => "exp3",
            Self::Exp3Batch => "exp3batch",
            Self::Fbs => "fbs",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exp3iss" => Ok(Self::Exp3Iss),
            "exp3" => Ok(Self::Exp3),
            "exp3batch" => Ok(Self::Exp3Batch),
            "fbs" => Ok(Self::Fbs),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (expected exp3iss|exp3|exp3batch|fbs)"
            ))),
        }
    }

    fn uses_certificate(&self) -> bool {
        matches!(self, Self::Exp3Iss | Self::Fbs)
    }

    fn uses_weights(&self) -> bool {
        matches!(self, Self::Exp3Iss | Self::Exp3 | Self::Exp3Batch)
    }

    /// Baselines run on diverging systems with unbounded costs, which the
    /// Exp3 family does not support. They assume an a-priori cost bound (the
    /// clip ceiling) and feed the learner `min(c, ceiling) / ceiling`, the
    /// standard unit-scale loss. Exp3-ISS feeds raw costs; the certificate
    /// bounds its states.
    fn scales_learner_costs(&self) -> bool {
        matches!(self, Self::Exp3 | Self::Exp3Batch)
    }
}

/// Exponential-weights learner state over the active pool.
#[derive(Debug, Clone)]
pub struct BanditState {
    /// Active arm indices, in selection order. Never grows.
    pub active: Vec<usize>,
    /// Cumulative importance-weighted cost estimates, indexed by arm id.
    /// Entries of deactivated arms are dropped with the arm.
    pub g_cum: Vec<f64>,
    pub eta: f64,
    pub tau: usize,
    pub batch_index: usize,
}

impl BanditState {
    pub fn new(n_arms: usize, eta: f64, tau: usize) -> Self {
        Self {
            active: (0..n_arms).collect(),
            g_cum: vec![0.0; n_arms],
            eta,
            tau,
            batch_index: 0,
        }
    }

    /// Exponential-weights distribution over the active pool, computed with
    /// min-subtraction so the largest weight is exactly 1.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        if self.active.is_empty() {
            return Err(Error::EmptyPool);
        }
        let g_min = self
            .active
            .iter()
            .map(|&i| self.g_cum[i])
            .fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = self
            .active
            .iter()
            .map(|&i| (-self.eta * (self.g_cum[i] - g_min)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        Ok(weights.iter().map(|w| w / total).collect())
    }

    /// Importance-weighted update for the chosen arm; all others unchanged.
    pub fn update_estimate(&mut self, chosen: usize, g: f64, p_chosen: f64) {
        self.g_cum[chosen] += g / p_chosen;
    }

    pub fn deactivate(&mut self, arm: usize) {
        self.active.retain(|&i| i != arm);
        self.g_cum[arm] = f64::NAN; // dropped with the arm
    }

    /// Inverse-CDF sampling over the active-set ordering. Returns the
    /// position within `active`. Zero-probability arms are never selected.
    pub fn sample<R: Rng>(&self, probs: &[f64], rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (pos, &p) in probs.iter().enumerate() {
            cum += p;
            if u < cum {
                return pos;
            }
        }
        // Floating-point residue: fall back to the last positive-mass arm.
        probs
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(probs.len() - 1)
    }
}

/// One batch of the trial.
#[derive(Debug, Clone, Serialize)]
pub struct EpisodeRecord {
    pub batch: usize,
    pub arm: usize,
    pub t_start: usize,
    /// Exclusive end: the batch ran steps `t_start..t_end`.
    pub t_end: usize,
    pub broke: bool,
    /// Batch cost sum divided by the FULL tau, even for truncated batches.
    pub avg_cost: f64,
    /// Learner-side average (clipped for the baselines).
    pub learner_avg_cost: f64,
    pub anchor_norm: f64,
    /// Full anchor state, kept for counterfactual rollouts.
    pub anchor: Vec<f64>,
    /// Selection distribution over `active_arms` (empty for FBS).
    pub probs: Vec<f64>,
    /// Active pool at selection time.
    pub active_arms: Vec<usize>,
    pub p_chosen: f64,
    /// Certificate in force during this batch, if any.
    pub cert: Option<CertParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    /// The horizon was covered.
    Completed,
    /// Every arm was deactivated and escalation was disabled.
    EmptyPool,
    /// Escalation ran out of restarts.
    RestartBudgetExhausted,
    /// The state norm crossed the overflow guard.
    Diverged,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub algorithm: AlgorithmKind,
    pub horizon: usize,
    pub tau: usize,
    pub outcome: TrialOutcome,
    /// `||x_t||` for each recorded step `t`.
    pub state_norms: Vec<f64>,
    /// `c_t(x_t, u_t)` for each recorded step.
    pub costs: Vec<f64>,
    /// Arm implemented at each recorded step.
    pub step_arms: Vec<u32>,
    /// Batch index of each recorded step.
    pub step_batches: Vec<u32>,
    /// Active pool size during each recorded step.
    pub step_pool_sizes: Vec<u32>,
    pub episodes: Vec<EpisodeRecord>,
    /// (arm, batch) certificate failures, in order.
    pub deactivations: Vec<(usize, usize)>,
    pub restarts: u32,
    /// Largest state norm seen, including the state that tripped the guard.
    pub max_state_norm: f64,
    /// Arms still active when the trial ended.
    pub final_active: Vec<usize>,
}

impl TrialResult {
    pub fn diverged(&self) -> bool {
        self.outcome == TrialOutcome::Diverged
    }

    pub fn completed(&self) -> bool {
        self.outcome == TrialOutcome::Completed
    }

    /// Number of batches.
    pub fn num_batches(&self) -> usize {
        self.episodes.len()
    }

    /// Number of certificate breaks.
    pub fn num_breaks(&self) -> usize {
        self.deactivations.len()
    }
}

/// Trial-level knobs shared by all algorithms.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Horizon T: steps t = 0..=T are executed.
    pub horizon: usize,
    pub eta: f64,
    pub tau: usize,
    /// A-priori per-step cost bound assumed by the uncertified baselines;
    /// they feed the learner `min(c, clip_ceiling) / clip_ceiling`.
    pub clip_ceiling: f64,
    pub x0: Vec<f64>,
    pub overflow_guard: f64,
}

impl RunConfig {
    pub fn new(horizon: usize, eta: f64, tau: usize, x0: Vec<f64>) -> Self {
        Self {
            horizon,
            eta,
            tau,
            clip_ceiling: 1e9,
            x0,
            overflow_guard: crate::dynamics::OVERFLOW_GUARD,
        }
    }
}

/// Default learning-rate constant. Calibrated for quadratic state costs on
/// unit-scale plants; tune per problem when the cost scale differs.
pub const DEFAULT_C_ETA: f64 = 0.1;

/// Learning-rate and batch-length schedule: `eta = c_eta / (N^{2/3} T^{1/3})`
/// and `tau = max(ceil(T^{1/3} N^{-1/3}), min_batch_length(kappa, rho))`.
pub fn recommended_params(n: usize, t: usize, cert: &CertParams, c_eta: f64) -> (f64, usize) {
    let nf = n as f64;
    let tf = t as f64;
    let eta = c_eta / (nf.powf(2.0 / 3.0) * tf.cbrt());
    let tau_schedule = (tf.cbrt() / nf.cbrt()).ceil() as usize;
    let tau = tau_schedule.max(min_batch_length(cert.kappa, cert.rho));
    (eta, tau)
}

pub fn run_exp3_iss(
    plant: &dyn Plant,
    pool: &[Box<dyn Policy>],
    cert: &CertParams,
    escalation: Option<&EscalationRule>,
    cost: &dyn CostFunction,
    noise: &NoiseSequence,
    cfg: &RunConfig,
    arm_rng: &mut impl Rng,
) -> Result<TrialResult> {
    let min_tau = min_batch_length(cert.kappa, cert.rho);
    if cfg.tau < min_tau {
        return Err(Error::Config(format!(
            "tau = {} is below the minimum batch length {} for kappa = {}, rho = {}",
            cfg.tau, min_tau, cert.kappa, cert.rho
        )));
    }
    run_trial(
        AlgorithmKind::Exp3Iss,
        plant,
        pool,
        Some(*cert),
        escalation,
        cost,
        noise,
        cfg,
        arm_rng,
    )
}

pub fn run_exp3(
    plant: &dyn Plant,
    pool: &[Box<dyn Policy>],
    cost: &dyn CostFunction,
    noise: &NoiseSequence,
    cfg: &RunConfig,
    arm_rng: &mut impl Rng,
) -> Result<TrialResult> {
    let cfg = RunConfig {
        tau: 1,
        ..cfg.clone()
    };
    run_trial(
        AlgorithmKind::Exp3,
        plant,
        pool,
        None,
        None,
        cost,
        noise,
        &cfg,
        arm_rng,
    )
}

pub fn run_exp3_batch(
    plant: &dyn Plant,
    pool: &[Box<dyn Policy>],
    cost: &dyn CostFunction,
    noise: &NoiseSequence,
    cfg: &RunConfig,
    arm_rng: &mut impl Rng,
) -> Result<TrialResult> {
    run_trial(
        AlgorithmKind::Exp3Batch,
        plant,
        pool,
        None,
        None,
        cost,
        noise,
        cfg,
        arm_rng,
    )
}

pub fn run_fbs(
    plant: &dyn Plant,
    pool: &[Box<dyn Policy>],
    cert: &CertParams,
    cost: &dyn CostFunction,
    noise: &NoiseSequence,
    cfg: &RunConfig,
    arm_rng: &mut impl Rng,
) -> Result<TrialResult> {
    run_trial(
        AlgorithmKind::Fbs,
        plant,
        pool,
        Some(*cert),
        None,
        cost,
        noise,
        cfg,
        arm_rng,
    )
}

/// Shared trial engine. One trial is a deterministic single-threaded state
/// machine over (plant, pool, noise, arm stream).
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    kind: AlgorithmKind,
    plant: &dyn Plant,
    pool: &[Box<dyn Policy>],
    cert: Option<CertParams>,
    escalation: Option<&EscalationRule>,
    cost: &dyn CostFunction,
    noise: &NoiseSequence,
    cfg: &RunConfig,
    arm_rng: &mut impl Rng,
) -> Result<TrialResult> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if cfg.x0.len() != plant.state_dim() {
        return Err(Error::Config(format!(
            "x0 has dimension {}, plant expects {}",
            cfg.x0.len(),
            plant.state_dim()
        )));
    }
    if noise.steps() < cfg.horizon + 1 {
        return Err(Error::Config(format!(
            "noise sequence covers {} steps, horizon needs {}",
            noise.steps(),
            cfg.horizon + 1
        )));
    }
    if kind.uses_certificate() && cert.is_none() {
        return Err(Error::Config(format!(
            "{} requires certificate parameters",
            kind.name()
        )));
    }

    let n = pool.len();
    let steps_total = cfg.horizon + 1;

    // FBS consumes the arm stream once, to permute the pool.
    let fbs_order: Option<Vec<usize>> = if kind == AlgorithmKind::Fbs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(arm_rng);
        Some(order)
    } else {
        None
    };

    let mut cert_cur = cert;
    let mut tau = cfg.tau.max(1);
    let mut bandit = BanditState::new(n, cfg.eta, tau);
    if let Some(order) = &fbs_order {
        bandit.active = order.clone();
    }

    let mut state = cfg.x0.clone();
    let mut next = vec![0.0; plant.state_dim()];
    let mut u = vec![0.0; plant.control_dim()];

    let mut state_norms = Vec::with_capacity(steps_total);
    let mut costs = Vec::with_capacity(steps_total);
    let mut step_arms = Vec::with_capacity(steps_total);
    let mut step_batches = Vec::with_capacity(steps_total);
    let mut step_pool_sizes = Vec::with_capacity(steps_total);
    let mut episodes = Vec::new();
    let mut deactivations = Vec::new();

    let mut t = 0usize;
    let mut restarts = 0u32;
    let mut max_state_norm = norm(&state);
    let outcome;

    'trial: loop {
        if t > cfg.horizon {
            outcome = TrialOutcome::Completed;
            break;
        }
        if bandit.active.is_empty() {
            match escalation {
                Some(rule) if rule.enabled => match escalate(
                    &cert_cur.expect("escalation implies a certificate"),
                    restarts,
                    rule,
                ) {
                    Ok(new_cert) => {
                        cert_cur = Some(new_cert);
                        tau = tau.max(min_batch_length(new_cert.kappa, new_cert.rho));
                        restarts += 1;
                        bandit = BanditState::new(n, cfg.eta, tau);
                        bandit.batch_index = episodes.len();
                        continue;
                    }
                    Err(_) => {
                        outcome = TrialOutcome::RestartBudgetExhausted;
                        break;
                    }
                },
                _ => {
                    outcome = TrialOutcome::EmptyPool;
                    break;
                }
            }
        }

        // Arm selection.
        let (probs, pos) = if kind == AlgorithmKind::Fbs {
            (Vec::new(), 0)
        } else {
            let p = bandit.probabilities()?;
            let pos = bandit.sample(&p, arm_rng);
            (p, pos)
        };
        let arm = bandit.active[pos];
        let p_chosen = if probs.is_empty() { 1.0 } else { probs[pos] };
        let active_at_selection = bandit.active.clone();

        let j = episodes.len();
        let anchor = state.clone();
        let anchor_norm = norm(&anchor);
        let t_start = t;
        let t_last = (t_start + tau - 1).min(cfg.horizon);
        let pool_size = bandit.active.len() as u32;

        let mut broke = false;
        let mut diverged = false;
        let mut cost_sum = 0.0;
        let mut learner_sum = 0.0;

        for step_t in t_start..=t_last {
            pool[arm].act(&state, &mut u);
            let c = cost.cost(step_t, &state, &u);
            state_norms.push(norm(&state));
            costs.push(c);
            step_arms.push(arm as u32);
            step_batches.push(j as u32);
            step_pool_sizes.push(pool_size);
            cost_sum += c;
            learner_sum += if kind.scales_learner_costs() {
                c.min(cfg.clip_ceiling) / cfg.clip_ceiling
            } else {
                c
            };

            plant.step(&state, &u, noise.at(step_t), &mut next);
            std::mem::swap(&mut state, &mut next);
            t = step_t + 1;

            let x_next_norm = norm(&state);
            if x_next_norm > max_state_norm {
                max_state_norm = x_next_norm;
            }
            if !x_next_norm.is_finite() || x_next_norm > cfg.overflow_guard {
                diverged = true;
                break;
            }
            if let (true, Some(cp)) = (kind.uses_certificate(), &cert_cur) {
                let k = (step_t + 1 - t_start) as u32;
                if !check_envelope(x_next_norm, anchor_norm, k, cp) {
                    bandit.deactivate(arm);
                    deactivations.push((arm, j));
                    broke = true;
                    break;
                }
            }
        }

        // Batch bookkeeping: divide by the FULL tau even when truncated.
        let avg_cost = cost_sum / tau as f64;
        let learner_avg_cost = learner_sum / tau as f64;
        // Estimates are updated only for arms still in the pool; a broken
        // arm's estimate is dropped with the arm.
        if kind.uses_weights() && !broke {
            bandit.update_estimate(arm, learner_avg_cost, p_chosen);
        }
        episodes.push(EpisodeRecord {
            batch: j,
            arm,
            t_start,
            t_end: t,
            broke,
            avg_cost,
            learner_avg_cost,
            anchor_norm,
            anchor,
            probs,
            active_arms: active_at_selection,
            p_chosen,
            cert: if kind.uses_certificate() { cert_cur } else { None },
        });
        bandit.batch_index = episodes.len();

        if diverged {
            outcome = TrialOutcome::Diverged;
            break 'trial;
        }
    }

    Ok(TrialResult {
        algorithm: kind,
        horizon: cfg.horizon,
        tau,
        outcome,
        state_norms,
        costs,
        step_arms,
        step_batches,
        step_pool_sizes,
        episodes,
        deactivations,
        restarts,
        max_state_norm,
        final_active: bandit.active,
    })
}
