//! Online switching control with stability certificates.
//!
//! A pool of black-box candidate controllers drives an unknown plant; a
//! bandit learner picks which candidate acts during each batch of steps while
//! a per-step exponential-stability envelope deactivates any candidate that
//! lets the state escape. The crate provides the plants, controller pools,
//! the certificate, four switching algorithms, regret and finite-gain
//! metrics, and a reproducible multi-trial experiment harness.

pub mod certificate;
pub mod config;
pub mod controllers;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod switching;

pub use certificate::{check_envelope, escalate, min_batch_length, CertParams, EscalationRule};
pub use config::{Experiment, FileConfig, PlantSpec, PoolSpec, Preset};
pub use controllers::{
    build_quadrotor_pool, build_scalar_pool, GeometricPd, LinearGain, Policy,
};
pub use dynamics::{
    norm, DisturbanceSpec, NoiseSequence, PlanarQuadrotor, Plant, QuadrotorParams, ScalarPlant,
    OVERFLOW_GUARD,
};
pub use error::{Error, Result};
pub use harness::{
    compare_algorithms, run_experiment, AlgorithmReport, RunSummary, TrialReport, SCHEMA_VERSION,
};
pub use metrics::{
    aux_regret, batch_count_bound, benchmark_costs, benchmark_value, finite_gain_sums,
    policy_regret, theoretical_l1_bound, total_cost, verify_envelope_by_construction,
    BenchmarkEntry, CostFunction, L1BoundInputs, PositionQuadraticCost, ScalarQuadraticCost,
};
pub use switching::{
    recommended_params, run_exp3, run_exp3_batch, run_exp3_iss, run_fbs, run_trial,
    AlgorithmKind, BanditState, EpisodeRecord, RunConfig, TrialOutcome, TrialResult,
    DEFAULT_C_ETA,
};
