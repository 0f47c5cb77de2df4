use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Every candidate has been deactivated and escalation is disabled.
    #[error("candidate pool is empty")]
    EmptyPool,

    /// Escalation was requested but the restart budget is spent.
    #[error("restart budget exhausted after {0} restarts")]
    RestartBudgetExhausted(u32),

    /// No fixed candidate satisfies the certificate on this noise realization,
    /// so the regret benchmark is undefined.
    #[error("no candidate certifies; benchmark is infeasible")]
    Infeasible,

    /// The stability condition kappa * rho^tau < 1 does not hold.
    #[error("condition violated: kappa * rho^tau >= 1 (kappa={kappa}, rho={rho}, tau={tau})")]
    ConditionViolated { kappa: f64, rho: f64, tau: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
