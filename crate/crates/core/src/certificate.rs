//! Per-step stability envelope check, the minimum batch length it requires,
//! and the escalation rule applied when every candidate fails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Envelope parameters. `margin` stores the product `beta * w_max` as one
/// number; the check never uses the factors separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertParams {
    pub kappa: f64,
    pub rho: f64,
    pub margin: f64,
}

impl CertParams {
    pub fn new(kappa: f64, rho: f64, margin: f64) -> Result<Self> {
        let p = Self { kappa, rho, margin };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa < 1.0 || !(0.0 < self.rho && self.rho < 1.0) || self.margin <= 0.0 {
            return Err(Error::Config(format!(
                "certificate requires kappa >= 1, rho in (0,1), margin > 0; got ({}, {}, {})",
                self.kappa, self.rho, self.margin
            )));
        }
        Ok(())
    }
}

/// How to relax the certificate when the pool empties.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EscalationRule {
    pub enabled: bool,
    pub d_kappa: f64,
    pub d_margin: f64,
    pub max_restarts: u32,
}

impl Default for EscalationRule {
    fn default() -> Self {
        Self {
            enabled: false,
            d_kappa: 0.5,
            d_margin: 1.0,
            max_restarts: 3,
        }
    }
}

/// Envelope check for the state `k` steps after the batch anchor. Passes iff
/// `x_next_norm <= kappa * rho^k * anchor_norm + margin`; equality passes
/// (the break condition is strict).
pub fn check_envelope(x_next_norm: f64, anchor_norm: f64, k: u32, p: &CertParams) -> bool {
    x_next_norm <= p.kappa * p.rho.powi(k as i32) * anchor_norm + p.margin
}

/// Smallest batch length tau with `tau >= log(2 sqrt(2) kappa) / (-log rho)`,
/// which guarantees `kappa * rho^tau <= 1 / (2 sqrt(2))`.
pub fn min_batch_length(kappa: f64, rho: f64) -> usize {
    let tau = ((2.0 * std::f64::consts::SQRT_2 * kappa).ln() / -rho.ln()).ceil();
    tau as usize
}

/// One escalation step: kappa and margin grow additively, rho moves halfway
/// toward 1. The batch length must be recomputed afterwards.
pub fn escalate(p: &CertParams, used_restarts: u32, rule: &EscalationRule) -> Result<CertParams> {
    if used_restarts >= rule.max_restarts {
        return Err(Error::RestartBudgetExhausted(used_restarts));
    }
    Ok(CertParams {
        kappa: p.kappa + rule.d_kappa,
        rho: (1.0 + p.rho) / 2.0,
        margin: p.margin + rule.d_margin,
    })
}
