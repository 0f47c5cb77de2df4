//! Discrete-time plant models and bounded disturbance generation.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// State-norm threshold past which a trial is frozen as diverged. Baselines
/// without a certificate genuinely blow up and must not poison floating point.
pub const OVERFLOW_GUARD: f64 = 1e12;

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A discrete-time plant `x_{t+1} = f(x_t, u_t, w_t)`.
pub trait Plant: Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn disturbance_dim(&self) -> usize;
    /// Writes the successor state into `next`.
    fn step(&self, x: &[f64], u: &[f64], w: &[f64], next: &mut [f64]);
}

/// Scalar integrator plant `x_{t+1} = x_t + 0.01 u_t + w_t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarPlant;

pub fn scalar_step(x: f64, u: f64, w: f64) -> f64 {
    x + 0.01 * u + w
}

impl Plant for ScalarPlant {
    fn state_dim(&self) -> usize {
        1
    }
    fn control_dim(&self) -> usize {
        1
    }
    fn disturbance_dim(&self) -> usize {
        1
    }
    fn step(&self, x: &[f64], u: &[f64], w: &[f64], next: &mut [f64]) {
        next[0] = scalar_step(x[0], u[0], w[0]);
    }
}

/// Physical parameters of the planar quadrotor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadrotorParams {
    /// Mass (kg).
    pub mass: f64,
    /// Moment of inertia (kg m^2).
    pub inertia: f64,
    /// Arm length (m).
    pub arm: f64,
    /// Translational drag constant.
    pub d_x: f64,
    /// Rotational drag constant.
    pub d_theta: f64,
    /// Gravitational constant (m/s^2).
    pub gravity: f64,
    /// Integration step (s).
    pub dt: f64,
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            inertia: 1.0,
            arm: 1.0,
            d_x: 1e-4,
            d_theta: 1e-8,
            gravity: 9.81,
            dt: 0.01,
        }
    }
}

/// Planar quadrotor with state `(x, y, theta, vx, vy, omega)`, two propeller
/// thrusts as control, and (thrust, torque) disturbance channels. Positive
/// total thrust opposes gravity at `theta = 0`: the thrust direction is
/// `d(theta) = (-sin theta, cos theta)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlanarQuadrotor {
    pub params: QuadrotorParams,
}

impl PlanarQuadrotor {
    pub fn new(params: QuadrotorParams) -> Self {
        Self { params }
    }
}

impl Plant for PlanarQuadrotor {
    fn state_dim(&self) -> usize {
        6
    }
    fn control_dim(&self) -> usize {
        2
    }
    fn disturbance_dim(&self) -> usize {
        2
    }

    /// Symplectic Euler: velocities are updated from the accelerations of the
    /// current state, then positions are updated with the new velocities.
    fn step(&self, s: &[f64], u: &[f64], w: &[f64], next: &mut [f64]) {
        let p = &self.params;
        let (x, y, theta, vx, vy, omega) = (s[0], s[1], s[2], s[3], s[4], s[5]);
        let thrust = u[0] + u[1] + w[0];
        let speed = (vx * vx + vy * vy).sqrt();
        let ax = thrust * (-theta.sin()) / p.mass - (p.d_x / p.mass) * speed * vx;
        let ay = thrust * theta.cos() / p.mass - p.gravity - (p.d_x / p.mass) * speed * vy;
        let alpha =
            (p.arm * (u[0] - u[1]) + w[1]) / p.inertia - (p.d_theta / p.inertia) * omega.abs() * omega;

        let vx1 = vx + p.dt * ax;
        let vy1 = vy + p.dt * ay;
        let omega1 = omega + p.dt * alpha;
        next[0] = x + p.dt * vx1;
        next[1] = y + p.dt * vy1;
        next[2] = theta + p.dt * omega1;
        next[3] = vx1;
        next[4] = vy1;
        next[5] = omega1;
    }
}

/// Per-entry disturbance law. Every sample is bounded: uniform entries by the
/// interval, Gaussian entries by rejection at `trunc_sigmas * sigma`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DisturbanceSpec {
    Uniform { lo: f64, hi: f64, dim: usize },
    Gaussian { sigma: f64, trunc_sigmas: f64, dim: usize },
}

impl DisturbanceSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::Uniform { dim, .. } | Self::Gaussian { dim, .. } => *dim,
        }
    }

    /// Euclidean-norm bound over a full sample vector.
    pub fn w_max(&self) -> f64 {
        let (per_entry, dim) = match self {
            Self::Uniform { lo, hi, dim } => (lo.abs().max(hi.abs()), *dim),
            Self::Gaussian {
                sigma,
                trunc_sigmas,
                dim,
            } => (sigma * trunc_sigmas, *dim),
        };
        per_entry * (dim as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Uniform { lo, hi, dim } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) || *dim == 0 {
                    return Err(Error::Config(format!(
                        "uniform disturbance requires lo < hi and dim >= 1, got [{lo}, {hi}] dim {dim}"
                    )));
                }
            }
            Self::Gaussian {
                sigma,
                trunc_sigmas,
                dim,
            } => {
                if !(*sigma > 0.0 && *trunc_sigmas > 0.0) || *dim == 0 {
                    return Err(Error::Config(format!(
                        "gaussian disturbance requires sigma > 0 and trunc_sigmas > 0, got {sigma}, {trunc_sigmas}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::Uniform { lo, hi, .. } => {
                for v in out.iter_mut() {
                    *v = rng.random_range(*lo..*hi);
                }
            }
            Self::Gaussian {
                sigma,
                trunc_sigmas,
                ..
            } => {
                let normal = Normal::new(0.0, *sigma).expect("sigma validated");
                let cap = sigma * trunc_sigmas;
                for v in out.iter_mut() {
                    // Rejection sampling keeps every entry within the cap.
                    *v = loop {
                        let z = normal.sample(rng);
                        if z.abs() <= cap {
                            break z;
                        }
                    };
                }
            }
        }
    }
}

/// A pre-generated disturbance sequence for one trial. Indexed by step so the
/// algorithm run and every counterfactual rollout consume byte-identical noise
/// regardless of batch structure.
#[derive(Debug, Clone)]
pub struct NoiseSequence {
    dim: usize,
    samples: Vec<f64>,
}

impl NoiseSequence {
    pub fn generate<R: Rng>(spec: &DisturbanceSpec, steps: usize, rng: &mut R) -> Self {
        let dim = spec.dim();
        let mut samples = vec![0.0; steps * dim];
        for chunk in samples.chunks_mut(dim) {
            spec.sample_into(rng, chunk);
        }
        Self { dim, samples }
    }

    pub fn steps(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn at(&self, t: usize) -> &[f64] {
        &self.samples[t * self.dim..(t + 1) * self.dim]
    }

    pub fn checksum(&self) -> u64 {
        crate::rng::checksum(&self.samples)
    }
}
