//! Black-box candidate controller pool.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A candidate controller. Switching algorithms only ever see `act`.
pub trait Policy: Sync + Send {
    fn control_dim(&self) -> usize;
    fn act(&self, x: &[f64], u: &mut [f64]);
    /// Human-readable label for reports.
    fn label(&self) -> String;
}

/// Linear state feedback `u = K x` for the scalar plant.
#[derive(Debug, Clone, Copy)]
pub struct LinearGain {
    pub gain: f64,
}

impl Policy for LinearGain {
    fn control_dim(&self) -> usize {
        1
    }
    fn act(&self, x: &[f64], u: &mut [f64]) {
        u[0] = self.gain * x[0];
    }
    fn label(&self) -> String {
        format!("K={}", self.gain)
    }
}

/// Geometric proportional-derivative controller for the planar quadrotor.
///
/// Position PD produces a desired acceleration, gravity compensation gives a
/// desired thrust vector, and attitude PD tracks the implied desired angle.
/// Thrust and torque commands are clamped before the mixer solve so that
/// destabilizing gain settings stay numerically finite.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GeometricPd {
    pub k_p: f64,
    pub k_d: f64,
    pub k_p_theta: f64,
    pub k_d_theta: f64,
    /// Mass estimate used for thrust computation.
    pub m_est: f64,
    /// Inertia estimate used for torque computation.
    pub i_est: f64,
    /// Arm length (assumed known).
    pub arm: f64,
    pub gravity: f64,
    pub h_clip: f64,
    pub tau_clip: f64,
}

impl GeometricPd {
    pub fn nominal(m_est: f64, i_est: f64) -> Self {
        Self {
            k_p: 40.0,
            k_d: 10.0,
            k_p_theta: 400.0,
            k_d_theta: 100.0,
            m_est,
            i_est,
            arm: 1.0,
            gravity: 9.81,
            h_clip: 1e3,
            tau_clip: 1e4,
        }
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

fn clip(v: f64, cap: f64) -> f64 {
    v.clamp(-cap, cap)
}

impl Policy for GeometricPd {
    fn control_dim(&self) -> usize {
        2
    }

    fn act(&self, s: &[f64], u: &mut [f64]) {
        let (x, y, theta, vx, vy, omega) = (s[0], s[1], s[2], s[3], s[4], s[5]);

        // Desired acceleration and thrust vector (gravity compensated).
        let ax_des = -self.k_p * x - self.k_d * vx;
        let ay_des = -self.k_p * y - self.k_d * vy;
        let tx = ax_des;
        let ty = ay_des + self.gravity;

        // Angle aligning the thrust direction d(theta) = (-sin, cos) with the
        // desired thrust vector.
        let theta_des = f64::atan2(-tx, ty);

        // Total thrust: projection of the desired thrust vector onto the
        // current thrust axis.
        let h = self.m_est * (-theta.sin() * tx + theta.cos() * ty);

        let e_theta = wrap_angle(theta - theta_des);
        let alpha_des = -self.k_p_theta * e_theta - self.k_d_theta * omega;
        let tau_cmd = self.i_est * alpha_des;

        // Mixer: u1 + u2 = h_c, arm * (u1 - u2) = tau_c.
        let h_c = clip(h, self.h_clip);
        let tau_c = clip(tau_cmd, self.tau_clip);
        u[0] = 0.5 * (h_c + tau_c / self.arm);
        u[1] = 0.5 * (h_c - tau_c / self.arm);
    }

    fn label(&self) -> String {
        format!(
            "pd(kp={},kd={},kpt={},kdt={})",
            self.k_p, self.k_d, self.k_p_theta, self.k_d_theta
        )
    }
}

/// One linear-gain policy per entry, in list order.
pub fn build_scalar_pool(gains: &[f64]) -> Result<Vec<Box<dyn Policy>>> {
    if gains.is_empty() {
        return Err(Error::Config("scalar pool must be nonempty".into()));
    }
    Ok(gains
        .iter()
        .map(|&gain| Box::new(LinearGain { gain }) as Box<dyn Policy>)
        .collect())
}

/// Cartesian product of scale factors over four gain axes around a nominal
/// controller. Scales multiply `k_p`, the ratio `k_d / k_p`, `k_p_theta`, and
/// the ratio `k_d_theta / k_p_theta`. Enumeration order is nested loops with
/// the `k_p` scale outermost and the attitude-ratio scale innermost.
pub fn build_quadrotor_pool(nominal: &GeometricPd, scales: &[f64]) -> Vec<Box<dyn Policy>> {
    let kd_ratio = nominal.k_d / nominal.k_p;
    let kdt_ratio = nominal.k_d_theta / nominal.k_p_theta;
    let mut pool: Vec<Box<dyn Policy>> = Vec::with_capacity(scales.len().pow(4));
    for &s_kp in scales {
        for &s_ratio in scales {
            for &s_kpt in scales {
                for &s_ratio_t in scales {
                    let k_p = s_kp * nominal.k_p;
                    let k_p_theta = s_kpt * nominal.k_p_theta;
                    pool.push(Box::new(GeometricPd {
                        k_p,
                        k_d: s_ratio * kd_ratio * k_p,
                        k_p_theta,
                        k_d_theta: s_ratio_t * kdt_ratio * k_p_theta,
                        ..*nominal
                    }));
                }
            }
        }
    }
    pool
}
