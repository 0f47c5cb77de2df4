//! Experiment configuration: TOML file schema, presets, and validation.
//!
//! A config file is a TOML document with optional top-level keys and nested
//! sections; a preset fills in pool, disturbance, certificate, and cost
//! defaults, and any explicit field overrides the preset. Environment
//! variables override only the output directory (`EXP3ISS_OUT_DIR`) and the
//! worker count (`EXP3ISS_WORKERS`).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::certificate::{CertParams, EscalationRule};
use crate::controllers::{build_quadrotor_pool, build_scalar_pool, GeometricPd, Policy};
use crate::dynamics::{DisturbanceSpec, PlanarQuadrotor, Plant, QuadrotorParams, ScalarPlant};
use crate::error::{Error, Result};
use crate::metrics::{CostFunction, PositionQuadraticCost, ScalarQuadraticCost};
use crate::switching::{recommended_params, AlgorithmKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    ScalarA,
    ScalarB,
    ScalarC,
    Quadrotor,
    Custom,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "scalar-a" => Ok(Self::ScalarA),
            "scalar-b" => Ok(Self::ScalarB),
            "scalar-c" => Ok(Self::ScalarC),
            "quadrotor" => Ok(Self::Quadrotor),
            "custom" => Ok(Self::Custom),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected scalar-a|scalar-b|scalar-c|quadrotor|custom)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ScalarA => "scalar-a",
            Self::ScalarB => "scalar-b",
            Self::ScalarC => "scalar-c",
            Self::Quadrotor => "quadrotor",
            Self::Custom => "custom",
        }
    }
}

/// Raw file schema. Every field is optional; presets and defaults fill gaps.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub horizon: Option<usize>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub x0: Option<Vec<f64>>,
    pub workers: Option<usize>,
    pub algorithm: Option<AlgorithmSection>,
    pub certificate: Option<CertificateSection>,
    pub pool: Option<PoolSection>,
    pub disturbance: Option<DisturbanceSection>,
    pub output: Option<OutputSection>,
    pub bound: Option<BoundSection>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    /// exp3iss | exp3 | exp3batch | fbs
    pub name: Option<String>,
    /// Fixed learning rate; omit for the recommended schedule.
    pub eta: Option<f64>,
    /// Fixed batch length; omit for the recommended schedule.
    pub tau: Option<usize>,
    /// Constant in front of the recommended eta.
    pub c_eta: Option<f64>,
    /// Learner-side per-step cost ceiling for exp3/exp3batch.
    pub clip_ceiling: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    pub kappa: Option<f64>,
    pub rho: Option<f64>,
    pub margin: Option<f64>,
    pub escalation: Option<EscalationSection>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EscalationSection {
    pub enabled: Option<bool>,
    pub d_kappa: Option<f64>,
    pub d_margin: Option<f64>,
    pub max_restarts: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSection {
    /// Scalar pool: one linear gain per entry.
    pub gains: Option<Vec<f64>>,
    /// Quadrotor pool: scale factors applied around the nominal gains.
    pub scales: Option<Vec<f64>>,
    pub nominal_k_p: Option<f64>,
    pub nominal_k_d: Option<f64>,
    pub nominal_k_p_theta: Option<f64>,
    pub nominal_k_d_theta: Option<f64>,
    /// Mass estimate ratio (estimate / true mass).
    pub m_est_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    /// uniform | gaussian
    pub kind: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub sigma: Option<f64>,
    pub trunc_sigmas: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// Write the per-step CSV (can be large for long horizons).
    pub per_step: Option<bool>,
}

/// Constants for the theoretical l1 bound; exact for the scalar plant,
/// user-supplied for the quadrotor.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSection {
    pub l_f: Option<f64>,
    pub l_pi: Option<f64>,
    pub pi0_bar: Option<f64>,
}

/// Which testbed the experiment runs on.
#[derive(Debug, Clone)]
pub enum PlantSpec {
    Scalar,
    Quadrotor(QuadrotorParams),
}

#[derive(Debug, Clone)]
pub enum PoolSpec {
    ScalarGains(Vec<f64>),
    Quadrotor {
        nominal: GeometricPd,
        scales: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy)]
pub enum EtaSpec {
    Auto { c_eta: f64 },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy)]
pub enum TauSpec {
    Auto,
    Fixed(usize),
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub preset: Preset,
    pub horizon: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub x0: Vec<f64>,
    pub workers: usize,
    pub algorithm: AlgorithmKind,
    pub eta: EtaSpec,
    pub tau: TauSpec,
    pub clip_ceiling: f64,
    pub cert: CertParams,
    pub escalation: EscalationRule,
    pub plant: PlantSpec,
    pub pool: PoolSpec,
    pub disturbance: DisturbanceSpec,
    pub out_dir: PathBuf,
    pub per_step_csv: bool,
    /// Bound-evaluation constants, when available for this plant.
    pub bound: Option<(f64, f64, f64)>,
}

impl Experiment {
    /// Resolves a raw file config against its preset and applies environment
    /// overrides.
    pub fn resolve(file: &FileConfig) -> Result<Self> {
        let preset = match &file.preset {
            Some(p) => Preset::parse(p)?,
            None => Preset::Custom,
        };

        let scalar_gains_default = |gains: Vec<f64>| PoolSpec::ScalarGains(gains);
        let (plant, pool_default, dist_default, cert_default, horizon_default, x0_default) =
            match preset {
                Preset::ScalarA => (
                    PlantSpec::Scalar,
                    Some(scalar_gains_default(vec![-1.0, -0.3, 1.0])),
                    Some(DisturbanceSpec::Uniform {
                        lo: -0.3,
                        hi: 0.7,
                        dim: 1,
                    }),
                    Some(CertParams {
                        kappa: 1.5,
                        rho: 0.995,
                        margin: 75.0,
                    }),
                    100_000,
                    vec![0.0],
                ),
                Preset::ScalarB => (
                    PlantSpec::Scalar,
                    Some(scalar_gains_default(vec![-1.0, 0.0, 1.0])),
                    Some(DisturbanceSpec::Uniform {
                        lo: -0.3,
                        hi: 0.7,
                        dim: 1,
                    }),
                    Some(CertParams {
                        kappa: 1.5,
                        rho: 0.995,
                        margin: 75.0,
                    }),
                    100_000,
                    vec![0.0],
                ),
                Preset::ScalarC => (
                    PlantSpec::Scalar,
                    Some(scalar_gains_default(vec![-1.0, -0.3, 1.0])),
                    Some(DisturbanceSpec::Uniform {
                        lo: -0.3,
                        hi: 0.7,
                        dim: 1,
                    }),
                    Some(CertParams {
                        kappa: 1.5,
                        rho: 0.995,
                        margin: 75.0,
                    }),
                    100_000,
                    vec![0.0],
                ),
                Preset::Quadrotor => (
                    PlantSpec::Quadrotor(QuadrotorParams::default()),
                    Some(PoolSpec::Quadrotor {
                        nominal: GeometricPd::nominal(2.0, 1.0),
                        scales: vec![0.1, 1.0, 10.0],
                    }),
                    Some(DisturbanceSpec::Gaussian {
                        sigma: 0.1,
                        trunc_sigmas: 4.0,
                        dim: 2,
                    }),
                    Some(CertParams {
                        kappa: 1.1,
                        rho: 0.995,
                        margin: 4.35,
                    }),
                    1_000,
                    vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                ),
                Preset::Custom => (PlantSpec::Scalar, None, None, None, 100_000, vec![0.0]),
            };

        // Pool: explicit section overrides the preset.
        let pool = if let Some(sec) = &file.pool {
            if let Some(gains) = &sec.gains {
                if sec.scales.is_some() {
                    return Err(Error::Config(
                        "pool: specify either gains (scalar) or scales (quadrotor), not both"
                            .into(),
                    ));
                }
                PoolSpec::ScalarGains(gains.clone())
            } else if sec.scales.is_some() || sec.nominal_k_p.is_some() {
                let params = QuadrotorParams::default();
                let m_est = sec.m_est_ratio.unwrap_or(2.0) * params.mass;
                let mut nominal = GeometricPd::nominal(m_est, params.inertia);
                if let Some(v) = sec.nominal_k_p {
                    nominal.k_p = v;
                }
                if let Some(v) = sec.nominal_k_d {
                    nominal.k_d = v;
                }
                if let Some(v) = sec.nominal_k_p_theta {
                    nominal.k_p_theta = v;
                }
                if let Some(v) = sec.nominal_k_d_theta {
                    nominal.k_d_theta = v;
                }
                PoolSpec::Quadrotor {
                    nominal,
                    scales: sec.scales.clone().unwrap_or(vec![0.1, 1.0, 10.0]),
                }
            } else {
                pool_default.ok_or_else(|| {
                    Error::Config("pool section is empty and no preset supplies one".into())
                })?
            }
        } else {
            pool_default
                .ok_or_else(|| Error::Config("custom preset requires a [pool] section".into()))?
        };

        // The plant follows the pool for custom configs.
        let plant = match (&pool, &plant) {
            (PoolSpec::ScalarGains(_), _) => PlantSpec::Scalar,
            (PoolSpec::Quadrotor { .. }, PlantSpec::Quadrotor(p)) => PlantSpec::Quadrotor(*p),
            (PoolSpec::Quadrotor { .. }, PlantSpec::Scalar) => {
                PlantSpec::Quadrotor(QuadrotorParams::default())
            }
        };

        let disturbance = if let Some(sec) = &file.disturbance {
            let dim = match &plant {
                PlantSpec::Scalar => 1,
                PlantSpec::Quadrotor(_) => 2,
            };
            match sec.kind.as_deref() {
                Some("uniform") => DisturbanceSpec::Uniform {
                    lo: sec.lo.ok_or_else(|| {
                        Error::Config("disturbance.lo required for uniform".into())
                    })?,
                    hi: sec.hi.ok_or_else(|| {
                        Error::Config("disturbance.hi required for uniform".into())
                    })?,
                    dim,
                },
                Some("gaussian") => DisturbanceSpec::Gaussian {
                    sigma: sec.sigma.ok_or_else(|| {
                        Error::Config("disturbance.sigma required for gaussian".into())
                    })?,
                    trunc_sigmas: sec.trunc_sigmas.unwrap_or(4.0),
                    dim,
                },
                Some(other) => {
                    return Err(Error::Config(format!(
                        "disturbance.kind '{other}' (expected uniform|gaussian)"
                    )))
                }
                None => dist_default.ok_or_else(|| {
                    Error::Config("disturbance.kind required without a preset".into())
                })?,
            }
        } else {
            dist_default.ok_or_else(|| {
                Error::Config("custom preset requires a [disturbance] section".into())
            })?
        };
        disturbance.validate()?;

        let cert_sec = file.certificate.clone().unwrap_or_default();
        let base_cert = cert_default.unwrap_or(CertParams {
            kappa: 1.5,
            rho: 0.995,
            margin: 75.0,
        });
        let cert = CertParams {
            kappa: cert_sec.kappa.unwrap_or(base_cert.kappa),
            rho: cert_sec.rho.unwrap_or(base_cert.rho),
            margin: cert_sec.margin.unwrap_or(base_cert.margin),
        };
        cert.validate()?;

        let esc_sec = cert_sec.escalation.unwrap_or_default();
        let esc_default = EscalationRule::default();
        let escalation = EscalationRule {
            enabled: esc_sec.enabled.unwrap_or(esc_default.enabled),
            d_kappa: esc_sec.d_kappa.unwrap_or(esc_default.d_kappa),
            d_margin: esc_sec.d_margin.unwrap_or(esc_default.d_margin),
            max_restarts: esc_sec.max_restarts.unwrap_or(esc_default.max_restarts),
        };

        let alg_sec = file.algorithm.clone().unwrap_or_default();
        let algorithm = match alg_sec.name.as_deref() {
            Some(name) => AlgorithmKind::parse(name)?,
            None => AlgorithmKind::Exp3Iss,
        };
        let eta = match alg_sec.eta {
            Some(v) if v > 0.0 => EtaSpec::Fixed(v),
            Some(v) => return Err(Error::Config(format!("algorithm.eta must be > 0, got {v}"))),
            None => EtaSpec::Auto {
                c_eta: alg_sec.c_eta.unwrap_or(crate::switching::DEFAULT_C_ETA),
            },
        };
        let tau = match alg_sec.tau {
            Some(v) if v >= 1 => TauSpec::Fixed(v),
            Some(v) => {
                return Err(Error::Config(format!("algorithm.tau must be >= 1, got {v}")))
            }
            None => TauSpec::Auto,
        };

        let horizon = file.horizon.unwrap_or(horizon_default);
        let trials = file.trials.unwrap_or(100);
        if horizon < 1 || trials < 1 {
            return Err(Error::Config(format!(
                "horizon and trials must be >= 1, got {horizon}, {trials}"
            )));
        }

        let x0 = file.x0.clone().unwrap_or(x0_default);
        let expected_dim = match &plant {
            PlantSpec::Scalar => 1,
            PlantSpec::Quadrotor(_) => 6,
        };
        if x0.len() != expected_dim {
            return Err(Error::Config(format!(
                "x0 has dimension {}, plant expects {expected_dim}",
                x0.len()
            )));
        }

        let out_sec = file.output.clone().unwrap_or_default();
        let mut out_dir = out_sec.dir.unwrap_or_else(|| PathBuf::from("out"));
        if let Ok(dir) = std::env::var("EXP3ISS_OUT_DIR") {
            out_dir = PathBuf::from(dir);
        }
        let mut workers = file.workers.unwrap_or(0); // 0 = rayon default
        if let Ok(w) = std::env::var("EXP3ISS_WORKERS") {
            workers = w
                .parse()
                .map_err(|_| Error::Config(format!("EXP3ISS_WORKERS='{w}' is not an integer")))?;
        }

        // Scalar plants have exact bound constants unless overridden.
        let bound_sec = file.bound.clone().unwrap_or_default();
        let bound = match (&plant, &pool) {
            (PlantSpec::Scalar, PoolSpec::ScalarGains(gains)) => {
                let l_pi_exact = gains.iter().fold(0.0f64, |m, g| m.max(g.abs()));
                Some((
                    bound_sec.l_f.unwrap_or(1.0),
                    bound_sec.l_pi.unwrap_or(l_pi_exact),
                    bound_sec.pi0_bar.unwrap_or(0.0),
                ))
            }
            _ => match (bound_sec.l_f, bound_sec.l_pi) {
                (Some(l_f), Some(l_pi)) => Some((l_f, l_pi, bound_sec.pi0_bar.unwrap_or(0.0))),
                _ => None,
            },
        };

        Ok(Self {
            preset,
            horizon,
            trials,
            master_seed: file.master_seed.unwrap_or(0),
            x0,
            workers,
            algorithm,
            eta,
            tau,
            clip_ceiling: alg_sec.clip_ceiling.unwrap_or(1e9),
            cert,
            escalation,
            plant,
            pool,
            disturbance,
            out_dir,
            per_step_csv: out_sec.per_step.unwrap_or(true),
            bound,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: FileConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
        Self::resolve(&file)
    }

    pub fn build_plant(&self) -> Box<dyn Plant> {
        match &self.plant {
            PlantSpec::Scalar => Box::new(ScalarPlant),
            PlantSpec::Quadrotor(p) => Box::new(PlanarQuadrotor::new(*p)),
        }
    }

    pub fn build_pool(&self) -> Result<Vec<Box<dyn Policy>>> {
        match &self.pool {
            PoolSpec::ScalarGains(gains) => build_scalar_pool(gains),
            PoolSpec::Quadrotor { nominal, scales } => Ok(build_quadrotor_pool(nominal, scales)),
        }
    }

    pub fn build_cost(&self) -> Box<dyn CostFunction> {
        match &self.plant {
            PlantSpec::Scalar => Box::new(ScalarQuadraticCost),
            PlantSpec::Quadrotor(_) => Box::new(PositionQuadraticCost),
        }
    }

    /// Resolved (eta, tau) for a given pool size, applying the recommended
    /// schedule where requested.
    pub fn resolve_params(&self, n_arms: usize) -> (f64, usize) {
        let (auto_eta, auto_tau) = recommended_params(
            n_arms,
            self.horizon,
            &self.cert,
            match self.eta {
                EtaSpec::Auto { c_eta } => c_eta,
                EtaSpec::Fixed(_) => 1.0,
            },
        );
        let eta = match self.eta {
            EtaSpec::Auto { .. } => auto_eta,
            EtaSpec::Fixed(v) => v,
        };
        let tau = match self.tau {
            TauSpec::Auto => auto_tau,
            TauSpec::Fixed(v) => v,
        };
        (eta, tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_defaults_resolve() {
        let exp = Experiment::from_toml("preset = \"scalar-b\"").unwrap();
        assert_eq!(exp.horizon, 100_000);
        assert_eq!(exp.trials, 100);
        assert_eq!(exp.cert.margin, 75.0);
        match &exp.pool {
            PoolSpec::ScalarGains(g) => assert_eq!(g, &vec![-1.0, 0.0, 1.0]),
            _ => panic!("expected scalar pool"),
        }
    }

    #[test]
    fn quadrotor_preset_builds_81_policies() {
        let exp = Experiment::from_toml("preset = \"quadrotor\"").unwrap();
        let pool = exp.build_pool().unwrap();
        assert_eq!(pool.len(), 81);
        assert_eq!(exp.cert.kappa, 1.1);
        assert_eq!(exp.cert.margin, 4.35);
        assert_eq!(
            exp.disturbance,
            DisturbanceSpec::Gaussian {
                sigma: 0.1,
                trunc_sigmas: 4.0,
                dim: 2
            }
        );
    }

    #[test]
    fn explicit_fields_override_preset() {
        let exp = Experiment::from_toml(
            r#"
preset = "scalar-b"
horizon = 5000
trials = 7
[algorithm]
name = "fbs"
tau = 300
[pool]
gains = [-1.0, -0.5, 1.0]
"#,
        )
        .unwrap();
        assert_eq!(exp.horizon, 5000);
        assert_eq!(exp.trials, 7);
        assert_eq!(exp.algorithm, AlgorithmKind::Fbs);
        assert!(matches!(exp.tau, TauSpec::Fixed(300)));
    }

    #[test]
    fn unknown_fields_are_rejected_with_diagnostics() {
        let err = Experiment::from_toml("preset = \"scalar-b\"\nhorzon = 10\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("horzon"), "diagnostic should name the field: {msg}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(Experiment::from_toml("preset = \"scalar-b\"\ntrials = 0\n").is_err());
        assert!(
            Experiment::from_toml("preset = \"scalar-b\"\n[algorithm]\neta = -0.5\n").is_err()
        );
        assert!(Experiment::from_toml("preset = \"nope\"").is_err());
    }

    #[test]
    fn custom_requires_pool_and_disturbance() {
        assert!(Experiment::from_toml("").is_err());
        let exp = Experiment::from_toml(
            r#"
[pool]
gains = [-1.0]
[disturbance]
kind = "uniform"
lo = -0.3
hi = 0.7
"#,
        )
        .unwrap();
        assert_eq!(exp.preset, Preset::Custom);
    }

    #[test]
    fn scalar_bound_constants_are_exact() {
        let exp = Experiment::from_toml("preset = \"scalar-b\"").unwrap();
        let (l_f, l_pi, pi0) = exp.bound.unwrap();
        assert_eq!((l_f, l_pi, pi0), (1.0, 1.0, 0.0));
    }
}
