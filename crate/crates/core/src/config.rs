//! Run configuration, dotted-key overrides and scenario presets.
//!
//! A configuration is a TOML document whose keys are the field paths of
//! [`RunConfig`], e.g. `grid.n = 128` or `noise.nu = 2.0`.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::datum::DatumSpec;
use crate::dynamics::{Dynamics, IntegratorSpec, Mode, NormProbe, Scheme, Simulation};
use crate::error::{Error, Result};
use crate::kernel::{CouplingMatrix, KernelSign, KernelSpec};
use crate::multipliers::{DriftEnvelope, NoiseSpec};
use crate::norms::{serde_exponent, XNormSpec};
use crate::paths::{sample_path, BrownianPath};
use crate::spectral::{GridSpec, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub epsilon: f64,
}

impl EnvelopeConfig {
    pub fn drift(&self) -> DriftEnvelope {
        DriftEnvelope {
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

/// The audited norm; its radius follows the envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub kappa: f64,
    #[serde(with = "serde_exponent")]
    pub r: f64,
    #[serde(default)]
    pub kappa_q: f64,
    #[serde(default)]
    pub q: Option<f64>,
}

impl AuditConfig {
    pub fn spec(&self) -> XNormSpec {
        XNormSpec {
            a: 0.0,
            sigma_r: self.kappa,
            r: self.r,
            sigma_q: self.kappa_q,
            q: self.q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
    #[serde(default)]
    pub plot: bool,
    /// Record `∫|x-c|²θ` about the datum center.
    #[serde(default)]
    pub second_moment: bool,
    #[serde(default = "default_true")]
    pub bridge: bool,
    #[serde(default = "default_threshold")]
    pub resolution_threshold: f64,
}

fn default_stride() -> usize {
    1
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_prefix() -> String {
    "run".into()
}
fn default_true() -> bool {
    true
}
fn default_threshold() -> f64 {
    0.1
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            stride: default_stride(),
            dir: default_dir(),
            prefix: default_prefix(),
            plot: false,
            second_moment: false,
            bridge: true,
            resolution_threshold: default_threshold(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    pub kernel: KernelSpec,
    pub coupling: CouplingMatrix,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub envelope: Option<EnvelopeConfig>,
    pub integrator: IntegratorSpec,
    pub datum: DatumSpec,
    #[serde(default)]
    pub norms: Vec<NormProbe>,
    #[serde(default)]
    pub audit: Option<AuditConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Everything needed to run one configuration.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub simulation: Simulation,
    pub theta0: SpectralField,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with::<&str>(text, &[])
    }

    /// Parses `text` and applies `key=value` overrides before validation.
    pub fn from_toml_with<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o.as_ref())?;
        }
        Self::from_table(table)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_with(&text, overrides)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// This configuration with `key=value` overrides applied.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut table = self.to_table()?;
        for o in overrides {
            apply_override(&mut table, o.as_ref())?;
        }
        Self::from_table(table)
    }

    pub fn to_table(&self) -> Result<toml::Table> {
        toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.kernel.validate(self.grid.d)?;
        self.coupling.validate(self.grid.d)?;
        self.noise.validate()?;
        self.integrator.validate()?;
        self.datum.validate()?;
        if self.integrator.mode != Mode::Deterministic {
            self.noise.require_noise()?;
        }
        for n in &self.norms {
            n.validate(self.grid.d, self.kernel.gamma)?;
        }
        if let Some(e) = &self.envelope {
            e.drift().validate()?;
            if !(e.epsilon.is_finite() && e.epsilon >= 0.0) {
                return Err(Error::Config("envelope.epsilon must be >= 0".into()));
            }
        }
        if let Some(a) = &self.audit {
            let env = self
                .envelope
                .ok_or_else(|| Error::Config("audit requires envelope.alpha and envelope.beta".into()))?;
            env.drift().check_damping(&self.noise)?;
            a.spec().validate(self.grid.d, self.kernel.gamma)?;
        }
        if self.output.stride == 0 {
            return Err(Error::Config("output.stride must be positive".into()));
        }
        Ok(())
    }

    /// Builds the dynamics, samples the path from `seed` and the datum.
    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let dynamics = Dynamics::new(
            self.grid,
            self.kernel,
            self.coupling.clone(),
            self.noise,
            self.integrator,
        )?;
        let path = match self.integrator.mode {
            Mode::Deterministic => BrownianPath::zero(self.integrator.dt, self.integrator.horizon)?,
            _ => sample_path(self.integrator.dt, self.integrator.horizon, self.seed)?,
        };
        let mut sim = Simulation::new(dynamics, path);
        sim.envelope = self.envelope.map(|e| e.drift());
        sim.epsilon = self.envelope.map_or(0.0, |e| e.epsilon);
        sim.bridge = self.output.bridge;
        sim.norms = self.norms.clone();
        sim.audit = self.audit.map(|a| a.spec());
        sim.stride = self.output.stride;
        sim.resolution_threshold = self.output.resolution_threshold;
        if self.output.second_moment {
            sim.moment_center = Some(self.datum.center(&self.grid));
        }
        let theta0 = self.datum.build(&self.grid)?;
        Ok(Prepared {
            simulation: sim,
            theta0,
        })
    }
}

/// Inserts `value` (parsed as a TOML value, or taken as a string) at the
/// dotted `key`.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            toml::Value::Array(a) => {
                return Err(Error::Config(format!(
                    "key {key:?} descends into an array of {} entries",
                    a.len()
                )))
            }
            _ => return Err(Error::Config(format!("key {key:?} descends into a scalar"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Named scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Deterministic attractive Newtonian aggregation from a Gaussian.
    PksBlowup,
    /// Hamiltonian `γ = 1` flow with a small random datum and noise.
    SqgRandom,
    /// Attractive Newtonian gradient flow with a small random datum and noise.
    AggregationRandom,
    /// Event parameters with closed-form probability `1 - e^{-1}`.
    EventBench,
    /// Two-dimensional `s = 1`, `r = 1` admissibility scan.
    RegionScan,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::PksBlowup,
        Preset::SqgRandom,
        Preset::AggregationRandom,
        Preset::EventBench,
        Preset::RegionScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PksBlowup => "pks_blowup",
            Preset::SqgRandom => "sqg_random",
            Preset::AggregationRandom => "aggregation_random",
            Preset::EventBench => "event_bench",
            Preset::RegionScan => "region_scan",
        }
    }

    /// The run configuration; `event_bench` and `region_scan` carry the
    /// shared physical parameters of their subcommands.
    pub fn config(self) -> RunConfig {
        match self {
            Preset::PksBlowup => RunConfig {
                seed: 0,
                grid: GridSpec { d: 2, n: 256, l: 40.0 },
                kernel: KernelSpec::newtonian2d(KernelSign::Attractive),
                coupling: CouplingMatrix::GradientFlow,
                noise: NoiseSpec {
                    s: 1.0,
                    nu: 0.0,
                    homogeneous: false,
                },
                envelope: None,
                integrator: IntegratorSpec::new(0.01, 12.0, Scheme::Etdrk2, Mode::Deterministic),
                datum: DatumSpec::Gaussian {
                    mass: 1.0,
                    width: 1.0,
                    center: None,
                },
                norms: vec![],
                audit: None,
                output: OutputConfig {
                    stride: 10,
                    second_moment: true,
                    prefix: "pks_blowup".into(),
                    ..OutputConfig::default()
                },
            },
            Preset::SqgRandom => RunConfig {
                seed: 1,
                grid: GridSpec {
                    d: 2,
                    n: 32,
                    l: 2.0 * std::f64::consts::PI,
                },
                kernel: KernelSpec::riesz(1.0, KernelSign::Repulsive),
                coupling: CouplingMatrix::Hamiltonian2D,
                noise: NoiseSpec {
                    s: 1.0,
                    nu: 1.0,
                    homogeneous: false,
                },
                envelope: Some(EnvelopeConfig {
                    alpha: 1.0,
                    beta: 0.45,
                    epsilon: 0.0,
                }),
                integrator: IntegratorSpec::new(0.002, 1.0, Scheme::Etdrk2, Mode::Ito),
                datum: DatumSpec::Random {
                    amplitude: 1e-3,
                    radius: 1.0,
                    seed: 1,
                },
                norms: vec![NormProbe {
                    a: None,
                    kappa: 0.0,
                    r: 2.0,
                    kappa_q: 0.0,
                    q: None,
                }],
                audit: Some(AuditConfig {
                    kappa: 2.0,
                    r: 2.0,
                    kappa_q: 0.0,
                    q: None,
                }),
                output: OutputConfig {
                    stride: 5,
                    prefix: "sqg_random".into(),
                    ..OutputConfig::default()
                },
            },
            Preset::AggregationRandom => RunConfig {
                kernel: KernelSpec::newtonian2d(KernelSign::Attractive),
                coupling: CouplingMatrix::GradientFlow,
                norms: vec![],
                audit: Some(AuditConfig {
                    kappa: 2.0,
                    r: 2.0,
                    kappa_q: 0.0,
                    q: Some(1.5),
                }),
                output: OutputConfig {
                    stride: 5,
                    prefix: "aggregation_random".into(),
                    ..OutputConfig::default()
                },
                ..Preset::SqgRandom.config()
            },
            Preset::EventBench => RunConfig {
                noise: NoiseSpec {
                    s: 1.0,
                    nu: std::f64::consts::SQRT_2,
                    homogeneous: false,
                },
                envelope: Some(EnvelopeConfig {
                    alpha: 1.0,
                    beta: 1.0,
                    epsilon: 0.0,
                }),
                integrator: IntegratorSpec::new(1e-3, 20.0, Scheme::Etdrk2, Mode::Ito),
                audit: None,
                output: OutputConfig {
                    prefix: "event_bench".into(),
                    ..OutputConfig::default()
                },
                ..Preset::SqgRandom.config()
            },
            Preset::RegionScan => RunConfig {
                output: OutputConfig {
                    prefix: "region_scan".into(),
                    ..OutputConfig::default()
                },
                ..Preset::SqgRandom.config()
            },
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?}")))
    }
}
