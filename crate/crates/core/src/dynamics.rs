//! Time integration of the pathwise transformed equation
//!
//! ```text
//! ∂_t μ + B^t(μ,μ) + ν²/2 (1+|∇|^s)^2 μ + χ|∇|^λ μ = 0,
//! B^t(f,g) = div Γ^t(Γ^{-t}f · M∇g∗Γ^{-t}g),   Γ^t = e^{-νW^t(1+|∇|^s)},
//! ```
//!
//! of its Stratonovich counterpart (no `ν²/2 A` term) and of the
//! deterministic equation (`W ≡ 0`). The linear part is always integrated
//! exactly through its semigroup.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{CouplingMatrix, KernelSpec};
use crate::multipliers::{apply_log_symbol, DriftEnvelope, NoiseSpec, DEFAULT_LOG_CAP};
use crate::norms::{
    gevrey_norm, l2_norm, mass, second_moment, serde_exponent, x_norm, AuditRow, EnergyAudit,
    NormSpec, XNormSpec,
};
use crate::paths::{event_membership, path_len, BrownianPath, EventSpec, Membership};
use crate::spectral::{forward_transform, inverse_unchecked, GridSpec, RealField, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Etd1,
    Etdrk2,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The Itô equation through its pathwise transform.
    Ito,
    /// The Stratonovich equation through the same transform.
    Stratonovich,
    /// `ν = 0`: the active scalar equation itself.
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub mode: Mode,
    /// Strength of the optional diffusion `χ|∇|^λ`.
    #[serde(default)]
    pub chi: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Krasny filter level: flux coefficients below `filter * max` are zeroed
    /// before `Γ` is applied. Zero disables it.
    #[serde(default)]
    pub filter: f64,
}

fn default_lambda() -> f64 {
    2.0
}

impl IntegratorSpec {
    pub fn new(dt: f64, horizon: f64, scheme: Scheme, mode: Mode) -> Self {
        IntegratorSpec {
            dt,
            horizon,
            scheme,
            mode,
            chi: 0.0,
            lambda: default_lambda(),
            filter: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("integrator.dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::Config(format!(
                "integrator.horizon must be >= 0, got {}",
                self.horizon
            )));
        }
        if !(self.chi.is_finite() && self.chi >= 0.0) {
            return Err(Error::Config(format!("integrator.chi must be >= 0, got {}", self.chi)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "integrator.lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(0.0..1.0).contains(&self.filter) {
            return Err(Error::Config(format!("integrator.filter must lie in [0,1), got {}", self.filter)));
        }
        if self.scheme == Scheme::Rk4 && self.mode != Mode::Deterministic {
            return Err(Error::Config("scheme rk4 is only available in deterministic mode".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        path_len(self.dt, self.horizon) - 1
    }
}

/// Precomputed symbols for one grid, model and time step.
#[derive(Clone, Debug)]
pub struct Dynamics {
    pub grid: GridSpec,
    pub kernel: KernelSpec,
    pub coupling: CouplingMatrix,
    pub noise: NoiseSpec,
    pub spec: IntegratorSpec,
    pub cap: f64,
    base: Vec<f64>,
    xi: Vec<[f64; 2]>,
    vel: Vec<[f64; 2]>,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
}

impl Dynamics {
    pub fn new(
        grid: GridSpec,
        kernel: KernelSpec,
        coupling: CouplingMatrix,
        noise: NoiseSpec,
        spec: IntegratorSpec,
    ) -> Result<Self> {
        grid.validate()?;
        kernel.validate(grid.d)?;
        coupling.validate(grid.d)?;
        noise.validate()?;
        spec.validate()?;
        if spec.mode != Mode::Deterministic {
            noise.require_noise()?;
        }
        let n = grid.len();
        let mut base = Vec::with_capacity(n);
        let mut xi = Vec::with_capacity(n);
        let mut vel = Vec::with_capacity(n);
        let mut lin = Vec::with_capacity(n);
        for i in 0..n {
            let w = grid.wavevector(i);
            let r = grid.wavenumber(i);
            let b = noise.base_symbol(r);
            base.push(b);
            if grid.is_nyquist(i) {
                xi.push([0.0, 0.0]);
                vel.push([0.0, 0.0]);
            } else {
                xi.push(w);
                let g = kernel.g_hat(w);
                let m = coupling.apply(grid.d, w);
                vel.push([m[0] * g, m[1] * g]);
            }
            let mut l = if r == 0.0 {
                0.0
            } else {
                -spec.chi * r.powf(spec.lambda)
            };
            if spec.mode == Mode::Ito {
                l -= 0.5 * noise.nu * noise.nu * b * b;
            }
            lin.push(l);
        }
        let e_full = lin.iter().map(|l| (l * spec.dt).exp()).collect();
        let e_half = lin.iter().map(|l| (0.5 * l * spec.dt).exp()).collect();
        Ok(Dynamics {
            grid,
            kernel,
            coupling,
            noise,
            spec,
            cap: DEFAULT_LOG_CAP,
            base,
            xi,
            vel,
            e_full,
            e_half,
        })
    }

    /// Same model with a different time step.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Dynamics::new(
            self.grid,
            self.kernel,
            self.coupling,
            self.noise,
            IntegratorSpec { dt, ..self.spec },
        )
    }

    fn uses_path(&self) -> bool {
        self.spec.mode != Mode::Deterministic && self.noise.nu != 0.0
    }

    /// `Γ^{-1}(w) f = e^{νw(1+|∇|^s)} f`.
    pub fn gamma_inverse(&self, f: &SpectralField, w: f64) -> Result<SpectralField> {
        if w == 0.0 || self.noise.nu == 0.0 {
            return Ok(f.clone());
        }
        let c = self.noise.nu * w;
        apply_log_symbol(f, self.cap, |i| c * self.base[i])
    }

    /// `Γ(w) f = e^{-νw(1+|∇|^s)} f`.
    pub fn gamma(&self, f: &SpectralField, w: f64) -> Result<SpectralField> {
        self.gamma_inverse(f, -w)
    }

    /// `θ = Γ^{-1}(W^t) μ`.
    pub fn recover_theta(&self, mu: &SpectralField, w: f64) -> Result<SpectralField> {
        self.gamma_inverse(mu, w)
    }

    /// `B(f,g) = div Γ(Γ^{-1}f · M∇g∗Γ^{-1}g)` at path value `w`, with the
    /// product dealiased by the 2/3 rule.
    pub fn bilinear_b(&self, f: &SpectralField, g: &SpectralField, w: f64) -> Result<SpectralField> {
        f.grid.check_same(&self.grid)?;
        g.grid.check_same(&self.grid)?;
        let a = self.gamma_inverse(f, w)?.dealiased();
        let b = if std::ptr::eq(f, g) {
            a.clone()
        } else {
            self.gamma_inverse(g, w)?.dealiased()
        };
        let pa = inverse_unchecked(&a);
        let d = self.grid.d;
        let mut div = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for j in 0..d {
            let mut v = SpectralField::zeros(self.grid);
            for (i, c) in v.coeffs.iter_mut().enumerate() {
                *c = Complex64::new(0.0, self.vel[i][j]) * b.coeffs[i];
            }
            let pv = inverse_unchecked(&v);
            let prod = RealField {
                grid: self.grid,
                values: pa.values.iter().zip(&pv.values).map(|(x, y)| x * y).collect(),
            };
            let mut ph = forward_transform(&prod);
            ph.dealias_in_place();
            for (i, acc) in div.iter_mut().enumerate() {
                *acc += Complex64::new(0.0, self.xi[i][j]) * ph.coeffs[i];
            }
        }
        if self.spec.filter > 0.0 {
            let floor = self.spec.filter * div.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for c in div.iter_mut().filter(|c| c.norm() < floor) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        let out = SpectralField {
            grid: self.grid,
            coeffs: div,
        };
        if self.uses_path() {
            self.gamma(&out, w)
        } else {
            Ok(out)
        }
    }

    /// `B(μ,μ)` with the path frozen at `w`; `w` is ignored in deterministic mode.
    pub fn nonlinear(&self, mu: &SpectralField, w: f64) -> Result<SpectralField> {
        let w = if self.uses_path() { w } else { 0.0 };
        self.bilinear_b(mu, mu, w)
    }

    fn diag(&self, f: &SpectralField, e: &[f64]) -> SpectralField {
        SpectralField {
            grid: f.grid,
            coeffs: f.coeffs.iter().zip(e).map(|(c, x)| c * x).collect(),
        }
    }

    /// `E_dt[μ - dt·B(μ)]`.
    fn if_euler(&self, mu: &SpectralField, w0: f64) -> Result<SpectralField> {
        let n0 = self.nonlinear(mu, w0)?;
        Ok(self.diag(&mu.add_scaled(&n0, -self.spec.dt), &self.e_full))
    }

    /// Heun's method in the integrating-factor variables.
    fn if_rk2(&self, mu: &SpectralField, w0: f64, w1: f64) -> Result<SpectralField> {
        let h = self.spec.dt;
        let n0 = self.nonlinear(mu, w0)?;
        let pred = self.diag(&mu.add_scaled(&n0, -h), &self.e_full);
        let n1 = self.nonlinear(&pred, w1)?;
        let corr = self.diag(&n0, &self.e_full).add_scaled(&n1, 1.0);
        Ok(self.diag(mu, &self.e_full).add_scaled(&corr, -0.5 * h))
    }

    /// Classical RK4 in the integrating-factor variables, `W ≡ 0`.
    fn if_rk4(&self, u: &SpectralField) -> Result<SpectralField> {
        let h = self.spec.dt;
        let k1 = self.nonlinear(u, 0.0)?.scaled(-1.0);
        let a = self.diag(&u.add_scaled(&k1, 0.5 * h), &self.e_half);
        let k2 = self.nonlinear(&a, 0.0)?.scaled(-1.0);
        let eu = self.diag(u, &self.e_half);
        let b = eu.add_scaled(&k2, 0.5 * h);
        let k3 = self.nonlinear(&b, 0.0)?.scaled(-1.0);
        let c = self
            .diag(u, &self.e_full)
            .add_scaled(&self.diag(&k3, &self.e_half), h);
        let k4 = self.nonlinear(&c, 0.0)?.scaled(-1.0);
        let mid = self.diag(&k2.add_scaled(&k3, 1.0), &self.e_half);
        let sum = self
            .diag(&k1, &self.e_full)
            .add_scaled(&mid, 2.0)
            .add_scaled(&k4, 1.0);
        Ok(self.diag(u, &self.e_full).add_scaled(&sum, h / 6.0))
    }

    /// One step of the Itô-transformed equation from `t_n` to `t_{n+1}`,
    /// with `w0 = W(t_n)` and `w1 = W(t_{n+1})`.
    pub fn etd_step(&self, mu: &SpectralField, w0: f64, w1: f64) -> Result<SpectralField> {
        match self.spec.scheme {
            Scheme::Etd1 => self.if_euler(mu, w0),
            Scheme::Etdrk2 => self.if_rk2(mu, w0, w1),
            Scheme::Rk4 => Err(Error::Config("rk4 requires deterministic mode".into())),
        }
    }

    /// One step of the undamped Stratonovich equation (always Heun).
    pub fn stratonovich_step(&self, mu: &SpectralField, w0: f64, w1: f64) -> Result<SpectralField> {
        self.if_rk2(mu, w0, w1)
    }

    /// One step of `∂_t θ = -div(θ M∇g∗θ) - χ|∇|^λ θ`.
    pub fn deterministic_step(&self, theta: &SpectralField) -> Result<SpectralField> {
        match self.spec.scheme {
            Scheme::Etd1 => self.if_euler(theta, 0.0),
            Scheme::Etdrk2 => self.if_rk2(theta, 0.0, 0.0),
            Scheme::Rk4 => self.if_rk4(theta),
        }
    }

    /// Dispatches on the configured mode.
    pub fn step(&self, mu: &SpectralField, w0: f64, w1: f64) -> Result<SpectralField> {
        match self.spec.mode {
            Mode::Ito => self.etd_step(mu, w0, w1),
            Mode::Stratonovich => self.stratonovich_step(mu, w0, w1),
            Mode::Deterministic => self.deterministic_step(mu),
        }
    }

    /// Energy share of the top octave `N/6 < max|k_i| ≤ N/3` among the
    /// retained nonzero modes.
    pub fn top_octave_fraction(&self, f: &SpectralField) -> f64 {
        let n = self.grid.n as i64;
        let mut top = 0.0;
        let mut total = 0.0;
        for (i, c) in f.coeffs.iter().enumerate().skip(1) {
            if self.grid.is_dealiased(i) {
                continue;
            }
            let e = c.norm_sqr();
            total += e;
            let k = self.grid.mode(i);
            if k.iter().take(self.grid.d).any(|ki| 6 * ki.abs() > n) {
                top += e;
            }
        }
        if total > 0.0 {
            top / total
        } else {
            0.0
        }
    }
}

/// A norm recorded along a trajectory. Without `a` the norm is taken at the
/// envelope radius `φ^t + ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormProbe {
    #[serde(default)]
    pub a: Option<f64>,
    pub kappa: f64,
    #[serde(with = "serde_exponent")]
    pub r: f64,
    #[serde(default)]
    pub kappa_q: f64,
    #[serde(default)]
    pub q: Option<f64>,
}

impl NormProbe {
    fn at(&self, radius: f64) -> XNormSpec {
        XNormSpec {
            a: self.a.unwrap_or(radius),
            sigma_r: self.kappa,
            r: self.r,
            sigma_q: self.kappa_q,
            q: self.q,
        }
    }

    pub fn validate(&self, d: usize, gamma: f64) -> Result<()> {
        self.at(self.a.unwrap_or(0.0)).validate(d, gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    BlowupDetected {
        last_valid_time: f64,
    },
    ResolutionLoss {
        time: f64,
        fraction: f64,
    },
    AmplificationOverflow {
        time: f64,
        mode: [i64; 2],
        log_symbol: f64,
        cap: f64,
    },
}

impl Termination {
    pub fn completed(&self) -> bool {
        matches!(self, Termination::Horizon)
    }

    pub fn is_blowup(&self) -> bool {
        matches!(
            self,
            Termination::BlowupDetected { .. } | Termination::ResolutionLoss { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub w: f64,
    pub in_event: bool,
    pub mass_mu: f64,
    pub mass_theta: f64,
    pub l2_theta: f64,
    pub second_moment: Option<f64>,
    pub boundary_warning: bool,
    pub resolution_fraction: f64,
    pub audit: Option<AuditRow>,
    pub norms: Vec<f64>,
    pub overflow: bool,
    pub blowup: bool,
    pub resolution_loss: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub termination: Termination,
    pub membership: Membership,
    /// `Some` when an audit was configured.
    pub monotone: Option<bool>,
    pub strictly_decreased: Option<bool>,
    pub final_time: f64,
    pub final_mu: SpectralField,
}

/// Everything a single run needs besides the initial datum.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub dynamics: Dynamics,
    pub path: BrownianPath,
    pub envelope: Option<DriftEnvelope>,
    pub epsilon: f64,
    pub bridge: bool,
    pub norms: Vec<NormProbe>,
    /// Audited norm; its radius is replaced by `φ^t + ε`.
    pub audit: Option<XNormSpec>,
    pub stride: usize,
    pub moment_center: Option<[f64; 2]>,
    pub resolution_threshold: f64,
}

impl Simulation {
    pub fn new(dynamics: Dynamics, path: BrownianPath) -> Self {
        Simulation {
            dynamics,
            path,
            envelope: None,
            epsilon: 0.0,
            bridge: true,
            norms: Vec::new(),
            audit: None,
            stride: 1,
            moment_center: None,
            resolution_threshold: 0.1,
        }
    }

    fn radius(&self, t: f64) -> f64 {
        self.envelope.map_or(0.0, |e| e.phi(t)) + self.epsilon
    }

    pub fn run(&self, theta0: &SpectralField) -> Result<Trajectory> {
        let dy = &self.dynamics;
        theta0.grid.check_same(&dy.grid)?;
        let steps = dy.spec.steps();
        if self.stride == 0 {
            return Err(Error::Config("output stride must be positive".into()));
        }
        if dy.uses_path() {
            let rel = (self.path.dt - dy.spec.dt).abs() / dy.spec.dt;
            if rel > 1e-12 || self.path.len() < steps + 1 {
                return Err(Error::Config(format!(
                    "path grid (dt = {}, {} samples) does not cover {} steps of dt = {}",
                    self.path.dt,
                    self.path.len(),
                    steps,
                    dy.spec.dt
                )));
            }
        }
        let w_at = |n: usize| {
            if dy.uses_path() {
                self.path.values[n]
            } else {
                0.0
            }
        };
        let membership = match (self.envelope, dy.uses_path()) {
            (Some(e), true) => {
                let ev = EventSpec::new(e.alpha, e.beta, dy.noise.nu)?;
                event_membership(&self.path, &ev, self.bridge)
            }
            _ => Membership {
                in_event: true,
                first_violation: None,
            },
        };
        for p in &self.norms {
            p.validate(dy.grid.d, dy.kernel.gamma)?;
        }
        let mut audit = match self.audit {
            Some(x) => {
                let env = self.envelope.ok_or_else(|| {
                    Error::Config("the audit requires an envelope (alpha, beta)".into())
                })?;
                x.validate(dy.grid.d, dy.kernel.gamma)?;
                Some(EnergyAudit::new(x, env, self.epsilon, dy.noise)?)
            }
            None => None,
        };

        let mut rows = Vec::new();
        let mut mu = theta0.clone();
        let mut termination = Termination::Horizon;
        let mut final_time;
        let mut n = 0usize;
        loop {
            let t = n as f64 * dy.spec.dt;
            if n % self.stride == 0 || n == steps {
                match self.record(t, w_at(n), &mu, &membership, audit.as_mut()) {
                    Ok(row) => {
                        let frac = row.resolution_fraction;
                        rows.push(row);
                        if frac > self.resolution_threshold {
                            termination = Termination::ResolutionLoss {
                                time: t,
                                fraction: frac,
                            };
                            final_time = t;
                            break;
                        }
                    }
                    Err(Error::AmplificationOverflow {
                        mode,
                        log_symbol,
                        cap,
                    }) => {
                        termination = Termination::AmplificationOverflow {
                            time: t,
                            mode,
                            log_symbol,
                            cap,
                        };
                        final_time = t;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            final_time = t;
            if n == steps {
                break;
            }
            match dy.step(&mu, w_at(n), w_at(n + 1)) {
                Ok(next) if next.is_finite() => mu = next,
                Ok(_) => {
                    termination = Termination::BlowupDetected { last_valid_time: t };
                    break;
                }
                Err(Error::AmplificationOverflow {
                    mode,
                    log_symbol,
                    cap,
                }) => {
                    termination = Termination::AmplificationOverflow {
                        time: t,
                        mode,
                        log_symbol,
                        cap,
                    };
                    break;
                }
                Err(e) => return Err(e),
            }
            n += 1;
        }

        if !termination.completed() {
            let needs_row = rows.last().is_none_or(|r| r.t < final_time);
            if needs_row {
                if let Ok(row) = self.record(final_time, w_at(n), &mu, &membership, None) {
                    rows.push(row);
                }
            }
            if let Some(last) = rows.last_mut() {
                match termination {
                    Termination::AmplificationOverflow { .. } => last.overflow = true,
                    Termination::BlowupDetected { .. } => last.blowup = true,
                    Termination::ResolutionLoss { .. } => {
                        last.blowup = true;
                        last.resolution_loss = true;
                    }
                    Termination::Horizon => {}
                }
            }
        }
        Ok(Trajectory {
            rows,
            termination,
            membership,
            monotone: audit.as_ref().map(|a| a.is_monotone()),
            strictly_decreased: audit.as_ref().map(|a| a.strictly_decreased()),
            final_time,
            final_mu: mu,
        })
    }

    fn record(
        &self,
        t: f64,
        w: f64,
        mu: &SpectralField,
        membership: &Membership,
        audit: Option<&mut EnergyAudit>,
    ) -> Result<TrajectoryRow> {
        let dy = &self.dynamics;
        let w_eff = if dy.uses_path() { w } else { 0.0 };
        let theta = dy.recover_theta(mu, w_eff)?;
        let (second, warning) = match self.moment_center {
            Some(c) => {
                let sm = second_moment(&inverse_unchecked(&theta), c);
                (Some(sm.value), sm.boundary_warning)
            }
            None => (None, false),
        };
        let radius = self.radius(t);
        let norms = self
            .norms
            .iter()
            .map(|p| {
                let x = p.at(radius);
                if x.q.is_none() {
                    gevrey_norm(mu, &x.first_tier(), &dy.noise)
                } else {
                    x_norm(mu, &x, &dy.noise)
                }
            })
            .collect();
        let audit = match audit {
            Some(a) => {
                let b = dy.nonlinear(mu, w_eff)?;
                Some(a.push(t, mu, Some(&b)))
            }
            None => None,
        };
        Ok(TrajectoryRow {
            t,
            w: w_eff,
            in_event: membership.in_event_at(t),
            mass_mu: mass(mu),
            mass_theta: mass(&theta),
            l2_theta: l2_norm(&theta),
            second_moment: second,
            boundary_warning: warning,
            resolution_fraction: dy.top_octave_fraction(&theta),
            audit,
            norms,
            overflow: false,
            blowup: false,
            resolution_loss: false,
        })
    }
}

/// Bracket on the largest datum scale whose run stays monotone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Largest scale observed to be monotone, if any.
    pub monotone_scale: Option<f64>,
    /// Smallest scale observed to fail, if any.
    pub failing_scale: Option<f64>,
    pub evaluations: Vec<(f64, bool)>,
}

/// Geometric bisection of the datum scale on `[lo, hi]`; `monotone(scale)`
/// runs the configured simulation and reports whether it completed with a
/// monotone audited norm.
pub fn calibrate_smallness(
    mut monotone: impl FnMut(f64) -> Result<bool>,
    lo: f64,
    hi: f64,
    iterations: usize,
) -> Result<Calibration> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let mut evaluations = Vec::new();
    let mut eval = |x: f64, ev: &mut Vec<(f64, bool)>| -> Result<bool> {
        let ok = monotone(x)?;
        ev.push((x, ok));
        Ok(ok)
    };
    if eval(hi, &mut evaluations)? {
        return Ok(Calibration {
            monotone_scale: Some(hi),
            failing_scale: None,
            evaluations,
        });
    }
    if !eval(lo, &mut evaluations)? {
        return Ok(Calibration {
            monotone_scale: None,
            failing_scale: Some(lo),
            evaluations,
        });
    }
    let (mut good, mut bad) = (lo, hi);
    for _ in 0..iterations {
        let mid = (good * bad).sqrt();
        if eval(mid, &mut evaluations)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Calibration {
        monotone_scale: Some(good),
        failing_scale: Some(bad),
        evaluations,
    })
}

/// How the shared path is carried to the finer grids of a convergence study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathRefinement {
    /// Piecewise-linear interpolation of the coarse samples.
    Linear,
    /// Brownian-bridge fill-in.
    Bridge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub refinement: PathRefinement,
    pub dts: Vec<f64>,
    /// `‖μ_{dt_k}(T) - μ_{dt_{k+1}}(T)‖_{ℓ²}`.
    pub differences: Vec<f64>,
    /// `log2(d_k / d_{k+1})`.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    /// Order measured on the two finest differences.
    pub fn observed_order(&self) -> f64 {
        self.orders.last().copied().unwrap_or(f64::NAN)
    }
}

/// Self-convergence of `dynamics` under halving of the step. The coarsest
/// step is `coarse.dt`; all levels integrate along the same finest path.
pub fn convergence_study(
    dynamics: &Dynamics,
    theta0: &SpectralField,
    coarse: &BrownianPath,
    levels: usize,
    refinement: PathRefinement,
) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::Config("a convergence study needs at least 3 levels".into()));
    }
    let factor = 1usize << (levels - 1);
    let finest = match refinement {
        PathRefinement::Linear => coarse.refine_linear(factor)?,
        PathRefinement::Bridge => coarse.refine_bridge(factor)?,
    };
    let horizon = (coarse.len() - 1) as f64 * coarse.dt;
    let mut finals = Vec::with_capacity(levels);
    let mut dts = Vec::with_capacity(levels);
    for k in 0..levels {
        let dt = coarse.dt / (1usize << k) as f64;
        let path = finest.restrict(factor >> k)?;
        let mut dy = dynamics.with_dt(dt)?;
        dy.spec.horizon = horizon;
        let steps = dy.spec.steps();
        let mut sim = Simulation::new(dy, path);
        sim.stride = steps.max(1);
        sim.resolution_threshold = f64::INFINITY;
        let tr = sim.run(theta0)?;
        if !tr.termination.completed() {
            return Err(Error::BlowupDetected {
                last_valid_time: tr.final_time,
            });
        }
        finals.push(tr.final_mu);
        dts.push(dt);
    }
    let differences: Vec<f64> = finals
        .windows(2)
        .map(|w| w[0].sub(&w[1]).sum_sq().sqrt())
        .collect();
    let orders = differences.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    Ok(ConvergenceReport {
        scheme: dynamics.spec.scheme,
        refinement,
        dts,
        differences,
        orders,
    })
}

/// `‖e^{(φ^t+ε)A^{1/2}}μ‖_{Ŵ^{κs,r}}`, the norm controlling `θ` on the event.
pub fn envelope_norm(
    mu: &SpectralField,
    radius: f64,
    kappa: f64,
    r: f64,
    noise: &NoiseSpec,
) -> f64 {
    gevrey_norm(mu, &NormSpec { a: radius, kappa, r }, noise)
}
