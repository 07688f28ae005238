//! Fourier–Lebesgue and Gevrey norms, physical diagnostics and the
//! energy-inequality audit.
//!
//! All norms are plain sums over the stored lattice modes,
//!
//! ```text
//! ‖f‖_{G_a^{κ,r}} = ( Σ_k |e^{a(1+|ξ|^s)} ⟨ξ⟩^{κs} F(k)|^r )^{1/r},
//! ```
//!
//! evaluated in the log domain so that large Gevrey weights cannot overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multipliers::{DriftEnvelope, NoiseSpec};
use crate::spectral::{GridSpec, RealField, SpectralField};

/// Serializes an exponent in `[1, ∞]`, writing infinity as the string `"inf"`.
pub(crate) mod serde_exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &f64, s: S) -> Result<S::Ok, S::Error> {
        if r.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*r)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => other
                    .parse()
                    .map_err(|_| serde::de::Error::custom(format!("bad exponent {t:?}"))),
            },
        }
    }
}

/// `⟨ξ⟩ = (1+|ξ|²)^{1/2}`, returned as its logarithm.
fn ln_bracket(xi: f64) -> f64 {
    0.5 * (xi * xi).ln_1p()
}

/// Log-domain `(Σ_k e^{r·w(k)} |F(k)|^r)^{1/r}` over nonzero coefficients;
/// `-∞` for the zero field.
fn log_weighted_norm(f: &SpectralField, r: f64, weight: impl Fn(usize) -> f64) -> f64 {
    let terms = f
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(i, c)| weight(i) + c.norm().ln());
    if r.is_infinite() {
        return terms.fold(f64::NEG_INFINITY, f64::max);
    }
    let logs: Vec<f64> = terms.map(|x| r * x).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = logs.iter().map(|x| (x - m).exp()).sum();
    (m + s.ln()) / r
}

fn check_exponent(r: f64) -> Result<()> {
    if r >= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("integrability exponent must be >= 1, got {r}")))
    }
}

/// Log of `‖F‖_{Ŵ^{κs,r}}`, with `ks` the product `κs`.
pub fn log_fourier_lebesgue_norm(f: &SpectralField, ks: f64, r: f64) -> f64 {
    let g = f.grid;
    log_weighted_norm(f, r, |i| ks * ln_bracket(g.wavenumber(i)))
}

pub fn fourier_lebesgue_norm(f: &SpectralField, ks: f64, r: f64) -> f64 {
    log_fourier_lebesgue_norm(f, ks, r).exp()
}

/// Gevrey radius `a`, Sobolev index `κ` (in units of `s`) and exponent `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub a: f64,
    pub kappa: f64,
    #[serde(with = "serde_exponent")]
    pub r: f64,
}

impl NormSpec {
    pub fn new(a: f64, kappa: f64, r: f64) -> Result<Self> {
        let n = NormSpec { a, kappa, r };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::Config(format!("gevrey radius must be >= 0, got {}", self.a)));
        }
        if !self.kappa.is_finite() {
            return Err(Error::Config("sobolev index must be finite".into()));
        }
        check_exponent(self.r)
    }

    pub fn with_radius(self, a: f64) -> Self {
        NormSpec { a, ..self }
    }
}

/// Log of `‖e^{aA^{1/2}}F‖_{Ŵ^{κs,r}}`.
pub fn log_gevrey_norm(f: &SpectralField, n: &NormSpec, noise: &NoiseSpec) -> f64 {
    let g = f.grid;
    let ks = n.kappa * noise.s;
    log_weighted_norm(f, n.r, |i| {
        let xi = g.wavenumber(i);
        n.a * noise.base_symbol(xi) + ks * ln_bracket(xi)
    })
}

pub fn gevrey_norm(f: &SpectralField, n: &NormSpec, noise: &NoiseSpec) -> f64 {
    log_gevrey_norm(f, n, noise).exp()
}

/// Two-tier norm `‖f‖_{G_a^{σ_r,r}} + ‖f‖_{G_a^{σ_q,2q/(q-1)}}`; the second
/// tier is present only when `q` is set, which is required exactly when
/// `γ > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XNormSpec {
    pub a: f64,
    pub sigma_r: f64,
    #[serde(with = "serde_exponent")]
    pub r: f64,
    #[serde(default)]
    pub sigma_q: f64,
    #[serde(default)]
    pub q: Option<f64>,
}

impl XNormSpec {
    pub fn single(n: NormSpec) -> Self {
        XNormSpec {
            a: n.a,
            sigma_r: n.kappa,
            r: n.r,
            sigma_q: 0.0,
            q: None,
        }
    }

    pub fn validate(&self, d: usize, gamma: f64) -> Result<()> {
        self.first_tier().validate()?;
        match (gamma > 1.0, self.q) {
            (false, None) => Ok(()),
            (false, Some(_)) => Err(Error::Config("q is only used when gamma > 1".into())),
            (true, None) => Err(Error::Config("gamma > 1 requires q".into())),
            (true, Some(q)) => {
                let hi = d as f64 / (gamma - 1.0);
                if q > 1.0 && q < hi {
                    Ok(())
                } else {
                    Err(Error::Config(format!("q must lie in (1, {hi}), got {q}")))
                }
            }
        }
    }

    pub fn first_tier(&self) -> NormSpec {
        NormSpec {
            a: self.a,
            kappa: self.sigma_r,
            r: self.r,
        }
    }

    pub fn second_tier(&self) -> Option<NormSpec> {
        self.q.map(|q| NormSpec {
            a: self.a,
            kappa: self.sigma_q,
            r: 2.0 * q / (q - 1.0),
        })
    }

    pub fn tiers(&self) -> impl Iterator<Item = NormSpec> {
        std::iter::once(self.first_tier()).chain(self.second_tier())
    }

    pub fn with_radius(self, a: f64) -> Self {
        XNormSpec { a, ..self }
    }
}

pub fn x_norm(f: &SpectralField, x: &XNormSpec, noise: &NoiseSpec) -> f64 {
    let first = gevrey_norm(f, &x.first_tier(), noise);
    match x.second_tier() {
        None => first,
        Some(t) => first + gevrey_norm(f, &t, noise),
    }
}

/// `∫f`, which is the zero coefficient under the quadrature convention.
pub fn mass(f: &SpectralField) -> f64 {
    f.zero_mode().re
}

/// `‖f‖_{L²}` via Parseval.
pub fn l2_norm(f: &SpectralField) -> f64 {
    (f.sum_sq() / f.grid.volume()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub value: f64,
    /// Share of `∫|f|` at points farther than `L/4` from the center along
    /// some axis.
    pub boundary_fraction: f64,
    /// Set when `boundary_fraction` exceeds 1%.
    pub boundary_warning: bool,
}

/// `Σ |x - c|² f(x) (L/N)^d` with minimum-image displacements.
pub fn second_moment(f: &RealField, center: [f64; 2]) -> SecondMoment {
    let g = f.grid;
    let half = 0.5 * g.l;
    let wrap = |x: f64| {
        let mut y = (x + half).rem_euclid(g.l) - half;
        if y >= half {
            y -= g.l;
        }
        y
    };
    let mut value = 0.0;
    let mut total = 0.0;
    let mut outer = 0.0;
    for (i, &v) in f.values.iter().enumerate() {
        let x = g.position(i);
        let mut r2 = 0.0;
        let mut far = false;
        for j in 0..g.d {
            let dx = wrap(x[j] - center[j]);
            r2 += dx * dx;
            far |= dx.abs() > 0.25 * g.l;
        }
        value += r2 * v;
        total += v.abs();
        if far {
            outer += v.abs();
        }
    }
    let boundary_fraction = if total > 0.0 { outer / total } else { 0.0 };
    SecondMoment {
        value: value * g.cell_volume(),
        boundary_fraction,
        boundary_warning: boundary_fraction > 0.01,
    }
}

/// `d/dt ∫|x|²θ = M(8πν - M)/(2π)` for the attractive Newtonian gradient
/// flow in two dimensions with diffusion `νΔ`.
pub fn virial_rate_expected(mass: f64, nu: f64) -> f64 {
    mass * (8.0 * std::f64::consts::PI * nu - mass) / (2.0 * std::f64::consts::PI)
}

/// `‖F‖_{G_a^{κ,r}} ≤ e^{a-a'} ‖F‖_{G_{a'}^{κ',r}}` for `a' ≥ a`, `κ' ≥ κ`.
pub fn shift_bound(a: f64, a_prime: f64) -> f64 {
    (a - a_prime).exp()
}

/// `‖F‖_{G_a^{κ',r}} ≤ m!/(a'-a)^m ‖F‖_{G_{a'}^{κ,r}}`, `m = ⌈κ'-κ⌉`.
pub fn smoothing_bound(a: f64, a_prime: f64, kappa: f64, kappa_prime: f64) -> f64 {
    let m = (kappa_prime - kappa).ceil().max(0.0) as u32;
    let fact: f64 = (1..=m).map(f64::from).product();
    fact / (a_prime - a).powi(m as i32)
}

/// Hölder constant of `‖F‖_{Ŵ^{k,p}} ≤ C ‖F‖_{Ŵ^{k+δ,r}}` on the lattice of
/// `grid`, `C = (Σ_k ⟨ξ⟩^{-δ·rp/(r-p)})^{(r-p)/(rp)}` for `1 ≤ p < r ≤ ∞`.
pub fn grid_holder_constant(grid: &GridSpec, delta: f64, p: f64, r: f64) -> f64 {
    // 1/p - 1/r is the Hölder exponent of the weight
    let inv = 1.0 / p - if r.is_infinite() { 0.0 } else { 1.0 / r };
    let e = 1.0 / inv;
    let logs: Vec<f64> = (0..grid.len())
        .map(|i| -delta * e * ln_bracket(grid.wavenumber(i)))
        .collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|x| (x - m).exp()).sum();
    ((m + s.ln()) * inv).exp()
}

/// One audited step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub t: f64,
    /// Log of the audited norm at radius `φ^t + ε`.
    pub log_norm: f64,
    /// Discrete derivative of `(1/r)‖e^{(φ^t+ε)A^{1/2}}μ‖^r` over the last
    /// interval (zero on the first row).
    pub energy_rate: f64,
    /// `-(ν²/2 - β) Σ |e^{φb}⟨ξ⟩^{(κ+2/r)s} μ̂|^r`; absent for `r = ∞`.
    pub dissipation: Option<f64>,
    /// `Σ |e^{φb}⟨ξ⟩^{κs} μ̂|^{r-1} ⟨ξ⟩^{κs} e^{φb} |B̂|`; absent for `r = ∞`
    /// or when no nonlinear term was supplied.
    pub nonlinear: Option<f64>,
    pub monotone_so_far: bool,
}

/// Tolerance on the log-norm for the non-increase check.
pub const MONOTONE_LOG_TOLERANCE: f64 = 1e-12;

/// Streaming audit of the differential energy inequality along a trajectory.
#[derive(Clone, Debug)]
pub struct EnergyAudit {
    norm: XNormSpec,
    envelope: DriftEnvelope,
    epsilon: f64,
    noise: NoiseSpec,
    last: Option<(f64, f64, f64)>,
    monotone: bool,
    first_log: Option<f64>,
}

impl EnergyAudit {
    /// The radius of `norm` is ignored; the audit uses `φ^t + ε`.
    pub fn new(
        norm: XNormSpec,
        envelope: DriftEnvelope,
        epsilon: f64,
        noise: NoiseSpec,
    ) -> Result<Self> {
        envelope.check_damping(&noise)?;
        norm.first_tier().with_radius(0.0).validate()?;
        Ok(EnergyAudit {
            norm,
            envelope,
            epsilon,
            noise,
            last: None,
            monotone: true,
            first_log: None,
        })
    }

    pub fn radius(&self, t: f64) -> f64 {
        self.envelope.phi(t) + self.epsilon
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Whether the norm at the latest sample is strictly below the first.
    pub fn strictly_decreased(&self) -> bool {
        match (self.first_log, self.last) {
            (Some(a), Some((_, b, _))) => b < a,
            _ => false,
        }
    }

    /// Records `μ^t` and optionally `B^t(μ^t,μ^t)`.
    pub fn push(&mut self, t: f64, mu: &SpectralField, b: Option<&SpectralField>) -> AuditRow {
        let a = self.radius(t);
        let x = self.norm.with_radius(a);
        let tier = x.first_tier();
        let log_norm = if x.q.is_none() {
            log_gevrey_norm(mu, &tier, &self.noise)
        } else {
            x_norm(mu, &x, &self.noise).ln()
        };
        let r = tier.r;
        let log_tier = log_gevrey_norm(mu, &tier, &self.noise);
        let energy = if r.is_infinite() {
            log_tier.exp()
        } else {
            (r * log_tier).exp() / r
        };
        let energy_rate = match self.last {
            Some((t0, _, e0)) if t > t0 => (energy - e0) / (t - t0),
            _ => 0.0,
        };
        if let Some((_, prev, _)) = self.last {
            if log_norm > prev + MONOTONE_LOG_TOLERANCE {
                self.monotone = false;
            }
        }
        let (dissipation, nonlinear) = if r.is_infinite() {
            (None, None)
        } else {
            self.components(mu, b, a, tier)
        };
        self.first_log.get_or_insert(log_norm);
        self.last = Some((t, log_norm, energy));
        AuditRow {
            t,
            log_norm,
            energy_rate,
            dissipation,
            nonlinear,
            monotone_so_far: self.monotone,
        }
    }

    fn components(
        &self,
        mu: &SpectralField,
        b: Option<&SpectralField>,
        a: f64,
        tier: NormSpec,
    ) -> (Option<f64>, Option<f64>) {
        let g = mu.grid;
        let s = self.noise.s;
        let r = tier.r;
        let ks = tier.kappa * s;
        let damping = 0.5 * self.noise.nu * self.noise.nu - self.envelope.beta;
        let lw = |i: usize| {
            let xi = g.wavenumber(i);
            a * self.noise.base_symbol(xi) + ks * ln_bracket(xi)
        };
        let high = tier.kappa + 2.0 / r;
        let diss_norm = log_gevrey_norm(
            mu,
            &NormSpec {
                a,
                kappa: high,
                r,
            },
            &self.noise,
        );
        let dissipation = -damping * (r * diss_norm).exp();
        let nonlinear = b.map(|b| {
            mu.coeffs
                .iter()
                .zip(&b.coeffs)
                .enumerate()
                .filter(|(_, (m, bb))| m.norm() > 0.0 && bb.norm() > 0.0)
                .map(|(i, (m, bb))| {
                    let w = lw(i);
                    ((r - 1.0) * (w + m.norm().ln()) + w + bb.norm().ln()).exp()
                })
                .sum()
        });
        (Some(dissipation), nonlinear)
    }
}
