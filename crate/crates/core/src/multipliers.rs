//! Diagonal Fourier multipliers evaluated in the log domain.
//!
//! Every symbol here is `exp(ℓ(ξ))` for an explicit log-symbol `ℓ`, so Gevrey
//! weights and the random operator `Γ^{-1}` are exponentiated once per mode
//! and checked against a cap before they can overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Default cap on a log-symbol, in nats. `e^709` is the largest finite `f64`.
pub const DEFAULT_LOG_CAP: f64 = 700.0;

/// Strength and order of the random diffusion `ν(1+|∇|^s)θẆ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub s: f64,
    pub nu: f64,
    /// Use `|∇|^s` instead of `1+|∇|^s` (torus variant; the zero mode is
    /// left untouched and mass is conserved).
    #[serde(default)]
    pub homogeneous: bool,
}

impl NoiseSpec {
    /// `1/2 < s <= 1` and `ν >= 0`. Runs that need the noise require `ν > 0`
    /// on top of this, see [`NoiseSpec::require_noise`].
    pub fn new(s: f64, nu: f64) -> Result<Self> {
        let n = NoiseSpec {
            s,
            nu,
            homogeneous: false,
        };
        n.validate()?;
        Ok(n)
    }

    pub fn homogeneous(mut self) -> Self {
        self.homogeneous = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.5 && self.s <= 1.0) {
            return Err(Error::Config(format!("noise.s must lie in (1/2, 1], got {}", self.s)));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(Error::Config(format!("noise.nu must be >= 0, got {}", self.nu)));
        }
        Ok(())
    }

    pub fn require_noise(&self) -> Result<()> {
        if self.nu > 0.0 {
            Ok(())
        } else {
            Err(Error::Config("noise.nu must be positive for this mode".into()))
        }
    }

    /// `1 + |ξ|^s`, or `|ξ|^s` in the homogeneous variant.
    pub fn base_symbol(&self, xi_norm: f64) -> f64 {
        let p = xi_norm.powf(self.s);
        if self.homogeneous {
            p
        } else {
            1.0 + p
        }
    }
}

/// Barrier envelope `φ(t) = α + βt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftEnvelope {
    pub alpha: f64,
    pub beta: f64,
}

impl DriftEnvelope {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let e = DriftEnvelope { alpha, beta };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.alpha.is_finite() && self.beta.is_finite())
        {
            return Err(Error::Config(format!(
                "envelope requires alpha > 0 and beta > 0, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.alpha + self.beta * t
    }

    /// Monotonicity claims need `β < ν²/2`.
    pub fn check_damping(&self, noise: &NoiseSpec) -> Result<()> {
        let half_nu2 = 0.5 * noise.nu * noise.nu;
        if self.beta < half_nu2 {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!(
                "beta = {} must be below nu^2/2 = {}",
                self.beta, half_nu2
            )))
        }
    }
}

/// The diagonal operators used by the engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MultiplierSymbol {
    /// `A = (1+|∇|^s)^2`.
    A,
    /// `A^{1/2} = 1+|∇|^s`.
    SqrtA,
    /// `exp(-τ ν²/2 A)`.
    Semigroup { tau: f64 },
    /// `Γ = exp(-ν w (1+|∇|^s))` for a path value `w`.
    Gamma { w: f64 },
    /// `Γ^{-1} = exp(ν w (1+|∇|^s))`.
    GammaInverse { w: f64 },
    /// `exp(a (1+|∇|^s))`.
    GevreyWeight { a: f64 },
    /// `exp(-τ χ |∇|^λ)`, the optional deterministic diffusion.
    FractionalLaplacian { chi: f64, lambda: f64, tau: f64 },
}

/// Natural log of the symbol of `m` at wavevector `xi`.
pub fn symbol_log_value(m: MultiplierSymbol, noise: &NoiseSpec, xi: [f64; 2]) -> f64 {
    let r = xi[0].hypot(xi[1]);
    let b = noise.base_symbol(r);
    match m {
        MultiplierSymbol::A => 2.0 * b.ln(),
        MultiplierSymbol::SqrtA => b.ln(),
        MultiplierSymbol::Semigroup { tau } => -0.5 * noise.nu * noise.nu * tau * b * b,
        MultiplierSymbol::Gamma { w } => -noise.nu * w * b,
        MultiplierSymbol::GammaInverse { w } => noise.nu * w * b,
        MultiplierSymbol::GevreyWeight { a } => a * b,
        MultiplierSymbol::FractionalLaplacian { chi, lambda, tau } => {
            if r == 0.0 {
                0.0
            } else {
                -chi * tau * r.powf(lambda)
            }
        }
    }
}

/// Scales every coefficient by `exp(log_symbol(idx))`.
///
/// Fails with `AmplificationOverflow` when a mode with a nonzero coefficient
/// has a log-symbol above `cap`. Zero coefficients are left at zero.
pub(crate) fn apply_log_symbol(
    f: &SpectralField,
    cap: f64,
    log_symbol: impl Fn(usize) -> f64,
) -> Result<SpectralField> {
    let grid = f.grid;
    let mut out = f.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let ell = log_symbol(i);
        if ell > cap {
            return Err(Error::AmplificationOverflow {
                mode: grid.mode(i),
                log_symbol: ell,
                cap,
            });
        }
        *c *= ell.exp();
    }
    Ok(out)
}

/// Applies `m` with the default cap of [`DEFAULT_LOG_CAP`] nats.
pub fn apply_multiplier(
    f: &SpectralField,
    m: MultiplierSymbol,
    noise: &NoiseSpec,
) -> Result<SpectralField> {
    apply_multiplier_capped(f, m, noise, DEFAULT_LOG_CAP)
}

pub fn apply_multiplier_capped(
    f: &SpectralField,
    m: MultiplierSymbol,
    noise: &NoiseSpec,
    cap: f64,
) -> Result<SpectralField> {
    let grid = f.grid;
    apply_log_symbol(f, cap, |i| symbol_log_value(m, noise, grid.wavevector(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, GridSpec, RealField};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(s: f64, nu: f64) -> NoiseSpec {
        NoiseSpec::new(s, nu).unwrap()
    }

    fn smooth_random(grid: GridSpec, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = RealField {
            grid,
            values: (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        // damp the tail so every symbol below stays far from the cap
        let mut s = forward_transform(&f);
        for (i, c) in s.coeffs.iter_mut().enumerate() {
            *c *= (-0.3 * grid.wavenumber(i)).exp();
        }
        s
    }

    fn rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        let scale = a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE);
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseSpec::new(0.5, 1.0).is_err());
        assert!(NoiseSpec::new(1.2, 1.0).is_err());
        assert!(NoiseSpec::new(1.0, -1.0).is_err());
        assert!(NoiseSpec::new(1.0, 0.0).unwrap().require_noise().is_err());
    }

    #[test]
    fn log_symbol_examples() {
        let n1 = noise(1.0, 1.3);
        for xi in [[0.0, 0.0], [1.0, 2.0], [-3.0, 0.5]] {
            assert_eq!(symbol_log_value(MultiplierSymbol::Gamma { w: 0.0 }, &n1, xi), 0.0);
        }
        assert_eq!(symbol_log_value(MultiplierSymbol::SqrtA, &n1, [0.0, 0.0]), 0.0);
        let g = symbol_log_value(MultiplierSymbol::GevreyWeight { a: 0.5 }, &n1, [3.0, 0.0]);
        assert!((g - 2.0).abs() < 1e-15);
        let a = symbol_log_value(MultiplierSymbol::A, &n1, [0.0, 3.0]);
        assert!((a - 2.0 * 4.0f64.ln()).abs() < 1e-15);
        let sg = symbol_log_value(MultiplierSymbol::Semigroup { tau: 0.2 }, &n1, [0.0, 0.0]);
        assert!((sg + 0.5 * 1.69 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_mode_semigroup_decay() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let n = noise(0.75, 2.0);
        let f = smooth_random(g, 3);
        let out = apply_multiplier(&f, MultiplierSymbol::Semigroup { tau: 0.3 }, &n).unwrap();
        let expect = f.coeffs[0] * (-0.5 * 4.0 * 0.3f64).exp();
        assert!((out.coeffs[0] - expect).norm() <= 1e-15 * expect.norm());
    }

    #[test]
    fn homogeneous_variant_leaves_zero_mode() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let n = noise(1.0, 2.0).homogeneous();
        let f = smooth_random(g, 5);
        let out = apply_multiplier(&f, MultiplierSymbol::Semigroup { tau: 1.0 }, &n).unwrap();
        assert_eq!(out.coeffs[0], f.coeffs[0]);
    }

    #[test]
    fn overflow_is_reported_with_mode() {
        let g = GridSpec::new(1, 32, 1.0).unwrap();
        let n = noise(1.0, 1.0);
        let f = smooth_random(g, 1);
        let err = apply_multiplier(&f, MultiplierSymbol::GammaInverse { w: 20.0 }, &n).unwrap_err();
        match err {
            Error::AmplificationOverflow { log_symbol, cap, .. } => {
                assert!(log_symbol > cap);
                assert_eq!(cap, DEFAULT_LOG_CAP);
            }
            other => panic!("unexpected {other:?}"),
        }
        // a zero field never overflows
        let z = SpectralField::zeros(g);
        assert!(apply_multiplier(&z, MultiplierSymbol::GammaInverse { w: 20.0 }, &n).is_ok());
    }

    #[test]
    fn symbols_positive_and_monotone_in_wavenumber() {
        let n = noise(0.8, 1.1);
        let mut prev_sg = f64::INFINITY;
        let mut prev_gw = 0.0;
        for k in 0..200 {
            let xi = [0.25 * k as f64, 0.0];
            for m in [
                MultiplierSymbol::A,
                MultiplierSymbol::SqrtA,
                MultiplierSymbol::Semigroup { tau: 0.1 },
                MultiplierSymbol::Gamma { w: -0.4 },
                MultiplierSymbol::GammaInverse { w: 0.4 },
                MultiplierSymbol::GevreyWeight { a: 0.2 },
                MultiplierSymbol::FractionalLaplacian { chi: 0.5, lambda: 1.5, tau: 0.1 },
            ] {
                assert!(symbol_log_value(m, &n, xi).exp() > 0.0);
            }
            let sg = symbol_log_value(MultiplierSymbol::Semigroup { tau: 0.1 }, &n, xi).exp();
            let gw = symbol_log_value(MultiplierSymbol::GevreyWeight { a: 0.2 }, &n, xi).exp();
            assert!(sg <= prev_sg && gw >= prev_gw);
            prev_sg = sg;
            prev_gw = gw;
        }
    }

    fn arb_symbol() -> impl Strategy<Value = MultiplierSymbol> {
        prop_oneof![
            Just(MultiplierSymbol::A),
            Just(MultiplierSymbol::SqrtA),
            (0.0..1.0f64).prop_map(|tau| MultiplierSymbol::Semigroup { tau }),
            (-2.0..2.0f64).prop_map(|w| MultiplierSymbol::Gamma { w }),
            (-2.0..2.0f64).prop_map(|w| MultiplierSymbol::GammaInverse { w }),
            (0.0..1.0f64).prop_map(|a| MultiplierSymbol::GevreyWeight { a }),
            (0.0..1.0f64, 0.5..2.0f64, 0.0..1.0f64)
                .prop_map(|(chi, lambda, tau)| MultiplierSymbol::FractionalLaplacian { chi, lambda, tau }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn multipliers_commute(m1 in arb_symbol(), m2 in arb_symbol(), s in 0.51..1.0f64,
                               nu in 0.1..1.5f64, seed in 0u64..1000) {
            let g = GridSpec::new(2, 16, 6.0).unwrap();
            let n = noise(s, nu);
            let f = smooth_random(g, seed);
            let a = apply_multiplier(&apply_multiplier(&f, m1, &n).unwrap(), m2, &n).unwrap();
            let b = apply_multiplier(&apply_multiplier(&f, m2, &n).unwrap(), m1, &n).unwrap();
            prop_assert!(rel_diff(&a, &b) <= 1e-12);
            prop_assert!(a.hermitian_defect() <= 1e-12);
        }

        #[test]
        fn gamma_inverse_and_semigroup_laws(w in -2.0..2.0f64, t1 in 0.0..0.5f64, t2 in 0.0..0.5f64,
                                            nu in 0.1..1.5f64, seed in 0u64..1000) {
            let g = GridSpec::new(2, 16, 6.0).unwrap();
            let n = noise(1.0, nu);
            let f = smooth_random(g, seed);
            let round = apply_multiplier(
                &apply_multiplier(&f, MultiplierSymbol::Gamma { w }, &n).unwrap(),
                MultiplierSymbol::GammaInverse { w }, &n).unwrap();
            prop_assert!(rel_diff(&round, &f) <= 1e-12);
            let two = apply_multiplier(
                &apply_multiplier(&f, MultiplierSymbol::Semigroup { tau: t1 }, &n).unwrap(),
                MultiplierSymbol::Semigroup { tau: t2 }, &n).unwrap();
            let one = apply_multiplier(&f, MultiplierSymbol::Semigroup { tau: t1 + t2 }, &n).unwrap();
            prop_assert!(rel_diff(&two, &one) <= 1e-12);
            let id = apply_multiplier(&f, MultiplierSymbol::Gamma { w: 0.0 }, &n).unwrap();
            prop_assert_eq!(id, f);
        }
    }
}
