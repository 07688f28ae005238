//! Brownian paths and the barrier event `νW^t ≤ α + βt` for all `t ≥ 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORMAL_STREAM: u64 = 0;
const BRIDGE_STREAM: u64 = 1;
const REFINE_STREAM: u64 = 2;

/// Crossing probabilities below this are never sampled (they cannot change
/// the outcome of a comparison against a double-precision uniform).
const NEGLIGIBLE: f64 = 1.0 / 9_007_199_254_740_992.0;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Number of samples `floor(T/dt) + 1`, tolerant to roundoff in `T/dt`.
pub fn path_len(dt: f64, horizon: f64) -> usize {
    (horizon / dt + 1e-9).floor() as usize + 1
}

/// A sampled Brownian motion on the grid `t_i = i·dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl BrownianPath {
    /// The path `W ≡ 0`.
    pub fn zero(dt: f64, horizon: f64) -> Result<Self> {
        check_grid(dt, horizon)?;
        Ok(BrownianPath {
            dt,
            horizon,
            seed: 0,
            values: vec![0.0; path_len(dt, horizon)],
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Keeps every `factor`-th sample.
    pub fn restrict(&self, factor: usize) -> Result<Self> {
        check_factor(factor, self.len())?;
        Ok(BrownianPath {
            dt: self.dt * factor as f64,
            horizon: self.horizon,
            seed: self.seed,
            values: self.values.iter().step_by(factor).copied().collect(),
        })
    }

    /// Inserts `factor - 1` points per step by linear interpolation.
    pub fn refine_linear(&self, factor: usize) -> Result<Self> {
        check_factor(factor, 1)?;
        let mut values = Vec::with_capacity((self.len() - 1) * factor + 1);
        for w in self.values.windows(2) {
            for j in 0..factor {
                let th = j as f64 / factor as f64;
                values.push(w[0] + th * (w[1] - w[0]));
            }
        }
        values.extend(self.values.last());
        Ok(BrownianPath {
            dt: self.dt / factor as f64,
            horizon: self.horizon,
            seed: self.seed,
            values,
        })
    }

    /// Inserts `factor - 1` points per step by sampling the Brownian bridge
    /// between neighbouring samples. The coarse samples are kept exactly and
    /// the fill-in is reproducible from the path seed.
    pub fn refine_bridge(&self, factor: usize) -> Result<Self> {
        check_factor(factor, 1)?;
        let mut r = rng(self.seed, REFINE_STREAM);
        let h = self.dt / factor as f64;
        let mut values = Vec::with_capacity((self.len() - 1) * factor + 1);
        for w in self.values.windows(2) {
            let mut cur = w[0];
            values.push(cur);
            for j in 1..factor {
                // conditional law of W(t+h) given W(t) = cur and W(t_end) = w[1]
                let remaining = (factor - j + 1) as f64 * h;
                let mean = cur + (w[1] - cur) * h / remaining;
                let var = h * (remaining - h) / remaining;
                let z: f64 = r.sample(StandardNormal);
                cur = mean + var.sqrt() * z;
                values.push(cur);
            }
        }
        values.extend(self.values.last());
        Ok(BrownianPath {
            dt: h,
            horizon: self.horizon,
            seed: self.seed,
            values,
        })
    }
}

fn check_grid(dt: f64, horizon: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0 && horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::Config(format!(
            "path needs dt > 0 and horizon >= 0, got dt = {dt}, T = {horizon}"
        )));
    }
    Ok(())
}

fn check_factor(factor: usize, len: usize) -> Result<()> {
    if factor == 0 || (len > 1 && (len - 1) % factor != 0) {
        return Err(Error::Config(format!(
            "factor {factor} does not divide the {} path steps",
            len.saturating_sub(1)
        )));
    }
    Ok(())
}

/// Samples `W` with independent `N(0, dt)` increments, deterministic in `seed`.
pub fn sample_path(dt: f64, horizon: f64, seed: u64) -> Result<BrownianPath> {
    check_grid(dt, horizon)?;
    let n = path_len(dt, horizon);
    let sd = dt.sqrt();
    let mut r = rng(seed, NORMAL_STREAM);
    let mut values = Vec::with_capacity(n);
    let mut w = 0.0;
    values.push(w);
    for _ in 1..n {
        let z: f64 = r.sample(StandardNormal);
        w += sd * z;
        values.push(w);
    }
    Ok(BrownianPath {
        dt,
        horizon,
        seed,
        values,
    })
}

/// Parameters of the barrier event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
}

impl EventSpec {
    pub fn new(alpha: f64, beta: f64, nu: f64) -> Result<Self> {
        let e = EventSpec { alpha, beta, nu };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.alpha, self.beta, self.nu]
            .iter()
            .all(|x| x.is_finite() && *x > 0.0);
        if !ok {
            return Err(Error::Config(format!(
                "event needs alpha, beta, nu > 0, got ({}, {}, {})",
                self.alpha, self.beta, self.nu
            )));
        }
        Ok(())
    }

    /// Barrier distance `α + βt - νw`.
    pub fn distance(&self, t: f64, w: f64) -> f64 {
        self.alpha + self.beta * t - self.nu * w
    }

    /// Probability of a first crossing after `T`, bounded by restarting the
    /// closed form at the barrier height `α + βT`.
    pub fn truncation_bound(&self, horizon: f64) -> f64 {
        (-2.0 * (self.alpha + self.beta * horizon) * self.beta / (self.nu * self.nu)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub in_event: bool,
    /// Grid time at which the violation was detected (the right end of the
    /// step for bridge crossings).
    pub first_violation: Option<f64>,
}

impl Membership {
    /// Whether the path is still inside the event at time `t`.
    pub fn in_event_at(&self, t: f64) -> bool {
        self.first_violation.is_none_or(|tv| t < tv)
    }
}

/// Incremental barrier check shared by the stored and streaming variants.
struct BarrierCheck {
    event: EventSpec,
    dt: f64,
    bridge: Option<ChaCha8Rng>,
    prev: f64,
}

impl BarrierCheck {
    fn new(event: EventSpec, dt: f64, seed: u64, bridge: bool) -> Self {
        BarrierCheck {
            event,
            dt,
            bridge: bridge.then(|| rng(seed, BRIDGE_STREAM)),
            prev: event.alpha,
        }
    }

    /// Feeds sample `i ≥ 1`; returns false on a violation.
    fn step(&mut self, i: usize, w: f64) -> bool {
        let a = self.event.distance(i as f64 * self.dt, w);
        if a < 0.0 {
            return false;
        }
        if let Some(r) = self.bridge.as_mut() {
            let nu = self.event.nu;
            let p = (-2.0 * self.prev * a / (nu * nu * self.dt)).exp();
            if p > NEGLIGIBLE && r.random::<f64>() < p {
                return false;
            }
        }
        self.prev = a;
        true
    }
}

pub fn event_membership(path: &BrownianPath, event: &EventSpec, bridge: bool) -> Membership {
    let mut check = BarrierCheck::new(*event, path.dt, path.seed, bridge);
    if event.distance(0.0, path.values[0]) < 0.0 {
        return Membership {
            in_event: false,
            first_violation: Some(0.0),
        };
    }
    for (i, &w) in path.values.iter().enumerate().skip(1) {
        if !check.step(i, w) {
            return Membership {
                in_event: false,
                first_violation: Some(path.time(i)),
            };
        }
    }
    Membership {
        in_event: true,
        first_violation: None,
    }
}

/// Same result as `event_membership(&sample_path(dt, horizon, seed)?, ..)`
/// without storing the path, and stopping at the first violation.
pub fn streaming_membership(
    dt: f64,
    horizon: f64,
    seed: u64,
    event: &EventSpec,
    bridge: bool,
) -> Result<Membership> {
    check_grid(dt, horizon)?;
    let n = path_len(dt, horizon);
    let sd = dt.sqrt();
    let mut r = rng(seed, NORMAL_STREAM);
    let mut check = BarrierCheck::new(*event, dt, seed, bridge);
    let mut w = 0.0;
    for i in 1..n {
        let z: f64 = r.sample(StandardNormal);
        w += sd * z;
        if !check.step(i, w) {
            return Ok(Membership {
                in_event: false,
                first_violation: Some(i as f64 * dt),
            });
        }
    }
    Ok(Membership {
        in_event: true,
        first_violation: None,
    })
}

/// `P = 1 - exp(-2αβ/ν²)`.
pub fn event_probability(event: &EventSpec) -> f64 {
    -(-2.0 * event.alpha * event.beta / (event.nu * event.nu)).exp_m1()
}

/// Seed of path `index` in a batch, derived with the SplitMix64 finalizer so
/// the batch is independent of evaluation order.
pub fn path_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub truncation_bound: f64,
    pub n_paths: u64,
    pub hits: u64,
}

/// Monte Carlo frequency of the event over `n_paths` seeded paths on `[0,T]`.
pub fn mc_event_probability(
    event: &EventSpec,
    n_paths: u64,
    dt: f64,
    horizon: f64,
    bridge: bool,
    seed: u64,
) -> Result<McEstimate> {
    event.validate()?;
    check_grid(dt, horizon)?;
    if n_paths == 0 {
        return Err(Error::Config("n_paths must be positive".into()));
    }
    let hits: u64 = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            streaming_membership(dt, horizon, path_seed(seed, i), event, bridge)
                .map(|m| m.in_event as u64)
                .unwrap_or(0)
        })
        .sum();
    let p = hits as f64 / n_paths as f64;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / n_paths as f64).sqrt(),
        truncation_bound: event.truncation_bound(horizon),
        n_paths,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn starts_at_zero_and_has_expected_length() {
        let p = sample_path(0.01, 1.0, 7).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.len(), 101);
        assert_eq!(sample_path(0.1, 0.3, 1).unwrap().len(), 4);
        assert_eq!(sample_path(0.1, 0.0, 1).unwrap().len(), 1);
        assert!(sample_path(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn identical_seeds_identical_paths() {
        let a = sample_path(1e-3, 2.0, 99).unwrap();
        let b = sample_path(1e-3, 2.0, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, sample_path(1e-3, 2.0, 100).unwrap().values);
    }

    #[test]
    fn terminal_variance_matches_horizon() {
        let n = 100_000u64;
        let t = 1.0;
        let xs: Vec<f64> = (0..n)
            .map(|i| *sample_path(0.1, t, path_seed(5, i)).unwrap().values.last().unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // sample variance of a Gaussian has standard error T·sqrt(2/(n-1))
        let se = t * (2.0 / (n - 1) as f64).sqrt();
        assert!((var - t).abs() <= 3.0 * se, "var = {var}, se = {se}");
        assert!(mean.abs() <= 3.0 * (t / n as f64).sqrt());
    }

    #[test]
    fn closed_form_values() {
        let e = EventSpec::new(1.0, 1.0, 2f64.sqrt()).unwrap();
        assert!((event_probability(&e) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((event_probability(&e) - 0.6321206).abs() < 1e-7);
        let e = EventSpec::new(1.0, 0.45, 1.0).unwrap();
        assert!((event_probability(&e) - 0.5934303).abs() < 1e-7);
        let e = EventSpec::new(1.0, 1.0, 1e-3).unwrap();
        assert_eq!(event_probability(&e), 1.0);
        assert!(EventSpec::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_path_is_in_event() {
        let p = BrownianPath::zero(0.01, 5.0).unwrap();
        let e = EventSpec::new(0.1, 0.1, 3.0).unwrap();
        let m = event_membership(&p, &e, false);
        assert!(m.in_event && m.first_violation.is_none());
        // with the bridge, a zero sample path far below the barrier survives
        let e = EventSpec::new(2.0, 1.0, 1.0).unwrap();
        assert!(event_membership(&p, &e, true).in_event);
    }

    #[test]
    fn grid_violation_reports_time() {
        let mut p = BrownianPath::zero(0.5, 3.0).unwrap();
        p.values[3] = 10.0;
        let e = EventSpec::new(1.0, 1.0, 1.0).unwrap();
        let m = event_membership(&p, &e, false);
        assert!(!m.in_event);
        assert_eq!(m.first_violation, Some(1.5));
        assert!(m.in_event_at(1.0) && !m.in_event_at(1.5));
    }

    #[test]
    fn huge_drift_escapes() {
        let e = EventSpec::new(1.0, 100.0, 1.0).unwrap();
        let mc = mc_event_probability(&e, 2000, 1e-3, 1.0, true, 3).unwrap();
        assert!(mc.estimate > 0.99);
        assert!(mc.truncation_bound < 1e-80);
    }

    #[test]
    fn mc_is_reproducible() {
        let e = EventSpec::new(1.0, 1.0, 2f64.sqrt()).unwrap();
        let a = mc_event_probability(&e, 500, 1e-2, 5.0, true, 11).unwrap();
        let b = mc_event_probability(&e, 500, 1e-2, 5.0, true, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refinement_keeps_coarse_samples() {
        let p = sample_path(0.1, 2.0, 4).unwrap();
        for f in [2, 3, 8] {
            for fine in [p.refine_bridge(f).unwrap(), p.refine_linear(f).unwrap()] {
                assert_eq!(fine.len(), (p.len() - 1) * f + 1);
                assert_eq!(fine.restrict(f).unwrap().values, p.values);
            }
        }
        assert!(p.restrict(3).is_err());
        assert_eq!(p.refine_bridge(4).unwrap(), p.refine_bridge(4).unwrap());
    }

    #[test]
    fn bridge_refinement_increment_variance() {
        // refined increments of a Brownian path are again N(0, dt/factor)
        let mut acc = 0.0;
        let mut count = 0usize;
        for seed in 0..200 {
            let fine = sample_path(0.2, 10.0, seed).unwrap().refine_bridge(4).unwrap();
            for w in fine.values.windows(2) {
                acc += (w[1] - w[0]).powi(2);
                count += 1;
            }
        }
        let var = acc / count as f64;
        let se = 0.05 * (2.0 / count as f64).sqrt();
        assert!((var - 0.05).abs() <= 4.0 * se, "var = {var}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn streaming_matches_stored(seed in any::<u64>(), alpha in 0.05..2.0f64,
                                    beta in 0.05..2.0f64, nu in 0.2..3.0f64, bridge in any::<bool>()) {
            let e = EventSpec::new(alpha, beta, nu).unwrap();
            let p = sample_path(0.01, 3.0, seed).unwrap();
            prop_assert_eq!(event_membership(&p, &e, bridge),
                            streaming_membership(0.01, 3.0, seed, &e, bridge).unwrap());
        }

        #[test]
        fn bridge_only_removes_paths(seed in any::<u64>(), alpha in 0.05..2.0f64,
                                     beta in 0.05..2.0f64, nu in 0.2..3.0f64) {
            let e = EventSpec::new(alpha, beta, nu).unwrap();
            let p = sample_path(0.02, 4.0, seed).unwrap();
            let off = event_membership(&p, &e, false);
            let on = event_membership(&p, &e, true);
            prop_assert!(!on.in_event || off.in_event);
            if let (Some(a), Some(b)) = (on.first_violation, off.first_violation) {
                prop_assert!(a <= b);
            }
        }

        #[test]
        fn probability_monotone(alpha in 0.01..2.0f64, beta in 0.01..2.0f64, nu in 0.8..5.0f64,
                                h in 0.01..0.5f64) {
            let p = |a, b, n| event_probability(&EventSpec::new(a, b, n).unwrap());
            let base = p(alpha, beta, nu);
            prop_assert!(base > 0.0 && base < 1.0);
            prop_assert!(p(alpha + h, beta, nu) > base);
            prop_assert!(p(alpha, beta + h, nu) > base);
            prop_assert!(p(alpha, beta, nu + h) < base);
        }
    }
}
