#![allow(dead_code)]

use active_scalar::admissibility::{AdmissibilityQuery, Reductions};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Q = Ratio<i64>;

/// Values of `r` in the bank; with parameters on a 1/20 lattice every
/// nonempty interval in `d/p` is wider than the p-grid spacing.
pub const R_VALUES: [(i64, i64); 7] = [(5, 4), (2, 1), (5, 2), (4, 1), (5, 1), (8, 1), (10, 1)];

#[derive(Clone, Copy, Debug)]
pub struct LatticeQuery {
    pub d: i64,
    pub gamma: Q,
    pub s: Q,
    pub r: Q,
    pub sigma: Q,
    pub kappa: Q,
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

impl LatticeQuery {
    pub fn query(&self) -> AdmissibilityQuery {
        AdmissibilityQuery::new(self.d as usize, to_f64(self.gamma), to_f64(self.s), to_f64(self.r))
            .with_sigma(to_f64(self.sigma))
            .with_kappa(to_f64(self.kappa))
    }
}

pub fn lattice_bank(n: usize, seed: u64) -> Vec<LatticeQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let d = rng.random_range(1..=2i64);
            let (rn, rd) = R_VALUES[rng.random_range(0..R_VALUES.len())];
            LatticeQuery {
                d,
                gamma: Q::new(rng.random_range(1..20 * (d + 1)), 20),
                s: Q::new(rng.random_range(1..=20), 20),
                r: Q::new(rn, rd),
                sigma: Q::new(rng.random_range(-20..=60), 20),
                kappa: Q::new(rng.random_range(-60..=100), 20),
            }
        })
        .collect()
}

/// Exhaustive search over `p = 1 + i/1000 < r` in exact arithmetic.
pub fn brute_force(q: &LatticeQuery) -> Reductions {
    let one = Q::from_integer(1);
    let two = Q::from_integer(2);
    let d = Q::from_integer(q.d);
    let (g, s, r) = (q.gamma, q.s, q.r);
    let ss = q.sigma * s;
    let ks = q.kappa * s;
    let top = (q.kappa + two / r) * s;
    let shifted = (q.kappa - two * (r - one) / r) * s;
    let mut out = Reductions {
        lwp2d: false,
        u2b: false,
        u2c: false,
        l2a: false,
        l2b: false,
    };
    let mut i = 1;
    loop {
        let p = Q::new(1000 + i, 1000);
        if p >= r {
            break;
        }
        let low = d * (p - one) / p;
        let high = d * (r - p) / (r * p);
        out.lwp2d |= high < ss && one - g + low < ss;
        out.u2b |= low < top && shifted + two - g + high < top;
        out.u2c |= shifted + one + low < top && one - g + high < top;
        out.l2a |= low.min(shifted + two - g + high) < ks;
        out.l2b |= (shifted + one + low).min(one - g + high) < ks;
        i += 1;
    }
    out
}
