//! Feasibility of the parameter inequalities behind local well-posedness and
//! Gevrey-norm monotonicity.
//!
//! Existential conditions over an auxiliary exponent `p ∈ (1,r)` are decided in
//! the variable `u = d/p ∈ (d/r, d)`, where every constraint is affine, so the
//! existence question reduces to a nonempty open interval. A witness `p` is the
//! image of the interval midpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::serde_exponent;

const TIE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilityQuery {
    pub d: usize,
    pub gamma: f64,
    pub s: f64,
    #[serde(with = "serde_exponent")]
    pub r: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub kappa: Option<f64>,
}

impl AdmissibilityQuery {
    pub fn new(d: usize, gamma: f64, s: f64, r: f64) -> Self {
        AdmissibilityQuery {
            d,
            gamma,
            s,
            r,
            sigma: None,
            q: None,
            kappa: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    /// Rejects queries outside the ranges where the inequalities are defined.
    /// `s` is allowed anywhere in `(0,∞)` so that boundary values produce a
    /// false verdict rather than an error.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedQuery(m));
        if self.d == 0 {
            return bad("dimension must be positive".into());
        }
        let d = self.d as f64;
        if !(self.gamma > 0.0 && self.gamma < d + 1.0) {
            return bad(format!("gamma must lie in (0, d+1), got {}", self.gamma));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return bad(format!("s must be positive, got {}", self.s));
        }
        if !(self.r >= 1.0) {
            return bad(format!("r must lie in [1, inf], got {}", self.r));
        }
        for (name, v) in [("sigma", self.sigma), ("q", self.q), ("kappa", self.kappa)] {
            if let Some(x) = v {
                if !x.is_finite() {
                    return bad(format!("{name} must be finite"));
                }
            }
        }
        Ok(())
    }

    fn inv_r(&self) -> f64 {
        1.0 / self.r
    }

    /// Admissible range `(1, d/(γ-1))` for `q`, present only when `γ > 1`.
    pub fn q_range(&self) -> Option<(f64, f64)> {
        (self.gamma > 1.0).then(|| (1.0, self.d as f64 / (self.gamma - 1.0)))
    }
}

/// One evaluated inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    pub inequality: String,
    /// Both sides agree to within the tie tolerance.
    pub boundary: bool,
    /// Auxiliary exponent realizing an existential condition.
    pub witness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub verdict: bool,
    pub conditions: Vec<Condition>,
    /// Infimum of admissible `σs` (well-posedness reports).
    pub min_sigma_s: Option<f64>,
    /// Supremum of admissible `σs`.
    pub max_sigma_s: Option<f64>,
    /// Infimum of admissible `κs` (monotonicity reports).
    pub min_kappa_s: Option<f64>,
    /// Supremum of integrability exponents for which some `σ` is admissible.
    #[serde(with = "serde_opt_exponent")]
    pub max_r: Option<f64>,
    pub q_range: Option<(f64, f64)>,
}

impl ConditionReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn holds(&self, name: &str) -> bool {
        self.condition(name).is_some_and(|c| c.holds)
    }

    pub fn boundary_cases(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| c.boundary)
    }
}

mod serde_opt_exponent {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "crate::norms::serde_exponent")] f64);

    pub fn serialize<S: Serializer>(r: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        r.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

fn tol(a: f64, b: f64) -> f64 {
    let scale = [1.0, a.abs(), b.abs()]
        .into_iter()
        .filter(|x| x.is_finite())
        .fold(1.0, f64::max);
    TIE * scale
}

fn lt(a: f64, b: f64) -> bool {
    b - a > tol(a, b)
}

fn le(a: f64, b: f64) -> bool {
    a - b <= tol(a, b)
}

fn tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= tol(a, b)
}

fn cmp(name: &str, lhs: f64, op: &str, rhs: f64) -> Condition {
    let holds = if op == "<" { lt(lhs, rhs) } else { le(lhs, rhs) };
    Condition {
        name: name.into(),
        holds,
        inequality: format!("{lhs} {op} {rhs}"),
        boundary: tie(lhs, rhs),
        witness: None,
    }
}

/// Open interval `(lo, hi)` in `u = d/p`, clipped to `(d/r, d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UInterval {
    pub lo: f64,
    pub hi: f64,
}

impl UInterval {
    fn clipped(d: f64, inv_r: f64, lo: f64, hi: f64) -> Self {
        UInterval {
            lo: lo.max(d * inv_r),
            hi: hi.min(d),
        }
    }

    pub fn is_nonempty(&self) -> bool {
        lt(self.lo, self.hi)
    }

    /// Exponent `p = d/u` at the midpoint.
    pub fn witness(&self, d: f64) -> Option<f64> {
        self.is_nonempty().then(|| d / (0.5 * (self.lo + self.hi)))
    }

    fn condition(&self, name: &str, d: f64) -> Condition {
        Condition {
            name: name.into(),
            holds: self.is_nonempty(),
            inequality: format!("{} < d/p < {}", self.lo, self.hi),
            boundary: tie(self.lo, self.hi),
            witness: self.witness(d),
        }
    }
}

/// `∃p∈(1,r): d(r-p)/(rp) < σs ∧ 1-γ+d(p-1)/p < σs`.
pub fn lwp2d_interval(q: &AdmissibilityQuery, sigma_s: f64) -> UInterval {
    let d = q.d as f64;
    let dr = d * q.inv_r();
    UInterval::clipped(d, q.inv_r(), d + 1.0 - q.gamma - sigma_s, dr + sigma_s)
}

/// `∃p∈(1,r): max{d(p-1)/p, (κ-2(r-1)/r)s+2-γ+d(r-p)/(rp)} < (κ+2/r)s`.
pub fn u2b_interval(q: &AdmissibilityQuery, kappa: f64) -> UInterval {
    let (d, ir, s) = (q.d as f64, q.inv_r(), q.s);
    let ks = kappa * s;
    UInterval::clipped(d, ir, d - ks - 2.0 * s * ir, d * ir + q.gamma + 2.0 * s - 2.0)
}

/// `∃p̃∈(1,r): max{(κ-2(r-1)/r)s+1+d(p̃-1)/p̃, 1-γ+d(r-p̃)/(rp̃)} < (κ+2/r)s`.
pub fn u2c_interval(q: &AdmissibilityQuery, kappa: f64) -> UInterval {
    let (d, ir, s) = (q.d as f64, q.inv_r(), q.s);
    let ks = kappa * s;
    UInterval::clipped(
        d,
        ir,
        d + 1.0 - 2.0 * s,
        ks + (2.0 * s + d) * ir + q.gamma - 1.0,
    )
}

/// The two alternatives of
/// `∃p∈(1,r): min{d(p-1)/p, (κ-2(r-1)/r)s+2-γ+d(r-p)/(rp)} < κs`.
pub fn l2a_intervals(q: &AdmissibilityQuery, kappa: f64) -> [UInterval; 2] {
    let (d, ir, s) = (q.d as f64, q.inv_r(), q.s);
    let ks = kappa * s;
    [
        UInterval::clipped(d, ir, d - ks, d),
        UInterval::clipped(
            d,
            ir,
            f64::NEG_INFINITY,
            -(2.0 - 2.0 * s - q.gamma + (2.0 * s - d) * ir),
        ),
    ]
}

/// The two alternatives of
/// `∃p̃∈(1,r): min{(κ-2(r-1)/r)s+1+d(p̃-1)/p̃, 1-γ+d(r-p̃)/(rp̃)} < κs`.
pub fn l2b_intervals(q: &AdmissibilityQuery, kappa: f64) -> [UInterval; 2] {
    let (d, ir, s) = (q.d as f64, q.inv_r(), q.s);
    let ks = kappa * s;
    [
        UInterval::clipped(d, ir, d + 1.0 - 2.0 * s + 2.0 * s * ir, d),
        UInterval::clipped(d, ir, f64::NEG_INFINITY, ks - 1.0 + q.gamma + d * ir),
    ]
}

/// Truth values of the existential conditions, from their closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reductions {
    pub lwp2d: bool,
    pub u2b: bool,
    pub u2c: bool,
    pub l2a: bool,
    pub l2b: bool,
}

/// Closed forms in `K = κs`:
/// LWP2d: `σs > 0`, `σs > 1-γ`, `2σs > d+1-γ-d/r`;
/// U2b: `γ+2s > 2`, `K > max{-2s/r, d-2s/r-d/r-γ-2s+2}`;
/// U2c: `s > 1/2`, `K > max{1-γ-2s/r, d+2-2s-(2s+d)/r-γ}`;
/// L2a: `K > 0` or `2-2s-γ+2s/r < 0`;
/// L2b: `K > 1-γ` or `1-2s+2s/r < 0`.
/// Needs `r > 1`, `σ` and `κ`.
pub fn reductions(q: &AdmissibilityQuery) -> Result<Reductions> {
    q.validate()?;
    let sigma = q
        .sigma
        .ok_or_else(|| Error::MalformedQuery("sigma is required".into()))?;
    let kappa = q
        .kappa
        .ok_or_else(|| Error::MalformedQuery("kappa is required".into()))?;
    if q.r == 1.0 {
        return Err(Error::MalformedQuery("the existential conditions need r > 1".into()));
    }
    let (d, g, s, ir) = (q.d as f64, q.gamma, q.s, q.inv_r());
    let (ss, k) = (sigma * s, kappa * s);
    Ok(Reductions {
        lwp2d: lt(0.0, ss) && lt(1.0 - g, ss) && lt(d + 1.0 - g - d * ir, 2.0 * ss),
        u2b: lt(2.0, g + 2.0 * s)
            && lt(-2.0 * s * ir, k)
            && lt(d - 2.0 * s * ir - d * ir - g - 2.0 * s + 2.0, k),
        u2c: lt(0.5, s)
            && lt(1.0 - g - 2.0 * s * ir, k)
            && lt(d + 2.0 - 2.0 * s - (2.0 * s + d) * ir - g, k),
        l2a: lt(0.0, k) || lt(2.0 - 2.0 * s - g + 2.0 * s * ir, 0.0),
        l2b: lt(1.0 - g, k) || lt(1.0 - 2.0 * s + 2.0 * s * ir, 0.0),
    })
}

fn either(name: &str, d: f64, alts: [UInterval; 2]) -> Condition {
    let mut a = alts[0].condition(name, d);
    let b = alts[1].condition(name, d);
    if !a.holds && b.holds {
        a = b;
    } else {
        a.boundary |= b.boundary && !a.holds;
    }
    a.inequality = format!(
        "[{}] or [{}]",
        alts[0].condition(name, d).inequality,
        alts[1].condition(name, d).inequality
    );
    a
}

/// `sup{r : c - d/r < 2s-1}`; zero when no `r ≥ 1` works.
fn r_sup(d: f64, c: f64, s: f64) -> f64 {
    let gap = c - (2.0 * s - 1.0);
    if gap <= 0.0 {
        f64::INFINITY
    } else if d / gap > 1.0 {
        d / gap
    } else {
        0.0
    }
}

fn lwp_max_r(q: &AdmissibilityQuery) -> f64 {
    let (d, s, g) = (q.d as f64, q.s, q.gamma);
    let sup = 2.0 * s - 1.0;
    if sup <= 0.0 {
        return 0.0;
    }
    let flat_ok = 1.0 - g < sup;
    let b = if flat_ok { r_sup(d, d, s) } else { 0.0 };
    let c = r_sup(d, 1.0 - g + d, s);
    let dd = if flat_ok {
        r_sup(d, d + 3.0 - g - 4.0 * s + sup, s)
    } else {
        0.0
    };
    let mut best = b.max(c).max(dd);
    if best < 1.0 && le(1.0 - g, sup) {
        best = 1.0;
    }
    if g > 1.0 {
        best = best.min(r_sup(d, d + 1.0 - g, s));
    }
    best
}

/// Conditions for the local theory in `Ŵ^{σs,r}`-type spaces with Gevrey
/// weights, together with the low-frequency condition when `γ > 1`.
pub fn check_lwp(q: &AdmissibilityQuery) -> Result<ConditionReport> {
    q.validate()?;
    let sigma = q
        .sigma
        .ok_or_else(|| Error::MalformedQuery("sigma is required".into()))?;
    let (d, s, g, ir) = (q.d as f64, q.s, q.gamma, q.inv_r());
    let ss = sigma * s;
    let flat = d * (1.0 - ir);
    let mut conds = vec![
        Condition {
            name: "LWP1".into(),
            holds: s > 0.0 && le(s, 1.0),
            inequality: format!("0 < {s} <= 1"),
            boundary: tie(s, 1.0),
            witness: None,
        },
        cmp("sigma_positive", 0.0, "<", sigma),
    ];
    let branches: Vec<Condition> = if q.r == 1.0 {
        vec![cmp("LWP2a", 1.0 - g, "<=", ss)]
    } else {
        let mut b = cmp("LWP2b", flat, "<", ss);
        let b2 = cmp("LWP2b", 1.0 - g, "<=", ss);
        b.holds &= b2.holds;
        b.boundary |= b2.boundary;
        b.inequality = format!("{} and {}", b.inequality, b2.inequality);
        vec![
            b,
            cmp("LWP2c", 1.0 - g + flat, "<", ss),
            lwp2d_interval(q, ss).condition("LWP2d", d),
        ]
    };
    let any_branch = branches.iter().any(|c| c.holds);
    conds.extend(branches);
    conds.push(cmp("LWP3", (ss + 1.0) / (2.0 * s), "<", 1.0));
    let q_range = q.q_range();
    if g > 1.0 {
        conds.push(cmp("low_frequency", d + 1.0 - g, "<", ss + d * ir));
        if let (Some(qq), Some((lo, hi))) = (q.q, q_range) {
            let mut c = cmp("q_range", lo, "<", qq);
            let c2 = cmp("q_range", qq, "<", hi);
            c.holds &= c2.holds;
            c.boundary |= c2.boundary;
            c.inequality = format!("{} and {}", c.inequality, c2.inequality);
            conds.push(c);
        }
    }
    let verdict = any_branch
        && conds
            .iter()
            .filter(|c| !c.name.starts_with("LWP2"))
            .all(|c| c.holds);

    let min_sigma_s = {
        let branch = if q.r == 1.0 {
            1.0 - g
        } else {
            let b = flat.max(1.0 - g);
            let c = 1.0 - g + flat;
            let dd = (1.0 - g).max(0.5 * (d + 1.0 - g - d * ir));
            b.min(c).min(dd)
        };
        let low = if g > 1.0 { d + 1.0 - g - d * ir } else { f64::NEG_INFINITY };
        branch.max(low).max(0.0)
    };
    Ok(ConditionReport {
        verdict,
        conditions: conds,
        min_sigma_s: Some(min_sigma_s),
        max_sigma_s: Some(2.0 * s - 1.0),
        min_kappa_s: None,
        max_r: Some(lwp_max_r(q)),
        q_range,
    })
}

/// Lower bounds on `κs` in the active branch. A bound of `+∞` marks a
/// branch that fails for every `κ`.
fn kappa_bounds(q: &AdmissibilityQuery) -> Vec<(&'static str, f64, bool)> {
    let (d, s, g, ir) = (q.d as f64, q.s, q.gamma, q.inv_r());
    if q.r == 1.0 {
        let u1a = if le(2.0 - g, 2.0 * s) { f64::NEG_INFINITY } else { f64::INFINITY };
        let u1b = if le(0.5, s) { 1.0 - g - 2.0 * s } else { f64::INFINITY };
        vec![
            ("U1a", u1a, false),
            ("U1b", u1b, false),
            ("U1c", 2.0 - g - 4.0 * s, false),
            ("L1a", 1.0 - g, false),
            ("L1b", 2.0 - g, false),
        ]
    } else {
        let u2a = if le(0.5, s) { f64::NEG_INFINITY } else { f64::INFINITY };
        let u2b = if lt(2.0, g + 2.0 * s) {
            (-2.0 * s * ir).max(d - 2.0 * s * ir - d * ir - g - 2.0 * s + 2.0)
        } else {
            f64::INFINITY
        };
        let u2c = if lt(0.5, s) {
            (1.0 - g - 2.0 * s * ir).max(d + 2.0 - 2.0 * s - (2.0 * s + d) * ir - g)
        } else {
            f64::INFINITY
        };
        let l2a = if lt(2.0 - 2.0 * s - g + 2.0 * s * ir, 0.0) {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        let l2b = if lt(1.0 - 2.0 * s + 2.0 * s * ir, 0.0) {
            f64::NEG_INFINITY
        } else {
            1.0 - g
        };
        vec![
            ("U2a", u2a, false),
            ("U2b", u2b, true),
            ("U2c", u2c, true),
            ("U2d", d + 2.0 - g - 2.0 * s - (d + 2.0 * s) * ir, true),
            ("L2a", l2a, true),
            ("L2b", l2b, true),
            ("L2c", d + 2.0 - g - 2.0 * s + (2.0 * s - d) * ir, true),
        ]
    }
}

/// Smallest `κ` beyond which every monotonicity condition holds.
pub fn kappa_threshold(d: usize, gamma: f64, s: f64, r: f64) -> f64 {
    let q = AdmissibilityQuery::new(d, gamma, s, r);
    kappa_bounds(&q)
        .into_iter()
        .map(|(_, b, _)| b)
        .fold(f64::NEG_INFINITY, f64::max)
        / s
}

/// Conditions bounding the maximal and minimal Sobolev index in the
/// bilinear estimate by `(κ+2/r)s` and `κs`.
pub fn check_monotonicity(q: &AdmissibilityQuery) -> Result<ConditionReport> {
    q.validate()?;
    let kappa = q
        .kappa
        .ok_or_else(|| Error::MalformedQuery("kappa is required".into()))?;
    let (d, s, g) = (q.d as f64, q.s, q.gamma);
    let ks = kappa * s;
    let mut conds = Vec::new();
    if q.r == 1.0 {
        conds.push(cmp("U1a", 2.0 - g, "<=", 2.0 * s));
        let mut u1b = cmp("U1b", 0.5, "<=", s);
        let u1b2 = cmp("U1b", 1.0 - g - 2.0 * s, "<=", ks);
        u1b.holds &= u1b2.holds;
        u1b.boundary |= u1b2.boundary;
        u1b.inequality = format!("{} and {}", u1b.inequality, u1b2.inequality);
        conds.push(u1b);
        conds.push(cmp("U1c", 2.0 - g - 4.0 * s, "<=", ks));
        conds.push(cmp("L1a", 1.0 - g, "<=", ks));
        conds.push(cmp("L1b", 2.0 - g, "<=", ks));
    } else {
        let ir = q.inv_r();
        conds.push(cmp("U2a", 0.5, "<=", s));
        conds.push(u2b_interval(q, kappa).condition("U2b", d));
        conds.push(u2c_interval(q, kappa).condition("U2c", d));
        conds.push(cmp(
            "U2d",
            d + 2.0 - g - 2.0 * s - (d + 2.0 * s) * ir,
            "<",
            ks,
        ));
        conds.push(either("L2a", d, l2a_intervals(q, kappa)));
        conds.push(either("L2b", d, l2b_intervals(q, kappa)));
        conds.push(cmp(
            "L2c",
            d + 2.0 - g - 2.0 * s + (2.0 * s - d) * ir,
            "<",
            ks,
        ));
    }
    let verdict = conds.iter().all(|c| c.holds);
    Ok(ConditionReport {
        verdict,
        conditions: conds,
        min_sigma_s: None,
        max_sigma_s: None,
        min_kappa_s: Some(kappa_threshold(q.d, g, s, q.r) * s),
        max_r: None,
        q_range: q.q_range(),
    })
}

/// Conjunction of whichever checks the query supplies parameters for.
pub fn check(q: &AdmissibilityQuery) -> Result<ConditionReport> {
    q.validate()?;
    if q.sigma.is_none() && q.kappa.is_none() {
        return Err(Error::MalformedQuery("need sigma or kappa".into()));
    }
    let lwp = q.sigma.map(|_| check_lwp(q)).transpose()?;
    let mon = q.kappa.map(|_| check_monotonicity(q)).transpose()?;
    let mut out = ConditionReport {
        verdict: true,
        conditions: Vec::new(),
        min_sigma_s: None,
        max_sigma_s: None,
        min_kappa_s: None,
        max_r: None,
        q_range: q.q_range(),
    };
    for rep in [lwp, mon].into_iter().flatten() {
        out.verdict &= rep.verdict;
        out.conditions.extend(rep.conditions);
        out.min_sigma_s = out.min_sigma_s.or(rep.min_sigma_s);
        out.max_sigma_s = out.max_sigma_s.or(rep.max_sigma_s);
        out.min_kappa_s = out.min_kappa_s.or(rep.min_kappa_s);
        out.max_r = out.max_r.or(rep.max_r);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Gamma,
    S,
    R,
    Sigma,
    Kappa,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Gamma => "gamma",
            Param::S => "s",
            Param::R => "r",
            Param::Sigma => "sigma",
            Param::Kappa => "kappa",
        }
    }

    fn set(self, q: &mut AdmissibilityQuery, v: f64) {
        match self {
            Param::Gamma => q.gamma = v,
            Param::S => q.s = v,
            Param::R => q.r = v,
            Param::Sigma => q.sigma = Some(v),
            Param::Kappa => q.kappa = Some(v),
        }
    }
}

impl std::str::FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gamma" => Param::Gamma,
            "s" => Param::S,
            "r" => Param::R,
            "sigma" => Param::Sigma,
            "kappa" => Param::Kappa,
            _ => return Err(Error::MalformedQuery(format!("unknown parameter {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis {
    pub param: Param,
    pub values: Vec<f64>,
}

impl ScanAxis {
    /// `n` cell midpoints of `(lo, hi)`.
    pub fn midpoints(param: Param, lo: f64, hi: f64, n: usize) -> Self {
        let h = (hi - lo) / n as f64;
        ScanAxis {
            param,
            values: (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub x: f64,
    pub y: f64,
    pub admissible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionTable {
    pub x: Param,
    pub y: Param,
    pub cells: Vec<ScanCell>,
}

impl RegionTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record([self.x.name(), self.y.name(), "admissible"])
            .map_err(io)?;
        for c in &self.cells {
            w.write_record([
                format!("{:.16e}", c.x),
                format!("{:.16e}", c.y),
                u8::from(c.admissible).to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Evaluates [`check`] on the product grid `x × y` with the remaining
/// parameters taken from `base`. Cells whose query is out of range are
/// reported inadmissible.
pub fn scan_region(base: &AdmissibilityQuery, x: &ScanAxis, y: &ScanAxis) -> Result<RegionTable> {
    if x.param == y.param {
        return Err(Error::MalformedQuery("scan axes must differ".into()));
    }
    let mut cells = Vec::with_capacity(x.values.len() * y.values.len());
    for &xv in &x.values {
        for &yv in &y.values {
            let mut q = *base;
            x.param.set(&mut q, xv);
            y.param.set(&mut q, yv);
            let admissible = match check(&q) {
                Ok(rep) => rep.verdict,
                Err(Error::MalformedQuery(_)) if q.validate().is_err() => false,
                Err(e) => return Err(e),
            };
            cells.push(ScanCell {
                x: xv,
                y: yv,
                admissible,
            });
        }
    }
    Ok(RegionTable {
        x: x.param,
        y: y.param,
        cells,
    })
}
