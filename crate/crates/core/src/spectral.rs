//! Periodic grids, discrete Fourier transforms and dealiased products.
//!
//! Coefficients follow the continuous convention `f̂(ξ) = ∫ f(x) e^{-ix·ξ} dx`
//! discretized with the quadrature weight `(L/N)^d`, so the zero mode of a
//! transformed field is its integral over the box. The inverse is
//! `f(x) = L^{-d} Σ_k F(k) e^{iξ(k)·x}`.
//!
//! Storage is the usual FFT order: lattice index `i` along an axis stands for
//! `k = i` when `i <= N/2` and `k = i - N` otherwise, so `-N/2 < k <= N/2`.
//! In two dimensions the linear index is `i0 * N + i1` with axis 0 the `x` axis.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative Hermitian defect tolerated by [`inverse_transform`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Spatial dimension, 1 or 2.
    pub d: usize,
    /// Modes per axis; must be even.
    pub n: usize,
    /// Side length of the periodic box `[0, L)^d`.
    pub l: f64,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        let g = GridSpec { d, n, l };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d == 1 || self.d == 2) {
            return Err(Error::Config(format!("grid.d must be 1 or 2, got {}", self.d)));
        }
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::Config(format!(
                "grid.n must be a positive even integer, got {}",
                self.n
            )));
        }
        if !(self.l.is_finite() && self.l > 0.0) {
            return Err(Error::Config(format!("grid.l must be positive, got {}", self.l)));
        }
        Ok(())
    }

    /// Number of collocation points (and of lattice modes), `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `(L/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        (self.l / self.n as f64).powi(self.d as i32)
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }

    /// Signed lattice index for storage index `i` along one axis.
    pub fn axis_mode(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    fn axis_slot(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k <= -n / 2 || k > n / 2 {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + n) as usize })
    }

    /// Lattice vector of a storage index; the second entry is 0 when `d = 1`.
    pub fn mode(&self, idx: usize) -> [i64; 2] {
        if self.d == 1 {
            [self.axis_mode(idx), 0]
        } else {
            [self.axis_mode(idx / self.n), self.axis_mode(idx % self.n)]
        }
    }

    /// Storage index of a lattice vector, if it lies on the grid.
    pub fn index_of(&self, k: [i64; 2]) -> Option<usize> {
        if self.d == 1 {
            if k[1] != 0 {
                return None;
            }
            self.axis_slot(k[0])
        } else {
            Some(self.axis_slot(k[0])? * self.n + self.axis_slot(k[1])?)
        }
    }

    /// Angular wavevector `ξ = 2πk/L`.
    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        let k = self.mode(idx);
        let c = 2.0 * PI / self.l;
        [c * k[0] as f64, c * k[1] as f64]
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        let xi = self.wavevector(idx);
        xi[0].hypot(xi[1])
    }

    /// Storage index of `-k`. Nyquist entries map to themselves.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        if self.d == 1 {
            (n - idx) % n
        } else {
            let (i0, i1) = (idx / n, idx % n);
            ((n - i0) % n) * n + (n - i1) % n
        }
    }

    /// True when the 2/3 rule removes this mode (some `|k_i| > N/3`).
    pub fn is_dealiased(&self, idx: usize) -> bool {
        let k = self.mode(idx);
        let n = self.n as i64;
        k.iter().take(self.d).any(|&ki| 3 * ki.abs() > n)
    }

    /// True when some component sits on the unpaired Nyquist index `N/2`.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let k = self.mode(idx);
        let half = (self.n / 2) as i64;
        k.iter().take(self.d).any(|&ki| ki == half)
    }

    /// Collocation point of a storage index.
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let h = self.l / self.n as f64;
        if self.d == 1 {
            [h * idx as f64, 0.0]
        } else {
            [h * (idx / self.n) as f64, h * (idx % self.n) as f64]
        }
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Point values of a real periodic field.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: GridSpec) -> Self {
        RealField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        RealField { grid, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Quadrature `Σ f(x) (L/N)^d`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

/// Fourier coefficients on the full truncated lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Coefficient at lattice vector `k` (zero when off the grid).
    pub fn at(&self, k: [i64; 2]) -> Complex64 {
        self.grid
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Sets the coefficient at `k` and at `-k` so the field stays real.
    pub fn set_real_mode(&mut self, k: [i64; 2], value: Complex64) {
        if let Some(i) = self.grid.index_of(k) {
            let j = self.grid.conjugate_index(i);
            if i == j {
                self.coeffs[i] = Complex64::new(value.re, 0.0);
            } else {
                self.coeffs[i] = value;
                self.coeffs[j] = value.conj();
            }
        }
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max_k |F(-k) - conj F(k)| / max_k |F(k)|`, zero for the zero field.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = self.grid.conjugate_index(i);
            worst = worst.max((self.coeffs[j] - c.conj()).norm());
        }
        worst / scale
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &SpectralField, factor: f64) -> SpectralField {
        debug_assert_eq!(self.grid, other.grid);
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * factor)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.add_scaled(other, -1.0)
    }

    /// Zeroes every mode outside the 2/3 band.
    pub fn dealias_in_place(&mut self) {
        let grid = self.grid;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if grid.is_dealiased(i) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn dealiased(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    /// `Σ_k |F(k)|^2`.
    pub fn sum_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized DFT over all axes (`e^{-i}` forward, `e^{+i}` inverse).
fn dft_in_place(grid: &GridSpec, buf: &mut [Complex64], inverse: bool) {
    let n = grid.n;
    let fft = plan(n, inverse);
    // rustfft processes every consecutive chunk of length n
    fft.process(buf);
    if grid.d == 2 {
        transpose_square(buf, n);
        fft.process(buf);
        transpose_square(buf, n);
    }
}

/// Real field to coefficients, `F(k) = (L/N)^d Σ_x f(x) e^{-iξ(k)·x}`.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_in_place(&f.grid, &mut buf, false);
    let w = f.grid.cell_volume();
    for c in buf.iter_mut() {
        *c *= w;
    }
    SpectralField {
        grid: f.grid,
        coeffs: buf,
    }
}

/// Coefficients back to point values. Rejects non-Hermitian input.
pub fn inverse_transform(f: &SpectralField) -> Result<RealField> {
    let defect = f.hermitian_defect();
    if defect > HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitian { defect });
    }
    Ok(inverse_unchecked(f))
}

/// Inverse transform keeping only the real part, without the symmetry check.
pub(crate) fn inverse_unchecked(f: &SpectralField) -> RealField {
    let mut buf = f.coeffs.clone();
    dft_in_place(&f.grid, &mut buf, true);
    let w = 1.0 / f.grid.volume();
    RealField {
        grid: f.grid,
        values: buf.iter().map(|c| c.re * w).collect(),
    }
}

/// Pointwise product of two real fields, dealiased before and after.
pub fn dealiased_product(a: &RealField, b: &RealField) -> Result<SpectralField> {
    a.grid.check_same(&b.grid)?;
    Ok(dealiased_product_spectral(
        &forward_transform(a),
        &forward_transform(b),
    ))
}

/// Same as [`dealiased_product`] for inputs already in coefficient form.
pub fn dealiased_product_spectral(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let pa = inverse_unchecked(&a.dealiased());
    let pb = inverse_unchecked(&b.dealiased());
    let prod = RealField {
        grid: a.grid,
        values: pa.values.iter().zip(&pb.values).map(|(x, y)| x * y).collect(),
    };
    let mut out = forward_transform(&prod);
    out.dealias_in_place();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealField {
            grid,
            values: (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(3, 16, 1.0).is_err());
        assert!(GridSpec::new(2, 15, 1.0).is_err());
        assert!(GridSpec::new(2, 16, 0.0).is_err());
        assert!(GridSpec::new(1, 16, 2.0).is_ok());
    }

    #[test]
    fn index_round_trip_and_conjugates() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index_of(g.mode(i)), Some(i));
            let k = g.mode(i);
            let j = g.conjugate_index(i);
            if !g.is_nyquist(i) {
                assert_eq!(g.mode(j), [-k[0], -k[1]]);
            }
        }
        assert_eq!(g.mode(4 * 8 + 5), [4, -3]);
    }

    #[test]
    fn constant_field_goes_to_zero_mode() {
        let g = GridSpec::new(2, 16, 3.0).unwrap();
        let f = RealField::from_fn(g, |_| 2.5);
        let s = forward_transform(&f);
        assert!((s.coeffs[0].re - 2.5 * 9.0).abs() < 1e-12);
        for c in &s.coeffs[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn single_cosine_mode() {
        let l = 2.0;
        let g = GridSpec::new(1, 32, l).unwrap();
        let f = RealField::from_fn(g, |x| (2.0 * PI * x[0] / l).cos());
        let s = forward_transform(&f);
        for (i, c) in s.coeffs.iter().enumerate() {
            let k = g.mode(i)[0];
            let expect = if k.abs() == 1 { l / 2.0 } else { 0.0 };
            assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn inverse_of_simple_inputs() {
        let g = GridSpec::new(2, 8, 2.0).unwrap();
        let z = inverse_transform(&SpectralField::zeros(g)).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        let mut one = SpectralField::zeros(g);
        one.coeffs[0] = Complex64::new(4.0, 0.0);
        let f = inverse_transform(&one).unwrap();
        assert!(f.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let mut s = SpectralField::zeros(g);
        s.coeffs[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(inverse_transform(&s), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn round_trip_and_parseval_all_sizes() {
        for &n in &[16usize, 32, 64, 128] {
            for d in 1..=2 {
                let g = GridSpec::new(d, n, 1.7).unwrap();
                let f = random_field(g, n as u64 * 10 + d as u64);
                let s = forward_transform(&f);
                let back = inverse_transform(&s).unwrap();
                let scale = f.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let err = f
                    .values
                    .iter()
                    .zip(&back.values)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err <= 1e-12 * scale, "n={n} d={d} err={err}");

                let lhs: f64 = f.values.iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
                let rhs = s.sum_sq() / g.volume();
                assert!((lhs - rhs).abs() <= 1e-12 * lhs);
            }
        }
    }

    #[test]
    fn product_with_one_is_dealias() {
        let g = GridSpec::new(2, 16, 1.0).unwrap();
        let b = random_field(g, 4);
        let one = RealField::from_fn(g, |_| 1.0);
        let p = dealiased_product(&one, &b).unwrap();
        let expect = forward_transform(&b).dealiased();
        for (x, y) in p.coeffs.iter().zip(&expect.coeffs) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    /// `(ab)^(k) = L^{-d} Σ_{k'} â(k-k') b̂(k')`, evaluated by brute force.
    fn convolution_oracle(a: &SpectralField, b: &SpectralField) -> SpectralField {
        let g = a.grid;
        let mut out = SpectralField::zeros(g);
        for i in 0..g.len() {
            let k = g.mode(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..g.len() {
                let kp = g.mode(j);
                acc += a.at([k[0] - kp[0], k[1] - kp[1]]) * b.coeffs[j];
            }
            out.coeffs[i] = acc / g.volume();
        }
        out
    }

    #[test]
    fn two_mode_product_matches_convolution() {
        let l = 3.0;
        let g = GridSpec::new(1, 16, l).unwrap();
        let (k1, k2) = (2.0, 3.0);
        let a = RealField::from_fn(g, |x| (2.0 * PI * k1 * x[0] / l).cos());
        let b = RealField::from_fn(g, |x| (2.0 * PI * k2 * x[0] / l).cos());
        let p = dealiased_product(&a, &b).unwrap();
        // cos·cos = ½cos(k1+k2) + ½cos(k1-k2): coefficient L/4 at ±5 and ±1
        for i in 0..g.len() {
            let k = g.mode(i)[0].abs();
            let expect = if k == 5 || k == 1 { l / 4.0 } else { 0.0 };
            assert!((p.coeffs[i].re - expect).abs() < 1e-12 && p.coeffs[i].im.abs() < 1e-12);
        }
        let oracle = convolution_oracle(&forward_transform(&a), &forward_transform(&b));
        for (x, y) in p.coeffs.iter().zip(&oracle.coeffs) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn aliasing_modes_are_removed() {
        let l = 1.0;
        let g = GridSpec::new(1, 16, l).unwrap();
        // k=5 is kept (3*5 <= 16) but 5+5 = 10 falls outside the band
        let a = RealField::from_fn(g, |x| (2.0 * PI * 5.0 * x[0] / l).sin());
        let b = RealField::from_fn(g, |x| (2.0 * PI * 5.0 * x[0] / l).cos());
        let p = dealiased_product(&a, &b).unwrap();
        assert!(p.max_abs() < 1e-12);
        // k=6 is outside the band already
        let c = RealField::from_fn(g, |x| (2.0 * PI * 6.0 * x[0] / l).cos());
        let one = RealField::from_fn(g, |_| 1.0);
        assert!(dealiased_product(&c, &one).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn product_is_bilinear_symmetric_and_dealias_idempotent() {
        let g = GridSpec::new(2, 16, 1.0).unwrap();
        let a = random_field(g, 1);
        let b = random_field(g, 2);
        let c = random_field(g, 3);
        let ab = dealiased_product(&a, &b).unwrap();
        let ba = dealiased_product(&b, &a).unwrap();
        for (x, y) in ab.coeffs.iter().zip(&ba.coeffs) {
            assert!((x - y).norm() < 1e-13);
        }
        let sum = RealField {
            grid: g,
            values: b.values.iter().zip(&c.values).map(|(x, y)| 2.0 * x + y).collect(),
        };
        let lhs = dealiased_product(&a, &sum).unwrap();
        let ac = dealiased_product(&a, &c).unwrap();
        let rhs = ab.scaled(2.0).add_scaled(&ac, 1.0);
        for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
            assert!((x - y).norm() < 1e-12);
        }
        let once = forward_transform(&a).dealiased();
        assert_eq!(once.dealiased(), once);
    }
}
