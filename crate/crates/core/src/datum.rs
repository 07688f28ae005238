//! Initial data presets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{forward_transform, GridSpec, RealField, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumSpec {
    /// `M (2πw²)^{-d/2} exp(-|x-c|²/2w²)`, centered in the box unless `center`
    /// is given.
    Gaussian {
        mass: f64,
        width: f64,
        #[serde(default)]
        center: Option<[f64; 2]>,
    },
    /// `A (x_1-c_1)/w · exp(-|x-c|²/2w²)`, mean zero.
    Dipole { amplitude: f64, width: f64 },
    /// Coefficients `c·e^{-a₀|ξ|}` with independent unit-modulus phases.
    Random {
        amplitude: f64,
        radius: f64,
        #[serde(default)]
        seed: u64,
    },
    /// The zero field.
    Zero,
}

impl DatumSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = match *self {
            DatumSpec::Gaussian { mass, width, .. } => !(mass.is_finite() && width > 0.0),
            DatumSpec::Dipole { amplitude, width } => !(amplitude.is_finite() && width > 0.0),
            DatumSpec::Random {
                amplitude, radius, ..
            } => !(amplitude.is_finite() && radius >= 0.0),
            DatumSpec::Zero => false,
        };
        if bad {
            return Err(Error::Config(format!("invalid datum {self:?}")));
        }
        Ok(())
    }

    /// The same preset with its amplitude (or mass) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DatumSpec {
        match *self {
            DatumSpec::Gaussian {
                mass,
                width,
                center,
            } => DatumSpec::Gaussian {
                mass: mass * factor,
                width,
                center,
            },
            DatumSpec::Dipole { amplitude, width } => DatumSpec::Dipole {
                amplitude: amplitude * factor,
                width,
            },
            DatumSpec::Random {
                amplitude,
                radius,
                seed,
            } => DatumSpec::Random {
                amplitude: amplitude * factor,
                radius,
                seed,
            },
            DatumSpec::Zero => DatumSpec::Zero,
        }
    }

    /// Center used for second moments.
    pub fn center(&self, grid: &GridSpec) -> [f64; 2] {
        match self {
            DatumSpec::Gaussian {
                center: Some(c), ..
            } => *c,
            _ => box_center(grid),
        }
    }

    /// Spectral coefficients on `grid`, with the unpaired Nyquist modes zeroed.
    pub fn build(&self, grid: &GridSpec) -> Result<SpectralField> {
        self.validate()?;
        let c = self.center(grid);
        let mut f = match *self {
            DatumSpec::Gaussian { mass, width, .. } => {
                let norm = mass / (2.0 * PI * width * width).powf(grid.d as f64 / 2.0);
                forward_transform(&RealField::from_fn(*grid, |x| {
                    norm * (-min_image_r2(grid, x, c) / (2.0 * width * width)).exp()
                }))
            }
            DatumSpec::Dipole { amplitude, width } => {
                let mut f = forward_transform(&RealField::from_fn(*grid, |x| {
                    let dx = wrap(x[0] - c[0], grid.l);
                    amplitude * dx / width
                        * (-min_image_r2(grid, x, c) / (2.0 * width * width)).exp()
                }));
                f.coeffs[0] = Complex64::new(0.0, 0.0);
                f
            }
            DatumSpec::Random {
                amplitude,
                radius,
                seed,
            } => random_field(grid, amplitude, radius, seed),
            DatumSpec::Zero => SpectralField::zeros(*grid),
        };
        for i in 0..grid.len() {
            if grid.is_nyquist(i) {
                f.coeffs[i] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(f)
    }
}

pub fn box_center(grid: &GridSpec) -> [f64; 2] {
    let h = 0.5 * grid.l;
    if grid.d == 1 {
        [h, 0.0]
    } else {
        [h, h]
    }
}

fn wrap(x: f64, l: f64) -> f64 {
    (x + 0.5 * l).rem_euclid(l) - 0.5 * l
}

fn min_image_r2(grid: &GridSpec, x: [f64; 2], c: [f64; 2]) -> f64 {
    (0..grid.d).map(|j| wrap(x[j] - c[j], grid.l).powi(2)).sum()
}

fn random_field(grid: &GridSpec, amplitude: f64, radius: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(*grid);
    for i in 0..grid.len() {
        let j = grid.conjugate_index(i);
        if j < i {
            continue;
        }
        let mag = amplitude * (-radius * grid.wavenumber(i)).exp();
        let phase = if i == j {
            if rng.random::<bool>() {
                0.0
            } else {
                PI
            }
        } else {
            rng.random_range(0.0..2.0 * PI)
        };
        f.set_real_mode(grid.mode(i), Complex64::from_polar(mag, phase));
    }
    f
}
