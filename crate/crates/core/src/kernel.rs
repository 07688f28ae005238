//! Interaction kernels and the induced velocity `v = M∇g∗θ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSign {
    Attractive,
    Repulsive,
}

impl KernelSign {
    pub fn value(self) -> f64 {
        match self {
            KernelSign::Attractive => -1.0,
            KernelSign::Repulsive => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelPreset {
    Riesz,
    Newtonian2d,
}

/// Fourier symbol `ĝ(ξ) = sign·c·|ξ|^{-γ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub gamma: f64,
    pub sign: KernelSign,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "riesz")]
    pub preset: KernelPreset,
}

fn one() -> f64 {
    1.0
}

fn riesz() -> KernelPreset {
    KernelPreset::Riesz
}

impl KernelSpec {
    pub fn riesz(gamma: f64, sign: KernelSign) -> Self {
        KernelSpec {
            gamma,
            sign,
            c: 1.0,
            preset: KernelPreset::Riesz,
        }
    }

    /// `ĝ = sign·|ξ|^{-2}`; the attractive case is `g = (1/2π) ln|x|`.
    pub fn newtonian2d(sign: KernelSign) -> Self {
        KernelSpec {
            gamma: 2.0,
            sign,
            c: 1.0,
            preset: KernelPreset::Newtonian2d,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < (d + 1) as f64) {
            return Err(Error::Config(format!(
                "kernel.gamma must lie in (0, {}), got {}",
                d + 1,
                self.gamma
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!("kernel.c must be positive, got {}", self.c)));
        }
        if self.preset == KernelPreset::Newtonian2d
            && (d != 2 || self.gamma != 2.0 || self.c != 1.0)
        {
            return Err(Error::Config(
                "newtonian2d requires d = 2, gamma = 2 and c = 1".into(),
            ));
        }
        Ok(())
    }

    pub fn g_hat(&self, xi: [f64; 2]) -> f64 {
        let r = xi[0].hypot(xi[1]);
        if r == 0.0 {
            return 0.0;
        }
        let c = self.sign.value() * self.c;
        if self.preset == KernelPreset::Newtonian2d {
            c / (r * r)
        } else {
            c * r.powf(-self.gamma)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CouplingRepr {
    Gradient,
    Hamiltonian2d,
    Custom([[f64; 2]; 2]),
}

/// The matrix `M` in `div(θ M∇g∗θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "CouplingRepr", into = "CouplingRepr")]
pub enum CouplingMatrix {
    /// `M = -I`.
    GradientFlow,
    /// Rotation by `π/2`, `M = [[0,-1],[1,0]]`.
    Hamiltonian2D,
    /// Arbitrary matrix; in one dimension only `m[0][0]` is used.
    Custom {
        m: [[f64; 2]; 2],
        antisymmetric: bool,
    },
}

impl From<CouplingRepr> for CouplingMatrix {
    fn from(r: CouplingRepr) -> Self {
        match r {
            CouplingRepr::Gradient => CouplingMatrix::GradientFlow,
            CouplingRepr::Hamiltonian2d => CouplingMatrix::Hamiltonian2D,
            CouplingRepr::Custom(m) => CouplingMatrix::custom(m),
        }
    }
}

impl From<CouplingMatrix> for CouplingRepr {
    fn from(c: CouplingMatrix) -> Self {
        match c {
            CouplingMatrix::GradientFlow => CouplingRepr::Gradient,
            CouplingMatrix::Hamiltonian2D => CouplingRepr::Hamiltonian2d,
            CouplingMatrix::Custom { m, .. } => CouplingRepr::Custom(m),
        }
    }
}

impl CouplingMatrix {
    pub fn custom(m: [[f64; 2]; 2]) -> Self {
        let antisymmetric = m[0][0] == 0.0 && m[1][1] == 0.0 && m[0][1] == -m[1][0];
        CouplingMatrix::Custom { m, antisymmetric }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            CouplingMatrix::Hamiltonian2D if d != 2 => {
                Err(Error::Config("coupling hamiltonian2d requires d = 2".into()))
            }
            CouplingMatrix::Custom { m, .. } if m.iter().flatten().any(|x| !x.is_finite()) => {
                Err(Error::Config("coupling matrix must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        match self {
            CouplingMatrix::GradientFlow => [[-1.0, 0.0], [0.0, -1.0]],
            CouplingMatrix::Hamiltonian2D => [[0.0, -1.0], [1.0, 0.0]],
            CouplingMatrix::Custom { m, .. } => *m,
        }
    }

    pub fn is_antisymmetric(&self) -> bool {
        match self {
            CouplingMatrix::GradientFlow => false,
            CouplingMatrix::Hamiltonian2D => true,
            CouplingMatrix::Custom { antisymmetric, .. } => *antisymmetric,
        }
    }

    /// `Mξ`, restricted to the first `d` components.
    pub fn apply(&self, d: usize, xi: [f64; 2]) -> [f64; 2] {
        let m = self.matrix();
        if d == 1 {
            [m[0][0] * xi[0], 0.0]
        } else {
            [
                m[0][0] * xi[0] + m[0][1] * xi[1],
                m[1][0] * xi[0] + m[1][1] * xi[1],
            ]
        }
    }

    /// `ξᵀMξ`, exactly zero in the antisymmetric case.
    pub fn quadratic_form(&self, d: usize, xi: [f64; 2]) -> f64 {
        if self.is_antisymmetric() {
            return 0.0;
        }
        let mx = self.apply(d, xi);
        xi[0] * mx[0] + xi[1] * mx[1]
    }
}

/// Odd-order derivatives are undefined on the unpaired Nyquist index of a
/// real field; those modes are set to zero.
fn derivative_mask(grid: &GridSpec, idx: usize) -> bool {
    !grid.is_nyquist(idx)
}

/// Components `v̂_j = i(Mξ)_j ĝ(ξ) θ̂(ξ)`, `j < d`.
pub fn velocity(
    theta: &SpectralField,
    kernel: &KernelSpec,
    coupling: &CouplingMatrix,
) -> Vec<SpectralField> {
    let grid = theta.grid;
    let d = grid.d;
    let mut out = vec![SpectralField::zeros(grid); d];
    for (i, c) in theta.coeffs.iter().enumerate() {
        if !derivative_mask(&grid, i) {
            continue;
        }
        let xi = grid.wavevector(i);
        let g = kernel.g_hat(xi);
        if g == 0.0 {
            continue;
        }
        let mx = coupling.apply(d, xi);
        for (j, v) in out.iter_mut().enumerate() {
            v.coeffs[i] = Complex64::new(0.0, mx[j] * g) * c;
        }
    }
    out
}

/// `Σ_j iξ_j v̂_j`, evaluated as `-(ξᵀMξ) ĝ θ̂`.
pub fn velocity_divergence(
    theta: &SpectralField,
    kernel: &KernelSpec,
    coupling: &CouplingMatrix,
) -> SpectralField {
    let grid = theta.grid;
    let mut out = SpectralField::zeros(grid);
    for (i, c) in theta.coeffs.iter().enumerate() {
        if !derivative_mask(&grid, i) {
            continue;
        }
        let xi = grid.wavevector(i);
        let q = coupling.quadratic_form(grid.d, xi);
        out.coeffs[i] = c * (-q * kernel.g_hat(xi));
    }
    out
}

/// `Σ_j iξ_j F̂_j` for a vector field given by its components.
pub fn divergence(components: &[SpectralField]) -> SpectralField {
    let grid = components[0].grid;
    let mut out = SpectralField::zeros(grid);
    for (i, o) in out.coeffs.iter_mut().enumerate() {
        if !derivative_mask(&grid, i) {
            continue;
        }
        let xi = grid.wavevector(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, f) in components.iter().enumerate() {
            acc += Complex64::new(0.0, xi[j]) * f.coeffs[i];
        }
        *o = acc;
    }
    out
}
