//! Pseudospectral engine and diagnostics for active scalar equations with
//! random Gevrey diffusion
//!
//! ```text
//! dθ + div(θ M∇g∗θ) dt = ν(1+|∇|^s)θ dW
//! ```
//!
//! on the torus `[0,L)^d`. The stochastic equation is integrated through its
//! pathwise transform `μ = Γθ`, `Γ = exp(-νW(1+|∇|^s))`, which is a parabolic
//! equation with damping `ν²/2 (1+|∇|^s)^2`.

pub mod admissibility;
pub mod config;
pub mod datum;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod multipliers;
pub mod norms;
pub mod output;
pub mod paths;
pub mod spectral;

pub use error::{Error, Result};
