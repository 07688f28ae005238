//! Building a run by hand: a one-dimensional attractive Riesz interaction with
//! extra fractional diffusion, integrated along an explicit Brownian path.

use active_scalar::datum::DatumSpec;
use active_scalar::dynamics::{Dynamics, IntegratorSpec, Mode, NormProbe, Scheme, Simulation};
use active_scalar::kernel::{CouplingMatrix, KernelSign, KernelSpec};
use active_scalar::multipliers::{DriftEnvelope, NoiseSpec};
use active_scalar::norms::{NormSpec, XNormSpec};
use active_scalar::paths::sample_path;
use active_scalar::spectral::GridSpec;

fn main() -> active_scalar::Result<()> {
    let grid = GridSpec::new(1, 128, 20.0)?;
    let mut spec = IntegratorSpec::new(1e-3, 1.0, Scheme::Etdrk2, Mode::Ito);
    spec.chi = 0.1;
    spec.lambda = 1.5;
    let dynamics = Dynamics::new(
        grid,
        KernelSpec::riesz(0.5, KernelSign::Attractive),
        CouplingMatrix::GradientFlow,
        NoiseSpec::new(1.0, 2.0)?,
        spec,
    )?;
    let mut sim = Simulation::new(dynamics, sample_path(1e-3, 1.0, 3)?);
    sim.envelope = Some(DriftEnvelope::new(0.5, 1.0)?);
    sim.audit = Some(XNormSpec::single(NormSpec::new(0.0, 1.0, 2.0)?));
    sim.norms = vec![NormProbe { a: Some(0.0), kappa: 1.0, r: 1.0, kappa_q: 0.0, q: None }];
    sim.stride = 100;

    let theta0 = DatumSpec::Gaussian { mass: 1.0, width: 1.0, center: None }.build(&grid)?;
    let tr = sim.run(&theta0)?;
    println!("membership: {:?}", tr.membership);
    for r in &tr.rows {
        println!(
            "t={:.2} W={:+.3} mass_mu={:.4e} |theta|_2={:.4e} W^(1,1)={:.4e} audit={:.4}",
            r.t,
            r.w,
            r.mass_mu,
            r.l2_theta,
            r.norms[0],
            r.audit.map_or(f64::NAN, |a| a.log_norm)
        );
    }
    println!("{:?}, monotone {:?}", tr.termination, tr.monotone);
    Ok(())
}
