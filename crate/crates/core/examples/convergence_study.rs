//! Pathwise step refinement on a shared Brownian path: first order for the
//! integrating-factor Euler scheme, second for Heun.

use active_scalar::config::Preset;
use active_scalar::dynamics::{PathRefinement, Scheme};
use active_scalar::harness::{convergence, convergence_csv};

fn main() -> active_scalar::Result<()> {
    let cfg = Preset::SqgRandom.config().with_overrides(&[
        "integrator.dt=0.02",
        "integrator.horizon=0.5",
        "datum.amplitude=0.05",
    ])?;
    for refinement in [PathRefinement::Linear, PathRefinement::Bridge] {
        let reps = convergence(&cfg, &[Scheme::Etd1, Scheme::Etdrk2], 5, refinement)?;
        for r in &reps {
            println!("{:?}/{:?}: observed order {:.3}", r.scheme, refinement, r.observed_order());
        }
        print!("{}", convergence_csv(&reps)?);
    }
    Ok(())
}
