//! A Gaussian of mass 8 concentrates without noise, fails the monotone audit
//! under weak noise and runs globally with a monotone norm under strong noise.

use active_scalar::config::Preset;
use active_scalar::harness::{calibrate, seeds_in_event, simulate};

fn main() -> active_scalar::Result<()> {
    let base = Preset::PksBlowup.config().with_overrides(&[
        "grid.n=128",
        "grid.l=20",
        "datum.mass=8",
        "integrator.horizon=5",
        "output.stride=5",
    ])?;
    let det = simulate(&base)?;
    println!("nu=0: {:?}", det.termination);

    let random = |nu: f64, beta: f64| {
        base.with_overrides(&[
            "integrator.mode=\"ito\"".to_string(),
            format!("noise.nu={nu}"),
            "envelope.alpha=0.5".into(),
            format!("envelope.beta={beta}"),
            "audit.kappa=2".into(),
            "audit.r=2".into(),
            "audit.q=1.5".into(),
            "integrator.filter=1e-13".into(),
        ])
    };

    let mut weak = random(0.5, 0.1)?;
    weak.seed = seeds_in_event(&weak, 0, 1, 1000)?[0];
    let cal = calibrate(&weak, 1.0 / 64.0, 1.0, 4)?;
    println!(
        "nu=0.5: monotone up to mass {:.3}, fails from mass {:.3}",
        8.0 * cal.monotone_scale.unwrap_or(0.0),
        8.0 * cal.failing_scale.unwrap_or(f64::NAN)
    );

    let mut strong = random(4.0, 1.0)?;
    for seed in seeds_in_event(&strong, 0, 3, 1000)? {
        strong.seed = seed;
        let tr = simulate(&strong)?;
        println!("nu=4 seed {seed}: {:?} monotone={:?}", tr.termination, tr.monotone);
    }
    Ok(())
}
