//! Bisection for the largest datum scale that still gives a monotone audited
//! norm along a fixed path.

use active_scalar::config::Preset;
use active_scalar::harness::{calibrate, seeds_in_event};

fn main() -> active_scalar::Result<()> {
    let mut cfg = Preset::SqgRandom.config().with_overrides(&["integrator.horizon=0.5"])?;
    cfg.seed = seeds_in_event(&cfg, 0, 1, 100)?[0];
    let cal = calibrate(&cfg, 1.0, 1e7, 10)?;
    for (scale, ok) in &cal.evaluations {
        println!("scale {scale:>12.4} monotone {ok}");
    }
    println!("threshold between {:?} and {:?}", cal.monotone_scale, cal.failing_scale);
    Ok(())
}
