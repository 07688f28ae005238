//! The zero mode of the Itô-transformed unknown decays exactly like
//! `e^{-ν²t/2}`, while the zero mode of θ follows `e^{νW^t}` times it.

use active_scalar::config::Preset;
use active_scalar::harness::simulate;

fn main() -> active_scalar::Result<()> {
    let cfg = Preset::AggregationRandom.config().with_overrides(&["output.stride=50"])?;
    let tr = simulate(&cfg)?;
    let nu = cfg.noise.nu;
    let m0 = tr.rows[0].mass_mu;
    println!("{:>6} {:>22} {:>22} {:>16}", "t", "mu(0)/mu0(0)", "exp(-nu^2 t/2)", "theta/mu-e^nuW");
    for r in &tr.rows {
        println!(
            "{:>6.3} {:>22.16e} {:>22.16e} {:>16.3e}",
            r.t,
            r.mass_mu / m0,
            (-nu * nu * r.t / 2.0).exp(),
            r.mass_theta / r.mass_mu - (nu * r.w).exp()
        );
    }
    Ok(())
}
