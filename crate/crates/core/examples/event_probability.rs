//! Probability that `νW^t` stays below the line `α + βt`: closed form against
//! bridge-corrected Monte Carlo.
//!
//!     cargo run --release --example event_probability -- 20000

use active_scalar::harness::{event_csv, event_table};
use active_scalar::paths::{event_membership, event_probability, sample_path, EventSpec};

fn main() -> active_scalar::Result<()> {
    let paths: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let events = [
        EventSpec::new(1.0, 1.0, 2f64.sqrt())?,
        EventSpec::new(1.0, 0.45, 1.0)?,
        EventSpec::new(0.5, 1.0, 2.0)?,
    ];
    for e in &events {
        println!(
            "alpha={} beta={} nu={:.4}: P = 1 - exp(-2 alpha beta / nu^2) = {:.7}",
            e.alpha,
            e.beta,
            e.nu,
            event_probability(e)
        );
    }

    let rows = event_table(&events, paths, 1e-3, 20.0, true, 7)?;
    print!("{}", event_csv(&rows)?);

    // the bridge correction catches crossings between grid points
    let e = events[0];
    let (mut plain, mut bridged) = (0, 0);
    for seed in 0..500 {
        let path = sample_path(0.05, 20.0, seed)?;
        plain += event_membership(&path, &e, false).in_event as u32;
        bridged += event_membership(&path, &e, true).in_event as u32;
    }
    println!("coarse grid dt=0.05, 500 paths: in event {plain} without bridge, {bridged} with bridge");
    Ok(())
}
