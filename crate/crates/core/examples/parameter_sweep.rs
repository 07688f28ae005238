//! A grid of runs over noise strength and datum amplitude, in parallel.

use active_scalar::config::Preset;
use active_scalar::harness::{sweep, sweep_csv, SweepAxis};

fn main() -> active_scalar::Result<()> {
    let base = Preset::SqgRandom.config().with_overrides(&["integrator.horizon=0.5"])?;
    let axes: Vec<SweepAxis> = ["noise.nu=1,1.5,2", "datum.amplitude=0.001,0.1,10"]
        .iter()
        .map(|a| a.parse())
        .collect::<active_scalar::Result<_>>()?;
    let rows = sweep(&base, &axes, false)?;
    print!("{}", sweep_csv(&axes, &rows)?);
    Ok(())
}
