//! Deterministic Patlak-Keller-Segel aggregation without diffusion: the second
//! moment of a Gaussian falls at the virial rate `-M²/2π` until the solution
//! concentrates below the grid scale.
//!
//! Writes `out/pks_blowup.{csv,json}` and one SVG per column.

use std::path::Path;

use active_scalar::config::Preset;
use active_scalar::harness::blowup_demo;
use active_scalar::output::{trajectory_csv, write_bundle};

fn main() -> active_scalar::Result<()> {
    let cfg = Preset::PksBlowup.config();
    let (tr, rep) = blowup_demo(&cfg)?;
    println!("termination: {:?}", tr.termination);
    if let Some(v) = rep.virial {
        println!(
            "second moment slope {:.6} over [{}, {}] ({} points); virial rate {:.6}; relative error {:.2e}",
            v.slope, v.window_start, v.window_end, v.points, v.expected, v.relative_error
        );
    }
    for r in tr.rows.iter().step_by(5) {
        println!(
            "t={:>5.2} V={:.5} resolution={:.2e} boundary={}",
            r.t,
            r.second_moment.unwrap_or(f64::NAN),
            r.resolution_fraction,
            r.boundary_warning
        );
    }
    write_bundle(Path::new("out"), "pks_blowup", &trajectory_csv(&tr)?, &rep, true, "t")
}
