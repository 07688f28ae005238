//! Parameter feasibility: single queries with their condition breakdown, the
//! κ threshold, and a (γ, σ) region drawn in the terminal.

use active_scalar::admissibility::{
    check, check_lwp, kappa_threshold, scan_region, AdmissibilityQuery, Param, ScanAxis,
};

fn main() -> active_scalar::Result<()> {
    let q = AdmissibilityQuery::new(2, 1.0, 1.0, 2.0).with_sigma(0.9).with_kappa(1.5);
    let rep = check(&q)?;
    println!("d=2 gamma=1 s=1 r=2 sigma=0.9 kappa=1.5 -> {}", rep.verdict);
    for c in &rep.conditions {
        let w = c.witness.map(|p| format!(" witness p={p:.4}")).unwrap_or_default();
        println!("  {:<14} {:<5} {}{w}", c.name, c.holds, c.inequality);
    }
    println!("  max r for the local theory: {:?}", rep.max_r);

    for (d, gamma, s, r) in [(2, 2.0, 1.0, 1.0), (2, 1.0, 1.0, 2.0), (1, 0.5, 0.75, 4.0), (2, 2.5, 1.0, f64::INFINITY)] {
        println!("kappa threshold d={d} gamma={gamma} s={s} r={r}: {}", kappa_threshold(d, gamma, s, r));
    }

    let boundary = check_lwp(&AdmissibilityQuery::new(2, 1.0, 1.0, 2.0).with_sigma(0.5))?;
    for c in boundary.boundary_cases() {
        println!("boundary case at sigma=0.5: {} ({})", c.name, c.inequality);
    }

    let base = AdmissibilityQuery::new(2, 1.0, 1.0, 1.0).with_sigma(0.5).with_q(1.5);
    let x = ScanAxis::midpoints(Param::Gamma, 0.0, 3.0, 48);
    let y = ScanAxis::midpoints(Param::Sigma, 0.0, 1.2, 16);
    let table = scan_region(&base, &x, &y)?;
    println!("admissible (#) over gamma in (0,3) across, sigma in (0,1.2) up, d=2 s=1 r=1:");
    for j in (0..y.values.len()).rev() {
        let line: String = (0..x.values.len())
            .map(|i| if table.cells[i * y.values.len() + j].admissible { '#' } else { '.' })
            .collect();
        println!("  {:>5.3} {line}", y.values[j]);
    }
    Ok(())
}
