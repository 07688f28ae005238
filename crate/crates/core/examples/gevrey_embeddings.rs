//! Embedding constants between Gevrey and Fourier-Lebesgue norms, checked as
//! computed inequalities on a random field.

use active_scalar::datum::DatumSpec;
use active_scalar::multipliers::NoiseSpec;
use active_scalar::norms::{
    fourier_lebesgue_norm, gevrey_norm, grid_holder_constant, shift_bound, smoothing_bound, NormSpec,
};
use active_scalar::spectral::GridSpec;

fn main() -> active_scalar::Result<()> {
    let grid = GridSpec::new(2, 32, 8.0)?;
    let f = DatumSpec::Random { amplitude: 1.0, radius: 0.3, seed: 5 }.build(&grid)?;
    let noise = NoiseSpec::new(0.75, 1.0)?;

    println!("shift: |F|_(a,k) <= e^(a-a') |F|_(a',k')");
    for (a, ap) in [(0.0, 0.1), (0.1, 0.5), (0.2, 1.0)] {
        let lhs = gevrey_norm(&f, &NormSpec::new(a, 1.0, 2.0)?, &noise);
        let rhs = shift_bound(a, ap) * gevrey_norm(&f, &NormSpec::new(ap, 1.5, 2.0)?, &noise);
        println!("  a={a} a'={ap}: {lhs:.6e} <= {rhs:.6e}");
    }

    println!("smoothing: |F|_(a,k') <= m!/(a'-a)^m |F|_(a',k)");
    for (kappa, kp) in [(0.0, 1.0), (0.0, 2.5), (1.0, 4.0)] {
        let lhs = gevrey_norm(&f, &NormSpec::new(0.1, kp, 3.0)?, &noise);
        let rhs = smoothing_bound(0.1, 0.6, kappa, kp) * gevrey_norm(&f, &NormSpec::new(0.6, kappa, 3.0)?, &noise);
        println!("  k={kappa} k'={kp}: {lhs:.6e} <= {rhs:.6e}");
    }

    println!("grid Hoelder: |F|_(W^(k,p)) <= C |F|_(W^(k+delta,r))");
    for (delta, p, r) in [(1.0, 1.0, 2.0), (2.0, 1.0, f64::INFINITY), (0.5, 2.0, 4.0)] {
        let c = grid_holder_constant(&grid, delta, p, r);
        let lhs = fourier_lebesgue_norm(&f, 0.5, p);
        let rhs = c * fourier_lebesgue_norm(&f, 0.5 + delta, r);
        println!("  delta={delta} p={p} r={r}: C={c:.4} {lhs:.6e} <= {rhs:.6e}");
    }
    Ok(())
}
