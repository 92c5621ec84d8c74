//! Periodic Fowler orbits: period against energy, Hamiltonian drift and the
//! flux identity of the lifted radial solution.

use curvlab::fowler::{equilibrium, flux_identity, integrate, period, FowlerSystem};

fn main() -> curvlab::Result<()> {
    let sys = FowlerSystem::new(6, 4.0)?;
    let (v0, h0) = equilibrium(6, 4.0)?;
    println!(
        "v0 = {v0:.10}, H0 = {h0:.10}, small-orbit period {:.10}",
        sys.linear_period()
    );
    println!(
        "{:>10} {:>14} {:>10} {:>10}",
        "H", "period", "drift", "flux res"
    );
    for frac in [0.99, 0.9, 0.5, 0.1, 0.01, 0.001] {
        let h = h0 * frac;
        let per = period(&sys, h)?;
        let (_, v_max) = sys.turning_points(h)?;
        let traj = integrate(&sys, v_max, 0.0, (0.0, (2.0 * per).max(5.0)), 0.01, 1e-9)?;
        let flux = flux_identity(&sys, &traj, 2.0)?;
        println!(
            "{:>10.5} {:>14.8} {:>10.2e} {:>10.2e}",
            h, per, traj.drift, flux.residual
        );
    }
    Ok(())
}
