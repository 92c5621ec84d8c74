//! Subcritical solutions for the height function `K = 1 + x_{n+1}/2`:
//! gradient flow from a constant, Newton refinement and the Hessian spectrum.

use curvlab::solver::{flow, newton_refine, FlowOptions, NewtonOptions, Problem};
use curvlab::sphere::AxisymPolyField;

fn main() -> curvlab::Result<()> {
    let n = 5;
    let k = AxisymPolyField {
        n,
        coeffs: vec![1.0, 0.5],
    };
    println!(
        "{:>6} {:>14} {:>8} {:>10} {:>8} {:>6}",
        "tau", "J", "steps", "gradient", "peak", "index"
    );
    for tau in [0.1, 0.05, 0.02, 0.01] {
        let pr = Problem::from_field(&k, 2048, tau)?;
        let fl = flow(
            &pr,
            &vec![1.0; pr.len()],
            &FlowOptions {
                tol: 1e-4,
                ..Default::default()
            },
        )?;
        let rep = newton_refine(&pr, &fl.u, &NewtonOptions::default())?;
        println!(
            "{:>6} {:>14.8} {:>8} {:>10.1e} {:>8.4} {:>6}",
            tau,
            rep.j_value,
            fl.trace.len(),
            rep.grad_norm,
            rep.peak_value,
            rep.morse_index_total
        );
    }
    Ok(())
}
