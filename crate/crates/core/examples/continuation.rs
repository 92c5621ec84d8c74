//! τ-continuation of a single bubble at the maximum of `K = 1 + ½ cos θ` on `S^5`.

use curvlab::solver::{continuation, geometric_schedule, ContinuationOptions, Problem};

fn main() -> curvlab::Result<()> {
    let n = 5;
    let problem = Problem::new(n, 2048, 0.08, |t| 1.0 + 0.5 * t.cos())?;
    let schedule = geometric_schedule(0.08, 0.005, 9);
    let seed = vec![1.0; problem.len()];
    let rep = continuation(&problem, &schedule, &seed, &ContinuationOptions::default())?;
    println!(
        "{:>8} {:>12} {:>10} {:>10} {:>6}",
        "tau", "J", "lambda", "theta*", "index"
    );
    for s in &rep.steps {
        println!(
            "{:>8.4} {:>12.6} {:>10.5} {:>10.2e} {:>6}",
            s.tau, s.j, s.lambda, s.theta_star, s.morse_index
        );
    }
    println!(
        "lambda exponent: {:.4}",
        rep.lambda_exponent.unwrap_or(f64::NAN)
    );
    if let Some(c) = &rep.concentration {
        println!(
            "concentration at theta = {:.3}, Delta K = {:.3}, limit energy {:.6}, predicted index {}",
            c.theta, c.laplacian_k, c.limit_energy, c.predicted_index
        );
    }
    println!(
        "extrapolated J = {:.6}, relative gap {:.2e}",
        rep.j_extrapolated.unwrap_or(f64::NAN),
        rep.energy_relative_gap.unwrap_or(f64::NAN)
    );
    println!(
        "c2 mean {:.4}, coefficient of variation {:.3}",
        rep.c2_mean.unwrap_or(f64::NAN),
        rep.c2_cv.unwrap_or(f64::NAN)
    );
    Ok(())
}
