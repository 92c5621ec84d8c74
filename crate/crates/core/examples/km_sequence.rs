//! Builds `K_0..K_8` for the 2-point and 3-point templates on `S^5` and
//! verifies the critical structure, the Laplacian bound on `U` and the `C³` decay.

use std::time::Instant;

use curvlab::kmfactory::{assemble_km, verify_km, KmParams, VerifyOptions};

fn main() -> curvlab::Result<()> {
    for counts in [vec![1, 0, 0, 0, 0, 1], vec![2, 1, 0, 0, 0, 1]] {
        let start = Instant::now();
        let params = KmParams::new(5, counts.clone());
        let fields = (0..=8)
            .map(|m| assemble_km(&params, m))
            .collect::<curvlab::Result<Vec<_>>>()?;
        let rep = verify_km(&fields, &VerifyOptions::default())?;
        println!("template {counts:?}: c = {:.3e}", rep.clause_b.c);
        println!(
            "{:>3} {:>20} {:>11} {:>11} {:>11}",
            "m", "counts", "radius", "min lap", "C3 dist"
        );
        for (i, a) in rep.clause_a.members.iter().enumerate() {
            println!(
                "{:>3} {:>20} {:>11.3e} {:>11.3e} {:>11.3e}",
                a.m,
                format!("{:?}", a.counts),
                a.cluster_radius,
                rep.clause_b.min_laplacian[i],
                rep.clause_c.distances[i]
            );
        }
        let vals: Vec<f64> = fields[0].analytic_crits.iter().map(|r| r.value).collect();
        let pinch = vals.iter().cloned().fold(f64::MIN, f64::max)
            / vals.iter().cloned().fold(f64::MAX, f64::min);
        println!(
            "(a) {} (b) {} (c) {}  pinch {:.5}  {:.1}s",
            rep.clause_a.passed,
            rep.clause_b.passed,
            rep.clause_c.passed,
            pinch,
            start.elapsed().as_secs_f64()
        );
        for f in &rep.failures {
            println!("  {f}");
        }
    }
    Ok(())
}
