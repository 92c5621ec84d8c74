//! Pinching conditions `(P_m)` and `(P~_m)` for a family of multi-peak
//! curvatures of shrinking oscillation.

use curvlab::cli::KSpec;
use curvlab::morse::{find_critical_points, pinch_report, SearchOptions};

fn main() -> curvlab::Result<()> {
    let n = 5;
    println!(
        "{:>8} {:>10} {:>3}  {:<20} {:<20}",
        "eps", "Kmax/Kmin", "l", "(P_m)", "(P~_m)"
    );
    for eps in [0.4, 0.2, 0.1, 0.05, 0.02] {
        let k = KSpec::PinchedMultiPeak { eps, delta: 0.1 }.build(n)?;
        let rep = find_critical_points(k.as_ref(), &SearchOptions::default())?;
        let pr = pinch_report(&rep)?;
        let marks = |v: &[bool]| {
            v.iter()
                .map(|b| if *b { '+' } else { '.' })
                .collect::<String>()
        };
        println!(
            "{:>8} {:>10.6} {:>3}  {:<20} {:<20}",
            eps,
            pr.k_max / pr.k_min,
            pr.ordered_values.len(),
            marks(&pr.holds_pm),
            marks(&pr.holds_tpm)
        );
    }
    Ok(())
}
