//! Critical points of a pinched multi-peak curvature on `S^5`: Morse
//! indices, Laplacians, the Euler count and the index-sum obstruction.

use curvlab::cli::KSpec;
use curvlab::morse::{find_critical_points, index_formula, SearchOptions};

fn main() -> curvlab::Result<()> {
    let n = 5;
    let k = KSpec::pinched().build(n)?;
    let rep = find_critical_points(k.as_ref(), &SearchOptions::default())?;
    println!(
        "{:>4} {:>12} {:>6} {:>12} {:>10}",
        "#", "K", "index", "lap K", "margin"
    );
    for (i, r) in rep.records.iter().enumerate() {
        println!(
            "{:>4} {:>12.8} {:>6} {:>12.4e} {:>10.2e}",
            i, r.value, r.morse_index, r.laplacian, r.hessian_margin
        );
    }
    println!("counts M_j = {:?}", rep.counts);
    println!(
        "sum (-1)^j M_j = {} (expected {})",
        rep.euler_check,
        rep.expected_euler()
    );
    let idx = index_formula(&rep);
    println!(
        "sum over lap K < 0 of (-1)^m = {}; differs from (-1)^n: {}",
        idx.sum, idx.satisfied
    );
    Ok(())
}
