//! Degree counts `d_q` for prescribed index patterns, cross-checked against
//! direct subset enumeration.

use curvlab::morse::{degree_count, MorseReport};

fn main() -> curvlab::Result<()> {
    for (n, indices) in [
        (3, vec![3, 3]),
        (4, vec![4, 3, 2]),
        (5, vec![5, 5, 4, 3]),
        (6, vec![6, 5, 4, 3, 2, 1]),
    ] {
        let pts: Vec<(f64, usize, f64)> = indices
            .iter()
            .enumerate()
            .map(|(i, m)| (2.0 - 0.01 * i as f64, *m, -1.0))
            .collect();
        let rep = MorseReport::synthetic(n, &pts);
        let d = (1..=indices.len())
            .map(|q| degree_count(&rep, q))
            .collect::<curvlab::Result<Vec<_>>>()?;
        println!("n = {n}, indices {indices:?}: d_q = {d:?}");
    }
    Ok(())
}
