//! Standard bubbles: the Yamabe constant, exactness of the bubble equation,
//! Kelvin inversion and invariance of the critical norm.

use curvlab::bubbles::{
    bubble_pde_residual, bubble_pde_residual_exact, critical_norm, euclidean_bubble_mass,
    kelvin_invert, kelvin_transform_value, sobolev_constant, standard_bubble, BubbleParams,
};

fn main() -> curvlab::Result<()> {
    println!(
        "{:>3} {:>14} {:>10} {:>10} {:>16}",
        "n", "c_hat0", "residual", "fd order", "critical norm"
    );
    for n in 3..=8 {
        let s = sobolev_constant(n)?;
        let p = BubbleParams::new(vec![0.1; n], 1.5)?;
        let x: Vec<f64> = (0..n).map(|i| 0.3 - 0.1 * i as f64).collect();
        let exact = bubble_pde_residual_exact(&p, &x);
        let (r1, r2) = (
            bubble_pde_residual(&p, &x, 0.02),
            bubble_pde_residual(&p, &x, 0.01),
        );
        let norm = critical_norm(|y| standard_bubble(y, &p).0, &p.a, p.lambda);
        println!(
            "{:>3} {:>14.10} {:>10.1e} {:>10.3} {:>16.12}",
            n,
            s.c_hat0,
            exact,
            (r1 / r2).log2(),
            norm / euclidean_bubble_mass(n)
        );
    }
    let p = BubbleParams::new(vec![0.4, -0.2, 0.7], 2.5)?;
    let mu = 1.3;
    let q = kelvin_invert(&p, mu)?;
    let back = kelvin_invert(&q, mu)?;
    println!(
        "Kelvin image of (a = {:?}, lambda = {}): a = {:.6?}, lambda = {:.6}",
        p.a, p.lambda, q.a, q.lambda
    );
    println!(
        "applied twice: a = {:.6?}, lambda = {:.6}",
        back.a, back.lambda
    );
    let x = [0.9, 0.1, -0.5];
    println!(
        "pointwise: K_mu u(x) = {:.12}, bubble of the image {:.12}",
        kelvin_transform_value(&p, mu, &x),
        standard_bubble(&x, &q).0
    );
    Ok(())
}
