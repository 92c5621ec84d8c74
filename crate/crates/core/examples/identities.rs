//! Integral identities: radial and translational Pohozaev balances on balls
//! and the Kazdan-Warner identity for bubbles on the sphere.

use std::sync::Arc;

use curvlab::bubbles::{sphere_bubble, BubbleParams, EuclideanBubble};
use curvlab::identities::{
    kazdan_warner_equation_form, pohozaev_residual, pohozaev_translational, BallGridFunction,
    BallResolution, ConstantEuclidean, EuclideanField,
};
use curvlab::sphere::quadrature::SphereQuadrature;
use curvlab::sphere::SpherePoint;

fn main() -> curvlab::Result<()> {
    let n = 5;
    let k: Arc<dyn EuclideanField> = Arc::new(ConstantEuclidean {
        n,
        c: 4.0 * 5.0 * 4.0,
    });
    let shifted: Arc<dyn EuclideanField> = Arc::new(EuclideanBubble(BubbleParams::new(
        vec![0.0, 0.0, 0.0, 0.0, 0.3],
        10.0,
    )?));
    let centred: Arc<dyn EuclideanField> =
        Arc::new(EuclideanBubble(BubbleParams::new(vec![0.0; n], 10.0)?));
    let f = BallGridFunction::new(centred, k.clone(), BallResolution::default())?;
    let g = BallGridFunction::new(shifted, k, BallResolution::default())?;
    println!(
        "{:>5} {:>14} {:>14} {:>11} {:>11}",
        "r", "volume", "boundary", "radial", "transl x5"
    );
    for r in [0.25, 0.5, 1.0, 2.0] {
        let p = pohozaev_residual(&f, r)?;
        let t = pohozaev_translational(&g, r, n - 1)?;
        println!(
            "{:>5} {:>14.6e} {:>14.6e} {:>11.1e} {:>11.1e}",
            r,
            p.volume_term,
            p.boundary_k_term + p.boundary_b_term,
            p.residual,
            t
        );
    }
    println!("Kazdan-Warner, max over the n+1 coordinate functions:");
    for (theta, lambda) in [(0.0, 1.0), (0.7, 3.0), (2.0, 10.0), (3.0, 30.0)] {
        let center = SpherePoint::from_polar(n, theta);
        let u = sphere_bubble(center.clone(), lambda)?;
        let quad = SphereQuadrature::zonal(n, 256, 4, center.coords());
        let mut worst = 0.0f64;
        for i in 0..=n {
            let mut c = vec![0.0; n + 1];
            c[i] = 1.0;
            worst = worst.max(kazdan_warner_equation_form(&u, &c, &quad)?.abs());
        }
        println!("  centre at polar angle {theta}, lambda {lambda:>4}: {worst:.1e}");
    }
    Ok(())
}
