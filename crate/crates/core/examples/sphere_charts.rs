//! Stereographic charts and Möbius dilations on `S^3`.

use curvlab::sphere::{mobius_dilate, stereo_lift, stereo_project, Pole, SpherePoint};

fn main() -> curvlab::Result<()> {
    let p = SpherePoint::new(vec![0.48, -0.36, 0.0, 0.8])?;
    for pole in [Pole::North, Pole::South] {
        let y = stereo_project(&p, pole)?;
        let back = stereo_lift(&y);
        println!(
            "{pole:?} chart: y = {:.6?}, lift error {:.1e}",
            y.y,
            back.geodesic_distance(&p)
        );
    }
    println!(
        "{:>8} {:>12} {:>22}",
        "t", "polar angle", "distance to south pole"
    );
    for t in [4.0, 1.0, 0.25, 0.01] {
        let q = mobius_dilate(&p, t)?;
        println!(
            "{:>8} {:>12.6} {:>22.3e}",
            t,
            q.polar_angle(),
            q.geodesic_distance(&SpherePoint::south(3))
        );
    }
    Ok(())
}
