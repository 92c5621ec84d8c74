//! Solver behaviour on multi-peak and critical (`τ = 0`) problems.

use std::f64::consts::PI;

use curvlab::bubbles::sphere_bubble;
use curvlab::solver::{flow, newton_refine, FlowOptions, NewtonOptions, Problem};
use curvlab::sphere::SpherePoint;

/// Symmetric two-bubble start at both poles.
fn two_bubbles(pr: &Problem, lambda: f64) -> Vec<f64> {
    let b = sphere_bubble(SpherePoint::north(pr.n), lambda).unwrap();
    pr.theta()
        .iter()
        .map(|t| b.of_angle(*t) + b.of_angle(PI - *t))
        .collect()
}

#[test]
fn two_bubble_state_has_index_one() {
    // maxima at both poles with ΔK = -2n < 0; q = 2 predicts index (q-1) + Σ(n - n) = 1
    let n = 5;
    let k = |t: f64| 1.0 + t.cos().powi(2);
    let mut lambdas = Vec::new();
    for tau in [0.005, 0.002] {
        let pr = Problem::new(n, 4096, tau, k).unwrap();
        let rep = newton_refine(&pr, &two_bubbles(&pr, 12.0), &NewtonOptions::default()).unwrap();
        let v = &rep.u_final.values;
        let (north, equator, south) = (v[0], v[v.len() / 2], v[v.len() - 1]);
        assert!(rep.converged && rep.grad_norm < 1e-10);
        assert!(
            (north / south - 1.0).abs() < 1e-8,
            "asymmetric: {north} {south}"
        );
        assert!(north / equator > 1e3, "not concentrated: {north} {equator}");
        assert_eq!(rep.morse_index_total, 1);
        assert_eq!(rep.hessian_sector_indices[0].negative, 1);
        lambdas.push((tau, north.powf(2.0 / (n as f64 - 2.0))));
    }
    let slope = (lambdas[1].1 / lambdas[0].1).ln() / (lambdas[1].0 / lambdas[0].0).ln();
    assert!((slope + 0.5).abs() < 0.1, "lambda exponent {slope}");
}

#[test]
fn bubble_at_a_positive_laplacian_point_does_not_persist() {
    // τ = 0, height function: the south pole is a minimum with ΔK = n > 0
    let n = 5;
    let pr = Problem::new(n, 2048, 0.0, |t| 1.0 + 0.5 * t.cos()).unwrap();
    let south = sphere_bubble(SpherePoint::south(n), 8.0).unwrap();
    let u0: Vec<f64> = pr.theta().iter().map(|t| south.of_angle(PI - *t)).collect();
    let res = flow(
        &pr,
        &u0,
        &FlowOptions {
            max_steps: 5000,
            ..Default::default()
        },
    )
    .unwrap();
    let start = pr.normalize(&u0);
    let u = &res.u;
    let last = u.len() - 1;
    let argmax = (0..u.len()).max_by(|a, b| u[*a].total_cmp(&u[*b])).unwrap();
    assert!(
        u[last] < 1e-2 * start[last],
        "south peak kept: {} -> {}",
        start[last],
        u[last]
    );
    assert!(
        pr.theta()[argmax] < 0.1,
        "peak at theta {}",
        pr.theta()[argmax]
    );
    assert!(res.j < res.trace[0].j);
    assert!(res.trace.windows(2).all(|w| w[1].j < w[0].j));
}
