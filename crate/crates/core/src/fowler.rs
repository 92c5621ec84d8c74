//! Radial singular solutions of `-Δu = κ u^{(n+2)/(n-2)}` through the
//! Emden–Fowler substitution `u(x) = |x|^{-(n-2)/2} v(log|x|)`.
//!
//! `v` obeys the Newton equation `v'' = -V'(v)` with
//! `V(v) = κ(n-2)/(2n) v^{2n/(n-2)} - ((n-2)/2)^2 v^2 / 2`, so the
//! Hamiltonian `H = v'^2/2 + V(v)` is conserved.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::identities::boundary_term_b;
use crate::sphere::quadrature::integrate_gl;
use crate::sphere::sphere_volume;

/// The Newton system for one `(n, κ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FowlerSystem {
    pub n: usize,
    pub kappa: f64,
    /// Equilibrium `v_0`.
    pub v0: f64,
    /// `H_0 = V(v_0)`.
    pub h0: f64,
}

/// `(v_0, H_0)` for the given dimension and coefficient.
pub fn equilibrium(n: usize, kappa: f64) -> Result<(f64, f64)> {
    if n < 3 {
        return domain(format!("dimension must be at least 3, got {n}"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return domain(format!("kappa must be positive, got {kappa}"));
    }
    let nf = n as f64;
    let base = ((nf - 2.0) / 2.0).powi(2) / kappa;
    Ok((
        base.powf((nf - 2.0) / 4.0),
        -kappa / nf * base.powf(nf / 2.0),
    ))
}

impl FowlerSystem {
    pub fn new(n: usize, kappa: f64) -> Result<Self> {
        let (v0, h0) = equilibrium(n, kappa)?;
        Ok(Self { n, kappa, v0, h0 })
    }

    /// `(n-2)/2`.
    pub fn a(&self) -> f64 {
        (self.n as f64 - 2.0) / 2.0
    }

    pub fn two_star(&self) -> f64 {
        2.0 * self.n as f64 / (self.n as f64 - 2.0)
    }

    pub fn potential(&self, v: f64) -> f64 {
        let a = self.a();
        self.kappa / self.two_star() * v.abs().powf(self.two_star()) - 0.5 * a * a * v * v
    }

    pub fn potential_prime(&self, v: f64) -> f64 {
        let a = self.a();
        self.kappa * v.abs().powf(self.two_star() - 1.0) * v.signum() - a * a * v
    }

    pub fn potential_second(&self, v: f64) -> f64 {
        let a = self.a();
        self.kappa * (self.two_star() - 1.0) * v.abs().powf(self.two_star() - 2.0) - a * a
    }

    pub fn hamiltonian(&self, v: f64, vp: f64) -> f64 {
        0.5 * vp * vp + self.potential(v)
    }

    /// Small-oscillation period `2π/√(n-2)`.
    pub fn linear_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 - 2.0).sqrt()
    }

    /// The turning points `v_- < v_0 < v_+` of the orbit with energy `H`.
    pub fn turning_points(&self, h: f64) -> Result<(f64, f64)> {
        if !(h > self.h0 && h < 0.0) {
            return domain(format!("energy {h} outside ({}, 0)", self.h0));
        }
        let g = |v: f64| self.potential(v) - h;
        let lo = bisect(g, 0.0, self.v0);
        let mut hi = 2.0 * self.v0;
        while g(hi) < 0.0 {
            hi *= 2.0;
        }
        Ok((lo, bisect(g, self.v0, hi)))
    }

    fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        [y[1], -self.potential_prime(y[0])]
    }

    fn rk4(&self, y: [f64; 2], dt: f64) -> [f64; 2] {
        let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
        let k1 = self.rhs(y);
        let k2 = self.rhs(add(y, k1, dt / 2.0));
        let k3 = self.rhs(add(y, k2, dt / 2.0));
        let k4 = self.rhs(add(y, k3, dt));
        [
            y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }
}

/// Bisection for a sign change of `g` on `[a, b]`.
fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (g(m) > 0.0) == (ga > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// A sampled solution of the Newton equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FowlerTrajectory {
    pub system: FowlerSystem,
    /// `(t, v, v')`.
    pub samples: Vec<(f64, f64, f64)>,
    /// Hamiltonian of the initial data.
    pub h: f64,
    /// `max |H(t) - H|` over the samples.
    pub drift: f64,
    /// Step actually used after halving.
    pub dt: f64,
    /// The orbit reached `v ≤ 0` and was stopped there.
    pub left_positive_branch: bool,
}

impl FowlerTrajectory {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "v", "vprime", "H"])?;
        for &(t, v, vp) in &self.samples {
            let h = self.system.hamiltonian(v, vp);
            w.write_record([t, v, vp, h].map(|x| format!("{x:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// `(v, v')` at time `t`, by one RK4 step from the nearest earlier sample.
    pub fn state_at(&self, t: f64) -> Result<(f64, f64)> {
        let (t0, t1) = (self.samples[0].0, self.samples[self.samples.len() - 1].0);
        if t < t0 - 1e-12 || t > t1 + 1e-12 {
            return domain(format!(
                "time {t} outside the trajectory window [{t0}, {t1}]"
            ));
        }
        let j = self.samples.partition_point(|s| s.0 <= t).saturating_sub(1);
        let (tj, v, vp) = self.samples[j];
        let y = self.system.rk4([v, vp], t - tj);
        Ok((y[0], y[1]))
    }
}

/// Fixed-step RK4 over `[t0, t1]`, halving `dt` until the Hamiltonian drift
/// is below `tol` (at most 20 halvings).
pub fn integrate(
    system: &FowlerSystem,
    v_init: f64,
    vprime_init: f64,
    t_span: (f64, f64),
    dt: f64,
    tol: f64,
) -> Result<FowlerTrajectory> {
    if !(dt > 0.0) || !(t_span.1 > t_span.0) {
        return domain("need dt > 0 and t1 > t0");
    }
    let mut dt = dt;
    let mut last = None;
    for _ in 0..=20 {
        let traj = integrate_fixed(system, v_init, vprime_init, t_span, dt);
        if traj.drift < tol || traj.left_positive_branch {
            return Ok(traj);
        }
        last = Some(traj);
        dt *= 0.5;
    }
    Ok(last.expect("at least one pass"))
}

/// One pass of RK4 with a fixed step; the last step is shortened to land on `t1`.
pub fn integrate_fixed(
    system: &FowlerSystem,
    v_init: f64,
    vprime_init: f64,
    t_span: (f64, f64),
    dt: f64,
) -> FowlerTrajectory {
    let h = system.hamiltonian(v_init, vprime_init);
    let steps = ((t_span.1 - t_span.0) / dt).ceil() as usize;
    let step = (t_span.1 - t_span.0) / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut y = [v_init, vprime_init];
    let mut drift: f64 = 0.0;
    let mut left = false;
    samples.push((t_span.0, y[0], y[1]));
    for k in 1..=steps {
        y = system.rk4(y, step);
        if !(y[0] > 0.0) {
            left = true;
            break;
        }
        drift = drift.max((system.hamiltonian(y[0], y[1]) - h).abs());
        samples.push((t_span.0 + k as f64 * step, y[0], y[1]));
    }
    FowlerTrajectory {
        system: *system,
        samples,
        h,
        drift,
        dt: step,
        left_positive_branch: left,
    }
}

/// Period of the orbit with energy `H ∈ (H_0, 0)`.
///
/// The half period splits at `v_0`; the inner piece uses `v = v_- cosh s`
/// and the outer `v = v_+ - (v_+ - v_0)(1 - cos φ)`, both of which remove
/// the inverse square-root singularities at the turning points.
pub fn period(system: &FowlerSystem, h: f64) -> Result<f64> {
    let (vm, vp) = system.turning_points(h)?;
    let rate = |v: f64| (2.0 * (h - system.potential(v))).max(0.0).sqrt();
    let s_max = (system.v0 / vm).acosh();
    let inner = |s: f64| {
        let v = vm * s.cosh();
        let r = rate(v);
        if r > 0.0 {
            vm * s.sinh() / r
        } else {
            0.0
        }
    };
    let outer = |phi: f64| {
        let v = vp - (vp - system.v0) * (1.0 - phi.cos());
        let r = rate(v);
        if r > 0.0 {
            (vp - system.v0) * phi.sin() / r
        } else {
            0.0
        }
    };
    let panels_in = ((s_max / 0.05).ceil() as usize).max(8);
    let half = integrate_gl(inner, 0.0, s_max, 16, panels_in)
        + integrate_gl(outer, 0.0, std::f64::consts::FRAC_PI_2, 16, 32);
    Ok(2.0 * half)
}

/// Radial samples of `u_H(r) = r^{-(n-2)/2} v(log r)` and `u_H'(r)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

pub fn lift_to_radial(trajectory: &FowlerTrajectory) -> RadialProfile {
    let a = trajectory.system.a();
    let mut out = RadialProfile {
        r: vec![],
        u: vec![],
        du: vec![],
    };
    for &(t, v, vp) in &trajectory.samples {
        let r = t.exp();
        out.r.push(r);
        out.u.push(r.powf(-a) * v);
        out.du.push(r.powf(-a - 1.0) * (vp - a * v));
    }
    out
}

/// Result of the flux conservation check on `∂B_r`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FluxCheck {
    pub r: f64,
    pub flux: f64,
    /// `|S^{n-1}| H`.
    pub omega_h: f64,
    pub residual: f64,
}

/// `(1/2^*)∮⟨x,ν⟩κu^{2^*} + ∮B(r,x,u,∇u)` on the sphere of radius `r`,
/// compared with `|S^{n-1}| H`.
pub fn flux_identity(
    system: &FowlerSystem,
    trajectory: &FowlerTrajectory,
    r: f64,
) -> Result<FluxCheck> {
    if !(r > 0.0) {
        return domain("radius must be positive");
    }
    let (v, vp) = trajectory.state_at(r.ln())?;
    let a = system.a();
    let n = system.n;
    let u = r.powf(-a) * v;
    let du = r.powf(-a - 1.0) * (vp - a * v);
    // radial data: the integrand is constant on ∂B_r, evaluate at x = r e_1
    let mut x = vec![0.0; n];
    x[0] = r;
    let mut grad = vec![0.0; n];
    grad[0] = du;
    let mut nu = vec![0.0; n];
    nu[0] = 1.0;
    let area = sphere_volume(n - 1) * r.powi(n as i32 - 1);
    let k_term = r * system.kappa * u.abs().powf(system.two_star()) / system.two_star();
    let flux = area * (k_term + boundary_term_b(n, &x, &nu, u, &grad));
    let omega_h = sphere_volume(n - 1) * trajectory.h;
    Ok(FluxCheck {
        r,
        flux,
        omega_h,
        residual: (flux - omega_h).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn equilibrium_values_for_six_and_four() {
        let (v0, h0) = equilibrium(6, 4.0).unwrap();
        assert_eq!(v0, 1.0);
        assert!((h0 + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_is_critical_with_curvature_n_minus_two() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let n = rng.random_range(3..12);
            let kappa = 0.1 + 10.0 * rng.random::<f64>();
            let s = FowlerSystem::new(n, kappa).unwrap();
            assert!(s.potential_prime(s.v0).abs() < 1e-12 * (1.0 + s.v0));
            assert!((s.potential_second(s.v0) - (n as f64 - 2.0)).abs() < 1e-10);
            assert!((s.potential(s.v0) - s.h0).abs() < 1e-12 * s.h0.abs());
            assert!(s.h0 < 0.0);
        }
        assert!(equilibrium(5, 0.0).is_err());
    }

    #[test]
    fn equilibrium_trajectory_is_constant() {
        let s = FowlerSystem::new(6, 4.0).unwrap();
        let t = integrate(&s, s.v0, 0.0, (0.0, 10.0), 0.01, 1e-14).unwrap();
        assert!(t.drift < 1e-14);
        assert!(t.samples.iter().all(|p| (p.1 - 1.0).abs() < 1e-14));
    }

    #[test]
    fn period_small_oscillation_limit() {
        for n in [3, 5, 6, 9] {
            let s = FowlerSystem::new(n, 2.0).unwrap();
            let p = period(&s, s.h0 * (1.0 - 1e-6)).unwrap();
            assert!((p / s.linear_period() - 1.0).abs() < 1e-3, "n={n} p={p}");
        }
        let s = FowlerSystem::new(6, 4.0).unwrap();
        assert!((period(&s, s.h0 * (1.0 - 1e-6)).unwrap() - PI).abs() < 1e-3 * PI);
    }

    #[test]
    fn period_matches_simulated_return_time() {
        let s = FowlerSystem::new(5, 1.0).unwrap();
        let h = 0.5 * s.h0;
        let (vm, _) = s.turning_points(h).unwrap();
        let p = period(&s, h).unwrap();
        let traj = integrate(&s, vm, 0.0, (0.0, p), 1e-3, 1e-10).unwrap();
        let end = traj.samples.last().unwrap();
        assert!((end.1 - vm).abs() < 1e-6 && end.2.abs() < 1e-5);
    }

    #[test]
    fn period_domain_errors() {
        let s = FowlerSystem::new(6, 4.0).unwrap();
        assert!(period(&s, 0.1).is_err());
        assert!(period(&s, s.h0 * 1.1).is_err());
    }

    #[test]
    fn flux_of_equilibrium() {
        let s = FowlerSystem::new(6, 4.0).unwrap();
        let t = integrate(&s, s.v0, 0.0, (-5.0, 5.0), 0.01, 1e-12).unwrap();
        let f = flux_identity(&s, &t, 1.0).unwrap();
        assert!((f.flux - PI.powi(3) * (-2.0 / 3.0)).abs() < 1e-8);
        assert!(f.residual < 1e-8);
    }

    #[test]
    fn lifted_profile_solves_the_pde() {
        let s = FowlerSystem::new(5, 1.0).unwrap();
        let (vm, _) = s.turning_points(0.5 * s.h0).unwrap();
        let t = integrate(&s, vm, 0.0, (-2.0, 2.0), 1e-3, 1e-13).unwrap();
        let prof = lift_to_radial(&t);
        let p = (s.n as f64 + 2.0) / (s.n as f64 - 2.0);
        let nm1 = s.n as f64 - 1.0;
        for j in (500..prof.r.len() - 500).step_by(97) {
            let (r0, r1, r2) = (prof.r[j - 1], prof.r[j], prof.r[j + 1]);
            let d2 = (prof.du[j + 1] - prof.du[j - 1]) / (r2 - r0);
            let res = d2 + nm1 / r1 * prof.du[j] + s.kappa * prof.u[j].powf(p);
            let scale = s.kappa * prof.u[j].powf(p);
            assert!(res.abs() < 1e-5 * scale, "r={r1} res={res}");
        }
        let cmin = t.samples.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        for (r, u) in prof.r.iter().zip(&prof.u) {
            assert!(*u >= cmin * r.powf(-s.a()) * (1.0 - 1e-12));
        }
    }
}
