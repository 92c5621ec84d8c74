//! Gauss–Legendre rules and product quadrature on `S^n`.

use std::f64::consts::PI;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over `[a, b]` with `panels` equal panels of an `m`-point rule.
pub fn integrate_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(m);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        total += x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| wi * f(mid + 0.5 * h * xi))
            .sum::<f64>();
    }
    0.5 * h * total
}

/// `∫_a^b sin^k θ dθ`, exact to rounding for cells of moderate width.
pub fn sin_power_integral(k: usize, a: f64, b: f64) -> f64 {
    let panels = (((b - a).abs() / 0.25).ceil() as usize).max(1);
    integrate_gl(|t| t.sin().powi(k as i32), a, b, 12, panels)
}

/// A product rule on `S^n`: points in `R^{n+1}` with weights summing to `|S^n|`.
///
/// Built recursively from `x = (sin θ ξ, cos θ)` with `ξ ∈ S^{n-1}`; the
/// polar factor uses a Gauss–Legendre rule in `θ`, the circle a uniform rule.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereQuadrature {
    /// `order` polar nodes per level and `2 order` nodes on the circle.
    pub fn new(n: usize, order: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            let m = 2 * order;
            let points = (0..m)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / m as f64;
                    vec![phi.cos(), phi.sin()]
                })
                .collect();
            return Self {
                points,
                weights: vec![2.0 * PI / m as f64; m],
            };
        }
        let base = SphereQuadrature::new(n - 1, order);
        let (x, w) = gauss_legendre(order);
        let mut points = Vec::with_capacity(base.points.len() * order);
        let mut weights = Vec::with_capacity(base.points.len() * order);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = 0.5 * PI * (xi + 1.0);
            let (s, c) = theta.sin_cos();
            let wt = 0.5 * PI * wi * s.powi(n as i32 - 1);
            for (p, bw) in base.points.iter().zip(&base.weights) {
                let mut q: Vec<f64> = p.iter().map(|v| v * s).collect();
                q.push(c);
                points.push(q);
                weights.push(wt * bw);
            }
        }
        Self { points, weights }
    }

    /// Product rule in polar coordinates about `pole`: `polar` Gauss nodes in
    /// the angle to `pole`, the `inner`-order rule on the orthogonal `S^{n-1}`.
    ///
    /// For integrands concentrated at `pole`. The inner rule is symmetric, so
    /// terms linear in the orthogonal direction cancel exactly.
    pub fn zonal(n: usize, polar: usize, inner: usize, pole: &[f64]) -> Self {
        assert!(n >= 2 && pole.len() == n + 1);
        let basis = super::tangent_basis(pole);
        let mut base = SphereQuadrature::new(n - 1, inner);
        let scale = super::sphere_volume(n - 1) / base.weights.iter().sum::<f64>();
        base.weights.iter_mut().for_each(|w| *w *= scale);
        let (x, w) = gauss_legendre(polar);
        let mut points = Vec::with_capacity(base.points.len() * polar);
        let mut weights = Vec::with_capacity(base.points.len() * polar);
        for (xi, wi) in x.iter().zip(&w) {
            let theta = 0.5 * PI * (xi + 1.0);
            let (s, c) = theta.sin_cos();
            let wt = 0.5 * PI * wi * s.powi(n as i32 - 1);
            for (p, bw) in base.points.iter().zip(&base.weights) {
                let dir = &basis * nalgebra::DVector::from_column_slice(p);
                points.push((0..=n).map(|k| c * pole[k] + s * dir[k]).collect());
                weights.push(wt * bw);
            }
        }
        Self { points, weights }
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::sphere_volume;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for m in [1, 2, 5, 12, 33] {
            let (x, w) = gauss_legendre(m);
            for deg in 0..(2 * m) {
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((approx - exact).abs() < 1e-13, "m={m} deg={deg}");
            }
        }
    }

    #[test]
    fn sin_power_integrals() {
        assert!((sin_power_integral(2, 0.0, PI) - PI / 2.0).abs() < 1e-14);
        assert!((sin_power_integral(3, 0.0, PI) - 4.0 / 3.0).abs() < 1e-14);
        let tiny = sin_power_integral(4, 0.0, 1e-3);
        assert!((tiny - 1e-15 / 5.0).abs() < 1e-20);
    }

    #[test]
    fn sphere_quadrature_volume_and_moments() {
        for n in 2..=5 {
            let q = SphereQuadrature::new(n, 16);
            let vol: f64 = q.weights.iter().sum();
            assert!((vol - sphere_volume(n)).abs() < 1e-12 * vol);
            // ∫ x_i^2 = |S^n|/(n+1)
            for i in 0..=n {
                let m = q.integrate(|x| x[i] * x[i]);
                assert!((m - vol / (n as f64 + 1.0)).abs() < 1e-11 * vol);
            }
        }
    }

    #[test]
    fn zonal_rule_moments() {
        let n = 4;
        let pole = [0.6, 0.0, 0.0, 0.0, 0.8];
        let q = SphereQuadrature::zonal(n, 24, 4, &pole);
        let vol: f64 = q.weights.iter().sum();
        assert!((vol - sphere_volume(n)).abs() < 1e-12 * vol);
        assert!(q
            .points
            .iter()
            .all(|p| (p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14));
        for i in 0..=n {
            assert!(q.integrate(|x| x[i]).abs() < 1e-13);
        }
        let along = q.integrate(|x| x.iter().zip(&pole).map(|(a, b)| a * b).sum::<f64>().powi(2));
        assert!((along - vol / (n as f64 + 1.0)).abs() < 1e-12 * vol);
    }
}
