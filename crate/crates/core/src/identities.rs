//! Integral identities for solutions of `-c_n Δu = K u^{(n+2)/(n-2)}`:
//! Pohozaev (radial and translational), the Kazdan–Warner integral, and the
//! weighted radial average used to classify blow-ups.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::sphere::quadrature::{gauss_legendre, SphereQuadrature};
use crate::sphere::{
    integrate_axisym, sphere_volume, AxisymProfile, FieldExt, ScalarField, SpherePoint,
};

/// A function on (part of) `R^n` with its gradient.
pub trait EuclideanField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

/// `K ≡ c` on `R^n`.
#[derive(Debug, Clone)]
pub struct ConstantEuclidean {
    pub n: usize,
    pub c: f64,
}

impl EuclideanField for ConstantEuclidean {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, _: &[f64]) -> f64 {
        self.c
    }
    fn gradient(&self, _: &[f64]) -> Vec<f64> {
        vec![0.0; self.n]
    }
}

/// A function of `|x - center|` given by `profile(r) = (f, f')`.
pub struct RadialField {
    pub n: usize,
    pub center: Vec<f64>,
    pub profile: Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
}

impl EuclideanField for RadialField {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        let r = dist(x, &self.center);
        (self.profile)(r).0
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = dist(x, &self.center);
        let d = (self.profile)(r).1;
        if r == 0.0 {
            return vec![0.0; self.n];
        }
        x.iter()
            .zip(&self.center)
            .map(|(a, c)| d * (a - c) / r)
            .collect()
    }
}

/// `Σ_k f_k`.
pub struct SumField(pub Vec<Arc<dyn EuclideanField>>);

impl EuclideanField for SumField {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.iter().map(|f| f.value(x)).sum()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        for f in &self.0 {
            for (a, b) in g.iter_mut().zip(f.gradient(x)) {
                *a += b;
            }
        }
        g
    }
}

/// `c_0 + Σ c_i x_i + q |x|^2`, a simple non-constant `K` for controls.
#[derive(Debug, Clone)]
pub struct QuadraticEuclidean {
    pub c0: f64,
    pub linear: Vec<f64>,
    pub q: f64,
}

impl EuclideanField for QuadraticEuclidean {
    fn dim(&self) -> usize {
        self.linear.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.c0 + self.linear.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.q * norm2(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.linear
            .iter()
            .zip(x)
            .map(|(c, v)| c + 2.0 * self.q * v)
            .collect()
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `B(r, x, u, ∇u) = (n-2)/2 u ∂_ν u - ½⟨x,ν⟩|∇u|^2 + ∂_ν u ⟨∇u, x⟩`.
pub fn boundary_term_b(n: usize, x: &[f64], nu: &[f64], u: f64, grad: &[f64]) -> f64 {
    let dnu: f64 = grad.iter().zip(nu).map(|(g, v)| g * v).sum();
    let x_nu: f64 = x.iter().zip(nu).map(|(a, b)| a * b).sum();
    let x_grad: f64 = x.iter().zip(grad).map(|(a, b)| a * b).sum();
    (n as f64 - 2.0) / 2.0 * u * dnu - 0.5 * x_nu * norm2(grad) + dnu * x_grad
}

/// Quadrature resolution for ball and sphere integrals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BallResolution {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Equal panels in the polar angle `ψ ∈ [0, π]`.
    pub angular_panels: usize,
    /// Geometric radial panels per decade.
    pub panels_per_decade: usize,
    /// Innermost radius as a fraction of `r`.
    pub inner_fraction: f64,
}

impl Default for BallResolution {
    fn default() -> Self {
        Self {
            order: 16,
            angular_panels: 48,
            panels_per_decade: 6,
            inner_fraction: 1e-10,
        }
    }
}

/// `u` and `K` on a Euclidean ball, both invariant under rotations about
/// the `x_n` axis.
///
/// Integrals over `B_r` and `∂B_r` reduce to the polar angle `ψ` from
/// `e_n`; components of vector integrands orthogonal to the axis vanish by
/// symmetry and are returned as exact zeros.
#[derive(Clone)]
pub struct BallGridFunction {
    pub n: usize,
    pub u: Arc<dyn EuclideanField>,
    pub k: Arc<dyn EuclideanField>,
    pub resolution: BallResolution,
}

impl BallGridFunction {
    /// Checks dimensions and rotational symmetry at a few sample points.
    pub fn new(
        u: Arc<dyn EuclideanField>,
        k: Arc<dyn EuclideanField>,
        resolution: BallResolution,
    ) -> Result<Self> {
        let n = u.dim();
        if n < 3 || k.dim() != n {
            return Err(Error::Schema(format!(
                "dimension mismatch: u on R^{n}, K on R^{}",
                k.dim()
            )));
        }
        for (rho, psi) in [(0.3, 0.7), (0.9, 2.1), (0.05, 1.3)] {
            let a = polar_point(n, rho, psi);
            let mut b = vec![0.0; n];
            // same (ρ, ψ) but rotated into the e_2 direction
            b[1] = a[0];
            b[n - 1] = a[n - 1];
            for f in [&u, &k] {
                let (fa, fb) = (f.value(&a), f.value(&b));
                if (fa - fb).abs() > 1e-9 * (1.0 + fa.abs()) {
                    return Err(Error::Schema(
                        "ball functions must be symmetric about the x_n axis".into(),
                    ));
                }
            }
        }
        Ok(Self {
            n,
            u,
            k,
            resolution,
        })
    }

    /// `∮_{∂B_r} f dσ` for an axisymmetric integrand evaluated at `(x, ν)`.
    fn surface(&self, r: f64, mut f: impl FnMut(&[f64], &[f64]) -> f64) -> f64 {
        let area = sphere_volume(self.n - 2) * r.powi(self.n as i32 - 1);
        let s: f64 = angular_rule(self.n, &self.resolution)
            .iter()
            .map(|&(psi, w)| {
                let nu = polar_point(self.n, 1.0, psi);
                let x: Vec<f64> = nu.iter().map(|v| v * r).collect();
                w * f(&x, &nu)
            })
            .sum();
        area * s
    }

    /// `∫_{B_r} f dx` for an axisymmetric integrand.
    fn volume(&self, r: f64, f: impl FnMut(&[f64]) -> f64) -> f64 {
        integrate_axisym_shell(self.n, 0.0, r, &self.resolution, f)
    }
}

fn angular_rule(n: usize, res: &BallResolution) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(res.order);
    let p = res.angular_panels;
    let h = std::f64::consts::PI / p as f64;
    let mut out = Vec::with_capacity(p * x.len());
    for k in 0..p {
        let mid = (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let psi = mid + 0.5 * h * xi;
            out.push((psi, 0.5 * h * wi * psi.sin().powi(n as i32 - 2)));
        }
    }
    out
}

/// `∫_{r_in < |x| < r_out} f dx` for `f` symmetric about the `x_n` axis.
///
/// Radial panels are geometric (a fixed number per decade) down to
/// `inner_fraction · r_out`, so concentrated profiles at the origin are
/// resolved; the angular factor uses equal panels in `ψ`.
pub fn integrate_axisym_shell(
    n: usize,
    r_in: f64,
    r_out: f64,
    res: &BallResolution,
    mut f: impl FnMut(&[f64]) -> f64,
) -> f64 {
    let (x, w) = gauss_legendre(res.order);
    let lo = (r_out * res.inner_fraction).max(r_in);
    let mut edges = if r_in < lo { vec![r_in] } else { vec![] };
    let decades = (r_out / lo).log10();
    let panels = ((decades * res.panels_per_decade as f64).ceil() as usize).max(1);
    for k in 0..=panels {
        edges.push(lo * (r_out / lo).powf(k as f64 / panels as f64));
    }
    let ang = angular_rule(n, res);
    let mut total = 0.0;
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        for (xi, wi) in x.iter().zip(&w) {
            let rho = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            let wr = 0.5 * (b - a) * wi * rho.powi(n as i32 - 1);
            total += wr
                * ang
                    .iter()
                    .map(|&(psi, wa)| wa * f(&polar_point(n, rho, psi)))
                    .sum::<f64>();
        }
    }
    total * sphere_volume(n - 2)
}

/// `ρ (sin ψ e_1 + cos ψ e_n)`.
fn polar_point(n: usize, rho: f64, psi: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    x[0] = rho * psi.sin();
    x[n - 1] = rho * psi.cos();
    x
}

/// Terms of the Pohozaev identity on `B_r`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub r: f64,
    /// `(1/2^*) ∫_{B_r} ⟨x, ∇K⟩ u^{2^*}`.
    pub volume_term: f64,
    /// `(1/2^*) ∮ ⟨x,ν⟩ K u^{2^*}`.
    pub boundary_k_term: f64,
    /// `c_n ∮ B(r, x, u, ∇u)`.
    pub boundary_b_term: f64,
    /// `volume - boundary_k - boundary_b`.
    pub residual: f64,
    /// Rough size of the rounding and quadrature error.
    pub tolerance_estimate: f64,
}

fn c_n(n: usize) -> f64 {
    4.0 * (n as f64 - 1.0) / (n as f64 - 2.0)
}

fn two_star(n: usize) -> f64 {
    2.0 * n as f64 / (n as f64 - 2.0)
}

/// Evaluates both sides of the Pohozaev identity on `B_r`.
pub fn pohozaev_residual(f: &BallGridFunction, r: f64) -> Result<PohozaevReport> {
    if !(r > 0.0) {
        return domain("radius must be positive");
    }
    let n = f.n;
    let ts = two_star(n);
    let mut bad = None;
    let volume_term = f.volume(r, |x| {
        let u = f.u.value(x);
        if !(u > 0.0) {
            bad = Some(x.to_vec());
        }
        let gk = f.k.gradient(x);
        let xg: f64 = x.iter().zip(&gk).map(|(a, b)| a * b).sum();
        xg * u.max(0.0).powf(ts)
    }) / ts;
    if let Some(x) = bad {
        return domain(format!("u is not positive at {x:?}"));
    }
    let mut bad = None;
    let bk = f.surface(r, |x, nu| {
        let u = f.u.value(x);
        if !(u > 0.0) {
            bad = Some(x.to_vec());
        }
        let xn: f64 = x.iter().zip(nu).map(|(a, b)| a * b).sum();
        xn * f.k.value(x) * u.max(0.0).powf(ts)
    }) / ts;
    if let Some(x) = bad {
        return domain(format!("u is not positive at {x:?}"));
    }
    let bb = c_n(n)
        * f.surface(r, |x, nu| {
            boundary_term_b(n, x, nu, f.u.value(x), &f.u.gradient(x))
        });
    let residual = volume_term - bk - bb;
    let scale = volume_term.abs() + bk.abs() + bb.abs();
    Ok(PohozaevReport {
        r,
        volume_term,
        boundary_k_term: bk,
        boundary_b_term: bb,
        residual,
        tolerance_estimate: 1e-12 * scale.max(1e-300),
    })
}

/// Residual `LHS - RHS` of the translational identity in direction `i`
/// (0-based). Directions orthogonal to the symmetry axis vanish identically.
pub fn pohozaev_translational(f: &BallGridFunction, r: f64, i: usize) -> Result<f64> {
    let n = f.n;
    if i >= n {
        return domain(format!("direction {i} out of range for R^{n}"));
    }
    if !(r > 0.0) {
        return domain("radius must be positive");
    }
    if i != n - 1 {
        return Ok(0.0);
    }
    let cn = c_n(n);
    let ts = two_star(n);
    let lhs = f.surface(r, |x, nu| {
        let g = f.u.gradient(x);
        let dnu: f64 = g.iter().zip(nu).map(|(a, b)| a * b).sum();
        -cn * dnu * g[i] + 0.5 * cn * norm2(&g) * nu[i]
    });
    let rhs_b = f.surface(r, |x, nu| f.k.value(x) * f.u.value(x).powf(ts) * nu[i]) / ts;
    let rhs_v = f.volume(r, |x| f.u.value(x).max(0.0).powf(ts) * f.k.gradient(x)[i]) / ts;
    Ok(lhs - (rhs_b - rhs_v))
}

/// `∫_{S^n} ⟨∇K, ∇f⟩ u^{2n/(n-2)} dμ` with `f = Σ_i coeffs[i] y_{i+1}`.
///
/// Intrinsic gradients; product Gauss quadrature with `order` nodes per
/// polar level.
pub fn kazdan_warner(
    u: &dyn ScalarField,
    k: &dyn ScalarField,
    coeffs: &[f64],
    order: usize,
) -> Result<f64> {
    let n = u.dim();
    if k.dim() != n || coeffs.len() != n + 1 {
        return Err(Error::Schema(
            "first harmonic needs n+1 coefficients on matching spheres".into(),
        ));
    }
    let ts = two_star(n);
    let q = SphereQuadrature::new(n, order);
    let total = q.integrate(|x| {
        let p = SpherePoint::new(x.to_vec()).expect("quadrature node on the sphere");
        let gk = k.intrinsic_gradient(&p);
        let gf: f64 = gk.iter().zip(coeffs).map(|(a, c)| a * c).sum();
        // ⟨P∇K, P c⟩ = ⟨P∇K, c⟩
        gf * u.value(x).max(0.0).powf(ts)
    });
    Ok(total)
}

/// The same integral for the metric `u^{4/(n-2)} g_0`, written through its
/// curvature equation: `∫ L u (⟨∇f, ∇u⟩ - (n-2)/2 f u) dμ` with
/// `L = -c_n Δ + n(n-1)`.
///
/// Equals `-(1/2^*) ∫ ⟨∇K_u, ∇f⟩ u^{2^*}` for `K_u = L u / u^{2^*-1}` and so
/// vanishes for every positive `u`; the two terms cancel only under accurate
/// quadrature, unlike the `K`-form with constant `K`, which is zero pointwise.
///
/// `quad` is any rule on `S^n`; for bubbles use [`SphereQuadrature::zonal`]
/// about the center.
pub fn kazdan_warner_equation_form(
    u: &dyn ScalarField,
    coeffs: &[f64],
    quad: &SphereQuadrature,
) -> Result<f64> {
    let n = u.dim();
    if coeffs.len() != n + 1 || quad.points.first().is_some_and(|p| p.len() != n + 1) {
        return Err(Error::Schema(
            "first harmonic needs n+1 coefficients and a rule on S^n".into(),
        ));
    }
    let (cn, r0, e) = (c_n(n), (n * (n - 1)) as f64, (n as f64 - 2.0) / 2.0);
    Ok(quad.integrate(|x| {
        let p = SpherePoint::new(x.to_vec()).expect("quadrature node on the sphere");
        let v = u.value(x);
        let lu = -cn * u.laplacian(&p) + r0 * v;
        let gu = u.intrinsic_gradient(&p);
        let df: f64 = gu.iter().zip(coeffs).map(|(a, c)| a * c).sum();
        let f: f64 = x.iter().zip(coeffs).map(|(a, c)| a * c).sum();
        lu * (df - e * f * v)
    }))
}

/// Axisymmetric fast path: only the `y_{n+1}` component of `f` contributes,
/// `⟨∇K, ∇y_{n+1}⟩ = -K'(θ) sin θ`. `K'` is taken by centered differences.
pub fn kazdan_warner_axisym(
    u: &AxisymProfile,
    k: &AxisymProfile,
    coeff_height: f64,
) -> Result<f64> {
    if u.theta != k.theta || u.n != k.n {
        return Err(Error::Schema("u and K must share a grid".into()));
    }
    let m = u.len();
    let ts = two_star(u.n);
    let t = &u.theta;
    let mut vals = vec![0.0; m];
    for j in 1..m - 1 {
        let dk = (k.values[j + 1] - k.values[j - 1]) / (t[j + 1] - t[j - 1]);
        vals[j] = -dk * t[j].sin() * u.values[j].max(0.0).powf(ts);
    }
    Ok(coeff_height * integrate_axisym(&u.with_values(vals)?))
}

/// `w̄(r) = r^{(n-2)/2} ⨍_{∂B_r(ξ)} u` on a set of radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialAverageCurve {
    pub radii: Vec<f64>,
    pub wbar: Vec<f64>,
    /// Radii where the smoothed `d w̄ / d log r` changes sign.
    pub critical_radii: Vec<f64>,
}

/// Classification of a blow-up from its radial-average curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupClass {
    IsolatedSimpleCandidate,
    MultiCritical,
    /// No interior critical radius.
    Degenerate,
}

/// Spherical means of `u` around `center`, with an `order`-level product
/// rule on `S^{n-1}`.
pub fn radial_average(
    u: &dyn EuclideanField,
    center: &[f64],
    radii: &[f64],
    order: usize,
) -> Result<RadialAverageCurve> {
    let n = u.dim();
    if center.len() != n {
        return Err(Error::Schema("center dimension mismatch".into()));
    }
    if radii.len() < 7 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(Error::Schema(
            "radii must be positive, increasing, at least 7".into(),
        ));
    }
    let q = SphereQuadrature::new(n - 1, order);
    let area: f64 = q.weights.iter().sum();
    let a = (n as f64 - 2.0) / 2.0;
    let wbar: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let mean = q.integrate(|w| {
                let x: Vec<f64> = center.iter().zip(w).map(|(c, d)| c + r * d).collect();
                u.value(&x)
            }) / area;
            r.powf(a) * mean
        })
        .collect();
    let critical_radii = critical_radii(radii, &wbar);
    Ok(RadialAverageCurve {
        radii: radii.to_vec(),
        wbar,
        critical_radii,
    })
}

/// Sign changes of the slope of a 5-point least-squares parabola in `log r`.
fn critical_radii(radii: &[f64], w: &[f64]) -> Vec<f64> {
    let t: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let m = t.len();
    let mut slope = vec![f64::NAN; m];
    for j in 2..m - 2 {
        slope[j] = parabola_slope(&t[j - 2..=j + 2], &w[j - 2..=j + 2], t[j]);
    }
    let scale = w.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let floor = 1e-9 * scale;
    let mut out = Vec::new();
    let mut prev: Option<(usize, f64)> = None;
    for j in 2..m - 2 {
        let s = slope[j];
        if s.abs() <= floor {
            continue;
        }
        if let Some((i, sp)) = prev {
            if sp.signum() != s.signum() {
                // interpolate the zero of the slope between i and j
                let z = t[i] + (t[j] - t[i]) * sp / (sp - s);
                out.push(z.exp());
            }
        }
        prev = Some((j, s));
    }
    out
}

fn parabola_slope(t: &[f64], w: &[f64], at: f64) -> f64 {
    // fit w ≈ c0 + c1 s + c2 s^2 with s = t - at, slope at s = 0 is c1
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut b = nalgebra::Vector3::<f64>::zeros();
    for (ti, wi) in t.iter().zip(w) {
        let s = ti - at;
        let row = [1.0, s, s * s];
        for a in 0..3 {
            b[a] += row[a] * wi;
            for c in 0..3 {
                m[(a, c)] += row[a] * row[c];
            }
        }
    }
    m.lu().solve(&b).map(|c| c[1]).unwrap_or(0.0)
}

/// Isolated-simple candidate iff exactly one critical radius lies in `(0, ρ)`.
pub fn classify_blowup(curve: &RadialAverageCurve, rho: f64) -> BlowupClass {
    match curve.critical_radii.iter().filter(|&&r| r < rho).count() {
        0 => BlowupClass::Degenerate,
        1 => BlowupClass::IsolatedSimpleCandidate,
        _ => BlowupClass::MultiCritical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bubble(n: usize, a: Vec<f64>, lambda: f64) -> Arc<dyn EuclideanField> {
        let e = (n as f64 - 2.0) / 2.0;
        Arc::new(RadialField {
            n,
            center: a,
            profile: Box::new(move |r| {
                let s = 1.0 + lambda * lambda * r * r;
                let u = lambda.powf(e) * s.powf(-e);
                (u, -2.0 * e * lambda * lambda * r * u / s)
            }),
        })
    }

    #[test]
    fn boundary_term_on_a_radial_function() {
        // u = r^2 at x = r e_1: ∂_ν u = 2r, |∇u|^2 = 4r^2, ⟨∇u,x⟩ = 2r^2
        let r = 0.7;
        let b = boundary_term_b(
            5,
            &[r, 0.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0, 0.0],
            r * r,
            &[2.0 * r, 0.0, 0.0, 0.0, 0.0],
        );
        let expected = 1.5 * r * r * 2.0 * r - 0.5 * r * 4.0 * r * r + 2.0 * r * 2.0 * r * r;
        assert!((b - expected).abs() < 1e-14);
    }

    #[test]
    fn pohozaev_vanishes_on_centered_bubble() {
        for n in [3, 5, 6] {
            let k = Arc::new(ConstantEuclidean {
                n,
                c: 4.0 * n as f64 * (n as f64 - 1.0),
            });
            let f =
                BallGridFunction::new(bubble(n, vec![0.0; n], 7.0), k, BallResolution::default())
                    .unwrap();
            let rep = pohozaev_residual(&f, 1.0).unwrap();
            assert_eq!(rep.volume_term, 0.0);
            assert!(rep.residual.abs() < 1e-10, "n={n} {rep:?}");
            assert!(rep.boundary_b_term.abs() > 1e-6);
        }
    }

    #[test]
    fn translational_identity_on_off_center_bubble() {
        let n = 5;
        let mut a = vec![0.0; n];
        a[n - 1] = 0.3;
        let k = Arc::new(ConstantEuclidean { n, c: 80.0 });
        let f = BallGridFunction::new(bubble(n, a, 10.0), k, BallResolution::default()).unwrap();
        for i in 0..n {
            assert!(pohozaev_translational(&f, 1.0, i).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn non_solutions_give_nonzero_residuals() {
        let n = 5;
        let mut lin = vec![0.0; n];
        lin[n - 1] = 3.0;
        let k = Arc::new(QuadraticEuclidean {
            c0: 80.0,
            linear: lin,
            q: 5.0,
        });
        let u = Arc::new(RadialField {
            n,
            center: vec![0.0; n],
            profile: Box::new(|r| (1.0 + r * r, 2.0 * r)),
        });
        let f = BallGridFunction::new(u, k, BallResolution::default()).unwrap();
        assert!(pohozaev_residual(&f, 1.0).unwrap().residual.abs() > 1e-2);
        assert!(pohozaev_translational(&f, 1.0, n - 1).unwrap().abs() > 1e-2);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let n = 4;
        let k = Arc::new(QuadraticEuclidean {
            c0: 1.0,
            linear: vec![1.0, 0.0, 0.0, 0.0],
            q: 0.0,
        });
        assert!(
            BallGridFunction::new(bubble(n, vec![0.0; n], 1.0), k, BallResolution::default())
                .is_err()
        );
    }

    #[test]
    fn kazdan_warner_is_linear_in_f() {
        use crate::sphere::{AxisymPolyField, CoordinateField};
        let n = 3;
        let u = AxisymPolyField {
            n,
            coeffs: vec![1.0, 0.2],
        };
        let k = CoordinateField { n, index: 3 };
        let a = kazdan_warner(&u, &k, &[0.0, 0.0, 0.0, 1.0], 12).unwrap();
        let b = kazdan_warner(&u, &k, &[0.0, 0.0, 0.0, 2.0], 12).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * a.abs().max(1.0));
        assert!(a.abs() > 1e-3);
        let c = kazdan_warner(&u, &k, &[1.0, 0.0, 0.0, 0.0], 12).unwrap();
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn equation_form_vanishes_for_any_positive_u() {
        use crate::bubbles::sphere_bubble;
        use crate::sphere::AxisymPolyField;
        let n = 5;
        let center = SpherePoint::from_polar(n, 0.7);
        let poly = AxisymPolyField {
            n,
            coeffs: vec![1.0, 0.3, 0.1],
        };
        let generic = SphereQuadrature::new(n, 16);
        for lambda in [3.0, 10.0] {
            let bubble = sphere_bubble(center.clone(), lambda).unwrap();
            let zonal = SphereQuadrature::zonal(n, 96, 4, center.coords());
            for i in 0..=n {
                let mut c = vec![0.0; n + 1];
                c[i] = 1.0;
                let a = kazdan_warner_equation_form(&bubble, &c, &zonal).unwrap();
                let b = kazdan_warner_equation_form(&poly, &c, &generic).unwrap();
                assert!(a.abs() < 1e-11, "bubble, lambda {lambda}, i {i}: {a}");
                assert!(b.abs() < 1e-8, "polynomial, i {i}: {b}");
            }
        }
    }

    #[test]
    fn axisym_fast_path_matches_quadrature() {
        use crate::sphere::{AxisymPolyField, CoordinateField};
        let n = 4;
        let u = AxisymPolyField {
            n,
            coeffs: vec![1.0, 0.3],
        };
        let k = CoordinateField { n, index: n };
        let slow = kazdan_warner(&u, &k, &[0.0, 0.0, 0.0, 0.0, 1.0], 24).unwrap();
        let up = AxisymProfile::uniform(n, 4097, |t| 1.0 + 0.3 * t.cos()).unwrap();
        let kp = AxisymProfile::uniform(n, 4097, f64::cos).unwrap();
        let fast = kazdan_warner_axisym(&up, &kp, 1.0).unwrap();
        assert!((slow - fast).abs() < 1e-5 * slow.abs(), "{slow} {fast}");
    }

    fn log_radii(lo: f64, hi: f64, m: usize) -> Vec<f64> {
        (0..m)
            .map(|k| lo * (hi / lo).powf(k as f64 / (m - 1) as f64))
            .collect()
    }

    #[test]
    fn single_bubble_has_one_critical_radius() {
        let n = 5;
        let lambda = 20.0;
        let u = bubble(n, vec![0.0; n], lambda);
        let curve =
            radial_average(u.as_ref(), &vec![0.0; n], &log_radii(1e-4, 1.0, 161), 4).unwrap();
        assert_eq!(
            classify_blowup(&curve, 1.0),
            BlowupClass::IsolatedSimpleCandidate
        );
        assert!((curve.critical_radii[0] * lambda - 1.0).abs() < 1e-2);
    }

    #[test]
    fn constant_has_no_critical_radius() {
        let n = 5;
        let u = RadialField {
            n,
            center: vec![0.0; n],
            profile: Box::new(|_| (1.0, 0.0)),
        };
        let curve = radial_average(&u, &vec![0.0; n], &log_radii(1e-3, 1.0, 50), 3).unwrap();
        assert_eq!(classify_blowup(&curve, 1.0), BlowupClass::Degenerate);
    }
}
