//! Bubbles on `R^n` and `S^n`, the Yamabe constant `ĉ_0`, Kelvin inversion,
//! limit energies of multi-bubble solutions and the min-max test family.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::identities::EuclideanField;
use crate::sphere::quadrature::{gauss_legendre, integrate_gl, SphereQuadrature};
use crate::sphere::{sphere_volume, AxisymProfile, RoundMetricConstants, ScalarField, SpherePoint};

/// `Γ(k/2)` for a positive integer `k`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0);
    if k.is_multiple_of(2) {
        (1..k / 2).map(|j| j as f64).product()
    } else {
        // Γ(1/2) = √π, Γ(x+1) = x Γ(x)
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x + 0.25 < k as f64 / 2.0 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Center and concentration of a Euclidean bubble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub a: Vec<f64>,
    pub lambda: f64,
}

impl BubbleParams {
    pub fn new(a: Vec<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!(
                "bubble concentration must be positive, got {lambda}"
            ));
        }
        Ok(Self { a, lambda })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

/// `U_{a,λ}(x) = λ^{(n-2)/2}(1 + λ^2|x-a|^2)^{(2-n)/2}` and its gradient.
pub fn standard_bubble(x: &[f64], params: &BubbleParams) -> (f64, Vec<f64>) {
    let n = params.dim();
    let e = (n as f64 - 2.0) / 2.0;
    let l2 = params.lambda * params.lambda;
    let s: f64 = x
        .iter()
        .zip(&params.a)
        .map(|(xi, ai)| (xi - ai).powi(2))
        .sum();
    let d = 1.0 + l2 * s;
    let u = params.lambda.powf(e) * d.powf(-e);
    let g = x
        .iter()
        .zip(&params.a)
        .map(|(xi, ai)| -2.0 * e * l2 * u / d * (xi - ai))
        .collect();
    (u, g)
}

/// `-c_n ΔU - 4n(n-1) U^{(n+2)/(n-2)}` at `x`, with a central-difference
/// Laplacian of step `h`.
pub fn bubble_pde_residual(params: &BubbleParams, x: &[f64], h: f64) -> f64 {
    let n = params.dim();
    let nf = n as f64;
    let u0 = standard_bubble(x, params).0;
    let mut lap = 0.0;
    let mut y = x.to_vec();
    for i in 0..n {
        y[i] = x[i] + h;
        let up = standard_bubble(&y, params).0;
        y[i] = x[i] - h;
        let um = standard_bubble(&y, params).0;
        y[i] = x[i];
        lap += (up - 2.0 * u0 + um) / (h * h);
    }
    let c_n = 4.0 * (nf - 1.0) / (nf - 2.0);
    -c_n * lap - 4.0 * nf * (nf - 1.0) * u0.powf((nf + 2.0) / (nf - 2.0))
}

/// The same residual with the closed-form Laplacian
/// `ΔU = -2eλ²U/d (n - 2(e+1)λ²|x-a|²/d)`, `d = 1 + λ²|x-a|²`, `e = (n-2)/2`,
/// relative to the size of either term.
pub fn bubble_pde_residual_exact(params: &BubbleParams, x: &[f64]) -> f64 {
    let n = params.dim();
    let nf = n as f64;
    let e = (nf - 2.0) / 2.0;
    let l2 = params.lambda * params.lambda;
    let r2: f64 = x
        .iter()
        .zip(&params.a)
        .map(|(xi, ai)| (xi - ai).powi(2))
        .sum();
    let d = 1.0 + l2 * r2;
    let u = standard_bubble(x, params).0;
    let lap = -2.0 * e * l2 * u / d * (nf - 2.0 * (e + 1.0) * l2 * r2 / d);
    let c_n = 4.0 * (nf - 1.0) / (nf - 2.0);
    let rhs = 4.0 * nf * (nf - 1.0) * u.powf((nf + 2.0) / (nf - 2.0));
    (-c_n * lap - rhs) / rhs.abs().max(c_n * lap.abs())
}

/// [`standard_bubble`] as a field on `R^n`.
#[derive(Debug, Clone)]
pub struct EuclideanBubble(pub BubbleParams);

impl EuclideanField for EuclideanBubble {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        standard_bubble(x, &self.0).0
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        standard_bubble(x, &self.0).1
    }
}

/// `∫_{R^n} U_0^{2n/(n-2)} dx = |S^{n-1}| Γ(n/2)^2 / (2 Γ(n))`.
pub fn euclidean_bubble_mass(n: usize) -> f64 {
    sphere_volume(n - 1) * gamma_half(n).powi(2) / (2.0 * gamma_half(2 * n))
}

/// `∫_{R^n} f^{2^*}` in polar coordinates about `center`, with radial panels
/// in `log(λr)`. For functions concentrated at scale `1/λ` around `center`.
pub fn critical_norm(f: impl Fn(&[f64]) -> f64, center: &[f64], lambda: f64) -> f64 {
    let n = center.len();
    let ts = 2.0 * n as f64 / (n as f64 - 2.0);
    let dirs = SphereQuadrature::new(n - 1, 3);
    let area: f64 = dirs.weights.iter().sum();
    let radial = integrate_gl(
        |t: f64| {
            let r = t.exp() / lambda;
            let shell: f64 = dirs
                .points
                .iter()
                .zip(&dirs.weights)
                .map(|(d, w)| {
                    let x: Vec<f64> = center.iter().zip(d).map(|(c, di)| c + r * di).collect();
                    w * f(&x).powf(ts)
                })
                .sum();
            r.powi(n as i32) * shell
        },
        -30.0,
        30.0,
        16,
        200,
    );
    sphere_volume(n - 1) / area * radial
}

/// The round-sphere bubble `φ_{a,λ} = (λ / (1 + λ^2 |x - a|^2))^{(n-2)/2}`.
///
/// `|x - a|` is the chordal distance, which is `γ_n G_a^{2/(2-n)}` for the
/// conformal Green's function of the round metric.
#[derive(Debug, Clone)]
pub struct SphereBubble {
    pub center: SpherePoint,
    pub lambda: f64,
}

/// Builds `φ_{a,λ}`; requires `λ ≥ 1`.
pub fn sphere_bubble(center: SpherePoint, lambda: f64) -> Result<SphereBubble> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return domain(format!("sphere bubbles need lambda >= 1, got {lambda}"));
    }
    Ok(SphereBubble { center, lambda })
}

impl SphereBubble {
    fn e(&self) -> f64 {
        (self.center.dim() as f64 - 2.0) / 2.0
    }

    /// Value as a function of the chordal distance squared.
    pub fn of_chord2(&self, s: f64) -> f64 {
        (self.lambda / (1.0 + self.lambda * self.lambda * s)).powf(self.e())
    }

    /// Value as a function of the geodesic distance to the center.
    pub fn of_angle(&self, theta: f64) -> f64 {
        self.of_chord2(2.0 * (1.0 - theta.cos()))
    }

    /// `dφ/dθ` as a function of the geodesic distance.
    pub fn d_angle(&self, theta: f64) -> f64 {
        let l2 = self.lambda * self.lambda;
        let s = 2.0 * (1.0 - theta.cos());
        -self.e() * l2 * 2.0 * theta.sin() / (1.0 + l2 * s) * self.of_chord2(s)
    }

    /// Samples on a polar grid, valid when the center is the north pole.
    pub fn profile(&self, nodes: usize) -> Result<AxisymProfile> {
        if self.center.height() < 1.0 - 1e-14 {
            return domain("axisymmetric profile needs the bubble centered at the north pole");
        }
        AxisymProfile::uniform(self.center.dim(), nodes, |t| self.of_angle(t))
    }
}

impl ScalarField for SphereBubble {
    fn dim(&self) -> usize {
        self.center.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = x
            .iter()
            .zip(self.center.coords())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        self.of_chord2(s)
    }
    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let l2 = self.lambda * self.lambda;
        let d: Vec<f64> = x
            .iter()
            .zip(self.center.coords())
            .map(|(a, b)| a - b)
            .collect();
        let s: f64 = d.iter().map(|v| v * v).sum();
        let den = 1.0 + l2 * s;
        let phi = self.of_chord2(s);
        DVector::from_iterator(
            d.len(),
            d.iter().map(|v| -2.0 * self.e() * l2 * phi / den * v),
        )
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let e = self.e();
        let l2 = self.lambda * self.lambda;
        let d = DVector::from_iterator(
            x.len(),
            x.iter().zip(self.center.coords()).map(|(a, b)| a - b),
        );
        let s = d.norm_squared();
        let den = 1.0 + l2 * s;
        let phi = self.of_chord2(s);
        let m = x.len();
        DMatrix::identity(m, m) * (-2.0 * e * l2 * phi / den)
            + &d * d.transpose() * (4.0 * e * (e + 1.0) * l2 * l2 * phi / (den * den))
    }
}

/// `ĉ_0` with its two independent evaluations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SobolevConstant {
    pub n: usize,
    /// `n(n-1) |S^n|^{2/n}`.
    pub c_hat0: f64,
    /// `c_n · π n(n-2) (Γ(n/2)/Γ(n))^{2/n}`.
    pub talenti: f64,
    /// The closed form `c_n (Γ(n)/Γ(n/2))^{2/n} / (π n(n-2))`; it equals
    /// `c_n^2 / ĉ_0`, not `ĉ_0`.
    pub reciprocal_form: f64,
    pub reciprocal_form_matches: bool,
}

/// The Yamabe constant of the round sphere, cross-checked against the
/// sharp Sobolev constant; a mismatch beyond `1e-10` is a configuration error.
pub fn sobolev_constant(n: usize) -> Result<SobolevConstant> {
    let c = RoundMetricConstants::new(n)?;
    let nf = n as f64;
    let c_hat0 = c.r0 * c.vol_n.powf(2.0 / nf);
    let ratio = gamma_half(n) / gamma_half(2 * n);
    let talenti = c.c_n * std::f64::consts::PI * nf * (nf - 2.0) * ratio.powf(2.0 / nf);
    if (c_hat0 - talenti).abs() > 1e-10 * c_hat0 {
        return Err(Error::Config(format!(
            "Yamabe constant {c_hat0} disagrees with c_n times the sharp Sobolev constant {talenti}"
        )));
    }
    let reciprocal_form =
        c.c_n * (1.0 / ratio).powf(2.0 / nf) / (std::f64::consts::PI * nf * (nf - 2.0));
    Ok(SobolevConstant {
        n,
        c_hat0,
        talenti,
        reciprocal_form,
        reciprocal_form_matches: (reciprocal_form - c_hat0).abs() <= 1e-10 * c_hat0,
    })
}

/// `ĉ_0` together with the limit-energy formula.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyLevels {
    pub n: usize,
    pub c_hat0: f64,
}

impl EnergyLevels {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            c_hat0: sobolev_constant(n)?.c_hat0,
        })
    }

    /// `ĉ_0 (Σ_i K_i^{(2-n)/2})^{2/n}`.
    pub fn limit_energy(&self, values: &[f64]) -> Result<f64> {
        limit_energy_with(self.c_hat0, self.n, values)
    }
}

/// `ĉ_0 (Σ_i K_i^{(2-n)/2})^{2/n}` for a nonempty set of positive values.
pub fn limit_energy(values: &[f64], n: usize) -> Result<f64> {
    EnergyLevels::new(n)?.limit_energy(values)
}

fn limit_energy_with(c_hat0: f64, n: usize, values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return domain("limit energy of an empty set");
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return domain("limit energy needs positive curvature values");
    }
    let nf = n as f64;
    let s: f64 = values.iter().map(|k| k.powf((2.0 - nf) / 2.0)).sum();
    Ok(c_hat0 * s.powf(2.0 / nf))
}

/// Parameters of `x ↦ μ^{n-2}|x|^{2-n} U_{a,λ}(μ^2 x/|x|^2)`, which is again
/// a bubble `U_{ǎ,λ̌}`.
pub fn kelvin_invert(params: &BubbleParams, mu: f64) -> Result<BubbleParams> {
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("inversion radius must be positive, got {mu}"));
    }
    let l2 = params.lambda * params.lambda;
    let a2: f64 = params.a.iter().map(|v| v * v).sum();
    let d = 1.0 + l2 * a2;
    let a = params.a.iter().map(|v| l2 * mu * mu * v / d).collect();
    BubbleParams::new(a, d / (params.lambda * mu * mu))
}

/// `μ^{n-2}|x|^{2-n} U_{a,λ}(μ^2 x/|x|^2)`.
pub fn kelvin_transform_value(params: &BubbleParams, mu: f64, x: &[f64]) -> f64 {
    let n = params.dim() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let y: Vec<f64> = x.iter().map(|v| mu * mu * v / r2).collect();
    mu.powf(n - 2.0) * r2.powf((2.0 - n) / 2.0) * standard_bubble(&y, params).0
}

/// The superlevel region `Ξ = {K ≥ min_value}` used by the test family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct XiRegion {
    pub min_value: f64,
}

/// Bubble parameters of the single-bubble solution attached to a maximum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BubbleHook {
    pub x: SpherePoint,
    pub a: SpherePoint,
    pub lambda: f64,
}

/// Energies along the test family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFamilyReport {
    pub tau: f64,
    pub r0: f64,
    pub energies: Vec<f64>,
    pub sup_energy: f64,
    /// `ĉ_0 max_path K^{(2-n)/n}`.
    pub bound: f64,
    pub excess: f64,
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// `(ã(x), λ̃(x))`: the hook's bubble inside `B_{2r_0}(x_i)`, `(x, τ^{-1/2})`
/// outside `B_{4r_0}(x_i)`, blended in between.
pub fn test_family_params(
    x: &SpherePoint,
    tau: f64,
    r0: f64,
    hooks: &[BubbleHook],
) -> (SpherePoint, f64) {
    let base = tau.powf(-0.5);
    for h in hooks {
        let d = x.geodesic_distance(&h.x);
        if d < 4.0 * r0 {
            let f = smoothstep((d - 2.0 * r0) / (2.0 * r0));
            let lambda = (1.0 - f) * h.lambda + f * base;
            let a: Vec<f64> =
                h.a.coords()
                    .iter()
                    .zip(x.coords())
                    .map(|(p, q)| (1.0 - f) * p + f * q)
                    .collect();
            return (SpherePoint::new(a).unwrap_or_else(|_| x.clone()), lambda);
        }
    }
    (x.clone(), base)
}

/// `J_τ(φ_{a,λ})` on the round sphere, in geodesic polar coordinates
/// around `a`; `K` is averaged over each geodesic sphere with an
/// `order`-level product rule.
pub fn bubble_energy(
    k: &dyn ScalarField,
    center: &SpherePoint,
    lambda: f64,
    tau: f64,
    order: usize,
) -> Result<f64> {
    let n = center.dim();
    let c = RoundMetricConstants::new(n)?;
    let bubble = SphereBubble {
        center: center.clone(),
        lambda,
    };
    let p = (n as f64 + 2.0) / (n as f64 - 2.0) - tau;
    let dirs = SphereQuadrature::new(n - 1, order);
    let area: f64 = dirs.weights.iter().sum();
    // orthonormal frame of the tangent space at the center
    let basis = crate::sphere::tangent_basis(center.coords());
    let dirs_amb: Vec<Vec<f64>> = dirs
        .points
        .iter()
        .map(|d| {
            (0..=n)
                .map(|i| (0..n).map(|j| basis[(i, j)] * d[j]).sum())
                .collect()
        })
        .collect();
    let mean_k = |theta: f64| {
        let (s, co) = theta.sin_cos();
        dirs_amb
            .iter()
            .zip(&dirs.weights)
            .map(|(d, w)| {
                let x: Vec<f64> = center
                    .coords()
                    .iter()
                    .zip(d)
                    .map(|(a, v)| co * a + s * v)
                    .collect();
                w * k.value(&x)
            })
            .sum::<f64>()
            / area
    };
    let (gx, gw) = gauss_legendre(16);
    let mut edges = vec![0.0];
    let lo = 1e-6 / lambda;
    let panels = 60;
    for j in 0..=panels {
        edges.push(lo * (std::f64::consts::PI / lo).powf(j as f64 / panels as f64));
    }
    let (mut r, mut kk) = (0.0, 0.0);
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        for (xi, wi) in gx.iter().zip(&gw) {
            let t = 0.5 * (a + b) + 0.5 * (b - a) * xi;
            let w = 0.5 * (b - a) * wi * t.sin().powi(n as i32 - 1);
            let u = bubble.of_angle(t);
            let du = bubble.d_angle(t);
            r += w * (c.c_n * du * du + c.r0 * u * u);
            kk += w * mean_k(t) * u.powf(p + 1.0);
        }
    }
    let omega = sphere_volume(n - 1);
    r *= omega;
    kk *= omega;
    if !(kk > 0.0) {
        return domain("denominator of the functional is not positive");
    }
    Ok(r / kk.powf(2.0 / (p + 1.0)))
}

/// `sup_x J_τ(φ̃_{x,τ})` along a path in `Ξ`.
///
/// Inside `B_{2r_0}(x_i)` the single-bubble solution is replaced by its
/// bubble approximation from the hook.
pub fn test_family_energy(
    k: &dyn ScalarField,
    path: &[SpherePoint],
    xi: XiRegion,
    tau: f64,
    r0: f64,
    hooks: &[BubbleHook],
) -> Result<TestFamilyReport> {
    if path.is_empty() {
        return domain("empty path");
    }
    if !(tau > 0.0 && tau <= 0.1) {
        return domain(format!("tau must lie in (0, 0.1], got {tau}"));
    }
    let n = path[0].dim();
    let mut energies = Vec::with_capacity(path.len());
    let mut kmin = f64::INFINITY;
    for x in path {
        let kx = k.value(x.coords());
        if kx < xi.min_value {
            return domain(format!("path leaves the region at {:?}", x.coords()));
        }
        kmin = kmin.min(kx);
        let (a, lambda) = test_family_params(x, tau, r0, hooks);
        energies.push(bubble_energy(k, &a, lambda, tau, 6)?);
    }
    let sup_energy = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nf = n as f64;
    let bound = EnergyLevels::new(n)?.c_hat0 * kmin.powf((2.0 - nf) / nf);
    Ok(TestFamilyReport {
        tau,
        r0,
        energies,
        sup_energy,
        bound,
        excess: sup_energy - bound,
    })
}
