//! Finite-volume discretization of `J_τ` for axisymmetric functions.
//!
//! With cell masses `W` and edge conductances `E` from [`FvWeights`], the
//! conformal Laplacian becomes the tridiagonal matrix
//! `A = ω (c_n D + R_0 W)` and
//! `J_τ(u) = uᵀAu / (ω Σ W K u^{p+1})^{2/(p+1)}`.

use serde::{Deserialize, Serialize};

use super::tridiag::SymTridiag;
use crate::error::{domain, Result};
use crate::sphere::{
    laplace_beltrami_axisym, AxisymProfile, FvWeights, RoundMetricConstants, ScalarField,
    SpherePoint,
};

/// Upper end of the admissible subcriticality range.
pub const TAU_MAX: f64 = 0.2;

/// Grid, curvature samples and exponent of one discrete problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub n: usize,
    pub tau: f64,
    pub fv: FvWeights,
    pub consts: RoundMetricConstants,
    /// `K` at the nodes.
    pub k: Vec<f64>,
    a: SymTridiag,
}

impl Problem {
    pub fn new(n: usize, nodes: usize, tau: f64, k: impl Fn(f64) -> f64) -> Result<Self> {
        let fv = FvWeights::new(n, nodes);
        let values = fv.theta.iter().map(|&t| k(t)).collect();
        Self::with_values(fv, tau, values)
    }

    /// `K` given on the ambient sphere; sampled along the `(e_1, e_{n+1})` meridian.
    pub fn from_field(k: &dyn ScalarField, nodes: usize, tau: f64) -> Result<Self> {
        let n = k.dim();
        Self::new(n, nodes, tau, |t| {
            k.value(SpherePoint::from_polar(n, t).coords())
        })
    }

    pub fn from_profile(k: &AxisymProfile, nodes: usize, tau: f64) -> Result<Self> {
        Self::new(k.n, nodes, tau, |t| k.eval(t))
    }

    fn with_values(fv: FvWeights, tau: f64, k: Vec<f64>) -> Result<Self> {
        let n = fv.n;
        let consts = RoundMetricConstants::new(n)?;
        if !(0.0..=TAU_MAX).contains(&tau) {
            return domain(format!("tau = {tau} outside [0, {TAU_MAX}]"));
        }
        if k.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return domain("K must be positive and finite at every node");
        }
        let om = fv.omega;
        let len = fv.len();
        let mut diag = vec![0.0; len];
        let mut off = vec![0.0; len - 1];
        for j in 0..len - 1 {
            diag[j] += consts.c_n * fv.edge[j];
            diag[j + 1] += consts.c_n * fv.edge[j];
            off[j] = -om * consts.c_n * fv.edge[j];
        }
        for j in 0..len {
            diag[j] = om * (diag[j] + consts.r0 * fv.cell[j]);
        }
        Ok(Self {
            n,
            tau,
            fv,
            consts,
            k,
            a: SymTridiag::new(diag, off),
        })
    }

    /// Same grid and `K` at another `τ`.
    pub fn at_tau(&self, tau: f64) -> Result<Self> {
        if !(0.0..=TAU_MAX).contains(&tau) {
            return domain(format!("tau = {tau} outside [0, {TAU_MAX}]"));
        }
        Ok(Self {
            tau,
            ..self.clone()
        })
    }

    /// Same grid with `K ≡ 1`.
    pub fn reference(&self) -> Self {
        Self {
            k: vec![1.0; self.k.len()],
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.fv.theta
    }

    /// `p = (n+2)/(n-2) - τ`.
    pub fn p(&self) -> f64 {
        let n = self.n as f64;
        (n + 2.0) / (n - 2.0) - self.tau
    }

    pub fn operator(&self) -> &SymTridiag {
        &self.a
    }

    /// `ω W_j`, the quadrature mass of node `j`.
    pub fn mass(&self) -> Vec<f64> {
        self.fv.cell.iter().map(|c| self.fv.omega * c).collect()
    }

    /// `A u` in flux form, exact for constants.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let (fv, c) = (&self.fv, &self.consts);
        let mut out: Vec<f64> = fv.cell.iter().zip(u).map(|(w, v)| c.r0 * w * v).collect();
        for j in 0..u.len() - 1 {
            let flux = c.c_n * fv.edge[j] * (u[j + 1] - u[j]);
            out[j] -= flux;
            out[j + 1] += flux;
        }
        out.iter_mut().for_each(|v| *v *= fv.omega);
        out
    }

    /// `r = ∫ u L u`.
    pub fn r(&self, u: &[f64]) -> f64 {
        dot(u, &self.apply(u))
    }

    /// The `L_{g0}` norm `√r`.
    pub fn norm(&self, u: &[f64]) -> f64 {
        self.r(u).sqrt()
    }

    pub fn normalize(&self, u: &[f64]) -> Vec<f64> {
        let s = 1.0 / self.norm(u);
        u.iter().map(|v| v * s).collect()
    }

    /// `k_τ = ∫ K u^{p+1}`.
    pub fn k_tau(&self, u: &[f64]) -> f64 {
        let q = self.p() + 1.0;
        self.fv.integrate(
            &self
                .k
                .iter()
                .zip(u)
                .map(|(k, v)| k * v.abs().powf(q))
                .collect::<Vec<_>>(),
        )
    }

    /// `J_τ(u)`.
    pub fn functional(&self, u: &[f64]) -> Result<f64> {
        let k = self.k_tau(u);
        if !(k > 0.0) {
            return domain(format!("k_tau = {k} is not positive"));
        }
        Ok(self.r(u) / k.powf(2.0 / (self.p() + 1.0)))
    }

    /// `J̄_τ(u)`, the same quotient with `K ≡ 1`.
    pub fn functional_reference(&self, u: &[f64]) -> Result<f64> {
        self.reference().functional(u)
    }

    /// Euclidean gradient of `J_τ` with respect to the nodal values.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let p = self.p();
        let k = self.k_tau(u);
        if !(k > 0.0) {
            return domain(format!("k_tau = {k} is not positive"));
        }
        let r = self.r(u);
        let au = self.apply(u);
        let scale = 2.0 / k.powf(2.0 / (p + 1.0));
        let mass = self.mass();
        Ok((0..u.len())
            .map(|j| {
                scale * (au[j] - (r / k) * mass[j] * self.k[j] * u[j].abs().powf(p) * u[j].signum())
            })
            .collect())
    }

    /// The gradient for the `L_{g0}` inner product, `A⁻¹ ∇J`, and its norm.
    ///
    /// `J` is 0-homogeneous, so the result is already tangent to `{‖u‖ = 1}`.
    pub fn riesz_gradient(&self, u: &[f64]) -> Result<(Vec<f64>, f64)> {
        let g = self.gradient(u)?;
        let rg = self.a.solve(&g)?;
        let norm = dot(&g, &rg).max(0.0).sqrt();
        Ok((rg, norm))
    }

    /// Nodal `ΔK`.
    pub fn laplacian_k(&self) -> Result<Vec<f64>> {
        let prof = AxisymProfile::new(self.n, self.fv.theta.clone(), self.k.clone())?;
        Ok(laplace_beltrami_axisym(&prof).values)
    }

    pub fn profile(&self, u: &[f64]) -> Result<AxisymProfile> {
        AxisymProfile::new(self.n, self.fv.theta.clone(), u.to_vec())
    }

    /// Solution of `Av = ω W K v^p` proportional to `u`, assuming `u` solves it up to scale.
    pub fn unnormalized(&self, u: &[f64]) -> Vec<f64> {
        let c = (self.r(u) / self.k_tau(u)).powf(1.0 / (self.p() - 1.0));
        u.iter().map(|v| c * v).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The value at a constant function, `R_0 Vol(S^n)^{1 - 2/(p+1)}` (times `K^{-2/(p+1)}` for constant `K`).
pub fn constant_energy(n: usize, tau: f64) -> Result<f64> {
    let c = RoundMetricConstants::new(n)?;
    let nf = n as f64;
    let p = (nf + 2.0) / (nf - 2.0) - tau;
    Ok(c.r0 * c.vol_n.powf(1.0 - 2.0 / (p + 1.0)))
}

/// Curvature and exponent of a run, serialized alongside reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub n: usize,
    pub nodes: usize,
    pub tau: f64,
    pub p: f64,
}

impl From<&Problem> for ProblemSummary {
    fn from(p: &Problem) -> Self {
        Self {
            n: p.n,
            nodes: p.len(),
            tau: p.tau,
            p: p.p(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_value_is_closed_form() {
        for n in [3, 5, 6] {
            let pr = Problem::new(n, 257, 0.05, |_| 1.0).unwrap();
            let u = pr.normalize(&vec![1.0; pr.len()]);
            let j = pr.functional(&u).unwrap();
            let exact = constant_energy(n, 0.05).unwrap();
            assert!((j - exact).abs() < 1e-12 * exact, "{j} {exact}");
            let (_, g) = pr.riesz_gradient(&u).unwrap();
            assert!(g < 1e-12, "{g}");
        }
    }

    #[test]
    fn scaling_invariance() {
        let pr = Problem::new(5, 129, 0.03, |t| 1.0 + 0.3 * t.cos()).unwrap();
        let u: Vec<f64> = pr
            .theta()
            .iter()
            .map(|t| 1.0 + 0.5 * (2.0 * t).sin())
            .collect();
        let j1 = pr.functional(&u).unwrap();
        let j2 = pr
            .functional(&u.iter().map(|v| 7.3 * v).collect::<Vec<_>>())
            .unwrap();
        assert!((j1 - j2).abs() < 1e-12 * j1);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pr = Problem::new(5, 65, 0.04, |t| 1.0 + 0.4 * t.cos()).unwrap();
        for prob in [pr.clone(), pr.reference()] {
            for _ in 0..5 {
                let u: Vec<f64> = (0..prob.len())
                    .map(|_| rng.random_range(0.5..1.5))
                    .collect();
                let g = prob.gradient(&u).unwrap();
                let mut err = 0.0f64;
                for j in 0..u.len() {
                    let h = 1e-5 * u[j];
                    let mut up = u.clone();
                    up[j] += h;
                    let mut dn = u.clone();
                    dn[j] -= h;
                    let fd =
                        (prob.functional(&up).unwrap() - prob.functional(&dn).unwrap()) / (2.0 * h);
                    err = err.max((fd - g[j]).abs());
                }
                let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(err < 1e-6 * gmax, "{err} vs {gmax}");
            }
        }
    }

    #[test]
    fn tau_range_is_checked() {
        assert!(Problem::new(5, 33, 0.3, |_| 1.0).is_err());
        assert!(Problem::new(5, 33, 0.1, |_| -1.0).is_err());
    }
}
