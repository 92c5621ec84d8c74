//! The curvature sequence `K_m = K_0 + ε_m K̂_m`: a single nondegenerate
//! maximum at `N`, every other critical point clustered at `S` with positive
//! Laplacian, and `K_m → K_0` in `C³`.
//!
//! Functions are built in the north-pole chart `y = x'/(1 - x_{n+1})` (which
//! sends `S` to `0`) from [`Jet`]s carrying closed-form first and second
//! derivatives, then pulled back to the ambient sphere.

mod assemble;
mod base;
mod patch;
mod shear;
mod template;
mod verify;

pub use assemble::{assemble_km, EpsSchedule, KmField, KmFunction, KmParams};
pub use base::{base_monotone_field, check_base, BaseCheck, BaseMonotoneField, CapRegion};
pub use patch::{normal_form_patch, NormalFormPatch};
pub use shear::{shear_deform, ShearDeform};
pub use template::{Template, WellProfile};
pub use verify::{verify_km, ClauseA, ClauseB, ClauseC, VerificationReport, VerifyOptions};

use nalgebra::{DMatrix, DVector};

use crate::sphere::chart_pullback;

/// Value, gradient and Hessian of a function at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub v: f64,
    pub g: DVector<f64>,
    pub h: DMatrix<f64>,
}

impl Jet {
    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            v: c,
            g: DVector::zeros(dim),
            h: DMatrix::zeros(dim, dim),
        }
    }

    /// `F(|y|²)` from `(F, F', F'')` at `s = |y|²`.
    pub fn radial(y: &DVector<f64>, f: (f64, f64, f64)) -> Self {
        let (v, d1, d2) = f;
        let dim = y.len();
        Self {
            v,
            g: y * (2.0 * d1),
            h: DMatrix::identity(dim, dim) * (2.0 * d1) + y * y.transpose() * (4.0 * d2),
        }
    }

    /// The coordinate function `y_k`.
    pub fn coordinate(dim: usize, y: &DVector<f64>, k: usize) -> Self {
        let mut g = DVector::zeros(dim);
        g[k] = 1.0;
        Self {
            v: y[k],
            g,
            h: DMatrix::zeros(dim, dim),
        }
    }

    pub fn scale(mut self, a: f64) -> Self {
        self.v *= a;
        self.g *= a;
        self.h *= a;
        self
    }

    pub fn plus(mut self, other: &Jet) -> Self {
        self.v += other.v;
        self.g += &other.g;
        self.h += &other.h;
        self
    }

    pub fn mul(&self, other: &Jet) -> Self {
        Self {
            v: self.v * other.v,
            g: &self.g * other.v + &other.g * self.v,
            h: &self.h * other.v
                + &other.h * self.v
                + &self.g * other.g.transpose()
                + &other.g * self.g.transpose(),
        }
    }
}

/// A function on the chart `R^n`.
pub trait ChartField: Send + Sync {
    fn dim(&self) -> usize;
    fn jet(&self, y: &DVector<f64>) -> Jet;
}

/// `(S, S', S'')` of the quintic smoothstep `u³(10 - 15u + 6u²)`, clamped to `[0, 1]`.
pub fn smoothstep(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if u >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        (
            u * u * u * (10.0 - 15.0 * u + 6.0 * u * u),
            30.0 * u * u * (1.0 - u) * (1.0 - u),
            60.0 * u * (1.0 - u) * (1.0 - 2.0 * u),
        )
    }
}

/// Smooth step from `0` at `a` to `1` at `b`, with derivatives in `s`.
pub fn step_between(s: f64, a: f64, b: f64) -> (f64, f64, f64) {
    let w = b - a;
    let (v, d1, d2) = smoothstep((s - a) / w);
    (v, d1 / w, d2 / (w * w))
}

/// Ambient gradient and Hessian of `f ∘ π_N` from the chart jet at `y(x)`.
pub fn pull_back(x: &[f64], jet: &Jet) -> (DVector<f64>, DMatrix<f64>) {
    let (_, j, second) = chart_pullback(x);
    let grad = j.transpose() * &jet.g;
    let mut hess = j.transpose() * &jet.h * &j;
    for (i, s) in second.iter().enumerate() {
        hess += s * jet.g[i];
    }
    (grad, hess)
}

/// Chart coordinates of an ambient point with `x_{n+1} < 1`.
pub fn chart_coords(x: &[f64]) -> DVector<f64> {
    let n = x.len() - 1;
    let q = 1.0 - x[n];
    DVector::from_iterator(n, x[..n].iter().map(|v| v / q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_endpoints_and_derivatives() {
        assert_eq!(smoothstep(0.0), (0.0, 0.0, 0.0));
        assert_eq!(smoothstep(1.0), (1.0, 0.0, 0.0));
        let h = 1e-6;
        for u in [0.1, 0.37, 0.5, 0.9] {
            let fd1 = (smoothstep(u + h).0 - smoothstep(u - h).0) / (2.0 * h);
            let fd2 = (smoothstep(u + h).1 - smoothstep(u - h).1) / (2.0 * h);
            assert!((fd1 - smoothstep(u).1).abs() < 1e-8);
            assert!((fd2 - smoothstep(u).2).abs() < 1e-7);
        }
    }

    #[test]
    fn jet_product_rule() {
        let y = DVector::from_vec(vec![0.3, -0.2, 0.5]);
        let f = |y: &DVector<f64>| {
            let a = Jet::radial(
                y,
                (
                    y.norm_squared().sin(),
                    y.norm_squared().cos(),
                    -y.norm_squared().sin(),
                ),
            );
            let b = Jet::coordinate(3, y, 1);
            a.mul(&b)
        };
        let j = f(&y);
        let h = 1e-6;
        for k in 0..3 {
            let mut yp = y.clone();
            yp[k] += h;
            let mut ym = y.clone();
            ym[k] -= h;
            let (p, m) = (f(&yp), f(&ym));
            assert!(((p.v - m.v) / (2.0 * h) - j.g[k]).abs() < 1e-9);
            for i in 0..3 {
                assert!(((p.g[i] - m.g[i]) / (2.0 * h) - j.h[(i, k)]).abs() < 1e-8);
            }
        }
    }
}
