//! Local normal form `Θ(y) = ⟨γ(f)(y-p), A γ(f)(y-p)⟩`, `f = f(|y-p|²)`:
//! the plain quadratic `⟨y-p, A(y-p)⟩` on `B_{δ_2}(p)`, rotated by `R` from
//! radius `δ_1` on, along the one-parameter group `γ(t) = exp(tS)`, `R = exp(S)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{step_between, ChartField, Jet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalFormPatch {
    pub p: Vec<f64>,
    /// Diagonal of `A`.
    pub a: Vec<f64>,
    /// Skew generator `S` of the rotation path.
    pub generator: DMatrix<f64>,
    pub delta1: f64,
    pub delta2: f64,
    /// `min |∇Θ| / |y - p|` over the annulus scan.
    pub annulus_min_gradient: f64,
}

/// Builds the patch and scans `δ_2 ≤ |y-p| ≤ δ_1` with `samples` points for spurious roots.
pub fn normal_form_patch(
    p: Vec<f64>,
    a: Vec<f64>,
    generator: DMatrix<f64>,
    delta1: f64,
    delta2: f64,
    samples: usize,
) -> Result<NormalFormPatch> {
    let n = p.len();
    if a.len() != n || generator.shape() != (n, n) {
        return Err(Error::Config("patch data dimensions disagree".into()));
    }
    if a.iter().any(|v| *v == 0.0 || !v.is_finite()) || a[n - 1] <= 0.0 {
        return Err(Error::Config("A must be nonsingular with A_nn > 0".into()));
    }
    if (&generator + generator.transpose()).amax() > 1e-12 {
        return Err(Error::Config(
            "rotation generator must be skew-symmetric".into(),
        ));
    }
    if !(delta1 > delta2 && delta2 > 0.0) {
        return Err(Error::Config(format!(
            "need delta1 > delta2 > 0, got {delta1}, {delta2}"
        )));
    }
    let mut patch = NormalFormPatch {
        p,
        a,
        generator,
        delta1,
        delta2,
        annulus_min_gradient: 0.0,
    };
    let scale = patch.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (ratio, at) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7061 ^ i as u64);
            let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            let r = delta2 + (delta1 - delta2) * rng.random::<f64>();
            let y =
                DVector::from_iterator(n, patch.p.iter().zip(&dir).map(|(c, d)| c + r * d / norm));
            (patch.jet(&y).g.norm() / r, y)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::INFINITY, DVector::zeros(n)));
    if !(ratio > 1e-8 * scale) {
        return Err(Error::Construction(format!(
            "spurious critical point of the normal-form patch near {:?} (|∇Θ|/r = {ratio:.3e})",
            at.as_slice()
        )));
    }
    patch.annulus_min_gradient = ratio;
    Ok(patch)
}

impl NormalFormPatch {
    pub fn rotation(&self) -> DMatrix<f64> {
        self.generator.clone().exp()
    }
}

impl ChartField for NormalFormPatch {
    fn dim(&self) -> usize {
        self.p.len()
    }

    fn jet(&self, y: &DVector<f64>) -> Jet {
        let n = self.p.len();
        let z = y - DVector::from_column_slice(&self.p);
        let q = z.norm_squared();
        let (phi, f1, f2) = step_between(q, self.delta2 * self.delta2, self.delta1 * self.delta1);
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&self.a));
        let s = &self.generator;
        let gamma = (s * phi).exp();
        let comm = &a * s - s * &a;
        let m0 = gamma.transpose() * &a * &gamma;
        let m1 = gamma.transpose() * &comm * &gamma;
        let m2 = gamma.transpose() * (&comm * s - s * &comm) * &gamma;
        let mz = &m0 * &z;
        let m1z = &m1 * &z;
        let q1 = z.dot(&m1z);
        let q2 = z.dot(&(&m2 * &z));
        let dphi = &z * (2.0 * f1);
        let hphi = DMatrix::identity(n, n) * (2.0 * f1) + &z * z.transpose() * (4.0 * f2);
        Jet {
            v: z.dot(&mz),
            g: &mz * 2.0 + &dphi * q1,
            h: &m0 * 2.0
                + (&m1z * dphi.transpose() + &dphi * m1z.transpose()) * 2.0
                + &dphi * dphi.transpose() * q2
                + hphi * q1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_patch(samples: usize) -> NormalFormPatch {
        let mut s = DMatrix::zeros(3, 3);
        s[(0, 1)] = 0.4;
        s[(1, 0)] = -0.4;
        s[(1, 2)] = 0.2;
        s[(2, 1)] = -0.2;
        normal_form_patch(
            vec![0.1, -0.2, 0.05],
            vec![-1.0, 2.0, 0.5],
            s,
            0.1,
            0.0125,
            samples,
        )
        .unwrap()
    }

    #[test]
    fn quadratic_inside_inner_ball_and_critical_at_center() {
        let p = sample_patch(1000);
        let c = DVector::from_column_slice(&p.p);
        assert_eq!(p.jet(&c).g.norm(), 0.0);
        let z = DVector::from_vec(vec![0.005, 0.003, -0.007]);
        let y = &c + &z;
        let expect = -z[0] * z[0] + 2.0 * z[1] * z[1] + 0.5 * z[2] * z[2];
        assert!((p.jet(&y).v - expect).abs() < 1e-16);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = sample_patch(10);
        let y = DVector::from_vec(vec![0.16, -0.17, 0.02]);
        let j = p.jet(&y);
        let h = 1e-6;
        for k in 0..3 {
            let mut yp = y.clone();
            yp[k] += h;
            let mut ym = y.clone();
            ym[k] -= h;
            let (jp, jm) = (p.jet(&yp), p.jet(&ym));
            assert!(((jp.v - jm.v) / (2.0 * h) - j.g[k]).abs() < 1e-9);
            for i in 0..3 {
                assert!(((jp.g[i] - jm.g[i]) / (2.0 * h) - j.h[(i, k)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn annulus_scan_finds_no_root() {
        let p = sample_patch(100_000);
        assert!(p.annulus_min_gradient > 0.0);
    }

    #[test]
    fn rejects_bad_data() {
        let s = DMatrix::zeros(2, 2);
        assert!(
            normal_form_patch(vec![0.0; 2], vec![1.0, -1.0], s.clone(), 0.1, 0.01, 10).is_err()
        );
        assert!(normal_form_patch(vec![0.0; 2], vec![1.0, 1.0], s.clone(), 0.01, 0.1, 10).is_err());
        assert!(normal_form_patch(
            vec![0.0; 2],
            vec![1.0, 1.0],
            DMatrix::identity(2, 2),
            0.1,
            0.01,
            10
        )
        .is_err());
    }
}
