//! Vertical shear `Θ̃(y', y_n) = Θ(y', y_n + 𝒢(y'))`, with `𝒢 = p_i^n` on
//! `B_{δ_3}(p_i')` and `0` outside the balls `B_{2δ_3}(p_i')`: critical points
//! `(p_i', p_i^n)` of `Θ` move to `(p_i', 0)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{step_between, ChartField, Jet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShearDeform<F> {
    pub inner: F,
    /// `(p_i', p_i^n)`.
    pub points: Vec<(Vec<f64>, f64)>,
    pub delta3: f64,
}

pub fn shear_deform<F: ChartField>(
    inner: F,
    points: Vec<(Vec<f64>, f64)>,
    delta3: f64,
) -> Result<ShearDeform<F>> {
    let d = inner.dim() - 1;
    if points.iter().any(|(p, _)| p.len() != d) {
        return Err(Error::Config(format!(
            "projected points must have {d} coordinates"
        )));
    }
    if !(delta3 > 0.0) {
        return Err(Error::Config("delta3 must be positive".into()));
    }
    for (i, (a, _)) in points.iter().enumerate() {
        for (b, _) in &points[i + 1..] {
            let dist = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if dist < 4.0 * delta3 {
                return Err(Error::Config(format!(
                    "projected points {dist:.3e} apart, below 4 delta3 = {:.3e}; choose another rotation",
                    4.0 * delta3
                )));
            }
        }
    }
    Ok(ShearDeform {
        inner,
        points,
        delta3,
    })
}

impl<F: ChartField> ShearDeform<F> {
    /// `𝒢` on `R^{n-1}`.
    pub fn shift(&self, yp: &DVector<f64>) -> Jet {
        let d = yp.len();
        let r2 = self.delta3 * self.delta3;
        self.points
            .iter()
            .fold(Jet::constant(d, 0.0), |acc, (p, pn)| {
                let z = yp - DVector::from_column_slice(p);
                let (v, d1, d2) = step_between(z.norm_squared(), r2, 4.0 * r2);
                acc.plus(&Jet::radial(&z, (1.0 - v, -d1, -d2)).scale(*pn))
            })
    }
}

impl<F: ChartField> ChartField for ShearDeform<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn jet(&self, y: &DVector<f64>) -> Jet {
        let n = y.len();
        let g = self.shift(&y.rows(0, n - 1).into_owned());
        let mut w = y.clone();
        w[n - 1] += g.v;
        let inner = self.inner.jet(&w);
        let mut jac = DMatrix::identity(n, n);
        for k in 0..n - 1 {
            jac[(n - 1, k)] = g.g[k];
        }
        let mut h = jac.transpose() * &inner.h * &jac;
        let dn = inner.g[n - 1];
        for i in 0..n - 1 {
            for k in 0..n - 1 {
                h[(i, k)] += dn * g.h[(i, k)];
            }
        }
        Jet {
            v: inner.v,
            g: jac.transpose() * &inner.g,
            h,
        }
    }
}
