//! The monotone base `𝒦`: quadratic `a·y_n²` near `S`, affine `ε_0(1 + x_{n+1})`
//! away from it, glued radially in the chart.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{chart_coords, pull_back, step_between, Jet};
use crate::error::{domain, Error, Result};
use crate::sphere::{stereo_lift, ChartPoint, FieldExt, Pole, ScalarField, SpherePoint};

/// `𝒦` for given `ε_0` and `δ_0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseMonotoneField {
    pub n: usize,
    pub eps0: f64,
    pub delta0: f64,
    /// Coefficient of `y_n²` near `S`: `ε_0 / (8 n⁴)`.
    pub a: f64,
    /// `|y|²` at `x_{n+1} = -1 + δ_0` and at `x_{n+1} = -1 + 2δ_0`.
    pub s0: f64,
    pub s1: f64,
}

pub fn base_monotone_field(n: usize, eps0: f64, delta0: f64) -> Result<BaseMonotoneField> {
    if n < 3 {
        return domain(format!("n = {n} must be at least 3"));
    }
    if !(delta0 > 0.0 && delta0 < 0.25) {
        return domain(format!("delta0 = {delta0} must lie in (0, 1/4)"));
    }
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return domain(format!("eps0 = {eps0} must be positive"));
    }
    Ok(BaseMonotoneField {
        n,
        eps0,
        delta0,
        a: eps0 / (8.0 * (n as f64).powi(4)),
        s0: delta0 / (2.0 - delta0),
        s1: delta0 / (1.0 - delta0),
    })
}

impl BaseMonotoneField {
    /// Chart jet at `y` with `|y| < 1`.
    pub fn chart_jet(&self, y: &DVector<f64>) -> Jet {
        let n = self.n;
        let s = y.norm_squared();
        let quad = || {
            let mut g = DVector::zeros(n);
            g[n - 1] = 2.0 * self.a * y[n - 1];
            let mut h = DMatrix::zeros(n, n);
            h[(n - 1, n - 1)] = 2.0 * self.a;
            Jet {
                v: self.a * y[n - 1] * y[n - 1],
                g,
                h,
            }
        };
        let affine = || {
            let d = 1.0 + s;
            Jet::radial(y, (2.0 * s / d, 2.0 / (d * d), -4.0 / (d * d * d))).scale(self.eps0)
        };
        if s <= self.s0 {
            quad()
        } else if s >= self.s1 {
            affine()
        } else {
            let chi = Jet::radial(y, step_between(s, self.s0, self.s1));
            let one_minus = Jet::constant(n, 1.0).plus(&chi.clone().scale(-1.0));
            one_minus.mul(&quad()).plus(&chi.mul(&affine()))
        }
    }

    /// `|y|²` bound of a southern cap `{x_{n+1} < h}`.
    pub fn cap_radius_sq(h: f64) -> f64 {
        (1.0 + h) / (1.0 - h)
    }
}

impl ScalarField for BaseMonotoneField {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        if x[self.n] >= 0.0 {
            self.eps0 * (1.0 + x[self.n])
        } else {
            self.chart_jet(&chart_coords(x)).v
        }
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        if x[self.n] >= 0.0 {
            let mut g = DVector::zeros(self.n + 1);
            g[self.n] = self.eps0;
            g
        } else {
            pull_back(x, &self.chart_jet(&chart_coords(x))).0
        }
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        if x[self.n] >= 0.0 {
            DMatrix::zeros(self.n + 1, self.n + 1)
        } else {
            pull_back(x, &self.chart_jet(&chart_coords(x))).1
        }
    }
}

/// A southern cap `{x_{n+1} < height}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CapRegion {
    pub height: f64,
}

impl CapRegion {
    pub fn contains(&self, p: &SpherePoint) -> bool {
        p.height() < self.height
    }

    /// Uniform-in-`|y|²` random points of the cap plus a radial/polar grid.
    pub fn samples(&self, n: usize, random: usize, grid: usize, seed: u64) -> Vec<SpherePoint> {
        let smax = BaseMonotoneField::cap_radius_sq(self.height) * (1.0 - 1e-12);
        let mut pts = Vec::with_capacity(random + grid * grid);
        for i in 0..grid {
            let r = smax.sqrt() * i as f64 / (grid - 1).max(1) as f64;
            for k in 0..grid {
                let alpha = std::f64::consts::FRAC_PI_2 * k as f64 / (grid - 1).max(1) as f64;
                let mut y = vec![0.0; n];
                y[n - 1] = r * alpha.cos();
                y[0] = r * alpha.sin();
                pts.push(stereo_lift(&ChartPoint {
                    y,
                    pole: Pole::North,
                }));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random {
            let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            let r = (smax * rng.random::<f64>()).sqrt();
            let y = dir.iter().map(|v| v * r / norm).collect();
            pts.push(stereo_lift(&ChartPoint {
                y,
                pole: Pole::North,
            }));
        }
        pts
    }
}

/// Outcome of the numerical checks on `𝒦`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseCheck {
    pub region: CapRegion,
    /// `min_U Δ𝒦` on the grid.
    pub c: f64,
    pub c_location: Vec<f64>,
    /// Minimum over independent random points of `U`, required `≥ c/2`.
    pub validation_min: f64,
    /// `min ⟨∇𝒦, ∇x_{n+1}⟩` over random points of the sphere.
    pub monotonicity_min: f64,
    pub samples: usize,
}

/// Laplacian lower bound on `U` and the monotonicity scan (`monotone_samples` points).
pub fn check_base(
    field: &BaseMonotoneField,
    region: CapRegion,
    monotone_samples: usize,
) -> Result<BaseCheck> {
    let n = field.n;
    let grid = region.samples(n, 0, 400, 0);
    let (c, c_at) = grid
        .par_iter()
        .map(|p| (field.laplacian(p), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("nonempty grid");
    if !(c > 0.0) {
        return Err(Error::Construction(format!(
            "laplacian of the base is {c:.3e} <= 0 at {:?}; shrink the cap U",
            c_at.coords()
        )));
    }
    let check = region.samples(n, 20_000, 0, 1);
    let (vmin, v_at) = check
        .par_iter()
        .map(|p| (field.laplacian(p), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("nonempty sample");
    if vmin < 0.5 * c {
        return Err(Error::Construction(format!(
            "laplacian of the base dips to {vmin:.3e} < c/2 = {:.3e} at {:?}",
            0.5 * c,
            v_at.coords()
        )));
    }
    let mono = (0..monotone_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f6e6f ^ i as u64);
            let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let p = SpherePoint::new(v).expect("nonzero gaussian");
            let g = field.intrinsic_gradient(&p);
            let h = p.height();
            // ∇x_{n+1} = e_{n+1} - h x
            g[n] - h * g.dot(&DVector::from_column_slice(p.coords()))
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(BaseCheck {
        region,
        c,
        c_location: c_at.coords().to_vec(),
        validation_min: vmin,
        monotonicity_min: mono,
        samples: grid.len() + check.len() + monotone_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: &BaseMonotoneField, x: &[f64]) {
        let g = f.gradient(x);
        let h = 1e-6;
        for k in 0..x.len() {
            let mut xp = x.to_vec();
            xp[k] += h;
            let mut xm = x.to_vec();
            xm[k] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert!(
                (fd - g[k]).abs() < 1e-8 * f.eps0.max(1.0),
                "grad {k}: {fd} vs {}",
                g[k]
            );
            let hd = (f.gradient(&xp) - f.gradient(&xm)) / (2.0 * h);
            let hs = f.hessian(x);
            for i in 0..x.len() {
                assert!((hd[i] - hs[(i, k)]).abs() < 1e-6, "hess {i}{k}");
            }
        }
    }

    #[test]
    fn values_at_poles_and_on_the_axis_plane() {
        let f = base_monotone_field(5, 0.004, 0.2).unwrap();
        assert!((f.value(SpherePoint::north(5).coords()) - 0.008).abs() < 1e-15);
        assert_eq!(f.value(SpherePoint::south(5).coords()), 0.0);
        let p = stereo_lift(&ChartPoint {
            y: vec![0.1, 0.05, 0.0, 0.2, 0.0],
            pole: Pole::North,
        });
        assert_eq!(f.value(p.coords()), 0.0);
    }

    #[test]
    fn derivatives_in_every_zone() {
        let f = base_monotone_field(4, 0.004, 0.2).unwrap();
        for r2 in [0.05f64, 0.15, 0.2, 0.6] {
            let r: f64 = r2.sqrt();
            let y = vec![0.3 * r, -0.5 * r, 0.1 * r, (1.0f64 - 0.35).sqrt() * r];
            let p = stereo_lift(&ChartPoint {
                y,
                pole: Pole::North,
            });
            fd_check(&f, p.coords());
        }
    }

    #[test]
    fn laplacian_positive_on_inner_cap_and_monotone() {
        let f = base_monotone_field(5, 0.004, 0.2).unwrap();
        let rep = check_base(
            &f,
            CapRegion {
                height: -1.0 + f.delta0,
            },
            100_000,
        )
        .unwrap();
        assert!(rep.c > 0.0 && rep.validation_min >= 0.5 * rep.c);
        assert!(rep.monotonicity_min >= -1e-12, "{}", rep.monotonicity_min);
    }

    #[test]
    fn parameters_are_validated() {
        assert!(base_monotone_field(5, 0.004, 0.3).is_err());
        assert!(base_monotone_field(5, -1.0, 0.2).is_err());
        assert!(base_monotone_field(2, 0.004, 0.2).is_err());
    }
}
