//! `K_m = 1 + 𝒦 + ε_m χ_c(|y|²) P̂(t_m y'/σ)` in the north-pole chart.
//!
//! The template sits in normal form at `S` (every `p_i` on `{y_n = 0}`, no
//! rotation), and the Möbius push `Φ_m` is the chart dilation `y ↦ t_m y`
//! applied to `P̂` under a fixed cutoff `χ_c` (`1` for `|y|² ≤ s_1`, `0` on the
//! northern hemisphere).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::base::{base_monotone_field, BaseMonotoneField};
use super::template::Template;
use super::{chart_coords, pull_back, step_between, Jet};
use crate::error::{Error, Result};
use crate::morse::CriticalPointRecord;
use crate::sphere::{stereo_lift, ChartPoint, FieldExt, Pole, ScalarField, SpherePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsSchedule {
    /// `ε_m = ε_b t_m^{-exponent}`.
    Power { exponent: f64 },
    /// `ε_m = ε_b`; does not converge.
    Constant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmParams {
    pub n: usize,
    /// `M_0..M_n` of the template.
    pub target_counts: Vec<usize>,
    pub eps0: f64,
    /// `δ_0 > δ_1 > δ_2 > δ_3 > 0`; `δ_0` shapes `𝒦`, the rest size the local patches.
    pub deltas: [f64; 4],
    /// Width of the template before dilation.
    pub sigma: f64,
    /// `ε_b`.
    pub eps_base: f64,
    pub eps_schedule: EpsSchedule,
    /// `t_m = t_ratio^m`.
    pub t_ratio: f64,
}

impl KmParams {
    /// Defaults: `ε_0 = 0.004`, `δ_0 = 0.2`, `δ_{i+1} = δ_i/8`, `σ = 0.05`,
    /// `ε_b = 0.1 ε_0 σ²`, `t_m = 2^{m/2}`, `ε_m = ε_b t_m^{-4}`.
    pub fn new(n: usize, target_counts: Vec<usize>) -> Self {
        let eps0 = 0.004;
        let d0 = 0.2;
        let sigma = 0.05;
        Self {
            n,
            target_counts,
            eps0,
            deltas: [d0, d0 / 8.0, d0 / 64.0, d0 / 512.0],
            sigma,
            eps_base: 0.1 * eps0 * sigma * sigma,
            eps_schedule: EpsSchedule::Power { exponent: 4.0 },
            t_ratio: std::f64::consts::SQRT_2,
        }
    }

    pub fn t(&self, m: usize) -> f64 {
        self.t_ratio.powi(m as i32)
    }

    pub fn eps(&self, m: usize) -> f64 {
        match self.eps_schedule {
            EpsSchedule::Power { exponent } => self.eps_base * self.t(m).powf(-exponent),
            EpsSchedule::Constant => self.eps_base,
        }
    }

    /// Whether `ε_m` strictly decreases to zero.
    pub fn schedule_decays(&self) -> bool {
        matches!(self.eps_schedule, EpsSchedule::Power { exponent } if exponent > 0.0)
            && self.t_ratio > 1.0
    }

    fn validate(&self) -> Result<Template> {
        if self.deltas.windows(2).any(|w| !(w[1] < w[0])) || self.deltas[3] <= 0.0 {
            return Err(Error::Config(format!(
                "deltas {:?} must decrease strictly to a positive value",
                self.deltas
            )));
        }
        if !(self.sigma > 0.0 && self.eps_base > 0.0 && self.t_ratio >= 1.0) {
            return Err(Error::Config(
                "sigma, eps_base must be positive and t_ratio >= 1".into(),
            ));
        }
        Template::from_counts(self.n, &self.target_counts)
    }
}

/// The function `K_m` itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmFunction {
    pub base: BaseMonotoneField,
    pub template: Template,
    pub eps: f64,
    pub t: f64,
    pub sigma: f64,
}

impl KmFunction {
    /// `ε_m χ_c P̂(t y'/σ)` in the chart.
    pub fn bump_jet(&self, y: &DVector<f64>) -> Jet {
        let n = self.base.n;
        let s = y.norm_squared();
        if s >= 1.0 || self.eps == 0.0 {
            return Jet::constant(n, 0.0);
        }
        let k = self.t / self.sigma;
        let scaled: Vec<f64> = (0..n - 1).map(|i| k * y[i]).collect();
        let w = self.template.eval(&scaled);
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for (i, wi) in w.iter().enumerate() {
            g[i] = k * wi[1];
            h[(i, i)] = k * k * wi[2];
        }
        let p = Jet {
            v: w.iter().map(|wi| wi[0]).sum(),
            g,
            h,
        };
        let (c, c1, c2) = step_between(s, self.base.s1, 1.0);
        let cut = Jet::radial(y, (1.0 - c, -c1, -c2));
        cut.mul(&p).scale(self.eps)
    }

    pub fn chart_jet(&self, y: &DVector<f64>) -> Jet {
        let mut j = self.base.chart_jet(y).plus(&self.bump_jet(y));
        j.v += 1.0;
        j
    }

    /// `K_0 = 1 + 𝒦`.
    pub fn limit(&self) -> KmFunction {
        KmFunction {
            eps: 0.0,
            ..self.clone()
        }
    }
}

impl ScalarField for KmFunction {
    fn dim(&self) -> usize {
        self.base.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        if x[self.base.n] >= 0.0 {
            1.0 + self.base.value(x)
        } else {
            self.chart_jet(&chart_coords(x)).v
        }
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        if x[self.base.n] >= 0.0 {
            self.base.gradient(x)
        } else {
            pull_back(x, &self.chart_jet(&chart_coords(x))).0
        }
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        if x[self.base.n] >= 0.0 {
            self.base.hessian(x)
        } else {
            pull_back(x, &self.chart_jet(&chart_coords(x))).1
        }
    }
}

/// One member of the sequence with its critical points known by construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmField {
    pub m: usize,
    pub params: KmParams,
    pub function: KmFunction,
    pub analytic_crits: Vec<CriticalPointRecord>,
    /// `max |∇(K_m - K_0)| / |∇K_0|` sampled where the cutoff acts.
    pub gradient_ratio: f64,
}

impl KmField {
    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: &std::path::Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn record(k: &KmFunction, p: SpherePoint, morse_index: usize) -> CriticalPointRecord {
    let (_, h) = k.tangent_hessian(&p);
    let eig = SymmetricEigen::new(h).eigenvalues;
    CriticalPointRecord {
        value: k.value_at(&p),
        laplacian: k.laplacian(&p),
        hessian_margin: eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())),
        morse_index,
        location: p,
    }
}

/// Builds `K_m`, its analytic critical list, and checks that the
/// perturbation cannot create critical points where the cutoff acts.
pub fn assemble_km(params: &KmParams, m: usize) -> Result<KmField> {
    let template = params.validate()?;
    let n = params.n;
    let base = base_monotone_field(n, params.eps0, params.deltas[0])?;
    let f = KmFunction {
        base,
        template,
        eps: params.eps(m),
        t: params.t(m),
        sigma: params.sigma,
    };

    let k_min = 1.0 + f.eps * f.template.minimum();
    if !(k_min > 0.0) {
        return Err(Error::Construction(format!(
            "K_m reaches {k_min:.3e} <= 0; decrease eps_base"
        )));
    }

    let scale = f.sigma / f.t;
    let mut crits = vec![record(&f, SpherePoint::north(n), n)];
    for (c, index) in f.template.critical_points() {
        let mut y: Vec<f64> = c.iter().map(|v| v * scale).collect();
        y.push(0.0);
        if y.iter().map(|v| v * v).sum::<f64>() >= f.base.s0 {
            return Err(Error::Construction(format!(
                "template critical point at |y|² >= {:.3e} leaves the quadratic zone; decrease sigma",
                f.base.s0
            )));
        }
        crits.push(record(
            &f,
            stereo_lift(&ChartPoint {
                y,
                pole: Pole::North,
            }),
            index,
        ));
    }

    let (s1, k0) = (f.base.s1, f.limit());
    let gradient_ratio = (0..4000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6b6d ^ i);
            let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            let r = (s1 + (1.0 - s1) * rng.random::<f64>()).sqrt();
            let y = DVector::from_iterator(n, dir.iter().map(|v| v * r / norm));
            f.bump_jet(&y).g.norm() / k0.chart_jet(&y).g.norm()
        })
        .reduce(|| 0.0, f64::max);
    if gradient_ratio >= 0.5 {
        return Err(Error::Construction(format!(
            "eps_m too large at m = {m}: perturbation gradient reaches {gradient_ratio:.3} of the base gradient; \
             make eps_m decay faster"
        )));
    }

    Ok(KmField {
        m,
        params: params.clone(),
        function: f,
        analytic_crits: crits,
        gradient_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let params = KmParams::new(5, vec![2, 1, 0, 0, 0, 1]);
        let km = assemble_km(&params, 1).unwrap();
        let f = &km.function;
        let h = 1e-7;
        let s = 0.05 / params.t(1);
        for y in [
            vec![0.7 * s, 0.2 * s, -0.3 * s, 0.1 * s, 0.05],
            vec![0.3, 0.2, 0.1, 0.4, -0.3],
            vec![0.5, 0.1, 0.0, 0.3, 0.4],
        ] {
            let x = stereo_lift(&ChartPoint {
                y,
                pole: Pole::North,
            });
            let x = x.coords();
            let g = f.gradient(x);
            let hs = f.hessian(x);
            for k in 0..6 {
                let mut xp = x.to_vec();
                xp[k] += h;
                let mut xm = x.to_vec();
                xm[k] -= h;
                let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-8, "grad {k}: {fd} vs {}", g[k]);
                let hd = (f.gradient(&xp) - f.gradient(&xm)) / (2.0 * h);
                for i in 0..6 {
                    assert!(
                        (hd[i] - hs[(i, k)]).abs() < 1e-5 * (1.0 + hs[(i, k)].abs()),
                        "hess {i}{k}"
                    );
                }
            }
        }
    }

    #[test]
    fn analytic_critical_points_are_critical() {
        let params = KmParams::new(5, vec![2, 1, 0, 0, 0, 1]);
        for m in [0, 4, 8] {
            let km = assemble_km(&params, m).unwrap();
            assert_eq!(km.analytic_crits.len(), 4);
            for r in &km.analytic_crits {
                let g = km.function.intrinsic_gradient(&r.location);
                assert!(g.norm() < 1e-15, "m = {m}: {}", g.norm());
                if r.morse_index < 5 {
                    assert!(r.laplacian > 0.0);
                }
            }
        }
    }

    #[test]
    fn pinch_is_close_to_one() {
        let params = KmParams::new(5, vec![1, 0, 0, 0, 0, 1]);
        let km = assemble_km(&params, 0).unwrap();
        let vals: Vec<f64> = km.analytic_crits.iter().map(|r| r.value).collect();
        let ratio = vals.iter().cloned().fold(0.0, f64::max)
            / vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(ratio <= 1.01 && ratio > 1.0, "{ratio}");
    }

    #[test]
    fn slow_decay_is_rejected() {
        let mut params = KmParams::new(5, vec![1, 0, 0, 0, 0, 1]);
        params.eps_base = 100.0 * params.eps0;
        assert!(matches!(
            assemble_km(&params, 0),
            Err(Error::Construction(_))
        ));
    }
}
