//! Functions of the polar angle only, sampled on a grid over `[0, π]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::quadrature::sin_power_integral;
use super::sphere_volume;
use crate::error::{Error, Result};

/// A function `u(θ)` on `S^n` invariant under rotations fixing the poles.
///
/// `θ` is measured from the north pole; the grid must start at `0`, end at
/// `π` and be strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymProfile {
    pub n: usize,
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
}

const ENDPOINT_TOL: f64 = 1e-12;

impl AxisymProfile {
    pub fn new(n: usize, theta: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Schema(format!("sphere dimension {n} too small")));
        }
        if theta.len() != values.len() {
            return Err(Error::Schema(format!(
                "grid has {} nodes but {} values",
                theta.len(),
                values.len()
            )));
        }
        if theta.len() < 5 {
            return Err(Error::Schema("profile needs at least 5 nodes".into()));
        }
        if theta[0].abs() > ENDPOINT_TOL
            || (theta[theta.len() - 1] - std::f64::consts::PI).abs() > ENDPOINT_TOL
        {
            return Err(Error::Schema("grid must span [0, pi]".into()));
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Schema("grid is not strictly increasing".into()));
        }
        if values.iter().chain(&theta).any(|v| !v.is_finite()) {
            return Err(Error::Schema("non-finite profile entry".into()));
        }
        Ok(Self { n, theta, values })
    }

    /// Samples `f` on `nodes` equally spaced angles including both poles.
    pub fn uniform(n: usize, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if nodes < 5 {
            return Err(Error::Schema("profile needs at least 5 nodes".into()));
        }
        let h = std::f64::consts::PI / (nodes - 1) as f64;
        let theta: Vec<f64> = (0..nodes).map(|j| j as f64 * h).collect();
        let values = theta.iter().map(|&t| f(t)).collect();
        Self::new(n, theta, values)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.n, self.theta.clone(), values)
    }

    /// Linear interpolation in `θ`.
    pub fn eval(&self, theta: f64) -> f64 {
        let t = theta.clamp(0.0, std::f64::consts::PI);
        let j = self
            .theta
            .partition_point(|&g| g <= t)
            .clamp(1, self.len() - 1);
        let (a, b) = (self.theta[j - 1], self.theta[j]);
        let s = (t - a) / (b - a);
        (1.0 - s) * self.values[j - 1] + s * self.values[j]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["theta", "value"])?;
        for (t, v) in self.theta.iter().zip(&self.values) {
            w.write_record([format!("{t:.17e}"), format!("{v:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(n: usize, path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "theta" || &headers[1] != "value" {
            return Err(Error::Schema(
                "profile CSV must have header theta,value".into(),
            ));
        }
        let mut theta = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Schema(format!("bad number {s:?}: {e}")))
            };
            theta.push(parse(&rec[0])?);
            values.push(parse(&rec[1])?);
        }
        Self::new(n, theta, values)
    }
}

/// `Δu = u'' + (n-1) cot θ u'` on the grid, second order in the local spacing.
///
/// At the poles the profile is reflected (`u(-θ) = u(θ)`), which gives
/// `Δu = 2n (u_1 - u_0)/h^2`.
pub fn laplace_beltrami_axisym(u: &AxisymProfile) -> AxisymProfile {
    let n = u.n as f64;
    let m = u.len();
    let (t, v) = (&u.theta, &u.values);
    let mut out = vec![0.0; m];
    let h0 = t[1] - t[0];
    out[0] = 2.0 * n * (v[1] - v[0]) / (h0 * h0);
    let hm = t[m - 1] - t[m - 2];
    out[m - 1] = 2.0 * n * (v[m - 2] - v[m - 1]) / (hm * hm);
    for j in 1..m - 1 {
        let hl = t[j] - t[j - 1];
        let hr = t[j + 1] - t[j];
        let denom = hl * hr * (hl + hr);
        let d1 = (hl * hl * v[j + 1] - hr * hr * v[j - 1] + (hr * hr - hl * hl) * v[j]) / denom;
        let d2 = 2.0 * (hl * v[j + 1] - (hl + hr) * v[j] + hr * v[j - 1]) / denom;
        out[j] = d2 + (n - 1.0) * t[j].cos() / t[j].sin() * d1;
    }
    AxisymProfile {
        n: u.n,
        theta: u.theta.clone(),
        values: out,
    }
}

/// `∫_{S^n} f dV = |S^{n-1}| ∫_0^π f(θ) sin^{n-1}θ dθ` by the trapezoid rule.
///
/// The weight vanishes to order `n-1` at both poles, so the endpoint
/// corrections of the Euler–Maclaurin expansion start at `h^4` (and vanish
/// entirely for odd `n` and smooth `f`).
pub fn integrate_axisym(f: &AxisymProfile) -> f64 {
    let k = f.n as i32 - 1;
    let g: Vec<f64> = f
        .theta
        .iter()
        .zip(&f.values)
        .map(|(t, v)| v * t.sin().powi(k))
        .collect();
    let mut s = 0.0;
    for j in 0..f.len() - 1 {
        s += 0.5 * (f.theta[j + 1] - f.theta[j]) * (g[j] + g[j + 1]);
    }
    sphere_volume(f.n - 1) * s
}

/// Finite-volume weights on a uniform polar grid of `nodes` points.
///
/// `cell[j] = ∫ sin^{n-1}` over the dual cell of node `j` and
/// `edge[j] = ∫_{θ_j}^{θ_{j+1}} sin^{n-1} / h^2`, so that
/// `Σ cell[j] u_j^2` and `Σ edge[j] (u_{j+1}-u_j)^2` approximate
/// `∫ u^2` and `∫ |∇u|^2` divided by `|S^{n-1}|`.
#[derive(Debug, Clone)]
pub struct FvWeights {
    pub n: usize,
    pub h: f64,
    pub theta: Vec<f64>,
    pub cell: Vec<f64>,
    pub edge: Vec<f64>,
    /// `|S^{n-1}|`.
    pub omega: f64,
}

impl FvWeights {
    pub fn new(n: usize, nodes: usize) -> Self {
        assert!(nodes >= 5);
        let h = std::f64::consts::PI / (nodes - 1) as f64;
        let k = n - 1;
        let theta: Vec<f64> = (0..nodes).map(|j| j as f64 * h).collect();
        let mut cell = vec![0.0; nodes];
        let mut edge = vec![0.0; nodes - 1];
        for j in 0..nodes - 1 {
            let mid = theta[j] + 0.5 * h;
            cell[j] += sin_power_integral(k, theta[j], mid);
            cell[j + 1] += sin_power_integral(k, mid, theta[j + 1]);
            edge[j] = sin_power_integral(k, theta[j], theta[j + 1]) / (h * h);
        }
        Self {
            n,
            h,
            theta,
            cell,
            edge,
            omega: sphere_volume(n - 1),
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// `∫_{S^n} f` for nodal values `f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.omega * self.cell.iter().zip(f).map(|(w, v)| w * v).sum::<f64>()
    }

    /// `∫_{S^n} |∇u|^2` for nodal values `u`.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        self.omega
            * self
                .edge
                .iter()
                .zip(u.windows(2))
                .map(|(e, w)| e * (w[1] - w[0]).powi(2))
                .sum::<f64>()
    }
}
