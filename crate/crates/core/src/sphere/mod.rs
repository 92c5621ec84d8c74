//! Geometry of the round sphere `S^n ⊂ R^{n+1}`.
//!
//! Points are unit vectors in `R^{n+1}`; the last coordinate is the height
//! `y_{n+1}`, so the north pole is `e_{n+1}` and the south pole `-e_{n+1}`.
//! Stereographic charts, Möbius dilations fixing both poles, the round metric
//! constants, axisymmetric profiles and scalar fields live here.

mod axisym;
mod field;
pub mod quadrature;

pub use axisym::{integrate_axisym, laplace_beltrami_axisym, AxisymProfile, FvWeights};
pub use field::{
    chart_pullback, tangent_basis, AxisymPolyField, ConstantField, CoordinateField, CubicField,
    FieldExt, LinearCombination, ScalarField,
};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerance used when checking that a vector lies on the unit sphere.
pub const UNIT_TOL: f64 = 1e-12;

/// A point of `S^n`, stored as a unit vector of length `n + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Normalizes `coords` onto the sphere. Fails on zero or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Schema(
                "sphere point needs at least 2 coordinates".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Schema("non-finite sphere coordinates".into()));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return domain("cannot normalize the zero vector");
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }

    pub fn north(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[n] = 1.0;
        Self { coords }
    }

    pub fn south(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[n] = -1.0;
        Self { coords }
    }

    /// The point `e_i` (0-based ambient index).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[i] = 1.0;
        Self { coords }
    }

    /// Point at polar angle `theta` from the north pole in the `(e_1, e_{n+1})` plane.
    pub fn from_polar(n: usize, theta: f64) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[0] = theta.sin();
        coords[n] = theta.cos();
        Self { coords }
    }

    /// Sphere dimension `n`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Height coordinate `y_{n+1}`.
    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    /// Polar angle measured from the north pole.
    pub fn polar_angle(&self) -> f64 {
        self.height().clamp(-1.0, 1.0).acos()
    }

    /// Great-circle distance.
    pub fn geodesic_distance(&self, other: &SpherePoint) -> f64 {
        // atan2 form stays accurate for nearby and antipodal points alike
        let dot: f64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum();
        let cross2: f64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b * dot).powi(2))
            .sum();
        cross2.sqrt().atan2(dot)
    }

    /// Exponential map along a tangent vector given in ambient coordinates.
    pub fn exp(&self, tangent: &[f64]) -> SpherePoint {
        let norm = tangent.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return self.clone();
        }
        let (s, c) = norm.sin_cos();
        let coords = self
            .coords
            .iter()
            .zip(tangent)
            .map(|(x, v)| c * x + s * v / norm)
            .collect();
        SpherePoint::new(coords).expect("exponential map stays on the sphere")
    }
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        let p = SpherePoint::new(v.clone())?;
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Schema(format!(
                "sphere point has norm {norm}, expected 1"
            )));
        }
        Ok(p)
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Self {
        p.coords
    }
}

/// Which pole a stereographic chart projects from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    North,
    South,
}

impl Pole {
    fn sign(self) -> f64 {
        match self {
            Pole::North => 1.0,
            Pole::South => -1.0,
        }
    }
}

/// Stereographic coordinates `y ∈ R^n` with respect to a pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub y: Vec<f64>,
    pub pole: Pole,
}

/// `π_N(p) = p'/(1 - p_{n+1})`, `π_S(p) = p'/(1 + p_{n+1})`.
pub fn stereo_project(p: &SpherePoint, pole: Pole) -> Result<ChartPoint> {
    let n = p.dim();
    let denom = 1.0 - pole.sign() * p.height();
    if denom <= 1e-15 {
        return domain(format!("cannot project the {pole:?} pole from itself"));
    }
    Ok(ChartPoint {
        y: p.coords[..n].iter().map(|c| c / denom).collect(),
        pole,
    })
}

/// Inverse of [`stereo_project`].
pub fn stereo_lift(q: &ChartPoint) -> SpherePoint {
    let s: f64 = q.y.iter().map(|v| v * v).sum();
    let mut coords: Vec<f64> = q.y.iter().map(|v| 2.0 * v / (1.0 + s)).collect();
    coords.push(q.pole.sign() * (s - 1.0) / (s + 1.0));
    SpherePoint::new(coords).expect("stereographic lift is a unit vector")
}

/// Conjugate of `y ↦ t·y` through `π_N`. Fixes both poles; `t → 0` pushes
/// every other point to the south pole.
pub fn mobius_dilate(p: &SpherePoint, t: f64) -> Result<SpherePoint> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("dilation factor must be positive, got {t}"));
    }
    let n = p.dim();
    let h = p.height();
    // |π_N(p)|^2 = (1 + h)/(1 - h); written without dividing so the poles are regular
    let up = 1.0 + h;
    let down = 1.0 - h;
    let denom = down + t * t * up;
    let mut coords: Vec<f64> = p.coords[..n].iter().map(|x| 2.0 * t * x / denom).collect();
    coords.push((t * t * up - down) / denom);
    SpherePoint::new(coords)
}

/// Constants of the round metric on `S^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetricConstants {
    pub n: usize,
    /// Conformal Laplacian coefficient `4(n-1)/(n-2)`.
    pub c_n: f64,
    /// Scalar curvature `n(n-1)`.
    pub r0: f64,
    /// `|S^{n-1}|`.
    pub omega_nm1: f64,
    /// `|S^n|`.
    pub vol_n: f64,
}

impl RoundMetricConstants {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return domain(format!("sphere dimension must be at least 3, got {n}"));
        }
        let nf = n as f64;
        Ok(Self {
            n,
            c_n: 4.0 * (nf - 1.0) / (nf - 2.0),
            r0: nf * (nf - 1.0),
            omega_nm1: sphere_volume(n - 1),
            vol_n: sphere_volume(n),
        })
    }

    /// Critical Sobolev exponent `2n/(n-2)`.
    pub fn two_star(&self) -> f64 {
        2.0 * self.n as f64 / (self.n as f64 - 2.0)
    }
}

/// `|S^k|` by the recursion `|S^k| = 2π/(k-1) |S^{k-2}|`.
pub fn sphere_volume(k: usize) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_volume(k - 2),
    }
}
