//! Smooth functions on `S^n` given through an extension to `R^{n+1}`.
//!
//! Intrinsic derivatives come from the ambient ones: the gradient is the
//! tangential projection and the Hessian is `P H P - (x·∇F) P`.

use nalgebra::{DMatrix, DVector};

use super::SpherePoint;

/// A smooth function on a neighbourhood of `S^n` in `R^{n+1}`.
pub trait ScalarField: Send + Sync {
    /// Sphere dimension `n`.
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Ambient gradient at `x`.
    fn gradient(&self, x: &[f64]) -> DVector<f64>;
    /// Ambient Hessian at `x`.
    fn hessian(&self, x: &[f64]) -> DMatrix<f64>;
}

/// Orthonormal basis of `T_p S^n` as the columns of an `(n+1) × n` matrix.
pub fn tangent_basis(p: &[f64]) -> DMatrix<f64> {
    let m = p.len();
    let x = DVector::from_column_slice(p);
    let skip = (0..m)
        .max_by(|&a, &b| p[a].abs().partial_cmp(&p[b].abs()).unwrap())
        .unwrap_or(0);
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(m - 1);
    for i in (0..m).filter(|&i| i != skip) {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        v -= &x * x[i];
        for c in &cols {
            let d = c.dot(&v);
            v -= c * d;
        }
        let norm = v.norm();
        cols.push(v / norm);
    }
    DMatrix::from_columns(&cols)
}

/// Intrinsic derivatives of any [`ScalarField`].
pub trait FieldExt: ScalarField {
    fn value_at(&self, p: &SpherePoint) -> f64 {
        self.value(p.coords())
    }

    /// Riemannian gradient, in ambient coordinates.
    fn intrinsic_gradient(&self, p: &SpherePoint) -> DVector<f64> {
        let x = DVector::from_column_slice(p.coords());
        let g = self.gradient(p.coords());
        let r = x.dot(&g);
        g - x * r
    }

    /// Riemannian Hessian in the basis returned by [`tangent_basis`].
    fn tangent_hessian(&self, p: &SpherePoint) -> (DMatrix<f64>, DMatrix<f64>) {
        let x = DVector::from_column_slice(p.coords());
        let b = tangent_basis(p.coords());
        let radial = x.dot(&self.gradient(p.coords()));
        let mut h = b.transpose() * self.hessian(p.coords()) * &b;
        for i in 0..h.nrows() {
            h[(i, i)] -= radial;
        }
        let h = (&h + h.transpose()) * 0.5;
        (b, h)
    }

    /// Laplace–Beltrami operator of the round metric.
    fn laplacian(&self, p: &SpherePoint) -> f64 {
        let x = DVector::from_column_slice(p.coords());
        let h = self.hessian(p.coords());
        let g = self.gradient(p.coords());
        h.trace() - (h * &x).dot(&x) - self.dim() as f64 * x.dot(&g)
    }
}

impl<T: ScalarField + ?Sized> FieldExt for T {}

/// `K ≡ c`.
#[derive(Debug, Clone)]
pub struct ConstantField {
    pub n: usize,
    pub c: f64,
}

impl ScalarField for ConstantField {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, _: &[f64]) -> f64 {
        self.c
    }
    fn gradient(&self, _: &[f64]) -> DVector<f64> {
        DVector::zeros(self.n + 1)
    }
    fn hessian(&self, _: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.n + 1, self.n + 1)
    }
}

/// The restriction of the ambient coordinate `x_index` (0-based).
#[derive(Debug, Clone)]
pub struct CoordinateField {
    pub n: usize,
    pub index: usize,
}

impl ScalarField for CoordinateField {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        x[self.index]
    }
    fn gradient(&self, _: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.n + 1);
        g[self.index] = 1.0;
        g
    }
    fn hessian(&self, _: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.n + 1, self.n + 1)
    }
}

/// `K = Σ_k coeffs[k] y_{n+1}^k`.
#[derive(Debug, Clone)]
pub struct AxisymPolyField {
    pub n: usize,
    pub coeffs: Vec<f64>,
}

impl AxisymPolyField {
    /// Value and first two derivatives of the polynomial at height `z`.
    pub fn profile(&self, z: f64) -> (f64, f64, f64) {
        let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            ddp = ddp * z + 2.0 * dp;
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp, ddp)
    }
}

impl ScalarField for AxisymPolyField {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.profile(x[self.n]).0
    }
    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.n + 1);
        g[self.n] = self.profile(x[self.n]).1;
        g
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n + 1, self.n + 1);
        h[(self.n, self.n)] = self.profile(x[self.n]).2;
        h
    }
}

/// `c + b·x + xᵀ Q x + Σ T_{ijk} x_i x_j x_k` with symmetric `Q` and `T`.
#[derive(Debug, Clone)]
pub struct CubicField {
    pub n: usize,
    pub c: f64,
    pub b: DVector<f64>,
    pub q: DMatrix<f64>,
    /// `t[i]` is the symmetric matrix `T_{i··}`.
    pub t: Vec<DMatrix<f64>>,
}

impl CubicField {
    pub fn new(n: usize, c: f64) -> Self {
        let m = n + 1;
        Self {
            n,
            c,
            b: DVector::zeros(m),
            q: DMatrix::zeros(m, m),
            t: vec![DMatrix::zeros(m, m); m],
        }
    }

    /// Symmetrizes `Q` and `T` in place.
    pub fn symmetrize(&mut self) {
        let m = self.n + 1;
        self.q = (&self.q + self.q.transpose()) * 0.5;
        let mut sym = vec![DMatrix::zeros(m, m); m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let s = (self.t[i][(j, k)]
                        + self.t[i][(k, j)]
                        + self.t[j][(i, k)]
                        + self.t[j][(k, i)]
                        + self.t[k][(i, j)]
                        + self.t[k][(j, i)])
                        / 6.0;
                    sym[i][(j, k)] = s;
                }
            }
        }
        self.t = sym;
    }
}

impl ScalarField for CubicField {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        let qx = &self.q * &v;
        let mut cubic = 0.0;
        for (i, ti) in self.t.iter().enumerate() {
            cubic += x[i] * (ti * &v).dot(&v);
        }
        self.c + self.b.dot(&v) + qx.dot(&v) + cubic
    }
    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let v = DVector::from_column_slice(x);
        let mut g = &self.b + &self.q * &v * 2.0;
        for (i, ti) in self.t.iter().enumerate() {
            g[i] += 3.0 * (ti * &v).dot(&v);
        }
        g
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut h = &self.q * 2.0;
        for (i, ti) in self.t.iter().enumerate() {
            h += ti * (6.0 * x[i]);
        }
        h
    }
}

/// `Σ a_k F_k`.
pub struct LinearCombination {
    pub n: usize,
    pub terms: Vec<(f64, Box<dyn ScalarField>)>,
}

impl ScalarField for LinearCombination {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(a, f)| a * f.value(x)).sum()
    }
    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        self.terms
            .iter()
            .fold(DVector::zeros(self.n + 1), |acc, (a, f)| {
                acc + f.gradient(x) * *a
            })
    }
    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        self.terms
            .iter()
            .fold(DMatrix::zeros(self.n + 1, self.n + 1), |acc, (a, f)| {
                acc + f.hessian(x) * *a
            })
    }
}

/// Derivatives of the north-pole chart `y = x'/(1 - x_{n+1})` at ambient `x`.
///
/// Returns `(y, J, second)` with `J = ∂y/∂x` (`n × (n+1)`) and `second[i]`
/// the ambient Hessian of `y_i`. Used to pull chart-defined functions back
/// to ambient derivatives by the chain rule:
/// `∇F = Jᵀ ∇f`, `∇²F = Jᵀ ∇²f J + Σ_i ∂_i f ∇²y_i`.
pub fn chart_pullback(x: &[f64]) -> (Vec<f64>, DMatrix<f64>, Vec<DMatrix<f64>>) {
    let n = x.len() - 1;
    let q = 1.0 - x[n];
    let y: Vec<f64> = x[..n].iter().map(|v| v / q).collect();
    let mut j = DMatrix::zeros(n, n + 1);
    let mut second = Vec::with_capacity(n);
    for i in 0..n {
        j[(i, i)] = 1.0 / q;
        j[(i, n)] = x[i] / (q * q);
        let mut h = DMatrix::zeros(n + 1, n + 1);
        h[(i, n)] = 1.0 / (q * q);
        h[(n, i)] = 1.0 / (q * q);
        h[(n, n)] = 2.0 * x[i] / (q * q * q);
        second.push(h);
    }
    (y, j, second)
}
