//! Symmetric tridiagonal matrices: products, pivoted solves, Sturm counts and
//! bisection eigenvalues of pencils `M - σ B` with diagonal `B > 0`.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[j]` couples `j` and `j + 1`.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for j in 0..n - 1 {
            y[j] += self.off[j] * x[j + 1];
            y[j + 1] += self.off[j] * x[j];
        }
        y
    }

    /// Gaussian elimination with partial pivoting (the `gtsv` scheme).
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let scale = self
            .diag
            .iter()
            .chain(&self.off)
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let tiny = scale * 1e-20;
        let mut d = self.diag.clone();
        let mut du = self.off.clone();
        let mut dl = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut b = rhs.to_vec();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() <= tiny {
                    return Err(singular(i));
                }
                let f = dl[i] / d[i];
                d[i + 1] -= f * du[i];
                b[i + 1] -= f * b[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - f * tmp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                du[i] = tmp;
                b.swap(i, i + 1);
                b[i + 1] -= f * b[i];
            }
            dl[i] = 0.0;
        }
        if d[n - 1].abs() <= tiny {
            return Err(singular(n - 1));
        }
        let mut x = b;
        x[n - 1] /= d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        Ok(x)
    }

    /// Number of negative eigenvalues of `M - σ B` (Sylvester inertia).
    pub fn count_below(&self, sigma: f64, b: &[f64]) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for j in 0..self.len() {
            let c = if j == 0 {
                0.0
            } else {
                self.off[j - 1] * self.off[j - 1] / q
            };
            q = self.diag[j] - sigma * b[j] - c;
            if q == 0.0 {
                q = -f64::EPSILON
                    * (self.diag[j].abs() + sigma.abs() * b[j]).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` smallest eigenvalues of the pencil `M w = σ B w`.
    pub fn lowest_eigenvalues(&self, b: &[f64], k: usize) -> Vec<f64> {
        let n = self.len();
        let k = k.min(n);
        // Gershgorin bounds of B^{-1/2} M B^{-1/2}
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..n {
            let mut r = 0.0;
            if j > 0 {
                r += self.off[j - 1].abs() / (b[j] * b[j - 1]).sqrt();
            }
            if j + 1 < n {
                r += self.off[j].abs() / (b[j] * b[j + 1]).sqrt();
            }
            let c = self.diag[j] / b[j];
            lo = lo.min(c - r);
            hi = hi.max(c + r);
        }
        (0..k)
            .map(|i| {
                let (mut a, mut z) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + z);
                    if self.count_below(mid, b) > i {
                        z = mid;
                    } else {
                        a = mid;
                    }
                    if z - a <= 1e-14 * (a.abs() + z.abs()).max(1e-300) {
                        break;
                    }
                }
                0.5 * (a + z)
            })
            .collect()
    }
}

fn singular(i: usize) -> Error {
    Error::NonConvergence(format!("tridiagonal system singular at row {i}"))
}
