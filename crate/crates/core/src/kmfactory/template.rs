//! Separable template `P̂(Y) = Σ_k w_k(Y_k)` on `R^{n-1}` built from single
//! wells `x²/2` and double wells `x²/2 - (1+β) x·atan(x)/2`.
//!
//! With `j` double wells the critical points are `{-x*, 0, x*}^j × {0}`, so the
//! index counts have generating function `(2 + z)^j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WellProfile {
    Single,
    Double { beta: f64 },
}

impl WellProfile {
    /// `(w, w', w'', w''')` at `x`.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        match *self {
            WellProfile::Single => [0.5 * x * x, x, 1.0, 0.0],
            WellProfile::Double { beta } => {
                let b = 1.0 + beta;
                let q = 1.0 + x * x;
                [
                    0.5 * x * x - 0.5 * b * x * x.atan(),
                    x - 0.5 * b * (x.atan() + x / q),
                    1.0 - b / (q * q),
                    4.0 * b * x / (q * q * q),
                ]
            }
        }
    }

    /// Positive root of `w'`, if any.
    pub fn well_position(&self) -> Option<f64> {
        match self {
            WellProfile::Single => None,
            WellProfile::Double { .. } => {
                let mut x = 2.0;
                for _ in 0..100 {
                    let [_, d1, d2, _] = self.eval(x);
                    let step = d1 / d2;
                    x -= step;
                    if step.abs() < 1e-16 * x {
                        break;
                    }
                }
                Some(x)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Template {
    pub n: usize,
    /// Number of double wells `j ≤ n - 1`.
    pub double_wells: usize,
    pub beta: f64,
    /// Positive critical point of the double well.
    pub x_star: f64,
}

fn binom(a: usize, b: usize) -> usize {
    (0..b).fold(1usize, |r, i| r * (a - i) / (i + 1))
}

impl Template {
    pub fn with_double_wells(n: usize, j: usize) -> Result<Self> {
        let d = n - 1;
        if j > d {
            return Err(Error::Config(format!(
                "{j} double wells exceed n - 1 = {d}"
            )));
        }
        let beta = if j == 0 {
            0.0
        } else if j < d {
            ((d - j) as f64 / (2 * j) as f64).min(1.0)
        } else {
            1.0
        };
        let x_star = if j == 0 {
            0.0
        } else {
            WellProfile::Double { beta }
                .well_position()
                .expect("double well")
        };
        Ok(Self {
            n,
            double_wells: j,
            beta,
            x_star,
        })
    }

    /// The template realizing `M_0..M_n`; only `(2 + z)^j` plus the maximum is supported.
    pub fn from_counts(n: usize, counts: &[usize]) -> Result<Self> {
        if counts.len() != n + 1 {
            return Err(Error::Config(format!(
                "expected {} counts, got {}",
                n + 1,
                counts.len()
            )));
        }
        if counts[n] != 1 {
            return Err(Error::Config(format!(
                "M_n = {} but exactly one local maximum is required",
                counts[n]
            )));
        }
        let euler: i64 = counts
            .iter()
            .enumerate()
            .map(|(k, m)| if k % 2 == 0 { *m as i64 } else { -(*m as i64) })
            .sum();
        let expected = if n.is_multiple_of(2) { 2 } else { 0 };
        if euler != expected {
            return Err(Error::Config(format!(
                "alternating sum {euler} differs from 1 + (-1)^n = {expected}"
            )));
        }
        for j in 0..n {
            let fits = (0..n).all(|k| counts[k] == if k <= j { binom(j, k) << (j - k) } else { 0 });
            if fits {
                return Self::with_double_wells(n, j);
            }
        }
        Err(Error::Config(format!(
            "counts {counts:?} are not of the form C(j,k) 2^(j-k) plus one maximum; unsupported template"
        )))
    }

    pub fn counts(&self) -> Vec<usize> {
        let j = self.double_wells;
        let mut c: Vec<usize> = (0..=self.n)
            .map(|k| if k <= j { binom(j, k) << (j - k) } else { 0 })
            .collect();
        c[self.n] += 1;
        c
    }

    pub fn profile(&self, k: usize) -> WellProfile {
        if k < self.double_wells {
            WellProfile::Double { beta: self.beta }
        } else {
            WellProfile::Single
        }
    }

    pub fn dim(&self) -> usize {
        self.n - 1
    }

    /// Per coordinate `(w, w', w'', w''')`.
    pub fn eval(&self, y: &[f64]) -> Vec<[f64; 4]> {
        y.iter()
            .enumerate()
            .map(|(k, x)| self.profile(k).eval(*x))
            .collect()
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.eval(y).iter().map(|w| w[0]).sum()
    }

    /// Critical points of `P̂` with their Morse indices.
    pub fn critical_points(&self) -> Vec<(Vec<f64>, usize)> {
        let j = self.double_wells;
        let mut out = Vec::with_capacity(3usize.pow(j as u32));
        for code in 0..3usize.pow(j as u32) {
            let mut y = vec![0.0; self.dim()];
            let mut c = code;
            let mut index = 0;
            for yk in y.iter_mut().take(j) {
                match c % 3 {
                    0 => index += 1,
                    1 => *yk = self.x_star,
                    _ => *yk = -self.x_star,
                }
                c /= 3;
            }
            out.push((y, index));
        }
        out
    }

    /// `min P̂`, attained at `(±x*, …, ±x*, 0, …)`.
    pub fn minimum(&self) -> f64 {
        if self.double_wells == 0 {
            return 0.0;
        }
        self.double_wells as f64 * WellProfile::Double { beta: self.beta }.eval(self.x_star)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_root_and_signs() {
        let w = WellProfile::Double { beta: 1.0 };
        let x = w.well_position().unwrap();
        let e = w.eval(x);
        assert!(e[1].abs() < 1e-14 && e[2] > 0.0 && w.eval(0.0)[2] < 0.0);
        let h = 1e-5;
        for x in [0.3, 1.1, -2.0] {
            let fd = (w.eval(x + h)[2] - w.eval(x - h)[2]) / (2.0 * h);
            assert!((fd - w.eval(x)[3]).abs() < 1e-8);
            let fd = (w.eval(x + h)[0] - w.eval(x - h)[0]) / (2.0 * h);
            assert!((fd - w.eval(x)[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn counts_round_trip() {
        assert_eq!(
            Template::from_counts(5, &[1, 0, 0, 0, 0, 1])
                .unwrap()
                .double_wells,
            0
        );
        let t = Template::from_counts(5, &[2, 1, 0, 0, 0, 1]).unwrap();
        assert_eq!(t.double_wells, 1);
        assert_eq!(t.critical_points().len(), 3);
        let t = Template::with_double_wells(5, 2).unwrap();
        assert_eq!(t.counts(), vec![4, 4, 1, 0, 0, 1]);
        assert_eq!(
            Template::from_counts(5, &t.counts()).unwrap().double_wells,
            2
        );
        assert!(Template::from_counts(5, &[1, 0, 0, 0, 0, 2]).is_err());
        assert!(Template::from_counts(5, &[2, 0, 0, 0, 0, 1]).is_err());
        assert!(Template::from_counts(5, &[3, 2, 0, 0, 0, 1]).is_err());
    }

    #[test]
    fn laplacian_of_template_positive_below_full_rank() {
        for j in 0..4 {
            let t = Template::with_double_wells(5, j).unwrap();
            for (y, _) in t.critical_points() {
                let lap: f64 = t.eval(&y).iter().map(|w| w[2]).sum();
                assert!(lap >= (4 - j) as f64 / 2.0 - 1e-12, "j = {j}: {lap}");
            }
        }
    }
}
