//! Named curvature families: `height(c,eps)`, `pinched-multi-peak(eps,delta)`,
//! `km(m[,M_0,…,M_n])` and `axisym-poly(c_0,c_1,…)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmfactory::{assemble_km, KmParams};
use crate::sphere::{AxisymPolyField, CubicField, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub enum KSpec {
    /// `c + eps·x_{n+1}`.
    Height { c: f64, eps: f64 },
    /// `1 + eps Σ_i (i/(n+1)) x_i² + eps·delta·x_{n+1}`.
    PinchedMultiPeak { eps: f64, delta: f64 },
    /// Member `m` of the factory sequence; empty counts mean one minimum and one maximum.
    Km { m: usize, counts: Vec<usize> },
    /// `Σ_k c_k x_{n+1}^k`.
    AxisymPoly { coeffs: Vec<f64> },
}

impl KSpec {
    pub fn height() -> Self {
        KSpec::Height { c: 1.0, eps: 0.5 }
    }

    pub fn pinched() -> Self {
        KSpec::PinchedMultiPeak {
            eps: 0.05,
            delta: 0.1,
        }
    }

    /// Height coefficients when `K` depends on `x_{n+1}` only.
    pub fn axisym_coeffs(&self) -> Option<Vec<f64>> {
        match self {
            KSpec::Height { c, eps } => Some(vec![*c, *eps]),
            KSpec::AxisymPoly { coeffs } => Some(coeffs.clone()),
            _ => None,
        }
    }

    pub fn build(&self, n: usize) -> Result<Box<dyn ScalarField>> {
        if n < 3 {
            return Err(Error::Config(format!(
                "dimension n = {n} must be at least 3"
            )));
        }
        Ok(match self {
            KSpec::Height { .. } | KSpec::AxisymPoly { .. } => Box::new(AxisymPolyField {
                n,
                coeffs: self.axisym_coeffs().expect("axisymmetric"),
            }),
            KSpec::PinchedMultiPeak { eps, delta } => {
                let mut f = CubicField::new(n, 1.0);
                f.q = DMatrix::from_diagonal(&DVector::from_fn(n + 1, |i, _| {
                    eps * (i + 1) as f64 / (n + 1) as f64
                }));
                f.b[n] = eps * delta;
                Box::new(f)
            }
            KSpec::Km { m, counts } => {
                let counts = if counts.is_empty() {
                    default_counts(n)
                } else {
                    counts.clone()
                };
                Box::new(assemble_km(&KmParams::new(n, counts), *m)?.function)
            }
        })
    }
}

/// `(1, 0, …, 0, 1)`.
pub fn default_counts(n: usize) -> Vec<usize> {
    let mut c = vec![0; n + 1];
    c[0] = 1;
    c[n] = 1;
    c
}

impl fmt::Display for KSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[String]| v.join(",");
        match self {
            KSpec::Height { c, eps } => write!(f, "height({c},{eps})"),
            KSpec::PinchedMultiPeak { eps, delta } => {
                write!(f, "pinched-multi-peak({eps},{delta})")
            }
            KSpec::Km { m, counts } if counts.is_empty() => write!(f, "km({m})"),
            KSpec::Km { m, counts } => {
                write!(
                    f,
                    "km({m},{})",
                    join(&counts.iter().map(|c| c.to_string()).collect::<Vec<_>>())
                )
            }
            KSpec::AxisymPoly { coeffs } => {
                write!(
                    f,
                    "axisym-poly({})",
                    join(&coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>())
                )
            }
        }
    }
}

fn numbers<T: FromStr>(family: &str, args: &[&str]) -> Result<Vec<T>> {
    args.iter()
        .map(|a| {
            a.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("{family}: cannot parse argument '{a}'")))
        })
        .collect()
}

impl FromStr for KSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], &s[i + 1..s.len() - 1]),
            Some(_) => return Err(Error::Config(format!("unbalanced parentheses in '{s}'"))),
            None => (s, ""),
        };
        let args: Vec<&str> = if args.trim().is_empty() {
            vec![]
        } else {
            args.split(',').collect()
        };
        let arity = |lo: usize, hi: usize| {
            if args.len() < lo || args.len() > hi {
                Err(Error::Config(format!(
                    "{name} takes {lo}..={hi} arguments, got {}",
                    args.len()
                )))
            } else {
                Ok(())
            }
        };
        match name {
            "height" => {
                arity(0, 2)?;
                let v: Vec<f64> = numbers(name, &args)?;
                Ok(KSpec::Height {
                    c: v.first().copied().unwrap_or(1.0),
                    eps: v.get(1).copied().unwrap_or(0.5),
                })
            }
            "pinched-multi-peak" => {
                arity(0, 2)?;
                let v: Vec<f64> = numbers(name, &args)?;
                Ok(KSpec::PinchedMultiPeak {
                    eps: v.first().copied().unwrap_or(0.05),
                    delta: v.get(1).copied().unwrap_or(0.1),
                })
            }
            "km" => {
                arity(1, usize::MAX)?;
                let v: Vec<usize> = numbers(name, &args)?;
                Ok(KSpec::Km {
                    m: v[0],
                    counts: v[1..].to_vec(),
                })
            }
            "axisym-poly" => {
                arity(1, usize::MAX)?;
                Ok(KSpec::AxisymPoly {
                    coeffs: numbers(name, &args)?,
                })
            }
            other => Err(Error::Config(format!(
                "unknown K family '{other}'; expected height, pinched-multi-peak, km or axisym-poly"
            ))),
        }
    }
}

impl Serialize for KSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SpherePoint;

    #[test]
    fn parse_and_print_round_trip() {
        for s in [
            "height(1,0.5)",
            "pinched-multi-peak(0.05,0.1)",
            "km(3)",
            "km(2,2,1,0,0,0,1)",
            "axisym-poly(1,0,-0.2)",
        ] {
            let k: KSpec = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert_eq!("height".parse::<KSpec>().unwrap(), KSpec::height());
        assert!("height(1,2,3)".parse::<KSpec>().is_err());
        assert!("bump(1)".parse::<KSpec>().is_err());
        assert!("axisym-poly(1,x)".parse::<KSpec>().is_err());
        assert!("km".parse::<KSpec>().is_err());
    }

    #[test]
    fn families_evaluate() {
        let n = 4;
        let h = KSpec::height().build(n).unwrap();
        assert_eq!(h.value(SpherePoint::north(n).coords()), 1.5);
        let p = KSpec::pinched().build(n).unwrap();
        assert!((p.value(SpherePoint::north(n).coords()) - (1.0 + 0.05 + 0.005)).abs() < 1e-15);
        let k = "km(0)".parse::<KSpec>().unwrap().build(5).unwrap();
        assert!((k.value(SpherePoint::north(5).coords()) - 1.008).abs() < 1e-12);
        assert!("km(0,1,1)".parse::<KSpec>().unwrap().build(5).is_err());
    }
}
