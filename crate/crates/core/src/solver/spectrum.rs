//! Second variation of `J_τ` at an axisymmetric critical point, split into
//! spherical-harmonic sectors `w(θ) Y_ℓ(ξ)`.
//!
//! Sector `ℓ ≥ 1` carries the angular potential `c_n ℓ(ℓ+n-2)/sin²θ` and
//! vanishes at the poles. In sector `0` the direction of the state itself is
//! removed: the form there is negative on `u`, and restricting to the
//! tangent space of `{‖u‖ = 1}` lowers the count by exactly one.

use serde::{Deserialize, Serialize};

use super::discrete::Problem;
use super::tridiag::SymTridiag;
use crate::error::{domain, Result};
use crate::sphere::quadrature::sin_power_integral;

/// Eigenvalues reported per sector.
const REPORTED: usize = 4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorSpectrum {
    pub ell: usize,
    /// Dimension of degree-`ℓ` harmonics on `S^{n-1}`.
    pub multiplicity: usize,
    /// Negative directions in this sector (after removing the constraint for `ℓ = 0`).
    pub negative: usize,
    /// Lowest eigenvalues of the sector pencil, mass-normalized.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub sectors: Vec<SectorSpectrum>,
    /// `Σ_ℓ multiplicity · negative`.
    pub morse_index: usize,
    pub grad_norm: f64,
    pub warnings: Vec<String>,
}

/// `C(n+ℓ-1, ℓ) - C(n+ℓ-3, ℓ-2)`.
pub fn harmonic_multiplicity(n: usize, ell: usize) -> usize {
    let c = |a: usize, b: usize| -> usize {
        let mut r: u128 = 1;
        for i in 0..b {
            r = r * (a - i) as u128 / (i + 1) as u128;
        }
        r as usize
    };
    let first = c(n + ell - 1, ell);
    if ell >= 2 {
        first - c(n + ell - 3, ell - 2)
    } else {
        first
    }
}

/// Gradient norm above which the spectrum is flagged as not variational.
pub const CRITICALITY_WARNING: f64 = 1e-6;

/// Per-sector spectra for `ℓ = 0..=l_max`.
pub fn hessian_sector_spectrum(
    problem: &Problem,
    u: &[f64],
    l_max: usize,
) -> Result<SpectrumReport> {
    let n = problem.n;
    if l_max < n + 1 {
        return domain(format!("l_max = {l_max} below n + 1 = {}", n + 1));
    }
    if u.iter().any(|v| !(*v > 0.0)) {
        return domain("state must be positive");
    }
    let u = problem.normalize(u);
    let (_, grad_norm) = problem.riesz_gradient(&u)?;
    let mut warnings = Vec::new();
    if grad_norm > CRITICALITY_WARNING {
        warnings.push(format!("gradient norm {grad_norm:.3e}: state is not critical, spectrum lacks variational meaning"));
    }
    let p = problem.p();
    let mu = problem.r(&u) / problem.k_tau(&u);
    let mass = problem.mass();
    let potential: Vec<f64> = (0..u.len())
        .map(|j| p * mu * problem.k[j] * u[j].powf(p - 1.0) * mass[j])
        .collect();
    let a = problem.operator();
    let len = u.len();

    let mut sectors = Vec::new();
    let m0 = SymTridiag::new(
        a.diag.iter().zip(&potential).map(|(d, v)| d - v).collect(),
        a.off.clone(),
    );
    let neg0 = m0.count_below(0.0, &mass);
    if neg0 == 0 {
        warnings.push("sector 0 has no negative direction along the state".into());
    }
    sectors.push(SectorSpectrum {
        ell: 0,
        multiplicity: 1,
        negative: neg0.saturating_sub(1),
        eigenvalues: m0.lowest_eigenvalues(&mass, REPORTED),
    });

    let fv = &problem.fv;
    let h = fv.h;
    // ∫ sin^{n-3} over each interior dual cell
    let angular: Vec<f64> = (1..len - 1)
        .map(|j| {
            let t = fv.theta[j];
            fv.omega * sin_power_integral(n - 3, t - 0.5 * h, t + 0.5 * h)
        })
        .collect();
    let inner_mass = &mass[1..len - 1];
    for ell in 1..=l_max {
        let w = problem.consts.c_n * (ell * (ell + n - 2)) as f64;
        let diag: Vec<f64> = (1..len - 1)
            .map(|j| a.diag[j] - potential[j] + w * angular[j - 1])
            .collect();
        let m = SymTridiag::new(diag, a.off[1..len - 2].to_vec());
        let negative = m.count_below(0.0, inner_mass);
        sectors.push(SectorSpectrum {
            ell,
            multiplicity: harmonic_multiplicity(n, ell),
            negative,
            eigenvalues: m.lowest_eigenvalues(inner_mass, REPORTED),
        });
    }
    if sectors.last().is_some_and(|s| s.negative > 0) {
        warnings.push(format!(
            "sector {l_max} still has negative directions; raise l_max"
        ));
    }
    let morse_index = sectors.iter().map(|s| s.multiplicity * s.negative).sum();
    Ok(SpectrumReport {
        sectors,
        morse_index,
        grad_norm,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities() {
        // S^2: 2ℓ+1
        for ell in 0..6 {
            assert_eq!(harmonic_multiplicity(3, ell), 2 * ell + 1);
        }
        // S^4
        assert_eq!(harmonic_multiplicity(5, 1), 5);
        assert_eq!(harmonic_multiplicity(5, 2), 14);
        assert_eq!(harmonic_multiplicity(5, 3), 30);
    }

    #[test]
    fn constant_solution_is_stable() {
        let pr = Problem::new(5, 513, 0.02, |_| 1.0).unwrap();
        let u = vec![1.0; pr.len()];
        let rep = hessian_sector_spectrum(&pr, &u, 6).unwrap();
        assert_eq!(rep.morse_index, 0);
        assert!(rep.warnings.is_empty(), "{:?}", rep.warnings);
        // lowest ℓ = 1 mode is sinθ with eigenvalue τ R_0 / ... > 0
        assert!(rep.sectors[1].eigenvalues[0] > 0.0);
        // sector 0: constants (negative) then cos θ with eigenvalue of order τ
        let e0 = &rep.sectors[0].eigenvalues;
        assert!(e0[0] < 0.0 && e0[1] > 0.0);
        let r0 = 20.0;
        assert!((e0[1] - 0.02 * r0).abs() < 1e-3, "{}", e0[1]);
        assert!((rep.sectors[1].eigenvalues[0] - 0.02 * r0).abs() < 1e-3);
    }

    #[test]
    fn non_critical_state_is_flagged() {
        let pr = Problem::new(5, 129, 0.02, |_| 1.0).unwrap();
        let u: Vec<f64> = pr.theta().iter().map(|t| 1.0 + 0.3 * t.cos()).collect();
        let rep = hessian_sector_spectrum(&pr, &u, 6).unwrap();
        assert!(!rep.warnings.is_empty());
        assert!(hessian_sector_spectrum(&pr, &u, 3).is_err());
    }
}
