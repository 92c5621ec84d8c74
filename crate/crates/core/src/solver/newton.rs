//! Newton refinement of `Av = ω W K v^p`; critical points of `J_τ` are the
//! normalizations of its positive solutions.

use serde::{Deserialize, Serialize};

use super::discrete::{Problem, ProblemSummary};
use super::spectrum::{hessian_sector_spectrum, SectorSpectrum};
use super::tridiag::SymTridiag;
use crate::error::{Error, Result};
use crate::sphere::{AxisymProfile, SpherePoint};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Highest harmonic sector in the spectrum; `None` means `n + 1`.
    pub l_max: Option<usize>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            l_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: ProblemSummary,
    pub u_final: AxisymProfile,
    pub grad_norm: f64,
    pub j_value: f64,
    pub hessian_sector_indices: Vec<SectorSpectrum>,
    pub morse_index_total: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Polar angle and value of the maximum of `u`.
    pub peak_theta: f64,
    pub peak_value: f64,
    pub warnings: Vec<String>,
}

/// Newton's method from `u` (positive), followed by the sector spectrum.
pub fn newton_refine(problem: &Problem, u: &[f64], opts: &NewtonOptions) -> Result<SolveReport> {
    if u.len() != problem.len() || u.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain(
            "state must be positive on the problem grid".into(),
        ));
    }
    let p = problem.p();
    let mass = problem.mass();
    let a = problem.operator();
    let mut v = problem.unnormalized(&problem.normalize(u));
    let mut iterations = 0;
    let mut warnings = Vec::new();
    let mut gn = problem.riesz_gradient(&problem.normalize(&v))?.1;
    if gn > 1e-2 {
        warnings.push(format!(
            "initial gradient norm {gn:.3e} outside the usual basin"
        ));
    }
    while gn >= opts.tol && iterations < opts.max_iter {
        let av = problem.apply(&v);
        let f: Vec<f64> = (0..v.len())
            .map(|j| -(av[j] - mass[j] * problem.k[j] * v[j].powf(p)))
            .collect();
        let jac = SymTridiag::new(
            (0..v.len())
                .map(|j| a.diag[j] - p * mass[j] * problem.k[j] * v[j].powf(p - 1.0))
                .collect(),
            a.off.clone(),
        );
        let dv = match jac.solve(&f) {
            Ok(dv) if dv.iter().all(|x| x.is_finite()) => dv,
            _ => {
                let smallest = jac.lowest_eigenvalues(&mass, 1)[0];
                return Err(Error::Degenerate {
                    location: peak_point(problem, &v).coords().to_vec(),
                    detail: format!("hessian singular, smallest eigenvalue {smallest:.3e}"),
                });
            }
        };
        let mut t = 1.0;
        while v.iter().zip(&dv).any(|(x, d)| x + t * d <= 0.0) {
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::NonConvergence(
                    "newton step cannot keep the state positive".into(),
                ));
            }
        }
        for (x, d) in v.iter_mut().zip(&dv) {
            *x += t * d;
        }
        iterations += 1;
        let step = dv.iter().fold(0.0f64, |m, d| m.max(d.abs())) * t;
        gn = problem.riesz_gradient(&problem.normalize(&v))?.1;
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(*x));
        if step < 4.0 * f64::EPSILON * vmax && gn >= opts.tol {
            warnings.push(format!("stalled at gradient norm {gn:.3e}"));
            break;
        }
    }
    let u = problem.normalize(&v);
    let l_max = opts.l_max.unwrap_or(problem.n + 1);
    let spectrum = hessian_sector_spectrum(problem, &u, l_max)?;
    warnings.extend(spectrum.warnings.iter().cloned());
    let (jmax, &peak_value) = u
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    Ok(SolveReport {
        problem: problem.into(),
        j_value: problem.functional(&u)?,
        u_final: problem.profile(&u)?,
        grad_norm: gn,
        morse_index_total: spectrum.morse_index,
        hessian_sector_indices: spectrum.sectors,
        converged: gn < opts.tol,
        iterations,
        peak_theta: problem.theta()[jmax],
        peak_value,
        warnings,
    })
}

fn peak_point(problem: &Problem, v: &[f64]) -> SpherePoint {
    let j = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|x| x.0)
        .unwrap_or(0);
    SpherePoint::from_polar(problem.n, problem.theta()[j])
}
