//! Warm-started continuation in decreasing `τ`, tracking the concentration
//! rate `λ_τ`, the energy and the curvature at the blow-up point.

use serde::{Deserialize, Serialize};

use super::discrete::Problem;
use super::flow::{flow, FlowOptions};
use super::newton::{newton_refine, NewtonOptions, SolveReport};
use crate::bubbles::sobolev_constant;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub newton: NewtonOptions,
    /// Fallback flow when Newton fails from the warm start.
    pub flow: FlowOptions,
    /// Peak-to-minimum ratio of `u` above which the final state counts as concentrated.
    pub concentration_ratio: f64,
    /// Points used in the energy extrapolation (the smallest `τ`).
    pub extrapolation_points: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            flow: FlowOptions {
                tol: 1e-4,
                ..Default::default()
            },
            concentration_ratio: 100.0,
            extrapolation_points: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub tau: f64,
    pub j: f64,
    pub theta_star: f64,
    pub peak: f64,
    /// `u(θ*)^{2/(n-2)}`, proportional to the concentration rate.
    pub lambda: f64,
    pub grad_norm: f64,
    pub newton_iterations: usize,
    pub morse_index: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Concentration {
    pub theta: f64,
    pub k_value: f64,
    pub laplacian_k: f64,
    /// `-1`, `0` or `1`.
    pub laplacian_sign: i8,
    /// Morse index of `K` at the point (axisymmetric: `n` or `0`).
    pub k_morse_index: usize,
    /// `(q - 1) + Σ (n - m_i)` with `q = 1`.
    pub predicted_index: usize,
    /// `ĉ_0 K(x_1)^{(2-n)/n}`.
    pub limit_energy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub n: usize,
    pub nodes: usize,
    pub tau_schedule: Vec<f64>,
    pub steps: Vec<ContinuationStep>,
    /// Least-squares slope of `log λ` against `log τ`.
    pub lambda_exponent: Option<f64>,
    pub concentration: Option<Concentration>,
    /// `J_0` from `J ≈ J_0 + a τ + b τ log τ` over the last points.
    pub j_extrapolated: Option<f64>,
    pub energy_relative_gap: Option<f64>,
    /// `λ² τ K(x_1) / |ΔK(x_1)|` per step.
    pub c2: Vec<f64>,
    pub c2_mean: Option<f64>,
    pub c2_cv: Option<f64>,
    pub final_morse_index: Option<usize>,
    pub partial: bool,
    pub failure: Option<String>,
}

impl ContinuationReport {
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "tau",
            "J",
            "theta_star",
            "peak",
            "lambda",
            "grad_norm",
            "morse_index",
        ])?;
        for s in &self.steps {
            w.write_record(&[
                s.tau.to_string(),
                s.j.to_string(),
                s.theta_star.to_string(),
                s.peak.to_string(),
                s.lambda.to_string(),
                s.grad_norm.to_string(),
                s.morse_index.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Geometric schedule from `start` down to `end` with `count` values.
pub fn geometric_schedule(start: f64, end: f64, count: usize) -> Vec<f64> {
    let r = (end / start).powf(1.0 / (count - 1) as f64);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                end
            } else {
                start * r.powi(i as i32)
            }
        })
        .collect()
}

fn validate(schedule: &[f64]) -> Result<()> {
    if schedule.len() < 5 {
        return domain(format!(
            "schedule needs at least 5 values, got {}",
            schedule.len()
        ));
    }
    if schedule
        .iter()
        .any(|t| !(*t > 0.0 && *t <= super::discrete::TAU_MAX))
    {
        return domain("every tau must lie in (0, 0.2]");
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return domain("schedule must be strictly decreasing");
    }
    Ok(())
}

fn solve_one(problem: &Problem, warm: &[f64], opts: &ContinuationOptions) -> Result<SolveReport> {
    match newton_refine(problem, warm, &opts.newton) {
        Ok(rep) if rep.converged => Ok(rep),
        _ => {
            let f = flow(problem, warm, &opts.flow)?;
            newton_refine(problem, &f.u, &opts.newton)
        }
    }
}

/// Runs the schedule from `seed`; stops early with a partial report if a step fails.
pub fn continuation(
    problem: &Problem,
    schedule: &[f64],
    seed: &[f64],
    opts: &ContinuationOptions,
) -> Result<ContinuationReport> {
    validate(schedule)?;
    let n = problem.n;
    let mut steps = Vec::new();
    let mut warm = seed.to_vec();
    let mut failure = None;
    let mut last: Option<SolveReport> = None;
    for &tau in schedule {
        let pr = problem.at_tau(tau)?;
        match solve_one(&pr, &warm, opts) {
            Ok(rep) if rep.converged => {
                let peak = rep.peak_value;
                steps.push(ContinuationStep {
                    tau,
                    j: rep.j_value,
                    theta_star: rep.peak_theta,
                    peak,
                    lambda: peak.powf(2.0 / (n as f64 - 2.0)),
                    grad_norm: rep.grad_norm,
                    newton_iterations: rep.iterations,
                    morse_index: rep.morse_index_total,
                });
                warm = rep.u_final.values.clone();
                last = Some(rep);
            }
            Ok(rep) => {
                failure = Some(format!(
                    "no convergence at tau = {tau}: gradient norm {:.3e}",
                    rep.grad_norm
                ));
                break;
            }
            Err(e) => {
                failure = Some(format!("tau = {tau}: {e}"));
                break;
            }
        }
    }

    let lambda_exponent = (steps.len() >= 2).then(|| {
        let x: Vec<f64> = steps.iter().map(|s| s.tau.ln()).collect();
        let y: Vec<f64> = steps.iter().map(|s| s.lambda.ln()).collect();
        slope(&x, &y)
    });

    let concentration = match &last {
        Some(rep) => {
            let u = &rep.u_final.values;
            let umin = u.iter().fold(f64::INFINITY, |a, v| a.min(*v));
            if rep.peak_value / umin > opts.concentration_ratio {
                let j = problem
                    .theta()
                    .iter()
                    .position(|t| *t == rep.peak_theta)
                    .unwrap_or(0);
                let lap = problem.laplacian_k()?[j];
                let k_value = problem.k[j];
                let k_morse_index = if lap < 0.0 { n } else { 0 };
                let c_hat0 = sobolev_constant(n)?.c_hat0;
                Some(Concentration {
                    theta: rep.peak_theta,
                    k_value,
                    laplacian_k: lap,
                    laplacian_sign: if lap < 0.0 {
                        -1
                    } else if lap > 0.0 {
                        1
                    } else {
                        0
                    },
                    k_morse_index,
                    predicted_index: n - k_morse_index,
                    limit_energy: c_hat0 * k_value.powf((2.0 - n as f64) / n as f64),
                })
            } else {
                None
            }
        }
        None => None,
    };

    let m = opts.extrapolation_points.min(steps.len());
    let j_extrapolated = (m >= 3).then(|| {
        let tail = &steps[steps.len() - m..];
        extrapolate(
            &tail.iter().map(|s| s.tau).collect::<Vec<_>>(),
            &tail.iter().map(|s| s.j).collect::<Vec<_>>(),
        )
    });
    let energy_relative_gap = match (&concentration, j_extrapolated) {
        (Some(c), Some(j0)) => Some((j0 - c.limit_energy) / c.limit_energy),
        _ => None,
    };

    let c2: Vec<f64> = match &concentration {
        Some(c) if c.laplacian_k != 0.0 => steps
            .iter()
            .map(|s| s.lambda * s.lambda * s.tau * c.k_value / c.laplacian_k.abs())
            .collect(),
        _ => Vec::new(),
    };
    let (c2_mean, c2_cv) = if c2.len() >= 2 {
        let mean = c2.iter().sum::<f64>() / c2.len() as f64;
        let var = c2.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c2.len() - 1) as f64;
        (Some(mean), Some(var.sqrt() / mean))
    } else {
        (None, None)
    };

    Ok(ContinuationReport {
        n,
        nodes: problem.len(),
        tau_schedule: schedule.to_vec(),
        partial: failure.is_some(),
        failure,
        final_morse_index: last.as_ref().map(|r| r.morse_index_total),
        steps,
        lambda_exponent,
        concentration,
        j_extrapolated,
        energy_relative_gap,
        c2,
        c2_mean,
        c2_cv,
    })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares `J_0` in `J ≈ J_0 + a τ + b τ log τ`.
fn extrapolate(tau: &[f64], j: &[f64]) -> f64 {
    let rows: Vec<[f64; 3]> = tau.iter().map(|t| [1.0, *t, t * t.ln()]).collect();
    let design = nalgebra::DMatrix::from_fn(rows.len(), 3, |i, k| rows[i][k]);
    let rhs = nalgebra::DVector::from_column_slice(j);
    let sol = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("svd with vectors");
    sol[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_recovers_model() {
        let tau = [0.02f64, 0.014, 0.01, 0.007, 0.005];
        let j: Vec<f64> = tau
            .iter()
            .map(|t| 3.0 + 2.0 * t - 0.7 * t * t.ln())
            .collect();
        assert!((extrapolate(&tau, &j) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn schedule_is_validated() {
        let pr = Problem::new(5, 65, 0.05, |_| 1.0).unwrap();
        let seed = vec![1.0; pr.len()];
        let o = ContinuationOptions::default();
        assert!(continuation(&pr, &[0.05, 0.04, 0.03], &seed, &o).is_err());
        assert!(continuation(&pr, &[0.05, 0.06, 0.03, 0.02, 0.01], &seed, &o).is_err());
        assert!(continuation(&pr, &[0.05, 0.04, 0.03, 0.02, 0.0], &seed, &o).is_err());
    }

    #[test]
    fn constant_k_does_not_concentrate() {
        let pr = Problem::new(5, 257, 0.05, |_| 1.5).unwrap();
        let sched = geometric_schedule(0.08, 0.005, 6);
        let rep = continuation(&pr, &sched, &vec![1.0; pr.len()], &Default::default()).unwrap();
        assert!(!rep.partial);
        assert!(rep.concentration.is_none());
        assert!(rep
            .steps
            .iter()
            .all(|s| (s.lambda - rep.steps[0].lambda).abs() < 0.1 * s.lambda));
    }

    #[test]
    fn geometric_schedule_endpoints() {
        let s = geometric_schedule(0.08, 0.005, 9);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], 0.08);
        assert_eq!(s[8], 0.005);
    }
}
