//! Projected `L_{g0}`-gradient descent for `J_τ` on `{‖u‖ = 1, u > 0}`.

use serde::{Deserialize, Serialize};

use super::discrete::Problem;
use crate::error::{domain, Result};

/// Peak height that counts as blow-up when `τ = 0`.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_steps: usize,
    pub armijo: f64,
    /// Initial step as a multiple of the power-iteration step `k_τ^{2/(p+1)}/2`.
    pub initial_step: f64,
    pub growth: f64,
    pub blowup_threshold: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_steps: 20_000,
            armijo: 1e-4,
            initial_step: 1.0,
            growth: 1.25,
            blowup_threshold: BLOWUP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowStatus {
    Converged,
    /// Armijo decrease is below rounding; the gradient is as small as `J` can resolve.
    Stagnated,
    Diverged,
    StepUnderflow,
    MaxSteps,
}

/// One accepted step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowStep {
    pub step: usize,
    pub j: f64,
    pub grad_norm: f64,
    pub step_size: f64,
    pub norm_error: f64,
    pub min_u: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowResult {
    pub u: Vec<f64>,
    pub j: f64,
    pub grad_norm: f64,
    pub status: FlowStatus,
    pub trace: Vec<FlowStep>,
    /// Step sizes rejected because they produced a nonpositive node.
    pub positivity_rejections: usize,
}

impl FlowResult {
    pub fn converged(&self) -> bool {
        self.status == FlowStatus::Converged
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "step",
            "J",
            "grad_norm",
            "step_size",
            "norm_error",
            "min_u",
            "peak",
        ])?;
        for s in &self.trace {
            w.write_record(&[
                s.step.to_string(),
                s.j.to_string(),
                s.grad_norm.to_string(),
                s.step_size.to_string(),
                s.norm_error.to_string(),
                s.min_u.to_string(),
                s.peak.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the flow from `u0` (any positive function; it is normalized first).
pub fn flow(problem: &Problem, u0: &[f64], opts: &FlowOptions) -> Result<FlowResult> {
    if u0.len() != problem.len() {
        return domain(format!(
            "state has {} nodes, grid has {}",
            u0.len(),
            problem.len()
        ));
    }
    if u0.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return domain("initial state must be positive at every node");
    }
    let p = problem.p();
    let mut u = problem.normalize(u0);
    let mut j = problem.functional(&u)?;
    let (mut g, mut gn) = problem.riesz_gradient(&u)?;
    let base = 0.5 * problem.k_tau(&u).powf(2.0 / (p + 1.0));
    let mut s = opts.initial_step * base;
    let s_floor = 1e-14 * base;
    let mut trace = vec![record(problem, 0, j, gn, 0.0, &u)];
    let mut rejections = 0;
    let mut status = FlowStatus::MaxSteps;
    for step in 1..=opts.max_steps {
        if gn < opts.tol {
            status = FlowStatus::Converged;
            break;
        }
        if problem.tau == 0.0 && peak(&u) > opts.blowup_threshold {
            status = FlowStatus::Diverged;
            break;
        }
        let mut accepted = None;
        while s >= s_floor {
            let trial: Vec<f64> = u.iter().zip(&g).map(|(a, b)| a - s * b).collect();
            if trial.iter().any(|v| !(*v > 0.0)) {
                rejections += 1;
                s *= 0.5;
                continue;
            }
            let trial = problem.normalize(&trial);
            let jt = problem.functional(&trial)?;
            let decrease = s * gn * gn;
            if jt <= j - opts.armijo * decrease && jt < j {
                accepted = Some((trial, jt));
                break;
            }
            if decrease < 64.0 * f64::EPSILON * j.abs() {
                break;
            }
            s *= 0.5;
        }
        match accepted {
            Some((trial, jt)) => {
                u = trial;
                j = jt;
                (g, gn) = problem.riesz_gradient(&u)?;
                trace.push(record(problem, step, j, gn, s, &u));
                s *= opts.growth;
            }
            None => {
                status = if s < s_floor {
                    FlowStatus::StepUnderflow
                } else {
                    FlowStatus::Stagnated
                };
                break;
            }
        }
    }
    if status == FlowStatus::MaxSteps && gn < opts.tol {
        status = FlowStatus::Converged;
    }
    Ok(FlowResult {
        u,
        j,
        grad_norm: gn,
        status,
        trace,
        positivity_rejections: rejections,
    })
}

fn peak(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |a, v| a.max(*v))
}

fn record(problem: &Problem, step: usize, j: f64, gn: f64, s: f64, u: &[f64]) -> FlowStep {
    FlowStep {
        step,
        j,
        grad_norm: gn,
        step_size: s,
        norm_error: (problem.norm(u) - 1.0).abs(),
        min_u: u.iter().fold(f64::INFINITY, |a, v| a.min(*v)),
        peak: peak(u),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::discrete::constant_energy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_start_flows_to_constant() {
        let pr = Problem::new(5, 513, 0.05, |_| 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u0: Vec<f64> = (0..pr.len()).map(|_| rng.random_range(0.2..2.0)).collect();
        let res = flow(&pr, &u0, &FlowOptions::default()).unwrap();
        let exact = constant_energy(5, 0.05).unwrap();
        assert!(
            (res.j - exact).abs() < 1e-8 * exact,
            "{} vs {exact}, {:?}",
            res.j,
            res.status
        );
        for w in res.trace.windows(2) {
            assert!(w[1].j < w[0].j);
        }
        assert!(res
            .trace
            .iter()
            .all(|s| s.norm_error < 1e-10 && s.min_u > 0.0));
    }

    #[test]
    fn constant_is_already_critical() {
        let pr = Problem::new(4, 257, 0.1, |_| 2.0).unwrap();
        let res = flow(&pr, &vec![3.0; pr.len()], &FlowOptions::default()).unwrap();
        assert!(res.converged());
        assert_eq!(res.trace.len(), 1);
    }

    #[test]
    fn rejects_nonpositive_start() {
        let pr = Problem::new(4, 33, 0.1, |_| 1.0).unwrap();
        let mut u = vec![1.0; pr.len()];
        u[3] = 0.0;
        assert!(flow(&pr, &u, &FlowOptions::default()).is_err());
    }
}
