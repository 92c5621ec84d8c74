//! Numerical check of the three properties of the sequence: (a) critical
//! structure, (b) uniform Laplacian bound on `U`, (c) `C³` convergence to `K_0`.
//!
//! `C^k` norms are taken in the north-pole chart over the southern
//! hemisphere, which contains the support of `K_m - K_0`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assemble::{KmField, KmFunction};
use super::base::{check_base, BaseCheck, CapRegion};
use crate::error::{domain, Result};
use crate::morse::{find_critical_points, SearchOptions};
use crate::sphere::{stereo_lift, ChartPoint, FieldExt, Pole, SpherePoint};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub search: SearchOptions,
    /// `U`; defaults to `{x_{n+1} < -1 + δ_0}`.
    pub region: Option<CapRegion>,
    pub location_tol: f64,
    pub laplacian_samples: usize,
    pub c3_samples: usize,
    pub monotone_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            search: SearchOptions::default(),
            region: None,
            location_tol: 1e-7,
            laplacian_samples: 20_000,
            c3_samples: 3_000,
            monotone_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberA {
    pub m: usize,
    pub counts: Vec<usize>,
    pub expected: Vec<usize>,
    /// Largest distance from an analytic critical point to its match.
    pub max_location_error: f64,
    pub indices_match: bool,
    pub single_max_at_north: bool,
    /// Largest geodesic distance to `S` among the other critical points.
    pub cluster_radius: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClauseA {
    pub members: Vec<MemberA>,
    pub radii_shrinking: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClauseB {
    pub c: f64,
    /// `min_U ΔK_m` per member.
    pub min_laplacian: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClauseC {
    /// Sup norms of the derivatives of order `0..=3` of `K_m - K_0`.
    pub derivative_sups: Vec<[f64; 4]>,
    /// Maximum over the orders.
    pub distances: Vec<f64>,
    pub monotone: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub members: Vec<usize>,
    pub base: BaseCheck,
    pub clause_a: ClauseA,
    pub clause_b: ClauseB,
    pub clause_c: ClauseC,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

pub fn verify_km(fields: &[KmField], opts: &VerifyOptions) -> Result<VerificationReport> {
    if fields.len() < 3 {
        return domain(format!(
            "need at least 3 members of the sequence, got {}",
            fields.len()
        ));
    }
    let first = &fields[0].function;
    let n = first.base.n;
    if fields
        .iter()
        .any(|f| f.function.base.n != n || f.function.base.eps0 != first.base.eps0)
    {
        return domain("members do not share the same base field");
    }
    let region = opts.region.unwrap_or(CapRegion {
        height: -1.0 + first.base.delta0,
    });
    let base = check_base(&first.base, region, opts.monotone_samples)?;
    let mut failures = Vec::new();

    let members: Vec<MemberA> = fields.iter().map(|f| clause_a_member(f, opts)).collect();
    for a in &members {
        if let Some(e) = &a.error {
            failures.push(format!("(a) m = {}: {e}", a.m));
        } else if a.counts != a.expected || !a.indices_match || !a.single_max_at_north {
            failures.push(format!(
                "(a) m = {}: counts {:?} vs {:?}, location error {:.2e}, indices match {}, single max {}",
                a.m, a.counts, a.expected, a.max_location_error, a.indices_match, a.single_max_at_north
            ));
        }
    }
    let radii_shrinking = members
        .windows(2)
        .all(|w| w[1].cluster_radius <= w[0].cluster_radius + opts.location_tol);
    if !radii_shrinking {
        failures.push("(a) critical points do not approach S monotonically".into());
    }
    let clause_a = ClauseA {
        passed: radii_shrinking && members.iter().all(|a| a.error.is_none()) && failures.is_empty(),
        members,
        radii_shrinking,
    };

    let min_laplacian: Vec<f64> = fields
        .iter()
        .map(|f| min_laplacian(&f.function, region, opts))
        .collect();
    for (f, v) in fields.iter().zip(&min_laplacian) {
        if *v < 0.5 * base.c {
            failures.push(format!(
                "(b) m = {}: min ΔK_m = {v:.3e} < c/2 = {:.3e}",
                f.m,
                0.5 * base.c
            ));
        }
    }
    let clause_b = ClauseB {
        c: base.c,
        passed: min_laplacian.iter().all(|v| *v >= 0.5 * base.c),
        min_laplacian,
    };

    let derivative_sups: Vec<[f64; 4]> = fields
        .iter()
        .map(|f| c3_sups(&f.function, opts.c3_samples))
        .collect();
    let distances: Vec<f64> = derivative_sups
        .iter()
        .map(|d| d.iter().cloned().fold(0.0, f64::max))
        .collect();
    let monotone = distances.windows(2).all(|w| w[1] < w[0]);
    if !monotone {
        failures.push(format!(
            "(c) C3 distances to K_0 not decreasing: {distances:?}"
        ));
    }
    let clause_c = ClauseC {
        derivative_sups,
        distances,
        monotone,
        passed: monotone,
    };

    Ok(VerificationReport {
        n,
        members: fields.iter().map(|f| f.m).collect(),
        base,
        passed: clause_a.passed && clause_b.passed && clause_c.passed,
        clause_a,
        clause_b,
        clause_c,
        failures,
    })
}

fn clause_a_member(f: &KmField, opts: &VerifyOptions) -> MemberA {
    let n = f.params.n;
    let expected = f.function.template.counts();
    let south = SpherePoint::south(n);
    let analytic_radius = f
        .analytic_crits
        .iter()
        .filter(|r| r.morse_index < n)
        .map(|r| r.location.geodesic_distance(&south))
        .fold(0.0, f64::max);
    let report = match find_critical_points(&f.function, &opts.search) {
        Ok(r) => r,
        Err(e) => {
            return MemberA {
                m: f.m,
                counts: Vec::new(),
                expected,
                max_location_error: f64::INFINITY,
                indices_match: false,
                single_max_at_north: false,
                cluster_radius: analytic_radius,
                error: Some(e.to_string()),
            }
        }
    };
    let mut max_err = 0.0f64;
    let mut indices_match = report.records.len() == f.analytic_crits.len();
    for a in &f.analytic_crits {
        let best = report
            .records
            .iter()
            .min_by(|x, y| {
                x.location
                    .geodesic_distance(&a.location)
                    .total_cmp(&y.location.geodesic_distance(&a.location))
            })
            .expect("search returns at least one point");
        max_err = max_err.max(best.location.geodesic_distance(&a.location));
        indices_match &= best.morse_index == a.morse_index;
    }
    let north = SpherePoint::north(n);
    let maxima: Vec<_> = report
        .records
        .iter()
        .filter(|r| r.morse_index == n)
        .collect();
    let single_max_at_north =
        maxima.len() == 1 && maxima[0].location.geodesic_distance(&north) < opts.location_tol;
    let cluster_radius = report
        .records
        .iter()
        .filter(|r| r.morse_index < n)
        .map(|r| r.location.geodesic_distance(&south))
        .fold(0.0, f64::max);
    MemberA {
        m: f.m,
        counts: report.counts,
        expected,
        indices_match: indices_match && max_err < opts.location_tol,
        max_location_error: max_err,
        single_max_at_north,
        cluster_radius,
        error: None,
    }
}

/// Chart points at the scale of the template core: `y' = (σ/t)Y`, `|Y_k| ≤ 4`.
fn core_points(f: &KmFunction, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let n = f.base.n;
    let scale = f.sigma / f.t;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut y: Vec<f64> = (0..n - 1)
                .map(|_| scale * 4.0 * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            y.push(scale * 4.0 * (2.0 * rng.random::<f64>() - 1.0));
            DVector::from_vec(y)
        })
        .collect()
}

/// Chart points with `|y|²` uniform in `[0, smax)`.
fn ball_points(n: usize, smax: f64, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            let r = (smax * rng.random::<f64>()).sqrt();
            DVector::from_iterator(n, dir.iter().map(|v| v * r / norm))
        })
        .collect()
}

fn min_laplacian(f: &KmFunction, region: CapRegion, opts: &VerifyOptions) -> f64 {
    let n = f.base.n;
    let mut pts = region.samples(n, opts.laplacian_samples, 100, 2);
    pts.extend(
        core_points(f, opts.laplacian_samples / 4, 3)
            .into_iter()
            .map(|y| {
                stereo_lift(&ChartPoint {
                    y: y.as_slice().to_vec(),
                    pole: Pole::North,
                })
            })
            .filter(|p| region.contains(p)),
    );
    pts.par_iter()
        .map(|p| f.laplacian(p))
        .reduce(|| f64::INFINITY, f64::min)
}

fn c3_sups(f: &KmFunction, samples: usize) -> [f64; 4] {
    let n = f.base.n;
    let mut pts = core_points(f, samples / 2, 4);
    pts.extend(ball_points(n, 1.0, samples - samples / 2, 5));
    let h = 1e-4 * f.sigma / f.t;
    pts.par_iter()
        .map(|y| {
            let j = f.bump_jet(y);
            let mut third = 0.0f64;
            for k in 0..n {
                let mut yp = y.clone();
                yp[k] += h;
                let mut ym = y.clone();
                ym[k] -= h;
                let d = (f.bump_jet(&yp).h - f.bump_jet(&ym).h) / (2.0 * h);
                third = third.max(d.amax());
            }
            [j.v.abs(), j.g.amax(), j.h.amax(), third]
        })
        .reduce(
            || [0.0; 4],
            |a, b| {
                [
                    a[0].max(b[0]),
                    a[1].max(b[1]),
                    a[2].max(b[2]),
                    a[3].max(b[3]),
                ]
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmfactory::{assemble_km, EpsSchedule, KmParams};

    fn light() -> VerifyOptions {
        VerifyOptions {
            laplacian_samples: 4000,
            c3_samples: 600,
            monotone_samples: 10_000,
            ..Default::default()
        }
    }

    fn sequence(params: &KmParams, ms: &[usize]) -> Vec<KmField> {
        ms.iter()
            .map(|m| assemble_km(params, *m).unwrap())
            .collect()
    }

    #[test]
    fn two_point_template_passes() {
        let params = KmParams::new(5, vec![1, 0, 0, 0, 0, 1]);
        let rep = verify_km(&sequence(&params, &[0, 2, 4]), &light()).unwrap();
        assert!(rep.passed, "{:?}", rep.failures);
    }

    #[test]
    fn saddle_template_recovers_index_one() {
        let params = KmParams::new(5, vec![2, 1, 0, 0, 0, 1]);
        let rep = verify_km(&sequence(&params, &[0, 3, 6]), &light()).unwrap();
        assert!(rep.clause_a.passed, "{:?}", rep.failures);
        assert!(rep.clause_a.members.iter().all(|a| a.counts[1] == 1));
    }

    #[test]
    fn constant_eps_breaks_convergence() {
        let mut params = KmParams::new(5, vec![1, 0, 0, 0, 0, 1]);
        params.eps_schedule = EpsSchedule::Constant;
        let rep = verify_km(&sequence(&params, &[0, 1, 2]), &light()).unwrap();
        assert!(!rep.clause_c.passed);
        assert!(!rep.passed);
    }

    #[test]
    fn short_sequences_are_rejected() {
        let params = KmParams::new(5, vec![1, 0, 0, 0, 0, 1]);
        assert!(verify_km(&sequence(&params, &[0, 1]), &light()).is_err());
    }
}
