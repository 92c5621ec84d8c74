//! Critical points of a curvature candidate `K` and the combinatorial
//! existence criteria built from them.

mod criteria;

pub use criteria::{
    degree_count, index_formula, minmax_criterion, pinch_report, IndexFormula, MinmaxResult,
    PinchReport, Verdict, XiComponent, BOUNDARY_SLACK,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{tangent_basis, FieldExt, ScalarField, SpherePoint};

/// One nondegenerate critical point of `K`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPointRecord {
    pub location: SpherePoint,
    pub value: f64,
    pub morse_index: usize,
    pub laplacian: f64,
    /// Smallest `|eigenvalue|` of the intrinsic Hessian.
    pub hessian_margin: f64,
}

/// All critical points found for one `K`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorseReport {
    pub n: usize,
    /// Sorted by decreasing value.
    pub records: Vec<CriticalPointRecord>,
    /// `M_0, …, M_n`.
    pub counts: Vec<usize>,
    /// `min |ΔK|` over the records.
    pub nd_margin: f64,
    /// `Σ_j (-1)^j M_j`.
    pub euler_check: i64,
}

impl MorseReport {
    /// Assembles a report from records (sorted by decreasing value).
    pub fn from_records(n: usize, mut records: Vec<CriticalPointRecord>) -> Self {
        records.sort_by(|a, b| b.value.total_cmp(&a.value));
        let mut counts = vec![0; n + 1];
        for r in &records {
            counts[r.morse_index.min(n)] += 1;
        }
        let euler_check = counts
            .iter()
            .enumerate()
            .map(|(j, m)| if j % 2 == 0 { *m as i64 } else { -(*m as i64) })
            .sum();
        let nd_margin = records
            .iter()
            .map(|r| r.laplacian.abs())
            .fold(f64::INFINITY, f64::min);
        Self {
            n,
            records,
            counts,
            nd_margin,
            euler_check,
        }
    }

    /// A report with placeholder locations, for evaluating the criteria on
    /// given `(value, index, laplacian)` triples.
    pub fn synthetic(n: usize, points: &[(f64, usize, f64)]) -> Self {
        let records = points
            .iter()
            .map(|&(value, morse_index, laplacian)| CriticalPointRecord {
                location: SpherePoint::north(n),
                value,
                morse_index,
                laplacian,
                hessian_margin: 1.0,
            })
            .collect();
        Self::from_records(n, records)
    }

    /// `1 + (-1)^n`.
    pub fn expected_euler(&self) -> i64 {
        if self.n.is_multiple_of(2) {
            2
        } else {
            0
        }
    }

    /// Records with `ΔK < 0`, by decreasing value.
    pub fn negative_laplacian(&self) -> Vec<&CriticalPointRecord> {
        self.records.iter().filter(|r| r.laplacian < 0.0).collect()
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Settings of the multi-start search.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Random seeds in addition to `±e_i`.
    pub seeds: usize,
    /// Degeneracy threshold; roots closer than `10 tol` are merged.
    pub tol: f64,
    pub rng_seed: u64,
    /// Rounds of additional seeding while the Euler check fails.
    pub max_rounds: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seeds: 400,
            tol: 1e-9,
            rng_seed: 0x5eed,
            max_rounds: 3,
        }
    }
}

/// Newton distance `|H⁻¹ g|` (radians) accepted as a root.
const ROOT_TOL: f64 = 1e-12;
/// The same, for iterations whose steps have stalled.
const STALL_TOL: f64 = 1e-10;

fn newton_distance(k: &dyn ScalarField, p: &SpherePoint) -> f64 {
    let b = tangent_basis(p.coords());
    let g: DVector<f64> = b.transpose() * k.gradient(p.coords());
    let (_, h) = k.tangent_hessian(p);
    h.lu().solve(&g).map_or(f64::INFINITY, |d| {
        if d.iter().all(|v| v.is_finite()) {
            d.norm()
        } else {
            f64::INFINITY
        }
    })
}

enum Outcome {
    Root(SpherePoint),
    Flat(SpherePoint),
    Lost,
}

/// Damped Newton on `∇K = 0` in the tangent space, retracting by normalization.
fn newton_from(k: &dyn ScalarField, seed: &SpherePoint) -> Outcome {
    let n = k.dim();
    let mut p = seed.clone();
    let mut mu = 1e-3;
    for _ in 0..200 {
        let b = tangent_basis(p.coords());
        let g: DVector<f64> = b.transpose() * k.gradient(p.coords());
        let (_, h) = k.tangent_hessian(&p);
        let gnorm = g.norm();
        let hscale = h.abs().max();
        if hscale < 1e-300 && gnorm < 1e-300 {
            return Outcome::Flat(p);
        }
        // Levenberg–Marquardt on |g|^2, which also converges to saddles
        let jtj = h.transpose() * &h;
        let rhs = -(h.transpose() * &g);
        let mut accepted = false;
        for _ in 0..30 {
            let damp = mu * (jtj.diagonal().max() + 1e-300);
            let sys = &jtj + DMatrix::identity(n, n) * damp;
            let Some(step) = sys.cholesky().map(|c| c.solve(&rhs)) else {
                mu *= 10.0;
                continue;
            };
            let mut step = step;
            let len = step.norm();
            if len > 0.5 {
                step *= 0.5 / len;
            }
            let q = SpherePoint::new(
                (DVector::from_column_slice(p.coords()) + &b * &step)
                    .iter()
                    .copied()
                    .collect(),
            )
            .expect("retraction of a finite point");
            let bq = tangent_basis(q.coords());
            let gq = (bq.transpose() * k.gradient(q.coords())).norm();
            if gq < gnorm || gq == 0.0 {
                p = q;
                mu = (mu * 0.1).max(1e-12);
                accepted = true;
                if gq == 0.0 {
                    return Outcome::Root(p);
                }
                let len = step.norm();
                if len < 1e-8 {
                    // a stall is a root only if the Newton correction is at
                    // rounding level; minima of |g|^2 have singular Hessian
                    let d = newton_distance(k, &p);
                    if d <= ROOT_TOL || (len < 1e-14 && d <= STALL_TOL) {
                        return Outcome::Root(p);
                    }
                    if len < 1e-14 {
                        return Outcome::Lost;
                    }
                }
                break;
            }
            mu *= 10.0;
        }
        if !accepted {
            // no descent possible: either at a root to rounding or stuck
            let hmin = SymmetricEigen::new(h.clone())
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |a, v| a.min(v.abs()));
            if gnorm <= 1e-10 * hmin.max(1e-300) || gnorm < 1e-300 {
                return Outcome::Root(p);
            }
            if hmin < 1e-300 && gnorm < 1e-300 {
                return Outcome::Flat(p);
            }
            return Outcome::Lost;
        }
    }
    Outcome::Lost
}

fn classify(k: &dyn ScalarField, p: &SpherePoint) -> CriticalPointRecord {
    let (_, h) = k.tangent_hessian(p);
    let eig = SymmetricEigen::new(h);
    let morse_index = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
    let hessian_margin = eig
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, v| a.min(v.abs()));
    CriticalPointRecord {
        location: p.clone(),
        value: k.value_at(p),
        morse_index,
        laplacian: k.laplacian(p),
        hessian_margin,
    }
}

fn gaussian_seeds(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<SpherePoint> {
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(rng)).collect();
            SpherePoint::new(v).unwrap_or_else(|_| SpherePoint::north(n))
        })
        .collect()
}

fn shell_seeds(root: &SpherePoint, rng: &mut ChaCha8Rng) -> Vec<SpherePoint> {
    let n = root.dim();
    let b = tangent_basis(root.coords());
    let mut out = Vec::new();
    for r in [3e-1, 1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4] {
        let mut dirs: Vec<DVector<f64>> = Vec::new();
        for j in 0..n {
            for s in [1.0, -1.0] {
                dirs.push(b.column(j) * s);
            }
        }
        for _ in 0..4 {
            let c = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
            let v = &b * c;
            let norm = v.norm();
            dirs.push(v / norm);
        }
        for d in dirs {
            let v: Vec<f64> = d.iter().map(|x| x * r).collect();
            out.push(root.exp(&v));
        }
    }
    out
}

/// Multi-start search for all critical points of `K` on `S^n`.
///
/// Seeds are `±e_i` plus Gaussian points; if the Euler characteristic check
/// fails, further rounds seed midpoints between found roots and small
/// shells around them. Fails on degenerate critical points and on an Euler
/// mismatch that survives all rounds.
pub fn find_critical_points(k: &dyn ScalarField, opts: &SearchOptions) -> Result<MorseReport> {
    let n = k.dim();
    if opts.seeds < 100 {
        return Err(Error::Config(format!(
            "need at least 100 seeds, got {}",
            opts.seeds
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let mut seeds: Vec<SpherePoint> = Vec::new();
    for i in 0..=n {
        let mut e = vec![0.0; n + 1];
        e[i] = 1.0;
        seeds.push(SpherePoint::new(e.clone())?);
        e[i] = -1.0;
        seeds.push(SpherePoint::new(e)?);
    }
    seeds.extend(gaussian_seeds(n, opts.seeds, &mut rng));
    let merge_radius = 10.0 * opts.tol;
    let mut roots: Vec<SpherePoint> = Vec::new();
    let mut report = None;
    for round in 0..=opts.max_rounds {
        let outcomes: Vec<Outcome> = seeds.par_iter().map(|s| newton_from(k, s)).collect();
        for o in outcomes {
            match o {
                Outcome::Root(p) => {
                    if !roots.iter().any(|r| r.geodesic_distance(&p) < merge_radius) {
                        roots.push(p);
                    }
                }
                Outcome::Flat(p) => {
                    return Err(Error::Degenerate {
                        location: p.coords().to_vec(),
                        detail: "degenerate critical manifold".into(),
                    })
                }
                Outcome::Lost => {}
            }
        }
        let records: Vec<CriticalPointRecord> = roots.iter().map(|p| classify(k, p)).collect();
        for r in &records {
            if r.hessian_margin < opts.tol {
                return Err(Error::Degenerate {
                    location: r.location.coords().to_vec(),
                    detail: format!(
                        "hessian eigenvalue {:.3e} below tolerance",
                        r.hessian_margin
                    ),
                });
            }
            if r.laplacian.abs() < opts.tol {
                return Err(Error::Degenerate {
                    location: r.location.coords().to_vec(),
                    detail: format!("laplacian {:.3e} vanishes at a critical point", r.laplacian),
                });
            }
        }
        let rep = MorseReport::from_records(n, records);
        if rep.euler_check == rep.expected_euler() {
            report = Some(rep);
            break;
        }
        report = Some(rep);
        if round == opts.max_rounds {
            break;
        }
        seeds.clear();
        for (i, a) in roots.iter().enumerate() {
            for b in roots.iter().skip(i + 1) {
                let mid: Vec<f64> = a
                    .coords()
                    .iter()
                    .zip(b.coords())
                    .map(|(x, y)| x + y)
                    .collect();
                if let Ok(m) = SpherePoint::new(mid) {
                    seeds.push(m);
                }
            }
            seeds.extend(shell_seeds(a, &mut rng));
        }
        seeds.extend(gaussian_seeds(n, opts.seeds * 2, &mut rng));
    }
    let rep = report.expect("at least one round");
    if rep.euler_check != rep.expected_euler() {
        return Err(Error::MissedRoots {
            found: rep.euler_check,
            expected: rep.expected_euler(),
        });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{ConstantField, CoordinateField, CubicField};

    #[test]
    fn height_function_has_two_poles() {
        for n in [3, 4, 5] {
            let k = CoordinateField { n, index: n };
            let rep = find_critical_points(&k, &SearchOptions::default()).unwrap();
            assert_eq!(rep.records.len(), 2);
            let top = &rep.records[0];
            assert!(top.location.height() > 1.0 - 1e-12);
            assert_eq!(top.morse_index, n);
            assert!((top.laplacian + n as f64).abs() < 1e-10);
            let bottom = &rep.records[1];
            assert_eq!(bottom.morse_index, 0);
            assert!((bottom.laplacian - n as f64).abs() < 1e-10);
            assert_eq!(rep.counts[0], 1);
            assert_eq!(rep.counts[n], 1);
        }
    }

    #[test]
    fn constant_is_degenerate() {
        let k = ConstantField { n: 4, c: 1.0 };
        match find_critical_points(&k, &SearchOptions::default()) {
            Err(Error::Degenerate { detail, .. }) => {
                assert!(detail.contains("degenerate critical manifold"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn perturbed_height_passes_euler_check() {
        let n = 4;
        let mut k = CubicField::new(n, 1.0);
        k.b[n] = 0.1;
        k.q[(0, 0)] = 0.01;
        k.q[(1, 1)] = -0.01;
        let rep = find_critical_points(&k, &SearchOptions::default()).unwrap();
        assert_eq!(rep.euler_check, 2);
    }

    #[test]
    fn quadratic_form_has_six_points() {
        // Σ q_i x_i^2 with distinct q_i: critical points ±e_i with index i
        let n = 2;
        let mut k = CubicField::new(n, 3.0);
        for (i, q) in [1.0, 2.0, 4.0].iter().enumerate() {
            k.q[(i, i)] = *q;
        }
        let rep = find_critical_points(&k, &SearchOptions::default()).unwrap();
        assert_eq!(rep.records.len(), 6);
        assert_eq!(rep.counts, vec![2, 2, 2]);
    }

    #[test]
    fn seed_count_is_validated() {
        let k = CoordinateField { n: 3, index: 3 };
        let opts = SearchOptions {
            seeds: 10,
            ..Default::default()
        };
        assert!(matches!(
            find_critical_points(&k, &opts),
            Err(Error::Config(_))
        ));
    }
}
