//! Index sums, pinching conditions, Leray–Schauder degree counts and the
//! min-max criterion, all evaluated on a [`MorseReport`].

use serde::{Deserialize, Serialize};

use super::MorseReport;
use crate::bubbles::sobolev_constant;
use crate::error::{domain, Error, Result};

/// Relative slack for the strict inequalities.
pub const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexFormula {
    /// `Σ_{ΔK<0} (-1)^{m(K,x)}`.
    pub sum: i64,
    /// `sum ≠ (-1)^n`.
    pub satisfied: bool,
    pub warning: Option<String>,
}

pub fn index_formula(report: &MorseReport) -> IndexFormula {
    let neg = report.negative_laplacian();
    let sum = neg.iter().map(|r| sign(r.morse_index)).sum();
    let warning = neg.is_empty().then(|| {
        "no critical points with negative laplacian: no bounded-energy blow-up is possible"
            .to_string()
    });
    IndexFormula {
        sum,
        satisfied: sum != sign(report.n),
        warning,
    }
}

fn sign(k: usize) -> i64 {
    if k.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `Σ_{|S| = q} (-1)^{(q-1) + Σ_{i∈S} (n - m_i)}` over subsets of the
/// negative-Laplacian critical points.
pub fn degree_count(report: &MorseReport, q: usize) -> Result<i64> {
    let s: Vec<i64> = report
        .negative_laplacian()
        .iter()
        .map(|r| sign(report.n - r.morse_index))
        .collect();
    if q == 0 || q > s.len() {
        return domain(format!("q = {q} outside 1..={}", s.len()));
    }
    // elementary symmetric polynomial e_q(s)
    let mut e = vec![0i64; q + 1];
    e[0] = 1;
    for si in s {
        for k in (1..=q).rev() {
            e[k] += e[k - 1] * si;
        }
    }
    Ok(sign(q - 1) * e[q])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Equality within the relative slack.
    FailsBoundary,
}

/// One strict inequality `lhs < rhs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Condition {
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub verdict: Verdict,
    /// `lhs ≤ rhs` (within slack).
    pub holds_nonstrict: bool,
}

impl Condition {
    fn new(m: usize, lhs: f64, rhs: f64) -> Self {
        let slack = BOUNDARY_SLACK * rhs.abs().max(lhs.abs());
        let verdict = if lhs < rhs - slack {
            Verdict::Holds
        } else if (lhs - rhs).abs() <= slack {
            Verdict::FailsBoundary
        } else {
            Verdict::Fails
        };
        Self {
            m,
            lhs,
            rhs,
            verdict,
            holds_nonstrict: lhs <= rhs + slack,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PinchReport {
    pub n: usize,
    pub k_max: f64,
    pub k_min: f64,
    /// `K_1 ≥ … ≥ K_l` over the negative-Laplacian critical points.
    pub ordered_values: Vec<f64>,
    /// `E_lower[m-1]` uses the `m` largest values, `m = 1..=l`.
    pub e_lower: Vec<f64>,
    /// `E_upper[m-1]` uses the `m` smallest values.
    pub e_upper: Vec<f64>,
    /// `K_max/K_min < ((m+1)/m)^{1/(n-2)}`, `m = 1..l-1`.
    pub p_m: Vec<Condition>,
    /// `(K_max/K_min)^{(n-2)/n} < E_lower[m+1]/E_upper[m]`.
    pub tp_m: Vec<Condition>,
    /// Same with the exponent `(n-2)/2` on the ratio.
    pub tp_m_literal: Vec<Condition>,
    pub holds_pm: Vec<bool>,
    pub holds_tpm: Vec<bool>,
}

pub fn pinch_report(report: &MorseReport) -> Result<PinchReport> {
    let n = report.n;
    let ordered_values: Vec<f64> = report
        .negative_laplacian()
        .iter()
        .map(|r| r.value)
        .collect();
    let l = ordered_values.len();
    if l == 0 {
        return Err(Error::Domain(
            "no negative-Laplacian critical points".into(),
        ));
    }
    let k_max = report
        .records
        .iter()
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let k_min = report
        .records
        .iter()
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);
    if k_min <= 0.0 {
        return domain(format!(
            "K must be positive at critical points, found {k_min}"
        ));
    }
    let c_hat0 = sobolev_constant(n)?.c_hat0;
    let nf = n as f64;
    let w: Vec<f64> = ordered_values
        .iter()
        .map(|k| k.powf((2.0 - nf) / 2.0))
        .collect();
    let energy = |s: f64| c_hat0 * s.powf(2.0 / nf);
    let e_lower: Vec<f64> = (1..=l).map(|m| energy(w[..m].iter().sum())).collect();
    let e_upper: Vec<f64> = (1..=l).map(|m| energy(w[l - m..].iter().sum())).collect();
    let ratio = k_max / k_min;
    let mut p_m = Vec::new();
    let mut tp_m = Vec::new();
    let mut tp_m_literal = Vec::new();
    for m in 1..l {
        let mf = m as f64;
        p_m.push(Condition::new(
            m,
            ratio,
            ((mf + 1.0) / mf).powf(1.0 / (nf - 2.0)),
        ));
        let e_ratio = e_lower[m] / e_upper[m - 1];
        tp_m.push(Condition::new(m, ratio.powf((nf - 2.0) / nf), e_ratio));
        tp_m_literal.push(Condition::new(m, ratio.powf((nf - 2.0) / 2.0), e_ratio));
    }
    Ok(PinchReport {
        n,
        k_max,
        k_min,
        holds_pm: p_m.iter().map(Condition::holds).collect(),
        holds_tpm: tp_m.iter().map(Condition::holds).collect(),
        ordered_values,
        e_lower,
        e_upper,
        p_m,
        tp_m,
        tp_m_literal,
    })
}

/// A connected component of the region `Ξ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiComponent {
    /// Indices into `MorseReport::records` of the local maxima it contains.
    pub maxima: Vec<usize>,
    /// `max K^{(2-n)/2}` over the component.
    pub max_k_pow: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinmaxResult {
    /// Number of listed maxima.
    pub p: usize,
    /// Number of components.
    pub components: usize,
    /// Index-1 critical points in `[min_Ξ K, max_i K(x_i))`.
    pub q: usize,
    pub gap_lhs: f64,
    pub gap_rhs: f64,
    pub gap_holds: bool,
    pub holds: bool,
    pub reason: Option<String>,
}

pub fn minmax_criterion(report: &MorseReport, xi: &[XiComponent]) -> Result<MinmaxResult> {
    let n = report.n;
    let nf = n as f64;
    if xi.is_empty() {
        return Err(Error::Config("region has no components".into()));
    }
    let mut listed = Vec::new();
    for c in xi {
        if c.maxima.is_empty() {
            return Err(Error::Config(
                "every component must contain a local maximum".into(),
            ));
        }
        for &i in &c.maxima {
            let Some(r) = report.records.get(i) else {
                return Err(Error::Config(format!("maximum index {i} out of range")));
            };
            if r.morse_index != n {
                return Err(Error::Config(format!(
                    "record {i} has index {}, not a local maximum",
                    r.morse_index
                )));
            }
            listed.push(r.value);
        }
    }
    let pow = |k: f64| k.powf((2.0 - nf) / 2.0);
    let gap_lhs = xi
        .iter()
        .map(|c| c.max_k_pow)
        .fold(f64::NEG_INFINITY, f64::max);
    let all_max: Vec<f64> = report
        .records
        .iter()
        .filter(|r| r.morse_index == n)
        .map(|r| r.value)
        .collect();
    let mut gap_rhs = f64::INFINITY;
    for (i, a) in all_max.iter().enumerate() {
        for b in &all_max[i + 1..] {
            gap_rhs = gap_rhs.min((pow(*a) + pow(*b)).powf(2.0 / nf));
        }
    }
    let gap_holds = gap_lhs < gap_rhs;
    let min_xi_k = gap_lhs.powf(-2.0 / (nf - 2.0));
    let top = listed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let q = report
        .records
        .iter()
        .filter(|r| r.morse_index == 1 && r.value >= min_xi_k && r.value < top)
        .count();
    let p = listed.len();
    let c = xi.len();
    let count_ok = (q as i64) < p as i64 - c as i64;
    let reason = if !gap_holds {
        Some("two-bubble level reachable".to_string())
    } else if !count_ok {
        Some(format!("q = {q} not below p - C = {}", p as i64 - c as i64))
    } else {
        None
    };
    Ok(MinmaxResult {
        p,
        components: c,
        q,
        gap_lhs,
        gap_rhs,
        gap_holds,
        holds: gap_holds && count_ok,
        reason,
    })
}
