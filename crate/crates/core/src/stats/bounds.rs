use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::special::{inv_inc_beta, student_t_quantile};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Two-sided Clopper-Pearson interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialBound<T> {
    pub p_hat: T,
    pub m: usize,
    pub alpha: T,
    pub lower: T,
    pub upper: T,
}

/// t-interval for a population mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanBound<T> {
    pub mean: T,
    pub std: T,
    pub m: usize,
    pub alpha: T,
    pub lower: T,
    pub upper: T,
    pub t_star: T,
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::arg(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Clopper-Pearson bounds for `x` successes out of `m` trials at confidence `1 - alpha`.
pub fn cp_bounds<T: Real>(x: usize, m: usize, alpha: T) -> Result<BinomialBound<T>> {
    check_alpha(alpha)?;
    if m == 0 {
        return Err(Error::arg("m must be at least 1"));
    }
    if x > m {
        return Err(Error::arg(format!("successes {x} exceed trials {m}")));
    }
    let half = alpha / T::lit(2.0);
    let lower = cp_lower(x, m, alpha);
    let upper = if x == m {
        T::one()
    } else {
        inv_inc_beta(T::one() - half, T::count(x + 1), T::count(m - x))
    };
    Ok(BinomialBound {
        p_hat: T::count(x) / T::count(m),
        m,
        alpha,
        lower,
        upper,
    })
}

/// Lower end of the Clopper-Pearson interval; arguments are assumed valid.
fn cp_lower<T: Real>(x: usize, m: usize, alpha: T) -> T {
    if x == 0 {
        T::zero()
    } else {
        inv_inc_beta(alpha / T::lit(2.0), T::count(x), T::count(m - x + 1))
    }
}

/// Lower Clopper-Pearson bound with a real-valued success count `x·m`, `x ∈ (0, 1)`.
pub fn cp_lower_continuous<T: Real>(x: T, m: usize, alpha: T) -> T {
    let xm = x * T::count(m);
    inv_inc_beta(alpha / T::lit(2.0), xm, T::count(m) - xm + T::one())
}

/// Success count nearest to `p · m`.
pub fn successes<T: Real>(p: T, m: usize) -> usize {
    let x = (p * T::count(m)).round();
    x.to_usize().unwrap_or(0).min(m)
}

/// Mean with a two-sided Student-t interval; `ŝ` uses the `m - 1` denominator.
pub fn mean_ci<T: Real>(samples: &[T], alpha: T) -> Result<MeanBound<T>> {
    check_alpha(alpha)?;
    let m = samples.len();
    if m < 2 {
        return Err(Error::arg("mean_ci needs at least 2 samples"));
    }
    let n = T::count(m);
    let mean = samples.iter().fold(T::zero(), |a, &s| a + s) / n;
    let ss = samples.iter().fold(T::zero(), |a, &s| a + (s - mean) * (s - mean));
    let std = (ss / (n - T::one())).sqrt();
    let t_star = student_t_quantile(T::one() - alpha / T::lit(2.0), n - T::one());
    let half = t_star * std / n.sqrt();
    Ok(MeanBound {
        mean,
        std,
        m,
        alpha,
        lower: mean - half,
        upper: mean + half,
        t_star,
    })
}

/// Lower bound on the executed path's expected coverage (POI count units).
pub fn coverage_lower_bound<T: Real>(ipv: &[T], m: usize, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    if m == 0 {
        return Err(Error::arg("m must be at least 1"));
    }
    Ok(ipv.iter().fold(T::zero(), |acc, &p| acc + cp_lower(successes(p, m), m, alpha)))
}

/// Upper bound on the executed path's collision probability.
pub fn collision_upper_bound<T: Real>(c_hat: T, m: usize, alpha: T) -> Result<T> {
    Ok(cp_bounds(successes(c_hat, m), m, alpha)?.upper)
}

/// Smallest coverage lower bound attainable by any IPV with `Σ p̂ = k κ`.
pub fn min_coverage_bound<T: Real>(kappa: T, m: usize, alpha: T, k: usize) -> Result<T> {
    if !(kappa > T::zero() && kappa <= T::one()) {
        return Err(Error::arg(format!("kappa must lie in (0, 1], got {kappa}")));
    }
    Ok(T::count(k) * cp_bounds(successes(kappa, m), m, alpha)?.lower)
}

/// Which side of the Clopper-Pearson interval a guideline table reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `p̂⁻(κ, m, α)`
    Coverage,
    /// `p̂⁺(ρ, m, α)`
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidelineRow<T> {
    pub m: usize,
    pub level: T,
    pub bound: T,
}

/// Bound as a function of sample count and estimate level.
pub fn guideline_table<T: Real>(
    m_grid: &[usize],
    level_grid: &[T],
    alpha: T,
    kind: BoundKind,
) -> Result<Vec<GuidelineRow<T>>> {
    if m_grid.is_empty() || level_grid.is_empty() {
        return Err(Error::arg("guideline grids must be non-empty"));
    }
    let mut rows = Vec::with_capacity(m_grid.len() * level_grid.len());
    for &m in m_grid {
        for &level in level_grid {
            if !(level >= T::zero() && level <= T::one()) {
                return Err(Error::arg(format!("level {level} outside [0, 1]")));
            }
            let b = cp_bounds(successes(level, m), m, alpha)?;
            let bound = match kind {
                BoundKind::Coverage => b.lower,
                BoundKind::Collision => b.upper,
            };
            rows.push(GuidelineRow { m, level, bound });
        }
    }
    Ok(rows)
}

/// CSV with header `m,level,bound`.
pub fn guideline_csv<T: Real>(rows: &[GuidelineRow<T>]) -> String {
    let mut out = String::from("m,level,bound\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.m, r.level, r.bound);
    }
    out
}

/// A grid point where a finite difference was not strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation<T> {
    pub x: T,
    /// 1 for the first difference, 2 for the second.
    pub order: u8,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport<T> {
    pub m: usize,
    pub alpha: T,
    pub grid_size: usize,
    pub min_first_diff: T,
    pub min_second_diff: T,
    pub violations: Vec<Violation<T>>,
}

impl<T: Real> ConvexityReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Finite-difference check that `x ↦ p̂⁻(x, m, α)` is increasing and strictly convex
/// on the grid `x_i = i / (grid_size + 1)`.
pub fn convexity_check<T: Real>(m: usize, alpha: T, grid_size: usize) -> Result<ConvexityReport<T>> {
    check_alpha(alpha)?;
    if grid_size < 3 {
        return Err(Error::arg("grid_size must be at least 3"));
    }
    if m == 0 {
        return Err(Error::arg("m must be at least 1"));
    }
    let denom = T::count(grid_size + 1);
    let xs: Vec<T> = (1..=grid_size).map(|i| T::count(i) / denom).collect();
    let ys: Vec<T> = xs.iter().map(|&x| cp_lower_continuous(x, m, alpha)).collect();
    let mut violations = Vec::new();
    let mut min_first = T::infinity();
    for i in 0..grid_size - 1 {
        let d = ys[i + 1] - ys[i];
        min_first = min_first.min(d);
        if !(d > T::zero()) {
            violations.push(Violation { x: xs[i], order: 1, value: d });
        }
    }
    let mut min_second = T::infinity();
    for i in 1..grid_size - 1 {
        let d2 = ys[i + 1] - ys[i] - ys[i] + ys[i - 1];
        min_second = min_second.min(d2);
        if !(d2 > T::zero()) {
            violations.push(Violation { x: xs[i], order: 2, value: d2 });
        }
    }
    Ok(ConvexityReport {
        m,
        alpha,
        grid_size,
        min_first_diff: min_first,
        min_second_diff: min_second,
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasReport<T> {
    /// Chance that a path with true inspection probability `p` is never seen in `m` samples.
    pub per_path: T,
    /// Chance that at least one of `k` such paths is.
    pub any_of_k: T,
}

/// False-negative probabilities for a POI that every sample misses.
pub fn selection_bias_demo<T: Real>(true_p: T, m: usize, k: usize) -> Result<BiasReport<T>> {
    if !(true_p >= T::zero() && true_p <= T::one()) {
        return Err(Error::arg(format!("p must lie in [0, 1], got {true_p}")));
    }
    let per_path = (T::one() - true_p).powf(T::count(m));
    let any_of_k = T::one() - (T::one() - per_path).powf(T::count(k));
    Ok(BiasReport { per_path, any_of_k })
}

/// Bound certificate attached to a command plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCertificate {
    /// Lower bound on expected number of inspected POIs.
    pub coverage_lower: f64,
    /// Upper bound on collision probability.
    pub collision_upper: f64,
    /// Interval on expected executed length, meters.
    pub length_lower: f64,
    pub length_upper: f64,
    pub alpha: f64,
    pub m: usize,
    /// Bounds on a path picked by a search over many candidates are a guideline, not a guarantee.
    pub guideline_only: bool,
}

impl PlanCertificate {
    /// Certificate from a plan's estimates. `lengths` are the per-sample executed
    /// lengths; with fewer than two samples the length interval degenerates to the mean.
    pub fn new(ipv: &[f64], c_hat: f64, lengths: &[f64], m: usize, alpha: f64) -> Result<Self> {
        let coverage_lower = coverage_lower_bound(ipv, m, alpha)?;
        let collision_upper = collision_upper_bound(c_hat, m, alpha)?;
        let (length_lower, length_upper) = if lengths.len() >= 2 {
            let b = mean_ci(lengths, alpha)?;
            (b.lower, b.upper)
        } else {
            let l = lengths.first().copied().unwrap_or(0.0);
            (l, l)
        };
        Ok(Self {
            coverage_lower,
            collision_upper,
            length_lower,
            length_upper,
            alpha,
            m,
            guideline_only: true,
        })
    }
}
