use std::sync::Arc;

use rayon::prelude::*;

use super::{apply_semigroup, FractionalOrder};
use crate::error::{Error, Result};
use crate::hermite::{Grid, SpectralField, SpectralPlan};
use crate::orlicz::lq_norm;
use crate::scalar::Real;

/// `σ_β = (d/2β)|1/p − 1/q|`, with `1/∞ = 0`.
pub fn sigma_beta<T: Real>(dim: usize, beta: T, p: T, q: T) -> T {
    T::from_count(dim) / (T::lit(2.0) * beta) * (p.recip() - q.recip()).abs()
}

/// Whether the `L^p → L^q` smoothing estimate is asserted for `(p, q, β)`.
///
/// Every pair is covered when `0 < β ≤ 1`. For `β > 1` only `p, q ∈ (1, ∞)`,
/// `(1, ∞)`, `p = 1` with `q ∈ [2, ∞)`, and `p ∈ (1, ∞)` with `q = 1`.
pub fn smoothing_admissible<T: Real>(p: T, q: T, beta: T) -> bool {
    let one = T::one();
    if !(p >= one && q >= one) {
        return false;
    }
    if beta <= one {
        return true;
    }
    let open = |x: T| x > one && x.is_finite();
    (open(p) && open(q)) || (p == one && q.is_infinite()) || (p == one && q >= T::lit(2.0) && q.is_finite()) || (open(p) && q == one)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingRow<T> {
    pub t: T,
    /// `‖e^{-tH^β} g‖_{L^q}`.
    pub norm_q: T,
    /// `‖e^{-tH^β} g‖_{L^q} / (t^{-σ_β} ‖g‖_{L^p})`, for `t ≤ 1`.
    pub short_time: Option<T>,
    /// `‖e^{-tH^β} g‖_{L^q} / (e^{-t d^β} ‖g‖_{L^p})`, for `t ≥ 1`.
    pub long_time: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport<T> {
    pub dim: usize,
    pub beta: T,
    pub p: T,
    pub q: T,
    pub sigma_beta: T,
    pub norm_p: T,
    pub rows: Vec<SmoothingRow<T>>,
}

impl<T: Real> SmoothingReport<T> {
    /// Whether the stored `σ_β` matches a fresh evaluation of its formula.
    pub fn sigma_consistent(&self) -> bool {
        self.sigma_beta == sigma_beta(self.dim, self.beta, self.p, self.q)
    }

    /// Supremum of the short-time ratio over rows with `t ∈ [lo, hi]`.
    pub fn short_time_sup(&self, lo: T, hi: T) -> Option<T> {
        self.rows.iter().filter(|r| r.t >= lo && r.t <= hi).filter_map(|r| r.short_time).reduce(T::max)
    }

    pub fn long_time_ratios(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.rows.iter().filter_map(|r| r.long_time.map(|v| (r.t, v)))
    }
}

/// Smoothing ratios of `g` over `t_grid`, with norms on `eval_grid`.
pub fn smoothing_ratio_sweep<T: Real>(
    g: &SpectralField<T>,
    p: T,
    q: T,
    t_grid: &[T],
    beta: FractionalOrder<T>,
    eval_grid: Arc<Grid<T>>,
) -> Result<SmoothingReport<T>> {
    let b = beta.value();
    if !smoothing_admissible(p, q, b) {
        return Err(Error::InadmissibleExponents { p: p.to_f64_lossy(), q: q.to_f64_lossy(), beta: b.to_f64_lossy() });
    }
    if eval_grid.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: eval_grid.dim() });
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t > T::zero())) {
        return Err(Error::NegativeTime(t.to_f64_lossy()));
    }
    let plan = SpectralPlan::new(eval_grid, g.max_degree());
    let norm_p = lq_norm(&plan.inverse(g)?, p)?.value;
    if norm_p == T::zero() {
        return Err(Error::InvalidParameter("smoothing ratio is undefined for the zero field".into()));
    }
    let dim = g.dim();
    let sigma = sigma_beta(dim, b, p, q);
    let ground_rate = beta.level_rate(0, dim);
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let evolved = plan.inverse(&apply_semigroup(g, t, beta)?)?;
            let norm_q = lq_norm(&evolved, q)?.value;
            let short_time = (t <= T::one()).then(|| norm_q * t.powf(sigma) / norm_p);
            let long_time = (t >= T::one()).then(|| norm_q / ((-t * ground_rate).exp() * norm_p));
            Ok(SmoothingRow { t, norm_q, short_time, long_time })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SmoothingReport { dim, beta: b, p, q, sigma_beta: sigma, norm_p, rows })
}
