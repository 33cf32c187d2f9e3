use super::{gamma, lq_norm, luxemburg_norm, YoungFunction};
use crate::error::{Error, Result};
use crate::hermite::PhysicalField;
use crate::scalar::Real;

/// Absolute slack allowed when checking an inequality `lhs ≤ rhs`.
pub const EMBEDDING_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingReport<T> {
    pub lhs: T,
    pub rhs: T,
    /// `rhs − lhs`.
    pub margin: T,
    pub holds: bool,
    /// Bound with `Γ(q/p + 1)^{1/q}`, reported alongside `Γ(p/q + 1)^{1/q}`.
    pub sharp_rhs: Option<T>,
    pub holds_sharp: Option<bool>,
}

fn within<T: Real>(lhs: T, rhs: T) -> bool {
    lhs <= rhs + T::lit(EMBEDDING_SLACK)
}

/// `‖f‖_{L^q} ≤ Γ(p/q + 1)^{1/q} ‖f‖_{exp L^p}` for `1 ≤ p ≤ q < ∞`.
///
/// The constant `Γ(p/q+1)^{1/q} ≤ 1` is not valid in general: a narrow
/// plateau of height `c` on a set of small measure violates it. The bound
/// with `Γ(q/p+1)^{1/q}`, which follows from `s^q ≤ Γ(q/p+1)(e^{s^p} − 1)`,
/// is evaluated as well.
pub fn check_embedding_lq_from_explp<T: Real>(f: &PhysicalField<T>, p: T, q: T) -> Result<EmbeddingReport<T>> {
    if !(p >= T::one()) || !(q >= p) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("need 1 <= p <= q < inf, got p = {p}, q = {q}")));
    }
    let lhs = lq_norm(f, q)?.value;
    let exp = luxemburg_norm(f, YoungFunction::exp_lp(p)?)?.value;
    let rhs = gamma(p / q + T::one())?.powf(q.recip()) * exp;
    let sharp = gamma(q / p + T::one())?.powf(q.recip()) * exp;
    Ok(EmbeddingReport { lhs, rhs, margin: rhs - lhs, holds: within(lhs, rhs), sharp_rhs: Some(sharp), holds_sharp: Some(within(lhs, sharp)) })
}

/// `‖f‖_{exp L^p} ≤ (log 2)^{-1/p}(‖f‖_{L^q} + ‖f‖_{L^∞})` for `1 ≤ q ≤ p`.
pub fn check_embedding_explp_from_lq_linf<T: Real>(f: &PhysicalField<T>, p: T, q: T) -> Result<EmbeddingReport<T>> {
    if !(q >= T::one()) || !(q <= p) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("need 1 <= q <= p < inf, got p = {p}, q = {q}")));
    }
    let lhs = luxemburg_norm(f, YoungFunction::exp_lp(p)?)?.value;
    let rhs = T::LN_2().powf(-p.recip()) * (lq_norm(f, q)?.value + f.max_abs());
    Ok(EmbeddingReport { lhs, rhs, margin: rhs - lhs, holds: within(lhs, rhs), sharp_rhs: None, holds_sharp: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMomentReport<T> {
    /// `‖e^{λ|u|^p} − 1‖_{L^q}`.
    pub lhs: T,
    /// `(λ q K^p)^{1/q}`.
    pub bound: T,
    pub exp_norm: T,
    pub holds: bool,
}

/// `‖e^{λ|u|^p} − 1‖_{L^q} ≤ (λqK^p)^{1/q}` under `λqK^p ≤ 1` and `‖u‖_{exp L^p} ≤ K`.
pub fn check_exp_moment_bound<T: Real>(u: &PhysicalField<T>, lambda: T, p: T, q: T, k: T) -> Result<ExpMomentReport<T>> {
    if !(lambda > T::zero()) || !(k > T::zero()) {
        return Err(Error::Precondition(format!("need lambda > 0 and K > 0, got lambda = {lambda}, K = {k}")));
    }
    if !(p >= T::one() && p.is_finite()) || !(q >= T::one() && q.is_finite()) {
        return Err(Error::Precondition(format!("need 1 <= p, q < inf, got p = {p}, q = {q}")));
    }
    let budget = lambda * q * k.powf(p);
    if budget > T::one() + T::lit(1e-12) {
        return Err(Error::Precondition(format!("lambda*q*K^p = {budget} exceeds 1")));
    }
    let exp_norm = luxemburg_norm(u, YoungFunction::exp_lp(p)?)?.value;
    if exp_norm > k * (T::one() + T::lit(1e-8)) {
        return Err(Error::Precondition(format!("||u||_(exp L^p) = {exp_norm} exceeds K = {k}")));
    }
    let moment = u.map(|v| (lambda * v.abs().powf(p)).exp_m1())?;
    let lhs = lq_norm(&moment, q)?.value;
    let bound = budget.min(T::one()).powf(q.recip());
    Ok(ExpMomentReport { lhs, bound, exp_norm, holds: within(lhs, bound) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport<T> {
    pub lp_norm: T,
    /// Luxemburg norm for `φ(s) = e^{s^p} − 1 − s^p`.
    pub reduced_norm: T,
    pub exp_norm: T,
    /// `(‖g‖_{L^p} + ‖g‖_{L^φ}) / ‖g‖_{exp L^p}`.
    pub ratio: T,
}

/// Ratio between `‖g‖_{L^p} + ‖g‖_{L^φ}` and `‖g‖_{exp L^p}`, which the two-sided
/// equivalence keeps inside a fixed band.
pub fn equivalence_e32<T: Real>(g: &PhysicalField<T>, p: T) -> Result<EquivalenceReport<T>> {
    if g.is_zero() {
        return Err(Error::InvalidParameter("norm equivalence ratio is undefined for the zero field".into()));
    }
    let reduced = YoungFunction::exp_lp_reduced(p)?;
    let lp_norm = lq_norm(g, p)?.value;
    let reduced_norm = luxemburg_norm(g, reduced)?.value;
    let exp_norm = luxemburg_norm(g, YoungFunction::exp_lp(p)?)?.value;
    Ok(EquivalenceReport { lp_norm, reduced_norm, exp_norm, ratio: (lp_norm + reduced_norm) / exp_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_function, Grid};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn ground(c: f64) -> PhysicalField<f64> {
        let grid = Arc::new(Grid::uniform(1, 14.0, 1401).unwrap());
        PhysicalField::sample(grid, |x| c * hermite_function(0, x[0])).unwrap()
    }

    fn plateau(half_width: f64, height: f64) -> PhysicalField<f64> {
        let grid = Arc::new(Grid::uniform(1, 2.0, 16001).unwrap());
        PhysicalField::sample(grid, |x: &[f64]| height * 0.5 * (((half_width - x[0].abs()) / 2e-4).tanh() + 1.0)).unwrap()
    }

    #[test]
    fn equal_exponents_reduce_to_unit_constant() {
        let r = check_embedding_lq_from_explp(&ground(1.0), 2.0, 2.0).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.rhs, luxemburg_norm(&ground(1.0), YoungFunction::ExpLp(2.0)).unwrap().value, max_relative = 1e-14);
    }

    #[test]
    fn ground_state_embeddings_hold() {
        assert!(check_embedding_lq_from_explp(&ground(1.0), 2.0, 4.0).unwrap().holds);
        assert!(check_embedding_explp_from_lq_linf(&ground(1.0), 2.0, 2.0).unwrap().holds);
        assert!(check_embedding_lq_from_explp(&ground(1.0), 3.0, 2.0).is_err());
        assert!(check_embedding_explp_from_lq_linf(&ground(1.0), 2.0, 3.0).is_err());
    }

    #[test]
    fn zero_field_gives_zero_sides() {
        let z = ground(0.0);
        let r = check_embedding_lq_from_explp(&z, 1.0, 3.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds);
        assert!(equivalence_e32(&z, 2.0).is_err());
    }

    #[test]
    fn unit_plateau_sides() {
        let r = check_embedding_explp_from_lq_linf(&plateau(0.5, 1.0), 2.0, 1.0).unwrap();
        assert_relative_eq!(r.lhs, 1.2011, max_relative = 1e-3);
        assert_relative_eq!(r.rhs, 2.4022, max_relative = 1e-3);
    }

    /// A plateau on a set of measure `m` has `‖·‖_{L^q} = m^{1/q}` and
    /// `‖·‖_{exp L^1} = 1/ln(1 + 1/m)`; for small `m` the first exceeds
    /// `Γ(1/q + 1)^{1/q}` times the second while staying below the
    /// `Γ(q + 1)^{1/q}` bound.
    #[test]
    fn narrow_plateau_separates_the_two_constants() {
        let m = 0.0634;
        let f = plateau(m / 2.0, 1.0);
        let want_lq = m.powf(1.0 / 3.0);
        let want_exp = 1.0 / (1.0 + 1.0 / m).ln();
        let r = check_embedding_lq_from_explp(&f, 1.0, 3.0).unwrap();
        assert_relative_eq!(r.lhs, want_lq, max_relative = 2e-3);
        assert_relative_eq!(r.lhs / (r.rhs / gamma(4.0f64 / 3.0).unwrap().powf(1.0 / 3.0)), want_lq / want_exp, max_relative = 5e-3);
        assert!(!r.holds);
        assert_eq!(r.holds_sharp, Some(true));
    }

    #[test]
    fn moment_bound_on_scaled_ground_state() {
        let u = ground(0.3);
        let k = luxemburg_norm(&u, YoungFunction::ExpLp(2.0)).unwrap().value;
        let r = check_exp_moment_bound(&u, 0.5, 2.0, 2.0, k).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.lhs > 0.0);
        let zero = check_exp_moment_bound(&ground(0.0), 0.5, 2.0, 2.0, 1.0).unwrap();
        assert_eq!(zero.lhs, 0.0);
        assert_relative_eq!(zero.bound, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn moment_bound_preconditions() {
        let u = ground(0.3);
        assert!(matches!(check_exp_moment_bound(&u, 2.0, 2.0, 2.0, 1.0), Err(Error::Precondition(m)) if m.contains("exceeds 1")));
        assert!(matches!(check_exp_moment_bound(&u, 0.1, 2.0, 1.0, 0.01), Err(Error::Precondition(m)) if m.contains("exceeds K")));
    }

    #[test]
    fn equivalence_ratio_is_scale_free() {
        let a = equivalence_e32(&ground(1.0), 2.0).unwrap().ratio;
        let b = equivalence_e32(&ground(3.0), 2.0).unwrap().ratio;
        assert_relative_eq!(a, b, max_relative = 1e-7);
        assert!(a.is_finite() && a > 0.0);
    }
}
