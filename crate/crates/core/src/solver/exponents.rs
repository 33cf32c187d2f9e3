use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which range of `a` applies, from comparing `d/(2β)` with `p/(p−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ExponentCase {
    /// `d/(2β) > p/(p−1)`.
    Above,
    /// `d/(2β) = p/(p−1)`.
    Equal,
    /// `d/(2β) < p/(p−1)`.
    Below,
}

impl ExponentCase {
    pub fn number(&self) -> u8 {
        match self {
            Self::Above => 1,
            Self::Equal => 2,
            Self::Below => 3,
        }
    }
}

/// An admissible `(r, q)` pair and the interpolation data that certifies it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationPair<T> {
    pub r: T,
    pub q: T,
    /// `θ_0`; the sequence is `θ_k = θ_0 (m−1)/(pk+m−1)`.
    pub theta0: T,
    /// `ρ_0`.
    pub rho0: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentPlan<T> {
    pub p: T,
    pub m: T,
    pub a: T,
    pub dim: usize,
    pub beta: T,
    pub case: ExponentCase,
    pub a_lower: T,
    /// `+∞` when `m ≥ 2`.
    pub a_upper: T,
    /// `1/(m−1) − d/(2βa)`.
    pub sigma: T,
    pub pair: Option<InterpolationPair<T>>,
    /// `m ≥ p`.
    pub m_at_least_p: bool,
    /// `d > 2βp/(p−1)`, the dimension condition for the interpolation pair.
    pub dimension_condition: bool,
}

impl<T: Real> ExponentPlan<T> {
    pub fn feasible(&self) -> bool {
        self.pair.is_some()
    }
}

/// Largest `k` checked in the interpolation sequence.
const THETA_TERMS: usize = 64;
const Q_SAMPLES: usize = 2000;

/// Validates `(p, m, d, β, a)` against the global-existence hypotheses and
/// the case range for `a`, computes `σ`, and searches for `(r, q, θ_k, ρ_k)`
/// with `1/r = 1/a + 1/q`, `0 < θ_k < 1`, `p ≤ ρ_k < ∞` and
/// `1 − (d/2β)(1/r − 1/a) − σθ_k(pk+m−1) = 0`.
pub fn feasible_exponents<T: Real>(p: T, m: T, dim: usize, beta: T, a: T) -> Result<ExponentPlan<T>> {
    let one = T::one();
    let two = T::lit(2.0);
    let dd = T::from_count(dim);
    if !(p > one) {
        return Err(Error::Precondition(format!("p > 1 violated (p = {p})")));
    }
    if !(beta > T::zero() && beta <= one) {
        return Err(Error::Precondition(format!("0 < beta <= 1 violated (beta = {beta})")));
    }
    let half = dd / (two * beta);
    let m_min = one + two * p * beta / dd;
    if m < m_min {
        return Err(Error::Precondition(format!("m >= 1 + 2*p*beta/d violated (m = {m}, bound = {m_min})")));
    }
    if p > half * (m - one) {
        return Err(Error::Precondition(format!("p <= d(m-1)/(2*beta) violated (p = {p}, bound = {})", half * (m - one))));
    }
    let conj = p / (p - one);
    let rel = (half - conj).abs() / conj;
    let case = if rel <= T::lit(1e-12) {
        ExponentCase::Equal
    } else if half > conj {
        ExponentCase::Above
    } else {
        ExponentCase::Below
    };
    let pos = (two - m).max(T::zero());
    let a_upper = if pos == T::zero() { T::infinity() } else { half * (m - one) / pos };
    let a_lower = match case {
        ExponentCase::Above | ExponentCase::Equal => half * (m - one),
        ExponentCase::Below => {
            let limit = dd * (p - one) / (two * beta * p);
            if !(pos < limit) {
                return Err(Error::Precondition(format!("(2-m)_+ < d(p-1)/(2*beta*p) violated ({pos} vs {limit})")));
            }
            conj * (m - one)
        }
    };
    let label = case.number();
    if !(a > a_lower) {
        let formula = if case == ExponentCase::Below { "p(m-1)/(p-1)" } else { "d(m-1)/(2*beta)" };
        return Err(Error::Precondition(format!("a <= {formula} = {a_lower} violates the case ({label}) lower bound (a = {a})")));
    }
    if !(a < a_upper) {
        return Err(Error::Precondition(format!("a >= d(m-1)/(2*beta)/(2-m)_+ = {a_upper} violates the case ({label}) upper bound (a = {a})")));
    }
    let sigma = (m - one).recip() - half / a;
    let pair = search_pair(p, m, a, half, sigma);
    Ok(ExponentPlan {
        p,
        m,
        a,
        dim,
        beta,
        case,
        a_lower,
        a_upper,
        sigma,
        pair,
        m_at_least_p: m >= p,
        dimension_condition: dd > two * beta * p / (p - one),
    })
}

/// Checks one candidate `q`; returns `(r, θ_0, ρ_0)` if every constraint holds for `k ≤ THETA_TERMS`.
fn check_q<T: Real>(p: T, m: T, a: T, half: T, sigma: T, q: T) -> Option<(T, T, T)> {
    let one = T::one();
    let slack = T::lit(1e-12);
    let inv_r = a.recip() + q.recip();
    if !(inv_r < one) {
        return None;
    }
    let big_theta = (one - half / q) / sigma;
    if !(big_theta > T::zero()) {
        return None;
    }
    let mut first = None;
    for k in 0..=THETA_TERMS {
        let n = p * T::from_count(k) + m - one;
        let theta = big_theta / n;
        if !(theta < one) {
            return None;
        }
        if !(sigma * (one + theta * n) < one) {
            return None;
        }
        let inv_rho = ((q * n).recip() - theta / a) / (one - theta);
        if !(inv_rho > T::zero() && inv_rho <= p.recip() * (one + slack)) {
            return None;
        }
        if k == 0 {
            first = Some((inv_r.recip(), theta, inv_rho.recip()));
        }
    }
    first
}

fn search_pair<T: Real>(p: T, m: T, a: T, half: T, sigma: T) -> Option<InterpolationPair<T>> {
    let one = T::one();
    if !(sigma > T::zero()) {
        return None;
    }
    let lo = one.max(half);
    let hi = half / sigma;
    if !(hi > lo) {
        return None;
    }
    let feasible: Vec<(T, (T, T, T))> = (1..Q_SAMPLES)
        .filter_map(|i| {
            let q = lo + (hi - lo) * T::from_count(i) / T::from_count(Q_SAMPLES);
            check_q(p, m, a, half, sigma, q).map(|v| (q, v))
        })
        .collect();
    // The middle of the feasible set keeps the most slack in every constraint.
    let &(q, (r, theta0, rho0)) = feasible.get(feasible.len() / 2)?;
    Some(InterpolationPair { r, q, theta0, rho0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_dimensional_cubic_scenario() {
        let plan = feasible_exponents(2.0f64, 3.0, 2, 1.0, 5.0).unwrap();
        assert_eq!(plan.case, ExponentCase::Below);
        assert_eq!(plan.a_lower, 4.0);
        assert!(plan.a_upper.is_infinite());
        assert_relative_eq!(plan.sigma, 0.3, epsilon = 1e-15);
        let pair = plan.pair.expect("feasible");
        assert_relative_eq!(pair.r.recip(), 0.2 + pair.q.recip(), epsilon = 1e-14);
        assert!(pair.r > 1.0 && pair.r <= 5.0 && pair.q >= 1.0);
        assert!(pair.theta0 > 0.0 && pair.theta0 < 1.0 && pair.rho0 >= 2.0 * (1.0 - 1e-9));
        // The defining identity at k = 0.
        let lhs = 1.0 - (1.0 / pair.r - 0.2) - plan.sigma * pair.theta0 * 2.0;
        assert!(lhs.abs() < 1e-12);
    }

    #[test]
    fn lower_bound_violation_names_the_bound() {
        let e = feasible_exponents(2.0f64, 3.0, 2, 1.0, 3.0).unwrap_err();
        assert!(e.to_string().contains("p(m-1)/(p-1) = 4"), "{e}");
    }

    #[test]
    fn upper_bound_infinite_for_m_at_least_two() {
        for m in [2.0f64, 2.5, 4.0] {
            let plan = feasible_exponents(1.5, m, 2, 0.5, 100.0).unwrap();
            assert!(plan.a_upper.is_infinite());
        }
        let plan = feasible_exponents(1.5f64, 1.8, 2, 0.5, 4.0).unwrap();
        assert_relative_eq!(plan.a_upper, 2.0 * 0.8 / 0.2, epsilon = 1e-12);
    }

    #[test]
    fn hypotheses_are_checked() {
        assert!(feasible_exponents(1.0f64, 3.0, 2, 1.0, 5.0).unwrap_err().to_string().contains("p > 1"));
        assert!(feasible_exponents(2.0f64, 2.0, 1, 1.0, 5.0).unwrap_err().to_string().contains("m >= 1 + 2*p*beta/d"));
        assert!(feasible_exponents(2.0f64, 3.0, 2, 1.2, 5.0).is_err());
    }

    #[test]
    fn case_classification() {
        // d/(2β) = 2 = p/(p−1) at p = 2, d = 2, β = 1/2.
        assert_eq!(feasible_exponents(2.0f64, 3.0, 2, 0.5, 5.0).unwrap().case, ExponentCase::Equal);
        assert_eq!(feasible_exponents(2.0f64, 3.0, 2, 0.25, 9.0).unwrap().case, ExponentCase::Above);
    }
}
