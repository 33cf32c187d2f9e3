//! The linear semigroup `e^{-tH^β}`: the spectral path for any `β > 0`, the
//! Mehler kernel path for `β = 1`, and the smoothing-ratio evaluators.

mod mehler;
mod smoothing;

pub use mehler::{mehler_apply, mehler_point, mehler_radial_point, mehler_self_check, MEHLER_MIN_TIME};
pub use smoothing::{sigma_beta, smoothing_admissible, smoothing_ratio_sweep, SmoothingReport, SmoothingRow};

use crate::error::{Error, Result};
use crate::hermite::{hermite_eigenvalue, phi_alpha, MultiIndex, SpectralField};
use crate::scalar::Real;

/// Power `β > 0` of the Hermite operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder<T> {
    beta: T,
}

impl<T: Real> FractionalOrder<T> {
    pub fn new(beta: T) -> Result<Self> {
        if !(beta.is_finite() && beta > T::zero()) {
            return Err(Error::InvalidParameter(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn one() -> Self {
        Self { beta: T::one() }
    }

    pub fn value(&self) -> T {
        self.beta
    }

    /// The nonlinear theory (and exp L^p smoothing for every exponent pair) needs `0 < β ≤ 1`.
    pub fn require_at_most_one(&self) -> Result<()> {
        if self.beta > T::one() {
            return Err(Error::InvalidParameter(format!("beta must satisfy 0 < beta <= 1, got {}", self.beta)));
        }
        Ok(())
    }

    /// `(2k + d)^β`.
    pub fn level_rate(&self, level: usize, dim: usize) -> T {
        hermite_eigenvalue::<T>(level, dim).powf(self.beta)
    }
}

/// Multipliers `e^{-t(2k+d)^β}` for levels `k = 0..=N`.
pub fn semigroup_multipliers<T: Real>(dim: usize, max_degree: usize, t: T, beta: FractionalOrder<T>) -> Result<Vec<T>> {
    if t < T::zero() || !t.is_finite() {
        return Err(Error::NegativeTime(t.to_f64_lossy()));
    }
    Ok((0..=max_degree).map(|k| (-t * beta.level_rate(k, dim)).exp()).collect())
}

/// Scales `c_α` by `e^{-t(2|α|₁+d)^β}`.
pub fn apply_semigroup<T: Real>(c: &SpectralField<T>, t: T, beta: FractionalOrder<T>) -> Result<SpectralField<T>> {
    let mult = semigroup_multipliers(c.dim(), c.max_degree(), t, beta)?;
    if t == T::zero() {
        return Ok(c.clone());
    }
    let mut out = c.clone();
    scale_by_level(&mut out, &mult);
    Ok(out)
}

/// Multiplies each coefficient by `mult[level]` in place.
pub(crate) fn scale_by_level<T: Real>(c: &mut SpectralField<T>, mult: &[T]) {
    let dim = c.dim();
    let coeffs = c.coeffs_mut();
    match dim {
        1 => coeffs.iter_mut().zip(mult).for_each(|(v, &m)| *v *= m),
        _ => {
            let mut pos = 0;
            for (k, &m) in mult.iter().enumerate() {
                for v in &mut coeffs[pos..pos + k + 1] {
                    *v *= m;
                }
                pos += k + 1;
            }
        }
    }
}

/// Maximum relative residual of `HΦ_α = (2|α|₁+d)Φ_α` with `−Δ` replaced by
/// centered second differences of step `h`, sampled on `points` equispaced
/// nodes per axis in `[−half_width, half_width]`.
pub fn eigenrelation_error<T: Real>(alpha: &MultiIndex, h: T, half_width: T, points: usize) -> Result<T> {
    if points < 2 || !(h > T::zero()) {
        return Err(Error::InvalidParameter("eigenrelation check needs h > 0 and at least 2 points".into()));
    }
    let d = alpha.dim();
    let lam = hermite_eigenvalue::<T>(alpha.degree(), d);
    let step = T::lit(2.0) * half_width / T::from_count(points - 1);
    let coord = |i: usize| -half_width + step * T::from_count(i);
    let total = points.pow(d as u32);
    let mut worst = T::zero();
    let mut scale = T::zero();
    for idx in 0..total {
        let x: Vec<T> = match d {
            1 => vec![coord(idx)],
            _ => vec![coord(idx / points), coord(idx % points)],
        };
        let center = phi_alpha(alpha, &x)?;
        let mut lap = T::zero();
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            lap += (phi_alpha(alpha, &xp)? - T::lit(2.0) * center + phi_alpha(alpha, &xm)?) / (h * h);
        }
        let r2: T = x.iter().map(|&v| v * v).sum();
        let hv = -lap + r2 * center;
        worst = worst.max((hv - lam * center).abs());
        scale = scale.max((lam * center).abs());
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn random_field(dim: usize, n: usize, seed: u64) -> SpectralField<f64> {
        let len = crate::hermite::basis_size(dim, n).unwrap();
        let mut s = seed;
        let coeffs = (0..len)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        SpectralField::from_coeffs(dim, n, coeffs).unwrap()
    }

    #[test]
    fn ground_state_decays_at_unit_rate() {
        let c = SpectralField::<f64>::basis_function(&MultiIndex::new(vec![0]).unwrap(), 4).unwrap();
        let out = apply_semigroup(&c, 0.7, FractionalOrder::one()).unwrap();
        assert_abs_diff_eq!(out.coeffs()[0], (-0.7f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn fractional_level_three_in_two_dimensions() {
        let alpha = MultiIndex::new(vec![1, 2]).unwrap();
        let c = SpectralField::<f64>::basis_function(&alpha, 5).unwrap();
        let out = apply_semigroup(&c, 0.1, FractionalOrder::new(0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(out.get(&alpha), (-0.1 * 8f64.sqrt()).exp(), epsilon = 1e-15);
    }

    #[test]
    fn time_zero_is_identity_and_negative_time_fails() {
        let c = random_field(2, 6, 3);
        assert_eq!(apply_semigroup(&c, 0.0, FractionalOrder::new(0.3).unwrap()).unwrap(), c);
        assert!(matches!(apply_semigroup(&c, -1e-3, FractionalOrder::one()), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn rejects_nonpositive_beta() {
        assert!(FractionalOrder::new(0.0f64).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(1.5f64).unwrap().require_at_most_one().is_err());
    }

    #[test]
    fn eigenrelation_by_finite_differences() {
        for alpha in [vec![0], vec![3], vec![1, 2], vec![4, 0]] {
            let a = MultiIndex::new(alpha).unwrap();
            let pts = if a.dim() == 1 { 161 } else { 41 };
            let err = eigenrelation_error(&a, 2e-3, 6.0, pts).unwrap();
            assert!(err < 1e-4, "{a:?}: {err}");
        }
    }

    proptest! {
        #[test]
        fn semigroup_law(s in 0.0f64..2.0, t in 0.0f64..2.0, beta in 0.1f64..1.5, seed in 0u64..1000) {
            let c = random_field(2, 8, seed);
            let b = FractionalOrder::new(beta).unwrap();
            let two_step = apply_semigroup(&apply_semigroup(&c, s, b).unwrap(), t, b).unwrap();
            let one_step = apply_semigroup(&c, s + t, b).unwrap();
            for (x, y) in two_step.coeffs().iter().zip(one_step.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-14 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn multipliers_are_contractive(t in 0.0f64..10.0, beta in 0.05f64..2.0) {
            let m = semigroup_multipliers(2, 30, t, FractionalOrder::new(beta).unwrap()).unwrap();
            prop_assert!(m.iter().all(|&v| v > 0.0 || t > 0.0) && m.iter().all(|&v| (0.0..=1.0).contains(&v)));
            prop_assert!(m.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
