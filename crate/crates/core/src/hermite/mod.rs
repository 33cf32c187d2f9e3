//! Normalized Hermite functions, the total-degree tensor basis, tensor grids
//! and the forward/inverse spectral transforms.
//!
//! Hermite values are always carried in the `e^{-x²/2}`-scaled form
//! `h_k(x) = (√π 2^k k!)^{-1/2} H_k(x) e^{-x²/2}`, so no unscaled Hermite
//! polynomial is ever materialized.

mod grid;
mod multi_index;
mod spectral;

pub use grid::{FieldClass, FnField, Grid, GridKind, PhysicalField, PointFn};
pub use multi_index::{basis_size, level_offset, MultiIndex};
pub use spectral::{forward_transform, inverse_transform, SpectralField, SpectralPlan};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `π^{-1/4}`, the value of `h_0(0)`.
#[inline]
pub fn ground_state_peak<T: Real>() -> T {
    T::PI().powf(T::lit(-0.25))
}

/// The L²-normalized Hermite function `h_k(x)`.
///
/// Uses the three-term recurrence
/// `h_{k+1} = x √(2/(k+1)) h_k − √(k/(k+1)) h_{k−1}` started from
/// `h_0 = π^{-1/4} e^{-x²/2}`.
pub fn hermite_function<T: Real>(k: usize, x: T) -> T {
    let (cur, _) = hermite_pair(k, x);
    cur
}

/// Returns `(h_k(x), h_{k-1}(x))`, with `h_{-1} = 0`.
pub(crate) fn hermite_pair<T: Real>(k: usize, x: T) -> (T, T) {
    let two = T::lit(2.0);
    let mut prev = T::zero();
    let mut cur = ground_state_peak::<T>() * (-x * x / two).exp();
    for j in 0..k {
        let jf = T::from_count(j);
        let next = x * (two / (jf + T::one())).sqrt() * cur - (jf / (jf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Fills `out[k] = h_k(x)` for `k = 0..out.len()`.
pub fn hermite_functions<T: Real>(x: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    let two = T::lit(2.0);
    out[0] = ground_state_peak::<T>() * (-x * x / two).exp();
    if out.len() > 1 {
        out[1] = two.sqrt() * x * out[0];
    }
    for j in 1..out.len().saturating_sub(1) {
        let jf = T::from_count(j);
        out[j + 1] = x * (two / (jf + T::one())).sqrt() * out[j] - (jf / (jf + T::one())).sqrt() * out[j - 1];
    }
}

/// Tensor-product basis function `Φ_α(x) = Π_j h_{α_j}(x_j)`.
pub fn phi_alpha<T: Real>(alpha: &MultiIndex, x: &[T]) -> Result<T> {
    if alpha.dim() != x.len() {
        return Err(Error::DimensionMismatch { expected: alpha.dim(), got: x.len() });
    }
    Ok(alpha.components().iter().zip(x).map(|(&k, &xi)| hermite_function(k, xi)).fold(T::one(), |acc, v| acc * v))
}

/// Eigenvalue `2|α|₁ + d` of the Hermite operator on level `k = |α|₁`.
#[inline]
pub fn hermite_eigenvalue<T: Real>(level: usize, dim: usize) -> T {
    T::from_count(2 * level + dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Rodrigues form `(−1)^k e^{z²/2} d^k/dz^k e^{−z²}` evaluated through the
    /// explicit Hermite polynomial sum `H_k(z) = k! Σ_m (−1)^m (2z)^{k−2m} / (m!(k−2m)!)`,
    /// independent of the recurrence.
    fn rodrigues(k: usize, z: f64) -> f64 {
        let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        let hk: f64 = (0..=k / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * (2.0 * z).powi((k - 2 * m) as i32) / (fact(m) * fact(k - 2 * m))
            })
            .sum::<f64>()
            * fact(k);
        let norm = (std::f64::consts::PI.sqrt() * 2f64.powi(k as i32) * fact(k)).sqrt();
        hk * (-z * z / 2.0).exp() / norm
    }

    #[test]
    fn ground_state_at_origin() {
        assert_abs_diff_eq!(hermite_function(0, 0.0f64), std::f64::consts::PI.powf(-0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(hermite_function(0, 0.0f64), 0.7511255444649425, epsilon = 1e-15);
    }

    #[test]
    fn odd_functions_vanish_at_origin() {
        for k in [1, 3, 7, 41] {
            assert_abs_diff_eq!(hermite_function(k, 0.0f64), 0.0, epsilon = 1e-300);
        }
    }

    #[test]
    fn matches_rodrigues_formula() {
        for &(k, x) in &[(3usize, 1.2f64), (0, -0.7), (5, 2.5), (10, -1.1), (12, 3.0)] {
            let reference = rodrigues(k, x);
            assert_abs_diff_eq!(hermite_function(k, x), reference, epsilon = 1e-13);
        }
        // h_3(1.2) to 15 digits, from the closed form above.
        assert_abs_diff_eq!(hermite_function(3, 1.2f64), rodrigues(3, 1.2), epsilon = 1e-15);
    }

    #[test]
    fn no_overflow_on_supported_domain() {
        for k in [0, 50, 120, 200] {
            for x in [-30.0f64, -12.5, 0.3, 17.0, 30.0] {
                assert!(hermite_function(k, x).is_finite());
            }
        }
    }

    #[test]
    fn batch_matches_single() {
        let mut buf = vec![0.0f64; 30];
        hermite_functions(1.7, &mut buf);
        for (k, v) in buf.iter().enumerate() {
            assert_abs_diff_eq!(*v, hermite_function(k, 1.7), epsilon = 1e-15);
        }
    }

    #[test]
    fn phi_alpha_products() {
        let a = MultiIndex::new(vec![0, 0]).unwrap();
        assert_abs_diff_eq!(phi_alpha(&a, &[0.0f64, 0.0]).unwrap(), std::f64::consts::PI.powf(-0.5), epsilon = 1e-15);
        let b = MultiIndex::new(vec![1, 0]).unwrap();
        assert_eq!(phi_alpha(&b, &[0.0f64, 0.4]).unwrap(), 0.0);
        let c = MultiIndex::new(vec![2, 3]).unwrap();
        let v = phi_alpha(&c, &[0.3f64, -1.4]).unwrap();
        assert_abs_diff_eq!(v, hermite_function(2, 0.3) * hermite_function(3, -1.4), epsilon = 1e-16);
        assert!(matches!(phi_alpha(&c, &[0.1f64]), Err(Error::DimensionMismatch { .. })));
    }
}
