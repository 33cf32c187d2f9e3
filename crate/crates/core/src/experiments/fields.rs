use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hermite::{basis_size, hermite_function, Grid, MultiIndex, PhysicalField, SpectralField, SpectralPlan};

/// A named scalar profile on the line.
#[derive(Debug, Clone, Copy)]
pub struct NamedProfile {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
}

/// Smooth bump `exp(1 − 1/(1 − x²/4))` on `|x| < 2`, equal to 1 at the origin.
pub fn bump(r2: f64) -> f64 {
    let s = r2 / 4.0;
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

/// Height-`c` indicator of `[−m/2, m/2]` smoothed by `tanh` over width `delta`.
pub fn smoothed_indicator(x: f64, c: f64, m: f64, delta: f64) -> f64 {
    c * 0.5 * (((m / 2.0 - x.abs()) / delta).tanh() + 1.0)
}

/// The eight one-dimensional fields the norm checks run over.
pub fn orlicz_family() -> [NamedProfile; 8] {
    [
        NamedProfile { name: "ground", f: |x| hermite_function(0, x) },
        NamedProfile { name: "ground_plus_second", f: |x| hermite_function(0, x) + hermite_function(2, x) },
        NamedProfile { name: "smoothed_indicator", f: |x| smoothed_indicator(x, 1.0, 1.0, 0.05) },
        NamedProfile { name: "narrow_gaussian", f: |x| 2.0 * (-4.0 * x * x).exp() },
        NamedProfile { name: "wide_gaussian", f: |x| 0.5 * (-x * x / 8.0).exp() },
        NamedProfile { name: "sech", f: |x| 1.0 / x.cosh() },
        NamedProfile { name: "algebraic", f: |x| (1.0 + x * x).powi(-2) },
        NamedProfile { name: "bump", f: |x| bump(x * x) },
    ]
}

/// Half-width of the uniform grid the norm family is sampled on.
pub const ORLICZ_HALF_WIDTH: f64 = 14.0;

/// Uniform grid on `[−14, 14]` with `points` nodes.
pub fn orlicz_grid(points: usize) -> Result<Arc<Grid<f64>>> {
    Ok(Arc::new(Grid::uniform(1, ORLICZ_HALF_WIDTH, points)?))
}

pub fn sample_profile(profile: &NamedProfile, grid: Arc<Grid<f64>>) -> Result<PhysicalField<f64>> {
    PhysicalField::sample(grid, |x| (profile.f)(x[0]))
}

/// Degree-`n` projection of `f` through a Gauss–Hermite grid of order `2n + 4`.
pub fn project<F: Fn(&[f64]) -> f64 + Sync>(f: F, dim: usize, n: usize) -> Result<SpectralField<f64>> {
    let grid = Arc::new(Grid::gauss_hermite(dim, 2 * n + 4)?);
    let plan = SpectralPlan::new(grid.clone(), n);
    plan.forward(&PhysicalField::sample(grid, f)?, n)
}

/// Coefficients drawn uniformly from `[−1, 1]` for every `|α| ≤ degree`,
/// then normalised to unit `ℓ²` norm.
pub fn random_bandlimited(dim: usize, degree: usize, rng: &mut ChaCha8Rng) -> Result<SpectralField<f64>> {
    let len = basis_size(dim, degree)?;
    let coeffs: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let field = SpectralField::from_coeffs(dim, degree, coeffs)?;
    let norm = field.l2_norm();
    Ok(field.scaled(1.0 / norm))
}

/// Eight seeded random bandlimited fields of degree `degree`.
pub fn random_family(dim: usize, degree: usize, seed: u64) -> Result<Vec<(String, SpectralField<f64>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..8).map(|i| Ok((format!("random_{i}"), random_bandlimited(dim, degree, &mut rng)?))).collect()
}

/// Nonnegative Gaussian mixture with three seeded components.
fn gaussian_mixture(dim: usize, rng: &mut ChaCha8Rng) -> impl Fn(&[f64]) -> f64 + Sync {
    let parts: Vec<(f64, [f64; 2], f64)> = (0..3)
        .map(|_| {
            let weight = rng.gen_range(0.2..=1.0);
            let center = [rng.gen_range(-1.5..=1.5), rng.gen_range(-1.5..=1.5)];
            let width: f64 = rng.gen_range(0.6..=1.4);
            (weight, center, width)
        })
        .collect();
    move |x: &[f64]| {
        parts
            .iter()
            .map(|(w, c, s)| {
                let r2: f64 = x.iter().zip(c.iter()).take(dim).map(|(a, b)| (a - b) * (a - b)).sum();
                w * (-r2 / (2.0 * s * s)).exp()
            })
            .sum()
    }
}

/// `Φ₀` followed by seven seeded nonnegative Gaussian mixtures, each projected
/// onto degree `n`.
pub fn smoothing_family(dim: usize, n: usize, seed: u64) -> Result<Vec<(String, SpectralField<f64>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![("ground".to_string(), SpectralField::basis_function(&MultiIndex::new(vec![0; dim])?, n)?)];
    for i in 0..7 {
        let g = gaussian_mixture(dim, &mut rng);
        out.push((format!("mixture_{i}"), project(g, dim, n)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_seeded() {
        let a = random_family(1, 10, 7).unwrap();
        let b = random_family(1, 10, 7).unwrap();
        let c = random_family(1, 10, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a[3].1.l2_norm() - 1.0).abs() < 1e-14);
        assert_eq!(smoothing_family(2, 8, 1).unwrap(), smoothing_family(2, 8, 1).unwrap());
    }

    #[test]
    fn bump_is_compactly_supported() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(4.0), 0.0);
        assert!(bump(3.99) > 0.0 && bump(3.99) < 1e-100);
    }

    #[test]
    fn projection_reproduces_ground_state() {
        let c = project(|x| hermite_function(0, x[0]) * hermite_function(0, x[1]), 2, 6).unwrap();
        assert!((c.coeffs()[0] - 1.0).abs() < 1e-13);
        assert!(c.coeffs()[1..].iter().all(|v| v.abs() < 1e-13));
    }
}
