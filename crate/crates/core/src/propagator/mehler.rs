use std::cell::Cell;
use std::sync::Arc;

use rayon::prelude::*;

use super::FractionalOrder;
use crate::error::{Error, Result};
use crate::hermite::{phi_alpha, FieldClass, Grid, MultiIndex, PhysicalField, PointFn};
use crate::quadrature::PanelIntegrator;
use crate::scalar::Real;

/// Below this time the kernel is too close to a delta; use the spectral path.
pub const MEHLER_MIN_TIME: f64 = 1e-4;

const WINDOW_WIDTHS: f64 = 12.0;
const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-10;

fn check_time<T: Real>(t: T) -> Result<()> {
    if !t.is_finite() || t < T::zero() {
        return Err(Error::NegativeTime(t.to_f64_lossy()));
    }
    if t < T::lit(MEHLER_MIN_TIME) {
        return Err(Error::MehlerTimeTooSmall { t: t.to_f64_lossy(), min: MEHLER_MIN_TIME });
    }
    Ok(())
}

/// Per-axis kernel data at time `t`.
///
/// With `τ = tanh 2t` the one-dimensional kernel is
/// `K_t(x,y) = (2π sinh 2t)^{-1/2} e^{-τx²/2} e^{-(y − x/cosh 2t)²/(2τ)}`.
struct AxisKernel<T> {
    tau: T,
    prefactor: T,
    inv_cosh: T,
    half_window: T,
    initial_panels: usize,
}

impl<T: Real> AxisKernel<T> {
    fn new(t: T) -> Self {
        let two_t = T::lit(2.0) * t;
        let tau = two_t.tanh();
        Self {
            tau,
            prefactor: (T::TAU() * two_t.sinh()).sqrt().recip(),
            inv_cosh: two_t.cosh().recip(),
            half_window: T::lit(WINDOW_WIDTHS) * tau.sqrt(),
            initial_panels: if t < T::lit(0.05) { 8 } else { 4 },
        }
    }

    fn center(&self, x: T) -> T {
        x * self.inv_cosh
    }

    fn outer(&self, x: T) -> T {
        self.prefactor * (-self.tau * x * x / T::lit(2.0)).exp()
    }

    fn weight(&self, y: T, y0: T) -> T {
        let z = y - y0;
        (-z * z / (T::lit(2.0) * self.tau)).exp()
    }
}

fn integrate_axis<T: Real, F: FnMut(T) -> T>(q: &PanelIntegrator<T>, k: &AxisKernel<T>, y0: T, kinks: &[T], f: F) -> (T, bool) {
    let r = q.integrate(f, y0 - k.half_window, y0 + k.half_window, kinks, k.initial_panels, T::lit(ABS_TOL), T::lit(REL_TOL));
    (r.value, r.converged)
}

/// `(e^{-tH} f)(x)` by adaptive Gauss–Legendre quadrature against the Mehler kernel.
///
/// The integration window is `12√(tanh 2t)` kernel widths around the kernel
/// centre `x/cosh 2t`, split at the kinks reported by `f`.
pub fn mehler_point<T: Real>(f: &dyn PointFn<T>, t: T, x: &[T]) -> Result<T> {
    check_time(t)?;
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: x.len() });
    }
    let k = AxisKernel::new(t);
    let q = PanelIntegrator::<T>::new(16);
    match f.dim() {
        1 => {
            let y0 = k.center(x[0]);
            let (v, ok) = integrate_axis(&q, &k, y0, &f.kinks(0, &[]), |y| f.eval(&[y]) * k.weight(y, y0));
            if !ok {
                return Err(Error::QuadratureNotConverged { estimate: v.to_f64_lossy() });
            }
            Ok(k.outer(x[0]) * v)
        }
        2 => {
            let y0 = [k.center(x[0]), k.center(x[1])];
            let inner_ok = Cell::new(true);
            let (v, ok) = integrate_axis(&q, &k, y0[0], &f.kinks(0, &[]), |y1| {
                let (w, ok) = integrate_axis(&q, &k, y0[1], &f.kinks(1, &[y1]), |y2| f.eval(&[y1, y2]) * k.weight(y2, y0[1]));
                if !ok {
                    inner_ok.set(false);
                }
                w * k.weight(y1, y0[0])
            });
            if !(ok && inner_ok.get()) {
                return Err(Error::QuadratureNotConverged { estimate: v.to_f64_lossy() });
            }
            Ok(k.outer(x[0]) * k.outer(x[1]) * v)
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// `e^{-tH} f` sampled at every node of `grid` through the kernel path.
pub fn mehler_apply<T: Real>(f: &dyn PointFn<T>, t: T, beta: FractionalOrder<T>, grid: Arc<Grid<T>>) -> Result<PhysicalField<T>> {
    if beta.value() != T::one() {
        return Err(Error::UnsupportedPath(beta.value().to_f64_lossy()));
    }
    check_time(t)?;
    if grid.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: grid.dim() });
    }
    let d = grid.dim();
    let values = (0..grid.len()).into_par_iter().map(|i| mehler_point(f, t, &grid.point(i)[..d])).collect::<Result<Vec<T>>>()?;
    Ok(PhysicalField::new(grid, values)?.with_class(FieldClass::Unclassified))
}

/// `e^{-z} I₀(z)` for `z ≥ 0`.
pub(crate) fn bessel_i0_scaled<T: Real>(z: T) -> T {
    if z < T::lit(30.0) {
        // Power series; terms stay below e^{30} so nothing overflows.
        let q = z * z / T::lit(4.0);
        let mut term = T::one();
        let mut sum = T::one();
        let mut k = 1usize;
        while term > T::epsilon() * sum {
            term = term * q / T::from_count(k * k);
            sum += term;
            k += 1;
        }
        sum * (-z).exp()
    } else {
        // Hankel expansion, truncated at its smallest term.
        let mut term = T::one();
        let mut sum = T::one();
        for k in 1..60usize {
            let odd = T::from_count(2 * k - 1);
            let next = term * odd * odd / (T::lit(8.0) * T::from_count(k) * z);
            if next.abs() >= term.abs() || next.abs() < T::epsilon() * sum {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (T::TAU() * z).sqrt()
    }
}

/// `(e^{-tH} u)(x)` in two dimensions for radial `u(y) = profile(|y|)`
/// supported in `|y| ≤ support`, at `|x| = rho`.
///
/// The angular integral of the kernel is done in closed form, leaving
/// `(sinh 2t)^{-1} e^{-τρ²/2} ∫ profile(s) s e^{-(s − ρ₀)²/(2τ)} e^{-z}I₀(z) ds`
/// with `ρ₀ = ρ/cosh 2t` and `z = sρ₀/τ`.
pub fn mehler_radial_point<T: Real, F: Fn(T) -> T>(profile: F, support: T, kinks: &[T], t: T, rho: T) -> Result<T> {
    check_time(t)?;
    if !(rho >= T::zero()) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {}", rho.to_f64_lossy())));
    }
    let k = AxisKernel::new(t);
    let rho0 = k.center(rho);
    let lo = (rho0 - k.half_window).max(T::zero());
    let hi = (rho0 + k.half_window).min(support);
    let outer = (T::lit(2.0) * t).sinh().recip() * (-k.tau * rho * rho / T::lit(2.0)).exp();
    if lo >= hi {
        return Ok(T::zero());
    }
    let q = PanelIntegrator::<T>::new(16);
    let r = q.integrate(
        |s| profile(s) * s * k.weight(s, rho0) * bessel_i0_scaled(s * rho0 / k.tau),
        lo,
        hi,
        kinks,
        k.initial_panels,
        T::lit(ABS_TOL),
        T::lit(REL_TOL),
    );
    if !r.converged {
        return Err(Error::QuadratureNotConverged { estimate: r.error.to_f64_lossy() });
    }
    Ok(outer * r.value)
}

/// Checks the kernel normalisation through `e^{-tH}Φ₀ = e^{-td}Φ₀` at `t = 1/2`
/// in both dimensions; returns the largest relative error.
pub fn mehler_self_check<T: Real>() -> Result<T> {
    let t = T::lit(0.5);
    let mut worst = T::zero();
    for d in [1usize, 2] {
        let ground = MultiIndex::new(vec![0; d])?;
        let f = crate::hermite::FnField { dim: d, f: |x: &[T]| phi_alpha(&ground, x).unwrap_or(T::zero()) };
        for &(a, b) in &[(0.0, 0.0), (0.7, -0.3), (-1.9, 1.1)] {
            let x = [T::lit(a), T::lit(b)];
            let got = mehler_point(&f, t, &x[..d])?;
            let want = (-t * T::from_count(d)).exp() * phi_alpha(&ground, &x[..d])?;
            worst = worst.max(((got - want) / want).abs());
        }
    }
    if worst > T::lit(1e-8) {
        return Err(Error::Precondition(format!("Mehler kernel normalisation self-check failed (relative error {worst})")));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{FnField, SpectralField};
    use crate::propagator::apply_semigroup;
    use approx::assert_abs_diff_eq;

    #[test]
    fn self_check_passes() {
        assert!(mehler_self_check::<f64>().unwrap() < 1e-10);
    }

    #[test]
    fn ground_state_half_time() {
        let f = FnField { dim: 1, f: |x: &[f64]| crate::hermite::hermite_function(0, x[0]) };
        for x in [-2.0, 0.0, 0.4, 3.0] {
            let v = mehler_point(&f, 0.5, &[x]).unwrap();
            assert_abs_diff_eq!(v, (-0.5f64).exp() * crate::hermite::hermite_function(0, x), epsilon = 1e-12);
        }
    }

    #[test]
    fn positivity_preserved() {
        let f = FnField { dim: 1, f: |x: &[f64]| if x[0].abs() < 1.0 { 1.0 } else { 0.0 } };
        let f = KinkedBox(f);
        for x in [-3.0, -1.0, 0.0, 2.5] {
            assert!(mehler_point(&f, 0.02, &[x]).unwrap() >= 0.0);
        }
    }

    struct KinkedBox<F>(FnField<F>);

    impl<F: Fn(&[f64]) -> f64 + Sync> PointFn<f64> for KinkedBox<F> {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64]) -> f64 {
            (self.0.f)(x)
        }
        fn kinks(&self, _axis: usize, _fixed: &[f64]) -> Vec<f64> {
            vec![-1.0, 1.0]
        }
    }

    #[test]
    fn agrees_with_spectral_path_in_two_dimensions() {
        let mut c = SpectralField::<f64>::zeros(2, 4).unwrap();
        c.set(&MultiIndex::new(vec![1, 0]).unwrap(), 0.8).unwrap();
        c.set(&MultiIndex::new(vec![2, 2]).unwrap(), -0.3).unwrap();
        c.set(&MultiIndex::new(vec![0, 0]).unwrap(), 0.5).unwrap();
        let t = 0.3;
        let spectral = apply_semigroup(&c, t, FractionalOrder::one()).unwrap();
        for x in [[0.2, -0.4], [1.5, 0.9]] {
            let k = mehler_point(&c, t, &x).unwrap();
            assert_abs_diff_eq!(k, spectral.eval(&x), epsilon = 1e-10);
        }
    }

    #[test]
    fn scaled_bessel_matches_series_and_asymptotics() {
        // I₀(1) = 1.2660658777520082, I₀(40)e^{-40} = 0.06315360...
        assert_abs_diff_eq!(bessel_i0_scaled(1.0f64) * 1.0f64.exp(), 1.2660658777520082, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_i0_scaled(0.0f64), 1.0, epsilon = 0.0);
        let direct = |z: f64| {
            let q = PanelIntegrator::<f64>::new(16);
            q.integrate(|th| (z * (th.cos() - 1.0)).exp(), 0.0, std::f64::consts::PI, &[], 8, 1e-16, 1e-14).value / std::f64::consts::PI
        };
        for z in [5.0, 29.9, 30.1, 80.0, 1e4] {
            assert_abs_diff_eq!(bessel_i0_scaled(z), direct(z), epsilon = 1e-13);
        }
    }

    #[test]
    fn radial_path_reproduces_ground_state() {
        let pi = std::f64::consts::PI;
        let profile = |s: f64| (-s * s / 2.0).exp() / pi.sqrt();
        for t in [0.01, 0.3, 1.5] {
            for rho in [0.0, 0.4, 2.0] {
                let v = mehler_radial_point(profile, 40.0, &[], t, rho).unwrap();
                assert_abs_diff_eq!(v, (-2.0 * t).exp() * profile(rho), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn radial_path_agrees_with_nested_quadrature() {
        let profile = |s: f64| if s < 1.0 { (1.0 - s * s).powi(2) } else { 0.0 };
        let f = Disc(profile);
        let t = 0.2;
        for x in [[0.3f64, 0.0], [0.0, 0.9]] {
            let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let radial = mehler_radial_point(profile, 1.0, &[], t, rho).unwrap();
            let nested = mehler_point(&f, t, &x).unwrap();
            assert_abs_diff_eq!(radial, nested, epsilon = 1e-9);
        }
    }

    struct Disc<F>(F);

    impl<F: Fn(f64) -> f64 + Sync> PointFn<f64> for Disc<F> {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, y: &[f64]) -> f64 {
            (self.0)((y[0] * y[0] + y[1] * y[1]).sqrt())
        }
        fn kinks(&self, axis: usize, fixed: &[f64]) -> Vec<f64> {
            let h = if axis == 0 { 1.0 } else { (1.0 - fixed[0] * fixed[0]).max(0.0).sqrt() };
            vec![-h, h]
        }
    }

    #[test]
    fn refuses_small_times_and_fractional_orders() {
        let f = FnField { dim: 1, f: |_: &[f64]| 1.0 };
        assert!(matches!(mehler_point(&f, 5e-5, &[0.0]), Err(Error::MehlerTimeTooSmall { .. })));
        assert!(matches!(mehler_point(&f, 0.0, &[0.0]), Err(Error::MehlerTimeTooSmall { .. })));
        assert!(matches!(mehler_point(&f, -1.0, &[0.0]), Err(Error::NegativeTime(_))));
        let grid = Arc::new(Grid::uniform(1, 2.0, 5).unwrap());
        assert!(matches!(mehler_apply(&f, 0.5, FractionalOrder::new(0.5).unwrap(), grid), Err(Error::UnsupportedPath(_))));
    }
}
