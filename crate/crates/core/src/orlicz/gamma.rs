use crate::error::{Error, Result};
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` for `x > 0` (Lanczos approximation, reflection below 1/2).
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma needs x > 0, got {x}")));
    }
    Ok(lanczos(x))
}

fn lanczos<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        let pi = T::PI();
        return pi / ((pi * x).sin() * lanczos(T::one() - x));
    }
    let x = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::TAU().sqrt() * t.powf(x + T::lit(0.5)) * (-t).exp() * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::PanelIntegrator;
    use approx::assert_relative_eq;

    /// `∫_0^∞ s^{x−1} e^{−s} ds`, with `s = u^{1/x}` on `[0, 1]` to remove the endpoint singularity.
    fn gamma_by_quadrature(x: f64) -> f64 {
        let q = PanelIntegrator::<f64>::new(16);
        let head = q.integrate(|u: f64| (-u.powf(1.0 / x)).exp() / x, 0.0, 1.0, &[], 4, 1e-15, 1e-14).value;
        let tail = q.integrate(|s: f64| s.powf(x - 1.0) * (-s).exp(), 1.0, 80.0, &[], 16, 1e-15, 1e-14).value;
        head + tail
    }

    #[test]
    fn integers_and_half_integers() {
        assert_relative_eq!(gamma(1.0f64).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(2.0f64).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(5.0f64).unwrap(), 24.0, max_relative = 1e-13);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert_relative_eq!(gamma(0.5f64).unwrap(), sqrt_pi, max_relative = 1e-13);
        assert_relative_eq!(gamma(2.5f64).unwrap(), 1.5 * 0.5 * sqrt_pi, max_relative = 1e-13);
    }

    #[test]
    fn matches_defining_integral() {
        for x in [0.5, 0.75, 1.3, 2.0, 3.7, 6.25] {
            assert_relative_eq!(gamma(x).unwrap(), gamma_by_quadrature(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(gamma(0.0f64).is_err());
        assert!(gamma(-1.5f64).is_err());
    }
}
