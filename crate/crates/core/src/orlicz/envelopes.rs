use crate::error::{Error, Result};
use crate::quadrature::PanelIntegrator;
use crate::scalar::Real;

/// `∫_0^∞` of an envelope, split at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeIntegral<T> {
    pub value: T,
    pub head: T,
    pub tail: T,
    /// Relative change between a coarse and a fine quadrature.
    pub refinement_change: T,
    pub converged: bool,
}

/// `u · (log(1 + u))^{-e}`.
fn log_damped<T: Real>(u: T, e: T) -> T {
    u * u.ln_1p().powf(-e)
}

struct Shape<T> {
    p: T,
    /// Exponent of the small-time branch `t^{-γ} + 1`.
    gamma: T,
    /// `t^{-big}` inside the large-time branch.
    big: T,
    /// Power on the logarithm of the large-time branch.
    log_power: T,
    /// Decay rate of the large-time branch.
    tail_rate: T,
}

impl<T: Real> Shape<T> {
    fn eval(&self, t: T) -> T {
        let small = t.powf(-self.gamma) + T::one();
        let large = log_damped(t.powf(-self.big), self.log_power);
        T::LN_2().powf(-self.p.recip()) * small.min(large)
    }

    /// `κ(1/s)` without forming `1/s`.
    fn eval_reciprocal(&self, s: T) -> T {
        let small = s.powf(self.gamma) + T::one();
        let large = log_damped(s.powf(self.big), self.log_power);
        T::LN_2().powf(-self.p.recip()) * small.min(large)
    }

    fn integral(&self) -> EnvelopeIntegral<T> {
        let (fine_head, fine_tail, ok) = self.integrate(16, T::lit(1e-12));
        let (coarse_head, coarse_tail, _) = self.integrate(8, T::lit(1e-5));
        let value = fine_head + fine_tail;
        let coarse = coarse_head + coarse_tail;
        EnvelopeIntegral {
            value,
            head: fine_head,
            tail: fine_tail,
            refinement_change: ((coarse - value) / value).abs(),
            converged: ok && value.is_finite(),
        }
    }

    fn integrate(&self, points: usize, rel_tol: T) -> (T, T, bool) {
        let q = PanelIntegrator::<T>::new(points);
        let one = T::one();
        // t = s^c on [0, 1] cancels the t^{-γ} singularity.
        let c = (one - self.gamma).recip();
        let head = q.integrate(
            |s: T| if s == T::zero() { c * T::LN_2().powf(-self.p.recip()) } else { self.eval(s.powf(c)) * c * s.powf(c - one) },
            T::zero(),
            one,
            &[],
            4,
            T::zero(),
            rel_tol,
        );
        // t = 1/s then s = v^b on [1, ∞) cancels the s^{rate − 2} endpoint behaviour.
        let b = (self.tail_rate - one).recip();
        let tail = q.integrate(
            |v: T| {
                if v == T::zero() {
                    return T::zero();
                }
                let s = v.powf(b);
                self.eval_reciprocal(s) / (s * s) * b * v.powf(b - one)
            },
            T::zero(),
            one,
            &[],
            4,
            T::zero(),
            rel_tol,
        );
        (head.value, tail.value, head.converged && tail.converged)
    }
}

fn kappa_shape<T: Real>(p: T, r: T, d: usize, beta: T) -> Result<Shape<T>> {
    let one = T::one();
    let dd = T::from_count(d);
    if !(p > one) {
        return Err(Error::Precondition(format!("p > 1 violated (p = {p})")));
    }
    if !(beta > T::zero() && beta <= one) {
        return Err(Error::Precondition(format!("0 < beta <= 1 violated (beta = {beta})")));
    }
    if !(dd > T::lit(2.0) * beta * p / (p - one)) {
        return Err(Error::Precondition(format!("d > 2*beta*p/(p-1) violated (d = {d}, bound = {})", T::lit(2.0) * beta * p / (p - one))));
    }
    let half = dd / (T::lit(2.0) * beta);
    if !(r > half) {
        return Err(Error::Precondition(format!("r > d/(2*beta) violated (r = {r}, d/(2*beta) = {half})")));
    }
    Ok(Shape { p, gamma: half / r, big: half, log_power: p.recip(), tail_rate: half * (one - p.recip()) })
}

fn zeta_shape<T: Real>(p: T, r: T, d: usize, beta: T) -> Result<Shape<T>> {
    let one = T::one();
    if !(p > one) {
        return Err(Error::Precondition(format!("p > 1 violated (p = {p})")));
    }
    if !(beta > T::zero() && beta <= one) {
        return Err(Error::Precondition(format!("0 < beta <= 1 violated (beta = {beta})")));
    }
    let half = T::from_count(d) / (T::lit(2.0) * beta);
    let conj = p / (p - one);
    if (half - conj).abs() > T::lit(1e-12) * conj {
        return Err(Error::Precondition(format!("d/(2*beta) = p/(p-1) violated ({half} vs {conj})")));
    }
    if !(r > half) {
        return Err(Error::Precondition(format!("r > d/(2*beta) violated (r = {r}, d/(2*beta) = {half})")));
    }
    let two_p = T::lit(2.0) * p;
    Ok(Shape { p, gamma: half / r, big: conj, log_power: two_p.recip(), tail_rate: conj * (one - two_p.recip()) })
}

/// `κ(t) = (log 2)^{-1/p} min{t^{-d/(2βr)} + 1, t^{-d/(2β)} (log(t^{-d/(2β)} + 1))^{-1/p}}`
/// with the free constant set to 1; needs `p > 1`, `d > 2βp/(p−1)`, `r > d/(2β)`.
pub fn kappa_envelope<T: Real>(t: T, p: T, r: T, d: usize, beta: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("envelope needs t > 0, got {t}")));
    }
    Ok(kappa_shape(p, r, d, beta)?.eval(t))
}

/// `ζ(t) = (log 2)^{-1/p} min{t^{-d/(2βr)} + 1, t^{-p/(p−1)} (log(t^{-p/(p−1)} + 1))^{-1/(2p)}}`
/// with the free constant set to 1; needs `d/(2β) = p/(p−1)` and `r > d/(2β)`.
pub fn zeta_envelope<T: Real>(t: T, p: T, r: T, d: usize, beta: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter(format!("envelope needs t > 0, got {t}")));
    }
    Ok(zeta_shape(p, r, d, beta)?.eval(t))
}

pub fn kappa_integral<T: Real>(p: T, r: T, d: usize, beta: T) -> Result<EnvelopeIntegral<T>> {
    Ok(kappa_shape(p, r, d, beta)?.integral())
}

pub fn zeta_integral<T: Real>(p: T, r: T, d: usize, beta: T) -> Result<EnvelopeIntegral<T>> {
    Ok(zeta_shape(p, r, d, beta)?.integral())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Composite midpoint rule in `log t` on `[1e-14, 1e14]` plus the
    /// closed-form power-law pieces outside it; a crude but independent
    /// estimate of the same integral.
    fn brute_force(f: impl Fn(f64) -> f64, p: f64, gamma: f64, rate: f64) -> f64 {
        let (a, b, n) = (-14.0f64, 14.0f64, 400_000);
        let h = (b - a) / n as f64;
        let body: f64 = (0..n)
            .map(|i| {
                let lt = a + (i as f64 + 0.5) * h;
                let t = 10f64.powf(lt);
                f(t) * t * std::f64::consts::LN_10 * h
            })
            .sum();
        let c = 2f64.ln().powf(-1.0 / p);
        let (lo, hi) = (1e-14f64, 1e14f64);
        body + c * (lo.powf(1.0 - gamma) / (1.0 - gamma) + lo) + c * hi.powf(1.0 - rate) / (rate - 1.0)
    }

    #[test]
    fn kappa_regime_integral() {
        let r = kappa_integral(2.0f64, 3.0, 5, 1.0).unwrap();
        assert!(r.converged && r.value.is_finite());
        assert!(r.refinement_change < 1e-2);
        let bf = brute_force(|t| kappa_envelope(t, 2.0, 3.0, 5, 1.0).unwrap(), 2.0, 2.5 / 3.0, 1.25);
        assert_relative_eq!(r.value, bf, max_relative = 1e-4);
    }

    #[test]
    fn zeta_regime_integral() {
        let r = zeta_integral(2.0f64, 3.0, 4, 1.0).unwrap();
        assert!(r.converged && r.value.is_finite());
        assert!(r.refinement_change < 1e-2);
        let bf = brute_force(|t| zeta_envelope(t, 2.0, 3.0, 4, 1.0).unwrap(), 2.0, 2.0 / 3.0, 1.5);
        assert_relative_eq!(r.value, bf, max_relative = 1e-4);
    }

    #[test]
    fn large_time_decay() {
        let a = kappa_envelope(1e3, 2.0, 3.0, 5, 1.0).unwrap();
        let b = kappa_envelope(1e6, 2.0, 3.0, 5, 1.0).unwrap();
        assert!(b < a && b < 1e-6);
    }

    #[test]
    fn regime_violations_name_the_inequality() {
        let e = kappa_integral(2.0, 3.0, 4, 1.0).unwrap_err();
        assert!(e.to_string().contains("d > 2*beta*p/(p-1)"));
        let e = kappa_integral(2.0, 2.0, 5, 1.0).unwrap_err();
        assert!(e.to_string().contains("r > d/(2*beta)"));
        let e = zeta_integral(2.0, 3.0, 5, 1.0).unwrap_err();
        assert!(e.to_string().contains("p/(p-1)"));
        assert!(kappa_envelope(0.0, 2.0, 3.0, 5, 1.0).is_err());
    }
}
