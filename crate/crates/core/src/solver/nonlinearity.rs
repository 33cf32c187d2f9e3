use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest exponent argument passed to `exp`; larger arguments are clamped
/// and the evaluation is flagged as saturated.
pub const EXP_CLAMP: f64 = 700.0;

/// Pointwise nonlinearity `g` (before sign and scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    /// `u|u|^{m−1}`.
    PurePower { m: T },
    /// `u e^{λ|u|^p}`.
    ExpFull { p: T, lambda: T },
    /// `u|u|^{m−1} e^{λ|u|^q}`.
    MixedPower { m: T, q: T, lambda: T },
    /// `e^{|u|^q} − 1`.
    ExpM1M { q: T },
    /// `e^u − 1 − u`.
    ExpTaylor,
}

/// Growth structure of the local Lipschitz estimate
/// `|f(u) − f(v)| ≤ C|u − v|(w(u) + w(v))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthClass<T> {
    /// `w(s) = e^{λ|s|^p}`.
    Nflw { p: T, lambda: T },
    /// `w(s) = |s|^{m−1} e^{λ|s|^p}`.
    Nfgw { m: T, p: T, lambda: T },
}

impl<T: Real> GrowthClass<T> {
    pub fn weight(&self, s: T) -> T {
        match *self {
            Self::Nflw { p, lambda } => (lambda * s.abs().powf(p)).exp(),
            Self::Nfgw { m, p, lambda } => s.abs().powf(m - T::one()) * (lambda * s.abs().powf(p)).exp(),
        }
    }

    /// Whether the small-data global theory applies: `m ≥ 1 + 2pβ/d` and `m ≥ p`.
    pub fn admits_global_theory(&self, dim: usize, beta: T) -> bool {
        match *self {
            Self::Nflw { .. } => false,
            Self::Nfgw { m, p, .. } => p > T::one() && m >= p && m >= T::one() + T::lit(2.0) * p * beta / T::from_count(dim),
        }
    }
}

/// `f(u) = sign · scale · g(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearitySpec<T> {
    family: Family<T>,
    sign: T,
    scale: T,
    class: GrowthClass<T>,
}

/// Value of a pointwise evaluation and whether an exponent was clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    pub saturated: bool,
}

fn clamped_exp<T: Real>(arg: T, saturated: &mut bool) -> T {
    let cap = T::lit(EXP_CLAMP);
    if arg > cap {
        *saturated = true;
        cap.exp()
    } else {
        arg.exp()
    }
}

impl<T: Real> NonlinearitySpec<T> {
    pub fn new(family: Family<T>, sign: T, scale: T) -> Result<Self> {
        let one = T::one();
        if sign != one && sign != -one {
            return Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
        }
        if !(scale >= T::zero() && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be finite and >= 0, got {scale}")));
        }
        let bad = |what: &str| Err(Error::InvalidParameter(format!("nonlinearity parameter {what}")));
        let class = match family {
            Family::PurePower { m } => {
                if !(m >= one) {
                    return bad("m >= 1 violated");
                }
                GrowthClass::Nfgw { m, p: one, lambda: T::zero() }
            }
            Family::ExpFull { p, lambda } => {
                if !(p >= one) || !(lambda > T::zero()) {
                    return bad("p >= 1 and lambda > 0 required");
                }
                GrowthClass::Nflw { p, lambda }
            }
            Family::MixedPower { m, q, lambda } => {
                if !(m >= one) || !(q >= one) || !(lambda >= T::zero()) {
                    return bad("m >= 1, q >= 1 and lambda >= 0 required");
                }
                GrowthClass::Nfgw { m, p: q, lambda }
            }
            Family::ExpM1M { q } => {
                if !(q >= one) {
                    return bad("q >= 1 violated");
                }
                GrowthClass::Nfgw { m: q, p: q, lambda: one }
            }
            Family::ExpTaylor => GrowthClass::Nfgw { m: T::lit(2.0), p: one, lambda: one },
        };
        let spec = Self { family, sign, scale, class };
        if spec.eval(T::zero()).value != T::zero() {
            return Err(Error::InvalidParameter("nonlinearity must vanish at 0".into()));
        }
        Ok(spec)
    }

    /// `f(u) = εu`.
    pub fn linear(epsilon: T) -> Result<Self> {
        let sign = if epsilon < T::zero() { -T::one() } else { T::one() };
        Self::new(Family::PurePower { m: T::one() }, sign, epsilon.abs())
    }

    pub fn zero() -> Self {
        Self::linear(T::zero()).expect("zero nonlinearity is valid")
    }

    pub fn family(&self) -> Family<T> {
        self.family
    }

    pub fn sign(&self) -> T {
        self.sign
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn class(&self) -> GrowthClass<T> {
        self.class
    }

    pub fn is_zero(&self) -> bool {
        self.scale == T::zero()
    }

    /// Whether `f` is linear (`f(u) = εu`).
    pub fn is_linear(&self) -> bool {
        matches!(self.family, Family::PurePower { m } if m == T::one())
    }

    pub fn eval(&self, v: T) -> Evaluation<T> {
        let mut saturated = false;
        let a = v.abs();
        let one = T::one();
        let g = match self.family {
            Family::PurePower { m } => v * a.powf(m - one),
            Family::ExpFull { p, lambda } => v * clamped_exp(lambda * a.powf(p), &mut saturated),
            Family::MixedPower { m, q, lambda } => v * a.powf(m - one) * clamped_exp(lambda * a.powf(q), &mut saturated),
            Family::ExpM1M { q } => {
                let arg = a.powf(q);
                if arg > T::lit(EXP_CLAMP) {
                    saturated = true;
                    T::lit(EXP_CLAMP).exp_m1()
                } else {
                    arg.exp_m1()
                }
            }
            Family::ExpTaylor => {
                if v > T::lit(EXP_CLAMP) {
                    saturated = true;
                    T::lit(EXP_CLAMP).exp_m1() - v
                } else if v.abs() < T::lit(1e-3) {
                    v * v * (T::lit(0.5) + v * (T::lit(1.0 / 6.0) + v / T::lit(24.0)))
                } else {
                    v.exp_m1() - v
                }
            }
        };
        let value = self.sign * self.scale * g;
        Evaluation { value, saturated: saturated || !value.is_finite() }
    }

    /// Constant `C` (scale included) such that
    /// `|f(u) − f(v)| ≤ C|u − v|(w(u) + w(v))` for `u, v ∈ [−R, R]`, with `w` from [`GrowthClass`].
    pub fn lipschitz_constant(&self, radius: T) -> T {
        let c = match self.family {
            Family::PurePower { m } => m,
            Family::ExpFull { p, lambda } => T::one() + lambda * p * radius.powf(p),
            Family::MixedPower { m, q, lambda } => m + lambda * q * radius.powf(q),
            Family::ExpM1M { q } => q,
            Family::ExpTaylor => T::one(),
        };
        self.scale * c
    }

    /// Right-hand side of the local Lipschitz estimate at `(u, v)`.
    pub fn lipschitz_bound(&self, u: T, v: T, radius: T) -> T {
        self.lipschitz_constant(radius) * (u - v).abs() * (self.class.weight(u) + self.class.weight(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn all_families() -> Vec<NonlinearitySpec<f64>> {
        vec![
            NonlinearitySpec::new(Family::PurePower { m: 3.0 }, 1.0, 1.0).unwrap(),
            NonlinearitySpec::new(Family::PurePower { m: 1.0 }, -1.0, 0.5).unwrap(),
            NonlinearitySpec::new(Family::ExpFull { p: 2.0, lambda: 1.0 }, 1.0, 1.0).unwrap(),
            NonlinearitySpec::new(Family::MixedPower { m: 3.0, q: 2.0, lambda: 1.0 }, 1.0, 1.0).unwrap(),
            NonlinearitySpec::new(Family::MixedPower { m: 1.5, q: 1.0, lambda: 0.5 }, -1.0, 2.0).unwrap(),
            NonlinearitySpec::new(Family::ExpM1M { q: 2.0 }, 1.0, 1.0).unwrap(),
            NonlinearitySpec::new(Family::ExpTaylor, 1.0, 1.0).unwrap(),
        ]
    }

    #[test]
    fn vanish_at_zero() {
        for f in all_families() {
            assert_eq!(f.eval(0.0).value, 0.0);
        }
    }

    #[test]
    fn closed_form_values() {
        let taylor = NonlinearitySpec::new(Family::ExpTaylor, 1.0, 1.0).unwrap();
        assert_relative_eq!(taylor.eval(1.0f64).value, std::f64::consts::E - 2.0, max_relative = 1e-15);
        assert_relative_eq!(taylor.eval(1e-4f64).value, (1e-4f64).exp_m1() - 1e-4, max_relative = 1e-10);
        let mixed = NonlinearitySpec::new(Family::MixedPower { m: 3.0, q: 2.0, lambda: 1.0 }, 1.0, 1.0).unwrap();
        assert_relative_eq!(mixed.eval(0.5f64).value, 0.5 * 0.25 * 0.25f64.exp(), max_relative = 1e-15);
        assert_relative_eq!(mixed.eval(0.5f64).value, 0.16051, max_relative = 1e-4);
    }

    #[test]
    fn saturation_is_flagged_not_fatal() {
        let f = NonlinearitySpec::new(Family::ExpFull { p: 2.0, lambda: 1.0 }, 1.0, 1.0).unwrap();
        let e = f.eval(40.0f64);
        assert!(e.saturated && e.value.is_finite());
        assert!(!f.eval(2.0f64).saturated);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NonlinearitySpec::new(Family::PurePower { m: 0.5f64 }, 1.0, 1.0).is_err());
        assert!(NonlinearitySpec::new(Family::ExpFull { p: 2.0f64, lambda: 0.0 }, 1.0, 1.0).is_err());
        assert!(NonlinearitySpec::new(Family::ExpTaylor, 0.5f64, 1.0).is_err());
        assert!(NonlinearitySpec::new(Family::ExpTaylor, 1.0f64, -1.0).is_err());
    }

    #[test]
    fn growth_classes() {
        let exp_full = NonlinearitySpec::new(Family::ExpFull { p: 2.0f64, lambda: 1.0 }, 1.0, 1.0).unwrap();
        assert!(matches!(exp_full.class(), GrowthClass::Nflw { .. }));
        let mixed = NonlinearitySpec::new(Family::MixedPower { m: 3.0f64, q: 2.0, lambda: 1.0 }, 1.0, 1.0).unwrap();
        assert!(mixed.class().admits_global_theory(2, 1.0));
        assert!(!mixed.class().admits_global_theory(1, 1.0));
    }

    proptest! {
        #[test]
        fn local_lipschitz_estimate(u in -2.0f64..2.0, v in -2.0f64..2.0, which in 0usize..7) {
            let f = all_families()[which];
            let lhs = (f.eval(u).value - f.eval(v).value).abs();
            prop_assert!(lhs <= f.lipschitz_bound(u, v, 2.0) * (1.0 + 1e-12) + 1e-15, "{lhs} vs {}", f.lipschitz_bound(u, v, 2.0));
        }
    }
}
