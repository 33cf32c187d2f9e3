use super::Trajectory;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum number of samples inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    /// `sup_{t ∈ window} t^σ ‖u(t)‖_{L^a}`.
    pub sup_stat: T,
    /// Least-squares slope of `log ‖u(t)‖_{L^a}` against `log t`.
    pub slope: T,
    /// Half-width of the 95% confidence interval of the slope.
    pub slope_ci: T,
    pub samples: usize,
}

/// Boundedness statistic and log-log slope of `‖u(t)‖_{L^a}` over `[t1, t2]`.
pub fn decay_fit<T: Real>(traj: &Trajectory<T>, a: T, sigma: T, window: (T, T)) -> Result<DecayFit<T>> {
    let (t1, t2) = window;
    if !(t1 > T::zero() && t2 > t1) {
        return Err(Error::InvalidParameter(format!("fit window must satisfy 0 < t1 < t2, got ({t1}, {t2})")));
    }
    let pts: Vec<(T, T)> = traj.norm_series(a).into_iter().filter(|&(t, _)| t >= t1 && t <= t2).collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, have: pts.len() });
    }
    let sup_stat = pts.iter().map(|&(t, v)| t.powf(sigma) * v).fold(T::zero(), T::max);
    let positive: Vec<(T, T)> = pts.iter().filter(|&&(_, v)| v > T::zero()).map(|&(t, v)| (t.ln(), v.ln())).collect();
    if positive.len() < 3 {
        // A vanishing solution has no meaningful slope.
        return Ok(DecayFit { sup_stat, slope: T::zero(), slope_ci: T::zero(), samples: pts.len() });
    }
    let n = T::from_count(positive.len());
    let mx = positive.iter().map(|p| p.0).sum::<T>() / n;
    let my = positive.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = positive.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = positive.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: T = positive.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (rss / (n - T::lit(2.0)) / sxx).sqrt();
    Ok(DecayFit { sup_stat, slope, slope_ci: T::lit(1.96) * se, samples: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::SpectralField;
    use crate::solver::{Diagnostics, Sample, StepDiagnostics, Verdict};
    use approx::assert_relative_eq;

    fn synthetic(values: impl Fn(f64) -> f64, n: usize) -> Trajectory<f64> {
        let step = StepDiagnostics { picard_iters: 0, residual: 0.0, sup_norm: 0.0, tail_fraction: 0.0, saturated: false };
        let field = SpectralField::zeros(1, 2).unwrap();
        let samples = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64 * 4.0;
                Sample { t, field: field.clone(), diagnostics: Diagnostics { step, lebesgue: vec![(5.0, values(t))], exp_norm: None } }
            })
            .collect();
        Trajectory { samples, verdict: Verdict::Completed, stop_reason: None, steps: n, saturated: false }
    }

    #[test]
    fn exact_power_law() {
        let traj = synthetic(|t| 2.0 * t.powf(-0.3), 100);
        let fit = decay_fit(&traj, 5.0, 0.3, (0.1, 4.0)).unwrap();
        assert_relative_eq!(fit.slope, -0.3, epsilon = 1e-12);
        assert!(fit.slope_ci < 1e-10);
        assert_relative_eq!(fit.sup_stat, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn single_mode_closed_form() {
        // u = e^{-t} Φ₀: sup of t^σ e^{-t} on the window is attained at t = σ.
        let traj = synthetic(|t| (-t).exp(), 4000);
        let fit = decay_fit(&traj, 5.0, 0.3, (0.01, 4.0)).unwrap();
        assert_relative_eq!(fit.sup_stat, 0.3f64.powf(0.3) * (-0.3f64).exp(), max_relative = 1e-6);
    }

    #[test]
    fn zero_trajectory_and_too_few_samples() {
        let traj = synthetic(|_| 0.0, 50);
        assert_eq!(decay_fit(&traj, 5.0, 0.3, (0.1, 4.0)).unwrap().sup_stat, 0.0);
        assert!(matches!(decay_fit(&traj, 5.0, 0.3, (3.9, 4.0)), Err(Error::InsufficientSamples { .. })));
    }
}
