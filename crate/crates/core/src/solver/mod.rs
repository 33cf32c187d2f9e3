//! Mild-solution time stepping for `∂ₜu + H^β u = f(u)` through the Duhamel
//! formula, the nonlinearity families, exponent feasibility, and decay fits.

mod exponents;
mod fit;
mod nonlinearity;

pub use exponents::{feasible_exponents, ExponentCase, ExponentPlan, InterpolationPair};
pub use fit::{decay_fit, DecayFit};
pub use nonlinearity::{Evaluation, Family, GrowthClass, NonlinearitySpec, EXP_CLAMP};

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermite::{basis_size, Grid, PhysicalField, SpectralField, SpectralPlan};
use crate::orlicz::{lq_norm, luxemburg_norm, YoungFunction};
use crate::propagator::{scale_by_level, semigroup_multipliers, FractionalOrder};
use crate::scalar::Real;

/// Fraction of spectral energy above level `N − 2` that marks a step as under-resolved.
pub const TAIL_FRACTION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub dim: usize,
    pub beta: FractionalOrder<T>,
    /// Spectral truncation degree `N`.
    pub max_degree: usize,
    pub dt: T,
    pub t_end: T,
    pub picard_tol: T,
    pub picard_max: usize,
    pub blowup_norm_cap: T,
    pub nonlinearity: NonlinearitySpec<T>,
    /// Record a trajectory sample every this many steps.
    pub record_every: usize,
    /// Exponents `a` whose `L^a` norms are recorded (`∞` allowed).
    pub norm_exponents: Vec<T>,
    /// Exponent `p` of the recorded `exp L^p` norm, if any.
    pub exp_norm_p: Option<T>,
    /// Grid on which recorded norms are evaluated; defaults to a uniform box.
    pub norm_grid: Option<Arc<Grid<T>>>,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(dim: usize, beta: T, max_degree: usize, dt: T, t_end: T, nonlinearity: NonlinearitySpec<T>) -> Result<Self> {
        let cfg = Self {
            dim,
            beta: FractionalOrder::new(beta)?,
            max_degree,
            dt,
            t_end,
            picard_tol: T::lit(1e-10),
            picard_max: 50,
            blowup_norm_cap: T::lit(1e8),
            nonlinearity,
            record_every: 1,
            norm_exponents: Vec::new(),
            exp_norm_p: None,
            norm_grid: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        self.beta.require_at_most_one()?;
        basis_size(self.dim, self.max_degree)?;
        if self.max_degree < 2 || 4 * self.max_degree > 512 {
            return Err(Error::InvalidParameter(format!("N must lie in 2..=128, got {}", self.max_degree)));
        }
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.picard_tol > T::zero()) || self.picard_max == 0 || self.record_every == 0 {
            return Err(Error::InvalidParameter("picard_tol, picard_max and record_every must be positive".into()));
        }
        if !(self.blowup_norm_cap > T::zero()) {
            return Err(Error::InvalidParameter("blowup_norm_cap must be positive".into()));
        }
        if self.norm_exponents.iter().any(|&a| !(a >= T::one())) {
            return Err(Error::InvalidParameter("recorded norm exponents must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics<T> {
    pub picard_iters: usize,
    /// Last Picard increment relative to `max(1, ‖u‖)`.
    pub residual: T,
    /// Largest `|u|` on the nonlinear grid.
    pub sup_norm: T,
    pub tail_fraction: T,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<T> {
    pub step: StepDiagnostics<T>,
    /// `(a, ‖u‖_{L^a})` for the configured exponents.
    pub lebesgue: Vec<(T, T)>,
    pub exp_norm: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub field: SpectralField<T>,
    pub diagnostics: Diagnostics<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Completed,
    BlowupSuspected,
    UnderResolved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub verdict: Verdict,
    /// Reason the run stopped early, if it did.
    pub stop_reason: Option<String>,
    pub steps: usize,
    /// Some step clamped an exponent.
    pub saturated: bool,
}

impl<T: Real> Trajectory<T> {
    pub fn final_sample(&self) -> &Sample<T> {
        self.samples.last().expect("trajectory always holds the initial sample")
    }

    /// `(t, ‖u(t)‖_{L^a})` for a recorded exponent `a`.
    pub fn norm_series(&self, a: T) -> Vec<(T, T)> {
        self.samples.iter().filter_map(|s| s.diagnostics.lebesgue.iter().find(|(e, _)| *e == a).map(|&(_, v)| (s.t, v))).collect()
    }
}

/// Precomputed transforms and multipliers for one configuration.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    cfg: SolverConfig<T>,
    nonlinear_plan: SpectralPlan<T>,
    norm_plan: SpectralPlan<T>,
    multipliers: Vec<T>,
}

fn default_norm_grid<T: Real>(dim: usize) -> Result<Grid<T>> {
    match dim {
        1 => Grid::uniform(1, T::lit(14.0), 1401),
        _ => Grid::uniform(2, T::lit(10.0), 201),
    }
}

impl<T: Real> Stepper<T> {
    pub fn new(cfg: SolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.max_degree;
        let grid = Arc::new(Grid::gauss_hermite(cfg.dim, 4 * n)?);
        let norm_grid = match &cfg.norm_grid {
            Some(g) => {
                if g.dim() != cfg.dim {
                    return Err(Error::DimensionMismatch { expected: cfg.dim, got: g.dim() });
                }
                g.clone()
            }
            None => Arc::new(default_norm_grid(cfg.dim)?),
        };
        let multipliers = semigroup_multipliers(cfg.dim, n, cfg.dt, cfg.beta)?;
        Ok(Self { nonlinear_plan: SpectralPlan::new(grid, n), norm_plan: SpectralPlan::new(norm_grid, n), multipliers, cfg })
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.cfg
    }

    /// The oversampled Gauss–Hermite grid used for nonlinear evaluations.
    pub fn nonlinear_grid(&self) -> &Arc<Grid<T>> {
        self.nonlinear_plan.grid()
    }

    /// Samples `u0` on the nonlinear grid and projects it onto degree `N`.
    pub fn project<F: Fn(&[T]) -> T + Sync>(&self, u0: F) -> Result<SpectralField<T>> {
        let grid = self.nonlinear_plan.grid();
        let d = grid.dim();
        let values: Vec<T> = (0..grid.len()).into_par_iter().map(|i| u0(&grid.point(i)[..d])).collect();
        let field = PhysicalField::new(grid.clone(), values)?;
        self.nonlinear_plan.forward(&field, self.cfg.max_degree)
    }

    /// `F(u)`: synthesize on the nonlinear grid, apply `f`, project back.
    /// Also returns the grid sup of `u` and whether `f` saturated.
    fn nonlinear_term(&self, u: &SpectralField<T>) -> Result<(SpectralField<T>, T, bool)> {
        let values = self.nonlinear_plan.inverse_values(u)?;
        let sup = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let f = &self.cfg.nonlinearity;
        let evals: Vec<Evaluation<T>> = values.par_iter().map(|&v| f.eval(v)).collect();
        let saturated = evals.iter().any(|e| e.saturated);
        let fv: Vec<T> = evals.iter().map(|e| e.value).collect();
        if let Some(i) = fv.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok((self.nonlinear_plan.forward_values(&fv, self.cfg.max_degree)?, sup, saturated))
    }

    fn check_shape(&self, u: &SpectralField<T>) -> Result<()> {
        if u.dim() != self.cfg.dim || u.max_degree() != self.cfg.max_degree {
            return Err(Error::ShapeMismatch);
        }
        if !u.is_finite() {
            return Err(Error::NonFinite(0));
        }
        Ok(())
    }

    /// One exponential-trapezoid step
    /// `u_{n+1} = E u_n + (Δt/2)(E F(u_n) + F(u_{n+1}))`, `E = e^{-ΔtH^β}`,
    /// solved by Picard iteration from the predictor `E(u_n + Δt F(u_n))`.
    pub fn step(&self, u: &SpectralField<T>, dt: T) -> Result<(SpectralField<T>, StepDiagnostics<T>)> {
        self.check_shape(u)?;
        if dt < T::zero() || !dt.is_finite() {
            return Err(Error::NegativeTime(dt.to_f64_lossy()));
        }
        let n = self.cfg.max_degree;
        let tail_level = n - 2;
        if dt == T::zero() {
            let diag = StepDiagnostics {
                picard_iters: 0,
                residual: T::zero(),
                sup_norm: self.grid_sup(u)?,
                tail_fraction: u.tail_fraction(tail_level),
                saturated: false,
            };
            return Ok((u.clone(), diag));
        }
        let own;
        let mult = if dt == self.cfg.dt {
            &self.multipliers
        } else {
            own = semigroup_multipliers(self.cfg.dim, n, dt, self.cfg.beta)?;
            &own
        };
        let evolve = |c: &SpectralField<T>| {
            let mut out = c.clone();
            scale_by_level(&mut out, mult);
            out
        };
        let linear = evolve(u);
        if self.cfg.nonlinearity.is_zero() {
            let diag = StepDiagnostics {
                picard_iters: 0,
                residual: T::zero(),
                sup_norm: self.grid_sup(&linear)?,
                tail_fraction: linear.tail_fraction(tail_level),
                saturated: false,
            };
            return Ok((linear, diag));
        }
        let half = dt / T::lit(2.0);
        let (f0, _, mut saturated) = self.nonlinear_term(u)?;
        let ef0 = evolve(&f0);
        // Known part E u_n + (Δt/2) E F(u_n).
        let base = linear.axpy(half, &ef0)?;
        let mut current = evolve(&u.axpy(dt, &f0)?);
        let mut residual = T::infinity();
        for iter in 1..=self.cfg.picard_max {
            let (fk, _, sat) = self.nonlinear_term(&current)?;
            saturated |= sat;
            let next = base.axpy(half, &fk)?;
            if !next.is_finite() {
                return Err(Error::NonConvergent { iterations: iter, increment: f64::INFINITY });
            }
            let scale = next.l2_norm().max(T::one());
            residual = next.distance(&current)? / scale;
            current = next;
            if residual < self.cfg.picard_tol {
                let (_, sup, sat) = self.nonlinear_term(&current)?;
                let diag = StepDiagnostics {
                    picard_iters: iter,
                    residual,
                    sup_norm: sup,
                    tail_fraction: current.tail_fraction(tail_level),
                    saturated: saturated || sat,
                };
                return Ok((current, diag));
            }
        }
        Err(Error::NonConvergent { iterations: self.cfg.picard_max, increment: residual.to_f64_lossy() })
    }

    /// Recorded norms of `u` on the norm grid.
    pub fn measure(&self, u: &SpectralField<T>, step: StepDiagnostics<T>) -> Result<Diagnostics<T>> {
        let needs_field = !self.cfg.norm_exponents.is_empty() || self.cfg.exp_norm_p.is_some();
        if !needs_field {
            return Ok(Diagnostics { step, lebesgue: Vec::new(), exp_norm: None });
        }
        let field = self.norm_plan.inverse(u)?;
        let lebesgue = self.cfg.norm_exponents.iter().map(|&a| Ok((a, lq_norm(&field, a)?.value))).collect::<Result<Vec<_>>>()?;
        let exp_norm = match self.cfg.exp_norm_p {
            Some(p) => Some(luxemburg_norm(&field, YoungFunction::exp_lp(p)?)?.value),
            None => None,
        };
        Ok(Diagnostics { step, lebesgue, exp_norm })
    }

    /// Steps from `u0` to `t_end`, stopping early on suspected blow-up or
    /// loss of resolution. Failures end the run with a verdict, never an error,
    /// except for invalid input.
    pub fn run(&self, u0: &SpectralField<T>) -> Result<Trajectory<T>> {
        self.check_shape(u0)?;
        let tail_level = self.cfg.max_degree - 2;
        let init = StepDiagnostics {
            picard_iters: 0,
            residual: T::zero(),
            sup_norm: self.grid_sup(u0)?,
            tail_fraction: u0.tail_fraction(tail_level),
            saturated: false,
        };
        let mut samples = vec![Sample { t: T::zero(), field: u0.clone(), diagnostics: self.measure(u0, init)? }];
        let dt = self.cfg.dt;
        let t_end = self.cfg.t_end;
        let steps_total = ((t_end / dt) - T::lit(1e-9)).ceil().to_f64_lossy().max(1.0) as usize;
        let mut u = u0.clone();
        let mut saturated = false;
        let mut verdict = Verdict::Completed;
        let mut stop_reason = None;
        let mut steps = 0;
        for n in 1..=steps_total {
            let t_prev = dt * T::from_count(n - 1);
            let h = if n == steps_total { t_end - t_prev } else { dt };
            let t = if n == steps_total { t_end } else { dt * T::from_count(n) };
            match self.step(&u, h) {
                Ok((next, diag)) => {
                    steps = n;
                    saturated |= diag.saturated;
                    u = next;
                    let stop = if diag.sup_norm > self.cfg.blowup_norm_cap {
                        verdict = Verdict::BlowupSuspected;
                        Some(format!("grid sup {} exceeds cap {} at t = {t}", diag.sup_norm, self.cfg.blowup_norm_cap))
                    } else if diag.tail_fraction > T::lit(TAIL_FRACTION_LIMIT) {
                        verdict = Verdict::UnderResolved;
                        Some(Error::UnderResolved { fraction: diag.tail_fraction.to_f64_lossy(), level: tail_level }.to_string())
                    } else {
                        None
                    };
                    if stop.is_some() || n % self.cfg.record_every == 0 || n == steps_total {
                        samples.push(Sample { t, field: u.clone(), diagnostics: self.measure(&u, diag)? });
                    }
                    if stop.is_some() {
                        stop_reason = stop;
                        break;
                    }
                }
                Err(e @ (Error::NonConvergent { .. } | Error::NonFinite(_))) => {
                    verdict = Verdict::BlowupSuspected;
                    stop_reason = Some(format!("{e} at t = {t}"));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if verdict == Verdict::Completed && saturated {
            verdict = Verdict::UnderResolved;
            stop_reason = Some("exponent clamp was active during the run".into());
        }
        Ok(Trajectory { samples, verdict, stop_reason, steps, saturated })
    }

    fn grid_sup(&self, u: &SpectralField<T>) -> Result<T> {
        Ok(self.nonlinear_plan.inverse_values(u)?.iter().fold(T::zero(), |m, v| m.max(v.abs())))
    }
}

/// One step of the configured scheme from `u` with the configured `Δt`.
pub fn step<T: Real>(u: &SpectralField<T>, cfg: &SolverConfig<T>) -> Result<(SpectralField<T>, StepDiagnostics<T>)> {
    Stepper::new(cfg.clone())?.step(u, cfg.dt)
}

/// Runs the configured scheme from `u0` to `t_end`.
pub fn run<T: Real>(u0: &SpectralField<T>, cfg: &SolverConfig<T>) -> Result<Trajectory<T>> {
    Stepper::new(cfg.clone())?.run(u0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::MultiIndex;
    use crate::propagator::apply_semigroup;
    use approx::assert_relative_eq;

    fn cfg(dim: usize, n: usize, dt: f64, t_end: f64, f: NonlinearitySpec<f64>) -> SolverConfig<f64> {
        SolverConfig::new(dim, 1.0, n, dt, t_end, f).unwrap()
    }

    fn mode(dim: usize, alpha: Vec<usize>, n: usize) -> SpectralField<f64> {
        assert_eq!(alpha.len(), dim);
        SpectralField::basis_function(&MultiIndex::new(alpha).unwrap(), n).unwrap()
    }

    #[test]
    fn zero_nonlinearity_is_the_semigroup() {
        let c = cfg(1, 10, 0.1, 1.0, NonlinearitySpec::zero());
        let mut u0 = mode(1, vec![0], 10);
        u0.coeffs_mut()[3] = 0.4;
        let (u1, d) = step(&u0, &c).unwrap();
        assert_eq!(d.picard_iters, 0);
        let exact = apply_semigroup(&u0, 0.1, FractionalOrder::one()).unwrap();
        assert!(u1.distance(&exact).unwrap() < 1e-15);
    }

    #[test]
    fn zero_step_is_identity() {
        let c = cfg(1, 8, 0.1, 1.0, NonlinearitySpec::new(Family::ExpTaylor, 1.0, 1.0).unwrap());
        let u0 = mode(1, vec![2], 8).scaled(0.3);
        let (u1, _) = Stepper::new(c).unwrap().step(&u0, 0.0).unwrap();
        assert_eq!(u1, u0);
    }

    #[test]
    fn linear_mode_matches_discrete_factor() {
        let eps = 0.3;
        let dt = 0.05;
        let c = cfg(2, 6, dt, 1.0, NonlinearitySpec::linear(eps).unwrap());
        let alpha = MultiIndex::new(vec![1, 1]).unwrap();
        let u0 = mode(2, vec![1, 1], 6);
        let (u1, _) = step(&u0, &c).unwrap();
        let mu = 6.0;
        let want = (-mu * dt).exp() * (1.0 + eps * dt / 2.0) / (1.0 - eps * dt / 2.0);
        assert_relative_eq!(u1.get(&alpha), want, max_relative = 1e-10);
        // One step agrees with the ODE solution to O(Δt³).
        assert!((u1.get(&alpha) - ((eps - mu) * dt).exp()).abs() < dt.powi(3));
    }

    #[test]
    fn large_data_is_flagged_as_blowup() {
        let f = NonlinearitySpec::new(Family::ExpFull { p: 2.0, lambda: 1.0 }, 1.0, 1.0).unwrap();
        for n in [16, 24] {
            let c = cfg(1, n, 1e-3, 1.0, f);
            let st = Stepper::new(c).unwrap();
            let u0 = mode(1, vec![0], n).scaled(50.0);
            let traj = st.run(&u0).unwrap();
            assert_eq!(traj.verdict, Verdict::BlowupSuspected, "N = {n}: {:?}", traj.stop_reason);
            assert!(traj.final_sample().t < 1.0);
        }
    }

    #[test]
    fn under_resolved_initial_energy_is_reported() {
        let c = cfg(1, 8, 0.01, 0.05, NonlinearitySpec::new(Family::PurePower { m: 3.0 }, 1.0, 1.0).unwrap());
        let u0 = mode(1, vec![8], 8);
        let traj = run(&u0, &c).unwrap();
        assert_eq!(traj.verdict, Verdict::UnderResolved);
    }

    #[test]
    fn config_validation() {
        let f = NonlinearitySpec::zero();
        assert!(SolverConfig::new(3, 1.0, 10, 0.1, 1.0, f).is_err());
        assert!(SolverConfig::new(1, 1.5, 10, 0.1, 1.0, f).is_err());
        assert!(SolverConfig::new(1, 1.0, 10, 0.0, 1.0, f).is_err());
        assert!(SolverConfig::new(1, 1.0, 200, 0.1, 1.0, f).is_err());
    }

    #[test]
    fn records_requested_norms() {
        let mut c = cfg(1, 10, 0.1, 0.5, NonlinearitySpec::zero());
        c.norm_exponents = vec![2.0, f64::INFINITY];
        c.exp_norm_p = Some(2.0);
        let traj = run(&mode(1, vec![0], 10), &c).unwrap();
        assert_eq!(traj.samples.len(), 6);
        let series = traj.norm_series(2.0);
        for (t, v) in series {
            assert_relative_eq!(v, (-t).exp(), max_relative = 1e-8);
        }
        assert!(traj.samples.iter().all(|s| s.diagnostics.exp_norm.is_some()));
    }
}
