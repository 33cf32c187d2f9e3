use std::sync::Arc;

use serde_json::json;

use super::{num, Check, DecayConfig, ExperimentConfig, Report, Table};
use crate::error::Result;
use crate::hermite::{Grid, MultiIndex, PhysicalField, SpectralField, SpectralPlan};
use crate::orlicz::exp_lp_norm;
use crate::propagator::{apply_semigroup, FractionalOrder};
use crate::solver::{decay_fit, feasible_exponents, DecayFit, ExponentPlan, Family, NonlinearitySpec, SolverConfig, Stepper, Trajectory, Verdict};

/// Allowed relative change of `sup_stat` when `Δt` is halved.
pub const DECAY_STABILITY: f64 = 0.10;
/// Bound on the Duhamel difference at `t = 1e-3` relative to `t = 1e-1`.
pub const DUHAMEL_RATIO_LIMIT: f64 = 2e-2;

const DUHAMEL_DT: f64 = 1e-4;
const DUHAMEL_END: f64 = 0.1;
const DUHAMEL_RECORD_EVERY: usize = 10;

#[derive(Debug, Clone)]
pub struct DecayOutcome {
    pub plan: ExponentPlan<f64>,
    /// Coefficient `A` of `u₀ = AΦ₀`.
    pub amplitude: f64,
    pub u0: SpectralField<f64>,
    pub main: Trajectory<f64>,
    pub fit: DecayFit<f64>,
    pub half_step: Trajectory<f64>,
    pub fit_half_step: DecayFit<f64>,
    /// `(t, ‖u(t) − e^{-tH^β}u₀‖_{exp L^p})` on `t = 1e-3, 2e-3, …, 0.1`.
    pub duhamel: Vec<(f64, f64)>,
    /// Duhamel difference at the first recorded time over the last.
    pub duhamel_ratio: f64,
}

impl DecayOutcome {
    pub fn sup_stat_change(&self) -> f64 {
        (self.fit.sup_stat - self.fit_half_step.sup_stat).abs() / self.fit.sup_stat
    }
}

fn norm_grid(d: usize) -> Result<Arc<Grid<f64>>> {
    Ok(Arc::new(match d {
        1 => Grid::uniform(1, 14.0, 1401)?,
        _ => Grid::uniform(2, 10.0, 201)?,
    }))
}

fn solver_config(c: &DecayConfig, dt: f64, t_end: f64, grid: &Arc<Grid<f64>>) -> Result<SolverConfig<f64>> {
    let f = NonlinearitySpec::new(Family::MixedPower { m: c.m, q: c.p, lambda: c.lambda }, 1.0, c.epsilon)?;
    let mut cfg = SolverConfig::new(c.d, c.beta, c.n, dt, t_end, f)?;
    cfg.norm_grid = Some(grid.clone());
    Ok(cfg)
}

/// Runs the small-data scenario: the main run, a run at half the step, and a
/// fine-step run over `[0, 0.1]` for the Duhamel difference.
pub fn decay_scenario(c: &DecayConfig) -> Result<DecayOutcome> {
    let plan = feasible_exponents(c.p, c.m, c.d, c.beta, c.a)?;
    let grid = norm_grid(c.d)?;
    let ground = SpectralField::basis_function(&MultiIndex::new(vec![0; c.d])?, c.n)?;
    let norm_plan = SpectralPlan::new(grid.clone(), c.n);
    let ground_norm = exp_lp_norm(&norm_plan.inverse(&ground)?, c.p)?.value;
    let amplitude = c.alpha / ground_norm;
    let u0 = ground.scaled(amplitude);
    let window = (c.dt / 2.0, c.t_end);

    let mut cfg = solver_config(c, c.dt, c.t_end, &grid)?;
    cfg.norm_exponents = vec![c.a];
    cfg.exp_norm_p = Some(c.p);
    let main = Stepper::new(cfg)?.run(&u0)?;
    let fit = decay_fit(&main, c.a, plan.sigma, window)?;

    let mut cfg = solver_config(c, c.dt / 2.0, c.t_end, &grid)?;
    cfg.norm_exponents = vec![c.a];
    let half_step = Stepper::new(cfg)?.run(&u0)?;
    let fit_half_step = decay_fit(&half_step, c.a, plan.sigma, window)?;

    let mut cfg = solver_config(c, DUHAMEL_DT, DUHAMEL_END, &grid)?;
    cfg.record_every = DUHAMEL_RECORD_EVERY;
    let early = Stepper::new(cfg)?.run(&u0)?;
    let beta = FractionalOrder::new(c.beta)?;
    let duhamel = early
        .samples
        .iter()
        .filter(|s| s.t > 0.0)
        .map(|s| {
            let diff = s.field.sub(&apply_semigroup(&u0, s.t, beta)?)?;
            let field: PhysicalField<f64> = norm_plan.inverse(&diff)?;
            Ok((s.t, if field.is_zero() { 0.0 } else { exp_lp_norm(&field, c.p)?.value }))
        })
        .collect::<Result<Vec<_>>>()?;
    let first = duhamel.first().map_or(f64::NAN, |v| v.1);
    let last = duhamel.last().map_or(f64::NAN, |v| v.1);
    Ok(DecayOutcome { plan, amplitude, u0, main, fit, half_step, fit_half_step, duhamel, duhamel_ratio: first / last })
}

pub(super) fn run(config: &ExperimentConfig, c: &DecayConfig) -> Result<Report> {
    let mut report = Report::new(config);
    let out = decay_scenario(c)?;
    let sigma = out.plan.sigma;
    let mut series = Table::new("series", &["t", "norm_a", "t_pow_sigma_norm_a", "exp_lp_norm"]);
    for s in &out.main.samples {
        let norm_a = s.diagnostics.lebesgue.first().map_or(f64::NAN, |v| v.1);
        series.push(vec![s.t.into(), norm_a.into(), (s.t.powf(sigma) * norm_a).into(), s.diagnostics.exp_norm.into()]);
    }
    let mut duhamel = Table::new("duhamel", &["t", "exp_lp_difference"]);
    for &(t, v) in &out.duhamel {
        duhamel.push(vec![t.into(), v.into()]);
    }
    report.checks.push(Check::flag("main_run_completed", out.main.verdict == Verdict::Completed));
    report.checks.push(Check::flag("half_step_run_completed", out.half_step.verdict == Verdict::Completed));
    report.checks.push(Check::flag("sup_stat_finite", out.fit.sup_stat.is_finite()));
    report.checks.push(Check::at_most("sup_stat_change_under_dt_halving", out.sup_stat_change(), DECAY_STABILITY));
    report.checks.push(Check::at_most("duhamel_ratio_t1e-3_over_t1e-1", out.duhamel_ratio, DUHAMEL_RATIO_LIMIT));
    let pair = out.plan.pair.map(|p| json!({"r": p.r, "q": p.q, "theta0": p.theta0, "rho0": p.rho0}));
    report.result("sigma", num(sigma));
    report.result("exponent_case", json!(out.plan.case.number()));
    report.result("interpolation_pair", pair.unwrap_or(serde_json::Value::Null));
    report.result("m_at_least_p", json!(out.plan.m_at_least_p));
    report.result("dimension_condition", json!(out.plan.dimension_condition));
    report.result("amplitude", num(out.amplitude));
    report.result(
        "fit",
        json!({
            "sup_stat": num(out.fit.sup_stat), "sup_stat_half_dt": num(out.fit_half_step.sup_stat),
            "relative_change": num(out.sup_stat_change()), "slope": num(out.fit.slope), "slope_ci95": num(out.fit.slope_ci),
            "samples": out.fit.samples,
        }),
    );
    report.result("duhamel_ratio", num(out.duhamel_ratio));
    report.result("verdict", json!(out.main.verdict));
    report.result("steps", json!(out.main.steps));
    if let Some(reason) = &out.main.stop_reason {
        report.note(reason.clone());
    }
    report.tables.push(series);
    report.tables.push(duhamel);
    Ok(report)
}
