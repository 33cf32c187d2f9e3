use std::sync::Arc;

use serde_json::json;

use super::fields::smoothing_family;
use super::{num, Check, ExperimentConfig, Report, SmoothingConfig, Table};
use crate::error::Result;
use crate::hermite::Grid;
use crate::propagator::{sigma_beta, smoothing_ratio_sweep, FractionalOrder, SmoothingReport};

/// Allowed relative change of the short-time supremum under t-grid doubling.
pub const SMOOTHING_SUP_STABILITY: f64 = 0.05;
/// Allowed growth of the long-time ratio over its value at `t = 1`.
pub const SMOOTHING_LONG_TIME_FACTOR: f64 = 1.05;
/// Relative tolerance of the ground-state rows against their closed form.
pub const GROUND_TOLERANCE: f64 = 1e-6;

const SHORT_POINTS: usize = 129;
const LONG_POINTS: usize = 41;
const T_MIN: f64 = 1e-3;
const T_MAX: f64 = 5.0;

/// Sweep of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSweep {
    pub name: String,
    pub report: SmoothingReport<f64>,
    /// Short-time supremum on every other node of the log grid.
    pub sup_coarse: f64,
    pub sup_fine: f64,
    /// `|sup_fine − sup_coarse| / sup_fine`.
    pub sup_change: f64,
    /// `max_{t ∈ [1,5]}` long-time ratio divided by its value at `t = 1`.
    pub long_growth: f64,
}

/// Log-spaced `[1e-3, 1]` (129 nodes) followed by linear `(1, 5]` (40 nodes).
fn time_grid() -> Vec<f64> {
    let mut t: Vec<f64> = (0..SHORT_POINTS).map(|i| T_MIN * (1.0 / T_MIN).powf(i as f64 / (SHORT_POINTS - 1) as f64)).collect();
    *t.last_mut().expect("nonempty") = 1.0;
    t.extend((1..LONG_POINTS).map(|i| 1.0 + (T_MAX - 1.0) * i as f64 / (LONG_POINTS - 1) as f64));
    t
}

fn eval_grid(d: usize) -> Result<Arc<Grid<f64>>> {
    Ok(Arc::new(match d {
        1 => Grid::uniform(1, 14.0, 2801)?,
        _ => Grid::uniform(2, 8.0, 161)?,
    }))
}

/// `‖Φ₀‖_{L^q} = π^{-d/4}(2π/q)^{d/(2q)}`.
pub fn ground_lq(d: usize, q: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let base = pi.powf(-(d as f64) / 4.0);
    if q.is_infinite() {
        base
    } else {
        base * (2.0 * pi / q).powf(d as f64 / (2.0 * q))
    }
}

/// Sweeps the built-in smoothing family.
pub fn smoothing_sweep(d: usize, beta: f64, p: f64, q: f64, n: usize, seed: u64) -> Result<Vec<FieldSweep>> {
    let order = FractionalOrder::new(beta)?;
    let grid = eval_grid(d)?;
    let ts = time_grid();
    smoothing_family(d, n, seed)?
        .into_iter()
        .map(|(name, g)| {
            let report = smoothing_ratio_sweep(&g, p, q, &ts, order, grid.clone())?;
            let short: Vec<f64> = report.rows.iter().filter_map(|r| r.short_time).collect();
            let sup_fine = short.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sup_coarse = short.iter().step_by(2).copied().fold(f64::NEG_INFINITY, f64::max);
            let long: Vec<f64> = report.long_time_ratios().map(|(_, v)| v).collect();
            let long_growth = long.iter().copied().fold(f64::NEG_INFINITY, f64::max) / long[0];
            Ok(FieldSweep { name, sup_change: (sup_fine - sup_coarse).abs() / sup_fine, sup_coarse, sup_fine, long_growth, report })
        })
        .collect()
}

pub(super) fn run(config: &ExperimentConfig, c: &SmoothingConfig) -> Result<Report> {
    let mut report = Report::new(config);
    let sweeps = smoothing_sweep(c.d, c.beta, c.p, c.q, c.n, c.seed)?;
    let sigma = sigma_beta(c.d, c.beta, c.p, c.q);
    let mut table = Table::new("ratios", &["field", "t", "p", "q", "sigma_beta", "norm_q", "short_time_ratio", "long_time_ratio"]);
    let mut per_field = Vec::new();
    for s in &sweeps {
        for r in &s.report.rows {
            table.push(vec![
                s.name.as_str().into(),
                r.t.into(),
                c.p.into(),
                c.q.into(),
                s.report.sigma_beta.into(),
                r.norm_q.into(),
                r.short_time.into(),
                r.long_time.into(),
            ]);
        }
        per_field.push(json!({
            "field": s.name, "norm_p": s.report.norm_p, "short_time_sup": num(s.sup_fine),
            "short_time_sup_half_grid": num(s.sup_coarse), "sup_change": num(s.sup_change), "long_time_growth": num(s.long_growth),
        }));
    }
    let finite = sweeps.iter().all(|s| s.sup_fine.is_finite());
    let worst_change = sweeps.iter().map(|s| s.sup_change).fold(0.0, f64::max);
    let worst_growth = sweeps.iter().map(|s| s.long_growth).fold(0.0, f64::max);
    report.checks.push(Check::flag("short_time_sup_finite", finite));
    report.checks.push(Check::below("short_time_sup_change_under_doubling", worst_change, SMOOTHING_SUP_STABILITY));
    report.checks.push(Check::at_most("long_time_ratio_over_t1_value", worst_growth, SMOOTHING_LONG_TIME_FACTOR));
    report.checks.push(Check::flag("sigma_beta_consistent", sweeps.iter().all(|s| s.report.sigma_consistent())));

    let ground = &sweeps[0];
    let want0 = ground_lq(c.d, c.q);
    let rate = FractionalOrder::new(c.beta)?.level_rate(0, c.d);
    let ground_err = ground.report.rows.iter().map(|r| (r.norm_q / ((-r.t * rate).exp() * want0) - 1.0).abs()).fold(0.0, f64::max);
    report.checks.push(Check::at_most("ground_state_closed_form", ground_err, GROUND_TOLERANCE));

    report.result("sigma_beta", num(sigma));
    report.result("fields", json!(per_field));
    report.result("t_grid", json!({"short": {"from": T_MIN, "to": 1.0, "points": SHORT_POINTS, "spacing": "log"}, "long": {"from": 1.0, "to": T_MAX, "points": LONG_POINTS, "spacing": "linear"}}));
    report.tables.push(table);
    Ok(report)
}
