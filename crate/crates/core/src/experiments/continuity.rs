use std::sync::Arc;

use serde_json::json;

use super::fields::{bump, project};
use super::{Check, ContinuityConfig, ExperimentConfig, Report, Table};
use crate::error::Result;
use crate::hermite::{Grid, SpectralField, SpectralPlan};
use crate::orlicz::lq_norm;
use crate::propagator::FractionalOrder;

/// Bound on `‖e^{-tH^β}g − g‖_{L^q}` at the last dyadic time.
pub const CONTINUITY_FINAL_BOUND: f64 = 1e-3;
/// Dyadic exponents `j` in `t = 2^{-j}`.
pub const CONTINUITY_LEVELS: usize = 16;
/// First `j` from which the column must decrease.
pub const CONTINUITY_MONOTONE_FROM: usize = 4;

pub const CONTINUITY_EXPONENTS: [f64; 3] = [1.0, 2.0, f64::INFINITY];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityRow {
    pub j: usize,
    pub t: f64,
    pub q: f64,
    pub value: f64,
}

/// `(e^{-tH^β} − I)g` in coefficients, computed with `expm1` so that small
/// `t` does not cancel.
fn semigroup_minus_identity(g: &SpectralField<f64>, t: f64, beta: FractionalOrder<f64>) -> Result<SpectralField<f64>> {
    let d = g.dim();
    let mut out = g.clone();
    for (k, c) in g.levels().into_iter().zip(out.coeffs_mut()) {
        *c *= (-t * beta.level_rate(k, d)).exp_m1();
    }
    Ok(out)
}

fn eval_grid(d: usize) -> Result<Arc<Grid<f64>>> {
    Ok(Arc::new(match d {
        1 => Grid::uniform(1, 10.0, 2001)?,
        _ => Grid::uniform(2, 6.0, 241)?,
    }))
}

/// `‖e^{-tH^β}g − g‖_{L^q}` for `t = 2^{-j}`, `j = 0..=16`, `q ∈ {1, 2, ∞}`, with
/// `g` the degree-`n` projection of `datum`.
pub fn continuity_rows(datum: &SpectralField<f64>, beta: f64) -> Result<Vec<ContinuityRow>> {
    let order = FractionalOrder::new(beta)?;
    let plan = SpectralPlan::new(eval_grid(datum.dim())?, datum.max_degree());
    let mut rows = Vec::new();
    for j in 0..=CONTINUITY_LEVELS {
        let t = 0.5f64.powi(j as i32);
        let diff = plan.inverse(&semigroup_minus_identity(datum, t, order)?)?;
        for &q in &CONTINUITY_EXPONENTS {
            rows.push(ContinuityRow { j, t, q, value: lq_norm(&diff, q)?.value });
        }
    }
    Ok(rows)
}

/// Continuity rows for the built-in bump `exp(1 − 1/(1 − |x|²/4))`.
pub fn bump_continuity(d: usize, beta: f64, n: usize) -> Result<Vec<ContinuityRow>> {
    let g = project(|x| bump(x.iter().map(|v| v * v).sum()), d, n)?;
    continuity_rows(&g, beta)
}

/// Largest `value(j+1)/value(j)` over `j ≥ 4` for exponent `q`, and the value at `j = 16`.
pub fn column_summary(rows: &[ContinuityRow], q: f64) -> (f64, f64) {
    let col: Vec<f64> = rows.iter().filter(|r| r.q == q).map(|r| r.value).collect();
    let worst = col[CONTINUITY_MONOTONE_FROM..].windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    (worst, col[CONTINUITY_LEVELS])
}

fn q_label(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

pub(super) fn run(config: &ExperimentConfig, c: &ContinuityConfig) -> Result<Report> {
    let mut report = Report::new(config);
    let rows = bump_continuity(c.d, c.beta, c.n)?;
    let mut table = Table::new("differences", &["j", "t", "q", "norm"]);
    for r in &rows {
        table.push(vec![r.j.into(), r.t.into(), r.q.into(), r.value.into()]);
    }
    let mut summary = serde_json::Map::new();
    for &q in &CONTINUITY_EXPONENTS {
        let (ratio, last) = column_summary(&rows, q);
        let label = q_label(q);
        report.checks.push(Check::below(format!("decreasing_from_j4_q{label}"), ratio, 1.0).with_note("largest value(j+1)/value(j) for j >= 4"));
        report.checks.push(Check::below(format!("final_value_q{label}"), last, CONTINUITY_FINAL_BOUND));
        summary.insert(label, json!({"largest_successive_ratio": ratio, "value_at_j16": last}));
    }
    report.result("columns", serde_json::Value::Object(summary));
    report.note("the datum is the degree-N Hermite projection of the bump; both terms of the difference use it");
    report.tables.push(table);
    Ok(report)
}
