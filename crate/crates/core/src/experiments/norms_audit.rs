use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::fields::{orlicz_family, orlicz_grid, sample_profile, smoothed_indicator};
use super::{num, Cell, Check, ExperimentConfig, NormsAuditConfig, Report, Table};
use crate::error::Result;
use crate::hermite::{Grid, PhysicalField};
use crate::orlicz::{
    check_embedding_explp_from_lq_linf, check_embedding_lq_from_explp, check_exp_moment_bound, equivalence_e32, gamma, lq_norm, luxemburg_norm,
    YoungFunction,
};

pub const GAMMA_TOLERANCE: f64 = 1e-13;
pub const HOMOGENEITY_TOLERANCE: f64 = 1e-7;
pub const POWER_KIND_TOLERANCE: f64 = 1e-7;
pub const INDICATOR_TOLERANCE: f64 = 0.01;
pub const GRID_REFINEMENT_TOLERANCE: f64 = 0.005;
/// Allowed relative drift of the norm-equivalence band from its baseline.
pub const E32_BAND_TOLERANCE: f64 = 0.05;
/// Largest allowed max/min ratio of the norm-equivalence ratio across the family.
pub const E32_SPREAD_LIMIT: f64 = 10.0;
/// `(min, max)` of `(‖g‖_{L^2} + ‖g‖_{L^φ})/‖g‖_{exp L^2}` over the family,
/// recorded from the first audited run.
pub const E32_BASELINE: (f64, f64) = (1.522_807_883_423_082_5, 1.614_959_086_083_339);
/// Exponent of the norm-equivalence audit.
pub const E32_EXPONENT: f64 = 2.0;
pub const MOMENT_DRAWS: usize = 20;

const GRID_POINTS: usize = 2801;
const LQ_FROM_EXP: [(f64, f64); 6] = [(1.0, 1.0), (1.0, 2.0), (1.0, 4.0), (2.0, 2.0), (2.0, 4.0), (2.0, 6.0)];
const EXP_FROM_LQ: [(f64, f64); 5] = [(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (3.0, 1.0), (3.0, 2.0)];

/// Reference values of `Γ` at a few points.
const GAMMA_TABLE: [(f64, f64); 7] = [
    (1.0, 1.0),
    (2.0, 1.0),
    (5.0, 24.0),
    (0.5, 1.772_453_850_905_516),
    (1.5, 0.886_226_925_452_758),
    (1.0 / 3.0, 2.678_938_534_707_747_6),
    (7.25, 1_155.381_013_919_989_7),
];

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

struct Audit {
    table: Table,
}

impl Audit {
    fn row(&mut self, check: &str, field: &str, params: String, lhs: f64, rhs: f64, passed: bool) {
        self.table.push(vec![check.into(), field.into(), params.into(), lhs.into(), rhs.into(), (rhs - lhs).into(), Cell::Bool(passed)]);
    }
}

/// Luxemburg norm of `c·1_{[−m/2, m/2]}` for `φ(s) = e^{s^p} − 1`.
pub fn indicator_closed_form(c: f64, m: f64, p: f64) -> f64 {
    c / (1.0 + 1.0 / m).ln().powf(1.0 / p)
}

pub(super) fn run(config: &ExperimentConfig, c: &NormsAuditConfig) -> Result<Report> {
    let mut report = Report::new(config);
    let mut audit = Audit { table: Table::new("checks", &["check", "field", "params", "lhs", "rhs", "margin", "passed"]) };
    let grid = orlicz_grid(GRID_POINTS)?;
    let fine_grid = orlicz_grid(2 * GRID_POINTS - 1)?;
    let family: Vec<(&str, PhysicalField<f64>)> =
        orlicz_family().iter().map(|p| Ok((p.name, sample_profile(p, grid.clone())?))).collect::<Result<_>>()?;

    let mut worst = 0.0f64;
    for &(x, want) in &GAMMA_TABLE {
        let got = gamma(x)?;
        let e = rel(got, want);
        audit.row("gamma", "", format!("x={x}"), got, want, e <= GAMMA_TOLERANCE);
        worst = worst.max(e);
    }
    report.checks.push(Check::at_most("gamma_table", worst, GAMMA_TOLERANCE));

    let phis = [YoungFunction::exp_lp(1.0)?, YoungFunction::exp_lp(2.0)?, YoungFunction::exp_lp_reduced(2.0)?, YoungFunction::power(3.0)?];
    let mut worst = 0.0f64;
    for (name, f) in &family {
        for phi in phis {
            let base = luxemburg_norm(f, phi)?.value;
            for s in [0.5, 3.0] {
                let scaled = luxemburg_norm(&f.scaled(s)?, phi)?.value;
                let e = rel(scaled, s * base);
                audit.row("homogeneity", name, format!("{phi:?} c={s}"), scaled, s * base, e <= HOMOGENEITY_TOLERANCE);
                worst = worst.max(e);
            }
        }
    }
    report.checks.push(Check::at_most("luxemburg_homogeneity", worst, HOMOGENEITY_TOLERANCE));

    let mut worst = 0.0f64;
    for (name, f) in &family {
        for q in [1.0, 2.0, 4.0] {
            let lux = luxemburg_norm(f, YoungFunction::power(q)?)?.value;
            let lq = lq_norm(f, q)?.value;
            let e = rel(lux, lq);
            audit.row("power_kind_equals_lq", name, format!("q={q}"), lux, lq, e <= POWER_KIND_TOLERANCE);
            worst = worst.max(e);
        }
    }
    report.checks.push(Check::at_most("power_kind_equals_lq", worst, POWER_KIND_TOLERANCE));

    let plateau_grid = Arc::new(Grid::uniform(1, 3.0, 24001)?);
    let mut worst = 0.0f64;
    for (height, measure, p) in [(1.0, 1.0, 1.0), (1.0, 1.0, 2.0), (2.0, 0.5, 1.0), (2.0, 0.5, 2.0), (0.5, 2.0, 3.0)] {
        let f = PhysicalField::sample(plateau_grid.clone(), |x| smoothed_indicator(x[0], height, measure, 1e-3))?;
        let got = luxemburg_norm(&f, YoungFunction::exp_lp(p)?)?.value;
        let want = indicator_closed_form(height, measure, p);
        let e = rel(got, want);
        audit.row("indicator_closed_form", "smoothed_indicator", format!("c={height} m={measure} p={p}"), got, want, e <= INDICATOR_TOLERANCE);
        worst = worst.max(e);
    }
    report.checks.push(Check::at_most("indicator_closed_form", worst, INDICATOR_TOLERANCE));

    let mut min_margin = f64::INFINITY;
    let mut all = true;
    let mut min_sharp_margin = f64::INFINITY;
    for (name, f) in &family {
        for &(p, q) in &LQ_FROM_EXP {
            let r = check_embedding_lq_from_explp(f, p, q)?;
            audit.row("lq_from_exp_lp", name, format!("p={p} q={q}"), r.lhs, r.rhs, r.holds);
            if let Some(sharp) = r.sharp_rhs {
                audit.row("lq_from_exp_lp_sharp_constant", name, format!("p={p} q={q}"), r.lhs, sharp, r.holds_sharp.unwrap_or(false));
                min_sharp_margin = min_sharp_margin.min(sharp - r.lhs);
            }
            all &= r.holds;
            min_margin = min_margin.min(r.margin);
        }
    }
    report.checks.push(
        Check::flag("embedding_lq_from_exp_lp", all)
            .with_note(format!("smallest margin {min_margin:e}; smallest margin with the Gamma(q/p+1) constant {min_sharp_margin:e}")),
    );

    let mut min_margin = f64::INFINITY;
    let mut all = true;
    for (name, f) in &family {
        for &(p, q) in &EXP_FROM_LQ {
            let r = check_embedding_explp_from_lq_linf(f, p, q)?;
            audit.row("exp_lp_from_lq_linf", name, format!("p={p} q={q}"), r.lhs, r.rhs, r.holds);
            all &= r.holds;
            min_margin = min_margin.min(r.margin);
        }
    }
    report.checks.push(Check::flag("embedding_exp_lp_from_lq_linf", all).with_note(format!("smallest margin {min_margin:e}")));

    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut all = true;
    let mut min_margin = f64::INFINITY;
    for draw in 0..MOMENT_DRAWS {
        let (name, base) = &family[rng.gen_range(0..family.len())];
        let u = base.scaled(rng.gen_range(0.2..2.0))?;
        let p = rng.gen_range(1.0..3.0);
        let q = rng.gen_range(1.0..4.0);
        let exp_norm = luxemburg_norm(&u, YoungFunction::exp_lp(p)?)?.value;
        let k = exp_norm * rng.gen_range(1.0..1.5);
        let lambda = rng.gen_range(0.05..=1.0) / (q * k.powf(p));
        let r = check_exp_moment_bound(&u, lambda, p, q, k)?;
        audit.row("exp_moment_bound", name, format!("draw={draw} p={p:.4} q={q:.4} K={k:.4e} lambda={lambda:.4e}"), r.lhs, r.bound, r.holds);
        all &= r.holds;
        min_margin = min_margin.min(r.bound - r.lhs);
    }
    report.checks.push(Check::flag("exp_moment_bound", all).with_note(format!("{MOMENT_DRAWS} seeded draws; smallest margin {min_margin:e}")));

    let mut ratios = Vec::new();
    for (name, f) in &family {
        let r = equivalence_e32(f, E32_EXPONENT)?;
        audit.row("norm_equivalence_ratio", name, format!("p={E32_EXPONENT}"), r.ratio, f64::NAN, true);
        ratios.push(r.ratio);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    report.checks.push(Check::at_most("norm_equivalence_spread", hi / lo, E32_SPREAD_LIMIT));
    let drift = rel(lo, E32_BASELINE.0).max(rel(hi, E32_BASELINE.1));
    report.checks.push(
        Check::at_most("norm_equivalence_band_vs_baseline", drift, E32_BAND_TOLERANCE)
            .with_note(format!("baseline band [{}, {}]", E32_BASELINE.0, E32_BASELINE.1)),
    );
    report.result(
        "norm_equivalence_band",
        json!({"min": num(lo), "max": num(hi), "baseline_min": num(E32_BASELINE.0), "baseline_max": num(E32_BASELINE.1)}),
    );

    let mut worst = 0.0f64;
    for profile in orlicz_family().iter() {
        let coarse = sample_profile(profile, grid.clone())?;
        let fine = sample_profile(profile, fine_grid.clone())?;
        let norms = |f: &PhysicalField<f64>| -> Result<Vec<f64>> {
            Ok(vec![
                lq_norm(f, 1.0)?.value,
                lq_norm(f, 2.0)?.value,
                lq_norm(f, f64::INFINITY)?.value,
                luxemburg_norm(f, YoungFunction::exp_lp(1.0)?)?.value,
                luxemburg_norm(f, YoungFunction::exp_lp(2.0)?)?.value,
            ])
        };
        for ((a, b), label) in norms(&coarse)?.into_iter().zip(norms(&fine)?).zip(["L1", "L2", "Linf", "expL1", "expL2"]) {
            let e = rel(a, b);
            audit.row("grid_refinement", profile.name, label.to_string(), a, b, e < GRID_REFINEMENT_TOLERANCE);
            worst = worst.max(e);
        }
    }
    report.checks.push(Check::below("grid_refinement_change", worst, GRID_REFINEMENT_TOLERANCE));

    report.result("grid", json!({"half_width": super::fields::ORLICZ_HALF_WIDTH, "points": GRID_POINTS}));
    report.tables.push(audit.table);
    Ok(report)
}
