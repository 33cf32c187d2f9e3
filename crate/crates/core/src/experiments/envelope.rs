use serde_json::json;

use super::{num, Check, EnvelopeConfig, EnvelopeKind, EnvelopeRegime, ExperimentConfig, Report, Table};
use crate::error::Result;
use crate::orlicz::{kappa_envelope, kappa_integral, zeta_envelope, zeta_integral, EnvelopeIntegral};

/// Allowed relative change of the envelope integral under quadrature refinement.
pub const ENVELOPE_REFINEMENT_TOLERANCE: f64 = 0.01;

fn label(kind: EnvelopeKind) -> &'static str {
    match kind {
        EnvelopeKind::Kappa => "kappa",
        EnvelopeKind::Zeta => "zeta",
    }
}

pub fn regime_integral(g: &EnvelopeRegime) -> Result<EnvelopeIntegral<f64>> {
    match g.kind {
        EnvelopeKind::Kappa => kappa_integral(g.p, g.r, g.d, g.beta),
        EnvelopeKind::Zeta => zeta_integral(g.p, g.r, g.d, g.beta),
    }
}

fn regime_value(g: &EnvelopeRegime, t: f64) -> Result<f64> {
    match g.kind {
        EnvelopeKind::Kappa => kappa_envelope(t, g.p, g.r, g.d, g.beta),
        EnvelopeKind::Zeta => zeta_envelope(t, g.p, g.r, g.d, g.beta),
    }
}

pub(super) fn run(config: &ExperimentConfig, c: &EnvelopeConfig) -> Result<Report> {
    let mut report = Report::new(config);
    let mut samples = Table::new("samples", &["envelope", "t", "value"]);
    let mut integrals = Table::new("integrals", &["envelope", "d", "beta", "p", "r", "integral", "head", "tail", "refinement_change", "converged"]);
    let mut summary = Vec::new();
    for g in &c.regimes {
        let name = label(g.kind);
        for i in 0..=48 {
            let t = 10f64.powf(-6.0 + 0.25 * i as f64);
            samples.push(vec![name.into(), t.into(), regime_value(g, t)?.into()]);
        }
        let e = regime_integral(g)?;
        integrals.push(vec![
            name.into(),
            g.d.into(),
            g.beta.into(),
            g.p.into(),
            g.r.into(),
            e.value.into(),
            e.head.into(),
            e.tail.into(),
            e.refinement_change.into(),
            e.converged.into(),
        ]);
        report.checks.push(Check::flag(format!("{name}_integral_finite"), e.value.is_finite() && e.converged));
        report.checks.push(Check::below(format!("{name}_refinement_change"), e.refinement_change, ENVELOPE_REFINEMENT_TOLERANCE));
        summary.push(json!({"envelope": name, "integral": num(e.value), "head": num(e.head), "tail": num(e.tail), "refinement_change": num(e.refinement_change)}));
    }
    report.result("integrals", json!(summary));
    report.note("envelopes are evaluated with their free constant set to 1");
    report.tables.push(samples);
    report.tables.push(integrals);
    Ok(report)
}
