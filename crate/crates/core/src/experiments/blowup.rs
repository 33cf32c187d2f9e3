use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde_json::json;

use super::{num, BlowupConfig, Check, ExperimentConfig, Report, Table, BLOWUP_LEVELS};
use crate::error::Result;
use crate::hermite::PointFn;
use crate::propagator::{mehler_point, mehler_radial_point};
use crate::quadrature::gauss_legendre;

/// Ratio `I_{ℓ+1}/I_ℓ` at or above which a rung counts as growing.
pub const DIVERGENCE_RATIO: f64 = 2.0;
/// Gauss–Legendre nodes per panel in time and space.
const PANEL_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    DivergenceIndicated,
    Bounded,
    /// Fewer than three rungs produced a value.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupLevel {
    pub level: usize,
    /// Start of the resolved time range; `(0, t_min)` contributes `t_min·|B_r|`.
    pub t_min: f64,
    pub time_nodes: usize,
    pub space_nodes: usize,
    /// `log I_ℓ`, absent if the kernel quadrature failed on this rung.
    pub log_integral: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaProbe {
    pub alpha: f64,
    pub levels: Vec<BlowupLevel>,
    /// `I_{ℓ+1}/I_ℓ` for consecutive rungs.
    pub ratios: Vec<Option<f64>>,
    pub verdict: ProbeVerdict,
    /// `d/2 − λCα^p/2` with the measured `C`.
    pub exponent: f64,
    /// Largest value of `u₀` at a quadrature node.
    pub max_sampled_u0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupProbeReport {
    pub d: usize,
    pub p: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub r: f64,
    /// `min (e^{-tH}u₀)^p / (α^p (−log 4|x|))` over the nodes with
    /// `√t/2 < |x| < √t`, `t < min(ε, ρ²)`, `ρ = min(r, 1/4)`.
    pub empirical_c: f64,
    /// `((d + 2)/(Cλ))^{1/p}`.
    pub alpha0: f64,
    pub probes: Vec<AlphaProbe>,
}

/// `(−log|x|)^{1/p}` on `|x| < 1`, recording the largest value it returns.
struct LogProfile {
    inv_p: f64,
    max_seen: AtomicU64,
}

impl LogProfile {
    fn new(p: f64) -> Self {
        Self { inv_p: 1.0 / p, max_seen: AtomicU64::new(0) }
    }

    fn radial(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let v = (-s.ln()).powf(self.inv_p);
        // Nonnegative doubles order like their bit patterns.
        self.max_seen.fetch_max(v.to_bits(), Ordering::Relaxed);
        v
    }

    fn max_seen(&self) -> f64 {
        f64::from_bits(self.max_seen.load(Ordering::Relaxed))
    }
}

impl PointFn<f64> for LogProfile {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.radial(x[0].abs())
    }

    fn kinks(&self, _axis: usize, _fixed: &[f64]) -> Vec<f64> {
        vec![-1.0, 0.0, 1.0]
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
fn panel(a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> impl Iterator<Item = (f64, f64)> + '_ {
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    rule.0.iter().zip(&rule.1).map(move |(x, w)| (mid + half * x, half * w))
}

/// `|B_r|` in dimension `d`.
fn ball_volume(d: usize, r: f64) -> f64 {
    if d == 1 {
        2.0 * r
    } else {
        std::f64::consts::PI * r * r
    }
}

/// Quadrature nodes of one rung: time nodes with weights, and for each time
/// the radial nodes with weights that include the sphere measure.
struct Rung {
    t_min: f64,
    times: Vec<(f64, f64)>,
    space: Vec<Vec<(f64, f64)>>,
}

fn rung(level: usize, d: usize, epsilon: f64, r: f64) -> Rung {
    let rule = gauss_legendre::<f64>(PANEL_NODES);
    let t_min = epsilon / 3f64.powi(level as i32);
    // Geometric segments [ε3^{-j-1}, ε3^{-j}], each cut into `level` panels in log t.
    let mut times = Vec::new();
    for j in 0..level {
        let hi = (epsilon / 3f64.powi(j as i32)).ln();
        let lo = hi - 3f64.ln();
        let width = (hi - lo) / level as f64;
        for k in 0..level {
            let a = lo + width * k as f64;
            for (s, w) in panel(a, a + width, &rule) {
                let t = s.exp();
                times.push((t, w * t));
            }
        }
    }
    let shell = |rho: f64| if d == 1 { 2.0 } else { 2.0 * std::f64::consts::PI * rho };
    let space = times
        .iter()
        .map(|&(t, _)| {
            let s0 = t.sqrt();
            let mut cuts = vec![0.0];
            cuts.extend((1..=level + 1).rev().map(|k| s0 / 2f64.powi(k as i32)));
            let mut c = s0;
            while c < r {
                cuts.push(c);
                c *= 2.0;
            }
            cuts.retain(|&x| x < r);
            cuts.push(r);
            cuts.windows(2).flat_map(|w| panel(w[0], w[1], &rule).map(|(x, wt)| (x, wt * shell(x))).collect::<Vec<_>>()).collect()
        })
        .collect();
    Rung { t_min, times, space }
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `e^{-tH}u₀` for `α = 1` at every node of a rung.
fn kernel_values(rung: &Rung, d: usize, profile: &LogProfile) -> Result<Vec<Vec<f64>>> {
    let nodes: Vec<(usize, f64, f64)> =
        rung.times.iter().enumerate().flat_map(|(i, &(t, _))| rung.space[i].iter().map(move |&(rho, _)| (i, t, rho))).collect();
    let flat = nodes
        .par_iter()
        .map(|&(_, t, rho)| match d {
            1 => mehler_point(profile, t, &[rho]),
            _ => mehler_radial_point(|s| profile.radial(s), 1.0, &[1.0], t, rho),
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut out = Vec::with_capacity(rung.times.len());
    let mut it = flat.into_iter();
    for i in 0..rung.times.len() {
        out.push(it.by_ref().take(rung.space[i].len()).collect());
    }
    Ok(out)
}

/// `log ∫_{t_min}^{ε} ∫_{B_r} exp(λ(α v₁)^p) dx dt` plus the `(0, t_min)` slab.
fn log_integral(rung: &Rung, v1: &[Vec<f64>], alpha: f64, c: &BlowupConfig) -> f64 {
    let scale = c.lambda * alpha.powf(c.p);
    let slab = (rung.t_min * ball_volume(c.d, c.r)).ln();
    let body = rung.times.iter().enumerate().map(|(i, &(_, wt))| {
        let inner = log_sum_exp(rung.space[i].iter().zip(&v1[i]).map(|(&(_, w), &v)| w.ln() + scale * v.max(0.0).powf(c.p)));
        wt.ln() + inner
    });
    log_sum_exp(body.chain(std::iter::once(slab)))
}

/// Runs the refinement ladder for every configured `α`.
pub fn blowup_probe(c: &BlowupConfig) -> Result<BlowupProbeReport> {
    let profile = LogProfile::new(c.p);
    let mut rungs = Vec::new();
    for level in 1..=BLOWUP_LEVELS {
        let g = rung(level, c.d, c.epsilon, c.r);
        let values = kernel_values(&g, c.d, &profile).map_err(|e| e.to_string());
        rungs.push((level, g, values));
    }
    let max_unit = profile.max_seen();

    // Empirical constant from the finest successful rung.
    let rho = c.r.min(0.25);
    let eps_tilde = c.epsilon.min(rho * rho);
    let mut empirical_c = f64::INFINITY;
    if let Some((_, g, Ok(v1))) = rungs.iter().rev().find(|(_, _, v)| v.is_ok()) {
        for (i, &(t, _)) in g.times.iter().enumerate() {
            if t >= eps_tilde {
                continue;
            }
            let s0 = t.sqrt();
            for (&(x, _), &v) in g.space[i].iter().zip(&v1[i]) {
                if x > s0 / 2.0 && x < s0 && 4.0 * x < 1.0 {
                    empirical_c = empirical_c.min(v.max(0.0).powf(c.p) / (-(4.0 * x).ln()));
                }
            }
        }
    }
    let dd = c.d as f64;
    let alpha0 = ((dd + 2.0) / (empirical_c * c.lambda)).powf(1.0 / c.p);

    let probes = c
        .alphas
        .iter()
        .map(|&alpha| {
            let levels: Vec<BlowupLevel> = rungs
                .iter()
                .map(|(level, g, v)| BlowupLevel {
                    level: *level,
                    t_min: g.t_min,
                    time_nodes: g.times.len(),
                    space_nodes: g.space.iter().map(Vec::len).sum(),
                    log_integral: v.as_ref().ok().map(|v1| log_integral(g, v1, alpha, c)),
                    error: v.as_ref().err().cloned(),
                })
                .collect();
            let ratios: Vec<Option<f64>> = levels.windows(2).map(|w| Some((w[1].log_integral? - w[0].log_integral?).exp())).collect();
            // Verdict from the longest prefix of rungs that all produced a value.
            let ok = levels.iter().take_while(|l| l.log_integral.is_some()).count();
            let verdict = if ok < 3 {
                ProbeVerdict::Inconclusive
            } else {
                let last = &ratios[ok - 3..ok - 1];
                if last.iter().all(|r| r.is_some_and(|r| r >= DIVERGENCE_RATIO)) {
                    ProbeVerdict::DivergenceIndicated
                } else {
                    ProbeVerdict::Bounded
                }
            };
            AlphaProbe {
                alpha,
                levels,
                ratios,
                verdict,
                exponent: dd / 2.0 - c.lambda * empirical_c * alpha.powf(c.p) / 2.0,
                max_sampled_u0: alpha * max_unit,
            }
        })
        .collect();
    Ok(BlowupProbeReport { d: c.d, p: c.p, lambda: c.lambda, epsilon: c.epsilon, r: c.r, empirical_c, alpha0, probes })
}

/// Whether the verdicts never go from divergence back to bounded as `α` grows.
pub fn verdicts_monotone(report: &BlowupProbeReport) -> bool {
    let mut probes: Vec<&AlphaProbe> = report.probes.iter().filter(|p| p.verdict != ProbeVerdict::Inconclusive).collect();
    probes.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    probes.windows(2).all(|w| !(w[0].verdict == ProbeVerdict::DivergenceIndicated && w[1].verdict == ProbeVerdict::Bounded))
}

/// Whether every divergence-indicated probe has nondecreasing `I_ℓ`.
pub fn divergent_integrals_nondecreasing(report: &BlowupProbeReport) -> bool {
    report.probes.iter().filter(|p| p.verdict == ProbeVerdict::DivergenceIndicated).all(|p| p.ratios.iter().flatten().all(|&r| r >= 1.0))
}

pub(super) fn run(config: &ExperimentConfig, c: &BlowupConfig) -> Result<Report> {
    let mut report = Report::new(config);
    let probe = blowup_probe(c)?;
    let mut table = Table::new("ladder", &["alpha", "level", "t_min", "time_nodes", "space_nodes", "log_integral", "ratio_to_previous", "error"]);
    let mut summary = Vec::new();
    for a in &probe.probes {
        for (i, l) in a.levels.iter().enumerate() {
            let ratio = if i == 0 { None } else { a.ratios[i - 1] };
            table.push(vec![
                a.alpha.into(),
                l.level.into(),
                l.t_min.into(),
                l.time_nodes.into(),
                l.space_nodes.into(),
                l.log_integral.into(),
                ratio.into(),
                l.error.clone().unwrap_or_default().into(),
            ]);
        }
        summary.push(json!({
            "alpha": a.alpha,
            "verdict": a.verdict,
            "log_integrals": a.levels.iter().map(|l| l.log_integral.map_or(json!(null), num)).collect::<Vec<_>>(),
            "ratios": a.ratios.iter().map(|r| r.map_or(json!(null), num)).collect::<Vec<_>>(),
            "lower_bound_exponent": num(a.exponent),
            "max_sampled_u0": num(a.max_sampled_u0),
        }));
    }
    report.checks.push(Check::flag("verdict_monotone_in_alpha", verdicts_monotone(&probe)));
    report.checks.push(Check::flag("divergent_integrals_nondecreasing", divergent_integrals_nondecreasing(&probe)));
    report.checks.push(Check::flag("no_inconclusive_probe", probe.probes.iter().all(|p| p.verdict != ProbeVerdict::Inconclusive)));
    report.result("probes", json!(summary));
    report.result("empirical_c", num(probe.empirical_c));
    report.result("alpha0", num(probe.alpha0));
    report.result("divergence_ratio", num(DIVERGENCE_RATIO));
    report.note(format!(
        "divergence is indicated, not proven: a probe is divergence-indicated when I_(l+1)/I_l >= {DIVERGENCE_RATIO} on the last two rungs of the ladder"
    ));
    report.note("rung l integrates over (eps*3^-l, eps) with l log-time panels per factor of 3 and l+1 dyadic radial panels below sqrt(t)/2; (0, eps*3^-l) contributes the lower bound t_min*|B_r|");
    report.note("quadrature nodes never touch the origin, where u0 is singular; max_sampled_u0 records the largest sampled value");
    report.tables.push(table);
    Ok(report)
}
