use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

use super::Experiment;
use crate::propagator::{smoothing_admissible, MEHLER_MIN_TIME};
use crate::solver::feasible_exponents;

/// Problems with a configuration file. Raised before any computation starts.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config is not valid TOML: {0}")]
    Syntax(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("config names experiment `{config}` but `{requested}` was requested")]
    ExperimentMismatch { config: String, requested: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("key `{key}` does not apply to the {experiment} experiment")]
    Irrelevant { key: String, experiment: &'static str },

    #[error("key `{key}`: {message}")]
    Value { key: String, message: String },

    #[error("{0}")]
    Constraint(String),
}

pub const KNOWN_KEYS: [&str; 16] =
    ["experiment", "d", "beta", "p", "q", "m", "a", "N", "dt", "t_end", "alpha", "epsilon", "r", "lambda", "seed", "output"];

/// Keys accepted by every experiment.
const COMMON_KEYS: [&str; 3] = ["experiment", "seed", "output"];

impl Experiment {
    /// Parameters this experiment reads, besides `experiment`, `seed` and `output`.
    pub fn parameter_keys(self) -> &'static [&'static str] {
        match self {
            Experiment::PropagatorCheck => &["d", "beta", "N"],
            Experiment::SmoothingSweep => &["d", "beta", "p", "q", "N"],
            Experiment::Continuity => &["d", "beta", "N"],
            Experiment::NormsAudit => &[],
            Experiment::EnvelopeAudit => &["d", "beta", "p", "r"],
            Experiment::Decay => &["d", "beta", "p", "m", "a", "N", "dt", "t_end", "alpha", "epsilon", "lambda"],
            Experiment::BlowupProbe => &["d", "beta", "p", "lambda", "alpha", "epsilon", "r"],
        }
    }
}

/// Raw flat key-value table.
#[derive(Debug, Clone, Default)]
struct Table {
    entries: BTreeMap<String, toml::Value>,
}

fn value_err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.to_string(), message: message.into() }
}

fn as_number(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    match v {
        toml::Value::Float(x) if !x.is_nan() => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::String(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
        _ => Err(value_err(key, format!("expected a number, got {v}"))),
    }
}

impl Table {
    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.entries.get(key).map(|v| as_number(key, v)).transpose()
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn count(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(value_err(key, format!("expected a nonnegative integer, got {v}"))),
        }
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => {
                if items.is_empty() {
                    return Err(value_err(key, "list must not be empty"));
                }
                items.iter().map(|v| as_number(key, v)).collect::<Result<Vec<_>, _>>().map(Some)
            }
            Some(v) => Ok(Some(vec![as_number(key, v)?])),
        }
    }
}

fn finite_positive(key: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(value_err(key, format!("must be a finite positive number, got {x}")))
    }
}

fn dimension(t: &Table, default: usize) -> Result<usize, ConfigError> {
    match t.count("d")? {
        None => Ok(default),
        Some(d @ (1 | 2)) => Ok(d as usize),
        Some(d) => Err(value_err("d", format!("only dimensions 1 and 2 are supported, got {d}"))),
    }
}

fn degree(t: &Table, default: usize, max: usize) -> Result<usize, ConfigError> {
    match t.count("N")? {
        None => Ok(default),
        Some(n) if (2..=max as u64).contains(&n) => Ok(n as usize),
        Some(n) => Err(value_err("N", format!("must lie in 2..={max}, got {n}"))),
    }
}

fn beta(t: &Table) -> Result<f64, ConfigError> {
    finite_positive("beta", t.number_or("beta", 1.0)?)
}

/// JSON number, with non-finite values spelled out.
pub(crate) fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorCheckConfig {
    pub d: usize,
    pub beta: f64,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingConfig {
    pub d: usize,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityConfig {
    pub d: usize,
    pub beta: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormsAuditConfig {
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    /// `d > 2βp/(p−1)`.
    Kappa,
    /// `d/(2β) = p/(p−1)`.
    Zeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeRegime {
    pub kind: EnvelopeKind,
    pub d: usize,
    pub beta: f64,
    pub p: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    pub regimes: Vec<EnvelopeRegime>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayConfig {
    pub d: usize,
    pub beta: f64,
    pub p: f64,
    pub m: f64,
    pub a: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    /// `‖u₀‖_{exp L^p}`.
    pub alpha: f64,
    /// Scale of the nonlinearity.
    pub epsilon: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupConfig {
    pub d: usize,
    pub p: f64,
    pub lambda: f64,
    pub alphas: Vec<f64>,
    /// Time horizon of the space-time integral.
    pub epsilon: f64,
    /// Radius of the ball.
    pub r: f64,
}

/// Largest admissible data size for the decay experiment.
pub const DECAY_MAX_ALPHA: f64 = 1e-3;

/// Number of rungs on the blow-up refinement ladder.
pub const BLOWUP_LEVELS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentConfig {
    PropagatorCheck(PropagatorCheckConfig),
    SmoothingSweep(SmoothingConfig),
    Continuity(ContinuityConfig),
    NormsAudit(NormsAuditConfig),
    EnvelopeAudit(EnvelopeConfig),
    Decay(DecayConfig),
    BlowupProbe(BlowupConfig),
}

/// A validated configuration plus the optional output directory it names.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub experiment: ExperimentConfig,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn experiment(&self) -> Experiment {
        match self {
            ExperimentConfig::PropagatorCheck(_) => Experiment::PropagatorCheck,
            ExperimentConfig::SmoothingSweep(_) => Experiment::SmoothingSweep,
            ExperimentConfig::Continuity(_) => Experiment::Continuity,
            ExperimentConfig::NormsAudit(_) => Experiment::NormsAudit,
            ExperimentConfig::EnvelopeAudit(_) => Experiment::EnvelopeAudit,
            ExperimentConfig::Decay(_) => Experiment::Decay,
            ExperimentConfig::BlowupProbe(_) => Experiment::BlowupProbe,
        }
    }

    /// Defaults for `experiment` with no keys set.
    pub fn defaults(experiment: Experiment) -> Self {
        resolve(experiment, &Table::default(), None).expect("defaults are valid")
    }

    /// Every resolved parameter, for embedding in reports.
    pub fn to_json(&self) -> Value {
        let mut v = match self {
            ExperimentConfig::PropagatorCheck(c) => json!({"d": c.d, "beta": c.beta, "N": c.n, "seed": c.seed}),
            ExperimentConfig::SmoothingSweep(c) => {
                json!({"d": c.d, "beta": c.beta, "p": num(c.p), "q": num(c.q), "N": c.n, "seed": c.seed})
            }
            ExperimentConfig::Continuity(c) => json!({"d": c.d, "beta": c.beta, "N": c.n}),
            ExperimentConfig::NormsAudit(c) => json!({"seed": c.seed}),
            ExperimentConfig::EnvelopeAudit(c) => json!({
                "regimes": c.regimes.iter().map(|g| json!({
                    "envelope": match g.kind { EnvelopeKind::Kappa => "kappa", EnvelopeKind::Zeta => "zeta" },
                    "d": g.d, "beta": g.beta, "p": g.p, "r": g.r,
                })).collect::<Vec<_>>()
            }),
            ExperimentConfig::Decay(c) => json!({
                "d": c.d, "beta": c.beta, "p": c.p, "m": c.m, "a": c.a, "N": c.n, "dt": c.dt,
                "t_end": c.t_end, "alpha": c.alpha, "epsilon": c.epsilon, "lambda": c.lambda,
            }),
            ExperimentConfig::BlowupProbe(c) => json!({
                "d": c.d, "beta": 1.0, "p": c.p, "lambda": c.lambda, "alpha": c.alphas,
                "epsilon": c.epsilon, "r": c.r,
            }),
        };
        v["experiment"] = json!(self.experiment().name());
        v
    }
}

/// Parses and validates a flat TOML table for `requested`.
///
/// `seed_override` replaces any `seed` in the file.
pub fn parse_config(text: &str, requested: Experiment, seed_override: Option<u64>) -> Result<ResolvedConfig, ConfigError> {
    let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    let table = Table { entries: raw.into_iter().collect() };
    for key in table.entries.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        if !COMMON_KEYS.contains(&key.as_str()) && !requested.parameter_keys().contains(&key.as_str()) {
            return Err(ConfigError::Irrelevant { key: key.clone(), experiment: requested.name() });
        }
    }
    if let Some(v) = table.entries.get("experiment") {
        let name = v.as_str().ok_or_else(|| value_err("experiment", "expected a string"))?;
        let named = Experiment::parse(name).ok_or_else(|| ConfigError::UnknownExperiment(name.to_string()))?;
        if named != requested {
            return Err(ConfigError::ExperimentMismatch { config: name.to_string(), requested: requested.name().to_string() });
        }
    }
    let output = match table.entries.get("output") {
        None => None,
        Some(toml::Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
        Some(v) => return Err(value_err("output", format!("expected a nonempty path string, got {v}"))),
    };
    let experiment = resolve(requested, &table, seed_override)?;
    Ok(ResolvedConfig { experiment, output })
}

fn seed(t: &Table, seed_override: Option<u64>) -> Result<u64, ConfigError> {
    Ok(match seed_override {
        Some(s) => s,
        None => t.count("seed")?.unwrap_or(0),
    })
}

fn resolve(e: Experiment, t: &Table, seed_override: Option<u64>) -> Result<ExperimentConfig, ConfigError> {
    Ok(match e {
        Experiment::PropagatorCheck => {
            let d = dimension(t, 1)?;
            ExperimentConfig::PropagatorCheck(PropagatorCheckConfig {
                d,
                beta: beta(t)?,
                n: degree(t, if d == 1 { 40 } else { 24 }, 128)?,
                seed: seed(t, seed_override)?,
            })
        }
        Experiment::SmoothingSweep => {
            let d = dimension(t, 1)?;
            let b = beta(t)?;
            let p = t.number_or("p", 1.0)?;
            let q = t.number_or("q", f64::INFINITY)?;
            if !(p >= 1.0) || !(q >= 1.0) {
                return Err(ConfigError::Constraint(format!("need p >= 1 and q >= 1, got p = {p}, q = {q}")));
            }
            if p.is_infinite() {
                return Err(value_err("p", "p = inf has no finite L^p test fields to normalise against"));
            }
            if !smoothing_admissible(p, q, b) {
                return Err(ConfigError::Constraint(format!("(p, q) = ({p}, {q}) is not admissible for beta = {b}")));
            }
            ExperimentConfig::SmoothingSweep(SmoothingConfig {
                d,
                beta: b,
                p,
                q,
                n: degree(t, if d == 1 { 40 } else { 16 }, if d == 1 { 64 } else { 32 })?,
                seed: seed(t, seed_override)?,
            })
        }
        Experiment::Continuity => {
            let d = dimension(t, 1)?;
            ExperimentConfig::Continuity(ContinuityConfig { d, beta: beta(t)?, n: degree(t, if d == 1 { 64 } else { 40 }, 128)? })
        }
        Experiment::NormsAudit => ExperimentConfig::NormsAudit(NormsAuditConfig { seed: seed(t, seed_override)? }),
        Experiment::EnvelopeAudit => ExperimentConfig::EnvelopeAudit(resolve_envelope(t)?),
        Experiment::Decay => ExperimentConfig::Decay(resolve_decay(t)?),
        Experiment::BlowupProbe => ExperimentConfig::BlowupProbe(resolve_blowup(t)?),
    })
}

fn resolve_envelope(t: &Table) -> Result<EnvelopeConfig, ConfigError> {
    let any = ["d", "beta", "p", "r"].iter().any(|k| t.entries.contains_key(*k));
    if !any {
        return Ok(EnvelopeConfig {
            regimes: vec![
                EnvelopeRegime { kind: EnvelopeKind::Kappa, d: 5, beta: 1.0, p: 2.0, r: 3.0 },
                EnvelopeRegime { kind: EnvelopeKind::Zeta, d: 4, beta: 1.0, p: 2.0, r: 3.0 },
            ],
        });
    }
    let d = match t.count("d")? {
        None => 2,
        Some(d) if d >= 1 => d as usize,
        Some(_) => return Err(value_err("d", "must be at least 1")),
    };
    let b = beta(t)?;
    let p = t.number_or("p", 2.0)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(value_err("p", format!("need 1 < p < inf, got {p}")));
    }
    let r = t.number_or("r", 3.0)?;
    let critical = p / (p - 1.0);
    let scale = d as f64 / (2.0 * b);
    let kind = if (scale - critical).abs() <= 1e-12 * critical {
        EnvelopeKind::Zeta
    } else if scale > critical {
        EnvelopeKind::Kappa
    } else {
        return Err(ConfigError::Constraint(format!(
            "neither envelope applies: need d > 2*beta*p/(p-1) or d/(2*beta) = p/(p-1), got d/(2*beta) = {scale}, p/(p-1) = {critical}"
        )));
    };
    if !(r > scale && r.is_finite()) {
        return Err(ConfigError::Constraint(format!("need r > d/(2*beta) = {scale}, got r = {r}")));
    }
    Ok(EnvelopeConfig { regimes: vec![EnvelopeRegime { kind, d, beta: b, p, r }] })
}

fn resolve_decay(t: &Table) -> Result<DecayConfig, ConfigError> {
    let d = dimension(t, 2)?;
    let b = beta(t)?;
    let p = t.number_or("p", 2.0)?;
    let m = t.number_or("m", 3.0)?;
    let a = t.number_or("a", 5.0)?;
    feasible_exponents(p, m, d, b, a).map_err(|e| ConfigError::Constraint(e.to_string()))?;
    let dt = finite_positive("dt", t.number_or("dt", 0.01)?)?;
    let t_end = finite_positive("t_end", t.number_or("t_end", 5.0)?)?;
    if t_end < 0.1 {
        return Err(value_err("t_end", format!("must be at least 0.1 to cover the Duhamel window, got {t_end}")));
    }
    if dt > t_end / 10.0 {
        return Err(value_err("dt", format!("need at least 10 steps: dt = {dt} exceeds t_end/10 = {}", t_end / 10.0)));
    }
    let alpha = finite_positive("alpha", t.number_or("alpha", DECAY_MAX_ALPHA)?)?;
    if alpha > DECAY_MAX_ALPHA {
        return Err(value_err("alpha", format!("small-data condition: ||u0||_(exp L^p) = {alpha} exceeds {DECAY_MAX_ALPHA}")));
    }
    let epsilon = t.number_or("epsilon", 1.0)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(value_err("epsilon", format!("must be finite and nonnegative, got {epsilon}")));
    }
    let lambda = t.number_or("lambda", 1.0)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(value_err("lambda", format!("must be finite and nonnegative, got {lambda}")));
    }
    Ok(DecayConfig { d, beta: b, p, m, a, n: degree(t, if d == 1 { 40 } else { 24 }, 128)?, dt, t_end, alpha, epsilon, lambda })
}

fn resolve_blowup(t: &Table) -> Result<BlowupConfig, ConfigError> {
    let d = dimension(t, 1)?;
    let b = t.number_or("beta", 1.0)?;
    if b != 1.0 {
        return Err(value_err("beta", format!("the kernel path needs beta = 1, got {b}")));
    }
    let p = t.number_or("p", 2.0)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(value_err("p", format!("need 1 < p < inf, got {p}")));
    }
    let lambda = finite_positive("lambda", t.number_or("lambda", 1.0)?)?;
    let alphas = t.numbers("alpha")?.unwrap_or_else(|| vec![0.1, 5.0, 10.0, 20.0]);
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(value_err("alpha", format!("every entry must be finite and nonnegative, got {a}")));
    }
    let epsilon = finite_positive("epsilon", t.number_or("epsilon", 0.1)?)?;
    let t_min = epsilon / 3f64.powi(BLOWUP_LEVELS as i32);
    if t_min < MEHLER_MIN_TIME {
        return Err(value_err(
            "epsilon",
            format!("the finest rung starts at epsilon/3^{BLOWUP_LEVELS} = {t_min:e}, below the kernel path minimum {MEHLER_MIN_TIME:e}"),
        ));
    }
    if epsilon > 1.0 {
        return Err(value_err("epsilon", format!("must not exceed 1, got {epsilon}")));
    }
    let r = finite_positive("r", t.number_or("r", 0.25)?)?;
    if r > 1.0 {
        return Err(value_err("r", format!("ball radius must not exceed 1, got {r}")));
    }
    Ok(BlowupConfig { d, p, lambda, alphas, epsilon, r })
}
