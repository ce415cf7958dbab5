//! Run configuration: TOML ingestion with per-field diagnostics, named
//! parameter presets, defaults, and serialization for reproducible runs.
//!
//! A config document is a flat key-value TOML file with `[model]`,
//! `[kernel]`, `[run]` and (for stability maps) `[sweep]` sections. Every
//! field is optional; missing fields fall back to the base configuration
//! (a preset, or the baseline study parameters). Unknown keys are
//! rejected.

use epiwave_core::error::ModelError;
use epiwave_core::sim::{default_dt, SimKernel};
use epiwave_core::{ModelParams, State, UniformKernel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What the run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Simulate,
    Equilibria,
    Hopf,
    StabilityMap,
    Multistability,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::Equilibria => "equilibria",
            Scenario::Hopf => "hopf",
            Scenario::StabilityMap => "stability-map",
            Scenario::Multistability => "multistability",
        }
    }
}

/// Parameter swept by the stability-map scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Q1,
    Q2,
    Delta,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Q1 => "q1",
            SweepParam::Q2 => "q2",
            SweepParam::Delta => "delta",
        }
    }

    pub fn apply(&self, mut params: ModelParams, value: f64) -> ModelParams {
        match self {
            SweepParam::Q1 => params.q1 = value,
            SweepParam::Q2 => params.q2 = value,
            SweepParam::Delta => params.delta = value,
        }
        params
    }
}

/// Inclusive arithmetic sweep over one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let v = self.start + self.step * k as f64;
            if v > self.stop * (1.0 + 1e-12) + 1e-15 {
                break;
            }
            out.push(v);
            k += 1;
        }
        out
    }
}

/// Numeric controls for the runners.
#[derive(Debug, Clone, PartialEq)]
pub struct Controls {
    /// Integrator step; derived from the kernel and recovery time scale
    /// when absent.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Largest reporting delay scanned for critical values.
    pub t_max: f64,
    /// Upper end of the K-root scan; the coefficient-scale default is used
    /// when absent.
    pub x_max: Option<f64>,
    pub tail_fraction: f64,
    pub out_stride: usize,
    /// Constant initial history `(S, V, Q, I)`.
    pub initial: [f64; 4],
    /// Track the recovered compartment from this initial value.
    pub initial_r: Option<f64>,
    /// Emit the Lyapunov monitor column.
    pub lyapunov: bool,
    /// Initial infection levels probed by the multistability scenario.
    pub levels: Vec<f64>,
}

/// A fully resolved, validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub model: ModelParams,
    pub kernel: UniformKernel,
    pub controls: Controls,
    pub sweep: Option<SweepAxis>,
}

impl RunConfig {
    pub fn sim_kernel(&self) -> SimKernel {
        SimKernel::Uniform(self.kernel)
    }

    pub fn resolved_dt(&self) -> Result<f64, epiwave_core::SimError> {
        match self.controls.dt {
            Some(dt) => Ok(dt),
            None => default_dt(&self.model, &self.kernel),
        }
    }

    pub fn initial_state(&self) -> State {
        let [s, v, q, i] = self.controls.initial;
        match self.controls.initial_r {
            Some(r) => State::with_r(s, v, q, i, r),
            None => State::new(s, v, q, i),
        }
    }
}

/// Configuration failures, reported before any computation starts.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("invalid model parameters: {0}")]
    Model(#[from] ModelError),

    #[error("`model.beta` and `model.r0` are mutually exclusive; give one")]
    BetaAndR0,

    #[error("`{field}` must be {requirement}, got {value}")]
    InvalidField {
        field: &'static str,
        requirement: &'static str,
        value: String,
    },

    #[error("scenario `stability-map` requires a [sweep] section")]
    MissingSweep,

    #[error("[sweep] only applies to the stability-map scenario")]
    UnexpectedSweep,

    #[error("[sweep] needs `param`, `start`, `stop` and `step`")]
    IncompleteSweep,

    #[error("unknown preset `{0}`; expected one of {names}", names = PRESET_NAMES.join("|"))]
    UnknownPreset(String),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel: Option<KernelDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepDoc>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    b: Option<f64>,
    beta: Option<f64>,
    /// Alternative to `beta`: derive it from a target reproduction number.
    r0: Option<f64>,
    gamma: Option<f64>,
    lambda: Option<f64>,
    mu: Option<f64>,
    rho: Option<f64>,
    sigma: Option<f64>,
    delta: Option<f64>,
    alpha: Option<f64>,
    q1: Option<f64>,
    q2: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelDoc {
    reporting_delay: Option<f64>,
    window: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    scenario: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    t_end: Option<f64>,
    t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_max: Option<f64>,
    tail_fraction: Option<f64>,
    out_stride: Option<usize>,
    initial: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_r: Option<f64>,
    lyapunov: Option<bool>,
    levels: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    param: Option<SweepParam>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

/// Parses a config document against the baseline defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with_base(text, &baseline_preset())
}

/// Parses a config document; every missing field keeps the base's value.
pub fn parse_config_with_base(text: &str, base: &RunConfig) -> Result<RunConfig, ConfigError> {
    let doc: ConfigDoc = toml::from_str(text)?;
    let mut cfg = base.clone();

    if let Some(m) = doc.model {
        if m.beta.is_some() && m.r0.is_some() {
            return Err(ConfigError::BetaAndR0);
        }
        let p = &mut cfg.model;
        set(&mut p.b, m.b);
        set(&mut p.gamma, m.gamma);
        set(&mut p.lambda, m.lambda);
        set(&mut p.mu, m.mu);
        set(&mut p.rho, m.rho);
        set(&mut p.sigma, m.sigma);
        set(&mut p.delta, m.delta);
        set(&mut p.alpha, m.alpha);
        set(&mut p.q1, m.q1);
        set(&mut p.q2, m.q2);
        if let Some(beta) = m.beta {
            p.beta = beta;
        } else if let Some(r0) = m.r0 {
            *p = p.with_r0(r0);
        }
    }
    if let Some(k) = doc.kernel {
        set(&mut cfg.kernel.reporting_delay, k.reporting_delay);
        set(&mut cfg.kernel.window, k.window);
    }
    if let Some(r) = doc.run {
        set(&mut cfg.scenario, r.scenario);
        if r.dt.is_some() {
            cfg.controls.dt = r.dt;
        }
        set(&mut cfg.controls.t_end, r.t_end);
        set(&mut cfg.controls.t_max, r.t_max);
        if r.x_max.is_some() {
            cfg.controls.x_max = r.x_max;
        }
        set(&mut cfg.controls.tail_fraction, r.tail_fraction);
        set(&mut cfg.controls.out_stride, r.out_stride);
        set(&mut cfg.controls.initial, r.initial);
        if r.initial_r.is_some() {
            cfg.controls.initial_r = r.initial_r;
        }
        set(&mut cfg.controls.lyapunov, r.lyapunov);
        set(&mut cfg.controls.levels, r.levels);
    }
    if let Some(s) = doc.sweep {
        let base_sweep = cfg.sweep;
        let pick = |field: Option<f64>, fallback: Option<f64>| field.or(fallback);
        let param = s.param.or(base_sweep.map(|b| b.param));
        let start = pick(s.start, base_sweep.map(|b| b.start));
        let stop = pick(s.stop, base_sweep.map(|b| b.stop));
        let step = pick(s.step, base_sweep.map(|b| b.step));
        match (param, start, stop, step) {
            (Some(param), Some(start), Some(stop), Some(step)) => {
                cfg.sweep = Some(SweepAxis {
                    param,
                    start,
                    stop,
                    step,
                });
            }
            _ => return Err(ConfigError::IncompleteSweep),
        }
    }

    validate(&cfg)?;
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Serializes the full configuration; `parse_config` restores it exactly.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let p = cfg.model;
    let doc = ConfigDoc {
        model: Some(ModelDoc {
            b: Some(p.b),
            beta: Some(p.beta),
            r0: None,
            gamma: Some(p.gamma),
            lambda: Some(p.lambda),
            mu: Some(p.mu),
            rho: Some(p.rho),
            sigma: Some(p.sigma),
            delta: Some(p.delta),
            alpha: Some(p.alpha),
            q1: Some(p.q1),
            q2: Some(p.q2),
        }),
        kernel: Some(KernelDoc {
            reporting_delay: Some(cfg.kernel.reporting_delay),
            window: Some(cfg.kernel.window),
        }),
        run: Some(RunDoc {
            scenario: Some(cfg.scenario),
            dt: cfg.controls.dt,
            t_end: Some(cfg.controls.t_end),
            t_max: Some(cfg.controls.t_max),
            x_max: cfg.controls.x_max,
            tail_fraction: Some(cfg.controls.tail_fraction),
            out_stride: Some(cfg.controls.out_stride),
            initial: Some(cfg.controls.initial),
            initial_r: cfg.controls.initial_r,
            lyapunov: Some(cfg.controls.lyapunov),
            levels: Some(cfg.controls.levels.clone()),
        }),
        sweep: cfg.sweep.map(|s| SweepDoc {
            param: Some(s.param),
            start: Some(s.start),
            stop: Some(s.stop),
            step: Some(s.step),
        }),
    };
    toml::to_string(&doc).expect("config serialization cannot fail")
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    cfg.model.validate()?;
    UniformKernel::new(cfg.kernel.reporting_delay, cfg.kernel.window)?;

    let positive: [(&'static str, f64); 2] = [
        ("run.t_end", cfg.controls.t_end),
        ("run.t_max", cfg.controls.t_max),
    ];
    for (field, value) in positive {
        if !(value.is_finite() && value > 0.0) {
            return Err(ConfigError::InvalidField {
                field,
                requirement: "positive and finite",
                value: value.to_string(),
            });
        }
    }
    if let Some(dt) = cfg.controls.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ConfigError::InvalidField {
                field: "run.dt",
                requirement: "positive and finite",
                value: dt.to_string(),
            });
        }
    }
    if let Some(x) = cfg.controls.x_max {
        if !(x.is_finite() && x > 0.0) {
            return Err(ConfigError::InvalidField {
                field: "run.x_max",
                requirement: "positive and finite",
                value: x.to_string(),
            });
        }
    }
    if !(cfg.controls.tail_fraction > 0.0 && cfg.controls.tail_fraction <= 1.0) {
        return Err(ConfigError::InvalidField {
            field: "run.tail_fraction",
            requirement: "in (0, 1]",
            value: cfg.controls.tail_fraction.to_string(),
        });
    }
    if cfg.controls.out_stride == 0 {
        return Err(ConfigError::InvalidField {
            field: "run.out_stride",
            requirement: "at least 1",
            value: "0".into(),
        });
    }
    for v in cfg.controls.initial {
        if !(v.is_finite() && v >= 0.0) {
            return Err(ConfigError::InvalidField {
                field: "run.initial",
                requirement: "componentwise nonnegative and finite",
                value: v.to_string(),
            });
        }
    }
    if let Some(r) = cfg.controls.initial_r {
        if !(r.is_finite() && r >= 0.0) {
            return Err(ConfigError::InvalidField {
                field: "run.initial_r",
                requirement: "nonnegative and finite",
                value: r.to_string(),
            });
        }
    }
    for v in &cfg.controls.levels {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(ConfigError::InvalidField {
                field: "run.levels",
                requirement: "nonnegative and finite",
                value: v.to_string(),
            });
        }
    }
    if cfg.scenario == Scenario::Multistability && cfg.controls.levels.is_empty() {
        return Err(ConfigError::InvalidField {
            field: "run.levels",
            requirement: "nonempty for the multistability scenario",
            value: "[]".into(),
        });
    }

    match (cfg.scenario, &cfg.sweep) {
        (Scenario::StabilityMap, None) => return Err(ConfigError::MissingSweep),
        (Scenario::StabilityMap, Some(s)) => {
            if !(s.step.is_finite() && s.step > 0.0) {
                return Err(ConfigError::InvalidField {
                    field: "sweep.step",
                    requirement: "positive and finite",
                    value: s.step.to_string(),
                });
            }
            if !(s.start.is_finite() && s.stop.is_finite() && s.stop >= s.start) {
                return Err(ConfigError::InvalidField {
                    field: "sweep.stop",
                    requirement: "finite and >= sweep.start",
                    value: format!("{}..{}", s.start, s.stop),
                });
            }
        }
        (_, Some(_)) => return Err(ConfigError::UnexpectedSweep),
        _ => {}
    }
    Ok(())
}

/// Preset names accepted by `--preset`.
pub const PRESET_NAMES: [&str; 8] = [
    "baseline", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig12",
];

/// Baseline study parameters: unit population cap (`b = mu = 1/80`),
/// two-week infections (`gamma = 24`), quarantine efficacy 70%
/// (`sigma = 0.3`), three-month information window, and `R0 = 2.5`
/// (`beta = 60.03125`).
pub fn baseline_preset() -> RunConfig {
    RunConfig {
        scenario: Scenario::Hopf,
        model: ModelParams {
            b: 1.0 / 80.0,
            beta: 60.03125,
            gamma: 24.0,
            lambda: 0.1,
            mu: 1.0 / 80.0,
            rho: 0.1,
            sigma: 0.3,
            delta: 12.0,
            alpha: 1.0,
            q1: 75.0,
            q2: 10.0,
        },
        kernel: UniformKernel {
            reporting_delay: 0.5,
            window: 0.25,
        },
        controls: Controls {
            dt: None,
            t_end: 400.0,
            t_max: 40.0,
            x_max: None,
            tail_fraction: 0.15,
            out_stride: 100,
            initial: [0.4, 0.01, 0.001, 5e-4],
            initial_r: None,
            lyapunov: false,
            levels: Vec::new(),
        },
        sweep: None,
    }
}

/// Named presets reproducing the published case studies.
pub fn preset(name: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = baseline_preset();
    match name {
        "baseline" => {}
        // Prevalence-cubic case studies: single, double and triple
        // positive roots.
        "fig2" => {
            cfg.scenario = Scenario::Equilibria;
            cfg.model = ModelParams {
                b: 0.52,
                beta: 0.039,
                gamma: 0.1,
                lambda: 0.002,
                mu: 0.045,
                rho: 5.0,
                sigma: 0.5,
                delta: 140.0,
                alpha: 130.0,
                q1: 120.0,
                q2: 90.0,
            };
        }
        "fig3" => {
            cfg.scenario = Scenario::Equilibria;
            cfg.model = ModelParams {
                b: 0.52,
                beta: 0.04,
                gamma: 0.1,
                lambda: 0.00200000043,
                mu: 0.045,
                rho: 0.2,
                sigma: 0.5,
                delta: 140.0001,
                alpha: 177.46,
                q1: 509.99856,
                q2: 30.0,
            };
        }
        "fig4" => {
            cfg.scenario = Scenario::Equilibria;
            cfg.model = ModelParams {
                b: 0.52,
                beta: 0.04,
                gamma: 0.1,
                lambda: 0.002,
                mu: 0.045,
                rho: 0.2,
                sigma: 0.5,
                delta: 140.0,
                alpha: 270.0,
                q1: 510.0,
                q2: 30.0,
            };
        }
        // Trajectory showcases: eradication, stable endemic, epidemic
        // waves. The horizons give the slowest mode (rate mu or the weakly
        // damped pair) time to settle inside the classifier tolerance.
        "fig5" => {
            cfg.scenario = Scenario::Simulate;
            cfg.model = cfg.model.with_r0(0.5);
            cfg.kernel.reporting_delay = 2.0;
            cfg.controls.t_end = 800.0;
            cfg.controls.tail_fraction = 0.1;
        }
        "fig6" => {
            cfg.scenario = Scenario::Simulate;
            cfg.kernel.reporting_delay = 0.5;
        }
        "fig7" => {
            cfg.scenario = Scenario::Simulate;
            cfg.kernel.reporting_delay = 0.9;
        }
        // Multistable regime with three endemic equilibria; the probe
        // levels land in the basins of the smallest and largest. The
        // explicit dt keeps dt * (q1 + q2) * conv below one at the high
        // probe level, the positivity bound of the forward scheme.
        "fig12" => {
            cfg.scenario = Scenario::Multistability;
            cfg.controls.dt = Some(5e-4);
            cfg.model = ModelParams {
                b: 0.52,
                beta: 0.04,
                gamma: 0.1,
                lambda: 0.00200000043,
                mu: 0.045,
                rho: 0.2,
                sigma: 0.5,
                delta: 140.0001,
                alpha: 177.46,
                q1: 509.99856,
                q2: 15.0,
            };
            cfg.kernel.reporting_delay = 0.5;
            cfg.controls.t_end = 600.0;
            cfg.controls.tail_fraction = 0.1;
            cfg.controls.levels = vec![0.01, 2.0];
        }
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    }
    Ok(cfg)
}
