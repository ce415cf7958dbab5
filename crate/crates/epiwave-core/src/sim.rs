//! Forward integration of the delay system with the explicit Euler scheme
//! and a rectangle-rule Riemann sum for the distributed-delay convolution,
//! plus trajectory classification, a Lyapunov monitor, and a
//! multistability probe.
//!
//! The time grid must resolve the kernel exactly: `dt` has to divide both
//! the reporting delay `T` and the window `L`. Under the uniform kernel
//! only lags in `[T, T+L)` contribute, each with weight `dt / L`, so the
//! discrete kernel mass is exactly one and a constant infection history
//! convolves to itself.

use crate::equilibria::{dfe_point, endemic_points, EquilibriumKind, EquilibriumPoint};
use crate::error::SimError;
use crate::model::{rhs, ModelParams, State, UniformKernel};

/// Scheme-tolerance floor for transient negative excursions, relative to
/// the population cap `b / mu`.
pub const NEGATIVITY_REL_FLOOR: f64 = 1e-6;

/// Componentwise convergence tolerance of the trajectory classifier,
/// relative to the population cap.
pub const CONVERGENCE_REL_TOL: f64 = 1e-4;

/// Oscillation amplitude must exceed this multiple of the convergence
/// tolerance before a trajectory can be called periodic.
pub const PERIODIC_AMPLITUDE_FACTOR: f64 = 10.0;

/// Peak-spacing coefficient of variation allowed for a periodic verdict.
pub const PEAK_SPACING_CV: f64 = 0.05;

const GRID_ALIGN_TOL: f64 = 1e-9;

/// Delay kernel accepted by the integrator.
#[derive(Debug, Clone, PartialEq)]
pub enum SimKernel {
    /// Constant density `1/L` on `[T, T+L)`; the only kernel the spectral
    /// pipeline analyzes.
    Uniform(UniformKernel),
    /// Arbitrary nonnegative weights tabulated on the simulation grid:
    /// entry `j` weighs `I(t - j dt)`. Normalized at load.
    Tabulated(Vec<f64>),
}

impl SimKernel {
    /// Discretizes the kernel for step `dt`: the first contributing lag
    /// index and one normalized weight per in-support lag.
    fn grid_weights(&self, dt: f64) -> Result<(usize, Vec<f64>), SimError> {
        match self {
            SimKernel::Uniform(k) => {
                let first = lag_index(k.reporting_delay, dt, "reporting delay T")?;
                let count = lag_index(k.window, dt, "window L")?;
                if count == 0 {
                    return Err(SimError::NonIntegralDelay {
                        what: "window L",
                        value: k.window,
                        dt,
                    });
                }
                let raw = dt / k.window;
                let total = raw * count as f64;
                Ok((first, vec![raw / total; count]))
            }
            SimKernel::Tabulated(weights) => {
                if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(SimError::InvalidKernelTable);
                }
                let total: f64 = weights.iter().sum();
                if total.is_nan() || total <= 0.0 {
                    return Err(SimError::InvalidKernelTable);
                }
                Ok((0, weights.iter().map(|w| w / total).collect()))
            }
        }
    }
}

fn lag_index(value: f64, dt: f64, what: &'static str) -> Result<usize, SimError> {
    let ratio = value / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > GRID_ALIGN_TOL * ratio.abs().max(1.0) {
        return Err(SimError::NonIntegralDelay { what, value, dt });
    }
    Ok(rounded as usize)
}

/// Ring buffer of past `I` values on the simulation grid; slot `k` holds
/// `I(t - k dt)` for the current time `t`.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    values: Vec<f64>,
    head: usize,
}

impl HistoryBuffer {
    fn new(values: Vec<f64>) -> Self {
        Self { values, head: 0 }
    }

    fn push(&mut self, value: f64) {
        self.head = (self.head + self.values.len() - 1) % self.values.len();
        self.values[self.head] = value;
    }

    /// `I(t - k dt)`.
    pub fn lag(&self, k: usize) -> f64 {
        self.values[(self.head + k) % self.values.len()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn convolve(&self, first_lag: usize, weights: &[f64]) -> f64 {
        weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * self.lag(first_lag + j))
            .sum()
    }
}

/// Output controls for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Emit every `out_stride`-th step (the initial and final states are
    /// always emitted).
    pub out_stride: usize,
    /// Record the Lyapunov monitor `W` alongside each emitted row.
    pub track_lyapunov: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            out_stride: 100,
            track_lyapunov: false,
        }
    }
}

/// A strided record of one forward integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Convolved infection history at each emitted time.
    pub convolved: Vec<f64>,
    /// Lyapunov monitor values when requested.
    pub lyapunov: Option<Vec<f64>>,
    pub dt: f64,
}

impl Trajectory {
    pub fn last_state(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// CSV export with header `t,S,V,Q,I[,R],convI[,W]`.
    pub fn to_csv(&self) -> String {
        let with_r = self.states.first().is_some_and(|s| s.r.is_some());
        let mut header = String::from("t,S,V,Q,I");
        if with_r {
            header.push_str(",R");
        }
        header.push_str(",convI");
        if self.lyapunov.is_some() {
            header.push_str(",W");
        }
        let mut out = header;
        out.push('\n');
        for (idx, (t, st)) in self.times.iter().zip(&self.states).enumerate() {
            out.push_str(&format!("{t},{},{},{},{}", st.s, st.v, st.q, st.i));
            if with_r {
                out.push_str(&format!(",{}", st.r.unwrap_or(0.0)));
            }
            out.push_str(&format!(",{}", self.convolved[idx]));
            if let Some(w) = &self.lyapunov {
                out.push_str(&format!(",{}", w[idx]));
            }
            out.push('\n');
        }
        out
    }
}

/// Quadratic Lyapunov monitor used for the disease-free regime:
/// `W = (S+V+Q+I - b/mu)^2 / 2 + (2 mu + gamma) I / beta`.
pub fn lyapunov_w(params: &ModelParams, state: &State) -> f64 {
    let gap = state.svqi() - params.population_cap();
    0.5 * gap * gap + (2.0 * params.mu + params.gamma) / params.beta * state.i
}

/// Integrates the delay system from the history `phi` (defined on
/// `[-(T+L), 0]`, nonnegative) up to `t_end` with step `dt`.
///
/// The recovered compartment is carried exactly when `phi(0)` provides it.
/// Components may dip no lower than `-1e-6 b/mu`; a deeper excursion
/// aborts with [`SimError::StepTooLarge`].
pub fn simulate(
    params: &ModelParams,
    kernel: &SimKernel,
    phi: impl Fn(f64) -> State,
    t_end: f64,
    dt: f64,
    opts: &SimOptions,
) -> Result<Trajectory, SimError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::NonPositiveStep { value: dt });
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(SimError::NonPositiveHorizon { value: t_end });
    }
    let (first_lag, weights) = kernel.grid_weights(dt)?;
    let max_lag = first_lag + weights.len() - 1;

    let mut initial = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let theta = -(k as f64) * dt;
        let st = phi(theta);
        let floor = st.min_component().min(st.r.unwrap_or(0.0));
        if floor.is_nan() || floor < 0.0 {
            return Err(SimError::InvalidHistory { theta });
        }
        initial.push(st.i);
    }
    let mut history = HistoryBuffer::new(initial);
    let mut state = phi(0.0);

    let n_steps = (t_end / dt).round().max(1.0) as usize;
    let stride = opts.out_stride.max(1);
    let cap = params.population_cap();
    let floor = -NEGATIVITY_REL_FLOOR * cap;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        convolved: Vec::new(),
        lyapunov: opts.track_lyapunov.then(Vec::new),
        dt,
    };
    let emit = |step: usize, st: &State, conv: f64, traj: &mut Trajectory| {
        traj.times.push(step as f64 * dt);
        traj.states.push(*st);
        traj.convolved.push(conv);
        if let Some(w) = &mut traj.lyapunov {
            w.push(lyapunov_w(params, st));
        }
    };

    let mut conv = history.convolve(first_lag, &weights);
    emit(0, &state, conv, &mut traj);

    for step in 0..n_steps {
        let d = rhs(params, &state, conv);
        state = State {
            s: state.s + dt * d.ds,
            v: state.v + dt * d.dv,
            q: state.q + dt * d.dq,
            i: state.i + dt * d.di,
            r: state.r.map(|r| r + dt * d.dr.unwrap()),
        };
        let t = (step + 1) as f64 * dt;
        for (component, value) in [
            ("S", state.s),
            ("V", state.v),
            ("Q", state.q),
            ("I", state.i),
        ] {
            if value.is_nan() || value < floor {
                return Err(SimError::StepTooLarge {
                    component,
                    value,
                    t,
                });
            }
        }
        history.push(state.i);
        conv = history.convolve(first_lag, &weights);
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            emit(step + 1, &state, conv, &mut traj);
        }
    }
    Ok(traj)
}

/// Step size heuristic: `min(L, 1/gamma) / 50`, refined so the grid divides
/// both `T` and `L` exactly.
pub fn default_dt(params: &ModelParams, kernel: &UniformKernel) -> Result<f64, SimError> {
    let raw = kernel.window.min(1.0 / params.gamma) / 50.0;
    let base = (kernel.window / raw).ceil().max(1.0) as usize;
    for n in base..base + 10_000 {
        let dt = kernel.window / n as f64;
        let ratio = kernel.reporting_delay / dt;
        if (ratio - ratio.round()).abs() <= GRID_ALIGN_TOL * ratio.abs().max(1.0) {
            return Ok(dt);
        }
    }
    Err(SimError::NonIntegralDelay {
        what: "reporting delay T",
        value: kernel.reporting_delay,
        dt: kernel.window / base as f64,
    })
}

/// Long-run label of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryVerdict {
    ConvergedDfe {
        tail_start: f64,
    },
    ConvergedEndemic {
        point: EquilibriumPoint,
        tail_start: f64,
    },
    Periodic {
        amplitude: f64,
        period: f64,
        tail_start: f64,
    },
    Undetermined {
        tail_start: f64,
    },
}

impl TrajectoryVerdict {
    pub fn is_periodic(&self) -> bool {
        matches!(self, TrajectoryVerdict::Periodic { .. })
    }
}

/// Labels the tail of a trajectory: converged to one of the candidate
/// equilibrium points, periodic, or undetermined.
///
/// Converged means the largest componentwise deviation from a candidate
/// stays below `1e-4 b/mu` over the whole tail window. Periodic requires
/// an oscillation amplitude above ten times that threshold together with
/// near-uniform peak spacing (CV below 0.05). The caller picks `t_end` and
/// `tail_fraction` so the tail spans at least five putative periods
/// (`2 pi / w` from the Hopf machinery when available).
pub fn classify(
    params: &ModelParams,
    traj: &Trajectory,
    candidates: &[EquilibriumPoint],
    tail_fraction: f64,
) -> TrajectoryVerdict {
    assert!(
        tail_fraction > 0.0 && tail_fraction <= 1.0,
        "tail_fraction must lie in (0, 1]"
    );
    let t_end = traj.end_time();
    let tail_start = t_end * (1.0 - tail_fraction);
    let first = traj.times.partition_point(|&t| t < tail_start);
    let tail = &traj.states[first..];

    let tol = CONVERGENCE_REL_TOL * params.population_cap();
    let mut best: Option<(f64, &EquilibriumPoint)> = None;
    for cand in candidates {
        let target = cand.state();
        let dev = tail
            .iter()
            .map(|st| st.max_abs_diff(&target))
            .fold(0.0, f64::max);
        if best.is_none_or(|(d, _)| dev < d) {
            best = Some((dev, cand));
        }
    }
    if let Some((dev, cand)) = best {
        if dev < tol {
            return match cand.kind {
                EquilibriumKind::DiseaseFree => TrajectoryVerdict::ConvergedDfe { tail_start },
                EquilibriumKind::Endemic => TrajectoryVerdict::ConvergedEndemic {
                    point: *cand,
                    tail_start,
                },
            };
        }
    }

    // Oscillation test on the component with the widest swing.
    let extract: [fn(&State) -> f64; 4] = [|s| s.s, |s| s.v, |s| s.q, |s| s.i];
    let mut amplitude = 0.0;
    let mut widest = 0;
    for (ci, get) in extract.iter().enumerate() {
        let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), st| {
            let y = get(st);
            (lo.min(y), hi.max(y))
        });
        if hi - lo > amplitude {
            amplitude = hi - lo;
            widest = ci;
        }
    }
    if amplitude > PERIODIC_AMPLITUDE_FACTOR * tol {
        let get = extract[widest];
        let values: Vec<f64> = tail.iter().map(get).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let threshold = lo + 0.5 * amplitude;
        let times = &traj.times[first..];
        let mut peaks = Vec::new();
        for k in 1..values.len().saturating_sub(1) {
            if values[k] > values[k - 1] && values[k] >= values[k + 1] && values[k] >= threshold {
                peaks.push(times[k]);
            }
        }
        if peaks.len() >= 3 {
            let gaps: Vec<f64> = peaks.windows(2).map(|p| p[1] - p[0]).collect();
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / gaps.len() as f64;
            if mean > 0.0 && var.sqrt() / mean < PEAK_SPACING_CV {
                return TrajectoryVerdict::Periodic {
                    amplitude,
                    period: mean,
                    tail_start,
                };
            }
        }
    }
    TrajectoryVerdict::Undetermined { tail_start }
}

/// Constant history used by the multistability probe: half the population
/// cap susceptible, the probed infection level, nothing else.
pub fn probe_start_state(params: &ModelParams, level: f64) -> State {
    State::new(0.5 * params.population_cap(), 0.0, 0.0, level)
}

/// Runs one simulation per initial infection level from the constant
/// history `(b/(2 mu), 0, 0, level)` and reports which equilibrium each
/// trajectory approaches. Requires at least two endemic equilibria.
pub fn multistability_probe(
    params: &ModelParams,
    kernel: &UniformKernel,
    initial_i_levels: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Vec<TrajectoryVerdict>, SimError> {
    let solve = endemic_points(params);
    if solve.points.len() < 2 {
        return Err(SimError::TooFewEquilibria {
            found: solve.points.len(),
        });
    }
    let mut candidates = vec![dfe_point(params)];
    candidates.extend(solve.points.iter().copied());

    let half_cap = 0.5 * params.population_cap();
    let sim_kernel = SimKernel::Uniform(*kernel);
    let mut verdicts = Vec::with_capacity(initial_i_levels.len());
    for &level in initial_i_levels {
        if !(level.is_finite() && (0.0..=half_cap).contains(&level)) {
            return Err(SimError::InitialLevelOutOfRange {
                value: level,
                max: half_cap,
            });
        }
        let start = probe_start_state(params, level);
        let traj = simulate(
            params,
            &sim_kernel,
            |_| start,
            t_end,
            dt,
            &SimOptions::default(),
        )?;
        verdicts.push(classify(params, &traj, &candidates, 0.1));
    }
    Ok(verdicts)
}
