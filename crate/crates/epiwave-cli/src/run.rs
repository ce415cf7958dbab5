//! Scenario runners: each one turns a [`RunConfig`] into a text summary
//! plus CSV payloads, leaving file placement to the binary.

use crate::config::{RunConfig, Scenario, SweepParam};
use epiwave_core::equilibria::{
    default_root_tol, descartes_table, dfe_point, endemic_cubic, endemic_points, positive_roots,
    EquilibriumPoint, Sign,
};
use epiwave_core::error::{SimError, SpectralError};
use epiwave_core::sim::{classify, multistability_probe, probe_start_state, simulate, SimOptions,
    TrajectoryVerdict};
use epiwave_core::spectral::{
    char_coeffs, critical_delays, k_roots, stability_intervals, CharCoeffs, KRoot,
};
use epiwave_core::ModelParams;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Output of one run: a human-readable summary and named CSV payloads.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: String,
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
}

/// Numerical failures surfaced after configuration passed validation.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("spectral analysis failed: {0}")]
    Spectral(#[from] SpectralError),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
}

/// Dispatches on the configured scenario.
pub fn run(cfg: &RunConfig) -> Result<Report, RunError> {
    match cfg.scenario {
        Scenario::Equilibria => run_equilibria(cfg),
        Scenario::Hopf => run_hopf(cfg),
        Scenario::StabilityMap => run_stability_map(cfg),
        Scenario::Simulate => run_simulate(cfg),
        Scenario::Multistability => run_multistability(cfg),
    }
}

fn sign_char(sign: Sign) -> char {
    match sign {
        Sign::Negative => '-',
        Sign::Zero => '0',
        Sign::Positive => '+',
    }
}

/// Reproduction number, prevalence cubic, Descartes diagnostics and all
/// equilibrium points with their residuals.
pub fn run_equilibria(cfg: &RunConfig) -> Result<Report, RunError> {
    let p = &cfg.model;
    let cubic = endemic_cubic(p);
    let table = descartes_table(&cubic);
    let roots = positive_roots(&cubic, default_root_tol(p));
    let solve = endemic_points(p);
    let dfe = dfe_point(p);

    let mut s = String::new();
    let _ = writeln!(s, "scenario: equilibria");
    let _ = writeln!(s, "R0 = {}", p.r0());
    let _ = writeln!(
        s,
        "cubic: d3 = {}, d2 = {}, d1 = {}, d0 = {}",
        cubic.d3, cubic.d2, cubic.d1, cubic.d0
    );
    let _ = writeln!(
        s,
        "Descartes signs ({},{},{},{}): {} changes, admissible positive-root counts {:?}",
        sign_char(table.signs[0]),
        sign_char(table.signs[1]),
        sign_char(table.signs[2]),
        sign_char(table.signs[3]),
        table.sign_changes,
        table.admissible_counts
    );
    if roots.is_empty() {
        let _ = writeln!(s, "no positive roots: disease-free state only");
    }
    for r in &roots {
        let kind = match r.multiplicity {
            1 => "simple".to_string(),
            m => format!("multiplicity {m}"),
        };
        let _ = writeln!(s, "positive root I = {} ({kind})", r.value);
    }
    for pt in &solve.points {
        let _ = writeln!(
            s,
            "endemic point: S = {}, V = {}, Q = {}, I = {}, residual = {:e}",
            pt.s, pt.v, pt.q, pt.i, pt.residual
        );
    }
    for bad in &solve.inadmissible {
        let _ = writeln!(
            s,
            "inadmissible root I = {} (back-substitution left a negative component: S = {}, V = {}, Q = {})",
            bad.i, bad.s, bad.v, bad.q
        );
    }
    let _ = writeln!(s, "DFE: S = {}, residual = {:e}", dfe.s, dfe.residual);

    let mut csv = String::from("kind,S,V,Q,I,residual\n");
    let _ = writeln!(
        csv,
        "dfe,{},{},{},{},{:e}",
        dfe.s, dfe.v, dfe.q, dfe.i, dfe.residual
    );
    for pt in &solve.points {
        let _ = writeln!(
            csv,
            "endemic,{},{},{},{},{:e}",
            pt.s, pt.v, pt.q, pt.i, pt.residual
        );
    }
    Ok(Report {
        summary: s,
        files: vec![("equilibria.csv".into(), csv)],
    })
}

fn ladder_rows(
    csv: &mut String,
    point_index: usize,
    i_bar: f64,
    cc: &CharCoeffs,
    root: &KRoot,
    t_max: f64,
) -> Result<(), SpectralError> {
    let dir = if root.k_deriv > 0.0 { "left-to-right" } else { "right-to-left" };
    if !root.transversal {
        let _ = writeln!(
            csv,
            "{point_index},{i_bar},{},{},{},{dir},,,,tangent",
            root.x, root.frequency, root.k_deriv
        );
        return Ok(());
    }
    match critical_delays(cc, root.frequency, t_max) {
        Ok(delays) => {
            for (n, t) in delays.iter().enumerate() {
                let residual = cc
                    .char_residual(Complex64::new(0.0, root.frequency), *t)
                    .norm();
                let _ = writeln!(
                    csv,
                    "{point_index},{i_bar},{},{},{},{dir},{n},{t},{residual:e},ok",
                    root.x, root.frequency, root.k_deriv
                );
            }
            Ok(())
        }
        Err(err @ SpectralError::DegenerateFrequency { .. }) => {
            let _ = writeln!(
                csv,
                "{point_index},{i_bar},{},{},{},{dir},,,,degenerate-frequency",
                root.x, root.frequency, root.k_deriv
            );
            Err(err)
        }
        Err(other) => Err(other),
    }
}

/// Characteristic coefficients, K-roots with crossing directions, the
/// critical-delay ladders with residual cross-checks, and labeled
/// stability intervals, per endemic point.
pub fn run_hopf(cfg: &RunConfig) -> Result<Report, RunError> {
    let p = &cfg.model;
    let window = cfg.kernel.window;
    let t_max = cfg.controls.t_max;
    let solve = endemic_points(p);

    let mut s = String::new();
    let _ = writeln!(s, "scenario: hopf");
    let _ = writeln!(s, "R0 = {}, window L = {window}, t_max = {t_max}", p.r0());
    let mut delays_csv = String::from(
        "point,i_bar,x_star,frequency,k_prime,direction,n,delay,residual,status\n",
    );
    let mut intervals_csv = String::from("point,start,end,rhp_pairs,label\n");

    if solve.points.is_empty() {
        let _ = writeln!(s, "no endemic equilibrium (R0 = {}); nothing to analyze", p.r0());
        return Ok(Report {
            summary: s,
            files: vec![
                ("hopf_delays.csv".into(), delays_csv),
                ("stability_intervals.csv".into(), intervals_csv),
            ],
        });
    }
    if solve.points.len() > 1 {
        let _ = writeln!(
            s,
            "note: {} endemic points; the delay analysis below is per point (single-point theory)",
            solve.points.len()
        );
    }

    for (idx, pt) in solve.points.iter().enumerate() {
        let cc = char_coeffs(p, pt, window)?;
        let _ = writeln!(s, "endemic point {idx}: I = {}", pt.i);
        let _ = writeln!(
            s,
            "  A3 = {}, A2 = {}, A1 = {}, A0 = {}",
            cc.a3, cc.a2, cc.a1, cc.a0
        );
        let _ = writeln!(s, "  B2 = {}, B1 = {}, B0 = {}", cc.b2, cc.b1, cc.b0);
        let _ = writeln!(
            s,
            "  c4 = {}, c3 = {}, c2 = {}, c1 = {}",
            cc.c4, cc.c3, cc.c2, cc.c1
        );
        let _ = writeln!(s, "  r2 = {}, r1 = {}, r0 = {}", cc.r2, cc.r1, cc.r0);

        let x_max = cfg.controls.x_max.unwrap_or_else(|| cc.default_x_max());
        let roots = k_roots(&cc, x_max);
        if roots.is_empty() {
            let _ = writeln!(s, "  no K-roots: stable for all T <= {t_max}");
        }
        let mut degenerate = false;
        for root in &roots {
            let _ = writeln!(
                s,
                "  K-root x* = {} (w = {}, K' = {}{})",
                root.x,
                root.frequency,
                root.k_deriv,
                if root.transversal { "" } else { ", tangent" }
            );
            if let Err(SpectralError::DegenerateFrequency { .. }) =
                ladder_rows(&mut delays_csv, idx, pt.i, &cc, root, t_max)
            {
                degenerate = true;
                let _ = writeln!(s, "  degenerate frequency at x* = {}; ladder skipped", root.x);
            }
        }

        if degenerate {
            let _ = writeln!(s, "  intervals not assembled (degenerate frequency)");
            continue;
        }
        match stability_intervals(&cc, t_max) {
            Ok(summary) => {
                let _ = writeln!(
                    s,
                    "  undelayed quartic: {}",
                    if summary.undelayed.stable { "stable" } else { "unstable" }
                );
                for iv in &summary.intervals {
                    let label = if iv.stable() { "stable" } else { "unstable" };
                    let _ = writeln!(
                        intervals_csv,
                        "{idx},{},{},{},{label}",
                        iv.start, iv.end, iv.rhp_pairs
                    );
                }
                let stable: Vec<String> = summary
                    .stable_intervals()
                    .iter()
                    .map(|(a, b)| format!("({a}, {b})"))
                    .collect();
                let _ = writeln!(s, "  stable delay set: {}", stable.join(" u "));
            }
            Err(err @ SpectralError::DegenerateFrequency { .. }) => {
                let _ = writeln!(s, "  intervals not assembled: {err}");
            }
            Err(other) => return Err(other.into()),
        }
    }

    Ok(Report {
        summary: s,
        files: vec![
            ("hopf_delays.csv".into(), delays_csv),
            ("stability_intervals.csv".into(), intervals_csv),
        ],
    })
}

/// One sweep point of the stability map.
fn sweep_point_rows(
    base: &ModelParams,
    param: SweepParam,
    value: f64,
    window: f64,
    t_max: f64,
    x_max: Option<f64>,
) -> Vec<String> {
    let name = param.as_str();
    let row = |n: String, tp: String, tm: String, err: String| {
        format!("{name},{value},{n},{tp},{tm},{err}")
    };
    let p = param.apply(*base, value);
    if let Err(e) = p.validate() {
        return vec![row(String::new(), String::new(), String::new(), e.to_string())];
    }
    let solve = endemic_points(&p);
    let Some(pt) = solve.points.iter().max_by(|a, b| a.i.total_cmp(&b.i)) else {
        return vec![row(
            String::new(),
            String::new(),
            String::new(),
            "no endemic equilibrium".into(),
        )];
    };
    let note = if solve.points.len() > 1 {
        format!("{} endemic points, largest analyzed", solve.points.len())
    } else {
        String::new()
    };
    let cc = match char_coeffs(&p, pt, window) {
        Ok(cc) => cc,
        Err(e) => return vec![row(String::new(), String::new(), String::new(), e.to_string())],
    };
    let roots = k_roots(&cc, x_max.unwrap_or_else(|| cc.default_x_max()));
    if roots.is_empty() {
        // No crossings at all: stable for every delay.
        return vec![row(String::new(), String::new(), String::new(), note)];
    }
    if let Some(bad) = roots.iter().find(|r| !r.transversal) {
        return vec![row(
            String::new(),
            String::new(),
            String::new(),
            format!("tangent K-root at x = {}", bad.x),
        )];
    }
    let plus: Vec<&KRoot> = roots.iter().filter(|r| r.k_deriv > 0.0).collect();
    let minus: Vec<&KRoot> = roots.iter().filter(|r| r.k_deriv < 0.0).collect();
    if plus.len() != 1 || minus.len() != 1 {
        return vec![row(
            String::new(),
            String::new(),
            String::new(),
            format!("unexpected K-root structure ({} roots)", roots.len()),
        )];
    }
    let ladder = |root: &KRoot| critical_delays(&cc, root.frequency, t_max);
    match (ladder(plus[0]), ladder(minus[0])) {
        (Ok(tp), Ok(tm)) => {
            let rungs = tp.len().max(tm.len());
            (0..rungs)
                .map(|n| {
                    row(
                        n.to_string(),
                        tp.get(n).map(|t| t.to_string()).unwrap_or_default(),
                        tm.get(n).map(|t| t.to_string()).unwrap_or_default(),
                        note.clone(),
                    )
                })
                .collect()
        }
        (Err(e), _) | (_, Err(e)) => {
            vec![row(String::new(), String::new(), String::new(), e.to_string())]
        }
    }
}

/// Re-runs the equilibrium + Hopf pipeline at every sweep value and emits
/// the critical-delay curves `T_n^+`, `T_n^-` as CSV. Per-point failures
/// land in the `error` column; the sweep continues.
pub fn run_stability_map(cfg: &RunConfig) -> Result<Report, RunError> {
    let sweep = cfg.sweep.expect("validated: stability-map has a sweep axis");
    let values = sweep.values();
    let window = cfg.kernel.window;
    let t_max = cfg.controls.t_max;
    let x_max = cfg.controls.x_max;
    let base = cfg.model;

    let blocks: Vec<Vec<String>> = values
        .par_iter()
        .map(|&v| sweep_point_rows(&base, sweep.param, v, window, t_max, x_max))
        .collect();

    let mut csv = String::from("param,value,n,t_plus,t_minus,error\n");
    for block in &blocks {
        for line in block {
            csv.push_str(line);
            csv.push('\n');
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "scenario: stability-map");
    let _ = writeln!(
        s,
        "sweep {} from {} to {} step {} ({} points)",
        sweep.param.as_str(),
        sweep.start,
        sweep.stop,
        sweep.step,
        values.len()
    );
    let with_delays = blocks
        .iter()
        .filter(|b| b.iter().any(|r| !r.ends_with(",,,") && r.split(',').nth(3).is_some_and(|f| !f.is_empty())))
        .count();
    let _ = writeln!(s, "{with_delays} of {} sweep points have critical delays", values.len());
    Ok(Report {
        summary: s,
        files: vec![("stability_map.csv".into(), csv)],
    })
}

fn verdict_line(verdict: &TrajectoryVerdict) -> String {
    match verdict {
        TrajectoryVerdict::ConvergedDfe { tail_start } => {
            format!("verdict: converged_DFE (tail from t = {tail_start})")
        }
        TrajectoryVerdict::ConvergedEndemic { point, tail_start } => format!(
            "verdict: converged_endemic (I = {}, tail from t = {tail_start})",
            point.i
        ),
        TrajectoryVerdict::Periodic {
            amplitude,
            period,
            tail_start,
        } => format!(
            "verdict: periodic (amplitude = {amplitude}, period = {period}, tail from t = {tail_start})"
        ),
        TrajectoryVerdict::Undetermined { tail_start } => {
            format!("verdict: undetermined (tail from t = {tail_start})")
        }
    }
}

fn candidate_points(p: &ModelParams) -> Vec<EquilibriumPoint> {
    let mut candidates = vec![dfe_point(p)];
    candidates.extend(endemic_points(p).points);
    candidates
}

/// Forward simulation from the configured constant history, trajectory CSV
/// plus a verdict line.
pub fn run_simulate(cfg: &RunConfig) -> Result<Report, RunError> {
    let p = &cfg.model;
    let dt = cfg.resolved_dt()?;
    let start = cfg.initial_state();
    let traj = simulate(
        p,
        &cfg.sim_kernel(),
        |_| start,
        cfg.controls.t_end,
        dt,
        &SimOptions {
            out_stride: cfg.controls.out_stride,
            track_lyapunov: cfg.controls.lyapunov,
        },
    )?;
    let verdict = classify(p, &traj, &candidate_points(p), cfg.controls.tail_fraction);

    let mut s = String::new();
    let _ = writeln!(s, "scenario: simulate");
    let _ = writeln!(
        s,
        "R0 = {}, T = {}, L = {}, dt = {dt}, t_end = {}",
        p.r0(),
        cfg.kernel.reporting_delay,
        cfg.kernel.window,
        cfg.controls.t_end
    );
    let _ = writeln!(s, "{}", verdict_line(&verdict));
    Ok(Report {
        summary: s,
        files: vec![("trajectory.csv".into(), traj.to_csv())],
    })
}

/// One simulation per configured infection level, each classified against
/// every equilibrium; emits one trajectory CSV per level.
pub fn run_multistability(cfg: &RunConfig) -> Result<Report, RunError> {
    let p = &cfg.model;
    let dt = cfg.resolved_dt()?;
    let verdicts = multistability_probe(
        p,
        &cfg.kernel,
        &cfg.controls.levels,
        cfg.controls.t_end,
        dt,
    )?;

    let mut s = String::new();
    let _ = writeln!(s, "scenario: multistability");
    let _ = writeln!(
        s,
        "R0 = {}, {} initial levels, t_end = {}, dt = {dt}",
        p.r0(),
        cfg.controls.levels.len(),
        cfg.controls.t_end
    );
    let mut files = Vec::new();
    for (k, (level, verdict)) in cfg.controls.levels.iter().zip(&verdicts).enumerate() {
        let start = probe_start_state(p, *level);
        let traj = simulate(
            p,
            &cfg.sim_kernel(),
            |_| start,
            cfg.controls.t_end,
            dt,
            &SimOptions {
                out_stride: cfg.controls.out_stride,
                track_lyapunov: cfg.controls.lyapunov,
            },
        )?;
        let _ = writeln!(s, "level I(0) = {level}: {}", verdict_line(verdict));
        files.push((format!("trajectory_{k}.csv"), traj.to_csv()));
    }
    Ok(Report { summary: s, files })
}
