//! Runner-level behaviour: CSV shapes, cross-scenario consistency, and
//! the degenerate branches of each report.

use epiwave_cli::config::{parse_config, parse_config_with_base, preset};
use epiwave_cli::run::{run, run_hopf, run_multistability, run_simulate, run_stability_map};
use epiwave_core::equilibria::endemic_points;
use epiwave_core::sim::multistability_probe;

#[test]
fn equilibria_report_lists_every_point() {
    let cfg = preset("fig4").unwrap();
    let report = run(&cfg).unwrap();
    assert!(report.summary.contains("admissible positive-root counts [1, 2, 3]"));
    let (name, csv) = &report.files[0];
    assert_eq!(name, "equilibria.csv");
    // Header + DFE + three endemic points.
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("kind,S,V,Q,I,residual\n"));
    assert_eq!(csv.matches("\nendemic,").count(), 3);
}

#[test]
fn hopf_below_threshold_reports_dfe_only() {
    let cfg = parse_config("[model]\nr0 = 0.5\n").unwrap();
    let report = run_hopf(&cfg).unwrap();
    assert!(report.summary.contains("no endemic equilibrium"));
    // Header-only CSVs.
    assert_eq!(report.files[0].1.lines().count(), 1);
    assert_eq!(report.files[1].1.lines().count(), 1);
}

#[test]
fn hopf_without_k_roots_is_stable_everywhere() {
    // Small vaccination sensitivity at high R0 leaves K rootless.
    let cfg = parse_config("[model]\nr0 = 5.0\nq1 = 100.0\nq2 = 0.5\n").unwrap();
    let report = run_hopf(&cfg).unwrap();
    assert!(
        report.summary.contains("no K-roots: stable for all T <= 40"),
        "{}",
        report.summary
    );
    let intervals = &report.files[1].1;
    let rows: Vec<&str> = intervals.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ends_with(",0,stable"));
}

#[test]
fn single_point_sweep_matches_hopf_ladders() {
    // A sweep pinned at the baseline q2 must reproduce the hopf ladders.
    let hopf_cfg = preset("baseline").unwrap();
    let hopf = run_hopf(&hopf_cfg).unwrap();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for line in hopf.files[0].1.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let delay: f64 = cols[7].parse().unwrap();
        match cols[5] {
            "left-to-right" => plus.push(delay),
            _ => minus.push(delay),
        }
    }
    plus.sort_by(f64::total_cmp);
    minus.sort_by(f64::total_cmp);

    let sweep_cfg = parse_config(
        "[run]\nscenario = \"stability-map\"\n\
         [sweep]\nparam = \"q2\"\nstart = 10.0\nstop = 10.0\nstep = 1.0\n",
    )
    .unwrap();
    let sweep = run_stability_map(&sweep_cfg).unwrap();
    let mut sweep_plus = Vec::new();
    let mut sweep_minus = Vec::new();
    for line in sweep.files[0].1.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if let Ok(t) = cols[3].parse::<f64>() {
            sweep_plus.push(t);
        }
        if let Ok(t) = cols[4].parse::<f64>() {
            sweep_minus.push(t);
        }
    }
    assert_eq!(sweep_plus, plus);
    assert_eq!(sweep_minus, minus);
}

#[test]
fn simulate_emits_optional_columns() {
    let base = preset("fig6").unwrap();
    let cfg = parse_config_with_base(
        "[run]\nt_end = 2.0\ninitial_r = 0.05\nlyapunov = true\n",
        &base,
    )
    .unwrap();
    let report = run_simulate(&cfg).unwrap();
    let csv = &report.files[0].1;
    assert!(csv.starts_with("t,S,V,Q,I,R,convI,W\n"), "{}", &csv[..40]);
    assert!(report.summary.contains("verdict:"));
}

#[test]
fn multistability_runner_agrees_with_the_core_probe() {
    let base = preset("fig12").unwrap();
    // Shorter horizon: verdicts become undetermined but consistently so.
    let cfg = parse_config_with_base("[run]\nt_end = 600.0\n", &base).unwrap();
    let report = run_multistability(&cfg).unwrap();
    assert_eq!(report.files.len(), 2);
    assert!(report.files[0].0 == "trajectory_0.csv");

    let verdicts = multistability_probe(
        &cfg.model,
        &cfg.kernel,
        &cfg.controls.levels,
        cfg.controls.t_end,
        cfg.resolved_dt().unwrap(),
    )
    .unwrap();
    let points = endemic_points(&cfg.model).points;
    let smallest = points.first().unwrap().i;
    let largest = points.last().unwrap().i;
    // The runner prints exactly the probe's verdicts.
    let lines: Vec<&str> = report
        .summary
        .lines()
        .filter(|l| l.starts_with("level"))
        .collect();
    assert_eq!(lines.len(), verdicts.len());
    assert!(lines[0].contains(&format!("I = {smallest}")), "{}", lines[0]);
    assert!(lines[1].contains(&format!("I = {largest}")), "{}", lines[1]);
}

#[test]
fn sweep_rows_flag_missing_equilibria() {
    // R0 < 1 throughout the sweep: every row carries the error note.
    let cfg = parse_config(
        "[model]\nr0 = 0.5\n\
         [run]\nscenario = \"stability-map\"\n\
         [sweep]\nparam = \"q1\"\nstart = 10.0\nstop = 30.0\nstep = 10.0\n",
    )
    .unwrap();
    let report = run_stability_map(&cfg).unwrap();
    let rows: Vec<&str> = report.files[0].1.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with("no endemic equilibrium")));
}
