//! Shared parameter fixtures and random draws for the integration suites.
#![allow(dead_code)]

use epiwave_core::ModelParams;
use rand::Rng;

/// Baseline parameter set of the numerical study: unit population cap,
/// 80-year lifespan, ~2-week infections, R0 = 2.5.
pub fn baseline() -> ModelParams {
    ModelParams {
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
    }
    .validated()
    .unwrap()
}

/// Single-positive-root showcase parameters (prevalence cubic).
pub fn fig2_params() -> ModelParams {
    ModelParams {
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
    }
    .validated()
    .unwrap()
}

/// Knife-edge parameters producing one simple and one double positive root.
pub fn fig3_params() -> ModelParams {
    ModelParams {
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
    }
    .validated()
    .unwrap()
}

/// Three distinct positive roots.
pub fn fig4_params() -> ModelParams {
    ModelParams {
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
    }
    .validated()
    .unwrap()
}

/// Multistable regime: three endemic equilibria, outer two attracting.
pub fn fig12_params() -> ModelParams {
    ModelParams {
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
    }
    .validated()
    .unwrap()
}

/// Broad random draw for the cubic/root oracles. The ranges keep
/// `b / mu <= 10` so the brute-force scan window stays affordable.
pub fn random_params(rng: &mut impl Rng) -> ModelParams {
    ModelParams {
        b: rng.random_range(0.1..1.5),
        beta: rng.random_range(0.01..2.0),
        gamma: rng.random_range(0.05..2.0),
        lambda: rng.random_range(0.001..1.0),
        mu: rng.random_range(0.15..1.0),
        rho: rng.random_range(0.01..2.0),
        sigma: rng.random_range(0.0..0.95),
        delta: rng.random_range(0.1..10.0),
        alpha: rng.random_range(0.1..10.0),
        q1: rng.random_range(0.1..10.0),
        q2: rng.random_range(0.1..10.0),
    }
    .validated()
    .unwrap()
}

/// Multiplicative perturbation of the baseline with a fresh R0 in
/// `[1.5, 4]`; stays in the well-conditioned unique-equilibrium regime.
pub fn perturbed_baseline(rng: &mut impl Rng) -> ModelParams {
    let p = baseline();
    let sigma = rng.random_range(0.1..0.6);
    let target_r0 = rng.random_range(1.5..4.0);
    let mut jitter = || rng.random_range(0.7..1.4);
    let out = ModelParams {
        b: p.b * jitter(),
        beta: p.beta,
        gamma: p.gamma * jitter(),
        lambda: p.lambda * jitter(),
        mu: p.mu * jitter(),
        rho: p.rho * jitter(),
        sigma,
        delta: p.delta * jitter(),
        alpha: p.alpha * jitter(),
        q1: p.q1 * jitter(),
        q2: p.q2 * jitter(),
    };
    out.with_r0(target_r0).validated().unwrap()
}
