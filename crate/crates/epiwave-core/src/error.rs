//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while validating model inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("parameter `sigma` must satisfy 0 <= sigma < 1 (quarantine is imperfect, never fully protective), got {value}")]
    SigmaOutOfRange { value: f64 },

    #[error("reporting delay must be finite and >= 0, got {value}")]
    NegativeReportingDelay { value: f64 },

    #[error("information window must be positive and finite, got {value}")]
    NonPositiveWindow { value: f64 },

    #[error("convolved infection history must be >= 0, got {value}")]
    NegativeConvolvedInfection { value: f64 },
}

/// Errors raised by the eigenvalue / characteristic-equation machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("characteristic coefficients are defined at an endemic equilibrium; use `dfe_eigenvalues` for the disease-free state")]
    DfeInput,

    #[error("information window must be positive, got {value}")]
    NonPositiveWindow { value: f64 },

    #[error("frequency w = {frequency} is degenerate: |1 - cos(wL)| = {magnitude:e} vanishes")]
    DegenerateFrequency { frequency: f64, magnitude: f64 },

    #[error("tangent crossing at x* = {x_star}: |K'(x*)| = {k_deriv:e} is below the transversality tolerance")]
    Tangency { x_star: f64, k_deriv: f64 },

    #[error("constant term A0 + B0 = {value} is not positive; zero is a characteristic root and delay crossings are ill-defined")]
    ZeroRootBoundary { value: f64 },

    #[error("right-half-plane root pair count would drop below zero at T = {delay}; a crossing was missed")]
    NegativeCount { delay: f64 },

    #[error("undelayed characteristic polynomial has an odd number ({count}) of right-half-plane roots; pair bookkeeping is ill-defined")]
    UnpairedRoots { count: usize },
}

/// Errors raised by the forward integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("step size dt must be positive and finite, got {value}")]
    NonPositiveStep { value: f64 },

    #[error("horizon t_end must be positive and finite, got {value}")]
    NonPositiveHorizon { value: f64 },

    #[error("delay grid misaligned: {what} = {value} is not an integral multiple of dt = {dt}")]
    NonIntegralDelay {
        what: &'static str,
        value: f64,
        dt: f64,
    },

    #[error("history function returned a negative component at theta = {theta}")]
    InvalidHistory { theta: f64 },

    #[error("component {component} fell to {value:e} at t = {t}; the explicit scheme overshot, retry with a smaller dt")]
    StepTooLarge {
        component: &'static str,
        value: f64,
        t: f64,
    },

    #[error("tabulated kernel must be nonnegative with a positive total weight")]
    InvalidKernelTable,

    #[error("multistability probe requires at least two endemic equilibria, found {found}")]
    TooFewEquilibria { found: usize },

    #[error("initial infection level {value} must lie in [0, {max}] so the constant history stays in the feasible set")]
    InitialLevelOutOfRange { value: f64, max: f64 },
}
