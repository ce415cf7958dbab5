//! Model parameters, the uniform reporting-delay kernel, the nonlinear
//! transition rates, the basic reproduction number and the right-hand side
//! of the delay system.
//!
//! The population is split into susceptible `S`, vaccinated `V`,
//! quarantined `Q`, infectious `I` and (optionally tracked) recovered `R`
//! compartments. Transitions between `S`, `Q` and `V` react to the
//! *convolved* infection history rather than the instantaneous prevalence:
//! quarantine uptake `g1` and vaccination uptake `g2` grow linearly with
//! it, while the quarantine release rate `h` decays hyperbolically.

use crate::error::ModelError;

/// Epidemiological rate constants. All rates are per unit time; `alpha`,
/// `q1`, `q2` are sensitivities to the convolved infection history.
///
/// Invariants (checked by [`ModelParams::validate`]):
/// * `b`, `beta`, `gamma`, `lambda`, `mu`, `rho` strictly positive,
/// * `q1`, `q2`, `delta`, `alpha` strictly positive,
/// * `0 <= sigma < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Birth rate.
    pub b: f64,
    /// Infection rate.
    pub beta: f64,
    /// Recovery rate.
    pub gamma: f64,
    /// Quarantine-to-vaccinated transition rate.
    pub lambda: f64,
    /// Natural mortality rate.
    pub mu: f64,
    /// Loss rate of vaccination-induced immunity.
    pub rho: f64,
    /// Degree of quarantine imperfection; 0 is perfect isolation.
    pub sigma: f64,
    /// Maximal quarantine release rate.
    pub delta: f64,
    /// Release sensitivity to the infection history.
    pub alpha: f64,
    /// Quarantine sensitivity to the infection history.
    pub q1: f64,
    /// Vaccination sensitivity to the infection history.
    pub q2: f64,
}

impl ModelParams {
    /// Checks every parameter bound. Call once at construction; the rest of
    /// the crate assumes validated inputs.
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("b", self.b),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("rho", self.rho),
            ("q1", self.q1),
            ("q2", self.q2),
            ("delta", self.delta),
            ("alpha", self.alpha),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        if !(self.sigma.is_finite() && (0.0..1.0).contains(&self.sigma)) {
            return Err(ModelError::SigmaOutOfRange { value: self.sigma });
        }
        Ok(())
    }

    /// Validating constructor sugar: `params.validated()?`.
    pub fn validated(self) -> Result<Self, ModelError> {
        self.validate()?;
        Ok(self)
    }

    /// Basic reproduction number `R0 = b beta / (mu (gamma + mu))`.
    pub fn r0(&self) -> f64 {
        self.b * self.beta / (self.mu * (self.gamma + self.mu))
    }

    /// Replaces `beta` so that [`ModelParams::r0`] equals `r0`.
    pub fn with_r0(mut self, r0: f64) -> Self {
        self.beta = r0 * self.mu * (self.gamma + self.mu) / self.b;
        self
    }

    /// Carrying capacity `b / mu`, the population ceiling of the feasible
    /// set: nonnegative states with `S + V + Q + I <= b / mu`.
    pub fn population_cap(&self) -> f64 {
        self.b / self.mu
    }

    /// Nonlinear transition rates at a given convolved infection level.
    ///
    /// `g1 = q1 x` (into quarantine), `g2 = q2 x` (into vaccination),
    /// `h = delta / (1 + alpha x)` (release from quarantine). Negative
    /// convolved levels are rejected.
    pub fn rates(&self, convolved_i: f64) -> Result<TransitionRates, ModelError> {
        if convolved_i.is_nan() || convolved_i < 0.0 {
            return Err(ModelError::NegativeConvolvedInfection {
                value: convolved_i,
            });
        }
        Ok(self.rates_raw(convolved_i))
    }

    #[inline]
    pub(crate) fn rates_raw(&self, convolved_i: f64) -> TransitionRates {
        TransitionRates {
            g1: self.q1 * convolved_i,
            g2: self.q2 * convolved_i,
            h: self.delta / (1.0 + self.alpha * convolved_i),
        }
    }
}

/// The three history-driven rates evaluated at one convolved level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRates {
    /// Susceptible -> quarantined.
    pub g1: f64,
    /// Susceptible -> vaccinated.
    pub g2: f64,
    /// Quarantined -> susceptible (release).
    pub h: f64,
}

/// Uniform reporting-delay kernel: constant density `1/L` on the window
/// `[T, T + L)`, zero elsewhere. `T` is the reporting delay, `L` the span
/// of time over which reported cases keep influencing behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformKernel {
    /// Reporting delay `T >= 0`.
    pub reporting_delay: f64,
    /// Information window `L > 0`.
    pub window: f64,
}

impl UniformKernel {
    pub fn new(reporting_delay: f64, window: f64) -> Result<Self, ModelError> {
        if !(reporting_delay.is_finite() && reporting_delay >= 0.0) {
            return Err(ModelError::NegativeReportingDelay {
                value: reporting_delay,
            });
        }
        if !(window.is_finite() && window > 0.0) {
            return Err(ModelError::NonPositiveWindow { value: window });
        }
        Ok(Self {
            reporting_delay,
            window,
        })
    }

    /// Kernel density at lag `a`. The window is taken half-open on the
    /// right so that grid sums with spacing dividing `T` and `L` integrate
    /// to exactly one.
    pub fn density(&self, a: f64) -> f64 {
        if a >= self.reporting_delay && a < self.reporting_delay + self.window {
            1.0 / self.window
        } else {
            0.0
        }
    }

    /// End of the compact support, `T + L`.
    pub fn support_end(&self) -> f64 {
        self.reporting_delay + self.window
    }
}

/// Compartment densities at one instant. The recovered compartment is a
/// passive output: it never feeds back into the other four equations, so
/// it is carried only when requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub s: f64,
    pub v: f64,
    pub q: f64,
    pub i: f64,
    pub r: Option<f64>,
}

impl State {
    pub fn new(s: f64, v: f64, q: f64, i: f64) -> Self {
        Self {
            s,
            v,
            q,
            i,
            r: None,
        }
    }

    pub fn with_r(s: f64, v: f64, q: f64, i: f64, r: f64) -> Self {
        Self {
            s,
            v,
            q,
            i,
            r: Some(r),
        }
    }

    /// Sum of the four analyzed compartments (excludes `R`); this is the
    /// quantity bounded by `b / mu` on the feasible set.
    pub fn svqi(&self) -> f64 {
        self.s + self.v + self.q + self.i
    }

    /// Smallest of the four analyzed components.
    pub fn min_component(&self) -> f64 {
        self.s.min(self.v).min(self.q).min(self.i)
    }

    /// Largest absolute componentwise deviation over `S`, `V`, `Q`, `I`.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        (self.s - other.s)
            .abs()
            .max((self.v - other.v).abs())
            .max((self.q - other.q).abs())
            .max((self.i - other.i).abs())
    }
}

/// Time derivatives matching [`State`] componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub ds: f64,
    pub dv: f64,
    pub dq: f64,
    pub di: f64,
    pub dr: Option<f64>,
}

/// The disease-free state `(b/mu, 0, 0, 0)`.
pub fn dfe_state(params: &ModelParams) -> State {
    State::new(params.population_cap(), 0.0, 0.0, 0.0)
}

/// Right-hand side of the delay system. The infection history enters only
/// through `convolved_i`; everything else is evaluated at `state`.
///
/// `dr` is populated exactly when `state.r` is present
/// (`R' = gamma I - mu R`).
pub fn rhs(params: &ModelParams, state: &State, convolved_i: f64) -> StateDerivative {
    let p = params;
    let TransitionRates { g1, g2, h } = p.rates_raw(convolved_i);
    let State { s, v, q, i, r } = *state;
    let infection = p.beta * s * i;
    let leak = p.sigma * p.beta * q * i;
    StateDerivative {
        ds: p.b - infection - g1 * s - g2 * s - p.mu * s + h * q + p.rho * v,
        dv: g2 * s + p.lambda * q - (p.rho + p.mu) * v,
        dq: g1 * s - h * q - leak - (p.lambda + p.mu) * q,
        di: infection + leak - (p.gamma + p.mu) * i,
        dr: r.map(|r| p.gamma * i - p.mu * r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn baseline_params() -> ModelParams {
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

    #[test]
    fn r0_matches_reported_values() {
        // Parameter sets from the single/double/triple-root case studies.
        let single = ModelParams {
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
        .unwrap();
        assert_relative_eq!(single.r0(), 3.1080, epsilon = 1e-4);

        let triple = ModelParams {
            beta: 0.04,
            alpha: 270.0,
            q1: 510.0,
            q2: 30.0,
            rho: 0.2,
            ..single
        };
        assert_relative_eq!(triple.r0(), 3.1877, epsilon = 1e-4);
    }

    #[test]
    fn r0_vanishes_with_transmission() {
        // beta > 0 is required by validation, so probe the limit.
        let mut p = baseline_params();
        p.beta = 1e-12;
        assert!(p.validate().is_ok());
        assert!(p.r0() < 1e-10);
        p.beta = 0.0;
        assert_eq!(
            p.validate(),
            Err(ModelError::NonPositive {
                name: "beta",
                value: 0.0
            })
        );
    }

    #[test]
    fn with_r0_round_trips() {
        let p = baseline_params().with_r0(2.5);
        assert_relative_eq!(p.beta, 60.03125, max_relative = 1e-14);
        assert_relative_eq!(p.r0(), 2.5, max_relative = 1e-14);
    }

    #[test]
    fn rates_examples() {
        let p = baseline_params();
        let at_zero = p.rates(0.0).unwrap();
        assert_eq!((at_zero.g1, at_zero.g2, at_zero.h), (0.0, 0.0, p.delta));

        let at_one = p.rates(1.0).unwrap();
        assert_eq!((at_one.g1, at_one.g2, at_one.h), (75.0, 10.0, 6.0));

        assert!(p.rates(-1e-9).is_err());
        // h decays to zero for large histories.
        assert!(p.rates(1e12).unwrap().h < 1e-10);
    }

    #[test]
    fn sigma_bound_is_enforced() {
        let mut p = baseline_params();
        p.sigma = 1.0;
        assert!(matches!(
            p.validate(),
            Err(ModelError::SigmaOutOfRange { .. })
        ));
        p.sigma = -0.1;
        assert!(p.validate().is_err());
        p.sigma = 0.0;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn dfe_is_a_fixed_point() {
        let p = baseline_params();
        let d = rhs(&p, &dfe_state(&p), 0.0);
        assert_eq!((d.ds, d.dv, d.dq, d.di), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(d.dr, None);
    }

    #[test]
    fn derivative_sum_identity() {
        // S' + V' + Q' + I' + R' == b - mu (S + V + Q + I + R) for any state,
        // since every inter-compartment flow cancels pairwise.
        let p = baseline_params();
        let mut lcg = 0x2545f4914f6cdd1du64;
        let mut unit = move || {
            lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (lcg >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let st = State::with_r(unit(), unit(), unit(), unit(), unit());
            let conv = unit();
            let d = rhs(&p, &st, conv);
            let total = d.ds + d.dv + d.dq + d.di + d.dr.unwrap();
            let expected = p.b - p.mu * (st.svqi() + st.r.unwrap());
            assert_relative_eq!(total, expected, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn kernel_density_normalizes_on_grid() {
        let k = UniformKernel::new(0.5, 0.25).unwrap();
        assert_eq!(k.density(0.49), 0.0);
        assert_eq!(k.density(0.5), 4.0);
        assert_eq!(k.density(0.74), 4.0);
        assert_eq!(k.density(0.75), 0.0);
        let dt = 0.25 / 300.0;
        let total: f64 = (0..((k.support_end() / dt).round() as usize))
            .map(|j| k.density(j as f64 * dt) * dt)
            .sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kernel_rejects_bad_shape() {
        assert!(UniformKernel::new(-0.1, 0.25).is_err());
        assert!(UniformKernel::new(0.5, 0.0).is_err());
        assert!(UniformKernel::new(0.0, 0.25).is_ok());
    }
}
