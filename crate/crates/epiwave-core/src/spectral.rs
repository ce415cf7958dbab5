//! Linear stability machinery: disease-free spectrum, endemic
//! linearization coefficients, the transcendental characteristic equation
//! under the uniform kernel, the K-function root hunt, critical-delay
//! ladders, crossing directions and stability-interval assembly.
//!
//! Linearizing around an endemic point and inserting the uniform kernel
//! turns the characteristic equation into
//!
//! ```text
//! P(z) = z^4 + A3 z^3 + A2 z^2 + A1 z + A0
//!        + (B2 z^2 + B1 z + B0) * (1 - e^{-zL})/(zL) * e^{-zT} = 0.
//! ```
//!
//! Purely imaginary roots `z = iw` exist exactly when `K(w^2) = 0` for a
//! real quintic-plus-cosine function `K` built from the coefficients; each
//! root `x* = w^2` spawns a ladder of critical delays spaced `2 pi / w`,
//! and the sign of `K'(x*)` gives the direction in which the root pair
//! crosses the imaginary axis as the reporting delay `T` grows.

use crate::equilibria::{EquilibriumKind, EquilibriumPoint};
use crate::error::SpectralError;
use crate::model::ModelParams;
use nalgebra::Matrix4;
use num_complex::Complex64;
use std::f64::consts::PI;

/// `|1 - cos(wL)|` below this is treated as a degenerate frequency.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// `|K'(x*)|` below `1e-8 * coefficient scale` means the crossing is
/// tangent and transversality fails.
pub const TANGENCY_REL_TOL: f64 = 1e-8;

/// Grid resolution of the K-function sign scan.
const SCAN_POINTS: usize = 200_000;

/// Eigenvalues of the linearization at the disease-free equilibrium:
/// `-mu`, `-(rho+mu)`, `-(delta+lambda+mu)` and `(gamma+mu)(R0-1)`.
pub fn dfe_eigenvalues(params: &ModelParams) -> [f64; 4] {
    [
        -params.mu,
        -(params.rho + params.mu),
        -(params.delta + params.lambda + params.mu),
        (params.gamma + params.mu) * (params.r0() - 1.0),
    ]
}

/// Shorthand quantities of the endemic linearization.
///
/// `k3_amp` and `k4_amp` are the delay-free amplitudes of the two rates
/// that act on the convolved history (the full terms carry the kernel
/// transform as a factor).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationAmplitudes {
    pub k1: f64,
    pub k2: f64,
    pub k5: f64,
    pub k6: f64,
    pub k3_amp: f64,
    pub k4_amp: f64,
}

/// Linearization shorthands at an endemic point.
pub fn linearization_amplitudes(
    params: &ModelParams,
    eq: &EquilibriumPoint,
) -> Result<LinearizationAmplitudes, SpectralError> {
    if eq.kind != EquilibriumKind::Endemic {
        return Err(SpectralError::DfeInput);
    }
    let p = params;
    let info = 1.0 + p.alpha * eq.i;
    Ok(LinearizationAmplitudes {
        k1: (p.beta + p.q1 + p.q2) * eq.i + p.mu,
        k2: p.delta / info,
        k5: p.delta / info + p.sigma * p.beta * eq.i + p.lambda + p.mu,
        k6: p.rho + p.mu,
        k3_amp: p.q2 * eq.s,
        k4_amp: p.q1 * eq.s + p.alpha * p.delta * eq.q / (info * info),
    })
}

/// Coefficients of the characteristic machinery at one endemic point and
/// window length: the delay-free quartic `A3..A0`, the delayed quadratic
/// `B2..B0`, and the `c`/`r` coefficients of the K-function.
///
/// The identities `c4 = A3^2 - 2 A2`, ..., `r0 = -2 B0^2 / L^2` hold by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCoeffs {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub b2: f64,
    pub b1: f64,
    pub b0: f64,
    pub c4: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub r2: f64,
    pub r1: f64,
    pub r0: f64,
    /// Information window `L` the `r` coefficients were built with.
    pub window: f64,
}

/// Builds [`CharCoeffs`] from the closed-form expansion of the
/// linearization determinant. Rejects the disease-free point, whose
/// spectrum is available in closed form from [`dfe_eigenvalues`].
pub fn char_coeffs(
    params: &ModelParams,
    eq: &EquilibriumPoint,
    window: f64,
) -> Result<CharCoeffs, SpectralError> {
    if !(window.is_finite() && window > 0.0) {
        return Err(SpectralError::NonPositiveWindow { value: window });
    }
    let LinearizationAmplitudes {
        k1,
        k2,
        k5,
        k6,
        k3_amp,
        k4_amp,
    } = linearization_amplitudes(params, eq)?;
    let p = params;
    let (sb, qb, ib) = (eq.s, eq.q, eq.i);
    let (beta, sigma, rho, lambda, q1, q2) = (p.beta, p.sigma, p.rho, p.lambda, p.q1, p.q2);
    let beta2 = beta * beta;
    let sigma2 = sigma * sigma;

    let a3 = k1 + k5 + k6;
    let a2 = k1 * k5 + k5 * k6 + k1 * k6 - rho * q2 * ib - k2 * q1 * ib
        + sb * beta2 * ib
        + qb * sigma2 * beta2 * ib;
    let a1 = k1 * k5 * k6 - k2 * k6 * q1 * ib + beta2 * k5 * sb * ib + beta2 * k6 * sb * ib
        - lambda * rho * q1 * ib
        - rho * k5 * q2 * ib
        + sigma * beta2 * k2 * qb * ib
        + sigma2 * beta2 * k1 * qb * ib
        + sigma2 * beta2 * k6 * ib * qb
        + sigma * beta2 * q1 * sb * ib * ib;
    let a0 = beta2 * k5 * k6 * sb * ib
        + sigma2 * beta2 * k1 * k6 * ib * qb
        + sigma * beta2 * k6 * q1 * sb * ib * ib
        + sigma * beta2 * lambda * rho * ib * qb
        - sigma2 * beta2 * rho * q2 * qb * ib * ib
        + sigma * beta2 * k2 * k6 * qb * ib;

    let b2 = beta * q2 * sb * ib + beta * (1.0 - sigma) * k4_amp * ib;
    let b1 = (beta * k5 + beta * k6 + sigma * beta * q1 * ib
        - beta * k2
        - sigma * beta * k1
        - sigma * beta * k6)
        * k4_amp
        * ib
        + (beta * k5 + beta * k6 + sigma * beta * q1 * ib - beta * rho) * k3_amp * ib;
    let b0 = (beta * k5 * k6 + sigma * beta * rho * q2 * ib + sigma * beta * k6 * q1 * ib
        - beta * k2 * k6
        - beta * lambda * rho
        - sigma * beta * k1 * k6)
        * k4_amp
        * ib
        + (beta * k5 * k6 + sigma * beta * k6 * q1 * ib
            - beta * rho * k5
            - sigma * beta * rho * q1 * ib)
            * k3_amp
            * ib;

    let l2 = window * window;
    Ok(CharCoeffs {
        a3,
        a2,
        a1,
        a0,
        b2,
        b1,
        b0,
        c4: a3 * a3 - 2.0 * a2,
        c3: a2 * a2 + 2.0 * a0 - 2.0 * a1 * a3,
        c2: a1 * a1 - 2.0 * a0 * a2,
        c1: a0 * a0,
        r2: -2.0 * b2 * b2 / l2,
        r1: -2.0 * (b1 * b1 - 2.0 * b0 * b2) / l2,
        r0: -2.0 * b0 * b0 / l2,
        window,
    })
}

impl CharCoeffs {
    /// `K(x) = x^5 + c4 x^4 + c3 x^3 + c2 x^2 + c1 x
    ///        + (r2 x^2 + r1 x + r0)(1 - cos(sqrt(x) L))`, for `x >= 0`.
    pub fn k_eval(&self, x: f64) -> f64 {
        let poly = ((((x + self.c4) * x + self.c3) * x + self.c2) * x + self.c1) * x;
        let osc = (self.r2 * x + self.r1) * x + self.r0;
        poly + osc * (1.0 - (x.sqrt() * self.window).cos())
    }

    /// Term-wise analytic derivative of `K`, with the `x -> 0` limit of
    /// the oscillatory product handled by series.
    pub fn k_deriv(&self, x: f64) -> f64 {
        let poly = (((5.0 * x + 4.0 * self.c4) * x + 3.0 * self.c3) * x + 2.0 * self.c2) * x
            + self.c1;
        let osc = (self.r2 * x + self.r1) * x + self.r0;
        let osc_d = 2.0 * self.r2 * x + self.r1;
        let l = self.window;
        let u = x.sqrt() * l;
        // d/dx [1 - cos(sqrt(x) L)] = L sin(sqrt(x) L) / (2 sqrt(x))
        let cos_term = if u < 1e-6 {
            l * l / 2.0 * (1.0 - x * l * l / 6.0)
        } else {
            l * u.sin() / (2.0 * x.sqrt())
        };
        poly + osc_d * (1.0 - u.cos()) + osc * cos_term
    }

    /// Magnitude scale of the K coefficients, used to normalize the root
    /// and tangency tolerances.
    pub fn k_scale(&self) -> f64 {
        1.0f64
            .max(self.c4.abs())
            .max(self.c3.abs())
            .max(self.c2.abs())
            .max(self.c1.abs())
            .max(2.0 * self.r2.abs())
            .max(2.0 * self.r1.abs())
            .max(2.0 * self.r0.abs())
    }

    /// Kernel transform `(1 - e^{-zL})/(zL)` of the uniform window,
    /// without the reporting-delay factor.
    pub fn window_transform(&self, z: Complex64) -> Complex64 {
        let u = z * self.window;
        if u.norm() < 1e-8 {
            // 1 - u/2 + u^2/6 - u^3/24
            Complex64::new(1.0, 0.0) - u / 2.0 + u * u / 6.0 - u * u * u / 24.0
        } else {
            (Complex64::new(1.0, 0.0) - (-u).exp()) / u
        }
    }

    /// Full characteristic function `P(z; T, L)`; purely imaginary roots
    /// emitted by the ladder machinery drive this below 1e-6.
    pub fn char_residual(&self, z: Complex64, reporting_delay: f64) -> Complex64 {
        let quartic = (((z + self.a3) * z + self.a2) * z + self.a1) * z + self.a0;
        let delayed = (self.b2 * z + self.b1) * z + self.b0;
        quartic + delayed * self.window_transform(z) * (-z * reporting_delay).exp()
    }

    /// Beyond this point `x^5` dominates every other term of `K`, so the
    /// default scan range is capped here.
    pub fn default_x_max(&self) -> f64 {
        10.0 * self.c4.max(1.0) * self.c4.max(1.0)
    }

    fn scan_bound(&self) -> f64 {
        // Cauchy-style bound with the oscillatory factor at its extremes.
        1.0 + self
            .c4
            .abs()
            .max(self.c3.abs())
            .max(self.c2.abs() + 2.0 * self.r2.abs())
            .max(self.c1.abs() + 2.0 * self.r1.abs())
            .max(2.0 * self.r0.abs())
    }
}

/// One positive root of `K` and the local slope deciding the crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KRoot {
    /// Root `x* > 0` of `K`.
    pub x: f64,
    /// Candidate angular frequency `w = sqrt(x*)`.
    pub frequency: f64,
    /// `K'(x*)`.
    pub k_deriv: f64,
    /// False when `|K'(x*)|` is below the tangency tolerance, in which
    /// case the crossing has no defined direction.
    pub transversal: bool,
}

/// All sign-change roots of `K` on `(0, x_max]`, ascending, Newton-polished
/// to `|K| < 1e-10` relative to the coefficient scale.
pub fn k_roots(coeffs: &CharCoeffs, x_max: f64) -> Vec<KRoot> {
    assert!(x_max > 0.0, "x_max must be positive");
    let hi = x_max.min(coeffs.scan_bound());
    let step = hi / SCAN_POINTS as f64;
    let scale = coeffs.k_scale();

    let mut roots = Vec::new();
    let mut x_prev = step * 1e-6; // skip the structural root at x = 0
    let mut k_prev = coeffs.k_eval(x_prev);
    for idx in 1..=SCAN_POINTS {
        let x = step * idx as f64;
        let k = coeffs.k_eval(x);
        if k == 0.0 {
            // Exact grid hit; nudge so the bracket logic below still sees a
            // sign change.
            let x_eps = x + step * 1e-9;
            let k_eps = coeffs.k_eval(x_eps);
            if k_prev * k_eps < 0.0 {
                roots.push(polish_k_root(coeffs, x_prev, x_eps, scale));
            }
            x_prev = x_eps;
            k_prev = k_eps;
            continue;
        }
        if k_prev * k < 0.0 {
            roots.push(polish_k_root(coeffs, x_prev, x, scale));
        }
        x_prev = x;
        k_prev = k;
    }
    roots
}

fn polish_k_root(coeffs: &CharCoeffs, mut lo: f64, mut hi: f64, scale: f64) -> KRoot {
    let mut f_lo = coeffs.k_eval(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f_mid = coeffs.k_eval(mid);
        if f_lo * f_mid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let f = coeffs.k_eval(x);
        if f.abs() <= 1e-12 * scale {
            break;
        }
        let d = coeffs.k_deriv(x);
        if d == 0.0 {
            break;
        }
        let next = x - f / d;
        if next <= lo || next >= hi {
            break;
        }
        x = next;
    }
    debug_assert!(coeffs.k_eval(x).abs() <= 1e-10 * scale);
    let k_deriv = coeffs.k_deriv(x);
    KRoot {
        x,
        frequency: x.sqrt(),
        k_deriv,
        transversal: k_deriv.abs() >= TANGENCY_REL_TOL * scale,
    }
}

/// `(eps1, eps2) = (cos(wT*), sin(wT*))` at a candidate frequency, via the
/// closed rational forms. When `K(w^2) = 0` the pair lies on the unit
/// circle to within 1e-9.
pub fn epsilons(coeffs: &CharCoeffs, w: f64) -> Result<(f64, f64), SpectralError> {
    let l = coeffs.window;
    let (cw, sw) = ((w * l).cos(), (w * l).sin());
    let one_m_cos = 1.0 - cw;
    if one_m_cos.abs() <= DEGENERACY_TOL {
        return Err(SpectralError::DegenerateFrequency {
            frequency: w,
            magnitude: one_m_cos.abs(),
        });
    }
    let w2 = w * w;
    let real_quartic = coeffs.a2 * w2 - w2 * w2 - coeffs.a0;
    let imag_quartic = coeffs.a3 * w2 * w - coeffs.a1 * w;
    let delayed_re = coeffs.b0 - coeffs.b2 * w2;
    let u = coeffs.b1 * w * one_m_cos + delayed_re * sw;
    let v = delayed_re * one_m_cos - coeffs.b1 * w * sw;
    let den = 2.0 * (delayed_re * delayed_re + w2 * coeffs.b1 * coeffs.b1) * one_m_cos;
    let eps1 = w * l * (real_quartic * u - imag_quartic * v) / den;
    let eps2 = -w * l * (real_quartic * v + imag_quartic * u) / den;
    Ok((eps1, eps2))
}

/// Critical reporting delays for a frequency from [`k_roots`]: the unique
/// angle `theta` in `[0, 2 pi)` with `cos theta = eps1`, `sin theta = eps2`
/// gives `T0 = theta / w`, then the ladder `Tn = T0 + 2 pi n / w` up to
/// `t_max`.
pub fn critical_delays(
    coeffs: &CharCoeffs,
    w: f64,
    t_max: f64,
) -> Result<Vec<f64>, SpectralError> {
    let (eps1, eps2) = epsilons(coeffs, w)?;
    let mut theta = eps2.atan2(eps1);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    let t0 = theta / w;
    let gap = 2.0 * PI / w;
    let mut delays = Vec::new();
    let mut t = t0;
    while t <= t_max {
        delays.push(t);
        t = t0 + gap * (delays.len() as f64);
    }
    Ok(delays)
}

/// Direction in which the conjugate root pair crosses the imaginary axis
/// as the reporting delay increases through a critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// Destabilizing: a root pair enters the right half-plane.
    LeftToRight,
    /// Stabilizing: a root pair returns to the left half-plane.
    RightToLeft,
}

/// Crossing direction at a K-root: left-to-right exactly when
/// `K'(x*) > 0`. Tangent roots (`|K'|` under tolerance) are an error.
pub fn crossing_direction(
    coeffs: &CharCoeffs,
    x_star: f64,
) -> Result<CrossingDirection, SpectralError> {
    let k_deriv = coeffs.k_deriv(x_star);
    if k_deriv.abs() < TANGENCY_REL_TOL * coeffs.k_scale() {
        return Err(SpectralError::Tangency { x_star, k_deriv });
    }
    Ok(if k_deriv > 0.0 {
        CrossingDirection::LeftToRight
    } else {
        CrossingDirection::RightToLeft
    })
}

/// Routh-Hurwitz verdict for the zero-delay (`T = L = 0`) quartic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticStability {
    pub stable: bool,
    /// `[A3, A2+B2, A1+B1, A0+B0]`, all required positive.
    pub coefficients: [f64; 4],
    /// `A3 [(A1+B1)(A2+B2) - A3 (A0+B0)] - (A1+B1)^2`, required positive.
    pub hurwitz: f64,
}

/// Stability of the endemic point with both delays removed, i.e. of
/// `z^4 + A3 z^3 + (A2+B2) z^2 + (A1+B1) z + (A0+B0)`.
pub fn undelayed_stability(coeffs: &CharCoeffs) -> QuarticStability {
    let a3 = coeffs.a3;
    let a2 = coeffs.a2 + coeffs.b2;
    let a1 = coeffs.a1 + coeffs.b1;
    let a0 = coeffs.a0 + coeffs.b0;
    let hurwitz = a3 * (a1 * a2 - a3 * a0) - a1 * a1;
    QuarticStability {
        stable: a3 > 0.0 && a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && hurwitz > 0.0,
        coefficients: [a3, a2, a1, a0],
        hurwitz,
    }
}

/// Lienard-Chipart test for a monic cubic `z^3 + a2 z^2 + a1 z + a0`:
/// stable exactly when `a2, a1, a0 > 0` and `a1 a2 - a0 > 0`.
pub fn lienard_chipart_cubic(a2: f64, a1: f64, a0: f64) -> bool {
    a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a1 * a2 - a0 > 0.0
}

/// A critical-delay ladder attached to one transversal K-root.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLadder {
    pub root: KRoot,
    pub direction: CrossingDirection,
    /// `T0 + 2 pi n / w` for every value not exceeding `t_max`.
    pub delays: Vec<f64>,
}

/// One reporting-delay interval with a constant number of
/// right-half-plane root pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityInterval {
    pub start: f64,
    pub end: f64,
    pub rhp_pairs: usize,
}

impl StabilityInterval {
    pub fn stable(&self) -> bool {
        self.rhp_pairs == 0
    }
}

/// Complete Hopf picture at one endemic point: K-roots, ladders, and the
/// partition of `(0, t_max)` into stable/unstable delay intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfSummary {
    pub undelayed: QuarticStability,
    /// Right-half-plane pairs at `T = 0` (zero when undelayed-stable).
    pub initial_rhp_pairs: usize,
    pub roots: Vec<KRoot>,
    pub ladders: Vec<DelayLadder>,
    pub intervals: Vec<StabilityInterval>,
    pub t_max: f64,
}

impl HopfSummary {
    /// Stable sub-intervals, in order.
    pub fn stable_intervals(&self) -> Vec<(f64, f64)> {
        self.intervals
            .iter()
            .filter(|iv| iv.stable())
            .map(|iv| (iv.start, iv.end))
            .collect()
    }
}

/// Merges every ladder into a sorted crossing sequence and labels the
/// delay axis by the running count of right-half-plane root pairs:
/// +1 at each left-to-right crossing, -1 at each right-to-left one.
///
/// The count starts at the undelayed quartic's pair count (zero when it is
/// stable). A decrement below zero means a crossing was missed and is
/// reported as [`SpectralError::NegativeCount`] rather than clamped.
///
/// Primarily meaningful in the unique-equilibrium regime
/// (`sigma * R0 < 1`); with several endemic points it describes whichever
/// point the coefficients were built at.
pub fn stability_intervals(coeffs: &CharCoeffs, t_max: f64) -> Result<HopfSummary, SpectralError> {
    assert!(t_max > 0.0, "t_max must be positive");
    let a0_total = coeffs.a0 + coeffs.b0;
    if a0_total.is_nan() || a0_total <= 0.0 {
        return Err(SpectralError::ZeroRootBoundary { value: a0_total });
    }

    let undelayed = undelayed_stability(coeffs);
    let initial_rhp_pairs = if undelayed.stable {
        0
    } else {
        let rhp = quartic_rhp_count(undelayed.coefficients);
        if !rhp.is_multiple_of(2) {
            return Err(SpectralError::UnpairedRoots { count: rhp });
        }
        rhp / 2
    };

    let roots = k_roots(coeffs, coeffs.default_x_max());
    let mut ladders = Vec::new();
    let mut events: Vec<(f64, i32)> = Vec::new();
    for root in &roots {
        if !root.transversal {
            continue;
        }
        let direction = crossing_direction(coeffs, root.x)?;
        let delays = critical_delays(coeffs, root.frequency, t_max)?;
        let sign = match direction {
            CrossingDirection::LeftToRight => 1,
            CrossingDirection::RightToLeft => -1,
        };
        events.extend(delays.iter().map(|&t| (t, sign)));
        ladders.push(DelayLadder {
            root: *root,
            direction,
            delays,
        });
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut intervals = Vec::new();
    let mut pairs = initial_rhp_pairs;
    let mut start = 0.0;
    for (t, sign) in events {
        if t > start {
            intervals.push(StabilityInterval {
                start,
                end: t,
                rhp_pairs: pairs,
            });
            start = t;
        }
        if sign < 0 && pairs == 0 {
            return Err(SpectralError::NegativeCount { delay: t });
        }
        pairs = (pairs as i64 + sign as i64) as usize;
    }
    if t_max > start {
        intervals.push(StabilityInterval {
            start,
            end: t_max,
            rhp_pairs: pairs,
        });
    }

    Ok(HopfSummary {
        undelayed,
        initial_rhp_pairs,
        roots,
        ladders,
        intervals,
        t_max,
    })
}

/// Number of roots of the monic quartic `z^4 + a3 z^3 + a2 z^2 + a1 z + a0`
/// with positive real part, from companion-matrix eigenvalues.
fn quartic_rhp_count(coefficients: [f64; 4]) -> usize {
    let [a3, a2, a1, a0] = coefficients;
    #[rustfmt::skip]
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -a0,
        1.0, 0.0, 0.0, -a1,
        0.0, 1.0, 0.0, -a2,
        0.0, 0.0, 1.0, -a3,
    );
    companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.re > 0.0)
        .count()
}
