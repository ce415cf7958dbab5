//! Steady states: the disease-free point, the endemic cubic and its
//! positive roots, back-substitution to full equilibrium points, and
//! Descartes sign diagnostics.
//!
//! Setting the right-hand side to zero and eliminating `S`, `Q`, `V`
//! reduces the endemic condition to a cubic `A(x) = d3 x^3 + d2 x^2 +
//! d1 x + d0` in the equilibrium prevalence `x = I`. Its positive roots
//! (up to three) are found from the companion matrix and polished with
//! Newton steps; nearby roots are merged into multiple roots.

use crate::model::{dfe_state, rhs, ModelParams, State};
use nalgebra::Matrix3;
use num_complex::Complex64;

/// Relative separation below which two companion-matrix roots are declared
/// a single multiple root. The double-root showcase parameter set produces
/// a genuine split of ~3.4e-5 between its two upper roots, so anything
/// tighter misclassifies it as two simple roots.
pub const MULTIPLICITY_REL_TOL: f64 = 1e-4;

/// Default positivity threshold used by [`endemic_points`].
pub fn default_root_tol(params: &ModelParams) -> f64 {
    1e-12 * params.population_cap()
}

/// Coefficients of the endemic prevalence cubic `A(x)`.
///
/// For valid parameters with `sigma > 0` the leading coefficient `d3` is
/// negative, and `d0` has the sign of `R0 - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndemicCubic {
    pub d3: f64,
    pub d2: f64,
    pub d1: f64,
    pub d0: f64,
}

impl EndemicCubic {
    pub fn eval(&self, x: f64) -> f64 {
        ((self.d3 * x + self.d2) * x + self.d1) * x + self.d0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        (3.0 * self.d3 * x + 2.0 * self.d2) * x + self.d1
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        6.0 * self.d3 * x + 2.0 * self.d2
    }
}

/// Endemic cubic coefficients in closed form.
pub fn endemic_cubic(params: &ModelParams) -> EndemicCubic {
    let ModelParams {
        b: _,
        beta,
        gamma: _,
        lambda,
        mu,
        rho,
        sigma,
        delta,
        alpha,
        q1,
        q2,
    } = *params;
    let r0 = params.r0();
    let rm = rho + mu;

    let d3 = -alpha * sigma * beta * (beta * rm + q1 * rm + mu * q2);
    let d2 = rm
        * (alpha * sigma * mu * q1 * r0 + alpha * sigma * beta * mu * (r0 - 1.0)
            - alpha * beta * (lambda + mu)
            - alpha * mu * q1
            - sigma * beta * beta
            - sigma * beta * q1)
        - alpha * mu * q2 * (lambda + mu)
        - alpha * mu * lambda * q1
        - mu * sigma * beta * q2;
    let d1 = rm
        * ((sigma * beta * mu + alpha * lambda * mu + alpha * mu * mu) * (r0 - 1.0)
            + sigma * mu * q1 * r0
            - beta * (lambda + mu)
            - mu * q1
            - beta * delta)
        - mu * q2 * (lambda + mu)
        - mu * lambda * q1
        - delta * q2 * mu;
    let d0 = mu * rm * (mu + lambda + delta) * (r0 - 1.0);

    EndemicCubic { d3, d2, d1, d0 }
}

/// Sign of a coefficient for the Descartes table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Descartes sign pattern of `(d3, d2, d1, d0)` together with the counts of
/// distinct positive roots it admits.
#[derive(Debug, Clone, PartialEq)]
pub struct DescartesTable {
    pub signs: [Sign; 4],
    pub sign_changes: usize,
    /// Possible numbers of *distinct* positive roots. With `c` sign
    /// changes the root count (with multiplicity) is `c, c-2, ...`, so the
    /// distinct count ranges over `0..=c`, excluding zero when `c` is odd.
    pub admissible_counts: Vec<usize>,
}

/// Sign diagnostics for an endemic cubic.
pub fn descartes_table(cubic: &EndemicCubic) -> DescartesTable {
    let signs = [
        Sign::of(cubic.d3),
        Sign::of(cubic.d2),
        Sign::of(cubic.d1),
        Sign::of(cubic.d0),
    ];
    let nonzero: Vec<Sign> = signs.iter().copied().filter(|s| *s != Sign::Zero).collect();
    let sign_changes = nonzero.windows(2).filter(|w| w[0] != w[1]).count();
    let admissible_counts = (0..=sign_changes)
        .filter(|&k| k > 0 || sign_changes % 2 == 0)
        .collect();
    DescartesTable {
        signs,
        sign_changes,
        admissible_counts,
    }
}

/// One real root of the endemic cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoot {
    pub value: f64,
    pub multiplicity: usize,
}

/// All real roots of `A(x)` greater than `tol`, ascending, with nearby
/// roots merged into multiple roots (see [`MULTIPLICITY_REL_TOL`]).
///
/// Roots come from the eigenvalues of the 3x3 companion matrix, which
/// stays well-behaved near double roots where the closed-form cubic
/// formulas lose half the significant digits. Simple roots get a Newton
/// polish on `A`, double roots on `A'`, and a triple root is the inflexion
/// point `-d2 / (3 d3)`.
pub fn positive_roots(cubic: &EndemicCubic, tol: f64) -> Vec<CubicRoot> {
    assert!(tol > 0.0, "positivity tolerance must be positive");
    if cubic.d3 == 0.0 {
        // Degenerate leading coefficient cannot occur for valid parameters
        // with sigma > 0; treat as "no endemic root information".
        return Vec::new();
    }

    let p = cubic.d2 / cubic.d3;
    let q = cubic.d1 / cubic.d3;
    let r = cubic.d0 / cubic.d3;
    #[rustfmt::skip]
    let companion = Matrix3::new(
        0.0, 0.0, -r,
        1.0, 0.0, -q,
        0.0, 1.0, -p,
    );
    let mut eigs: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.re.total_cmp(&b.re));

    // Greedy clustering along the real axis; a conjugate pair with tiny
    // imaginary part collapses onto its real part as a double root.
    let mut roots = Vec::new();
    let mut idx = 0;
    while idx < eigs.len() {
        let mut cluster = vec![eigs[idx]];
        let mut last = eigs[idx];
        idx += 1;
        while idx < eigs.len() {
            let scale = MULTIPLICITY_REL_TOL * last.re.abs().max(1.0);
            if (eigs[idx] - last).norm() <= scale || (eigs[idx].re - last.re).abs() <= scale {
                cluster.push(eigs[idx]);
                last = eigs[idx];
                idx += 1;
            } else {
                break;
            }
        }
        let center_re = cluster.iter().map(|z| z.re).sum::<f64>() / cluster.len() as f64;
        let scale = MULTIPLICITY_REL_TOL * center_re.abs().max(1.0);
        if cluster.iter().any(|z| z.im.abs() > scale) {
            continue; // genuinely complex pair
        }
        let multiplicity = cluster.len();
        let value = match multiplicity {
            1 => newton_polish(center_re, |x| (cubic.eval(x), cubic.deriv(x))),
            2 => newton_polish(center_re, |x| (cubic.deriv(x), cubic.second_deriv(x))),
            _ => -cubic.d2 / (3.0 * cubic.d3),
        };
        roots.push(CubicRoot {
            value,
            multiplicity,
        });
    }

    roots.retain(|r| r.value > tol);
    roots.sort_by(|a, b| a.value.total_cmp(&b.value));
    roots
}

fn newton_polish(mut x: f64, f_and_df: impl Fn(f64) -> (f64, f64)) -> f64 {
    for _ in 0..40 {
        let (f, df) = f_and_df(x);
        if df == 0.0 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Which steady state a point represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    DiseaseFree,
    Endemic,
}

/// A steady state together with the residual of the right-hand side there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub kind: EquilibriumKind,
    pub s: f64,
    pub v: f64,
    pub q: f64,
    pub i: f64,
    /// `max |rhs|` over the four components, evaluated with the convolved
    /// history frozen at `i`.
    pub residual: f64,
}

impl EquilibriumPoint {
    pub fn state(&self) -> State {
        State::new(self.s, self.v, self.q, self.i)
    }
}

/// A positive cubic root whose back-substituted components were not all
/// nonnegative. Kept for diagnostics instead of being silently dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InadmissibleRoot {
    pub i: f64,
    pub s: f64,
    pub v: f64,
    pub q: f64,
}

/// Result of the endemic solve: admissible equilibrium points plus any
/// inadmissible roots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EndemicSolve {
    pub points: Vec<EquilibriumPoint>,
    pub inadmissible: Vec<InadmissibleRoot>,
}

/// The disease-free equilibrium as an [`EquilibriumPoint`].
pub fn dfe_point(params: &ModelParams) -> EquilibriumPoint {
    let st = dfe_state(params);
    EquilibriumPoint {
        kind: EquilibriumKind::DiseaseFree,
        s: st.s,
        v: st.v,
        q: st.q,
        i: st.i,
        residual: residual_at(params, &st),
    }
}

fn residual_at(params: &ModelParams, state: &State) -> f64 {
    let d = rhs(params, state, state.i);
    d.ds.abs().max(d.dv.abs()).max(d.dq.abs()).max(d.di.abs())
}

/// Back-substitutes `S`, `Q`, `V` for a given endemic prevalence.
pub fn back_substitute(params: &ModelParams, i_bar: f64) -> (f64, f64, f64) {
    let p = params;
    let r0 = p.r0();
    let info = 1.0 + p.alpha * i_bar;
    let den = p.mu
        * r0
        * (info * (p.sigma * p.q1 * i_bar + p.sigma * p.beta * i_bar + p.lambda + p.mu) + p.delta);
    let q_bar = p.b * p.q1 * info * i_bar / den;
    let s_bar = p.b * (info * (p.sigma * p.beta * i_bar + p.lambda + p.mu) + p.delta) / den;
    let v_bar = (p.q2 * s_bar * i_bar + p.lambda * q_bar) / (p.rho + p.mu);
    (s_bar, v_bar, q_bar)
}

/// Every endemic equilibrium of the model: one point per positive root of
/// the endemic cubic (using [`default_root_tol`]), each satisfying the
/// steady-state equations to a residual below `1e-9 * b`.
pub fn endemic_points(params: &ModelParams) -> EndemicSolve {
    let cubic = endemic_cubic(params);
    let mut solve = EndemicSolve::default();
    for root in positive_roots(&cubic, default_root_tol(params)) {
        let i_bar = root.value;
        let (s, v, q) = back_substitute(params, i_bar);
        if s < 0.0 || v < 0.0 || q < 0.0 {
            solve.inadmissible.push(InadmissibleRoot { i: i_bar, s, v, q });
            continue;
        }
        let state = State::new(s, v, q, i_bar);
        solve.points.push(EquilibriumPoint {
            kind: EquilibriumKind::Endemic,
            s,
            v,
            q,
            i: i_bar,
            residual: residual_at(params, &state),
        });
    }
    solve
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
    fn d0_vanishes_at_threshold() {
        let p = baseline_params().with_r0(1.0);
        let cubic = endemic_cubic(&p);
        let scale = p.mu * (p.rho + p.mu) * (p.mu + p.lambda + p.delta);
        assert!(cubic.d0.abs() < 1e-12 * scale);
    }

    #[test]
    fn leading_coefficient_is_negative() {
        let cubic = endemic_cubic(&baseline_params());
        assert!(cubic.d3 < 0.0);
    }

    #[test]
    fn no_endemic_state_below_threshold() {
        let p = baseline_params().with_r0(0.5);
        let cubic = endemic_cubic(&p);
        assert!(cubic.d0 < 0.0);
        assert!(positive_roots(&cubic, 1e-15).is_empty());
        assert!(endemic_points(&p).points.is_empty());
    }

    #[test]
    fn descartes_patterns() {
        use Sign::*;
        let t = descartes_table(&EndemicCubic {
            d3: -1.0,
            d2: 2.0,
            d1: 3.0,
            d0: 4.0,
        });
        assert_eq!(t.signs, [Negative, Positive, Positive, Positive]);
        assert_eq!(t.sign_changes, 1);
        assert_eq!(t.admissible_counts, vec![1]);

        let t = descartes_table(&EndemicCubic {
            d3: -1.0,
            d2: 2.0,
            d1: -3.0,
            d0: 4.0,
        });
        assert_eq!(t.sign_changes, 3);
        assert_eq!(t.admissible_counts, vec![1, 2, 3]);

        let t = descartes_table(&EndemicCubic {
            d3: -1.0,
            d2: -2.0,
            d1: -3.0,
            d0: -4.0,
        });
        assert_eq!(t.sign_changes, 0);
        assert_eq!(t.admissible_counts, vec![0]);
    }

    #[test]
    fn known_simple_roots_are_recovered() {
        // -(x-1)(x-2)(x-3) = -x^3 + 6x^2 - 11x + 6
        let cubic = EndemicCubic {
            d3: -1.0,
            d2: 6.0,
            d1: -11.0,
            d0: 6.0,
        };
        let roots = positive_roots(&cubic, 1e-12);
        assert_eq!(roots.len(), 3);
        for (root, expected) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert_eq!(root.multiplicity, 1);
            assert_relative_eq!(root.value, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_double_root_is_merged() {
        // -(x-1)^2 (x-2) = -x^3 + 4x^2 - 5x + 2
        let cubic = EndemicCubic {
            d3: -1.0,
            d2: 4.0,
            d1: -5.0,
            d0: 2.0,
        };
        let roots = positive_roots(&cubic, 1e-12);
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].multiplicity, 2);
        assert_relative_eq!(roots[0].value, 1.0, epsilon = 1e-7);
        assert_eq!(roots[1].multiplicity, 1);
        assert_relative_eq!(roots[1].value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn triple_root_is_merged() {
        // -(x-2)^3 = -x^3 + 6x^2 - 12x + 8
        let cubic = EndemicCubic {
            d3: -1.0,
            d2: 6.0,
            d1: -12.0,
            d0: 8.0,
        };
        let roots = positive_roots(&cubic, 1e-12);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 3);
        assert_relative_eq!(roots[0].value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn baseline_has_single_tiny_endemic_point() {
        let p = baseline_params();
        let solve = endemic_points(&p);
        assert!(solve.inadmissible.is_empty());
        assert_eq!(solve.points.len(), 1);
        let pt = solve.points[0];
        assert_relative_eq!(pt.i, 3.0605e-4, max_relative = 1e-3);
        assert!(pt.residual < 1e-9 * p.b, "residual {}", pt.residual);
        assert_eq!(pt.kind, EquilibriumKind::Endemic);
    }

    #[test]
    fn dfe_point_is_clean() {
        let p = baseline_params();
        let pt = dfe_point(&p);
        assert_eq!(pt.kind, EquilibriumKind::DiseaseFree);
        assert_eq!(pt.s, p.population_cap());
        assert_eq!((pt.v, pt.q, pt.i), (0.0, 0.0, 0.0));
        assert_eq!(pt.residual, 0.0);
    }
}
