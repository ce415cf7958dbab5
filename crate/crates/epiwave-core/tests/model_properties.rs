//! Property tests for the rate functions and the reproduction number.

mod common;

use common::*;
use epiwave_core::model::rhs;
use epiwave_core::State;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    // g1, g2 strictly increase and h strictly decreases in the convolved
    // infection history.
    #[test]
    fn rates_are_monotone(x in 0.0..50.0f64, gap in 1e-6..10.0f64) {
        let p = baseline();
        let lo = p.rates(x).unwrap();
        let hi = p.rates(x + gap).unwrap();
        prop_assert!(hi.g1 > lo.g1);
        prop_assert!(hi.g2 > lo.g2);
        prop_assert!(hi.h < lo.h);
    }

    // The compartment flows cancel pairwise, leaving only demography.
    #[test]
    fn flows_cancel_in_the_population_total(
        s in 0.0..2.0f64,
        v in 0.0..2.0f64,
        q in 0.0..2.0f64,
        i in 0.0..2.0f64,
        r in 0.0..2.0f64,
        conv in 0.0..2.0f64,
    ) {
        let p = baseline();
        let st = State::with_r(s, v, q, i, r);
        let d = rhs(&p, &st, conv);
        let total = d.ds + d.dv + d.dq + d.di + d.dr.unwrap();
        let expected = p.b - p.mu * (st.svqi() + r);
        let scale = total.abs().max(expected.abs()).max(1.0);
        prop_assert!((total - expected).abs() <= 1e-12 * scale);
    }
}

#[test]
fn r0_monotonicity_by_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..25 {
        let p = random_params(&mut rng);
        let base = p.r0();
        let bump = 1e-6;

        let mut up = p;
        up.beta *= 1.0 + bump;
        assert!(up.r0() > base, "r0 must increase with beta");

        let mut up = p;
        up.b *= 1.0 + bump;
        assert!(up.r0() > base, "r0 must increase with b");

        let mut up = p;
        up.gamma *= 1.0 + bump;
        assert!(up.r0() < base, "r0 must decrease with gamma");

        let mut up = p;
        up.mu *= 1.0 + bump;
        assert!(up.r0() < base, "r0 must decrease with mu");
    }
}
