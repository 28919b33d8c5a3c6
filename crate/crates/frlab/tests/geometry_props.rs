//! Property tests for the half-space arithmetic: the pairing identities,
//! the sharp pairing bound, and the invariant distance.

use frlab::geometry::{cpow, SiegelPoint};
use frlab::Complex64;
use proptest::prelude::*;

fn point_strategy(n: usize) -> impl Strategy<Value = SiegelPoint<f64>> {
    let coord = (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| Complex64::new(re, im));
    let zprime = proptest::collection::vec(coord, n - 1);
    let base = -5.0f64..5.0;
    let height = 1e-3f64..4.0;
    (zprime, base, height).prop_map(|(zp, x, h)| {
        let horiz: f64 = zp.iter().map(|c| c.norm_sqr()).sum();
        SiegelPoint::new(zp, Complex64::new(x, horiz + h))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn diagonal_pairing_is_the_height(z in point_strategy(2)) {
        let d = z.pairing(&z);
        prop_assert!((d.re - z.rho()).abs() <= 1e-12);
        prop_assert!(d.im.abs() <= 1e-12);
    }

    #[test]
    fn pairing_is_hermitian(z in point_strategy(2), w in point_strategy(2)) {
        let zw = z.pairing(&w);
        let wz = w.pairing(&z);
        prop_assert!((zw - wz.conj()).norm() <= 1e-12);
    }

    #[test]
    fn real_part_identity(z in point_strategy(2), w in point_strategy(2)) {
        let zw = z.pairing(&w);
        let mut cross = 0.0;
        for (a, b) in z.zprime().iter().zip(w.zprime()) {
            cross += (a - b).norm_sqr();
        }
        let expected = (z.rho() + w.rho() + cross) / 2.0;
        prop_assert!((zw.re - expected).abs() <= 1e-12);
    }

    #[test]
    fn pairing_dominates_heights(z in point_strategy(2), w in point_strategy(2)) {
        let bound = 2.0 * z.pairing(&w).norm();
        prop_assert!(bound >= z.rho().max(w.rho()) - 1e-12);
    }

    #[test]
    fn distance_is_a_symmetric_premetric(z in point_strategy(2), w in point_strategy(2)) {
        let d = z.bergman_distance(&w).unwrap();
        let e = w.bergman_distance(&z).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - e).abs() <= 1e-12);
        prop_assert!(z.bergman_distance(&z).unwrap() <= 1e-12);
    }

    #[test]
    fn principal_power_adds_exponents(
        re in 0.05f64..4.0,
        im in -4.0f64..4.0,
        x in -2.0f64..2.0,
        y in -2.0f64..2.0,
    ) {
        let base = Complex64::new(re, im);
        let lhs = cpow(base, x + y).unwrap();
        let rhs = cpow(base, x).unwrap() * cpow(base, y).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }
}
