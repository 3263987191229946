use proptest::prelude::*;
use tomokit::fock::{make_state, OperatorMatrix, StateKind};
use tomokit::hermite2::{hermite2, SymmetricMatrix2};
use tomokit::photon_number::pn_distribution;
use tomokit::star_product::{kernel_relation_check, kernel_relation_phase, symbol, SymplecticPoint};
use tomokit::symplectic::{tomogram_from_fock, SymplecticScheme};
use tomokit::C64;

fn c64() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn operator(dim: usize) -> impl Strategy<Value = OperatorMatrix> {
    prop::collection::vec(c64(), dim * dim)
        .prop_map(move |v| OperatorMatrix::from_fn(dim, |i, j| v[i * dim + j]).unwrap())
}

fn frame() -> impl Strategy<Value = (f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_filter("nonzero frame", |(m, n)| m.hypot(*n) > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_is_linear(a in operator(6), b in operator(6), ca in c64(), cb in c64(),
                        x in -3.0..3.0f64, (mu, nu) in frame()) {
        let p = SymplecticPoint::new(x, mu, nu);
        let combo = &a.scale(ca) + &b.scale(cb);
        let lhs = symbol(&combo, &SymplecticScheme, &p).unwrap().value;
        let rhs = ca * symbol(&a, &SymplecticScheme, &p).unwrap().value
            + cb * symbol(&b, &SymplecticScheme, &p).unwrap().value;
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn kernel_ratio_is_a_pure_phase(c in prop::collection::vec(-3.0..3.0f64, 8),
                                    nu in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64]) {
        let x1 = SymplecticPoint::new(c[0], c[1], c[2]);
        let x2 = SymplecticPoint::new(c[3], c[4], c[5]);
        let x = SymplecticPoint::new(c[6], c[7], nu);
        let ratio = kernel_relation_check(x1, x2, x).unwrap();
        prop_assert!((ratio - kernel_relation_phase(x1, x2)).norm() < 1e-12);
    }

    #[test]
    fn tomogram_is_homogeneous(re in -1.0..1.0f64, im in -1.0..1.0f64, x in -3.0..3.0f64,
                               (mu, nu) in frame(), lambda in prop_oneof![-3.0..-0.3f64, 0.3..3.0f64]) {
        let rho = make_state(&StateKind::Coherent(C64::new(re, im)), 40).unwrap().state;
        let w = tomogram_from_fock(&rho, x, mu, nu).unwrap();
        let scaled = tomogram_from_fock(&rho, lambda * x, lambda * mu, lambda * nu).unwrap() * lambda.abs();
        prop_assert!((w - scaled).abs() < 1e-10);
    }

    #[test]
    fn hermite_swaps_indices(r11 in c64(), r12 in c64(), r22 in c64(), y1 in c64(), y2 in c64(),
                             n1 in 0usize..8, n2 in 0usize..8) {
        let a = hermite2(SymmetricMatrix2 { r11, r12, r22 }, n1, n2, y1, y2);
        let b = hermite2(SymmetricMatrix2 { r11: r22, r12, r22: r11 }, n2, n1, y2, y1);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn photon_distribution_is_normalized(re in -1.0..1.0f64, im in -1.0..1.0f64,
                                         ar in -1.0..1.0f64, ai in -1.0..1.0f64) {
        let rho = make_state(&StateKind::Coherent(C64::new(re, im)), 48).unwrap().state;
        let p = pn_distribution(&rho, C64::new(ar, ai), 30).unwrap();
        prop_assert!(p.iter().all(|v| *v >= -1e-14));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
