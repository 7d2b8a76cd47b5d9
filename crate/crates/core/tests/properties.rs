use std::sync::OnceLock;

use proptest::prelude::*;
use twistlab::analytic::{partition_g, window_v, KernelSet};
use twistlab::arith::gcd;
use twistlab::forms::cache::{read_table, write_table};
use twistlab::forms::{build_table, CoefficientTable, NewformSpec};
use twistlab::gauss::{gauss_4k_identity_check, gauss_exact};
use twistlab::lfun::{disqualification, root_number, zstar_combined, AfeEvaluator, AfeOptions};

fn curves() -> &'static (CoefficientTable, CoefficientTable) {
    static TABLES: OnceLock<(CoefficientTable, CoefficientTable)> = OnceLock::new();
    TABLES.get_or_init(|| {
        (
            build_table(&NewformSpec::bundled("11a").unwrap(), 500_000).unwrap(),
            build_table(&NewformSpec::bundled("17a").unwrap(), 500_000).unwrap(),
        )
    })
}

fn odd(max: u64) -> impl Strategy<Value = u64> {
    (0..max.div_ceil(2)).prop_map(|i| 2 * i + 1)
}

proptest! {
    #[test]
    fn gauss_is_multiplicative(k in -60i64..=60, n1 in odd(200), n2 in odd(200)) {
        prop_assume!(gcd(n1, n2) == 1);
        let whole = gauss_exact(k, n1 * n2).unwrap();
        let parts = gauss_exact(k, n1).unwrap() * gauss_exact(k, n2).unwrap();
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn gauss_size_and_4k(k in -500i64..=500, n in odd(3000)) {
        let v = gauss_exact(k, n).unwrap().value();
        prop_assert!(v * v <= (n as f64).powi(3) * (1.0 + 1e-12));
        prop_assert!(gauss_4k_identity_check(k, n).unwrap());
    }

    #[test]
    fn hecke_multiplicative(m in 1usize..=316, n in 1usize..=316) {
        prop_assume!(gcd(m as u64, n as u64) == 1);
        for t in [&curves().0, &curves().1] {
            prop_assert!((t.lambda(m * n) - t.lambda(m) * t.lambda(n)).abs() <= 1e-12);
        }
    }

    #[test]
    fn root_numbers_are_signs(d in odd(10_000)) {
        for label in NewformSpec::BUNDLED_LABELS {
            let f = NewformSpec::bundled(label).unwrap();
            match disqualification(d, f.level) {
                None => prop_assert!(matches!(root_number(&f, d).unwrap(), 1 | -1)),
                Some(_) => prop_assert!(root_number(&f, d).is_err()),
            }
        }
    }

    #[test]
    fn dyadic_partition(big_j in 0i32..=8, t in 0.0f64..=1.0) {
        let x = (1.5 * 2f64.powi(big_j)).powf(t);
        let s: f64 = (0..=big_j).map(|j| partition_g(x / 2f64.powi(j))).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12, "x = {x}");
    }

    #[test]
    fn window_shape(x in 0.0f64..6.0) {
        let v = window_v(x);
        if (0.5..=3.0).contains(&x) {
            prop_assert!((v - 1.0).abs() <= 1e-12);
        }
        if !(0.375..=4.0).contains(&x) {
            prop_assert_eq!(v, 0.0);
        }
        prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cache_round_trip(limit in 1usize..3000, delta in any::<bool>()) {
        let f = NewformSpec::bundled(if delta { "delta" } else { "17a" }).unwrap();
        let t = build_table(&f, limit).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        let back = read_table(&f, buf.as_slice()).unwrap();
        prop_assert_eq!(back.as_slice(), t.as_slice());
    }

    #[test]
    fn zstar_swap_symmetry(u in -0.2f64..0.5, v in -0.2f64..0.5) {
        let (tf, tg) = curves();
        let a = zstar_combined(u, v, tf, tg, 3000).unwrap();
        let b = zstar_combined(v, u, tg, tf, 3000).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn afe_sign_cases(d in odd(1500), z in 1.0f64..2.0) {
        let (tf, tg) = curves();
        let k = KernelSet::default();
        for t in [tf, tg] {
            if disqualification(d, t.form().level).is_some() {
                continue;
            }
            let base = AfeEvaluator::new(t, &k, 1.0, AfeOptions::default()).unwrap().sums(d).unwrap();
            let moved = AfeEvaluator::new(t, &k, z, AfeOptions::default()).unwrap().sums(d).unwrap();
            if base.omega == 1 {
                prop_assert!(moved.combination.abs() <= 1e-6 * moved.first_magnitude);
            } else {
                let rel = (base.combination - moved.combination).abs() / base.combination.abs();
                prop_assert!(rel <= 1e-6, "d = {d}, Z = {z}: {rel}");
            }
        }
    }
}
