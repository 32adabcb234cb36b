mod common;

use common::{int_poly, random_diagonal, random_w, rng};
use proptest::prelude::*;
use spectral_tau::curve::{characteristic_data, genus, CheckStatus};
use spectral_tau::divisor::hyperelliptic_matrix;
use spectral_tau::{rat, QPoly};

#[test]
fn genus_formula_matches_divisor_degree() {
    for n in 2..7 {
        for m in 1..7 {
            let g = genus(m, n);
            assert_eq!(g + n as i64 - 1, (m * n * (n - 1) / 2) as i64, "m={m} n={n}");
        }
    }
    assert_eq!(genus(2, 2), 1);
    assert_eq!(genus(3, 2), 2);
    assert_eq!(genus(1, 3), 1);
}

#[test]
fn hyperelliptic_characteristic_polynomial() {
    let (a, b, c) = (int_poly(&[0, 0, 1]), int_poly(&[1, 1]), int_poly(&[0, 2]));
    let w = hyperelliptic_matrix(&a, &b, &c).unwrap();
    let data = characteristic_data(&w);
    assert_eq!(data.genus, 1);
    assert_eq!(data.a[1], QPoly::new(vec![]));
    // R = w^2 - a^2 - b c
    let want = (a.clone() * a + b * c).scale(&rat(-1, 1));
    assert_eq!(data.a[2], want);
    assert!(!data.has_failure());
}

#[test]
fn coinciding_leading_eigenvalues_fail_validation() {
    let text = r#"{"n": 2, "m": 1, "coefficients": [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]}"#;
    let w = spectral_tau::job::parse_matrix_polynomial(text).unwrap();
    let data = characteristic_data(&w);
    assert!(data.diagnostics.iter().any(|d| d.status == CheckStatus::Fail));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_coefficient_is_minus_trace(seed in any::<u64>(), n in 2usize..5, m in 1usize..4) {
        let w = random_w(&mut rng(seed), n, m, false);
        let data = characteristic_data(&w);
        let trace = QPoly::new((0..=m).map(|p| w.coeff_of_power(p).trace()).collect());
        prop_assert_eq!(data.a[1].clone(), trace.scale(&rat(-1, 1)));
        prop_assert_eq!(data.genus, genus(m, n));
    }

    #[test]
    fn diagonal_conjugation_keeps_the_curve(seed in any::<u64>(), n in 2usize..5, m in 1usize..4) {
        let mut r = rng(seed);
        let w = random_w(&mut r, n, m, false);
        let d = random_diagonal(&mut r, n);
        prop_assert_eq!(characteristic_data(&w.conjugate_by_diagonal(&d)), characteristic_data(&w));
    }
}
