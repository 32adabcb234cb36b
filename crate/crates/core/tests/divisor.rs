mod common;

use common::{int_poly, random_diagonal, random_w, rng};
use num_complex::Complex64;
use proptest::prelude::*;
use spectral_tau::curve::genus;
use spectral_tau::divisor::{d_polynomial, hyperelliptic_divisor, pole_divisor, point_residuals, DEFAULT_TOL};
use spectral_tau::curve::{characteristic_data, CheckStatus};
use spectral_tau::{Field, QMatrixPolynomial, Rational};

fn check_report(w: &QMatrixPolynomial) -> Result<usize, TestCaseError> {
    let expected = (genus(w.m(), w.n()) + w.n() as i64 - 1) as usize;
    let d = d_polynomial(w);
    prop_assert_eq!(d.degree(), Some(expected));
    let smooth = characteristic_data(w).diagnostics.iter().all(|d| d.status != CheckStatus::Warn);
    prop_assume!(smooth, "singular curve");
    prop_assume!(Rational::poly_is_squarefree(&d), "divisor with multiplicity");
    let rep = pole_divisor(w, DEFAULT_TOL).unwrap();
    prop_assert_eq!(rep.expected_degree, expected);
    prop_assert_eq!(rep.points.len(), expected, "rejected: {:?}", rep.rejected);
    for p in &rep.points {
        prop_assert!(p.z.is_finite() && p.w.is_finite());
        prop_assert!(p.residual_r < DEFAULT_TOL * p.residual_scale, "|R| = {:e}", p.residual_r);
        prop_assert!(p.residual_eig < 1e-8 * p.eig_scale, "pole residual {:e}", p.residual_eig);
    }
    Ok(rep.points.len())
}

#[test]
fn worked_hyperelliptic_instance() {
    let rep = hyperelliptic_divisor(&int_poly(&[0, 0, 1]), &int_poly(&[1, 1]), &int_poly(&[0, 2]), DEFAULT_TOL).unwrap();
    let pts: Vec<(Complex64, Complex64)> = rep.general.points.iter().map(|p| (p.z, p.w)).collect();
    let want = [(Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)), (Complex64::new(0.5, 0.0), Complex64::new(-1.25, 0.0))];
    assert_eq!(pts.len(), 2);
    for ((z, w), (wz, ww)) in pts.iter().zip(want) {
        assert!((z - wz).norm() < 1e-12 && (w - ww).norm() < 1e-12, "{z} {w}");
    }
    assert!(!rep.comparison.summary.is_empty());
}

#[test]
fn off_curve_points_have_large_residuals() {
    let w = spectral_tau::divisor::hyperelliptic_matrix(&int_poly(&[0, 0, 1]), &int_poly(&[1, 1]), &int_poly(&[0, 2])).unwrap();
    let p = point_residuals(&w, Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0));
    assert!(p.residual_r > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn degree_and_residuals(seed in any::<u64>(), shape in prop::sample::select(vec![(2usize, 2usize), (2, 3), (3, 1), (3, 2)])) {
        let w = random_w(&mut rng(seed), shape.0, shape.1, false);
        check_report(&w)?;
    }

    #[test]
    fn conjugation_keeps_the_count(seed in any::<u64>(), n in 2usize..4, m in 1usize..3) {
        let mut r = rng(seed);
        let w = random_w(&mut r, n, m, false);
        let d = random_diagonal(&mut r, n);
        let before = check_report(&w)?;
        let after = check_report(&w.conjugate_by_diagonal(&d))?;
        prop_assert_eq!(before, after);
    }
}
