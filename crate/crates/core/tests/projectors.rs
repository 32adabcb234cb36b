mod common;

use common::{random_diagonal, random_w, rng};
use proptest::prelude::*;
use spectral_tau::divisor::hyperelliptic_matrix;
use spectral_tau::matrix::Matrix;
use spectral_tau::projectors::{all_branch_expansions, projector_series};
use spectral_tau::{rat, QMatrix, QMatrixPolynomial, Rational};

const DEPTH: usize = 6;

fn zero(n: usize) -> QMatrix {
    Matrix::zeros(n, n)
}

fn check_identities(w: &QMatrixPolynomial) -> Result<(), TestCaseError> {
    let (n, m) = (w.n(), w.m());
    let exps = all_branch_expansions(w, DEPTH + m).unwrap();
    let mut total = vec![zero(n); DEPTH + 1];
    let mut weighted = vec![zero(n); DEPTH + m + 1];
    for (a, ea) in exps.iter().enumerate() {
        let p = &ea.projector;
        let sq = p.mul(p);
        let wp = p.mul_scalar_series(&ea.w);
        for e in 0..=DEPTH {
            let k = -(e as i64);
            prop_assert_eq!(sq.coeff(k).unwrap(), p.coeff(k).unwrap(), "Pi_{}^2 at z^{}", a, k);
            let want_tr = if e == 0 { rat(1, 1) } else { rat(0, 1) };
            prop_assert_eq!(p.trace().coeff(k).unwrap(), want_tr);
            total[e] = total[e].clone() + p.coeff(k).unwrap();
            for (b, eb) in exps.iter().enumerate().filter(|&(b, _)| b != a) {
                prop_assert!(p.mul(&eb.projector).coeff(k).unwrap().is_zero(), "Pi_{} Pi_{} at z^{}", a, b, k);
            }
        }
        for (e, slot) in weighted.iter_mut().enumerate() {
            *slot = slot.clone() + wp.coeff(m as i64 - e as i64).unwrap();
        }
    }
    for (e, t) in total.iter().enumerate() {
        let want = if e == 0 { Matrix::identity(n) } else { zero(n) };
        prop_assert_eq!(t, &want);
    }
    for (e, c) in weighted.iter().enumerate() {
        let power = m as i64 - e as i64;
        let want = if power >= 0 { w.coeff_of_power(power as usize) } else { zero(n) };
        prop_assert_eq!(c, &want, "sum w_a Pi_a at z^{}", power);
    }
    Ok(())
}

#[test]
fn hyperelliptic_projector_leading_terms() {
    let a = common::int_poly(&[0, 0, 1]);
    let b = common::int_poly(&[1, 1]);
    let c = common::int_poly(&[0, 2]);
    let w = hyperelliptic_matrix(&a, &b, &c).unwrap();
    let p = projector_series(&w, 0, 3).unwrap();
    assert_eq!(p.coeff(0).unwrap(), Matrix::unit_diagonal(2, 0));
    // first correction: off-diagonal entries b_1 / 2 and c_1 / 2 (b_1 = 1, c_1 = 2)
    let first = p.coeff(-1).unwrap();
    assert_eq!(first[(0, 1)], rat(1, 2));
    assert_eq!(first[(1, 0)], rat(1, 1));
    assert_eq!(first[(0, 0)], rat(0, 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn projector_identities(seed in any::<u64>(), shape in prop::sample::select(vec![(2usize, 1usize), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1)])) {
        let w = random_w(&mut rng(seed), shape.0, shape.1, false);
        check_identities(&w)?;
    }

    #[test]
    fn projectors_follow_diagonal_conjugation(seed in any::<u64>(), n in 2usize..4, m in 1usize..3) {
        let mut r = rng(seed);
        let w = random_w(&mut r, n, m, false);
        let d = random_diagonal(&mut r, n);
        let conj = w.conjugate_by_diagonal(&d);
        let inv: Vec<Rational> = d.iter().map(|x| rat(1, 1) / x.clone()).collect();
        for a in 0..n {
            let p = projector_series(&w, a, DEPTH).unwrap();
            let q = projector_series(&conj, a, DEPTH).unwrap();
            for e in 0..=DEPTH as i64 {
                let want = Matrix::diagonal(&inv).matmul(&p.coeff(-e).unwrap()).matmul(&Matrix::diagonal(&d));
                prop_assert_eq!(q.coeff(-e).unwrap(), want);
            }
        }
    }
}
