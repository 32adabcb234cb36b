//! Branches `w_a(z)` at the points over `z = infinity` and the spectral
//! projectors `Pi_a(z) = Phi(z, w_a(z)) / R_w(z, w_a(z))` as series in `1/z`.

use rayon::prelude::*;

use crate::curve::{characteristic_data, MatrixPolynomial, SpectralCurveData};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::scalar::Field;
use crate::series::{MatrixTailSeries, TailSeries};

/// `Phi(z, w) = sum_i b_i(z) w^(n-1-i)`, the adjugate of `w - W(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiData<S> {
    /// `b[0]` is the identity, `b[i] = sum_{j<=i} a_j W^(i-j)`.
    pub b: Vec<Matrix<Poly<S>>>,
}

impl<S: Field> PhiData<S> {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// `Phi(z, w)` at a point.
    pub fn eval(&self, z: &S, w: &S) -> Matrix<S> {
        let n = self.n();
        self.b.iter().fold(Matrix::zeros(n, n), |acc, bi| {
            acc.scale(w) + bi.map(|p| p.eval(z))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchExpansion<S> {
    pub sheet: usize,
    /// `w_a(z) = b0_a z^m + ...`
    pub w: TailSeries<S>,
    /// `R_w(z, w_a(z))`, leading exponent `m (n - 1)`.
    pub rw: TailSeries<S>,
    /// `Pi_a(z) = E_a + O(1/z)`.
    pub projector: MatrixTailSeries<S>,
}

pub fn phi_coefficients<S: Field>(curve: &SpectralCurveData<S>, w: &MatrixPolynomial<S>) -> PhiData<S> {
    let n = w.n();
    let wz = w.to_poly_matrix();
    let mut b = vec![Matrix::identity(n)];
    for i in 1..n {
        let next = wz.matmul(&b[i - 1]) + Matrix::identity(n).scale(&curve.a[i]);
        b.push(next);
    }
    PhiData { b }
}

/// An exact polynomial as a series trusted down to `z^floor`.
fn exact_poly<S: Field>(p: &Poly<S>, floor: i64) -> TailSeries<S> {
    match p.degree() {
        Some(d) if d as i64 >= floor => TailSeries::from_poly(p, (d as i64 - floor) as usize),
        _ => TailSeries::zero_with_floor(floor),
    }
}

/// `sum_i coeffs[i](z) w^(len-1-i)` by Horner's rule, `coeffs[0]` constant.
fn horner<S: Field>(coeffs: &[Poly<S>], w: &TailSeries<S>) -> TailSeries<S> {
    let k = w.order();
    let lead = w.leading_exponent();
    let c0 = coeffs[0].coeff(0);
    let mut acc = TailSeries::monomial(c0, 0, k);
    for (i, c) in coeffs.iter().enumerate().skip(1) {
        let floor = lead * i as i64 - k as i64;
        acc = acc.mul(w).add(&exact_poly(c, floor));
    }
    acc
}

fn r_of<S: Field>(curve: &SpectralCurveData<S>, w: &TailSeries<S>) -> TailSeries<S> {
    horner(&curve.a, w)
}

fn rw_of<S: Field>(curve: &SpectralCurveData<S>, w: &TailSeries<S>) -> TailSeries<S> {
    let n = curve.n;
    let coeffs: Vec<Poly<S>> = curve.a[..n]
        .iter()
        .enumerate()
        .map(|(i, a)| a.scale(&S::from_i64((n - i) as i64)))
        .collect();
    horner(&coeffs, w)
}

fn check_distinct<S: Field>(b0: &[S]) -> Result<()> {
    for i in 0..b0.len() {
        for j in i + 1..b0.len() {
            if b0[i] == b0[j] {
                return Err(Error::BranchCollision(format!(
                    "sheets {} and {} share the leading eigenvalue",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// The branch `w_a(z)`, trusted through `z^(m - order)`.
///
/// Newton iteration in the series ring, seeded with `b0_a z^m`. Each step
/// treats the current iterate as exact, so the correct relative order goes
/// `K -> 2K + 1`. The result is checked by substituting back into `R`.
pub fn branch_series<S: Field>(
    curve: &SpectralCurveData<S>,
    leading_eigenvalues: &[S],
    a: usize,
    order: usize,
) -> Result<TailSeries<S>> {
    check_distinct(leading_eigenvalues)?;
    let m = curve.m as i64;
    let n = curve.n as i64;
    let mut w = TailSeries::monomial(leading_eigenvalues[a].clone(), m, 0);
    let mut known = 0usize;
    while known < order {
        let target = (2 * known + 1).min(order);
        let wt = w.extend_with_zeros(target);
        let r = r_of(curve, &wt).normalize();
        if !r.is_zero() {
            let rw = rw_of(curve, &wt).normalize();
            if rw.leading_exponent() != m * (n - 1) {
                return Err(Error::BranchCollision(format!(
                    "R_w along sheet {} does not start at z^{}",
                    a + 1,
                    m * (n - 1)
                )));
            }
            let step = r.mul(&rw.invert()?);
            w = wt.sub(&step).truncate_to_floor(m - target as i64)?;
        } else {
            w = wt;
        }
        // keep the nominal leading exponent at m
        if w.leading_exponent() != m {
            return Err(Error::Inconsistent("branch lost its leading term".into()));
        }
        known = target;
    }
    let residual = r_of(curve, &w);
    if !residual.is_zero() {
        return Err(Error::Inconsistent(format!(
            "branch {} fails R(z, w) = 0 within its trusted range",
            a + 1
        )));
    }
    Ok(w)
}

/// Branch, `R_w` and projector for sheet `a`, with `Pi_a` trusted through `z^(-order)`.
pub fn branch_expansion<S: Field>(
    curve: &SpectralCurveData<S>,
    phi: &PhiData<S>,
    leading_eigenvalues: &[S],
    a: usize,
    order: usize,
) -> Result<BranchExpansion<S>> {
    let m = curve.m as i64;
    let n = curve.n as i64;
    let w = branch_series(curve, leading_eigenvalues, a, order)?;
    let rw = rw_of(curve, &w);
    if rw.leading_exponent() != m * (n - 1) || rw.leading_coeff().is_zero() {
        return Err(Error::BranchCollision(format!("R_w vanishes at infinity on sheet {}", a + 1)));
    }
    let inv = rw.invert()?;
    let k = w.order();
    let size = curve.n;
    let mut acc = MatrixTailSeries::constant(Matrix::identity(size), k);
    for (i, bi) in phi.b.iter().enumerate().skip(1) {
        let floor = m * i as i64 - k as i64;
        acc = acc.mul_scalar_series(&w).add(&poly_matrix_series(bi, floor));
    }
    let projector = acc.mul_scalar_series(&inv).truncate_to_floor(-(order as i64))?;
    Ok(BranchExpansion {
        sheet: a,
        w,
        rw,
        projector,
    })
}

/// A polynomial matrix as a matrix series trusted down to `z^floor`.
fn poly_matrix_series<S: Field>(p: &Matrix<Poly<S>>, floor: i64) -> MatrixTailSeries<S> {
    let n = p.rows();
    let top = p.entries().filter_map(Poly::degree).max().map_or(floor, |d| (d as i64).max(floor));
    let coeffs = (floor..=top)
        .rev()
        .map(|e| {
            Matrix::from_fn(n, n, |i, j| {
                if e < 0 {
                    S::zero()
                } else {
                    p[(i, j)].coeff(e as usize)
                }
            })
        })
        .collect();
    MatrixTailSeries::new(top, coeffs)
}

/// `Pi_a(z)` through `z^(-order)`.
pub fn projector_series<S: Field>(w: &MatrixPolynomial<S>, a: usize, order: usize) -> Result<MatrixTailSeries<S>> {
    let curve = characteristic_data(w);
    let phi = phi_coefficients(&curve, w);
    Ok(branch_expansion(&curve, &phi, &w.leading_eigenvalues(), a, order)?.projector)
}

/// Expansions for every sheet, computed in parallel.
pub fn all_branch_expansions<S: Field>(w: &MatrixPolynomial<S>, order: usize) -> Result<Vec<BranchExpansion<S>>> {
    let curve = characteristic_data(w);
    let phi = phi_coefficients(&curve, w);
    let b0 = w.leading_eigenvalues();
    check_distinct(&b0)?;
    (0..w.n())
        .into_par_iter()
        .map(|a| branch_expansion(&curve, &phi, &b0, a, order))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    type Q = Rational;

    fn mat(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat(v, 1)).collect()).collect())
    }

    fn wpoly(coeffs: Vec<Matrix<Q>>) -> MatrixPolynomial<Q> {
        MatrixPolynomial::from_descending(coeffs).unwrap()
    }

    #[test]
    fn diagonal_branch_is_exact() {
        let w = wpoly(vec![mat(&[&[1, 0], &[0, -1]]), mat(&[&[0, 0], &[0, 0]]), mat(&[&[0, 0], &[0, 0]])]);
        let c = characteristic_data(&w);
        let b = branch_series(&c, &w.leading_eigenvalues(), 0, 6).unwrap();
        assert_eq!(b.coeff(2).unwrap(), rat(1, 1));
        for e in -4..2 {
            assert_eq!(b.coeff(e).unwrap(), rat(0, 1));
        }
        for a in 0..2 {
            let p = projector_series(&w, a, 5).unwrap();
            for e in 0..=5 {
                let expected = if e == 0 { Matrix::unit_diagonal(2, a) } else { Matrix::zeros(2, 2) };
                assert_eq!(p.coeff(-e).unwrap(), expected);
            }
        }
    }

    #[test]
    fn binomial_branch() {
        // R = w^2 - z^4 - z: w = z^2 (1 + z^-3)^(1/2) = z^2 + z^-1/2 - z^-4/8 + ...
        let w = wpoly(vec![mat(&[&[1, 0], &[0, -1]]), mat(&[&[0, 1], &[0, 0]]), mat(&[&[0, 0], &[1, 0]])]);
        let c = characteristic_data(&w);
        let b = branch_series(&c, &w.leading_eigenvalues(), 0, 9).unwrap();
        assert_eq!(b.floor(), -7);
        let expected = [(2, rat(1, 1)), (1, rat(0, 1)), (0, rat(0, 1)), (-1, rat(1, 2)), (-4, rat(-1, 8)), (-7, rat(1, 16))];
        for (e, v) in expected {
            assert_eq!(b.coeff(e).unwrap(), v, "z^{e}");
        }
        assert!(b.coeff(-8).is_err());
    }

    #[test]
    fn off_diagonal_projector_leading_terms() {
        // W = [[z^2, z], [z, -z^2]]
        let w = wpoly(vec![mat(&[&[1, 0], &[0, -1]]), mat(&[&[0, 1], &[1, 0]]), mat(&[&[0, 0], &[0, 0]])]);
        let p = projector_series(&w, 0, 4).unwrap();
        assert_eq!(p.coeff(0).unwrap(), Matrix::unit_diagonal(2, 0));
        let half = rat(1, 2);
        assert_eq!(
            p.coeff(-1).unwrap(),
            Matrix::from_rows(vec![vec![rat(0, 1), half.clone()], vec![half, rat(0, 1)]])
        );
    }

    #[test]
    fn traceless_two_by_two_matches_half_one_plus_w_over_w() {
        let w = wpoly(vec![
            mat(&[&[1, 0], &[0, -1]]),
            mat(&[&[2, 1], &[-3, -2]]),
            mat(&[&[1, 5], &[2, -1]]),
        ]);
        let order = 8;
        let exps = all_branch_expansions(&w, order).unwrap();
        let wz = w.to_poly_matrix();
        // Pi_a = (w_a + W) / (2 w_a); with w_2 = -w_1 this is 1/2 (1 -+ W / w_1)
        for e in &exps {
            // 1/w_a has leading exponent -m; W/w_a is trusted through z^(-order)
            let inv = e.w.invert().unwrap();
            let ratio = MatrixTailSeries::from_poly_matrix_times(&wz, &inv);
            let half = rat(1, 2);
            for k in 0..=order as i64 {
                let mut expected = ratio.coeff(-k).unwrap().scale(&half);
                if k == 0 {
                    expected = expected + Matrix::identity(2).scale(&half);
                }
                assert_eq!(e.projector.coeff(-k).unwrap(), expected, "z^-{k}");
            }
        }
    }

    #[test]
    fn vieta_and_phi_forms() {
        let w = wpoly(vec![mat(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, 3]]), mat(&[&[1, 2, -1], &[5, -2, 4], &[2, -3, 1]])]);
        let c = characteristic_data(&w);
        let phi = phi_coefficients(&c, &w);
        // trace-free part: b_1 = W + a_1, b_2 = W^2 + a_1 W + a_2
        let wz = w.to_poly_matrix();
        assert_eq!(phi.b[1], wz.clone() + Matrix::identity(3).scale(&c.a[1]));
        let exps = all_branch_expansions(&w, 6).unwrap();
        let sum = exps.iter().skip(1).fold(exps[0].w.clone(), |acc, e| acc.add(&e.w));
        let neg_a1 = exact_poly(&(-c.a[1].clone()), sum.floor());
        assert!(sum.sub(&neg_a1).is_zero());
    }

    #[test]
    fn collision_is_rejected() {
        let w = wpoly(vec![mat(&[&[1, 0], &[0, 1]]), mat(&[&[0, 1], &[1, 0]]), mat(&[&[0, 0], &[0, 0]])]);
        assert!(matches!(projector_series(&w, 0, 3), Err(Error::BranchCollision(_))));
    }
}
