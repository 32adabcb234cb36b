//! Divisor of poles of the normalized eigenvector of `W(z)`.
//!
//! The eigenvector normalized by `e* psi = 1` (with `e* = (1, ..., 1)`) has
//! poles at the points where every cofactor row sum of `w - W(z)` vanishes.
//! Their `z` coordinates are the roots of `D(z) = det(e* W^k)_{k<n}` and the
//! `w` coordinate follows from a Cramer solve on the row-sum coefficients.

use num_complex::Complex64;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::curve::{characteristic_data, MatrixPolynomial, SpectralCurveData};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::projectors::phi_coefficients;
use crate::roots::{min_separation, poly_roots};
use crate::scalar::{Field, Rational};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DivisorPoint {
    pub z: Complex64,
    pub w: Complex64,
    /// `|R(z, w)|`
    pub residual_r: f64,
    /// `max_i |sum_s Delta_is(z, w)|`
    pub residual_eig: f64,
    /// Sum of the absolute values of the terms of `R(z, w)`, at least 1.
    pub residual_scale: f64,
    /// The same for the row sums.
    pub eig_scale: f64,
}

impl Serialize for DivisorPoint {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = s.serialize_struct("DivisorPoint", 5)?;
        st.serialize_field("z", &[self.z.re, self.z.im])?;
        st.serialize_field("w", &[self.w.re, self.w.im])?;
        st.serialize_field("residual_R", &self.residual_r)?;
        st.serialize_field("residual_eig", &self.residual_eig)?;
        st.serialize_field("residual_scale", &self.residual_scale)?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RejectedPoint {
    pub point: DivisorPoint,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisorReport {
    pub expected_degree: usize,
    pub d_degree: Option<usize>,
    pub points: Vec<DivisorPoint>,
    pub rejected: Vec<RejectedPoint>,
    pub warnings: Vec<String>,
}

/// `D(z) = det [e*; e* W; ...; e* W^(n-1)]`, exact.
pub fn d_polynomial(w: &MatrixPolynomial<Rational>) -> Poly<Rational> {
    let n = w.n();
    let wz = w.to_poly_matrix();
    let mut rows = Vec::with_capacity(n);
    let mut cov: Vec<Poly<Rational>> = vec![Poly::constant(Rational::from_i64(1)); n];
    for _ in 0..n {
        rows.push(cov.clone());
        cov = (0..n)
            .map(|j| (0..n).fold(Poly::zero(), |acc, s| acc + cov[s].clone() * wz[(s, j)].clone()))
            .collect();
    }
    Matrix::from_rows(rows).det()
}

/// `q[i][j]` with `sum_s Delta_is(z, w) = sum_j q_ij(z) w^(n-1-j)`; `q[i][0] = 1`.
///
/// `Delta_is` is the `(s, i)` entry of the adjugate `Phi`, so these are the
/// column sums of the coefficients `b_j` of `Phi`.
pub fn cofactor_row_sums<S: Field>(w: &MatrixPolynomial<S>) -> Matrix<Poly<S>> {
    let curve = characteristic_data(w);
    let phi = phi_coefficients(&curve, w);
    let n = w.n();
    Matrix::from_fn(n, n, |i, j| {
        (0..n).fold(Poly::zero(), |acc, s| acc + phi.b[j][(s, i)].clone())
    })
}

fn eval_c(p: &Poly<Rational>, z: Complex64) -> Complex64 {
    p.coeffs()
        .iter()
        .rev()
        .fold(Complex64::zero(), |acc, c| acc * z + c.to_c64())
}

fn complex_det(m: &Matrix<Complex64>) -> Complex64 {
    if m.rows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let d = nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)]);
    d.determinant()
}

/// Row subsets of size `k` of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn max_abs_coeff(w: &MatrixPolynomial<Rational>) -> f64 {
    w.coeffs()
        .iter()
        .flat_map(|m| m.entries().map(|c| c.to_c64().norm()))
        .fold(1.0, f64::max)
}

pub fn pole_divisor(w: &MatrixPolynomial<Rational>, tol: f64) -> Result<DivisorReport> {
    let n = w.n();
    let curve = characteristic_data(w);
    let d = d_polynomial(w);
    let expected = w.m() * n * (n - 1) / 2;
    let mut warnings = Vec::new();
    let d_degree = d.degree();
    if d_degree != Some(expected) {
        warnings.push(format!(
            "degenerate divisor configuration: deg D = {:?}, expected {expected}",
            d_degree
        ));
    }
    if d.is_zero() {
        return Err(Error::RankDeficient("D(z) vanishes identically".into()));
    }
    let zs = poly_roots(&d)?;
    let scale = max_abs_coeff(w);
    if zs.len() > 1 && min_separation(&zs) <= tol * scale {
        return Err(Error::InvalidInput(
            "D(z) has (numerically) repeated roots; divisors with multiplicity are not handled".into(),
        ));
    }
    let q = cofactor_row_sums(w);
    let mut points = Vec::new();
    let mut rejected = Vec::new();
    for z in zs {
        let qz = Matrix::from_fn(n, n, |i, j| eval_c(&q[(i, j)], z));
        let cols: Vec<usize> = (0..n - 1).collect();
        let mut best: Option<(f64, Vec<usize>, Complex64)> = None;
        for rows in subsets(n, n - 1) {
            let det = complex_det(&qz.submatrix(&rows, &cols));
            // strict comparison keeps the lexicographically first maximizer
            if best.as_ref().is_none_or(|(b, _, _)| det.norm() > *b) {
                best = Some((det.norm(), rows, det));
            }
        }
        let (best_abs, rows, det_c) = best.expect("at least one minor");
        if best_abs <= tol * scale {
            return Err(Error::RankDeficient(format!(
                "every (n-1)-minor of the row-sum matrix is singular at z = {z}"
            )));
        }
        let mut hat = qz.submatrix(&rows, &cols);
        for (r, &row) in rows.iter().enumerate() {
            hat[(r, n - 2)] = qz[(row, n - 1)];
        }
        let wk = polish_w(&curve, z, -complex_det(&hat) / det_c);
        let point = evaluate_point(&curve, &qz, z, wk);
        let rw = curve_dw(&curve, z, wk);
        let rz = curve_dz(&curve, z, wk);
        if point.residual_r > tol * point.residual_scale || point.residual_eig > tol * point.eig_scale * 10.0 {
            rejected.push(RejectedPoint {
                point,
                reason: "residual above tolerance".into(),
            });
        } else if rw.norm() <= tol.sqrt() * scale && rz.norm() <= tol.sqrt() * scale {
            rejected.push(RejectedPoint {
                point,
                reason: "point is singular on the curve (R_w = R_z = 0); degenerate case".into(),
            });
        } else {
            points.push(point);
        }
    }
    if !rejected.is_empty() {
        warnings.push(format!("{} divisor point(s) rejected", rejected.len()));
    }
    Ok(DivisorReport {
        expected_degree: expected,
        d_degree,
        points,
        rejected,
        warnings,
    })
}

fn curve_c(curve: &SpectralCurveData<Rational>, z: Complex64, w: Complex64) -> Complex64 {
    curve.a.iter().fold(Complex64::zero(), |acc, a| acc * w + eval_c(a, z))
}

/// A few Newton steps on `R(z, .)`, each kept only if it lowers `|R|`.
fn polish_w(curve: &SpectralCurveData<Rational>, z: Complex64, mut w: Complex64) -> Complex64 {
    let mut best = curve_c(curve, z, w).norm();
    for _ in 0..4 {
        let dw = curve_dw(curve, z, w);
        if dw.norm() == 0.0 {
            break;
        }
        let next = w - curve_c(curve, z, w) / dw;
        let r = curve_c(curve, z, next).norm();
        if !(r < best) {
            break;
        }
        (w, best) = (next, r);
    }
    w
}

fn curve_dz(curve: &SpectralCurveData<Rational>, z: Complex64, w: Complex64) -> Complex64 {
    curve.a.iter().fold(Complex64::zero(), |acc, a| acc * w + eval_c(&a.derivative(), z))
}

fn curve_dw(curve: &SpectralCurveData<Rational>, z: Complex64, w: Complex64) -> Complex64 {
    let n = curve.n;
    curve.a[..n]
        .iter()
        .enumerate()
        .fold(Complex64::zero(), |acc, (i, a)| acc * w + eval_c(a, z) * (n - i) as f64)
}

fn evaluate_point(curve: &SpectralCurveData<Rational>, qz: &Matrix<Complex64>, z: Complex64, w: Complex64) -> DivisorPoint {
    let n = curve.n;
    let (r, wn) = (z.norm(), w.norm());
    let residual_eig = (0..n)
        .map(|i| (0..n).fold(Complex64::zero(), |acc, j| acc * w + qz[(i, j)]).norm())
        .fold(0.0, f64::max);
    let eig_scale = (0..n)
        .map(|i| (0..n).fold(0.0, |acc, j| acc * wn + qz[(i, j)].norm()))
        .fold(1.0, f64::max);
    let residual_scale = curve
        .a
        .iter()
        .map(|a| a.coeffs().iter().rev().fold(0.0, |acc, c| acc * r + c.to_c64().norm()))
        .fold(0.0, |acc, t| acc * wn + t)
        .max(1.0);
    DivisorPoint {
        z,
        w,
        residual_r: curve_c(curve, z, w).norm(),
        residual_eig,
        residual_scale,
        eig_scale,
    }
}

/// Residuals of an arbitrary point against the curve and the row-sum condition.
pub fn point_residuals(w: &MatrixPolynomial<Rational>, z: Complex64, wv: Complex64) -> DivisorPoint {
    let n = w.n();
    let curve = characteristic_data(w);
    let q = cofactor_row_sums(w);
    let qz = Matrix::from_fn(n, n, |i, j| eval_c(&q[(i, j)], z));
    evaluate_point(&curve, &qz, z, wv)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormulaComparison {
    /// Points from `a = (b + c)/2`, `w = (c - b)/2`.
    pub alternative_points: Vec<DivisorPoint>,
    /// For each alternative point, whether it coincides with a general-algorithm point.
    pub matches_general: Vec<bool>,
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperellipticDivisor {
    pub general: DivisorReport,
    pub comparison: FormulaComparison,
}

/// `W = [[a, b], [c, -a]]` as a matrix polynomial; `a` must be monic of
/// degree `g + 1` with `deg b, deg c <= g`.
pub fn hyperelliptic_matrix(a: &Poly<Rational>, b: &Poly<Rational>, c: &Poly<Rational>) -> Result<MatrixPolynomial<Rational>> {
    let m = a
        .degree()
        .ok_or_else(|| Error::InvalidInput("a(z) must be nonzero".into()))?;
    if a.leading() != Some(&Rational::from_i64(1)) {
        return Err(Error::InvalidInput("a(z) must be monic".into()));
    }
    if b.degree().is_some_and(|d| d >= m) || c.degree().is_some_and(|d| d >= m) {
        return Err(Error::InvalidInput("b(z) and c(z) must have degree below deg a(z)".into()));
    }
    let coeffs = (0..=m)
        .map(|i| {
            let p = m - i;
            let av = a.coeff(p);
            Matrix::from_rows(vec![vec![av.clone(), b.coeff(p)], vec![c.coeff(p), -av]])
        })
        .collect();
    MatrixPolynomial::from_descending(coeffs)
}

pub fn hyperelliptic_divisor(
    a: &Poly<Rational>,
    b: &Poly<Rational>,
    c: &Poly<Rational>,
    tol: f64,
) -> Result<HyperellipticDivisor> {
    let w = hyperelliptic_matrix(a, b, c)?;
    let general = pole_divisor(&w, tol)?;
    let half = Rational::from_ratio(1, 2);
    let eq = a.clone() - (b.clone() + c.clone()).scale(&half);
    let wpoly = (c.clone() - b.clone()).scale(&half);
    let zs = poly_roots(&eq)?;
    let scale = max_abs_coeff(&w);
    let alternative_points: Vec<DivisorPoint> = zs
        .into_iter()
        .map(|z| point_residuals(&w, z, eval_c(&wpoly, z)))
        .collect();
    let matches_general: Vec<bool> = alternative_points
        .iter()
        .map(|p| {
            general
                .points
                .iter()
                .any(|g| (g.z - p.z).norm() < 1e-7 * scale && (g.w - p.w).norm() < 1e-7 * scale)
        })
        .collect();
    let on_curve = alternative_points.iter().all(|p| p.residual_r < tol * p.residual_scale);
    let pole_ok = alternative_points.iter().all(|p| p.residual_eig < tol * p.eig_scale * 10.0);
    let summary = if matches_general.iter().all(|&m| m) && matches_general.len() == general.points.len() {
        "alternative formula agrees with the general algorithm".to_string()
    } else {
        format!(
            "alternative formula disagrees with the general algorithm (on curve: {on_curve}, \
             eigenvector-pole condition: {pole_ok}); the general algorithm gives 2a = b - c, w = a - b"
        )
    };
    Ok(HyperellipticDivisor {
        general,
        comparison: FormulaComparison {
            alternative_points,
            matches_general,
            summary,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn qp(c: &[i64]) -> Poly<Rational> {
        Poly::new(c.iter().map(|&v| rat(v, 1)).collect())
    }

    #[test]
    fn two_by_two_shapes() {
        // a = z^2, b = z + 1, c = 2z
        let w = hyperelliptic_matrix(&qp(&[0, 0, 1]), &qp(&[1, 1]), &qp(&[0, 2])).unwrap();
        assert_eq!(d_polynomial(&w), qp(&[1, -1, -2]));
        let q = cofactor_row_sums(&w);
        assert_eq!(q[(0, 0)], qp(&[1]));
        assert_eq!(q[(1, 0)], qp(&[1]));
        assert_eq!(q[(0, 1)], qp(&[0, 2, 1]));
        assert_eq!(q[(1, 1)], qp(&[1, 1, -1]));
    }

    #[test]
    fn worked_instance_points() {
        let h = hyperelliptic_divisor(&qp(&[0, 0, 1]), &qp(&[1, 1]), &qp(&[0, 2]), DEFAULT_TOL).unwrap();
        let pts = &h.general.points;
        assert_eq!(pts.len(), 2);
        let expected = [(-1.0, 1.0), (0.5, -1.25)];
        for (p, (z, w)) in pts.iter().zip(expected) {
            assert!((p.z - Complex64::new(z, 0.0)).norm() < 1e-12);
            assert!((p.w - Complex64::new(w, 0.0)).norm() < 1e-12);
            assert!(p.residual_r < 1e-12 && p.residual_eig < 1e-12);
        }
        assert!(h.comparison.matches_general.iter().all(|&m| !m));
    }

    #[test]
    fn diagonal_points_are_flagged() {
        let w = MatrixPolynomial::from_descending(vec![
            Matrix::from_rows(vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(-1, 1)]]),
            Matrix::from_rows(vec![vec![rat(0, 1), rat(0, 1)], vec![rat(0, 1), rat(3, 1)]]),
            Matrix::from_rows(vec![vec![rat(-2, 1), rat(0, 1)], vec![rat(0, 1), rat(0, 1)]]),
        ])
        .unwrap();
        let r = pole_divisor(&w, DEFAULT_TOL).unwrap();
        assert!(r.points.is_empty());
        assert_eq!(r.rejected.len(), 2);
    }
}
