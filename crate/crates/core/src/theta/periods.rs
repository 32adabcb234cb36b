//! Periods of `z^(g-1-i) dz / (2w)` and the derived Riemann matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::quadrature::gauss_chebyshev;
use super::{continuous_sqrt, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, Field, Rational};
use crate::series::{series_inv_sqrt, TailSeries};

const MAX_CHEBYSHEV_NODES: usize = 1 << 15;

#[derive(Clone, Debug)]
pub struct ThetaContext {
    pub genus: usize,
    /// `(i, j)` entry: the `a_j` period of `z^(g-1-i) dz / (2w)`.
    pub a_periods: DMatrix<Complex64>,
    /// `(i, j)` entry: the `b_j` period of `z^(g-1-i) dz / (2w)`.
    pub b_periods: DMatrix<Complex64>,
    /// `2 pi i` times the inverse of `a_periods`.
    pub alpha: DMatrix<Complex64>,
    /// `B_jk`, the `b_j` period of the normalized `omega_k`.
    pub riemann: DMatrix<Complex64>,
    /// Orientation chosen for each loop around a chain segment.
    pub orientation: Vec<i8>,
    pub quadrature_error: f64,
    pub symmetry_error: f64,
}

impl ThetaContext {
    /// `alpha * (a-periods) - 2 pi i`, max entry.
    pub fn normalization_error(&self) -> f64 {
        let target = DMatrix::<Complex64>::identity(self.genus, self.genus) * Complex64::new(0.0, 2.0 * PI);
        (&self.alpha * &self.a_periods - target).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `int z^(g-1-i) dz / (2w)` along the straight segment between branch
/// points `p` and `q`, on the sheet obtained by continuing `sqrt` of the
/// cofactor from the `p` end. Returns the values and an error estimate.
fn segment_integrals(curve: &HyperellipticCurve, p: usize, q: usize) -> Result<(Vec<Complex64>, f64)> {
    let g = curve.genus;
    let (ep, eq) = (curve.branch_points[p], curve.branch_points[q]);
    let (mid, half) = ((ep + eq) / 2.0, (eq - ep) / 2.0);
    let eval = |m: usize| -> Vec<Complex64> {
        let t = gauss_chebyshev(m);
        let zs: Vec<Complex64> = t.iter().map(|&t| mid + half * t).collect();
        let cof: Vec<Complex64> = zs.iter().map(|&z| curve.cofactor(z, &[p, q])).collect();
        let roots = continuous_sqrt(&cof, None);
        // w = i h sqrt(1 - t^2) sqrt(cofactor), dz = h dt
        (0..g)
            .map(|i| {
                let s: Complex64 = zs
                    .iter()
                    .zip(&roots)
                    .map(|(z, r)| z.powi((g - 1 - i) as i32) / (Complex64::new(0.0, 2.0) * r))
                    .sum();
                s * PI / m as f64
            })
            .collect()
    };
    let mut m = 32;
    let mut prev = eval(m);
    loop {
        m *= 2;
        let next = eval(m);
        let size = next.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let err = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if err < 1e-14 * size {
            return Ok((next, err));
        }
        if m >= MAX_CHEBYSHEV_NODES {
            if err < 1e-10 * size {
                return Ok((next, err));
            }
            return Err(Error::Numerical(format!(
                "period quadrature did not converge on segment {p}-{q}: estimated error {err:e}"
            )));
        }
        prev = next;
    }
}

fn assemble(seg: &[Vec<Complex64>], signs: &[i8], g: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let loop_period = |s: usize, i: usize| seg[s][i] * (2.0 * signs[s] as f64);
    let a = DMatrix::from_fn(g, g, |i, j| loop_period(2 * j, i));
    let b = DMatrix::from_fn(g, g, |i, j| (j..g).map(|l| loop_period(2 * l + 1, i)).sum());
    (a, b)
}

fn negative_definite(m: &DMatrix<Complex64>) -> bool {
    let re = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)].re + m[(j, i)].re));
    re.symmetric_eigenvalues().iter().all(|&l| l < 0.0)
}

/// Periods for the canonical basis built on the branch-point chain
/// `e_0, e_1, ..., e_(2g+1)`: `a_j` loops around the segment `e_(2j) e_(2j+1)`
/// and `b_j` is the sum of the loops around `e_(2l+1) e_(2l+2)`, `l >= j`.
///
/// Loop orientations are fixed by searching for the sign pattern that makes
/// `B` symmetric with negative definite real part.
pub fn period_matrix(curve: &HyperellipticCurve) -> Result<ThetaContext> {
    let g = curve.genus;
    let mut seg = Vec::with_capacity(2 * g);
    let mut quadrature_error: f64 = 0.0;
    for s in 0..2 * g {
        let (v, err) = segment_integrals(curve, s, s + 1)?;
        quadrature_error = quadrature_error.max(err);
        seg.push(v);
    }
    let mut best: Option<ThetaContext> = None;
    for pattern in 0..1usize << (2 * g) {
        let signs: Vec<i8> = (0..2 * g).map(|s| if pattern >> s & 1 == 1 { -1 } else { 1 }).collect();
        let (a_periods, b_periods) = assemble(&seg, &signs, g);
        let Some(inv) = a_periods.clone().try_inverse() else {
            continue;
        };
        let alpha = inv * Complex64::new(0.0, 2.0 * PI);
        let riemann = (&alpha * &b_periods).transpose();
        let norm = riemann.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let symmetry_error = (&riemann - riemann.transpose()).iter().map(|c| c.norm()).fold(0.0, f64::max) / norm;
        if symmetry_error > 1e-8 || !negative_definite(&riemann) {
            continue;
        }
        if best.as_ref().is_none_or(|b| symmetry_error < 0.5 * b.symmetry_error) {
            best = Some(ThetaContext {
                genus: g,
                a_periods,
                b_periods,
                alpha,
                riemann,
                orientation: signs,
                quadrature_error,
                symmetry_error,
            });
        }
    }
    best.ok_or_else(|| {
        Error::Numerical("no loop orientation gives a symmetric Riemann matrix with negative definite real part".into())
    })
}

/// Expansion data of the normalized differentials at the `+` infinite point.
#[derive(Clone, Debug, Serialize)]
pub struct VData {
    #[serde(serialize_with = "rationals_as_strings")]
    pub r: Vec<Rational>,
    /// `v[k][i]` is `V^(k)_i`.
    #[serde(serialize_with = "complex_table")]
    pub v: Vec<Vec<Complex64>>,
}

fn rationals_as_strings<Z: serde::Serializer>(r: &[Rational], s: Z) -> std::result::Result<Z::Ok, Z::Error> {
    s.collect_seq(r.iter().map(format_rational))
}

fn complex_table<Z: serde::Serializer>(v: &[Vec<Complex64>], s: Z) -> std::result::Result<Z::Ok, Z::Error> {
    s.collect_seq(v.iter().map(|row| row.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()))
}

/// `r_k` from `(1 + q_1/z + ... + q_(2g+2)/z^(2g+2))^(-1/2)` and
/// `V^(k)_i = sum_j alpha_ij r_(k+1-j)`.
pub fn v_vectors(curve: &HyperellipticCurve, ctx: &ThetaContext, kmax: usize) -> Result<VData> {
    let g = curve.genus;
    let deg = 2 * g + 2;
    let coeffs: Vec<Rational> = (0..=kmax.max(1))
        .map(|j| if j <= deg { curve.q.coeff(deg - j) } else { Rational::from_i64(0) })
        .collect();
    let r = series_inv_sqrt(&TailSeries::new(0, coeffs))?.coeffs()[..=kmax].to_vec();
    let v = (0..=kmax)
        .map(|k| {
            (0..g)
                .map(|i| {
                    (0..g)
                        .filter(|&j| j <= k)
                        .map(|j| ctx.alpha[(i, j)] * r[k - j].to_c64())
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(VData { r, v })
}

/// Largest relative deviation between `(1 / 2 pi i) oint omega_i z^(k+1)` on a
/// large circle of the `+` sheet and `V^(k)_i / 2`.
pub fn expansion_mismatch(curve: &HyperellipticCurve, ctx: &ThetaContext, data: &VData) -> f64 {
    let g = curve.genus;
    let deg = (2 * g + 2) as i32;
    let mut radius = 2.0 * curve.scale() + 1.0;
    let samples = 1024;
    let circle = |radius: f64| -> Vec<Complex64> {
        (0..samples)
            .map(|s| Complex64::from_polar(radius, 2.0 * PI * s as f64 / samples as f64))
            .collect()
    };
    while circle(radius).iter().any(|&z| (curve.q_at(z) / z.powi(deg) - 1.0).norm() > 0.5) {
        radius *= 2.0;
    }
    let zs = circle(radius);
    let mut worst: f64 = 0.0;
    for (k, vk) in data.v.iter().enumerate() {
        for i in 0..g {
            let mean: Complex64 = zs
                .iter()
                .map(|&z| {
                    let w = z.powi(g as i32 + 1) * (curve.q_at(z) / z.powi(deg)).sqrt();
                    let poly: Complex64 = (0..g).map(|j| ctx.alpha[(i, j)] * z.powi((g - 1 - j) as i32)).sum();
                    poly / (2.0 * w) * z.powi(k as i32 + 2)
                })
                .sum::<Complex64>()
                / samples as f64;
            let want = vk[i] / 2.0;
            worst = worst.max((mean - want).norm() / want.norm().max(1.0));
        }
    }
    worst
}
