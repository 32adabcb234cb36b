//! Abel map from a branch point and the divisor point `u0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::quadrature::gauss_legendre;
use super::riemann::theta_sum;
use super::{continuous_sqrt, HyperellipticCurve, ThetaContext, DEFAULT_RADIUS_CAP};
use crate::divisor::DivisorPoint;
use crate::error::{Error, Result};

const NODES: usize = 24;
const MAX_PIECES: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathChoice {
    /// Straight line when it keeps clear of other branch points.
    Straight,
    /// Always bend through an offset midpoint.
    Detour,
}

#[derive(Clone, Debug)]
pub struct JacobianPoint {
    pub u0: Vec<Complex64>,
    pub theta_value: Complex64,
    pub base_branch_point: usize,
}

impl Serialize for JacobianPoint {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = s.serialize_struct("JacobianPoint", 3)?;
        let u: Vec<[f64; 2]> = self.u0.iter().map(|c| [c.re, c.im]).collect();
        st.serialize_field("u0", &u)?;
        st.serialize_field("theta", &[self.theta_value.re, self.theta_value.im])?;
        st.serialize_field("base_branch_point", &self.base_branch_point)?;
        st.end()
    }
}

/// Representative of `u` modulo `2 pi i Z^g + B Z^g` with small real part
/// and imaginary parts in `(-pi, pi]`.
pub fn reduce_mod_lattice(u: &[Complex64], b: &DMatrix<Complex64>) -> Vec<Complex64> {
    let g = u.len();
    let re_b = DMatrix::from_fn(g, g, |i, j| b[(i, j)].re);
    let re_u = DVector::from_iterator(g, u.iter().map(|c| c.re));
    let shift: Vec<f64> = match re_b.lu().solve(&re_u) {
        Some(k) => k.iter().map(|x| x.round()).collect(),
        None => vec![0.0; g],
    };
    (0..g)
        .map(|i| {
            let mut c = u[i] - (0..g).map(|j| b[(i, j)] * shift[j]).sum::<Complex64>();
            c.im -= 2.0 * PI * (c.im / (2.0 * PI)).round();
            c
        })
        .collect()
}

fn distance_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((p - a) * d.conj()).re / d.norm_sqr();
    (p - (a + d * t.clamp(0.0, 1.0))).norm()
}

fn clear(curve: &HyperellipticCurve, base: usize, path: &[Complex64], margin: f64) -> bool {
    curve.branch_points.iter().enumerate().filter(|&(k, _)| k != base).all(|(_, &e)| {
        path.windows(2).all(|s| distance_to_segment(e, s[0], s[1]) > margin)
    })
}

fn choose_path(curve: &HyperellipticCurve, base: usize, z: Complex64, choice: PathChoice) -> Result<Vec<Complex64>> {
    let e = curve.branch_points[base];
    let sep = super::min_separation(&curve.branch_points);
    let nearest = curve
        .branch_points
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != base)
        .map(|(_, &b)| (z - b).norm())
        .fold(f64::INFINITY, f64::min);
    if nearest < 1e-9 * curve.scale() {
        return Err(Error::Numerical(format!("divisor point z = {z} sits on a branch point")));
    }
    let margin = (0.2 * sep.min((z - e).norm())).min(0.5 * nearest);
    if choice == PathChoice::Straight && clear(curve, base, &[e, z], margin) {
        return Ok(vec![e, z]);
    }
    let normal = (z - e) * Complex64::i();
    for t in [0.35, -0.35, 0.7, -0.7, 1.2, -1.2, 2.0, -2.0] {
        let mid = (e + z) / 2.0 + normal * t;
        let path = vec![e, mid, z];
        if clear(curve, base, &path, margin) {
            return Ok(path);
        }
    }
    Err(Error::Numerical(format!(
        "no integration path from branch point {base} to z = {z} avoids the other branch points"
    )))
}

/// Gauss–Legendre nodes and weights on `[0, 1]` split into `pieces`,
/// descending.
fn composite_descending(pieces: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(NODES);
    let h = 1.0 / pieces as f64;
    let mut out: Vec<(f64, f64)> = (0..pieces)
        .flat_map(|p| {
            let lo = p as f64 * h;
            x.iter().zip(&w).map(move |(x, w)| (lo + 0.5 * h * (x + 1.0), 0.5 * h * w)).collect::<Vec<_>>()
        })
        .collect();
    out.reverse();
    out
}

/// `int_{e_base}^{(z, w)} z^(g-1-i) dz / (2w)` along `path`, at a fixed
/// number of pieces per segment.
fn path_integrals(curve: &HyperellipticCurve, base: usize, path: &[Complex64], w_end: Complex64, pieces: usize) -> Vec<Complex64> {
    let g = curve.genus;
    let rule = composite_descending(pieces);
    let mut acc = vec![Complex64::new(0.0, 0.0); g];
    let mut w_here = w_end;
    // regular segments, walked backwards from the end point
    for s in (1..path.len() - 1).rev() {
        let (from, to) = (path[s], path[s + 1]);
        let mut zs: Vec<Complex64> = rule.iter().map(|&(t, _)| from + (to - from) * t).collect();
        zs.push(from);
        let qs: Vec<Complex64> = zs.iter().map(|&z| curve.q_at(z)).collect();
        let ws = continuous_sqrt(&qs, Some(w_here));
        for (((_, wt), z), w) in rule.iter().zip(&zs).zip(&ws) {
            for (i, a) in acc.iter_mut().enumerate() {
                *a += z.powi((g - 1 - i) as i32) / (2.0 * w) * (to - from) * *wt;
            }
        }
        w_here = *ws.last().expect("segment has nodes");
    }
    // first segment z = e + (p - e) tau^2 removes the square-root endpoint
    let (e, p) = (path[0], path[1]);
    let root = (p - e).sqrt();
    let mut taus: Vec<f64> = vec![1.0];
    taus.extend(rule.iter().map(|&(t, _)| t));
    let cof: Vec<Complex64> = taus.iter().map(|&t| curve.cofactor(e + (p - e) * t * t, &[base])).collect();
    let roots = continuous_sqrt(&cof, Some(w_here / root));
    for (&(t, wt), r) in rule.iter().zip(&roots[1..]) {
        let z = e + (p - e) * t * t;
        for (i, a) in acc.iter_mut().enumerate() {
            // dz / (2w) = sqrt(p - e) dtau / sqrt(cofactor)
            *a += z.powi((g - 1 - i) as i32) * root / r * wt;
        }
    }
    acc
}

/// `int omega` from branch point `base` to the curve point `(z, w)`.
pub fn abel_integral(
    curve: &HyperellipticCurve,
    ctx: &ThetaContext,
    base: usize,
    z: Complex64,
    w: Complex64,
    choice: PathChoice,
) -> Result<Vec<Complex64>> {
    if base >= curve.branch_points.len() {
        return Err(Error::InvalidInput(format!("no branch point {base}")));
    }
    let path = choose_path(curve, base, z, choice)?;
    let mut pieces = 1;
    let mut prev = path_integrals(curve, base, &path, w, pieces);
    let eta = loop {
        pieces *= 2;
        let next = path_integrals(curve, base, &path, w, pieces);
        let size = next.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let err = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if err < 1e-13 * size {
            break next;
        }
        if pieces >= MAX_PIECES {
            return Err(Error::Numerical(format!("Abel integral to z = {z} did not converge: error {err:e}")));
        }
        prev = next;
    };
    let g = curve.genus;
    Ok((0..g).map(|i| (0..g).map(|j| ctx.alpha[(i, j)] * eta[j]).sum()).collect())
}

/// `u0 = sum_j int_{e}^{Q_j} omega - varpi` with `e` a branch point and
/// `varpi = pi i (1, 0, 1, 0, ...) + (B_1i + ... )/2` summed over columns.
///
/// Starting at a branch point instead of the `+` infinite point changes the
/// result by `(g + 1) int_{P+}^{e} omega`, which accounts for the degree-two
/// divisor at infinity; any remaining half-period is left to the caller.
pub fn abel_u0(curve: &HyperellipticCurve, ctx: &ThetaContext, divisor: &[DivisorPoint], choice: PathChoice) -> Result<JacobianPoint> {
    let g = curve.genus;
    if divisor.len() != g + 1 {
        return Err(Error::InvalidInput(format!("expected {} divisor points, got {}", g + 1, divisor.len())));
    }
    let base = 0;
    let mut u = vec![Complex64::new(0.0, 0.0); g];
    for pt in divisor {
        let a = abel_integral(curve, ctx, base, pt.z, pt.w, choice)?;
        for (ui, ai) in u.iter_mut().zip(a) {
            *ui += ai;
        }
    }
    for (i, ui) in u.iter_mut().enumerate() {
        if i % 2 == 0 {
            *ui -= Complex64::new(0.0, PI);
        }
        *ui -= (0..g).map(|j| ctx.riemann[(i, j)]).sum::<Complex64>() / 2.0;
    }
    let reduced = reduce_mod_lattice(&u, &ctx.riemann);
    let theta_value = theta_sum(&reduced, &ctx.riemann, 0, DEFAULT_RADIUS_CAP)?.value();
    Ok(JacobianPoint {
        u0: u,
        theta_value,
        base_branch_point: base,
    })
}
