//! Coefficient-level comparison of exact correlators with `log theta`
//! derivatives at `u0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::abel::{abel_u0, reduce_mod_lattice, PathChoice};
use super::periods::{expansion_mismatch, period_matrix, v_vectors};
use super::riemann::{log_theta_tensor, theta_sum};
use super::{HyperellipticCurve, DEFAULT_RADIUS_CAP};
use crate::correlators::{hyperelliptic_combination, tuples, CorrelatorEngine};
use crate::curve::MatrixPolynomial;
use crate::divisor::{pole_divisor, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, Field, Rational};

/// `pi i m + B n / 2` with `m, n` in `{0, 1}^g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalfPeriod {
    pub m: Vec<u8>,
    pub n: Vec<u8>,
}

impl HalfPeriod {
    pub fn vector(&self, b: &nalgebra::DMatrix<Complex64>) -> Vec<Complex64> {
        let g = self.m.len();
        (0..g)
            .map(|i| {
                Complex64::new(0.0, PI * self.m[i] as f64)
                    + (0..g).map(|j| b[(i, j)] * self.n[j] as f64).sum::<Complex64>() / 2.0
            })
            .collect()
    }
}

/// All `4^g` half-periods, zero first.
pub fn half_periods(g: usize) -> Vec<HalfPeriod> {
    (0..1usize << (2 * g))
        .map(|bits| HalfPeriod {
            m: (0..g).map(|i| (bits >> i & 1) as u8).collect(),
            n: (0..g).map(|i| (bits >> (g + i) & 1) as u8).collect(),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub n: usize,
    pub k: Vec<usize>,
    pub f: Rational,
    pub t: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub passed: bool,
}

/// Serialized alongside the shift that produced `T`.
struct CheckWithShift<'a>(&'a IdentityCheck, Option<&'a HalfPeriod>);

impl Serialize for CheckWithShift<'_> {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let c = self.0;
        let mut st = s.serialize_struct("IdentityCheck", 8)?;
        st.serialize_field("N", &c.n)?;
        st.serialize_field("k", &c.k)?;
        st.serialize_field("F", &format_rational(&c.f))?;
        st.serialize_field("T", &[c.t.re, c.t.im])?;
        st.serialize_field("abs_err", &c.abs_err)?;
        st.serialize_field("rel_err", &c.rel_err)?;
        st.serialize_field("passed", &c.passed)?;
        st.serialize_field("shift_used", &self.1)?;
        st.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftTrial {
    pub shift: HalfPeriod,
    /// Error on the first identity, or `None` when `theta` vanished there.
    pub first_abs_err: Option<f64>,
    pub passed_all: bool,
}

#[derive(Clone, Debug)]
pub struct ThetaVerification {
    pub genus: usize,
    pub riemann: Vec<Vec<Complex64>>,
    pub riemann_symmetry_error: f64,
    pub normalization_error: f64,
    pub quasi_periodicity_error: f64,
    pub v_consistency_error: f64,
    pub u0: Vec<Complex64>,
    pub shift_used: Option<HalfPeriod>,
    pub identities: Vec<IdentityCheck>,
    pub trials: Vec<ShiftTrial>,
    pub passed: bool,
}

fn complex_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

impl Serialize for ThetaVerification {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = s.serialize_struct("ThetaVerification", 11)?;
        st.serialize_field("genus", &self.genus)?;
        let b: Vec<_> = self.riemann.iter().map(|r| complex_pairs(r)).collect();
        st.serialize_field("B", &b)?;
        st.serialize_field("B_symmetry_error", &self.riemann_symmetry_error)?;
        st.serialize_field("normalization_error", &self.normalization_error)?;
        st.serialize_field("quasi_periodicity_error", &self.quasi_periodicity_error)?;
        st.serialize_field("V_consistency_error", &self.v_consistency_error)?;
        st.serialize_field("u0", &complex_pairs(&self.u0))?;
        st.serialize_field("shift_used", &self.shift_used)?;
        let ids: Vec<_> = self.identities.iter().map(|c| CheckWithShift(c, self.shift_used.as_ref())).collect();
        st.serialize_field("identities", &ids)?;
        st.serialize_field("shift_trials", &self.trials)?;
        st.serialize_field("passed", &self.passed)?;
        st.end()
    }
}

/// Exact side: `sum_a prod eps(a_i) F^{a}_{k}` for every nondecreasing `k`.
fn exact_targets(w: &MatrixPolynomial<Rational>, targets: &[(usize, usize)]) -> Result<Vec<(usize, Vec<usize>, Rational)>> {
    let max_n = targets.iter().map(|t| t.0).max().unwrap_or(3);
    let kmax = targets.iter().map(|t| t.1).max().unwrap_or(0);
    let engine = CorrelatorEngine::new(w, max_n, kmax)?;
    let mut out = Vec::new();
    for &(n, km) in targets {
        let table = engine.full_table(n, km)?;
        for k in tuples(n, km + 1).into_iter().filter(|k| k.windows(2).all(|p| p[0] <= p[1])) {
            let f = hyperelliptic_combination(w, &table, &k)?;
            out.push((n, k, f));
        }
    }
    Ok(out)
}

/// `sum_{i_1..i_N} V^(k_1)_(i_1) ... V^(k_N)_(i_N) d^N log theta(u)`.
fn contract(tensor: &std::collections::BTreeMap<Vec<usize>, Complex64>, v: &[Vec<Complex64>], k: &[usize], g: usize) -> Complex64 {
    tuples(k.len(), g)
        .into_iter()
        .map(|idx| {
            let weight: Complex64 = idx.iter().zip(k).map(|(&i, &kk)| v[kk][i]).product();
            let mut key = idx;
            key.sort_unstable();
            weight * tensor[&key]
        })
        .sum()
}

fn check(n: usize, k: &[usize], f: &Rational, t: Complex64, tol: f64) -> IdentityCheck {
    let fv = f.to_c64().re;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let abs_err = (t * sign - fv).norm();
    let rel_err = abs_err / fv.abs().max(1.0);
    IdentityCheck {
        n,
        k: k.to_vec(),
        f: f.clone(),
        t,
        abs_err,
        rel_err,
        passed: rel_err < tol && t.im.abs() < tol,
    }
}

/// Checks `(-1)^N T = F` for every `(N, kmax)` in `targets` and every
/// nondecreasing `k` with entries up to `kmax`, where `T` contracts the
/// `V^(k)` with `d^N log theta(u0 + h)`. The half-period `h` is the first
/// one for which all identities hold.
pub fn verify_main_theorem(w: &MatrixPolynomial<Rational>, targets: &[(usize, usize)], tol: f64) -> Result<ThetaVerification> {
    if targets.is_empty() || targets.iter().any(|&(n, _)| !(3..=4).contains(&n)) {
        return Err(Error::InvalidInput("theta verification covers N = 3 and N = 4".into()));
    }
    let curve = HyperellipticCurve::from_matrix_polynomial(w)?;
    let g = curve.genus;
    let ctx = period_matrix(&curve)?;
    let divisor = pole_divisor(w, DEFAULT_TOL)?;
    if divisor.points.len() != g + 1 {
        return Err(Error::Verification(format!(
            "divisor has {} accepted points, expected {}",
            divisor.points.len(),
            g + 1
        )));
    }
    let point = abel_u0(&curve, &ctx, &divisor.points, PathChoice::Straight)?;
    let kmax = targets.iter().map(|t| t.1).max().unwrap_or(0);
    let vdata = v_vectors(&curve, &ctx, kmax)?;
    let v_consistency_error = expansion_mismatch(&curve, &ctx, &vdata);
    let exact = exact_targets(w, targets)?;

    let u0 = reduce_mod_lattice(&point.u0, &ctx.riemann);
    let quasi_periodicity_error = quasi_periodicity(&u0, &ctx.riemann)?;
    let orders: Vec<usize> = {
        let mut o: Vec<usize> = targets.iter().map(|t| t.0).collect();
        o.sort_unstable();
        o.dedup();
        o
    };

    let shifts = half_periods(g);
    let evaluated: Vec<(ShiftTrial, Vec<IdentityCheck>)> = shifts
        .par_iter()
        .map(|h| {
            let hv = h.vector(&ctx.riemann);
            let u: Vec<Complex64> = u0.iter().zip(&hv).map(|(a, b)| a + b).collect();
            let tensors: Option<Vec<_>> = orders.iter().map(|&n| log_theta_tensor(&u, &ctx.riemann, n).ok()).collect();
            let Some(tensors) = tensors else {
                let trial = ShiftTrial {
                    shift: h.clone(),
                    first_abs_err: None,
                    passed_all: false,
                };
                return (trial, Vec::new());
            };
            let checks: Vec<IdentityCheck> = exact
                .iter()
                .map(|(n, k, f)| {
                    let tensor = &tensors[orders.iter().position(|o| o == n).expect("order listed")];
                    check(*n, k, f, contract(tensor, &vdata.v, k, g), tol)
                })
                .collect();
            let trial = ShiftTrial {
                shift: h.clone(),
                first_abs_err: checks.first().map(|c| c.abs_err),
                passed_all: checks.iter().all(|c| c.passed),
            };
            (trial, checks)
        })
        .collect();

    let chosen = evaluated.iter().position(|(t, _)| t.passed_all);
    let identities = match chosen {
        Some(i) => evaluated[i].1.clone(),
        None => evaluated
            .iter()
            .filter(|(t, _)| t.first_abs_err.is_some())
            .min_by(|a, b| a.0.first_abs_err.partial_cmp(&b.0.first_abs_err).expect("finite errors"))
            .map(|e| e.1.clone())
            .unwrap_or_default(),
    };
    let shift_used = chosen.map(|i| evaluated[i].0.shift.clone());
    let passed = shift_used.is_some()
        && ctx.symmetry_error < 1e-8
        && quasi_periodicity_error < 1e-10
        && v_consistency_error < 1e-8;
    Ok(ThetaVerification {
        genus: g,
        riemann: (0..g).map(|i| (0..g).map(|j| ctx.riemann[(i, j)]).collect()).collect(),
        riemann_symmetry_error: ctx.symmetry_error,
        normalization_error: ctx.normalization_error(),
        quasi_periodicity_error,
        v_consistency_error,
        u0,
        shift_used,
        identities,
        trials: evaluated.into_iter().map(|(t, _)| t).collect(),
        passed,
    })
}

/// Largest relative defect of `theta(u + B e_j) = exp(-B_jj/2 - u_j) theta(u)`.
pub(crate) fn quasi_periodicity(u: &[Complex64], b: &nalgebra::DMatrix<Complex64>) -> Result<f64> {
    let g = u.len();
    let base = theta_sum(u, b, 0, DEFAULT_RADIUS_CAP)?.value();
    let mut worst: f64 = 0.0;
    for j in 0..g {
        let shifted: Vec<Complex64> = (0..g).map(|i| u[i] + b[(i, j)]).collect();
        let lhs = theta_sum(&shifted, b, 0, DEFAULT_RADIUS_CAP)?.value();
        let rhs = (-b[(j, j)] / 2.0 - u[j]).exp() * base;
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()));
    }
    Ok(worst)
}
