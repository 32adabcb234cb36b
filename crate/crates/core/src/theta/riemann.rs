//! `theta(u) = sum_n exp(<n, B n>/2 + <n, u>)` with term-wise derivatives.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::abel::reduce_mod_lattice;
use crate::error::{Error, Result};

pub const DEFAULT_RADIUS_CAP: usize = 40;

/// Lattice sum of `theta` and all its partial derivatives up to an order.
#[derive(Clone, Debug)]
pub struct ThetaSum {
    pub radius: usize,
    /// Keyed by the sorted list of differentiation indices.
    pub derivatives: BTreeMap<Vec<usize>, Complex64>,
    /// `sum |term|` for the undifferentiated series.
    pub absolute: f64,
}

impl ThetaSum {
    pub fn value(&self) -> Complex64 {
        self.derivatives[&Vec::new()]
    }

    pub fn derivative(&self, indices: &[usize]) -> Complex64 {
        let mut key = indices.to_vec();
        key.sort_unstable();
        self.derivatives[&key]
    }
}

/// Nondecreasing index tuples of length `len` over `0..g`.
pub(crate) fn sorted_tuples(len: usize, g: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                let lo = t.last().copied().unwrap_or(0);
                (lo..g).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn smallest_decay(b: &DMatrix<Complex64>) -> Result<f64> {
    let g = b.nrows();
    let re = DMatrix::from_fn(g, g, |i, j| -0.5 * (b[(i, j)].re + b[(j, i)].re));
    let lambda = re.symmetric_eigenvalues().min();
    if lambda <= 0.0 {
        return Err(Error::Numerical("Re B is not negative definite".into()));
    }
    Ok(lambda)
}

/// Upper bound for the terms with `|n|_inf > radius`, derivative order
/// included.
fn tail_bound(lambda: f64, shift: f64, g: usize, order: usize, radius: usize) -> f64 {
    (radius + 1..radius + 400)
        .map(|r| {
            let r = r as f64;
            (2.0 * r + 1.0).powi(g as i32) * r.powi(order as i32) * (-0.5 * lambda * r * r + shift * r).exp()
        })
        .sum()
}

/// `theta` and every partial derivative up to `order` at `u`, with the
/// lattice radius grown until the tail bound is below `1e-12` of `|theta|`.
pub fn theta_sum(u: &[Complex64], b: &DMatrix<Complex64>, order: usize, radius_cap: usize) -> Result<ThetaSum> {
    let g = u.len();
    let lambda = smallest_decay(b)?;
    let shift = u.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    let keys: Vec<Vec<usize>> = (0..=order).flat_map(|l| sorted_tuples(l, g)).collect();
    let mut radius = ((shift + (2.0 * lambda * 40.0).sqrt()) / lambda).ceil() as usize;
    loop {
        if radius > radius_cap {
            return Err(Error::Numerical("lattice sum too slow; curve too degenerate".into()));
        }
        let side = 2 * radius + 1;
        let mut sums = vec![Complex64::new(0.0, 0.0); keys.len()];
        let mut absolute = 0.0;
        let mut n = vec![-(radius as i64); g];
        for _ in 0..side.pow(g as u32) {
            let mut quad = Complex64::new(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    quad += b[(i, j)] * (n[i] * n[j]) as f64;
                }
            }
            let lin: Complex64 = n.iter().zip(u).map(|(&k, ui)| ui * k as f64).sum();
            let term = (0.5 * quad + lin).exp();
            absolute += term.norm();
            for (key, s) in keys.iter().zip(sums.iter_mut()) {
                let factor: f64 = key.iter().map(|&i| n[i] as f64).product();
                *s += term * factor;
            }
            for slot in n.iter_mut() {
                *slot += 1;
                if *slot <= radius as i64 {
                    break;
                }
                *slot = -(radius as i64);
            }
        }
        let value = sums[0].norm();
        if tail_bound(lambda, shift, g, order, radius) < 1e-12 * value.max(f64::MIN_POSITIVE) {
            return Ok(ThetaSum {
                radius,
                derivatives: keys.into_iter().zip(sums).collect(),
                absolute,
            });
        }
        radius += 1;
    }
}

/// `theta` differentiated once in each listed coordinate.
pub fn theta(u: &[Complex64], b: &DMatrix<Complex64>, derivative: &[usize]) -> Result<Complex64> {
    if derivative.len() > 4 {
        return Err(Error::InvalidInput("theta derivatives are supported up to order 4".into()));
    }
    if derivative.iter().any(|&i| i >= u.len()) {
        return Err(Error::InvalidInput("derivative index out of range".into()));
    }
    Ok(theta_sum(u, b, derivative.len(), DEFAULT_RADIUS_CAP)?.derivative(derivative))
}

/// Set partitions of `0..n`, each block ascending.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for x in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                let mut next = Vec::with_capacity(p.len() + 1);
                for i in 0..p.len() {
                    let mut q = p.clone();
                    q[i].push(x);
                    next.push(q);
                }
                let mut q = p;
                q.push(vec![x]);
                next.push(q);
                next
            })
            .collect();
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All `order`-th partial derivatives of `log theta` at `u`, keyed by sorted
/// index tuple. `u` is first reduced modulo the period lattice.
pub fn log_theta_tensor(u: &[Complex64], b: &DMatrix<Complex64>, order: usize) -> Result<BTreeMap<Vec<usize>, Complex64>> {
    let g = u.len();
    let reduced = reduce_mod_lattice(u, b);
    let sum = theta_sum(&reduced, b, order, DEFAULT_RADIUS_CAP)?;
    let th = sum.value();
    if th.norm() < 1e-10 * sum.absolute {
        return Err(Error::Numerical("point on theta divisor".into()));
    }
    let partitions = set_partitions(order);
    let mut out = BTreeMap::new();
    for key in sorted_tuples(order, g) {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &partitions {
            let blocks = p.len();
            let sign = if blocks % 2 == 1 { 1.0 } else { -1.0 };
            let moment: Complex64 = p
                .iter()
                .map(|block| sum.derivative(&block.iter().map(|&x| key[x]).collect::<Vec<_>>()) / th)
                .product();
            acc += moment * (sign * factorial(blocks - 1));
        }
        out.insert(key, acc);
    }
    Ok(out)
}

/// One mixed partial derivative of `log theta`.
pub fn log_theta_derivative(u: &[Complex64], b: &DMatrix<Complex64>, indices: &[usize]) -> Result<Complex64> {
    if indices.iter().any(|&i| i >= u.len()) {
        return Err(Error::InvalidInput("derivative index out of range".into()));
    }
    let mut key = indices.to_vec();
    key.sort_unstable();
    Ok(log_theta_tensor(u, b, indices.len())?[&key])
}
