//! Sparse multivariate polynomials in auxiliary variables `u_1, ..., u_N`.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors, so iteration is in
//! lexicographic order and the last key is the lex-leading monomial. Zero
//! coefficients are never stored.

use std::collections::BTreeMap;


use crate::error::{Error, Result};
use crate::scalar::Field;

pub type Exponent = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<S> {
    nvars: usize,
    terms: BTreeMap<Exponent, S>,
}

impl<S: Field> MultiPoly<S> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable `u_i` (zero-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, S::one());
        p
    }

    /// `u_i - u_j`
    pub fn difference(nvars: usize, i: usize, j: usize) -> Self {
        Self::var(nvars, i).sub(&Self::var(nvars, j))
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponent, S)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[u32]) -> S {
        self.terms.get(e).cloned().unwrap_or_else(S::zero)
    }

    /// Accumulates `c * u^e`, dropping the entry if it cancels.
    pub fn add_term(&mut self, e: Exponent, c: S) {
        assert_eq!(e.len(), self.nvars, "exponent arity mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn min_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn homogeneous_part(&self, degree: u32) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops every term of total degree above `degree`.
    pub fn truncate_total_degree(&self, degree: u32) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() <= degree)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, a)| (e.clone(), a.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.mul_truncated(rhs, u32::MAX)
    }

    /// Product keeping only terms of total degree `<= max_degree`.
    pub fn mul_truncated(&self, rhs: &Self, max_degree: u32) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in &rhs.terms {
                if da + eb.iter().sum::<u32>() > max_degree {
                    continue;
                }
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Lexicographic division of a homogeneous polynomial by a homogeneous
    /// divisor. Returns `None` when the division leaves a remainder.
    fn divide_homogeneous(&self, divisor: &Self) -> Option<Self> {
        let (lead_e, lead_c) = divisor.terms.iter().next_back()?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        while let Some((e, c)) = rem.terms.iter().next_back() {
            if e.iter().zip(lead_e).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Exponent = e.iter().zip(lead_e).map(|(a, b)| a - b).collect();
            let qc = c.clone() / lead_c.clone();
            for (de, dc) in &divisor.terms {
                let me = qe.iter().zip(de).map(|(a, b)| a + b).collect();
                rem.add_term(me, -(qc.clone() * dc.clone()));
            }
            quot.add_term(qe, qc);
        }
        Some(quot)
    }
}

/// Exact division trusted through a total degree.
///
/// The numerator is only meaningful through total degree
/// `trusted_total_degree`. The quotient `q` is built as a power series in
/// the homogeneous components of the divisor, starting from its lowest
/// component of degree `delta`, so that `numerator - q * divisor` has no
/// term of total degree `<= trusted_total_degree`. The returned quotient
/// is exact through total degree `trusted_total_degree - delta`.
pub fn multipoly_exact_divide<S: Field>(
    numerator: &MultiPoly<S>,
    divisor: &MultiPoly<S>,
    trusted_total_degree: u32,
) -> Result<MultiPoly<S>> {
    let Some(delta) = divisor.min_total_degree() else {
        return Err(Error::InvalidInput("division by the zero polynomial".into()));
    };
    assert_eq!(numerator.nvars, divisor.nvars, "variable count mismatch");
    let nvars = numerator.nvars;
    if let Some(low) = numerator.min_total_degree() {
        if low < delta && low <= trusted_total_degree {
            return Err(Error::InexactDivision {
                degree: low as usize,
            });
        }
    }
    if trusted_total_degree < delta {
        return Ok(MultiPoly::zero(nvars));
    }
    let top = divisor.total_degree().unwrap_or(delta);
    let divisor_parts: Vec<MultiPoly<S>> =
        (delta..=top).map(|d| divisor.homogeneous_part(d)).collect();
    let mut quotient_parts: Vec<MultiPoly<S>> = Vec::new();
    for t in 0..=(trusted_total_degree - delta) {
        let mut target = numerator.homogeneous_part(t + delta);
        for (j, part) in divisor_parts.iter().enumerate().skip(1) {
            let j = j as u32;
            if j > t || part.is_zero() {
                continue;
            }
            target = target.sub(&part.mul(&quotient_parts[(t - j) as usize]));
        }
        let q = target
            .divide_homogeneous(&divisor_parts[0])
            .ok_or(Error::InexactDivision {
                degree: (t + delta) as usize,
            })?;
        quotient_parts.push(q);
    }
    Ok(quotient_parts
        .iter()
        .fold(MultiPoly::zero(nvars), |acc, q| acc.add(q)))
}
