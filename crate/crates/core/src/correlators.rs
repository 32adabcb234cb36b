//! Exact correlators `F^{a_1..a_N}_{k_1..k_N}[W]`.
//!
//! With `u_i = 1/z_i` and `P_a(u) = sum_e C_{a,e} u^e` the projector
//! series, the generating function `sum_k F^{a}_{k} u^k` is
//!
//! * `N = 2`: `(tr P_{a1}(u_1) P_{a2}(u_2) - delta) / (u_1 - u_2)^2`;
//! * `N >= 3`: `-sum_c sigma_c T_c prod_{pairs not in c} (u_i - u_j) / Delta`
//!   over cyclic orders `c` starting at slot 0, where `T_c` is the trace of
//!   the projectors in the order `c`, `Delta = prod_{i<j} (u_i - u_j)` and
//!   `sigma_c` collects the signs from writing each cycle edge as a factor
//!   of `Delta`.
//!
//! Both divisions are exact and are carried out on truncated numerators by
//! [`multipoly_exact_divide`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::curve::MatrixPolynomial;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::multipoly::{multipoly_exact_divide, MultiPoly};
use crate::projectors::all_branch_expansions;
use crate::scalar::{format_rational, rat, Rational};

/// Index tuple `((a_1, k_1), ..., (a_N, k_N))` with zero-based sheets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorrelatorIndex {
    pub sheets: Vec<usize>,
    pub orders: Vec<usize>,
}

impl CorrelatorIndex {
    pub fn new(sheets: Vec<usize>, orders: Vec<usize>) -> Self {
        assert_eq!(sheets.len(), orders.len());
        CorrelatorIndex { sheets, orders }
    }

    /// The same index with its `(a_i, k_i)` pairs reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        CorrelatorIndex {
            sheets: perm.iter().map(|&p| self.sheets[p]).collect(),
            orders: perm.iter().map(|&p| self.orders[p]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorTable {
    pub arity: usize,
    /// Every entry with all `k_i <= trusted_order` is exact.
    pub trusted_order: usize,
    pub entries: BTreeMap<CorrelatorIndex, Rational>,
}

impl CorrelatorTable {
    pub fn get(&self, sheets: &[usize], orders: &[usize]) -> Option<&Rational> {
        self.entries.get(&CorrelatorIndex::new(sheets.to_vec(), orders.to_vec()))
    }

    fn merge(&mut self, other: CorrelatorTable) {
        self.entries.extend(other.entries);
    }
}

/// JSON form: sheets are reported one-based, values as `"p/q"` strings.
impl Serialize for CorrelatorTable {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        struct Entries<'a>(&'a BTreeMap<CorrelatorIndex, Rational>);
        impl Serialize for Entries<'_> {
            fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for (idx, v) in self.0 {
                    let mut e = BTreeMap::new();
                    e.insert("a", serde_json::json!(idx.sheets.iter().map(|a| a + 1).collect::<Vec<_>>()));
                    e.insert("k", serde_json::json!(idx.orders));
                    e.insert("value", serde_json::json!(format_rational(v)));
                    seq.serialize_element(&e)?;
                }
                seq.end()
            }
        }
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("N", &self.arity)?;
        map.serialize_entry("entries", &Entries(&self.entries))?;
        map.serialize_entry("trusted_order", &self.trusted_order)?;
        map.end()
    }
}

/// Projector coefficients `C_{a,e}` for every sheet, shared by all correlator runs.
#[derive(Clone, Debug)]
pub struct CorrelatorEngine {
    n: usize,
    /// `coeffs[a][e]` multiplies `z^(-e)` in `Pi_a`.
    coeffs: Vec<Vec<Matrix<Rational>>>,
    /// The same coefficients over a common denominator, for fast traces.
    scaled: Vec<Vec<Scaled>>,
}

#[derive(Clone, Debug)]
struct Scaled {
    num: Matrix<BigInt>,
    den: BigInt,
}

impl Scaled {
    fn new(m: &Matrix<Rational>) -> Self {
        let den = m.entries().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let num = m.map(|x| x.numer() * (&den / x.denom()));
        Scaled { num, den }
    }
}

/// Internal truncation needed for arity `N` and all `k_i <= kmax`.
///
/// The quotient is trusted through total degree `K - N` (and `K - 2` for
/// `N = 2`), and every wanted tuple has total degree at most `N kmax`.
pub fn required_order(arity: usize, kmax: usize) -> usize {
    arity * kmax + arity
}

/// Extra orders used by the recompute-and-compare stability check.
pub const STABILITY_MARGIN: usize = 2;

impl CorrelatorEngine {
    /// Projector series good for arities up to `max_arity` with `k_i <= kmax`,
    /// plus the stability margin.
    pub fn new(w: &MatrixPolynomial<Rational>, max_arity: usize, kmax: usize) -> Result<Self> {
        let order = required_order(max_arity.max(2), kmax) + STABILITY_MARGIN;
        let exps = all_branch_expansions(w, order)?;
        let coeffs = exps
            .iter()
            .map(|e| (0..=order as i64).map(|k| e.projector.coeff(-k)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let scaled = coeffs.iter().map(|row| row.iter().map(Scaled::new).collect()).collect();
        Ok(CorrelatorEngine { n: w.n(), coeffs, scaled })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Matrix coefficient of `z^(-e)` in `Pi_a`.
    pub fn projector_coeff(&self, a: usize, e: usize) -> &Matrix<Rational> {
        &self.coeffs[a][e]
    }

    /// `sum_k F^{sheets}_k u^k`, trusted through total degree `order - N`
    /// (`order - 2` when `N = 2`).
    pub fn generating_polynomial(&self, sheets: &[usize], order: usize) -> Result<MultiPoly<Rational>> {
        let arity = sheets.len();
        if arity < 2 {
            return Err(Error::InvalidInput("correlators need N >= 2".into()));
        }
        if order > self.order() {
            return Err(Error::Untrusted {
                exponent: -(order as i64),
                floor: -(self.order() as i64),
            });
        }
        if let Some(&a) = sheets.iter().find(|&&a| a >= self.n) {
            return Err(Error::InvalidInput(format!("sheet {} out of range 1..={}", a + 1, self.n)));
        }
        if arity == 2 {
            let mut num = self.cyclic_trace(sheets, &[0, 1], order);
            if sheets[0] == sheets[1] {
                num.add_term(vec![0, 0], -rat(1, 1));
            }
            let d = MultiPoly::difference(2, 0, 1);
            let quotient = multipoly_exact_divide(&num, &d.mul(&d), order as u32)?;
            return Ok(quotient.truncate_total_degree((order - 2) as u32));
        }
        let pairs = arity * (arity - 1) / 2;
        let trusted = (order + pairs - arity) as u32;
        let mut num = MultiPoly::zero(arity);
        for cycle in cyclic_orders(arity) {
            let (sign, others) = cycle_signs(&cycle);
            let mut term = self.cyclic_trace(sheets, &cycle, order);
            for (i, j) in others {
                term = term.mul_truncated(&MultiPoly::difference(arity, i, j), trusted);
            }
            num = if sign > 0 { num.sub(&term) } else { num.add(&term) };
        }
        let delta = (0..arity)
            .flat_map(|i| (i + 1..arity).map(move |j| (i, j)))
            .fold(MultiPoly::constant(arity, rat(1, 1)), |acc, (i, j)| {
                acc.mul(&MultiPoly::difference(arity, i, j))
            });
        let quotient = multipoly_exact_divide(&num, &delta, trusted)?;
        Ok(quotient.truncate_total_degree((order - arity) as u32))
    }

    /// `tr(P_{a_{c_1}}(u_{c_1}) ... P_{a_{c_N}}(u_{c_N}))` through total degree `order`.
    fn cyclic_trace(&self, sheets: &[usize], cycle: &[usize], order: usize) -> MultiPoly<Rational> {
        let arity = sheets.len();
        let mut out = MultiPoly::zero(arity);
        let mut exps = vec![0u32; arity];
        let slot = cycle[0];
        for e in 0..=order {
            let c = &self.scaled[sheets[slot]][e];
            if c.num.is_zero() {
                continue;
            }
            exps[slot] = e as u32;
            self.trace_rec(sheets, cycle, 1, order - e, &c.num, &c.den, &mut exps, &mut out);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn trace_rec(
        &self,
        sheets: &[usize],
        cycle: &[usize],
        pos: usize,
        budget: usize,
        prefix: &Matrix<BigInt>,
        den: &BigInt,
        exps: &mut Vec<u32>,
        out: &mut MultiPoly<Rational>,
    ) {
        let slot = cycle[pos];
        let last = pos + 1 == cycle.len();
        for e in 0..=budget {
            let c = &self.scaled[sheets[slot]][e];
            if c.num.is_zero() {
                continue;
            }
            exps[slot] = e as u32;
            if last {
                let tr = prefix.trace_of_product(&c.num);
                if !tr.is_zero() {
                    out.add_term(exps.clone(), Rational::new(tr, den * &c.den));
                }
            } else {
                let next = prefix.matmul(&c.num);
                if !next.is_zero() {
                    self.trace_rec(sheets, cycle, pos + 1, budget - e, &next, &(den * &c.den), exps, out);
                }
            }
        }
        exps[slot] = 0;
    }

    /// All `F^{sheets}_k` with `k_i <= kmax`, cross-checked against a
    /// recomputation with [`STABILITY_MARGIN`] more orders.
    pub fn table_for(&self, sheets: &[usize], kmax: usize) -> Result<CorrelatorTable> {
        let arity = sheets.len();
        let order = required_order(arity, kmax);
        let gen = self.generating_polynomial(sheets, order)?;
        let check = self.generating_polynomial(sheets, order + STABILITY_MARGIN)?;
        let mut entries = BTreeMap::new();
        for orders in tuples(arity, kmax + 1) {
            let exp: Vec<u32> = orders.iter().map(|&k| k as u32).collect();
            let v = gen.coeff(&exp);
            if v != check.coeff(&exp) {
                return Err(Error::Inconsistent(format!(
                    "correlator {:?}/{:?} changed when the truncation was raised",
                    sheets, orders
                )));
            }
            entries.insert(CorrelatorIndex::new(sheets.to_vec(), orders), v);
        }
        Ok(CorrelatorTable {
            arity,
            trusted_order: kmax,
            entries,
        })
    }

    /// The full table over all `n^N` sheet tuples, in parallel.
    pub fn full_table(&self, arity: usize, kmax: usize) -> Result<CorrelatorTable> {
        let parts = tuples(arity, self.n)
            .into_par_iter()
            .map(|sheets| self.table_for(&sheets, kmax))
            .collect::<Result<Vec<_>>>()?;
        let mut table = CorrelatorTable {
            arity,
            trusted_order: kmax,
            entries: BTreeMap::new(),
        };
        for p in parts {
            table.merge(p);
        }
        Ok(table)
    }
}

/// Cyclic orders of `0..n` with `0` first: `(n-1)!` of them.
fn cyclic_orders(n: usize) -> Vec<Vec<usize>> {
    fn perms(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            perms(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    perms(&mut (1..n).collect(), &mut vec![0], &mut out);
    out
}

/// Sign relating `prod_edges (u_next - u_cur)` to the matching factors of
/// `Delta`, and the pairs of `Delta` not covered by the cycle.
fn cycle_signs(cycle: &[usize]) -> (i32, Vec<(usize, usize)>) {
    let n = cycle.len();
    let mut sign = 1;
    let mut used = vec![vec![false; n]; n];
    for l in 0..n {
        let (cur, next) = (cycle[l], cycle[(l + 1) % n]);
        // u_next - u_cur equals +(u_i - u_j), i < j, exactly when next < cur
        if next > cur {
            sign = -sign;
        }
        used[cur.min(next)][cur.max(next)] = true;
    }
    let others = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !used[i][j])
        .collect();
    (sign, others)
}

/// All tuples in `0..base` of the given length, lexicographic.
pub fn tuples(len: usize, base: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn correlator_pair(w: &MatrixPolynomial<Rational>, a1: usize, a2: usize, kmax: usize) -> Result<CorrelatorTable> {
    CorrelatorEngine::new(w, 2, kmax)?.table_for(&[a1, a2], kmax)
}

pub fn correlator_n(w: &MatrixPolynomial<Rational>, sheets: &[usize], kmax: usize) -> Result<CorrelatorTable> {
    CorrelatorEngine::new(w, sheets.len(), kmax)?.table_for(sheets, kmax)
}

/// Truncated free energy `sum_N 1/N! sum F t...t` as a polynomial in the
/// labels `t^a_k`. Keys are sorted multisets of `(a, k)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FreeEnergy {
    pub terms: BTreeMap<Vec<(usize, usize)>, Rational>,
}

impl FreeEnergy {
    pub fn coeff(&self, labels: &[(usize, usize)]) -> Rational {
        let mut key = labels.to_vec();
        key.sort();
        self.terms.get(&key).cloned().unwrap_or_else(|| rat(0, 1))
    }
}

impl Serialize for FreeEnergy {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (labels, v) in &self.terms {
            let t: Vec<[usize; 2]> = labels.iter().map(|&(a, k)| [a + 1, k]).collect();
            seq.serialize_element(&serde_json::json!({"t": t, "coefficient": format_rational(v)}))?;
        }
        seq.end()
    }
}

pub fn free_energy(w: &MatrixPolynomial<Rational>, max_arity: usize, kmax: usize) -> Result<FreeEnergy> {
    if max_arity < 2 {
        return Err(Error::InvalidInput("free energy needs maxN >= 2".into()));
    }
    let engine = CorrelatorEngine::new(w, max_arity, kmax)?;
    let mut fe = FreeEnergy::default();
    for arity in 2..=max_arity {
        let table = engine.full_table(arity, kmax)?;
        for (idx, v) in &table.entries {
            if num_traits::Zero::is_zero(v) {
                continue;
            }
            let mut key: Vec<(usize, usize)> = idx.sheets.iter().copied().zip(idx.orders.iter().copied()).collect();
            key.sort();
            // ordered tuples of one multiset number N! / prod mult!, so the
            // multiset coefficient is F / prod mult!
            let mut weight = 1i64;
            let mut run = 1i64;
            for i in 1..key.len() {
                if key[i] == key[i - 1] {
                    run += 1;
                    weight *= run;
                } else {
                    run = 1;
                }
            }
            fe.terms
                .entry(key)
                .or_insert_with(|| v.clone() / rat(weight, 1));
        }
    }
    Ok(fe)
}

/// `+1` for the sheet with leading eigenvalue `+1`, `-1` for the other one.
pub fn hyperelliptic_sign(w: &MatrixPolynomial<Rational>, sheet: usize) -> i64 {
    if w.leading_eigenvalues()[sheet] > rat(0, 1) {
        1
    } else {
        -1
    }
}

/// The `t_k = t^+_k - t^-_k` combination `sum_a prod_i eps(a_i) F^{a}_{k}`
/// for a two-sheet table.
pub fn hyperelliptic_combination(
    w: &MatrixPolynomial<Rational>,
    table: &CorrelatorTable,
    orders: &[usize],
) -> Result<Rational> {
    if w.n() != 2 {
        return Err(Error::InvalidInput("hyperelliptic combination needs n = 2".into()));
    }
    let mut acc = rat(0, 1);
    for sheets in tuples(orders.len(), 2) {
        let v = table.get(&sheets, orders).ok_or_else(|| {
            Error::InvalidInput(format!("table lacks sheets {sheets:?} at orders {orders:?}"))
        })?;
        let sign: i64 = sheets.iter().map(|&a| hyperelliptic_sign(w, a)).product();
        acc += v.clone() * rat(sign, 1);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat(v, 1)).collect()).collect())
    }

    #[test]
    fn cycle_sign_bookkeeping() {
        assert_eq!(cyclic_orders(3), vec![vec![0, 1, 2], vec![0, 2, 1]]);
        assert_eq!(cyclic_orders(4).len(), 6);
        // two ascending edges in 0 -> 1 -> 2 -> 0
        let (s, others) = cycle_signs(&[0, 1, 2]);
        assert_eq!(s, 1);
        assert!(others.is_empty());
        let (s, _) = cycle_signs(&[0, 2, 1]);
        assert_eq!(s, -1);
        let (_, others) = cycle_signs(&[0, 1, 2, 3]);
        assert_eq!(others, vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn cycle_sign_against_direct_product() {
        for cycle in cyclic_orders(4) {
            let n = cycle.len();
            let mut edges = MultiPoly::constant(n, rat(1, 1));
            for l in 0..n {
                edges = edges.mul(&MultiPoly::difference(n, cycle[(l + 1) % n], cycle[l]));
            }
            let (sign, others) = cycle_signs(&cycle);
            let mut covered = MultiPoly::constant(n, rat(sign as i64, 1));
            for l in 0..n {
                let (i, j) = (cycle[l].min(cycle[(l + 1) % n]), cycle[l].max(cycle[(l + 1) % n]));
                covered = covered.mul(&MultiPoly::difference(n, i, j));
            }
            assert_eq!(edges, covered);
            assert_eq!(others.len(), n * (n - 1) / 2 - n);
        }
    }

    #[test]
    fn diagonal_w_has_no_correlators() {
        let w = MatrixPolynomial::from_descending(vec![
            mat(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, -3]]),
            mat(&[&[4, 0, 0], &[0, 1, 0], &[0, 0, 0]]),
        ])
        .unwrap();
        let engine = CorrelatorEngine::new(&w, 3, 2).unwrap();
        for arity in [2, 3] {
            let t = engine.full_table(arity, 2).unwrap();
            assert!(t.entries.values().all(num_traits::Zero::is_zero));
        }
    }

    #[test]
    fn three_by_three_pair_golden() {
        // B0 = diag(0, 1, 3), b1_12 = 2, b1_21 = 5: F^{12}_{00} = 10
        let w = MatrixPolynomial::from_descending(vec![
            mat(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, 3]]),
            mat(&[&[0, 2, 0], &[5, 0, 0], &[0, 0, 0]]),
        ])
        .unwrap();
        let t = correlator_pair(&w, 0, 1, 1).unwrap();
        assert_eq!(t.get(&[0, 1], &[0, 0]), Some(&rat(10, 1)));
    }

    #[test]
    fn hyperelliptic_g1_golden() {
        // a = z^2, b = z + 1, c = 2z
        let w = MatrixPolynomial::from_descending(vec![
            mat(&[&[1, 0], &[0, -1]]),
            mat(&[&[0, 1], &[2, 0]]),
            mat(&[&[0, 1], &[0, 0]]),
        ])
        .unwrap();
        let engine = CorrelatorEngine::new(&w, 3, 0).unwrap();
        let t2 = engine.full_table(2, 0).unwrap();
        assert_eq!(hyperelliptic_combination(&w, &t2, &[0, 0]).unwrap(), rat(-2, 1));
        let t3 = engine.full_table(3, 0).unwrap();
        assert_eq!(hyperelliptic_combination(&w, &t3, &[0, 0, 0]).unwrap(), rat(-4, 1));
    }

    #[test]
    fn free_energy_weights() {
        let w = MatrixPolynomial::from_descending(vec![
            mat(&[&[1, 0], &[0, -1]]),
            mat(&[&[0, 1], &[2, 0]]),
            mat(&[&[0, 1], &[0, 0]]),
        ])
        .unwrap();
        let fe = free_energy(&w, 3, 1).unwrap();
        let t2 = correlator_pair(&w, 0, 1, 1).unwrap();
        assert_eq!(fe.coeff(&[(0, 0), (1, 1)]), t2.get(&[0, 1], &[0, 1]).unwrap().clone());
        let t00 = correlator_pair(&w, 0, 0, 1).unwrap();
        assert_eq!(fe.coeff(&[(0, 0), (0, 0)]), t00.get(&[0, 0], &[0, 0]).unwrap().clone() / rat(2, 1));
    }

    #[test]
    fn table_json_shape() {
        let w = MatrixPolynomial::from_descending(vec![
            mat(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, 3]]),
            mat(&[&[0, 2, 0], &[5, 0, 0], &[0, 0, 0]]),
        ])
        .unwrap();
        let t = correlator_pair(&w, 0, 1, 0).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"N":2,"entries":[{"a":[1,2],"k":[0,0],"value":"10"}],"trusted_order":0}"#);
    }
}
