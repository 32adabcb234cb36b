//! Truncated Laurent series in `1/z`.
//!
//! A [`TailSeries`] stores the coefficients of `z^L, z^(L-1), ..., z^(L-K)`
//! where `L` is the leading exponent and `K` the truncation order. Every
//! exponent above `L` is known to vanish; every exponent below `L - K` (the
//! *floor*) is unknown. Reading an unknown coefficient is an error, never a
//! silent zero, and every operation propagates the floor pessimistically.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::scalar::Field;

#[derive(Clone, Debug, PartialEq)]
pub struct TailSeries<S> {
    leading: i64,
    coeffs: Vec<S>,
}

impl<S: Field> TailSeries<S> {
    /// `coeffs[i]` is the coefficient of `z^(leading - i)`.
    pub fn new(leading: i64, coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a tail series needs at least one coefficient");
        TailSeries { leading, coeffs }
    }

    /// A series known to vanish at every exponent `>= floor`.
    pub fn zero_with_floor(floor: i64) -> Self {
        TailSeries {
            leading: floor,
            coeffs: vec![S::zero()],
        }
    }

    /// Exact monomial `c z^exp`, trusted down to `z^(exp - order)`.
    pub fn monomial(c: S, exp: i64, order: usize) -> Self {
        let mut coeffs = vec![S::zero(); order + 1];
        coeffs[0] = c;
        TailSeries {
            leading: exp,
            coeffs,
        }
    }

    /// An exact polynomial in `z`, trusted down to `z^(deg - order)`.
    pub fn from_poly(p: &Poly<S>, order: usize) -> Self {
        let Some(deg) = p.degree() else {
            return Self::zero_with_floor(-(order as i64));
        };
        let coeffs = (0..=order)
            .map(|i| if i <= deg { p.coeff(deg - i) } else { S::zero() })
            .collect();
        TailSeries {
            leading: deg as i64,
            coeffs,
        }
    }

    pub fn leading_exponent(&self) -> i64 {
        self.leading
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Lowest exponent whose coefficient is trusted.
    pub fn floor(&self) -> i64 {
        self.leading - self.order() as i64
    }

    pub fn leading_coeff(&self) -> &S {
        &self.coeffs[0]
    }

    /// Raw coefficients in descending exponent order.
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, exp: i64) -> Result<S> {
        if exp > self.leading {
            Ok(S::zero())
        } else if exp < self.floor() {
            Err(Error::Untrusted {
                exponent: exp,
                floor: self.floor(),
            })
        } else {
            Ok(self.coeffs[(self.leading - exp) as usize].clone())
        }
    }

    fn coeff_unchecked(&self, exp: i64) -> S {
        if exp > self.leading {
            S::zero()
        } else {
            self.coeffs[(self.leading - exp) as usize].clone()
        }
    }

    /// True if every trusted coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Strips vanishing leading coefficients; the floor is unchanged.
    pub fn normalize(&self) -> Self {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(0) => self.clone(),
            Some(k) => TailSeries {
                leading: self.leading - k as i64,
                coeffs: self.coeffs[k..].to_vec(),
            },
            None => Self::zero_with_floor(self.floor()),
        }
    }

    /// Drops trusted terms so that the order is at most `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let keep = order.min(self.order()) + 1;
        TailSeries {
            leading: self.leading,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    /// Keeps only exponents `>= floor`.
    pub fn truncate_to_floor(&self, floor: i64) -> Result<Self> {
        if floor < self.floor() {
            return Err(Error::Untrusted {
                exponent: floor,
                floor: self.floor(),
            });
        }
        if floor > self.leading {
            return Ok(Self::zero_with_floor(floor));
        }
        Ok(self.truncate((self.leading - floor) as usize))
    }

    /// Treats the unknown tail as zero up to the new order.
    ///
    /// This is not semantics-preserving; it is the seed step of Newton
    /// iteration, whose result is validated afterwards.
    pub fn extend_with_zeros(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < order + 1 {
            coeffs.resize(order + 1, S::zero());
        }
        TailSeries {
            leading: self.leading,
            coeffs,
        }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        TailSeries {
            leading: self.leading + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        TailSeries {
            leading: self.leading,
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let leading = self.leading.max(rhs.leading);
        let floor = self.floor().max(rhs.floor());
        let coeffs = (floor..=leading)
            .rev()
            .map(|e| self.coeff_unchecked(e) + rhs.coeff_unchecked(e))
            .collect();
        TailSeries { leading, coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order)
            .map(|i| {
                (0..=i).fold(S::zero(), |acc, j| {
                    acc + self.coeffs[j].clone() * rhs.coeffs[i - j].clone()
                })
            })
            .collect();
        TailSeries {
            leading: self.leading + rhs.leading,
            coeffs,
        }
    }

    /// Product with an exact polynomial in `z`.
    pub fn mul_poly(&self, p: &Poly<S>) -> Self {
        match p.degree() {
            None => Self::zero_with_floor(self.floor()),
            Some(d) => self.mul(&Self::from_poly(p, d + self.order())),
        }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::monomial(S::one(), 0, self.order());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn invert(&self) -> Result<Self> {
        series_invert(self)
    }

    pub fn inv_sqrt(&self) -> Result<Self> {
        series_inv_sqrt(self)
    }

    /// Exact Laurent polynomial represented by the trusted coefficients,
    /// evaluated as a lossy complex number. Only meaningful for large `|z|`.
    pub fn eval_trusted(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_c64() * z.powi((self.leading - i as i64) as i32))
            .sum()
    }
}

/// Multiplicative inverse of a series with nonzero leading coefficient.
pub fn series_invert<S: Field>(s: &TailSeries<S>) -> Result<TailSeries<S>> {
    let c0 = s.coeffs[0].clone();
    if c0.is_zero() {
        return Err(Error::NotInvertible(format!(
            "leading coefficient of z^{} vanishes",
            s.leading
        )));
    }
    let inv0 = S::one() / c0;
    let mut out: Vec<S> = Vec::with_capacity(s.coeffs.len());
    out.push(inv0.clone());
    for k in 1..s.coeffs.len() {
        let acc = (1..=k).fold(S::zero(), |acc, j| {
            acc + s.coeffs[j].clone() * out[k - j].clone()
        });
        out.push(-(acc * inv0.clone()));
    }
    Ok(TailSeries {
        leading: -s.leading,
        coeffs: out,
    })
}

/// `s^(-1/2)` for `s = 1 + c_1/z + c_2/z^2 + ...`.
///
/// Uses the power recurrence `k f_k = sum_j ((alpha + 1) j - k) c_j f_(k-j)`
/// with `alpha = -1/2`, so all coefficients stay in the base field.
pub fn series_inv_sqrt<S: Field>(s: &TailSeries<S>) -> Result<TailSeries<S>> {
    if s.leading != 0 || s.coeffs[0] != S::one() {
        return Err(Error::InvalidInput(
            "inverse square root needs leading term exactly 1 at z^0".into(),
        ));
    }
    let half = S::from_ratio(1, 2);
    let mut out: Vec<S> = Vec::with_capacity(s.coeffs.len());
    out.push(S::one());
    for k in 1..s.coeffs.len() {
        let acc = (1..=k).fold(S::zero(), |acc, j| {
            let weight = half.clone() * S::from_i64(j as i64) - S::from_i64(k as i64);
            acc + weight * s.coeffs[j].clone() * out[k - j].clone()
        });
        out.push(acc / S::from_i64(k as i64));
    }
    Ok(TailSeries {
        leading: 0,
        coeffs: out,
    })
}

/// Matrix-valued truncated Laurent series with the same trust discipline as
/// [`TailSeries`].
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTailSeries<S> {
    n: usize,
    leading: i64,
    coeffs: Vec<Matrix<S>>,
}

impl<S: Field> MatrixTailSeries<S> {
    pub fn new(leading: i64, coeffs: Vec<Matrix<S>>) -> Self {
        assert!(!coeffs.is_empty(), "a tail series needs at least one coefficient");
        let n = coeffs[0].rows();
        assert!(coeffs.iter().all(|m| m.rows() == n && m.cols() == n));
        MatrixTailSeries { n, leading, coeffs }
    }

    /// Exact constant matrix trusted through `z^(-order)`.
    pub fn constant(m: Matrix<S>, order: usize) -> Self {
        let n = m.rows();
        let mut coeffs = vec![Matrix::zeros(n, n); order + 1];
        coeffs[0] = m;
        MatrixTailSeries {
            n,
            leading: 0,
            coeffs,
        }
    }

    /// Matrix polynomial (entries in `z`) times a scalar series.
    pub fn from_poly_matrix_times(p: &Matrix<Poly<S>>, s: &TailSeries<S>) -> Self {
        let n = p.rows();
        let entries: Vec<TailSeries<S>> = p.entries().map(|e| s.mul_poly(e)).collect();
        let leading = entries.iter().map(|e| e.leading).max().unwrap_or(s.leading);
        let floor = entries.iter().map(|e| e.floor()).max().unwrap_or(s.floor());
        let coeffs = (floor..=leading)
            .rev()
            .map(|exp| Matrix::from_fn(n, n, |i, j| entries[i * n + j].coeff_unchecked(exp)))
            .collect();
        MatrixTailSeries { n, leading, coeffs }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn leading_exponent(&self) -> i64 {
        self.leading
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn floor(&self) -> i64 {
        self.leading - self.order() as i64
    }

    pub fn coeffs(&self) -> &[Matrix<S>] {
        &self.coeffs
    }

    pub fn coeff(&self, exp: i64) -> Result<Matrix<S>> {
        if exp > self.leading {
            Ok(Matrix::zeros(self.n, self.n))
        } else if exp < self.floor() {
            Err(Error::Untrusted {
                exponent: exp,
                floor: self.floor(),
            })
        } else {
            Ok(self.coeffs[(self.leading - exp) as usize].clone())
        }
    }

    fn coeff_unchecked(&self, exp: i64) -> Matrix<S> {
        if exp > self.leading {
            Matrix::zeros(self.n, self.n)
        } else {
            self.coeffs[(self.leading - exp) as usize].clone()
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> TailSeries<S> {
        TailSeries {
            leading: self.leading,
            coeffs: self.coeffs.iter().map(|m| m[(i, j)].clone()).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let keep = order.min(self.order()) + 1;
        MatrixTailSeries {
            n: self.n,
            leading: self.leading,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    /// Keeps only exponents `>= floor`, failing if they are not all trusted.
    pub fn truncate_to_floor(&self, floor: i64) -> Result<Self> {
        if floor < self.floor() {
            return Err(Error::Untrusted {
                exponent: floor,
                floor: self.floor(),
            });
        }
        if floor > self.leading {
            return Ok(MatrixTailSeries {
                n: self.n,
                leading: floor,
                coeffs: vec![Matrix::zeros(self.n, self.n)],
            });
        }
        Ok(self.truncate((self.leading - floor) as usize))
    }

    /// Rewrites the series with leading exponent `leading`, padding with
    /// known-zero terms when `leading` is above the current one.
    pub fn with_leading(&self, leading: i64) -> Result<Self> {
        if leading < self.leading {
            let dropped = &self.coeffs[..((self.leading - leading) as usize).min(self.coeffs.len())];
            if dropped.iter().any(|m| !m.is_zero()) {
                return Err(Error::Inconsistent(format!(
                    "matrix series has nonzero terms above z^{leading}"
                )));
            }
        }
        let floor = self.floor();
        if floor > leading {
            return Err(Error::Untrusted {
                exponent: leading,
                floor,
            });
        }
        Ok(MatrixTailSeries {
            n: self.n,
            leading,
            coeffs: (floor..=leading).rev().map(|e| self.coeff_unchecked(e)).collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let leading = self.leading.max(rhs.leading);
        let floor = self.floor().max(rhs.floor());
        let coeffs = (floor..=leading)
            .rev()
            .map(|e| self.coeff_unchecked(e) + rhs.coeff_unchecked(e))
            .collect();
        MatrixTailSeries {
            n: self.n,
            leading,
            coeffs,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> Self {
        MatrixTailSeries {
            n: self.n,
            leading: self.leading,
            coeffs: self.coeffs.iter().map(|m| m.scale(c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order)
            .map(|i| {
                (0..=i).fold(Matrix::zeros(self.n, self.n), |acc, j| {
                    acc + self.coeffs[j].matmul(&rhs.coeffs[i - j])
                })
            })
            .collect();
        MatrixTailSeries {
            n: self.n,
            leading: self.leading + rhs.leading,
            coeffs,
        }
    }

    pub fn mul_scalar_series(&self, s: &TailSeries<S>) -> Self {
        let order = self.order().min(s.order());
        let coeffs = (0..=order)
            .map(|i| {
                (0..=i).fold(Matrix::zeros(self.n, self.n), |acc, j| {
                    acc + self.coeffs[j].scale(&s.coeffs[i - j])
                })
            })
            .collect();
        MatrixTailSeries {
            n: self.n,
            leading: self.leading + s.leading,
            coeffs,
        }
    }

    pub fn trace(&self) -> TailSeries<S> {
        TailSeries {
            leading: self.leading,
            coeffs: self.coeffs.iter().map(Matrix::trace).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    fn qs(leading: i64, c: &[i64]) -> TailSeries<Rational> {
        TailSeries::new(leading, c.iter().map(|&v| rat(v, 1)).collect())
    }

    #[test]
    fn geometric_inverse() {
        let inv = series_invert(&qs(0, &[1, 1, 0, 0])).unwrap();
        assert_eq!(inv, qs(0, &[1, -1, 1, -1]));
    }

    #[test]
    fn monomial_inverse() {
        let inv = series_invert(&qs(2, &[1, 0, 0])).unwrap();
        assert_eq!(inv, qs(-2, &[1, 0, 0]));
        assert_eq!(inv.leading_exponent(), -2);
    }

    #[test]
    fn inverse_of_square() {
        // (1 + 1/z)^2 -> 1 - 2/z + 3/z^2
        let inv = series_invert(&qs(0, &[1, 2, 1])).unwrap();
        assert_eq!(inv, qs(0, &[1, -2, 3]));
    }

    #[test]
    fn zero_lead_is_not_invertible() {
        let err = series_invert(&qs(0, &[0, 1])).unwrap_err();
        assert!(matches!(err, Error::NotInvertible(_)));
    }

    #[test]
    fn inv_sqrt_examples() {
        assert_eq!(series_inv_sqrt(&qs(0, &[1, 0, 0])).unwrap(), qs(0, &[1, 0, 0]));
        let r = series_inv_sqrt(&qs(0, &[1, 0, 0, 0, 1])).unwrap();
        assert_eq!(
            r.coeffs(),
            &[rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1), rat(-1, 2)]
        );
        assert!(series_inv_sqrt(&qs(0, &[2, 1])).is_err());
        assert!(series_inv_sqrt(&qs(1, &[1, 1])).is_err());
    }

    #[test]
    fn inv_sqrt_binomial_oracle() {
        // (1 + q/z)^(-1/2): binomial coefficients C(-1/2, k) q^k
        let q = rat(3, 5);
        let s = TailSeries::new(0, vec![rat(1, 1), q.clone(), rat(0, 1), rat(0, 1), rat(0, 1)]);
        let r = series_inv_sqrt(&s).unwrap();
        let mut binom = rat(1, 1);
        for k in 0..5i64 {
            let expected = binom.clone() * num_traits::pow(q.clone(), k as usize);
            assert_eq!(r.coeff(-k).unwrap(), expected);
            binom = binom * (rat(-1, 2) - rat(k, 1)) / rat(k + 1, 1);
        }
    }

    #[test]
    fn untrusted_reads_fail() {
        let s = qs(1, &[1, 2]);
        assert_eq!(s.coeff(3).unwrap(), rat(0, 1));
        assert_eq!(s.coeff(0).unwrap(), rat(2, 1));
        assert!(matches!(s.coeff(-1), Err(Error::Untrusted { .. })));
    }

    #[test]
    fn truncation_propagates() {
        let a = qs(0, &[1, 1, 1, 1, 1]);
        let b = qs(3, &[1, 0]);
        let p = a.mul(&b);
        assert_eq!(p.floor(), 2);
        let s = a.add(&b);
        assert_eq!(s.leading_exponent(), 3);
        assert_eq!(s.floor(), 2);
        let d = a.sub(&a).normalize();
        assert!(d.is_zero());
        assert_eq!(d.floor(), -4);
    }

    #[test]
    fn matrix_series_trace_and_product() {
        let e = Matrix::unit_diagonal(2, 0);
        let m = MatrixTailSeries::<Rational>::constant(e.clone(), 3);
        let sq = m.mul(&m);
        assert_eq!(sq, m);
        assert_eq!(m.trace().coeff(0).unwrap(), rat(1, 1));
        assert!(matches!(m.coeff(-4), Err(Error::Untrusted { .. })));
    }

    fn small_series() -> impl proptest::strategy::Strategy<Value = TailSeries<Rational>> {
        use proptest::prelude::*;
        (
            -3i64..4,
            1i64..6,
            proptest::collection::vec((-9i64..10, 1i64..5), 1..7),
        )
            .prop_map(|(lead, c0, rest)| {
                let mut coeffs = vec![rat(c0, 1)];
                coeffs.extend(rest.into_iter().map(|(p, q)| rat(p, q)));
                TailSeries::new(lead, coeffs)
            })
    }

    proptest::proptest! {
        #[test]
        fn invert_is_involutive(s in small_series()) {
            let inv = series_invert(&s).unwrap();
            proptest::prop_assert_eq!(series_invert(&inv).unwrap(), s.clone());
            let one = s.mul(&inv);
            proptest::prop_assert_eq!(one.leading_exponent(), 0);
            proptest::prop_assert_eq!(one.coeff(0).unwrap(), rat(1, 1));
            for k in 1..=one.order() as i64 {
                proptest::prop_assert!(one.coeff(-k).unwrap().is_zero());
            }
        }

        #[test]
        fn inv_sqrt_squares_back(s in small_series()) {
            let unit = TailSeries::new(0, {
                let mut c = s.coeffs().to_vec();
                c[0] = rat(1, 1);
                c
            });
            let r = series_inv_sqrt(&unit).unwrap();
            let check = r.mul(&r).mul(&unit);
            proptest::prop_assert_eq!(check.coeff(0).unwrap(), rat(1, 1));
            for k in 1..=check.order() as i64 {
                proptest::prop_assert!(check.coeff(-k).unwrap().is_zero());
            }
            // reduced form is automatic; denominators stay positive
            for c in r.coeffs() {
                proptest::prop_assert!(num_traits::Signed::is_positive(c.denom()));
                proptest::prop_assert_eq!(num_integer::Integer::gcd(c.numer(), c.denom()), num_bigint::BigInt::from(1));
            }
        }
    }
}
