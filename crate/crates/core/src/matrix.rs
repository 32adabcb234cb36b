//! Small dense matrices over an arbitrary commutative ring.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_traits::Zero;

use crate::scalar::Ring;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Ring> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![R::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = R::one();
        }
        m
    }

    /// `E_a`: the single nonzero entry 1 sits at `(a, a)`.
    pub fn unit_diagonal(n: usize, a: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(a, a)] = R::one();
        m
    }

    pub fn diagonal(entries: &[R]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &R> {
        self.data.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn map<T: Ring>(&self, f: impl Fn(&R) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &R) -> Self {
        self.map(|a| a.clone() * c.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn trace(&self) -> R {
        (0..self.rows.min(self.cols)).fold(R::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * rhs[(k, j)].clone();
                }
            }
        }
        out
    }

    /// `tr(self * rhs)` without forming the product.
    pub fn trace_of_product(&self, rhs: &Self) -> R {
        let mut acc = R::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * rhs[(k, i)].clone();
            }
        }
        acc
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.matmul(rhs) - rhs.matmul(self)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::identity(self.rows);
        for _ in 0..e {
            out = out.matmul(self);
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Determinant by cofactor expansion memoized over column subsets.
    ///
    /// Uses only ring operations, so it is exact over any ring (polynomials
    /// included) at a cost of `O(n 2^n)` multiplications.
    pub fn det(&self) -> R {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return R::one();
        }
        assert!(n <= 20, "determinant expansion limited to n <= 20");
        // minors[mask] = det of rows popcount(mask).. with columns outside mask
        let full = (1usize << n) - 1;
        let mut minors: Vec<Option<R>> = vec![None; 1 << n];
        minors[full] = Some(R::one());
        for mask in (0..full).rev() {
            let row = mask.count_ones() as usize;
            let mut acc = R::zero();
            let mut pos = 0usize;
            for c in 0..n {
                if mask & (1 << c) != 0 {
                    continue;
                }
                let a = &self[(row, c)];
                if !a.is_zero() {
                    if let Some(minor) = &minors[mask | (1 << c)] {
                        let term = a.clone() * minor.clone();
                        acc = if pos.is_multiple_of(2) { acc + term } else { acc - term };
                    }
                }
                pos += 1;
            }
            minors[mask] = Some(acc);
        }
        minors[0].take().expect("determinant root entry")
    }
}

impl<R: Ring> Index<(usize, usize)> for Matrix<R> {
    type Output = R;

    fn index(&self, (i, j): (usize, usize)) -> &R {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<R: Ring> IndexMut<(usize, usize)> for Matrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut R {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<R: Ring> Add for Matrix<R> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .into_iter()
                .zip(rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<R: Ring> Sub for Matrix<R> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<R: Ring> Neg for Matrix<R> {
    type Output = Self;

    fn neg(self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.into_iter().map(|a| -a).collect(),
        }
    }
}

impl<R: Ring> Mul for &Matrix<R> {
    type Output = Matrix<R>;

    fn mul(self, rhs: Self) -> Matrix<R> {
        self.matmul(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::poly::Poly;
    use crate::scalar::{rat, Rational};

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat(v, 1)).collect())
                .collect(),
        )
    }

    // Leibniz formula, used as an independent oracle.
    fn leibniz(m: &Matrix<Rational>) -> Rational {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n = m.rows();
        perms(n)
            .into_iter()
            .map(|p| {
                let inversions = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                let prod = (0..n).fold(rat(1, 1), |acc, i| acc * m[(i, p[i])].clone());
                if inversions % 2 == 0 {
                    prod
                } else {
                    -prod
                }
            })
            .fold(rat(0, 1), |a, b| a + b)
    }

    #[test]
    fn det_matches_leibniz() {
        let m = q(&[&[2, -1, 0, 3], &[1, 4, 2, 0], &[0, 5, -3, 1], &[7, 0, 1, 1]]);
        assert_eq!(m.det(), leibniz(&m));
        assert_eq!(q(&[&[1, 2], &[3, 4]]).det(), rat(-2, 1));
        assert_eq!(Matrix::<Rational>::identity(5).det(), rat(1, 1));
    }

    #[test]
    fn det_over_polynomials() {
        // [[z, 1], [1, z]] -> z^2 - 1
        let z = Poly::<Rational>::z();
        let one = Poly::one();
        let m = Matrix::from_rows(vec![vec![z.clone(), one.clone()], vec![one, z]]);
        assert_eq!(m.det(), Poly::new(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]));
    }

    #[test]
    fn products_and_traces() {
        let a = q(&[&[1, 2], &[3, 4]]);
        let b = q(&[&[0, 1], &[1, 0]]);
        assert_eq!(a.matmul(&b), q(&[&[2, 1], &[4, 3]]));
        assert_eq!(a.trace_of_product(&b), a.matmul(&b).trace());
        assert_eq!(a.commutator(&a), Matrix::zeros(2, 2));
        assert_eq!(a.pow(2), a.matmul(&a));
    }

    proptest::proptest! {
        #[test]
        fn det_is_multiplicative(v in proptest::collection::vec(-5i64..5, 18)) {
            let a = Matrix::from_fn(3, 3, |i, j| rat(v[3 * i + j], 1));
            let b = Matrix::from_fn(3, 3, |i, j| rat(v[9 + 3 * i + j], 1));
            proptest::prop_assert_eq!(a.matmul(&b).det(), a.det() * b.det());
            proptest::prop_assert_eq!(a.det(), leibniz(&a));
        }
    }
}
