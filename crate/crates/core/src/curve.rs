//! Matrix polynomials and their spectral curves `det(w - W(z)) = 0`.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::scalar::Field;

/// `W(z) = B_0 z^m + B_1 z^(m-1) + ... + B_m` with `B_0` diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial<S> {
    n: usize,
    m: usize,
    /// `coeffs[i]` multiplies `z^(m - i)`.
    coeffs: Vec<Matrix<S>>,
}

impl<S: Field> MatrixPolynomial<S> {
    /// Builds `W` from its coefficient matrices, highest power first.
    ///
    /// Only shape and the diagonal leading coefficient are enforced here;
    /// distinctness of the leading eigenvalues is reported by [`validate`].
    pub fn from_descending(coeffs: Vec<Matrix<S>>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput("need m >= 1 (at least two coefficient matrices)".into()));
        }
        let n = coeffs[0].rows();
        if n < 2 {
            return Err(Error::InvalidInput("matrix size must be at least 2".into()));
        }
        for (i, c) in coeffs.iter().enumerate() {
            if c.rows() != n || c.cols() != n {
                return Err(Error::InvalidInput(format!(
                    "coefficient {i} has shape {}x{}, expected {n}x{n}",
                    c.rows(),
                    c.cols()
                )));
            }
        }
        if !coeffs[0].is_diagonal() {
            return Err(Error::InvalidInput("leading coefficient must be diagonal".into()));
        }
        Ok(MatrixPolynomial {
            n,
            m: coeffs.len() - 1,
            coeffs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Coefficient matrices, highest power of `z` first.
    pub fn coeffs(&self) -> &[Matrix<S>] {
        &self.coeffs
    }

    /// Coefficient of `z^power`.
    pub fn coeff_of_power(&self, power: usize) -> Matrix<S> {
        if power > self.m {
            Matrix::zeros(self.n, self.n)
        } else {
            self.coeffs[self.m - power].clone()
        }
    }

    /// Diagonal of the leading coefficient.
    pub fn leading_eigenvalues(&self) -> Vec<S> {
        (0..self.n).map(|a| self.coeffs[0][(a, a)].clone()).collect()
    }

    /// `W(z)` as a matrix with polynomial entries.
    pub fn to_poly_matrix(&self) -> Matrix<Poly<S>> {
        Matrix::from_fn(self.n, self.n, |i, j| {
            Poly::new((0..=self.m).map(|p| self.coeffs[self.m - p][(i, j)].clone()).collect())
        })
    }

    pub fn eval(&self, z: &S) -> Matrix<S> {
        self.coeffs
            .iter()
            .fold(Matrix::zeros(self.n, self.n), |acc, c| acc.scale(z) + c.clone())
    }

    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> MatrixPolynomial<T> {
        MatrixPolynomial {
            n: self.n,
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| c.map(&f)).collect(),
        }
    }

    /// `D^(-1) W D` for an invertible diagonal `D = diag(d)`.
    pub fn conjugate_by_diagonal(&self, d: &[S]) -> Self {
        assert_eq!(d.len(), self.n);
        MatrixPolynomial {
            n: self.n,
            m: self.m,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Matrix::from_fn(self.n, self.n, |i, j| c[(i, j)].clone() * d[j].clone() / d[i].clone()))
                .collect(),
        }
    }
}

impl<S: Field + fmt::Display> fmt::Display for MatrixPolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.to_poly_matrix();
        for i in 0..self.n {
            let row: Vec<String> = w.row(i).iter().map(|p| p.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

/// `R(z, w) = w^n + a_1(z) w^(n-1) + ... + a_n(z)` plus validity checks.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCurveData<S> {
    pub n: usize,
    pub m: usize,
    /// `a[0] = 1`, `a[i]` multiplies `w^(n-i)`.
    pub a: Vec<Poly<S>>,
    pub genus: i64,
    pub diagnostics: Vec<Diagnostic>,
}

impl<S: Field> SpectralCurveData<S> {
    /// `R(z, w)` evaluated at a point.
    pub fn eval(&self, z: &S, w: &S) -> S {
        self.a.iter().fold(S::zero(), |acc, ai| acc * w.clone() + ai.eval(z))
    }

    /// `dR/dw` evaluated at a point.
    pub fn eval_dw(&self, z: &S, w: &S) -> S {
        let n = self.n;
        self.a[..n].iter().enumerate().fold(S::zero(), |acc, (i, ai)| {
            acc * w.clone() + ai.eval(z) * S::from_i64((n - i) as i64)
        })
    }

    /// `R` as a polynomial in `w` with coefficients in `S[z]`, ascending in `w`.
    pub fn as_poly_in_w(&self) -> Poly<Poly<S>> {
        Poly::new(self.a.iter().rev().cloned().collect())
    }

    pub fn has_failure(&self) -> bool {
        self.diagnostics.iter().any(|d| d.status == CheckStatus::Fail)
    }
}

/// `(n - 1)(m n - 2) / 2`. The product is always even.
pub fn genus(m: usize, n: usize) -> i64 {
    assert!(n >= 2 && m >= 1, "genus needs n >= 2 and m >= 1");
    let twice = (n as i64 - 1) * (m as i64 * n as i64 - 2);
    assert_eq!(twice % 2, 0, "odd genus numerator for m={m}, n={n}");
    twice / 2
}

/// Faddeev-LeVerrier over `S[z]`.
///
/// Returns `(a, b)` with `a[k]` the coefficients of the characteristic
/// polynomial and `b[k] = sum_{j<=k} a_j W^(k-j)`, so `b[0] = 1` and
/// `W b[n-1] + a_n = 0`.
pub fn faddeev_leverrier<S: Field>(w: &Matrix<Poly<S>>) -> (Vec<Poly<S>>, Vec<Matrix<Poly<S>>>) {
    let n = w.rows();
    let mut a = vec![Poly::constant(S::one())];
    let mut b = vec![Matrix::identity(n)];
    for k in 1..=n {
        let wb = w.matmul(&b[k - 1]);
        let ak = wb.trace().scale(&(-S::one() / S::from_i64(k as i64)));
        if k < n {
            b.push(wb + Matrix::identity(n).scale(&ak));
        }
        a.push(ak);
    }
    (a, b)
}

pub fn characteristic_data<S: Field>(w: &MatrixPolynomial<S>) -> SpectralCurveData<S> {
    let (a, _) = faddeev_leverrier(&w.to_poly_matrix());
    let mut data = SpectralCurveData {
        n: w.n,
        m: w.m,
        a,
        genus: genus(w.m, w.n),
        diagnostics: Vec::new(),
    };
    data.diagnostics = validate_with(w, &data);
    data
}

/// Runs the validity checks on `W`.
pub fn validate<S: Field>(w: &MatrixPolynomial<S>) -> Vec<Diagnostic> {
    characteristic_data(w).diagnostics
}

fn validate_with<S: Field>(w: &MatrixPolynomial<S>, curve: &SpectralCurveData<S>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let b0 = w.leading_eigenvalues();
    let clash = (0..w.n)
        .flat_map(|i| (i + 1..w.n).map(move |j| (i, j)))
        .find(|&(i, j)| b0[i] == b0[j]);
    out.push(match clash {
        None => Diagnostic {
            name: "distinct_leading_eigenvalues",
            status: CheckStatus::Pass,
            detail: "leading diagonal entries pairwise distinct".into(),
        },
        Some((i, j)) => Diagnostic {
            name: "distinct_leading_eigenvalues",
            status: CheckStatus::Fail,
            detail: format!("entries {} and {} of the leading diagonal coincide", i + 1, j + 1),
        },
    });

    let bad_degree = (1..=w.n).find(|&i| curve.a[i].degree().is_some_and(|d| d > w.m * i));
    out.push(Diagnostic {
        name: "degree_bounds",
        status: if bad_degree.is_none() { CheckStatus::Pass } else { CheckStatus::Fail },
        detail: match bad_degree {
            None => "deg a_i <= m i for all i".into(),
            Some(i) => format!("deg a_{i} exceeds {}", w.m * i),
        },
    });

    let disc = discriminant(curve);
    let squarefree = S::poly_is_squarefree(&disc);
    out.push(Diagnostic {
        name: "squarefree_discriminant",
        status: if squarefree { CheckStatus::Pass } else { CheckStatus::Warn },
        detail: if squarefree {
            "discriminant in w is squarefree; affine part is smooth".into()
        } else if disc.is_zero() {
            "discriminant vanishes identically; curve has a repeated component".into()
        } else {
            "discriminant in w is not squarefree; smoothness inconclusive".into()
        },
    });

    if curve.genus <= 0 {
        out.push(Diagnostic {
            name: "positive_genus",
            status: CheckStatus::Warn,
            detail: format!("genus {} is not positive", curve.genus),
        });
    }
    out
}

/// Discriminant of `R(z, w)` with respect to `w`, a polynomial in `z`.
///
/// For monic `R` of degree `n` this is `(-1)^(n(n-1)/2) Res_w(R, R_w)`; the
/// resultant is the determinant of the Sylvester matrix over `S[z]`.
pub fn discriminant<S: Field>(curve: &SpectralCurveData<S>) -> Poly<S> {
    let r = curve.as_poly_in_w();
    let rw = Poly::new(
        r.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(&S::from_i64(k as i64)))
            .collect(),
    );
    let res = resultant(&r, &rw);
    let n = curve.n;
    if (n * (n - 1) / 2) % 2 == 1 {
        -res
    } else {
        res
    }
}

/// Sylvester resultant of two polynomials with coefficients in a ring.
pub fn resultant<R: crate::scalar::Ring>(p: &Poly<R>, q: &Poly<R>) -> R {
    let (Some(dp), Some(dq)) = (p.degree(), q.degree()) else {
        return R::zero();
    };
    let size = dp + dq;
    if size == 0 {
        return R::one();
    }
    let mut s = Matrix::zeros(size, size);
    for row in 0..dq {
        for (k, c) in p.coeffs().iter().rev().enumerate() {
            s[(row, row + k)] = c.clone();
        }
    }
    for row in 0..dp {
        for (k, c) in q.coeffs().iter().rev().enumerate() {
            s[(dq + row, row + k)] = c.clone();
        }
    }
    s.det()
}
