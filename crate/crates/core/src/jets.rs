//! Jets of the n-wave fields `y_ij` and the closed-form low-order resolvent
//! and second-log-derivative formulas evaluated on them.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::correlators::CorrelatorEngine;
use crate::curve::MatrixPolynomial;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{format_rational, rat, Rational};

/// Values and `x`-derivatives of `y_ij` at a point. Diagonal entries are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    pub n: usize,
    pub y: Matrix<Rational>,
    /// `d1[b]` holds `d y_ij / d x^b`.
    pub d1: Vec<Matrix<Rational>>,
    /// `d2[b][c]` holds `d^2 y_ij / d x^b d x^c`, when known.
    pub d2: Option<Vec<Vec<Matrix<Rational>>>>,
}

impl JetPoint {
    pub fn zero(n: usize, with_second_order: bool) -> Self {
        let z = Matrix::zeros(n, n);
        JetPoint {
            n,
            y: z.clone(),
            d1: vec![z.clone(); n],
            d2: with_second_order.then(|| vec![vec![z; n]; n]),
        }
    }
}

fn rational_matrix_json(m: &Matrix<Rational>) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(format_rational).collect()).collect()
}

impl Serialize for JetPoint {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let mut st = s.serialize_struct("JetPoint", 4)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("y", &rational_matrix_json(&self.y))?;
        let d1: Vec<_> = self.d1.iter().map(rational_matrix_json).collect();
        st.serialize_field("dy", &d1)?;
        let d2: Option<Vec<Vec<_>>> = self
            .d2
            .as_ref()
            .map(|d| d.iter().map(|row| row.iter().map(rational_matrix_json).collect()).collect());
        st.serialize_field("d2y", &d2)?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residue {
    pub constraint: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JetReport {
    pub checked: usize,
    pub nonzero: Vec<Residue>,
}

impl JetReport {
    pub fn passed(&self) -> bool {
        self.nonzero.is_empty()
    }
}

/// Exact residues of the constraints `sum_k d_k y_ij = 0`,
/// `d_k y_ij = y_ik y_kj` (pairwise distinct `i, j, k`), their first
/// derivatives, and the symmetry of second derivatives.
pub fn validate_jet(jet: &JetPoint) -> JetReport {
    let n = jet.n;
    let mut checked = 0;
    let mut nonzero = Vec::new();
    let mut record = |name: String, v: Rational| {
        checked += 1;
        if !num_traits::Zero::is_zero(&v) {
            nonzero.push(Residue {
                constraint: name,
                value: format_rational(&v),
            });
        }
    };
    for i in 0..n {
        record(format!("y_{0}{0} = 0", i + 1), jet.y[(i, i)].clone());
        for j in 0..n {
            if i == j {
                continue;
            }
            let sum = (0..n).fold(rat(0, 1), |acc, k| acc + jet.d1[k][(i, j)].clone());
            record(format!("sum_k d_k y_{}{}", i + 1, j + 1), sum);
            for k in (0..n).filter(|&k| k != i && k != j) {
                let r = jet.d1[k][(i, j)].clone() - jet.y[(i, k)].clone() * jet.y[(k, j)].clone();
                record(format!("d_{} y_{}{} - y_{}{} y_{}{}", k + 1, i + 1, j + 1, i + 1, k + 1, k + 1, j + 1), r);
            }
        }
    }
    if let Some(d2) = &jet.d2 {
        for c in 0..n {
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    let sum = (0..n).fold(rat(0, 1), |acc, k| acc + d2[c][k][(i, j)].clone());
                    record(format!("d_{} sum_k d_k y_{}{}", c + 1, i + 1, j + 1), sum);
                    for k in (0..n).filter(|&k| k != i && k != j) {
                        let r = d2[c][k][(i, j)].clone()
                            - jet.d1[c][(i, k)].clone() * jet.y[(k, j)].clone()
                            - jet.y[(i, k)].clone() * jet.d1[c][(k, j)].clone();
                        record(format!("d_{} (d_{} y_{}{} - y_{}{} y_{}{})", c + 1, k + 1, i + 1, j + 1, i + 1, k + 1, k + 1, j + 1), r);
                    }
                    for b in 0..c {
                        let r = d2[b][c][(i, j)].clone() - d2[c][b][(i, j)].clone();
                        record(format!("symmetry d_{}d_{} y_{}{}", b + 1, c + 1, i + 1, j + 1), r);
                    }
                }
            }
        }
    }
    JetReport { checked, nonzero }
}

/// The `1/z`, `1/z^2`, `1/z^3` coefficients of the resolvent on sheet `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolventCoeffs {
    pub b1: Matrix<Rational>,
    pub b2: Matrix<Rational>,
    pub b3: Matrix<Rational>,
}

/// `sum_s y_as y_sa`
fn loop_sum(jet: &JetPoint, a: usize) -> Rational {
    (0..jet.n).fold(rat(0, 1), |acc, s| acc + jet.y[(a, s)].clone() * jet.y[(s, a)].clone())
}

fn second(jet: &JetPoint) -> Result<&Vec<Vec<Matrix<Rational>>>> {
    jet.d2
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("insufficient jet depth: second derivatives required".into()))
}

/// Closed forms for `B_{a,1}`, `B_{a,2}`, `B_{a,3}`.
///
/// The off-diagonal entries of `B_{a,3}` away from row and column `a` are
/// not among the closed forms and are left zero.
pub fn resolvent_coefficients(jet: &JetPoint, a: usize) -> Result<ResolventCoeffs> {
    let n = jet.n;
    let y = &jet.y;
    let d = &jet.d1[a];
    let dd = &second(jet)?[a][a];
    let s = loop_sum(jet, a);
    let two = rat(2, 1);
    let b1 = Matrix::from_fn(n, n, |i, j| {
        if i == a && j != a {
            -y[(a, j)].clone()
        } else if j == a && i != a {
            y[(i, a)].clone()
        } else {
            rat(0, 1)
        }
    });
    let b2 = Matrix::from_fn(n, n, |i, j| {
        if i != j {
            -d[(i, j)].clone()
        } else if i != a {
            -y[(i, a)].clone() * y[(a, i)].clone()
        } else {
            s.clone()
        }
    });
    let b3 = Matrix::from_fn(n, n, |i, j| match (i == a, j == a) {
        (false, false) if i == j => d[(i, a)].clone() * y[(a, i)].clone() - y[(i, a)].clone() * d[(a, i)].clone(),
        (false, false) => rat(0, 1),
        (true, false) => -dd[(a, j)].clone() - two.clone() * y[(a, j)].clone() * s.clone(),
        (false, true) => dd[(i, a)].clone() + two.clone() * y[(i, a)].clone() * s.clone(),
        (true, true) => (0..n).fold(rat(0, 1), |acc, t| {
            acc + y[(t, a)].clone() * d[(a, t)].clone() - d[(t, a)].clone() * y[(a, t)].clone()
        }),
    });
    Ok(ResolventCoeffs { b1, b2, b3 })
}

/// Reads the jet at `t = 0` off the projector coefficients, which coincide
/// with the resolvent coefficients there.
///
/// `y` comes from `B_{a,1}`, first derivatives from the off-diagonal part of
/// `B_{a,2}`, the pure second derivatives `d_a^2 y_aj`, `d_a^2 y_ia` from
/// `B_{a,3}`, and every other second derivative from the constraints. Each
/// quantity reachable by two routes is compared.
pub fn jet_from_projectors(w: &MatrixPolynomial<Rational>) -> Result<JetPoint> {
    let engine = CorrelatorEngine::new(w, 2, 1)?;
    jet_from_engine(&engine)
}

pub fn jet_from_engine(engine: &CorrelatorEngine) -> Result<JetPoint> {
    let n = engine.n();
    if engine.order() < 3 {
        return Err(Error::Untrusted { exponent: -3, floor: -(engine.order() as i64) });
    }
    let b = |a: usize, k: usize| engine.projector_coeff(a, k);
    let inconsistent = |what: String| Error::Inconsistent(format!("projector data inconsistent with n-wave jet: {what}"));

    let mut y = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let from_row = -b(i, 1)[(i, j)].clone();
            let from_col = b(j, 1)[(i, j)].clone();
            if from_row != from_col {
                return Err(inconsistent(format!("y_{}{} differs between sheets {} and {}", i + 1, j + 1, i + 1, j + 1)));
            }
            y[(i, j)] = from_row;
        }
    }
    for a in 0..n {
        let b1 = b(a, 1);
        for i in 0..n {
            for j in 0..n {
                if i != a && j != a && !num_traits::Zero::is_zero(&b1[(i, j)]) {
                    return Err(inconsistent(format!("B_1 on sheet {} has entry ({}, {})", a + 1, i + 1, j + 1)));
                }
            }
        }
    }

    let d1: Vec<Matrix<Rational>> = (0..n)
        .map(|a| Matrix::from_fn(n, n, |i, j| if i == j { rat(0, 1) } else { -b(a, 2)[(i, j)].clone() }))
        .collect();

    let mut jet = JetPoint { n, y, d1, d2: None };
    let s: Vec<Rational> = (0..n).map(|a| loop_sum(&jet, a)).collect();
    let two = rat(2, 1);
    let mut d2 = vec![vec![Matrix::zeros(n, n); n]; n];
    // pure second derivatives along the sheet's own direction
    for a in 0..n {
        for j in (0..n).filter(|&j| j != a) {
            d2[a][a][(a, j)] = -b(a, 3)[(a, j)].clone() - two.clone() * jet.y[(a, j)].clone() * s[a].clone();
            d2[a][a][(j, a)] = b(a, 3)[(j, a)].clone() - two.clone() * jet.y[(j, a)].clone() * s[a].clone();
        }
    }
    let (y, d) = (&jet.y, &jet.d1);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let outside: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            // d_c d_k y_ij = d_c (y_ik y_kj) for k outside {i, j}
            for c in 0..n {
                for &k in &outside {
                    d2[c][k][(i, j)] = d[c][(i, k)].clone() * y[(k, j)].clone() + y[(i, k)].clone() * d[c][(k, j)].clone();
                }
            }
            // d_c d_i y_ij and d_c d_j y_ij for c outside {i, j} by symmetry
            for &c in &outside {
                d2[c][i][(i, j)] = d2[i][c][(i, j)].clone();
                d2[c][j][(i, j)] = d2[j][c][(i, j)].clone();
            }
            // the mixed d_i d_j y_ij from the sum rule, once along i and once along j
            let rest = |c: usize| outside.iter().fold(rat(0, 1), |acc, &k| acc + d2[c][k][(i, j)].clone());
            let via_i = -rest(i) - d2[i][i][(i, j)].clone();
            let via_j = -rest(j) - d2[j][j][(i, j)].clone();
            if via_i != via_j {
                return Err(inconsistent(format!("mixed derivative of y_{}{} differs between routes", i + 1, j + 1)));
            }
            d2[i][j][(i, j)] = via_i.clone();
            d2[j][i][(i, j)] = via_i;
        }
    }
    jet.d2 = Some(d2);

    for a in 0..n {
        let closed = resolvent_coefficients(&jet, a)?;
        let actual2 = b(a, 2);
        for i in 0..n {
            if closed.b2[(i, i)] != actual2[(i, i)] {
                return Err(inconsistent(format!("diagonal of B_2 on sheet {} at {}", a + 1, i + 1)));
            }
        }
        let actual3 = b(a, 3);
        for i in 0..n {
            if closed.b3[(i, i)] != actual3[(i, i)] {
                return Err(inconsistent(format!("diagonal of B_3 on sheet {} at {}", a + 1, i + 1)));
            }
        }
    }
    Ok(jet)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TauLevel {
    L00,
    L01,
    L02,
}

impl TauLevel {
    pub fn order(self) -> usize {
        match self {
            TauLevel::L00 => 0,
            TauLevel::L01 => 1,
            TauLevel::L02 => 2,
        }
    }
}

/// `d^2 log tau / d t^a_0 d t^b_l` at the jet, `l` given by `level`.
pub fn tau_second_derivative(jet: &JetPoint, a: usize, b: usize, level: TauLevel) -> Result<Rational> {
    let n = jet.n;
    let y = &jet.y;
    let d = &jet.d1;
    match level {
        TauLevel::L00 if a != b => Ok(-y[(a, b)].clone() * y[(b, a)].clone()),
        TauLevel::L00 => Ok(loop_sum(jet, a)),
        TauLevel::L01 if a != b => Ok(d[b][(a, b)].clone() * y[(b, a)].clone() - y[(a, b)].clone() * d[b][(b, a)].clone()),
        TauLevel::L01 => Ok((0..n).fold(rat(0, 1), |acc, s| {
            acc + y[(a, s)].clone() * d[s][(s, a)].clone() - d[s][(a, s)].clone() * y[(s, a)].clone()
        })),
        TauLevel::L02 if a != b => {
            let dd = &second(jet)?[b][b];
            Ok(-y[(a, b)].clone() * dd[(b, a)].clone() - y[(b, a)].clone() * dd[(a, b)].clone()
                + d[b][(a, b)].clone() * d[b][(b, a)].clone()
                - rat(3, 1) * y[(a, b)].clone() * y[(b, a)].clone() * loop_sum(jet, b))
        }
        TauLevel::L02 => {
            second(jet)?;
            (0..n).filter(|&s| s != a).try_fold(rat(0, 1), |acc, s| {
                Ok(acc - tau_second_derivative(jet, s, a, TauLevel::L02)?)
            })
        }
    }
}
