//! Complex roots of real polynomials.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Field;

/// All complex roots of `p`, sorted by real then imaginary part.
///
/// Eigenvalues of the companion matrix, each polished by a few Newton steps
/// on the original polynomial.
pub fn poly_roots<S: Field>(p: &Poly<S>) -> Result<Vec<Complex64>> {
    let coeffs: Vec<Complex64> = p.coeffs().iter().map(Field::to_c64).collect();
    let deg = p
        .degree()
        .ok_or_else(|| Error::InvalidInput("roots of the zero polynomial".into()))?;
    if deg == 0 {
        return Ok(Vec::new());
    }
    if coeffs.iter().any(|c| c.im != 0.0) {
        return Err(Error::InvalidInput("root finder expects real coefficients".into()));
    }
    let lead = coeffs[deg].re;
    let companion = DMatrix::<f64>::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -coeffs[i].re / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = companion.complex_eigenvalues();
    let cp = Poly::new(coeffs);
    let dp = cp.derivative();
    let mut roots: Vec<Complex64> = eig.iter().map(|&z| polish(&cp, &dp, z)).collect();
    for r in &mut roots {
        if !r.re.is_finite() || !r.im.is_finite() {
            return Err(Error::Numerical("non-finite polynomial root".into()));
        }
        // real input: clean imaginary dust so conjugate pairs stay paired
        if r.im.abs() < 1e-14 * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

fn polish(p: &Poly<Complex64>, dp: &Poly<Complex64>, mut z: Complex64) -> Complex64 {
    let mut best = p.eval(&z).norm();
    for _ in 0..8 {
        let d = dp.eval(&z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - p.eval(&z) / d;
        let val = p.eval(&next).norm();
        if val < best {
            z = next;
            best = val;
        } else {
            break;
        }
    }
    z
}

/// Smallest distance between two entries.
pub fn min_separation(points: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn quadratic_and_quartic() {
        // -2z^2 - z + 1 = -(2z - 1)(z + 1)
        let p: Poly<Rational> = Poly::new(vec![rat(1, 1), rat(-1, 1), rat(-2, 1)]);
        let r = poly_roots(&p).unwrap();
        assert!((r[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        // z^4 - 1
        let q: Poly<f64> = Poly::new(vec![-1.0, 0.0, 0.0, 0.0, 1.0]);
        let r = poly_roots(&q).unwrap();
        let expected = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ];
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).norm() < 1e-13, "{a} vs {b}");
        }
    }
}
