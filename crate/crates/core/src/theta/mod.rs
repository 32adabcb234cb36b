//! Numerical theta-function side of the hyperelliptic case `w^2 = Q(z)`:
//! periods, Abel map, Riemann theta with derivatives, and the coefficient
//! level comparison against the exact correlators.

mod abel;
mod periods;
pub mod quadrature;
mod riemann;
mod verify;

pub use abel::{abel_integral, abel_u0, reduce_mod_lattice, JacobianPoint, PathChoice};
pub use periods::{expansion_mismatch, period_matrix, v_vectors, ThetaContext, VData};
pub use riemann::{log_theta_derivative, log_theta_tensor, theta, ThetaSum, DEFAULT_RADIUS_CAP};
pub use verify::{half_periods, verify_main_theorem, HalfPeriod, IdentityCheck, ShiftTrial, ThetaVerification};

use num_complex::Complex64;
use num_traits::Zero;

use crate::curve::{resultant, MatrixPolynomial};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::roots::{min_separation, poly_roots};
use crate::scalar::{Field, Rational};

/// `w^2 = Q(z)` with `Q` monic of degree `2g + 2`.
#[derive(Clone, Debug)]
pub struct HyperellipticCurve {
    pub q: Poly<Rational>,
    pub genus: usize,
    /// Roots of `Q`, ordered by angle around their centroid so consecutive
    /// segments form a simple chain.
    pub branch_points: Vec<Complex64>,
}

impl HyperellipticCurve {
    pub fn new(q: Poly<Rational>) -> Result<Self> {
        let deg = q.degree().unwrap_or(0);
        if deg < 4 || deg % 2 == 1 {
            return Err(Error::InvalidInput(format!("Q(z) must have even degree >= 4, got {deg}")));
        }
        if q.leading() != Some(&Rational::from_i64(1)) {
            return Err(Error::InvalidInput("Q(z) must be monic".into()));
        }
        if resultant(&q, &q.derivative()).is_zero() {
            return Err(Error::InvalidInput("Q(z) is not squarefree".into()));
        }
        let mut branch_points = poly_roots(&q)?;
        if min_separation(&branch_points) < 1e-8 {
            return Err(Error::Numerical("branch points numerically coincide".into()));
        }
        let centroid = branch_points.iter().sum::<Complex64>() / branch_points.len() as f64;
        branch_points.sort_by(|a, b| (a - centroid).arg().total_cmp(&(b - centroid).arg()));
        Ok(HyperellipticCurve {
            q,
            genus: deg / 2 - 1,
            branch_points,
        })
    }

    /// The curve `w^2 = -det W(z)` of a traceless `2 x 2` matrix polynomial
    /// with leading coefficient `diag(1, -1)` or `diag(-1, 1)`.
    pub fn from_matrix_polynomial(w: &MatrixPolynomial<Rational>) -> Result<Self> {
        if w.n() != 2 {
            return Err(Error::InvalidInput("theta verification needs n = 2".into()));
        }
        let p = w.to_poly_matrix();
        if !(p[(0, 0)].clone() + p[(1, 1)].clone()).is_zero() {
            return Err(Error::InvalidInput("theta verification needs a traceless W(z)".into()));
        }
        let mut lead = w.leading_eigenvalues();
        lead.sort();
        if lead != [Rational::from_i64(-1), Rational::from_i64(1)] {
            return Err(Error::InvalidInput("theta verification needs leading coefficient diag(1, -1)".into()));
        }
        let det = p[(0, 0)].clone() * p[(1, 1)].clone() - p[(0, 1)].clone() * p[(1, 0)].clone();
        Self::new(-det)
    }

    pub fn q_at(&self, z: Complex64) -> Complex64 {
        self.branch_points.iter().map(|e| z - e).product()
    }

    /// `Q(z) / prod_{k in skip} (z - e_k)`.
    fn cofactor(&self, z: Complex64, skip: &[usize]) -> Complex64 {
        self.branch_points
            .iter()
            .enumerate()
            .filter(|(k, _)| !skip.contains(k))
            .map(|(_, e)| z - e)
            .product()
    }

    /// Typical size of the branch-point configuration.
    pub fn scale(&self) -> f64 {
        self.branch_points.iter().map(|e| e.norm()).fold(1.0, f64::max)
    }
}

/// Square roots of `values`, sign-adjusted so consecutive entries vary
/// continuously. `first` fixes the sign of the first one.
fn continuous_sqrt(values: &[Complex64], first: Option<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev = first;
    for v in values {
        let mut s = v.sqrt();
        if let Some(p) = prev {
            if (s - p).norm() > (s + p).norm() {
                s = -s;
            }
        }
        out.push(s);
        prev = Some(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use nalgebra::DMatrix;

    use super::*;
    use crate::divisor::{pole_divisor, DEFAULT_TOL};
    use crate::scalar::rat;

    fn qp(c: &[i64]) -> Poly<Rational> {
        Poly::new(c.iter().map(|&v| rat(v, 1)).collect())
    }

    fn agm(mut a: Complex64, mut b: Complex64) -> Complex64 {
        for _ in 0..60 {
            let (x, y) = ((a + b) / 2.0, (a * b).sqrt());
            // principal branch choice of the AGM
            let y = if (x - y).norm() <= (x + y).norm() { y } else { -y };
            a = x;
            b = y;
        }
        a
    }

    /// `w^2 = z^4 - 1`: with `k^2 = 1/2` the ratio of periods is
    /// `K'/K = agm(1, k)/agm(1, k') = 1`, so `B = -2 pi`.
    #[test]
    fn quartic_period_matches_agm() {
        let curve = HyperellipticCurve::new(qp(&[-1, 0, 0, 0, 1])).unwrap();
        let ctx = period_matrix(&curve).unwrap();
        let k = Complex64::new(0.5f64.sqrt(), 0.0);
        let kp = (Complex64::new(1.0, 0.0) - k * k).sqrt();
        let tau_ratio = agm(Complex64::new(1.0, 0.0), k) / agm(Complex64::new(1.0, 0.0), kp);
        let b = ctx.riemann[(0, 0)];
        // B = 2 pi i tau with |Re| fixed by K'/K; the lattice is square
        assert!((b.re.abs() - 2.0 * PI * tau_ratio.re).abs() < 1e-10, "B = {b}");
        assert!(b.re < 0.0);
        assert!(ctx.normalization_error() < 1e-10);
    }

    #[test]
    fn theta_direct_sum() {
        let b = DMatrix::from_element(1, 1, Complex64::new(-10.0, 0.0));
        let v = theta(&[Complex64::new(0.0, 0.0)], &b, &[]).unwrap();
        let want = 1.0 + 2.0 * (-5f64).exp() + 2.0 * (-20f64).exp() + 2.0 * (-45f64).exp();
        assert!((v.re - want).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    fn genus_two_b() -> DMatrix<Complex64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(-4.0, 0.7), Complex64::new(1.1, -0.3), Complex64::new(1.1, -0.3), Complex64::new(-3.5, 1.9)],
        )
    }

    #[test]
    fn periodicity_and_parity() {
        let b = genus_two_b();
        let u = [Complex64::new(0.3, -0.2), Complex64::new(-0.45, 0.8)];
        let th = theta(&u, &b, &[]).unwrap();
        for j in 0..2 {
            let mut up = u;
            up[j] += Complex64::new(0.0, 2.0 * PI);
            assert!((theta(&up, &b, &[]).unwrap() - th).norm() < 1e-12 * th.norm());
        }
        assert!(verify::quasi_periodicity(&u, &b).unwrap() < 1e-10);
        let neg = [-u[0], -u[1]];
        assert!((theta(&neg, &b, &[]).unwrap() - th).norm() < 1e-10 * th.norm());
        let d = log_theta_derivative(&u, &b, &[0, 1, 1]).unwrap();
        assert!((log_theta_derivative(&u, &b, &[1, 0, 1]).unwrap() - d).norm() < 1e-12 * d.norm().max(1.0));
        assert!((log_theta_derivative(&neg, &b, &[0, 1, 1]).unwrap() + d).norm() < 1e-10 * d.norm().max(1.0));
    }

    #[test]
    fn third_log_derivative_by_hand() {
        let b = DMatrix::from_element(1, 1, Complex64::new(-2.3, 0.4));
        let u = [Complex64::new(0.21, 0.37)];
        let t: Vec<Complex64> = (0..4).map(|k| theta(&u, &b, &vec![0; k]).unwrap()).collect();
        let (d1, d2, d3) = (t[1] / t[0], t[2] / t[0], t[3] / t[0]);
        let want = d3 - 3.0 * d2 * d1 + 2.0 * d1 * d1 * d1;
        assert!((log_theta_derivative(&u, &b, &[0, 0, 0]).unwrap() - want).norm() < 1e-12);
    }

    fn g1_instance() -> MatrixPolynomial<Rational> {
        crate::divisor::hyperelliptic_matrix(&qp(&[0, 0, 1]), &qp(&[1, 1]), &qp(&[0, 2])).unwrap()
    }

    #[test]
    fn expansion_coefficients_are_half_v() {
        let curve = HyperellipticCurve::from_matrix_polynomial(&g1_instance()).unwrap();
        let ctx = period_matrix(&curve).unwrap();
        let v = v_vectors(&curve, &ctx, 3).unwrap();
        assert_eq!(v.r[0], rat(1, 1));
        assert_eq!(v.r[1], -curve.q.coeff(3) / rat(2, 1));
        assert!((v.v[0][0] - ctx.alpha[(0, 0)]).norm() < 1e-15);
        assert!(expansion_mismatch(&curve, &ctx, &v) < 1e-8);
    }

    #[test]
    fn u0_independent_of_path() {
        let w = g1_instance();
        let curve = HyperellipticCurve::from_matrix_polynomial(&w).unwrap();
        let ctx = period_matrix(&curve).unwrap();
        let div = pole_divisor(&w, DEFAULT_TOL).unwrap();
        let a = abel_u0(&curve, &ctx, &div.points, PathChoice::Straight).unwrap();
        let b = abel_u0(&curve, &ctx, &div.points, PathChoice::Detour).unwrap();
        let diff: Vec<Complex64> = a.u0.iter().zip(&b.u0).map(|(x, y)| x - y).collect();
        let r = reduce_mod_lattice(&diff, &ctx.riemann);
        assert!(r.iter().all(|c| c.norm() < 1e-8), "{r:?}");
        assert!(a.theta_value.norm() > 1e-10);
    }

    #[test]
    fn genus_one_golden_triple() {
        let w = g1_instance();
        let rep = verify_main_theorem(&w, &[(3, 0), (4, 0)], 1e-6).unwrap();
        assert!(rep.passed, "{:?}", rep.trials);
        let first = &rep.identities[0];
        assert_eq!(first.f, rat(-4, 1));
        assert!((first.t.re - 4.0).abs() < 1e-6);
        assert_eq!(rep.identities[1].f, rat(0, 1));
    }

    #[test]
    fn conjugation_leaves_verification_unchanged() {
        let w = g1_instance();
        let wc = w.conjugate_by_diagonal(&[rat(3, 1), rat(-2, 5)]);
        let a = verify_main_theorem(&w, &[(3, 1)], 1e-6).unwrap();
        let b = verify_main_theorem(&wc, &[(3, 1)], 1e-6).unwrap();
        for (x, y) in a.identities.iter().zip(&b.identities) {
            assert_eq!(x.f, y.f);
            assert!((x.t - y.t).norm() < 1e-7);
        }
    }
}
