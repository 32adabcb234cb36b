//! Exact correlators of tau-functions attached to spectral curves of
//! rational matrix polynomials, with a numerical theta-function check for
//! the hyperelliptic case.
//!
//! The algebra (polynomials, truncated series, matrices) is generic over
//! [`scalar::Field`]; the correlator pipeline runs over [`Rational`] and the
//! numerical modules over `f64` / `Complex64`.

pub mod correlators;
pub mod curve;
pub mod divisor;
pub mod error;
pub mod theta;
pub mod jets;
pub mod job;
pub mod matrix;
pub mod multipoly;
pub mod poly;
pub mod projectors;
pub mod roots;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use scalar::{format_rational, parse_rational, rat, Field, Rational, Ring};

pub type QPoly = poly::Poly<Rational>;
pub type QMatrix = matrix::Matrix<Rational>;
pub type QSeries = series::TailSeries<Rational>;
pub type QMatrixSeries = series::MatrixTailSeries<Rational>;
pub type QMultiPoly = multipoly::MultiPoly<Rational>;
pub type QMatrixPolynomial = curve::MatrixPolynomial<Rational>;
