#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_tau::curve::MatrixPolynomial;
use spectral_tau::matrix::Matrix;
use spectral_tau::{rat, QMatrixPolynomial, QPoly, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut impl Rng) -> Rational {
    rat(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

pub fn nonzero_rational(rng: &mut impl Rng) -> Rational {
    loop {
        let r = small_rational(rng);
        if r != rat(0, 1) {
            return r;
        }
    }
}

/// Distinct integer leading eigenvalues, summing to zero when `traceless`.
fn leading(rng: &mut impl Rng, n: usize, traceless: bool) -> Vec<Rational> {
    loop {
        let mut pool: Vec<i64> = (-4..=4).collect();
        pool.shuffle(rng);
        let mut b: Vec<i64> = pool[..n].to_vec();
        if traceless {
            let s: i64 = b[..n - 1].iter().sum();
            b[n - 1] = -s;
            let mut sorted = b.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() < n {
                continue;
            }
        }
        return b.into_iter().map(|v| rat(v, 1)).collect();
    }
}

pub fn random_w(rng: &mut impl Rng, n: usize, m: usize, traceless: bool) -> QMatrixPolynomial {
    let lead = leading(rng, n, traceless);
    let mut coeffs = vec![Matrix::diagonal(&lead)];
    for _ in 0..m {
        let mut c = Matrix::from_fn(n, n, |_, _| small_rational(rng));
        if traceless {
            let s = (0..n - 1).fold(rat(0, 1), |acc, i| acc + c[(i, i)].clone());
            c[(n - 1, n - 1)] = -s;
        }
        coeffs.push(c);
    }
    MatrixPolynomial::from_descending(coeffs).expect("valid shape")
}

/// `a` monic of degree `g + 1`; `b`, `c` of degree exactly `g`.
pub fn random_abc(rng: &mut impl Rng, g: usize) -> (QPoly, QPoly, QPoly) {
    let mut a: Vec<Rational> = (0..=g).map(|_| small_rational(rng)).collect();
    a.push(rat(1, 1));
    let b = degree_exactly(rng, g);
    let c = degree_exactly(rng, g);
    (QPoly::new(a), b, c)
}

fn degree_exactly(rng: &mut impl Rng, g: usize) -> QPoly {
    let mut v: Vec<Rational> = (0..g).map(|_| small_rational(rng)).collect();
    v.push(nonzero_rational(rng));
    QPoly::new(v)
}

pub fn random_diagonal(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| nonzero_rational(rng)).collect()
}

pub fn int_poly(c: &[i64]) -> QPoly {
    QPoly::new(c.iter().map(|&v| rat(v, 1)).collect())
}

pub fn instance_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}
