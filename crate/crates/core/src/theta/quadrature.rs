//! Fixed-order quadrature rules on `[-1, 1]`.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights, ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Chebyshev nodes for weight `1/sqrt(1 - t^2)`, ascending; the common
/// weight is `pi / n`.
pub fn gauss_chebyshev(n: usize) -> Vec<f64> {
    (0..n)
        .rev()
        .map(|m| ((2 * m + 1) as f64 * PI / (2 * n) as f64).cos())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact through degree 13
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((q - 2.0 / 13.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(40);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((q - (1f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_weight() {
        // int x^2 / sqrt(1 - x^2) = pi / 2
        let n = 5;
        let q: f64 = gauss_chebyshev(n).iter().map(|x| x * x).sum::<f64>() * PI / n as f64;
        assert!((q - PI / 2.0).abs() < 1e-14);
    }
}
