//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)` and on `[0,1]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Points in reference coordinates `(ξ, η)` with positive weights summing to
/// the reference area `1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    degree: usize,
}

impl QuadratureRule {
    /// A rule exact for polynomials of total degree `degree`: the centroid
    /// rule, the three-point interior rule, the seven-point Radon rule up to
    /// degree 5, and collapsed Gauss–Legendre products above that.
    pub fn triangle(degree: usize) -> Self {
        match degree {
            0 | 1 => Self {
                points: vec![[1.0 / 3.0, 1.0 / 3.0]],
                weights: vec![0.5],
                degree: 1,
            },
            2 => {
                let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
                Self {
                    points: vec![[a, a], [b, a], [a, b]],
                    weights: vec![1.0 / 6.0; 3],
                    degree: 2,
                }
            }
            3..=5 => radon7(),
            _ => collapsed(degree),
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Barycentric coordinates `(1−ξ−η, ξ, η)` of every point.
    pub fn barycentric(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&[x, y], &w)| ([1.0 - x - y, x, y], w))
    }
}

fn radon7() -> QuadratureRule {
    let r = math::sqrt(15.0);
    let a1 = (6.0 - r) / 21.0;
    let b1 = (9.0 + 2.0 * r) / 21.0;
    let a2 = (6.0 + r) / 21.0;
    let b2 = (9.0 - 2.0 * r) / 21.0;
    let w1 = 0.5 * (155.0 - r) / 1200.0;
    let w2 = 0.5 * (155.0 + r) / 1200.0;
    QuadratureRule {
        points: vec![
            [1.0 / 3.0, 1.0 / 3.0],
            [a1, a1],
            [b1, a1],
            [a1, b1],
            [a2, a2],
            [b2, a2],
            [a2, b2],
        ],
        weights: vec![0.5 * 9.0 / 40.0, w1, w1, w1, w2, w2, w2],
        degree: 5,
    }
}

/// Duffy map `(u, v) ↦ (u, (1−u)v)` of a tensor Gauss rule on `[0,1]²`.
fn collapsed(degree: usize) -> QuadratureRule {
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&u, &wu) in x.iter().zip(&w) {
        for (&v, &wv) in x.iter().zip(&w) {
            points.push([u, (1.0 - u) * v]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    QuadratureRule {
        points,
        weights,
        degree: 2 * n - 2,
    }
}

/// `n`-point Gauss–Legendre nodes and weights on `[0,1]`, exact to degree
/// `2n−1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and P_{n−1}(z)
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if math::abs(step) < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = 0.5 * (1.0 - z);
        nodes[n - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// `∫_T ξ^a η^b = a! b! / (a+b+2)!`
    fn monomial(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn triangle_rules_are_exact() {
        for degree in 0..=12 {
            let q = QuadratureRule::triangle(degree);
            assert!(q.degree() >= degree);
            assert!(q.weights().iter().all(|&w| w > 0.0));
            for &[x, y] in q.points() {
                assert!(x >= 0.0 && y >= 0.0 && x + y <= 1.0);
            }
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let approx: f64 = q
                        .points()
                        .iter()
                        .zip(q.weights())
                        .map(|(&[x, y], &w)| w * libm::pow(x, a as f64) * libm::pow(y, b as f64))
                        .sum();
                    let exact = monomial(a, b);
                    assert!(
                        (approx - exact).abs() < 1e-14,
                        "degree {degree}: x^{a} y^{b}: {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_is_exact() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for k in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(&x, &w)| w * libm::pow(x, k as f64)).sum();
                assert!((approx - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }
}
