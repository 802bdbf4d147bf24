//! Averaging estimates in Bochner spaces for a piecewise constant time
//! discretization:
//!
//! ```text
//!   Σ_m ∫_{I_m} ‖f(t) − f(t_m)‖² dt                    ≤ κ² ‖∂_t f‖²_{L²(0,T;X)}
//!   Σ_m κ ⨍_{I_m} ⨍_{I_m} ‖f(s) − f(t)‖² ds dt          ≤ κ² ‖∂_t f‖²_{L²(0,T;X)}
//! ```
//!
//! The norm of `X` is a weighted Euclidean norm on samples, which covers
//! `ℝ^N` (unit weights) and `L²(Ω)` via quadrature ([`l2_sampling`]).

use alloc::vec::Vec;

use crate::fe::{gauss_legendre, FeSpace, QuadratureRule};
use crate::math;
use crate::stepper::TimeGrid;

/// Gauss points per subinterval.
const TIME_POINTS: usize = 10;

/// Scalar time profiles `θ(t)` for families `f(t) = θ(t)·v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TimeProfile {
    /// `t`.
    Linear,
    /// `sin 2πt`.
    Sine,
    /// `e^{2t}`.
    Exponential,
}

impl TimeProfile {
    pub const ALL: [TimeProfile; 3] = [TimeProfile::Linear, TimeProfile::Sine, TimeProfile::Exponential];

    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Linear => t,
            TimeProfile::Sine => math::sin(2.0 * core::f64::consts::PI * t),
            TimeProfile::Exponential => math::exp(2.0 * t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Linear => 1.0,
            TimeProfile::Sine => 2.0 * core::f64::consts::PI * math::cos(2.0 * core::f64::consts::PI * t),
            TimeProfile::Exponential => 2.0 * math::exp(2.0 * t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BochnerReport {
    /// `Σ_m ∫_{I_m} ‖f(t) − f(t_m)‖² dt`.
    pub lhs_right_endpoint: f64,
    /// `Σ_m κ ⨍⨍ ‖f(s) − f(t)‖² ds dt`.
    pub lhs_average: f64,
    /// `κ² ‖∂_t f‖²_{L²(0,T;X)}`.
    pub rhs: f64,
    pub kappa: f64,
}

impl BochnerReport {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * self.rhs.max(1.0);
        self.lhs_right_endpoint <= self.rhs + slack && self.lhs_average <= self.rhs + slack
    }
}

/// Quadrature points and weights of `Ω` such that `Σ w_i |v(x_i)|²` is the
/// squared `L²` norm (exact for polynomials of the rule's degree).
pub fn l2_sampling(space: &FeSpace, degree: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let rule = QuadratureRule::triangle(degree);
    let mesh = space.mesh();
    let mut points = Vec::with_capacity(mesh.num_cells() * rule.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for k in 0..mesh.num_cells() {
        let area = mesh.area(k);
        for (bary, w) in rule.barycentric() {
            points.push(space.map_point(k, bary));
            weights.push(2.0 * area * w);
        }
    }
    (points, weights)
}

/// Evaluates both averaging estimates for `f(t)` given by its samples
/// `value(t)` and those of `∂_t f`, under the norm `‖v‖² = Σ w_i v_i²`.
pub fn bochner_check<F, G>(grid: &TimeGrid, weights: &[f64], value: F, derivative: G) -> BochnerReport
where
    F: Fn(f64) -> Vec<f64>,
    G: Fn(f64) -> Vec<f64>,
{
    let norm_sq = |a: &[f64], b: Option<&[f64]>| -> f64 {
        match b {
            Some(b) => weights
                .iter()
                .zip(a)
                .zip(b)
                .map(|((w, x), y)| w * (x - y) * (x - y))
                .sum(),
            None => weights.iter().zip(a).map(|(w, x)| w * x * x).sum(),
        }
    };
    let (nodes, gw) = gauss_legendre(TIME_POINTS);
    let kappa = grid.kappa();
    let (mut right, mut average, mut deriv) = (0.0, 0.0, 0.0);
    for m in 1..=grid.steps() {
        let (a, b) = (grid.node(m - 1), grid.node(m));
        let len = b - a;
        let samples: Vec<Vec<f64>> = nodes.iter().map(|&s| value(a + s * len)).collect();
        let end = value(b);
        for (i, si) in samples.iter().enumerate() {
            right += len * gw[i] * norm_sq(si, Some(&end));
            for (j, sj) in samples.iter().enumerate().skip(i + 1) {
                // symmetric double sum
                average += 2.0 * kappa * gw[i] * gw[j] * norm_sq(si, Some(sj));
            }
            deriv += len * gw[i] * norm_sq(&derivative(a + nodes[i] * len), None);
        }
    }
    BochnerReport {
        lhs_right_endpoint: right,
        lhs_average: average,
        rhs: kappa * kappa * deriv,
        kappa,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_family_closed_forms() {
        // f = t·v: lhs_right = Tκ²|v|²/3, lhs_avg = Tκ²|v|²/6, rhs = Tκ²|v|²
        let v = [1.0, -2.0, 0.5];
        let vv: f64 = v.iter().map(|x| x * x).sum();
        for steps in [1, 4, 16] {
            let grid = TimeGrid::new(2.0, steps).unwrap();
            let k = grid.kappa();
            let r = bochner_check(&grid, &[1.0; 3], |t| v.iter().map(|x| t * x).collect(), |_| v.to_vec());
            assert!((r.lhs_right_endpoint - 2.0 * k * k * vv / 3.0).abs() < 1e-12);
            assert!((r.lhs_average - 2.0 * k * k * vv / 6.0).abs() < 1e-12);
            assert!((r.rhs - 2.0 * k * k * vv).abs() < 1e-12);
            assert!(r.holds());
        }
    }

    #[test]
    fn l2_weights_integrate_constants() {
        let space = FeSpace::unit_square(3);
        let (pts, w) = l2_sampling(&space, 4);
        assert_eq!(pts.len(), w.len());
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let xy: f64 = pts.iter().zip(&w).map(|(p, w)| w * p[0] * p[1]).sum();
        assert!((xy - 0.25).abs() < 1e-14);
    }
}
