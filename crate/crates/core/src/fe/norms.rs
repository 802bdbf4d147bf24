//! Error functionals. Exact data is sampled at quadrature points; the
//! discrete gradient is constant per cell.

use super::{FeFunction, FeSpace};
use crate::math;
use crate::structure::{StructureParams, SymTensor, Tensor};

/// `‖u_h − exact‖_{L²(Ω)}`.
pub fn error_l2<G>(space: &FeSpace, u: &FeFunction, exact: G, degree: usize) -> f64
where
    G: Fn([f64; 2]) -> [f64; 2],
{
    error_lr(space, u, exact, degree, 2.0)
}

/// `‖u_h − exact‖_{L^r(Ω)}` with the Euclidean norm on vectors.
pub fn error_lr<G>(space: &FeSpace, u: &FeFunction, exact: G, degree: usize, r: f64) -> f64
where
    G: Fn([f64; 2]) -> [f64; 2],
{
    let total = space.integrate(degree, |k, x, bary| {
        let uh = u.value(space, k, bary);
        let e = exact(x);
        let d = math::sqrt((uh[0] - e[0]) * (uh[0] - e[0]) + (uh[1] - e[1]) * (uh[1] - e[1]));
        math::powf(d, r)
    });
    math::powf(total, 1.0 / r)
}

/// Broken `‖∇u_h − exact_gradient‖_{L^r(Ω)}` with the Frobenius norm.
pub fn error_gradient_lr<G>(space: &FeSpace, u: &FeFunction, exact_gradient: G, degree: usize, r: f64) -> f64
where
    G: Fn([f64; 2]) -> Tensor<2>,
{
    let total = space.integrate(degree, |k, x, _| {
        let d = (u.gradient(space, k) - exact_gradient(x)).norm();
        math::powf(d, r)
    });
    math::powf(total, 1.0 / r)
}

/// `‖F(Du_h) − F(D exact)‖_{L²(Ω)}`, with `exact_gradient` the full gradient
/// of the exact field.
pub fn error_f<G>(params: &StructureParams, space: &FeSpace, u: &FeFunction, exact_gradient: G, degree: usize) -> f64
where
    G: Fn([f64; 2]) -> Tensor<2>,
{
    let fh: alloc::vec::Vec<SymTensor<2>> = (0..space.mesh().num_cells())
        .map(|k| params.f_map_sym(&u.sym_gradient(space, k)))
        .collect();
    let total = space.integrate(degree, |k, x, _| {
        let d = fh[k] - params.f_map(&exact_gradient(x));
        d.dot(&d)
    });
    math::sqrt(total)
}

pub fn norm_l2(space: &FeSpace, u: &FeFunction) -> f64 {
    error_l2(space, u, |_| [0.0, 0.0], 2)
}

/// `‖F(Du_h)‖²_{L²(Ω)}`, exact since `Du_h` is constant per cell.
pub fn f_norm_sq(params: &StructureParams, space: &FeSpace, u: &FeFunction) -> f64 {
    (0..space.mesh().num_cells())
        .map(|k| {
            let f = params.f_map_sym(&u.sym_gradient(space, k));
            space.mesh().area(k) * f.dot(&f)
        })
        .sum()
}

/// `∫ S(Du_h) : Du_h`.
pub fn stress_power(params: &StructureParams, space: &FeSpace, u: &FeFunction) -> f64 {
    (0..space.mesh().num_cells())
        .map(|k| {
            let d = u.sym_gradient(space, k);
            space.mesh().area(k) * params.stress_sym(&d).dot(&d)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::{interpolate_lagrange, BoundaryMode};

    #[test]
    fn own_values_give_zero_error() {
        let s = FeSpace::unit_square(4);
        let g = |x: [f64; 2]| [x[0] - 2.0 * x[1], 3.0 + x[1]];
        let u = interpolate_lagrange(&s, g, BoundaryMode::Keep);
        assert!(error_l2(&s, &u, g, 5) < 1e-14);
        let grad = |_: [f64; 2]| Tensor::new([[1.0, -2.0], [0.0, 1.0]]);
        let params = StructureParams::new(1.5, 0.01).unwrap();
        assert!(error_f(&params, &s, &u, grad, 5) < 1e-14);
    }

    #[test]
    fn quadratic_case_is_sym_gradient_error() {
        let s = FeSpace::unit_square(3);
        let u = FeFunction::zeros(&s);
        let grad = |x: [f64; 2]| Tensor::new([[x[0], 1.0], [-1.0, x[1]]]);
        let p2 = StructureParams::new(2.0, 0.0).unwrap();
        // ‖D exact‖₂² = ∫ x² + y² = 2/3
        let e = error_f(&p2, &s, &u, grad, 5);
        assert!((e - libm::sqrt(2.0 / 3.0)).abs() < 1e-14);
    }
}
