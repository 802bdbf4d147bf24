//! Nodal interpolation and a Clément-type quasi-interpolant: the vertex
//! value is the `L²(ω_v)` projection of the data onto affine functions over
//! the vertex star `ω_v`, evaluated at the vertex.

use alloc::vec::Vec;

use super::{BoundaryMode, FeFunction, FeSpace, QuadratureRule, VectorField};
use crate::math;

/// Rule used for the patch projections of [`interpolate_clement`].
pub const CLEMENT_QUAD_DEGREE: usize = 5;

pub fn interpolate_lagrange<G>(space: &FeSpace, g: G, mode: BoundaryMode) -> FeFunction
where
    G: Fn([f64; 2]) -> [f64; 2],
{
    let mesh = space.mesh();
    let mut u = FeFunction::zeros(space);
    for (v, &x) in mesh.vertices().iter().enumerate() {
        if mode == BoundaryMode::Zero && mesh.is_boundary(v) {
            continue;
        }
        let val = g(x);
        u.coefficients_mut()[2 * v] = val[0];
        u.coefficients_mut()[2 * v + 1] = val[1];
    }
    u
}

pub fn interpolate_clement<G>(space: &FeSpace, g: G, mode: BoundaryMode) -> FeFunction
where
    G: Fn([f64; 2]) -> [f64; 2],
{
    let mesh = space.mesh();
    let rule = QuadratureRule::triangle(CLEMENT_QUAD_DEGREE);
    let mut u = FeFunction::zeros(space);
    for (v, &xv) in mesh.vertices().iter().enumerate() {
        let val = if mesh.is_boundary(v) && mode != BoundaryMode::Keep {
            match mode {
                BoundaryMode::Zero => [0.0, 0.0],
                _ => g(xv),
            }
        } else {
            let star = mesh.vertex_star(v);
            let scale = star.iter().map(|&k| mesh.diameter(k)).fold(0.0, f64::max);
            let mut gram = [[0.0; 3]; 3];
            let mut rhs = [[0.0; 3]; 2];
            for &k in star {
                let jac = 2.0 * mesh.area(k);
                for (bary, w) in rule.barycentric() {
                    let x = space.map_point(k, bary);
                    let psi = [1.0, (x[0] - xv[0]) / scale, (x[1] - xv[1]) / scale];
                    let gx = g(x);
                    for a in 0..3 {
                        for b in 0..3 {
                            gram[a][b] += jac * w * psi[a] * psi[b];
                        }
                        rhs[0][a] += jac * w * psi[a] * gx[0];
                        rhs[1][a] += jac * w * psi[a] * gx[1];
                    }
                }
            }
            [solve3(gram, rhs[0])[0], solve3(gram, rhs[1])[0]]
        };
        u.coefficients_mut()[2 * v] = val[0];
        u.coefficients_mut()[2 * v + 1] = val[1];
    }
    u
}

/// Gaussian elimination with partial pivoting on a 3×3 system.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| math::abs(a[i][col]).total_cmp(&math::abs(a[j][col])))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for c in (row + 1)..3 {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Measured constant of the local stability estimate
///
/// ```text
///   ⨍_K |P_h w| ≤ c (⨍_{S_K} |w| + h_K ⨍_{S_K} |∇w|)
/// ```
///
/// for `P_h` = [`interpolate_clement`] with the given boundary mode: the
/// maximum over cells of left side / right side.
pub fn clement_stability_constant<W: VectorField + ?Sized>(
    space: &FeSpace,
    w: &W,
    mode: BoundaryMode,
    degree: usize,
) -> f64 {
    let mesh = space.mesh();
    let ph = interpolate_clement(space, |x| w.value(x), mode);
    let rule = QuadratureRule::triangle(degree);
    let mut abs_w = Vec::with_capacity(mesh.num_cells());
    let mut abs_grad = Vec::with_capacity(mesh.num_cells());
    let mut abs_ph = Vec::with_capacity(mesh.num_cells());
    for k in 0..mesh.num_cells() {
        let jac = 2.0 * mesh.area(k);
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (bary, wt) in rule.barycentric() {
            let x = space.map_point(k, bary);
            let v = w.value(x);
            a += jac * wt * math::sqrt(v[0] * v[0] + v[1] * v[1]);
            b += jac * wt * w.gradient(x).norm();
            let p = ph.value(space, k, bary);
            c += jac * wt * math::sqrt(p[0] * p[0] + p[1] * p[1]);
        }
        abs_w.push(a);
        abs_grad.push(b);
        abs_ph.push(c);
    }
    let mut worst = 0.0f64;
    for k in 0..mesh.num_cells() {
        let patch = mesh.patch(k).expect("index in range");
        let area: f64 = patch.iter().map(|&j| mesh.area(j)).sum();
        let mean_w: f64 = patch.iter().map(|&j| abs_w[j]).sum::<f64>() / area;
        let mean_grad: f64 = patch.iter().map(|&j| abs_grad[j]).sum::<f64>() / area;
        let rhs = mean_w + mesh.diameter(k) * mean_grad;
        let lhs = abs_ph[k] / mesh.area(k);
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    worst
}

/// `max_K sup_K |v_h| / ⨍_K |v_h|`, the constant of the `j = 0` inverse
/// estimate for P1 functions. The supremum of `|v_h|` on a cell is attained
/// at a vertex.
pub fn inverse_estimate_constant(space: &FeSpace, u: &FeFunction, degree: usize) -> f64 {
    let mesh = space.mesh();
    let rule = QuadratureRule::triangle(degree);
    let mut worst = 0.0f64;
    for k in 0..mesh.num_cells() {
        let sup = mesh.cells()[k]
            .iter()
            .map(|&v| {
                let x = u.vertex_value(v);
                math::sqrt(x[0] * x[0] + x[1] * x[1])
            })
            .fold(0.0, f64::max);
        let mean: f64 = rule
            .barycentric()
            .map(|(bary, w)| {
                let x = u.value(space, k, bary);
                2.0 * w * math::sqrt(x[0] * x[0] + x[1] * x[1])
            })
            .sum();
        if mean > 0.0 {
            worst = worst.max(sup / mean);
        }
    }
    worst
}
