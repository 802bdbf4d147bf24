use alloc::vec;
use alloc::vec::Vec;

use super::{FeError, FeFunction, FeSpace, QuadratureRule};
use crate::linalg::{Cholesky, CsrMatrix};

/// How boundary coefficients are set by projections and interpolants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundaryMode {
    /// Treat boundary dofs like any other (projection onto the full `X_h`).
    Keep,
    /// Force boundary dofs to zero (target space `V_h`).
    Zero,
    /// Boundary dofs take the nodal values of the data.
    Nodal,
}

/// Consistent mass matrix over all dofs, integrated with the degree-2 rule
/// (exact for P1 products).
pub fn assemble_mass(space: &FeSpace) -> CsrMatrix {
    let rule = QuadratureRule::triangle(2);
    let mesh = space.mesh();
    let mut t = Vec::with_capacity(mesh.num_cells() * 18);
    for k in 0..mesh.num_cells() {
        let jac = 2.0 * mesh.area(k);
        let cell = mesh.cells()[k];
        let mut local = [[0.0; 3]; 3];
        for (bary, w) in rule.barycentric() {
            for a in 0..3 {
                for b in a..3 {
                    local[a][b] += jac * w * bary[a] * bary[b];
                }
            }
        }
        for a in 0..3 {
            for b in 0..a {
                local[a][b] = local[b][a];
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..2 {
                    t.push((2 * cell[a] + c, 2 * cell[b] + c, local[a][b]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(space.num_dofs(), space.num_dofs(), &t)
}

/// `∫ Du : Dv` over all dofs, the `p = 2` stiffness.
pub fn assemble_sym_stiffness(space: &FeSpace) -> CsrMatrix {
    let mesh = space.mesh();
    let mut t = Vec::with_capacity(mesh.num_cells() * 36);
    for k in 0..mesh.num_cells() {
        let dofs = space.cell_dofs(k);
        let basis = sym_basis(space.basis_gradients(k));
        for a in 0..6 {
            for b in 0..6 {
                t.push((dofs[a], dofs[b], mesh.area(k) * sym_dot(&basis[a], &basis[b])));
            }
        }
    }
    CsrMatrix::from_triplets(space.num_dofs(), space.num_dofs(), &t)
}

/// Symmetric gradients of the six local basis functions on a cell, each as
/// `[d11, d12, d22]`.
pub(crate) fn sym_basis(g: &[[f64; 2]; 3]) -> [[f64; 3]; 6] {
    let mut out = [[0.0; 3]; 6];
    for a in 0..3 {
        // component 0: ∇(λ_a e_0) has row 0 = g_a
        out[2 * a] = [g[a][0], 0.5 * g[a][1], 0.0];
        out[2 * a + 1] = [0.0, 0.5 * g[a][0], g[a][1]];
    }
    out
}

#[inline]
pub(crate) fn sym_dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + 2.0 * a[1] * b[1] + a[2] * b[2]
}

/// `(f, φ_i)` for every dof.
pub fn assemble_load<F>(space: &FeSpace, degree: usize, f: F) -> Vec<f64>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let rule = QuadratureRule::triangle(degree);
    let mesh = space.mesh();
    let mut out = vec![0.0; space.num_dofs()];
    for k in 0..mesh.num_cells() {
        let jac = 2.0 * mesh.area(k);
        let cell = mesh.cells()[k];
        for (bary, w) in rule.barycentric() {
            let val = f(space.map_point(k, bary));
            for a in 0..3 {
                for c in 0..2 {
                    out[2 * cell[a] + c] += jac * w * bary[a] * val[c];
                }
            }
        }
    }
    out
}

/// Solves `A u = b` for the free dofs with the Dirichlet dofs fixed to
/// `boundary` (full-length), returning the full vector.
pub fn solve_with_boundary(space: &FeSpace, a: &CsrMatrix, b: &[f64], boundary: &[f64]) -> Result<Vec<f64>, FeError> {
    let mut rhs = space.restrict(b);
    for (fi, &dof) in space.free_dofs().iter().enumerate() {
        let (cols, vals) = a.row(dof);
        for (&j, &v) in cols.iter().zip(vals) {
            if space.free_index(j).is_none() {
                rhs[fi] -= v * boundary[j];
            }
        }
    }
    let reduced = space.reduce_matrix(a);
    let x = Cholesky::factor(&reduced)?.solve(&rhs)?;
    Ok(space.prolong(&x, boundary))
}

/// `L²` projection: `(u_h, v_h) = (g, v_h)` for all test functions of the
/// target space selected by `mode`.
pub fn l2_project<G>(space: &FeSpace, g: G, mode: BoundaryMode) -> Result<FeFunction, FeError>
where
    G: Fn([f64; 2]) -> [f64; 2],
{
    let mass = assemble_mass(space);
    let b = assemble_load(space, super::DEFAULT_QUAD_DEGREE, &g);
    let coefficients = match mode {
        BoundaryMode::Keep => Cholesky::factor(&mass)?.solve(&b)?,
        BoundaryMode::Zero => solve_with_boundary(space, &mass, &b, &vec![0.0; space.num_dofs()])?,
        BoundaryMode::Nodal => {
            let nodal = super::interpolate_lagrange(space, &g, BoundaryMode::Keep);
            solve_with_boundary(space, &mass, &b, nodal.coefficients())?
        }
    };
    Ok(FeFunction::from_coefficients(coefficients))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::mesh::Mesh;

    #[test]
    fn reference_element_mass() {
        let mesh = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], vec![true; 3]);
        let s = FeSpace::new(mesh);
        let m = assemble_mass(&s);
        let area = 0.5;
        for a in 0..3 {
            for b in 0..3 {
                let expected = area / 12.0 * if a == b { 2.0 } else { 1.0 };
                assert!((m.get(2 * a, 2 * b) - expected).abs() < 1e-16);
                assert!((m.get(2 * a + 1, 2 * b + 1) - expected).abs() < 1e-16);
                assert_eq!(m.get(2 * a, 2 * b + 1), 0.0);
            }
        }
    }

    #[test]
    fn mass_row_sums_partition_area() {
        let s = FeSpace::unit_square(5);
        let m = assemble_mass(&s);
        assert_eq!(m.asymmetry(), 0.0);
        let sums = m.row_sums();
        let even: f64 = sums.iter().step_by(2).sum();
        let odd: f64 = sums.iter().skip(1).step_by(2).sum();
        assert!((even - 1.0).abs() < 1e-13);
        assert!((odd - 1.0).abs() < 1e-13);
    }

    #[test]
    fn stiffness_kills_rigid_motions() {
        let s = FeSpace::unit_square(4);
        let k = assemble_sym_stiffness(&s);
        let mut rot = vec![0.0; s.num_dofs()];
        for (v, x) in s.mesh().vertices().iter().enumerate() {
            rot[2 * v] = -x[1] + 0.3;
            rot[2 * v + 1] = x[0] - 0.1;
        }
        assert!(crate::linalg::norm2(&k.mul_vec(&rot)) < 1e-13);
    }

    #[test]
    fn projection_is_identity_on_the_space() {
        let s = FeSpace::unit_square(4);
        let g = |x: [f64; 2]| [1.0 + x[0] - 2.0 * x[1], x[0] * 0.5];
        let u = l2_project(&s, g, BoundaryMode::Keep).unwrap();
        for (v, x) in s.mesh().vertices().iter().enumerate() {
            let e = g(*x);
            assert!((u.vertex_value(v)[0] - e[0]).abs() < 1e-10);
            assert!((u.vertex_value(v)[1] - e[1]).abs() < 1e-10);
        }
        let nodal = l2_project(&s, g, BoundaryMode::Nodal).unwrap();
        for (a, b) in nodal.coefficients().iter().zip(u.coefficients()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_mode_is_galerkin_orthogonal() {
        let s = FeSpace::unit_square(6);
        let g = |_: [f64; 2]| [1.0, -2.0];
        let u = l2_project(&s, g, BoundaryMode::Zero).unwrap();
        assert!(u.is_in_vh(&s));
        let m = assemble_mass(&s);
        let b = assemble_load(&s, 5, g);
        let res: Vec<f64> = m.mul_vec(u.coefficients()).iter().zip(&b).map(|(x, y)| x - y).collect();
        for (i, &dof) in s.free_dofs().iter().enumerate() {
            assert!(res[dof].abs() < 1e-10, "free dof {i}");
        }
        assert!(dot(&res, u.coefficients()).abs() < 1e-10);
    }
}
