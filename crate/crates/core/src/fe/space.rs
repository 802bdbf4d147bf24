use alloc::vec;
use alloc::vec::Vec;

use super::QuadratureRule;
use crate::linalg::CsrMatrix;
use crate::mesh::{unit_square_mesh, Mesh};
use crate::structure::{SymTensor, Tensor};

/// Number of vector components per vertex.
pub const COMPONENTS: usize = 2;

const NOT_FREE: usize = usize::MAX;

/// Continuous piecewise linear vector fields on a mesh. Scalar dof
/// `2·v + c` is component `c` at vertex `v`; dofs on boundary vertices are
/// the Dirichlet dofs.
#[derive(Clone, Debug)]
pub struct FeSpace {
    mesh: Mesh,
    dirichlet: Vec<bool>,
    free_index: Vec<usize>,
    free: Vec<usize>,
    /// Gradients of the barycentric coordinates per cell.
    grads: Vec<[[f64; 2]; 3]>,
}

impl FeSpace {
    pub fn new(mesh: Mesh) -> Self {
        let n = COMPONENTS * mesh.num_vertices();
        let mut dirichlet = vec![false; n];
        for v in 0..mesh.num_vertices() {
            for c in 0..COMPONENTS {
                dirichlet[COMPONENTS * v + c] = mesh.is_boundary(v);
            }
        }
        let mut free_index = vec![NOT_FREE; n];
        let mut free = Vec::new();
        for (dof, &fixed) in dirichlet.iter().enumerate() {
            if !fixed {
                free_index[dof] = free.len();
                free.push(dof);
            }
        }
        let grads = (0..mesh.num_cells())
            .map(|k| barycentric_gradients(mesh.cell_coords(k)))
            .collect();
        Self {
            mesh,
            dirichlet,
            free_index,
            free,
            grads,
        }
    }

    pub fn unit_square(n: usize) -> Self {
        Self::new(unit_square_mesh(n))
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn num_dofs(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn dof(&self, vertex: usize, component: usize) -> usize {
        COMPONENTS * vertex + component
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    /// Free dofs in increasing order.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        match self.free_index[dof] {
            NOT_FREE => None,
            i => Some(i),
        }
    }

    /// Dofs of cell `k`, ordered vertex-major.
    pub fn cell_dofs(&self, k: usize) -> [usize; 6] {
        let [a, b, c] = self.mesh.cells()[k];
        [2 * a, 2 * a + 1, 2 * b, 2 * b + 1, 2 * c, 2 * c + 1]
    }

    pub fn basis_gradients(&self, k: usize) -> &[[f64; 2]; 3] {
        &self.grads[k]
    }

    /// Physical point with barycentric coordinates `bary` in cell `k`.
    pub fn map_point(&self, k: usize, bary: [f64; 3]) -> [f64; 2] {
        let [a, b, c] = self.mesh.cell_coords(k);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// `∫_Ω f` with `f(cell, x, barycentric)` sampled at the points of a
    /// degree-`degree` rule.
    pub fn integrate<F>(&self, degree: usize, mut f: F) -> f64
    where
        F: FnMut(usize, [f64; 2], [f64; 3]) -> f64,
    {
        let rule = QuadratureRule::triangle(degree);
        let mut total = 0.0;
        for k in 0..self.mesh.num_cells() {
            let jac = 2.0 * self.mesh.area(k);
            let mut cell = 0.0;
            for (bary, w) in rule.barycentric() {
                cell += w * f(k, self.map_point(k, bary), bary);
            }
            total += jac * cell;
        }
        total
    }

    /// Free-dof entries of a full vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }

    /// Full vector with free entries from `free` and Dirichlet entries from
    /// `boundary` (a full-length vector).
    pub fn prolong(&self, free: &[f64], boundary: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_dofs()];
        for (dof, v) in out.iter_mut().enumerate() {
            *v = match self.free_index(dof) {
                Some(i) => free[i],
                None => boundary[dof],
            };
        }
        out
    }

    /// Free × free block of a full matrix.
    pub fn reduce_matrix(&self, a: &CsrMatrix) -> CsrMatrix {
        let mut t = Vec::with_capacity(a.nnz());
        for (fi, &dof) in self.free.iter().enumerate() {
            let (cols, vals) = a.row(dof);
            for (&j, &v) in cols.iter().zip(vals) {
                if let Some(fj) = self.free_index(j) {
                    t.push((fi, fj, v));
                }
            }
        }
        CsrMatrix::from_triplets(self.num_free(), self.num_free(), &t)
    }
}

fn barycentric_gradients([a, b, c]: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let g1 = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
    let g2 = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
    [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]
}

/// Coefficient vector of a member of an [`FeSpace`]; the space itself is
/// passed alongside wherever geometry is needed.
#[derive(Clone, Debug, PartialEq)]
pub struct FeFunction {
    coefficients: Vec<f64>,
}

impl FeFunction {
    pub fn zeros(space: &FeSpace) -> Self {
        Self {
            coefficients: vec![0.0; space.num_dofs()],
        }
    }

    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    /// Value at vertex `v`.
    pub fn vertex_value(&self, v: usize) -> [f64; 2] {
        [self.coefficients[2 * v], self.coefficients[2 * v + 1]]
    }

    pub fn value(&self, space: &FeSpace, k: usize, bary: [f64; 3]) -> [f64; 2] {
        let cell = space.mesh().cells()[k];
        let mut out = [0.0; 2];
        for (i, &v) in cell.iter().enumerate() {
            let u = self.vertex_value(v);
            out[0] += bary[i] * u[0];
            out[1] += bary[i] * u[1];
        }
        out
    }

    /// `∇u` on cell `k`, `[i][j] = ∂_j u_i`.
    pub fn gradient(&self, space: &FeSpace, k: usize) -> Tensor<2> {
        let cell = space.mesh().cells()[k];
        let g = space.basis_gradients(k);
        let mut t = Tensor::zero();
        for (a, &v) in cell.iter().enumerate() {
            let u = self.vertex_value(v);
            for i in 0..2 {
                for j in 0..2 {
                    t.entries[i][j] += u[i] * g[a][j];
                }
            }
        }
        t
    }

    /// `Du = sym ∇u` on cell `k`.
    pub fn sym_gradient(&self, space: &FeSpace, k: usize) -> SymTensor<2> {
        self.gradient(space, k).sym()
    }

    /// Whether the Dirichlet coefficients vanish, i.e. `u ∈ V_h`.
    pub fn is_in_vh(&self, space: &FeSpace) -> bool {
        space
            .dirichlet_mask()
            .iter()
            .zip(&self.coefficients)
            .all(|(&fixed, &c)| !fixed || c == 0.0)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        Self {
            coefficients: self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}
