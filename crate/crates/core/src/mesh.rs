//! Conforming triangulations of the unit square.
//!
//! Cells are stored counter-clockwise. Every triangle of a structured mesh is
//! a right isosceles triangle, and red refinement produces similar children,
//! so the shape constant `γ₀ = max h_K/ρ_K` is `1 + √2` for every member of a
//! family.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MeshError {
    #[error("cell index {index} out of range ({count} cells)")]
    CellIndex { index: usize, count: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    areas: Vec<f64>,
    diameters: Vec<f64>,
    /// Inscribed-ball diameters `ρ_K`.
    inscribed: Vec<f64>,
    // vertex → cells, CSR layout
    star_offsets: Vec<usize>,
    star_cells: Vec<usize>,
}

/// Counts and shape numbers, printable as JSON by the CLI.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeshStats {
    pub vertices: usize,
    pub cells: usize,
    pub boundary_vertices: usize,
    pub h: f64,
    pub gamma0: f64,
    pub total_area: f64,
    pub max_patch_size: usize,
    /// `max_K |S_K| / |K|`.
    pub max_patch_ratio: f64,
}

/// `(n+1)²` vertices, lexicographic in `(y, x)`; each square is cut along
/// its `/` diagonal into two right triangles.
pub fn unit_square_mesh(n: usize) -> Mesh {
    assert!(n >= 1, "unit_square_mesh needs n >= 1");
    let nf = n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / nf, j as f64 / nf]);
            boundary.push(i == 0 || j == 0 || i == n || j == n);
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            cells.push([a, b, c]);
            cells.push([a, c, d]);
        }
    }
    Mesh::from_parts(vertices, cells, boundary)
}

/// Red refinement: every triangle is split at its edge midpoints into four
/// similar children. Old vertices keep their indices.
pub fn refine_uniform(m: &Mesh) -> Mesh {
    let edges = m.edge_counts();
    let mut vertices = m.vertices.clone();
    let mut boundary = m.boundary.clone();
    let mut midpoint = BTreeMap::new();
    for (&(a, b), &count) in &edges {
        let (pa, pb) = (m.vertices[a], m.vertices[b]);
        midpoint.insert((a, b), vertices.len());
        vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        boundary.push(count == 1);
    }
    let mid = |a: usize, b: usize| midpoint[&(a.min(b), a.max(b))];
    let mut cells = Vec::with_capacity(4 * m.cells.len());
    for &[a, b, c] in &m.cells {
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        cells.push([a, ab, ca]);
        cells.push([ab, b, bc]);
        cells.push([ca, bc, c]);
        cells.push([ab, bc, ca]);
    }
    Mesh::from_parts(vertices, cells, boundary)
}

/// `base` followed by `levels − 1` successive red refinements.
pub fn refinement_family(base: &Mesh, levels: usize) -> Vec<Mesh> {
    let mut out: Vec<Mesh> = Vec::with_capacity(levels);
    if levels == 0 {
        return out;
    }
    out.push(base.clone());
    for _ in 1..levels {
        let next = refine_uniform(out.last().unwrap());
        out.push(next);
    }
    out
}

impl Mesh {
    /// Builds the derived per-cell data. Cells with clockwise orientation are
    /// flipped; degenerate cells are a programming error.
    pub fn from_parts(vertices: Vec<[f64; 2]>, mut cells: Vec<[usize; 3]>, boundary: Vec<bool>) -> Mesh {
        assert_eq!(vertices.len(), boundary.len());
        let mut areas = Vec::with_capacity(cells.len());
        let mut diameters = Vec::with_capacity(cells.len());
        let mut inscribed = Vec::with_capacity(cells.len());
        for cell in cells.iter_mut() {
            let [a, b, c] = cell.map(|v| vertices[v]);
            let mut signed = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
            if signed < 0.0 {
                cell.swap(1, 2);
                signed = -signed;
            }
            assert!(signed > 0.0, "degenerate cell {cell:?}");
            let lab = dist(a, b);
            let lbc = dist(b, c);
            let lca = dist(c, a);
            areas.push(signed);
            diameters.push(lab.max(lbc).max(lca));
            inscribed.push(4.0 * signed / (lab + lbc + lca));
        }

        let mut star_offsets = vec![0usize; vertices.len() + 1];
        for cell in &cells {
            for &v in cell {
                star_offsets[v + 1] += 1;
            }
        }
        for i in 0..vertices.len() {
            star_offsets[i + 1] += star_offsets[i];
        }
        let mut fill = star_offsets.clone();
        let mut star_cells = vec![0usize; star_offsets[vertices.len()]];
        for (k, cell) in cells.iter().enumerate() {
            for &v in cell {
                star_cells[fill[v]] = k;
                fill[v] += 1;
            }
        }

        Mesh {
            vertices,
            cells,
            boundary,
            areas,
            diameters,
            inscribed,
            star_offsets,
            star_cells,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn cell_coords(&self, k: usize) -> [[f64; 2]; 3] {
        self.cells[k].map(|v| self.vertices[v])
    }

    pub fn area(&self, k: usize) -> f64 {
        self.areas[k]
    }

    /// `h_K`.
    pub fn diameter(&self, k: usize) -> f64 {
        self.diameters[k]
    }

    /// `ρ_K`, the diameter of the inscribed circle.
    pub fn inscribed_diameter(&self, k: usize) -> f64 {
        self.inscribed[k]
    }

    /// `h = max_K h_K`.
    pub fn h(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    /// `γ₀ = max_K h_K/ρ_K`.
    pub fn gamma0(&self) -> f64 {
        self.diameters
            .iter()
            .zip(&self.inscribed)
            .map(|(h, r)| h / r)
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        // compensated summation
        let mut sum = 0.0;
        let mut comp = 0.0;
        for &a in &self.areas {
            let y = a - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    /// Cells containing vertex `v`.
    pub fn vertex_star(&self, v: usize) -> &[usize] {
        &self.star_cells[self.star_offsets[v]..self.star_offsets[v + 1]]
    }

    /// `S_K`: all cells sharing at least one vertex with `K`, including `K`,
    /// in increasing order.
    pub fn patch(&self, k: usize) -> Result<Vec<usize>, MeshError> {
        if k >= self.cells.len() {
            return Err(MeshError::CellIndex {
                index: k,
                count: self.cells.len(),
            });
        }
        let mut out: Vec<usize> = self.cells[k]
            .iter()
            .flat_map(|&v| self.vertex_star(v).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn patch_area(&self, k: usize) -> Result<f64, MeshError> {
        Ok(self.patch(k)?.iter().map(|&j| self.areas[j]).sum())
    }

    /// Undirected edges `(min, max)` with the number of cells containing them.
    pub fn edge_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut edges = BTreeMap::new();
        for &[a, b, c] in &self.cells {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                *edges.entry((u.min(v), u.max(v))).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Conformity: every edge lies in one cell (boundary) or two (interior),
    /// and the boundary flags agree with the boundary edges.
    pub fn is_conforming(&self) -> bool {
        let mut on_boundary_edge = vec![false; self.vertices.len()];
        for (&(a, b), &count) in &self.edge_counts() {
            match count {
                1 => {
                    on_boundary_edge[a] = true;
                    on_boundary_edge[b] = true;
                }
                2 => {}
                _ => return false,
            }
        }
        on_boundary_edge == self.boundary
    }

    pub fn stats(&self) -> MeshStats {
        let mut max_patch_size = 0;
        let mut max_patch_ratio = 0.0f64;
        for k in 0..self.cells.len() {
            let patch = self.patch(k).expect("index in range");
            let area: f64 = patch.iter().map(|&j| self.areas[j]).sum();
            max_patch_size = max_patch_size.max(patch.len());
            max_patch_ratio = max_patch_ratio.max(area / self.areas[k]);
        }
        MeshStats {
            vertices: self.num_vertices(),
            cells: self.num_cells(),
            boundary_vertices: self.boundary.iter().filter(|&&b| b).count(),
            h: self.h(),
            gamma0: self.gamma0(),
            total_area: self.total_area(),
            max_patch_size,
            max_patch_ratio,
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    math::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = core::f64::consts::SQRT_2;

    #[test]
    fn counts_and_h() {
        let m = unit_square_mesh(1);
        assert_eq!((m.num_vertices(), m.num_cells()), (4, 2));
        assert!((m.h() - SQRT2).abs() < 1e-15);
        let m = unit_square_mesh(4);
        assert_eq!((m.num_vertices(), m.num_cells()), (25, 32));
        assert!((m.h() - SQRT2 / 4.0).abs() < 1e-15);
        assert_eq!(m.boundary_flags().iter().filter(|&&b| b).count(), 16);
    }

    #[test]
    fn gamma0_is_mesh_independent() {
        let expected = 1.0 + SQRT2;
        for n in [1, 2, 3, 7, 16] {
            assert!((unit_square_mesh(n).gamma0() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_halves_h_and_keeps_shape() {
        let base = unit_square_mesh(1);
        let fine = refine_uniform(&base);
        assert_eq!(fine.num_cells(), 8);
        assert_eq!(fine.num_vertices(), 9);
        assert_eq!(fine.h(), base.h() / 2.0);
        assert!((fine.gamma0() - base.gamma0()).abs() < 1e-12);
        assert!((fine.total_area() - 1.0).abs() < 1e-12);
        assert!(fine.is_conforming());
        // the centre vertex is the only interior one
        let interior: Vec<_> = (0..9).filter(|&v| !fine.is_boundary(v)).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(fine.vertices()[interior[0]], [0.5, 0.5]);
    }

    #[test]
    fn cells_are_counter_clockwise() {
        let m = refine_uniform(&unit_square_mesh(3));
        for k in 0..m.num_cells() {
            let [a, b, c] = m.cell_coords(k);
            let s = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            assert!(s > 0.0);
        }
    }

    #[test]
    fn patches() {
        let m = unit_square_mesh(1);
        assert_eq!(m.patch(0).unwrap(), vec![0, 1]);
        assert_eq!(m.patch(5), Err(MeshError::CellIndex { index: 5, count: 2 }));
        let m = unit_square_mesh(4);
        // lower triangle of square (1,1)
        let k = 2 * (4 + 1);
        assert_eq!(m.patch(k).unwrap().len(), 13);
        for k in 0..m.num_cells() {
            assert!(m.patch(k).unwrap().contains(&k));
        }
    }
}
