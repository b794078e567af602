//! Finite-element spaces over a mesh: a broken (discontinuous) modal space
//! for the pressure and a continuous piecewise-linear vector space for the
//! displacement.
//!
//! The modal basis is orthonormal on the reference element, and the physical
//! basis carries a `1/sqrt(det B)` factor, so the cell mass matrix is the
//! identity and L2 projection is a plain quadrature loop.

use crate::basis::{IntervalBasis, TriangleBasis};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quad::{gauss_legendre_exact, triangle_quadrature};

/// Affine map from the reference element to a physical cell.
#[derive(Debug, Clone, Copy)]
pub struct CellMap {
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub inv_jac: [[f64; 2]; 2],
    pub det: f64,
}

impl CellMap {
    fn for_cell(mesh: &Mesh, c: usize) -> CellMap {
        let cell = &mesh.cells[c];
        if mesh.dim == 1 {
            let (a, b) = (mesh.vertices[cell[0]][0], mesh.vertices[cell[1]][0]);
            let h = b - a;
            CellMap {
                origin: [a, 0.0],
                jac: [[h, 0.0], [0.0, 1.0]],
                inv_jac: [[1.0 / h, 0.0], [0.0, 1.0]],
                det: h,
            }
        } else {
            let [p0, p1, p2] = [mesh.vertices[cell[0]], mesh.vertices[cell[1]], mesh.vertices[cell[2]]];
            let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            let inv_jac = [
                [jac[1][1] / det, -jac[0][1] / det],
                [-jac[1][0] / det, jac[0][0] / det],
            ];
            CellMap { origin: p0, jac, inv_jac, det }
        }
    }

    pub fn to_physical(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv_jac[0][0] * d[0] + self.inv_jac[0][1] * d[1],
            self.inv_jac[1][0] * d[0] + self.inv_jac[1][1] * d[1],
        ]
    }

    /// Pulls a reference gradient back to physical coordinates: `B^-T g`.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_jac[0][0] * g[0] + self.inv_jac[1][0] * g[1],
            self.inv_jac[0][1] * g[0] + self.inv_jac[1][1] * g[1],
        ]
    }
}

enum ModalBasis {
    Interval(IntervalBasis),
    Triangle(TriangleBasis),
}

/// Broken polynomial space of total degree `k`; no dof is shared between
/// cells. Global dof = `cell * ndof_per_cell + local`.
pub struct DgSpace<'m> {
    pub mesh: &'m Mesh,
    pub degree: usize,
    basis: ModalBasis,
    maps: Vec<CellMap>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
}

impl<'m> DgSpace<'m> {
    pub fn new(mesh: &'m Mesh, degree: usize) -> Result<Self> {
        if !(1..=5).contains(&degree) {
            return Err(Error::InvalidArgument(format!(
                "polynomial degree {degree} outside the supported range 1..=5"
            )));
        }
        let basis = match mesh.dim {
            1 => ModalBasis::Interval(IntervalBasis::new(degree)),
            2 => ModalBasis::Triangle(TriangleBasis::new(degree)),
            d => return Err(Error::InvalidArgument(format!("unsupported mesh dimension {d}"))),
        };
        let maps = (0..mesh.n_cells()).map(|c| CellMap::for_cell(mesh, c)).collect();
        Ok(DgSpace { mesh, degree, basis, maps })
    }

    pub fn ndof_per_cell(&self) -> usize {
        match &self.basis {
            ModalBasis::Interval(b) => b.ndof(),
            ModalBasis::Triangle(b) => b.ndof(),
        }
    }

    pub fn ndof(&self) -> usize {
        self.mesh.n_cells() * self.ndof_per_cell()
    }

    pub fn global_dof(&self, cell: usize, local: usize) -> usize {
        cell * self.ndof_per_cell() + local
    }

    pub fn cell_map(&self, cell: usize) -> &CellMap {
        &self.maps[cell]
    }

    /// Reference-element basis values.
    pub fn eval_basis_ref(&self, r: [f64; 2]) -> Vec<f64> {
        match &self.basis {
            ModalBasis::Interval(b) => b.eval(r[0]),
            ModalBasis::Triangle(b) => b.eval(r[0], r[1]),
        }
    }

    /// Reference-element basis values and gradients.
    pub fn eval_basis_grad_ref(&self, r: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        match &self.basis {
            ModalBasis::Interval(b) => {
                let (v, g) = b.eval_grad(r[0]);
                (v, g.into_iter().map(|gx| [gx, 0.0]).collect())
            }
            ModalBasis::Triangle(b) => b.eval_grad(r[0], r[1]),
        }
    }

    /// Physical basis values on `cell` at a physical point.
    pub fn basis_at(&self, cell: usize, x: [f64; 2]) -> Vec<f64> {
        let map = &self.maps[cell];
        let scale = 1.0 / map.det.sqrt();
        let mut v = self.eval_basis_ref(map.to_reference(x));
        for vi in v.iter_mut() {
            *vi *= scale;
        }
        v
    }

    /// Physical basis values and gradients on `cell` at a physical point.
    pub fn basis_grad_at(&self, cell: usize, x: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let map = &self.maps[cell];
        let scale = 1.0 / map.det.sqrt();
        let (mut v, g) = self.eval_basis_grad_ref(map.to_reference(x));
        for vi in v.iter_mut() {
            *vi *= scale;
        }
        let g = g
            .into_iter()
            .map(|gr| {
                let gp = map.push_gradient(gr);
                [gp[0] * scale, gp[1] * scale]
            })
            .collect();
        (v, g)
    }

    /// Quadrature on a physical cell; weights include the Jacobian.
    pub fn cell_quadrature(&self, cell: usize, degree: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
        let map = &self.maps[cell];
        match self.mesh.dim {
            1 => {
                let (r, w) = gauss_legendre_exact(degree);
                let pts = r.iter().map(|&ri| map.to_physical([ri, 0.0])).collect();
                let wts = w.iter().map(|&wi| wi * map.det).collect();
                (pts, wts)
            }
            _ => {
                let (r, w) = triangle_quadrature(degree);
                let pts = r.iter().map(|&ri| map.to_physical(ri)).collect();
                let wts = w.iter().map(|&wi| wi * map.det).collect();
                (pts, wts)
            }
        }
    }

    /// Quadrature along a physical face; weights sum to the face measure
    /// (a single unit-weight point in 1d).
    pub fn face_quadrature(&self, face: usize, degree: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
        let f = &self.mesh.faces[face];
        if self.mesh.dim == 1 {
            (vec![self.mesh.vertices[f.vertices[0]]], vec![1.0])
        } else {
            let (a, b) = (self.mesh.vertices[f.vertices[0]], self.mesh.vertices[f.vertices[1]]);
            let (r, w) = gauss_legendre_exact(degree);
            let pts = r
                .iter()
                .map(|&t| [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t])
                .collect();
            let wts = w.iter().map(|&wi| wi * f.measure).collect();
            (pts, wts)
        }
    }

    /// L2 projection of a scalar field, exact for polynomials up to the
    /// space degree.
    pub fn project(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        let nloc = self.ndof_per_cell();
        let mut coeffs = vec![0.0; self.ndof()];
        for c in 0..self.mesh.n_cells() {
            let (pts, wts) = self.cell_quadrature(c, 2 * self.degree + 3);
            for (x, w) in pts.iter().zip(&wts) {
                let phi = self.basis_at(c, *x);
                let fx = f(*x);
                for i in 0..nloc {
                    coeffs[self.global_dof(c, i)] += w * fx * phi[i];
                }
            }
        }
        coeffs
    }

    pub fn eval(&self, coeffs: &[f64], cell: usize, x: [f64; 2]) -> f64 {
        let phi = self.basis_at(cell, x);
        phi.iter()
            .enumerate()
            .map(|(i, p)| coeffs[self.global_dof(cell, i)] * p)
            .sum()
    }

    pub fn eval_grad(&self, coeffs: &[f64], cell: usize, x: [f64; 2]) -> [f64; 2] {
        let (_, grads) = self.basis_grad_at(cell, x);
        let mut g = [0.0, 0.0];
        for (i, gi) in grads.iter().enumerate() {
            let ci = coeffs[self.global_dof(cell, i)];
            g[0] += ci * gi[0];
            g[1] += ci * gi[1];
        }
        g
    }

    /// Field value at each cell centroid, in cell order.
    pub fn cell_midpoint_values(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.mesh.n_cells())
            .map(|c| self.eval(coeffs, c, self.mesh.cell_centroid(c)))
            .collect()
    }

    /// L2 and H1-seminorm errors against a smooth exact solution.
    pub fn error_norms(
        &self,
        coeffs: &[f64],
        exact: impl Fn([f64; 2]) -> f64,
        exact_grad: impl Fn([f64; 2]) -> [f64; 2],
    ) -> ErrorNorms {
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for c in 0..self.mesh.n_cells() {
            let (pts, wts) = self.cell_quadrature(c, 2 * self.degree + 3);
            for (x, w) in pts.iter().zip(&wts) {
                let diff = self.eval(coeffs, c, *x) - exact(*x);
                l2 += w * diff * diff;
                let gd = self.eval_grad(coeffs, c, *x);
                let ge = exact_grad(*x);
                h1 += w * ((gd[0] - ge[0]).powi(2) + (gd[1] - ge[1]).powi(2));
            }
        }
        ErrorNorms { l2: l2.sqrt(), h1_semi: h1.sqrt() }
    }
}

/// Continuous piecewise-linear vector space; value dimension equals the mesh
/// dimension. Dof numbering is `vertex * dim + component`.
pub struct CgVectorSpace<'m> {
    pub mesh: &'m Mesh,
    pub dim: usize,
}

impl<'m> CgVectorSpace<'m> {
    pub fn new(mesh: &'m Mesh, degree: usize) -> Result<Self> {
        if degree != 1 {
            return Err(Error::InvalidArgument(
                "only linear continuous elements are implemented".into(),
            ));
        }
        Ok(CgVectorSpace { mesh, dim: mesh.dim })
    }

    pub fn ndof(&self) -> usize {
        self.mesh.vertices.len() * self.dim
    }

    pub fn dof(&self, vertex: usize, comp: usize) -> usize {
        vertex * self.dim + comp
    }

    /// Gradients of the barycentric hat functions on a cell, constant over
    /// the cell. Row i is the gradient of the hat tied to local vertex i.
    pub fn hat_gradients(&self, cell: usize) -> Vec<[f64; 2]> {
        let verts = &self.mesh.cells[cell];
        if self.mesh.dim == 1 {
            let h = self.mesh.vertices[verts[1]][0] - self.mesh.vertices[verts[0]][0];
            vec![[-1.0 / h, 0.0], [1.0 / h, 0.0]]
        } else {
            let map = CellMap::for_cell(self.mesh, cell);
            [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]
                .iter()
                .map(|&g| map.push_gradient(g))
                .collect()
        }
    }

    /// Hat-function values at a physical point of `cell`.
    pub fn hat_values(&self, cell: usize, x: [f64; 2]) -> Vec<f64> {
        let map = CellMap::for_cell(self.mesh, cell);
        let r = map.to_reference(x);
        if self.mesh.dim == 1 {
            vec![1.0 - r[0], r[0]]
        } else {
            vec![1.0 - r[0] - r[1], r[0], r[1]]
        }
    }

    /// Displacement vector at a physical point of `cell`.
    pub fn eval(&self, coeffs: &[f64], cell: usize, x: [f64; 2]) -> [f64; 2] {
        let hats = self.hat_values(cell, x);
        let verts = &self.mesh.cells[cell];
        let mut u = [0.0, 0.0];
        for (lv, &v) in verts.iter().enumerate() {
            for comp in 0..self.dim {
                u[comp] += hats[lv] * coeffs[self.dof(v, comp)];
            }
        }
        u
    }

    /// Divergence of the displacement on a cell (constant for linears).
    pub fn cell_divergence(&self, coeffs: &[f64], cell: usize) -> f64 {
        let grads = self.hat_gradients(cell);
        let verts = &self.mesh.cells[cell];
        let mut div = 0.0;
        for (lv, &v) in verts.iter().enumerate() {
            for comp in 0..self.dim {
                div += coeffs[self.dof(v, comp)] * grads[lv][comp];
            }
        }
        div
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dof_counts_match_formulas() {
        let m1 = Mesh::unit_interval(4).unwrap();
        for k in 1..=5 {
            let s = DgSpace::new(&m1, k).unwrap();
            assert_eq!(s.ndof_per_cell(), k + 1);
            assert_eq!(s.ndof(), 4 * (k + 1));
        }
        let m2 = Mesh::unit_square(2).unwrap();
        for k in 1..=5 {
            let s = DgSpace::new(&m2, k).unwrap();
            assert_eq!(s.ndof_per_cell(), (k + 1) * (k + 2) / 2);
        }
        assert!(DgSpace::new(&m1, 0).is_err());
        assert!(DgSpace::new(&m1, 6).is_err());
    }

    #[test]
    fn mass_matrix_is_identity() {
        for mesh in [Mesh::unit_interval(3).unwrap(), Mesh::unit_square(2).unwrap()] {
            let space = DgSpace::new(&mesh, 3).unwrap();
            let n = space.ndof_per_cell();
            for c in [0usize, mesh.n_cells() - 1] {
                let (pts, wts) = space.cell_quadrature(c, 2 * 3 + 1);
                let mut m = vec![vec![0.0; n]; n];
                for (x, w) in pts.iter().zip(&wts) {
                    let phi = space.basis_at(c, *x);
                    for i in 0..n {
                        for j in 0..n {
                            m[i][j] += w * phi[i] * phi[j];
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert_abs_diff_eq!(m[i][j], want, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let mesh = Mesh::unit_square(2).unwrap();
        let space = DgSpace::new(&mesh, 2).unwrap();
        let f = |x: [f64; 2]| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1] - x[1] * x[1];
        let coeffs = space.project(f);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let c = rng.gen_range(0..mesh.n_cells());
            // Random point inside the cell via barycentric sampling.
            let mut l = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
            let s: f64 = l.iter().sum();
            l.iter_mut().for_each(|v| *v /= s);
            let vs = &mesh.cells[c];
            let x = [
                l[0] * mesh.vertices[vs[0]][0] + l[1] * mesh.vertices[vs[1]][0] + l[2] * mesh.vertices[vs[2]][0],
                l[0] * mesh.vertices[vs[0]][1] + l[1] * mesh.vertices[vs[1]][1] + l[2] * mesh.vertices[vs[2]][1],
            ];
            assert_abs_diff_eq!(space.eval(&coeffs, c, x), f(x), epsilon = 1e-11);
        }
    }

    #[test]
    fn gradient_of_projection_matches_linear_field() {
        let mesh = Mesh::unit_interval(4).unwrap();
        let space = DgSpace::new(&mesh, 1).unwrap();
        let coeffs = space.project(|x| 3.0 * x[0] - 1.0);
        for c in 0..mesh.n_cells() {
            let g = space.eval_grad(&coeffs, c, mesh.cell_centroid(c));
            assert_abs_diff_eq!(g[0], 3.0, epsilon = 1e-11);
            assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn error_norms_vanish_for_represented_solution() {
        let mesh = Mesh::unit_square(3).unwrap();
        let space = DgSpace::new(&mesh, 1).unwrap();
        let coeffs = space.project(|x| 2.0 * x[0] + x[1]);
        let norms = space.error_norms(&coeffs, |x| 2.0 * x[0] + x[1], |_| [2.0, 1.0]);
        assert!(norms.l2 < 1e-12);
        assert!(norms.h1_semi < 1e-11);
    }

    #[test]
    fn midpoint_values_follow_cell_order() {
        let mesh = Mesh::unit_interval(4).unwrap();
        let space = DgSpace::new(&mesh, 1).unwrap();
        let coeffs = space.project(|x| x[0]);
        let mids = space.cell_midpoint_values(&coeffs);
        assert_eq!(mids.len(), 4);
        for (c, v) in mids.iter().enumerate() {
            assert_abs_diff_eq!(*v, (c as f64 + 0.5) / 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn face_quadrature_weights_sum_to_face_measure() {
        let mesh = Mesh::unit_square(2).unwrap();
        let space = DgSpace::new(&mesh, 2).unwrap();
        for f in 0..mesh.faces.len() {
            let (_, w) = space.face_quadrature(f, 5);
            let total: f64 = w.iter().sum();
            assert_abs_diff_eq!(total, mesh.faces[f].measure, epsilon = 1e-13);
        }
    }

    #[test]
    fn cg_space_is_continuous_across_faces() {
        let mesh = Mesh::unit_square(3).unwrap();
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coeffs: Vec<f64> = (0..space.ndof()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dg = DgSpace::new(&mesh, 1).unwrap();
        for f in mesh.interior_faces() {
            let (plus, minus) = match mesh.faces[f].adjacency {
                crate::mesh::FaceAdjacency::Interior { plus, minus } => (plus, minus),
                _ => unreachable!(),
            };
            let (pts, _) = dg.face_quadrature(f, 3);
            for x in pts {
                let up = space.eval(&coeffs, plus, x);
                let um = space.eval(&coeffs, minus, x);
                assert_abs_diff_eq!(up[0], um[0], epsilon = 1e-12);
                assert_abs_diff_eq!(up[1], um[1], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cg_divergence_of_linear_field_is_exact() {
        let mesh = Mesh::unit_square(2).unwrap();
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        // u = (2x, 3y) has divergence 5 everywhere.
        let mut coeffs = vec![0.0; space.ndof()];
        for (v, xy) in mesh.vertices.iter().enumerate() {
            coeffs[space.dof(v, 0)] = 2.0 * xy[0];
            coeffs[space.dof(v, 1)] = 3.0 * xy[1];
        }
        for c in 0..mesh.n_cells() {
            assert_abs_diff_eq!(space.cell_divergence(&coeffs, c), 5.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cg_rejects_higher_degree() {
        let mesh = Mesh::unit_square(1).unwrap();
        assert!(CgVectorSpace::new(&mesh, 2).is_err());
    }
}
