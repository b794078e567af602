//! Continuous-Galerkin linear elasticity with pressure coupling for the
//! staggered poroelastic step.
//!
//! The displacement solve works on effective stress: A holds
//! int sigma'(u) : eps(w) and the pore-pressure term enters the load vector
//! as +int alpha P (div w), the weak form of the total-stress divergence.
//! Traction data is the total traction vector (compressive loads are
//! negative components). Dirichlet displacement is imposed strongly by
//! symmetric elimination, so the reduced matrix stays SPD.

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, FaceAdjacency};
use crate::space::{CgVectorSpace, DgSpace};
use crate::sparse::{CooMatrix, LinearSystem};
use std::collections::BTreeMap;
use std::sync::Arc;

pub type VectorField = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

pub fn constant_vector(v: [f64; 2]) -> VectorField {
    Arc::new(move |_| v)
}

/// Lame parameters from bulk modulus and Poisson ratio.
pub fn lame_from_bulk(k: f64, nu: f64) -> Result<(f64, f64)> {
    if k <= 0.0 {
        return Err(Error::InvalidMaterial(format!("bulk modulus must be positive, got {k}")));
    }
    if nu >= 0.5 {
        return Err(Error::InvalidMaterial(
            "nu = 0.5 is the incompressible limit, which is unsupported".into(),
        ));
    }
    if nu <= -1.0 {
        return Err(Error::InvalidMaterial(format!("Poisson ratio {nu} outside (-1, 0.5)")));
    }
    let lambda = 3.0 * k * nu / (1.0 + nu);
    let mu = 3.0 * k * (1.0 - 2.0 * nu) / (2.0 * (1.0 + nu));
    Ok((lambda, mu))
}

/// Biot coefficient 1 - K/K_s; K_s may be infinite (incompressible grains).
pub fn biot_alpha(k: f64, k_s: f64) -> Result<f64> {
    if k <= 0.0 {
        return Err(Error::InvalidMaterial(format!("bulk modulus must be positive, got {k}")));
    }
    if k_s.is_infinite() {
        return Ok(1.0);
    }
    if k_s < k {
        return Err(Error::InvalidMaterial(format!(
            "grain bulk modulus {k_s} below drained bulk modulus {k}"
        )));
    }
    Ok(1.0 - k / k_s)
}

/// Bundled moduli with the derived quantities.
#[derive(Debug, Clone, Copy)]
pub struct ElasticModuli {
    pub k: f64,
    pub nu: f64,
    pub lambda: f64,
    pub mu: f64,
    pub k_s: f64,
    pub alpha: f64,
}

impl ElasticModuli {
    pub fn new(k: f64, nu: f64, k_s: f64) -> Result<Self> {
        let (lambda, mu) = lame_from_bulk(k, nu)?;
        let alpha = biot_alpha(k, k_s)?;
        Ok(ElasticModuli { k, nu, lambda, mu, k_s, alpha })
    }
}

/// Quasi-static momentum balance data. A face is a strong displacement face
/// if its tag has an entry in `dirichlet`; every other boundary face is a
/// natural (traction) face with data from `traction`, default traction-free.
#[derive(Clone)]
pub struct ElasticityProblem {
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub body_force: Option<VectorField>,
    pub dirichlet: BTreeMap<BoundaryTag, VectorField>,
    pub traction: BTreeMap<BoundaryTag, VectorField>,
}

impl ElasticityProblem {
    pub fn new(lambda: f64, mu: f64, alpha: f64, dim: usize) -> Result<Self> {
        if mu <= 0.0 {
            return Err(Error::InvalidMaterial(format!("shear modulus must be positive, got {mu}")));
        }
        if lambda + 2.0 * mu / dim as f64 <= 0.0 {
            return Err(Error::InvalidMaterial(
                "lambda + 2 mu / d must be positive for a stable material".into(),
            ));
        }
        Ok(ElasticityProblem {
            lambda,
            mu,
            alpha,
            body_force: None,
            dirichlet: BTreeMap::new(),
            traction: BTreeMap::new(),
        })
    }
}

/// Reduced system after strong Dirichlet elimination, with the bookkeeping
/// to expand a reduced solution back to the full dof vector.
pub struct ConstrainedSystem {
    pub system: LinearSystem,
    free: Vec<usize>,
    constrained_values: Vec<f64>,
}

impl ConstrainedSystem {
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = self.constrained_values.clone();
        for (r, &dof) in self.free.iter().enumerate() {
            full[dof] = reduced[r];
        }
        full
    }
}

/// Assembles the effective-stress operator, traction and body loads, and
/// the pressure coupling, then eliminates Dirichlet dofs symmetrically.
/// `pressure` is the current DG pressure field, if the problem is coupled.
pub fn assemble_elasticity(
    space: &CgVectorSpace,
    problem: &ElasticityProblem,
    pressure: Option<(&DgSpace, &[f64])>,
) -> Result<ConstrainedSystem> {
    let mesh = space.mesh;
    let dim = space.dim;
    let n = space.ndof();
    let mut coo = CooMatrix::new(n, n);
    let mut b = vec![0.0; n];

    for c in 0..mesh.n_cells() {
        let verts = &mesh.cells[c];
        let grads = space.hat_gradients(c);
        let vol = mesh.cell_measure(c);
        // Constant strains per cell: one-point integration is exact.
        for (a, &va) in verts.iter().enumerate() {
            for (bv, &vb) in verts.iter().enumerate() {
                let gg: f64 = grads[a][0] * grads[bv][0] + grads[a][1] * grads[bv][1];
                for ca in 0..dim {
                    for cb in 0..dim {
                        let mut val = problem.mu * grads[a][cb] * grads[bv][ca]
                            + problem.lambda * grads[a][ca] * grads[bv][cb];
                        if ca == cb {
                            val += problem.mu * gg;
                        }
                        coo.push(space.dof(va, ca), space.dof(vb, cb), vol * val);
                    }
                }
            }
        }
        if let Some(f) = &problem.body_force {
            // Barycentric midpoint rule, exact for linear test functions.
            let centroid = mesh.cell_centroid(c);
            let fx = f(centroid);
            let share = vol / verts.len() as f64;
            for &va in verts.iter() {
                for ca in 0..dim {
                    b[space.dof(va, ca)] += share * fx[ca];
                }
            }
        }
        if let Some((p_space, p_coeffs)) = pressure {
            // + alpha int_T P (div w); div w is constant per cell, so only
            // the cell integral of P is needed.
            let (pts, wts) = p_space.cell_quadrature(c, p_space.degree);
            let p_int: f64 = pts
                .iter()
                .zip(&wts)
                .map(|(x, w)| w * p_space.eval(p_coeffs, c, *x))
                .sum();
            for (a, &va) in verts.iter().enumerate() {
                for ca in 0..dim {
                    b[space.dof(va, ca)] += problem.alpha * p_int * grads[a][ca];
                }
            }
        }
    }

    // Traction loads on natural faces.
    for f in 0..mesh.faces.len() {
        let face = &mesh.faces[f];
        if let FaceAdjacency::Boundary { cell, tag } = face.adjacency {
            if problem.dirichlet.contains_key(&tag) {
                continue;
            }
            if let Some(t) = problem.traction.get(&tag) {
                if mesh.dim == 1 {
                    let v = face.vertices[0];
                    let tx = t(mesh.vertices[v]);
                    b[space.dof(v, 0)] += tx[0];
                    let _ = cell;
                } else {
                    // Trapezoid rule is exact for linear hats on an edge.
                    let (v0, v1) = (face.vertices[0], face.vertices[1]);
                    let half = 0.5 * face.measure;
                    for &v in [v0, v1].iter() {
                        let tx = t(mesh.vertices[v]);
                        for ca in 0..dim {
                            b[space.dof(v, ca)] += half * tx[ca];
                        }
                    }
                }
            }
        }
    }

    // Strong Dirichlet dofs collected from tagged faces.
    let mut fixed: BTreeMap<usize, f64> = BTreeMap::new();
    for f in 0..mesh.faces.len() {
        if let FaceAdjacency::Boundary { tag, .. } = mesh.faces[f].adjacency {
            if let Some(u_d) = problem.dirichlet.get(&tag) {
                for &v in &mesh.faces[f].vertices {
                    let val = u_d(mesh.vertices[v]);
                    for ca in 0..dim {
                        fixed.insert(space.dof(v, ca), val[ca]);
                    }
                }
            }
        }
    }
    if fixed.is_empty() {
        return Err(Error::RigidModes);
    }

    let full = coo.to_csr();
    let mut constrained_values = vec![0.0; n];
    for (&dof, &val) in &fixed {
        constrained_values[dof] = val;
    }
    // Move known columns to the rhs, then drop constrained rows/columns.
    for r in 0..n {
        if fixed.contains_key(&r) {
            continue;
        }
        let (cols, vals) = full.row(r);
        for (c, v) in cols.iter().zip(vals) {
            if let Some(&g) = fixed.get(c) {
                b[r] -= v * g;
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|d| !fixed.contains_key(d)).collect();
    let index_of: BTreeMap<usize, usize> = free.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let mut red = CooMatrix::new(free.len(), free.len());
    for (ri, &r) in free.iter().enumerate() {
        let (cols, vals) = full.row(r);
        for (c, v) in cols.iter().zip(vals) {
            if let Some(&ci) = index_of.get(c) {
                red.push(ri, ci, *v);
            }
        }
    }
    let rhs: Vec<f64> = free.iter().map(|&d| b[d]).collect();
    Ok(ConstrainedSystem {
        system: LinearSystem {
            matrix: red.to_csr(),
            rhs,
            symmetric: true,
            pure_neumann_warning: false,
        },
        free,
        constrained_values,
    })
}

/// Effective stress tensor on a cell (constant for linear elements).
pub fn cell_stress(space: &CgVectorSpace, problem: &ElasticityProblem, u: &[f64], cell: usize) -> [[f64; 2]; 2] {
    let grads = space.hat_gradients(cell);
    let verts = &space.mesh.cells[cell];
    let mut grad_u = [[0.0f64; 2]; 2];
    for (a, &va) in verts.iter().enumerate() {
        for comp in 0..space.dim {
            for d in 0..2 {
                grad_u[comp][d] += u[space.dof(va, comp)] * grads[a][d];
            }
        }
    }
    let eps = [
        [grad_u[0][0], 0.5 * (grad_u[0][1] + grad_u[1][0])],
        [0.5 * (grad_u[0][1] + grad_u[1][0]), grad_u[1][1]],
    ];
    let tr = eps[0][0] + eps[1][1];
    let mut sigma = [[0.0f64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            sigma[i][j] = 2.0 * problem.mu * eps[i][j];
        }
        sigma[i][i] += problem.lambda * tr;
    }
    sigma
}

/// Cellwise divergence of a displacement field, in cell order.
pub fn div_u_cellwise(space: &CgVectorSpace, u: &[f64]) -> Vec<f64> {
    (0..space.mesh.n_cells()).map(|c| space.cell_divergence(u, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use crate::solve::solve_direct;
    use approx::assert_abs_diff_eq;

    fn dense(m: &crate::sparse::CsrMatrix) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; m.ncols]; m.nrows];
        for r in 0..m.nrows {
            let (cols, vals) = m.row(r);
            for (c, v) in cols.iter().zip(vals) {
                d[r][*c] += v;
            }
        }
        d
    }

    fn cholesky_succeeds(a: &[Vec<f64>]) -> bool {
        let n = a.len();
        let mut l = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= 0.0 {
                        return false;
                    }
                    l[i][j] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        true
    }

    #[test]
    fn lame_matches_hand_values() {
        let (l, m) = lame_from_bulk(1000.0, 0.25).unwrap();
        assert_abs_diff_eq!(l, 600.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m, 600.0, epsilon = 1e-10);
        let (l0, m0) = lame_from_bulk(1000.0, 0.0).unwrap();
        assert_abs_diff_eq!(l0, 0.0);
        assert_abs_diff_eq!(m0, 1500.0, epsilon = 1e-10);
        for (k, nu) in [(1000.0, 0.25), (5.0, 0.4), (123.0, -0.3)] {
            let (l, m) = lame_from_bulk(k, nu).unwrap();
            let k_check = l + 2.0 * m / 3.0;
            assert!((k_check - k).abs() / k < 1e-12);
        }
        assert!(lame_from_bulk(1000.0, 0.5).is_err());
        assert!(lame_from_bulk(1000.0, -1.0).is_err());
    }

    #[test]
    fn biot_alpha_matches_hand_values() {
        assert_abs_diff_eq!(biot_alpha(1000.0, f64::INFINITY).unwrap(), 1.0);
        assert_abs_diff_eq!(biot_alpha(1000.0, 1000.0).unwrap(), 0.0);
        assert_abs_diff_eq!(biot_alpha(1000.0, 4000.0).unwrap(), 0.75);
        assert!(biot_alpha(1000.0, 500.0).is_err());
    }

    fn fixed_bottom_1d() -> BTreeMap<BoundaryTag, VectorField> {
        let mut m: BTreeMap<BoundaryTag, VectorField> = BTreeMap::new();
        m.insert(BoundaryTag::DirichletU, constant_vector([0.0, 0.0]));
        m
    }

    fn column_mesh(n: usize) -> Mesh {
        // Fixed, undrained bottom at x=0; loaded, drained top at x=1.
        let mut mesh = Mesh::unit_interval(n).unwrap();
        mesh.retag_boundary(|mid, _| {
            if mid[0] < 0.5 {
                BoundaryTag::DirichletU
            } else {
                BoundaryTag::TractionT
            }
        });
        mesh
    }

    #[test]
    fn zero_data_gives_zero_displacement() {
        let mesh = column_mesh(4);
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        let mut problem = ElasticityProblem::new(600.0, 600.0, 1.0, 1).unwrap();
        problem.dirichlet = fixed_bottom_1d();
        let sys = assemble_elasticity(&space, &problem, None).unwrap();
        let (u_red, rep) = solve_direct(&sys.system).unwrap();
        assert!(rep.converged);
        let u = sys.expand(&u_red);
        for v in u {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn reduced_matrix_is_positive_definite() {
        for (mesh, dim) in [(column_mesh(5), 1usize), (Mesh::unit_square(2).unwrap(), 2)] {
            let mut mesh = mesh;
            if dim == 2 {
                mesh.retag_boundary(|mid, t| if mid[1] < 1e-12 { BoundaryTag::DirichletU } else { t });
            }
            let space = CgVectorSpace::new(&mesh, 1).unwrap();
            let mut problem = ElasticityProblem::new(600.0, 600.0, 1.0, dim).unwrap();
            problem.dirichlet = fixed_bottom_1d();
            let sys = assemble_elasticity(&space, &problem, None).unwrap();
            assert!(cholesky_succeeds(&dense(&sys.system.matrix)));
        }
    }

    #[test]
    fn missing_dirichlet_data_is_a_rigid_mode_error() {
        let mesh = Mesh::unit_interval(3).unwrap();
        // All faces keep the default pressure tag; no displacement bc.
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        let problem = ElasticityProblem::new(600.0, 600.0, 1.0, 1).unwrap();
        match assemble_elasticity(&space, &problem, None) {
            Err(Error::RigidModes) => {}
            Err(e) => panic!("expected rigid-mode error, got {e:?}"),
            Ok(_) => panic!("expected rigid-mode error, got a system"),
        }
    }

    #[test]
    fn effective_stress_balances_traction_and_pressure() {
        // Uniform pore pressure and a compressive load at the top: the
        // effective stress is constant and equals sigma_D + alpha p.
        let mesh = column_mesh(8);
        let p_space = DgSpace::new(&mesh, 1).unwrap();
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        let p_bar = 2.5;
        let sigma_d = -1.0;
        let alpha = 0.75;
        let p = p_space.project(|_| p_bar);
        let mut problem = ElasticityProblem::new(600.0, 600.0, alpha, 1).unwrap();
        problem.dirichlet = fixed_bottom_1d();
        problem.traction.insert(BoundaryTag::TractionT, constant_vector([sigma_d, 0.0]));
        let sys = assemble_elasticity(&space, &problem, Some((&p_space, &p))).unwrap();
        let (u_red, rep) = solve_direct(&sys.system).unwrap();
        assert!(rep.converged);
        let u = sys.expand(&u_red);
        for c in 0..mesh.n_cells() {
            let s = cell_stress(&space, &problem, &u, c)[0][0];
            assert!(
                (s - (sigma_d + alpha * p_bar)).abs() < 1e-10,
                "cell {c}: sigma' = {s}, want {}",
                sigma_d + alpha * p_bar
            );
        }
    }

    #[test]
    fn doubling_alpha_doubles_the_coupling_load() {
        let mesh = column_mesh(4);
        let p_space = DgSpace::new(&mesh, 1).unwrap();
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        let p = p_space.project(|x| 1.0 + x[0]);
        let mut base = ElasticityProblem::new(600.0, 600.0, 0.0, 1).unwrap();
        base.dirichlet = fixed_bottom_1d();
        let rhs_of = |alpha: f64| {
            let mut pr = base.clone();
            pr.alpha = alpha;
            assemble_elasticity(&space, &pr, Some((&p_space, &p))).unwrap().system.rhs
        };
        let b0 = rhs_of(0.0);
        let b1 = rhs_of(0.4);
        let b2 = rhs_of(0.8);
        for i in 0..b0.len() {
            assert_abs_diff_eq!(b2[i] - b0[i], 2.0 * (b1[i] - b0[i]), epsilon = 1e-12);
        }
    }

    #[test]
    fn rigid_translation_in_dirichlet_data_shifts_the_solution() {
        let mesh = column_mesh(6);
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        let mut problem = ElasticityProblem::new(600.0, 600.0, 0.0, 1).unwrap();
        problem.dirichlet = fixed_bottom_1d();
        problem.traction.insert(BoundaryTag::TractionT, constant_vector([-1.0, 0.0]));
        let solve = |pr: &ElasticityProblem| {
            let sys = assemble_elasticity(&space, pr, None).unwrap();
            let (u_red, _) = solve_direct(&sys.system).unwrap();
            sys.expand(&u_red)
        };
        let u0 = solve(&problem);
        let shift = 0.3;
        problem.dirichlet.insert(BoundaryTag::DirichletU, constant_vector([shift, 0.0]));
        let u1 = solve(&problem);
        for (a, b) in u1.iter().zip(&u0) {
            assert_abs_diff_eq!(*a, *b + shift, epsilon = 1e-10);
        }
    }

    #[test]
    fn affine_displacement_is_reproduced_in_2d() {
        let mut mesh = Mesh::unit_square(3).unwrap();
        mesh.retag_boundary(|_, _| BoundaryTag::DirichletU);
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        let mut problem = ElasticityProblem::new(400.0, 300.0, 0.0, 2).unwrap();
        let affine = |x: [f64; 2]| [0.1 * x[0] + 0.02 * x[1], -0.05 * x[0] + 0.03 * x[1]];
        problem.dirichlet.insert(BoundaryTag::DirichletU, Arc::new(affine));
        let sys = assemble_elasticity(&space, &problem, None).unwrap();
        let (u_red, rep) = solve_direct(&sys.system).unwrap();
        assert!(rep.converged);
        let u = sys.expand(&u_red);
        for (v, xy) in mesh.vertices.iter().enumerate() {
            let want = affine(*xy);
            assert_abs_diff_eq!(u[space.dof(v, 0)], want[0], epsilon = 1e-10);
            assert_abs_diff_eq!(u[space.dof(v, 1)], want[1], epsilon = 1e-10);
        }
        // Constant-strain state: stress is symmetric and uniform.
        let s0 = cell_stress(&space, &problem, &u, 0);
        assert_abs_diff_eq!(s0[0][1], s0[1][0], epsilon = 1e-12);
        for c in 1..mesh.n_cells() {
            let s = cell_stress(&space, &problem, &u, c);
            for i in 0..2 {
                for j in 0..2 {
                    assert_abs_diff_eq!(s[i][j], s0[i][j], epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn divergence_field_matches_space_helper() {
        let mesh = column_mesh(4);
        let space = CgVectorSpace::new(&mesh, 1).unwrap();
        let mut u = vec![0.0; space.ndof()];
        for (v, xy) in mesh.vertices.iter().enumerate() {
            u[space.dof(v, 0)] = 0.5 * xy[0] * xy[0];
        }
        let divs = div_u_cellwise(&space, &u);
        for (c, d) in divs.iter().enumerate() {
            // d/dx of the piecewise-linear interpolant of x^2/2 is the cell
            // midpoint of x.
            let mid = mesh.cell_centroid(c)[0];
            assert_abs_diff_eq!(*d, mid, epsilon = 1e-12);
        }
    }
}
