//! Weighted interior-penalty assembly of the pressure equation.
//!
//! The bilinear form decomposes into theta- and beta-independent blocks
//!
//! ```text
//! A(theta, beta) = V - C - theta*C' + beta*(Pi + Pd) (+ S/dt on the diagonal)
//! ```
//!
//! where V is the volume diffusion term, C the consistency (flux) term, C'
//! its transpose, and Pi/Pd the interior/Dirichlet penalty matrices. Blocks
//! are assembled once and recombined cheaply, which is what makes penalty
//! sweeps affordable. The right-hand side splits the same way.
//!
//! Jumps are signed against the plus-side normal: [v] = v+ - v-. Averages
//! are diffusion-weighted with delta_e = k-/(k+ + k-); boundary faces take
//! one-sided traces (delta_e := 1). Dirichlet data enters weakly through the
//! Nitsche terms; the mass matrix is the identity because the modal basis is
//! orthonormal per cell.

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, FaceAdjacency};
use crate::space::DgSpace;
use crate::sparse::{CooMatrix, CsrMatrix, LinearSystem};
use std::collections::BTreeMap;
use std::sync::Arc;

pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

pub fn constant_field(value: f64) -> ScalarField {
    Arc::new(move |_| value)
}

/// Symmetric positive-definite permeability; all variants are isotropic.
#[derive(Clone)]
pub enum PermeabilityField {
    Constant(f64),
    SpatialScalar(ScalarField),
    /// `left` on x <= 0.5, `right` on x > 0.5; the owning cell's centroid
    /// picks the zone so face quadrature sees one-sided limits.
    TwoZone { left: f64, right: f64 },
}

impl PermeabilityField {
    fn scalar(&self, cell_centroid: [f64; 2], x: [f64; 2]) -> f64 {
        match self {
            PermeabilityField::Constant(k) => *k,
            PermeabilityField::SpatialScalar(f) => f(x),
            PermeabilityField::TwoZone { left, right } => {
                if cell_centroid[0] <= 0.5 {
                    *left
                } else {
                    *right
                }
            }
        }
    }

    /// The d x d tensor at a point, seen from the cell with the given
    /// centroid (the centroid resolves the zone for piecewise fields).
    pub fn tensor(&self, cell_centroid: [f64; 2], x: [f64; 2]) -> [[f64; 2]; 2] {
        let k = self.scalar(cell_centroid, x);
        [[k, 0.0], [0.0, k]]
    }
}

fn tensor_apply(k: &[[f64; 2]; 2], g: [f64; 2]) -> [f64; 2] {
    [k[0][0] * g[0] + k[0][1] * g[1], k[1][0] * g[0] + k[1][1] * g[1]]
}

/// n' k n, the normal diffusion used by the weights and the penalty.
pub fn normal_flux(k: &[[f64; 2]; 2], n: [f64; 2]) -> f64 {
    let kn = tensor_apply(k, n);
    n[0] * kn[0] + n[1] * kn[1]
}

/// Weight of the plus-side trace in the diffusion-weighted average.
pub fn weight_delta_e(kappa_plus_n: f64, kappa_minus_n: f64) -> Result<f64> {
    if kappa_plus_n <= 0.0 || kappa_minus_n <= 0.0 {
        return Err(Error::InvalidMaterial(
            "normal diffusion must be positive on both sides of a face".into(),
        ));
    }
    Ok(kappa_minus_n / (kappa_plus_n + kappa_minus_n))
}

/// Harmonic average of the one-sided normal diffusions.
pub fn harmonic_kappa_e(kappa_plus_n: f64, kappa_minus_n: f64) -> Result<f64> {
    if kappa_plus_n <= 0.0 || kappa_minus_n <= 0.0 {
        return Err(Error::InvalidMaterial(
            "normal diffusion must be positive on both sides of a face".into(),
        ));
    }
    Ok(2.0 * kappa_plus_n * kappa_minus_n / (kappa_plus_n + kappa_minus_n))
}

/// Penalty scheme selector: theta = 1, 0, -1 for the symmetric, incomplete
/// and nonsymmetric variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub theta: i8,
    pub beta: f64,
    pub degree: usize,
}

impl SchemeConfig {
    pub fn new(theta: i8, beta: f64, degree: usize) -> Result<Self> {
        if !matches!(theta, -1 | 0 | 1) {
            return Err(Error::InvalidArgument(format!("theta must be -1, 0 or 1, got {theta}")));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidArgument(format!("penalty beta must be positive, got {beta}")));
        }
        if !(1..=5).contains(&degree) {
            return Err(Error::InvalidArgument(format!("degree {degree} outside 1..=5")));
        }
        Ok(SchemeConfig { theta, beta, degree })
    }

    /// The symmetric variant is the only one whose matrix is symmetric.
    pub fn symmetric(&self) -> bool {
        self.theta == 1
    }
}

/// Flow (pressure) problem data: diffusion, storage physics, time step,
/// source, and boundary data keyed by tag. A face is Dirichlet for the flow
/// if its tag has an entry in `dirichlet`; every other face is natural with
/// outflow `neumann` (default 0, i.e. no flow).
#[derive(Clone)]
pub struct FlowProblem {
    pub kappa: PermeabilityField,
    pub rho: f64,
    pub porosity: f64,
    pub fluid_compressibility: f64,
    pub alpha: f64,
    /// Solid grain bulk modulus; `f64::INFINITY` for incompressible grains.
    pub solid_bulk: f64,
    pub dt: f64,
    pub source: Option<ScalarField>,
    pub dirichlet: BTreeMap<BoundaryTag, ScalarField>,
    pub neumann: BTreeMap<BoundaryTag, ScalarField>,
}

impl FlowProblem {
    /// Steady diffusion problem: storage and coupling terms are zero.
    pub fn steady(
        kappa: PermeabilityField,
        source: Option<ScalarField>,
        dirichlet: BTreeMap<BoundaryTag, ScalarField>,
    ) -> FlowProblem {
        FlowProblem {
            kappa,
            rho: 1.0,
            porosity: 0.0,
            fluid_compressibility: 0.0,
            alpha: 0.0,
            solid_bulk: f64::INFINITY,
            dt: 1.0,
            source,
            dirichlet,
            neumann: BTreeMap::new(),
        }
    }

    /// rho (phi c_f + (alpha - phi)/K_s); the grain term vanishes for
    /// incompressible grains.
    pub fn storage_coefficient(&self) -> Result<f64> {
        let grain = if self.solid_bulk.is_infinite() {
            0.0
        } else {
            (self.alpha - self.porosity) / self.solid_bulk
        };
        let s = self.rho * (self.porosity * self.fluid_compressibility + grain);
        if s < 0.0 {
            return Err(Error::InvalidMaterial(format!("negative storage coefficient {s}")));
        }
        Ok(s)
    }
}

/// Theta- and beta-independent pieces of the discrete operator.
pub struct FlowBlocks {
    pub volume: CsrMatrix,
    /// Consistency (flux) block; the adjoint term is its transpose.
    pub consistency: CsrMatrix,
    pub consistency_t: CsrMatrix,
    pub penalty_interior: CsrMatrix,
    pub penalty_dirichlet: CsrMatrix,
    pub rhs_source: Vec<f64>,
    pub rhs_neumann: Vec<f64>,
    /// Nitsche adjoint data term; enters the rhs with factor theta.
    pub rhs_dirichlet_adjoint: Vec<f64>,
    /// Dirichlet penalty data term; enters the rhs with factor beta.
    pub rhs_dirichlet_penalty: Vec<f64>,
    pub any_dirichlet: bool,
}

impl FlowBlocks {
    /// Full penalty matrix (interior + Dirichlet faces), unscaled.
    pub fn penalty(&self) -> Result<CsrMatrix> {
        self.penalty_interior.add_scaled(1.0, &self.penalty_dirichlet)
    }

    /// V - C - theta C', everything except the beta-scaled penalty.
    pub fn theta_base(&self, theta: i8) -> Result<CsrMatrix> {
        self.volume
            .add_scaled(-1.0, &self.consistency)?
            .add_scaled(-(theta as f64), &self.consistency_t)
    }

    /// Steady right-hand side for a scheme.
    pub fn rhs(&self, scheme: &SchemeConfig) -> Vec<f64> {
        let n = self.rhs_source.len();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = self.rhs_source[i]
                + self.rhs_neumann[i]
                + scheme.theta as f64 * self.rhs_dirichlet_adjoint[i]
                + scheme.beta * self.rhs_dirichlet_penalty[i];
        }
        b
    }
}

/// Assembles every block of the interior-penalty operator in one sweep over
/// cells and faces. Traversal order is fixed, so repeated assembly of the
/// same problem is bit-identical.
pub fn assemble_flow_blocks(space: &DgSpace, problem: &FlowProblem) -> Result<FlowBlocks> {
    let mesh = space.mesh;
    let n = space.ndof();
    let nloc = space.ndof_per_cell();
    let qdeg = 2 * space.degree + 1;
    let mut volume = CooMatrix::new(n, n);
    let mut consistency = CooMatrix::new(n, n);
    let mut penalty_interior = CooMatrix::new(n, n);
    let mut penalty_dirichlet = CooMatrix::new(n, n);
    let mut rhs_source = vec![0.0; n];
    let mut rhs_neumann = vec![0.0; n];
    let mut rhs_dirichlet_adjoint = vec![0.0; n];
    let mut rhs_dirichlet_penalty = vec![0.0; n];
    let mut any_dirichlet = false;

    // Volume diffusion and source.
    for c in 0..mesh.n_cells() {
        let centroid = mesh.cell_centroid(c);
        let (pts, wts) = space.cell_quadrature(c, qdeg);
        let mut local = vec![0.0; nloc * nloc];
        for (x, w) in pts.iter().zip(&wts) {
            let (phi, grad) = space.basis_grad_at(c, *x);
            let k = problem.kappa.tensor(centroid, *x);
            for i in 0..nloc {
                let kg = tensor_apply(&k, grad[i]);
                for j in 0..nloc {
                    local[i * nloc + j] += w * (kg[0] * grad[j][0] + kg[1] * grad[j][1]);
                }
            }
            if let Some(g) = &problem.source {
                let gx = g(*x);
                for i in 0..nloc {
                    rhs_source[space.global_dof(c, i)] += w * gx * phi[i];
                }
            }
        }
        for i in 0..nloc {
            for j in 0..nloc {
                volume.push(space.global_dof(c, j), space.global_dof(c, i), local[i * nloc + j]);
            }
        }
    }

    // Face terms. The trial index runs over columns, the test index over
    // rows; C[row=w, col=v] = <{k grad v}.n+, [w]>.
    for f in 0..mesh.faces.len() {
        let face = &mesh.faces[f];
        let normal = face.normal;
        let h_e = mesh.face_characteristic_length(f);
        let (pts, wts) = space.face_quadrature(f, qdeg);
        match face.adjacency {
            FaceAdjacency::Interior { plus, minus } => {
                let cp = mesh.cell_centroid(plus);
                let cm = mesh.cell_centroid(minus);
                for (x, w) in pts.iter().zip(&wts) {
                    let (vp, gp) = space.basis_grad_at(plus, *x);
                    let (vm, gm) = space.basis_grad_at(minus, *x);
                    let kp = problem.kappa.tensor(cp, *x);
                    let km = problem.kappa.tensor(cm, *x);
                    let kpn = normal_flux(&kp, normal);
                    let kmn = normal_flux(&km, normal);
                    let delta = weight_delta_e(kpn, kmn)?;
                    let ke = harmonic_kappa_e(kpn, kmn)?;
                    // Weighted normal flux of each trial function.
                    let flux = |side_grad: &[[f64; 2]], k: &[[f64; 2]; 2], weight: f64| {
                        side_grad
                            .iter()
                            .map(|g| {
                                let kg = tensor_apply(k, *g);
                                weight * (kg[0] * normal[0] + kg[1] * normal[1])
                            })
                            .collect::<Vec<f64>>()
                    };
                    let flux_p = flux(&gp, &kp, delta);
                    let flux_m = flux(&gm, &km, 1.0 - delta);
                    let pen = w * ke / h_e;
                    for i in 0..nloc {
                        let row_p = space.global_dof(plus, i);
                        let row_m = space.global_dof(minus, i);
                        for j in 0..nloc {
                            let col_p = space.global_dof(plus, j);
                            let col_m = space.global_dof(minus, j);
                            // [w] factor: +1 on the plus row, -1 on minus.
                            consistency.push(row_p, col_p, w * flux_p[j] * vp[i]);
                            consistency.push(row_p, col_m, w * flux_m[j] * vp[i]);
                            consistency.push(row_m, col_p, -w * flux_p[j] * vm[i]);
                            consistency.push(row_m, col_m, -w * flux_m[j] * vm[i]);
                            penalty_interior.push(row_p, col_p, pen * vp[j] * vp[i]);
                            penalty_interior.push(row_p, col_m, -pen * vm[j] * vp[i]);
                            penalty_interior.push(row_m, col_p, -pen * vp[j] * vm[i]);
                            penalty_interior.push(row_m, col_m, pen * vm[j] * vm[i]);
                        }
                    }
                }
            }
            FaceAdjacency::Boundary { cell, tag } => {
                let centroid = mesh.cell_centroid(cell);
                if let Some(p_d) = problem.dirichlet.get(&tag) {
                    any_dirichlet = true;
                    for (x, w) in pts.iter().zip(&wts) {
                        let (v, g) = space.basis_grad_at(cell, *x);
                        let k = problem.kappa.tensor(centroid, *x);
                        let kn = normal_flux(&k, normal);
                        if kn <= 0.0 {
                            return Err(Error::InvalidMaterial(
                                "normal diffusion must be positive on the boundary".into(),
                            ));
                        }
                        let pen = w * kn / h_e;
                        let pd = p_d(*x);
                        for i in 0..nloc {
                            let row = space.global_dof(cell, i);
                            let kg = tensor_apply(&k, g[i]);
                            let flux_i = kg[0] * normal[0] + kg[1] * normal[1];
                            for j in 0..nloc {
                                let col = space.global_dof(cell, j);
                                let kgj = tensor_apply(&k, g[j]);
                                let flux_j = kgj[0] * normal[0] + kgj[1] * normal[1];
                                consistency.push(row, col, w * flux_j * v[i]);
                                penalty_dirichlet.push(row, col, pen * v[j] * v[i]);
                            }
                            rhs_dirichlet_adjoint[row] -= w * pd * flux_i;
                            rhs_dirichlet_penalty[row] += pen * pd * v[i];
                        }
                    }
                } else {
                    // Natural face: prescribed outflow, default no-flow.
                    if let Some(q_d) = problem.neumann.get(&tag) {
                        for (x, w) in pts.iter().zip(&wts) {
                            let v = space.basis_at(cell, *x);
                            let q = q_d(*x);
                            for i in 0..nloc {
                                rhs_neumann[space.global_dof(cell, i)] -= w * q * v[i];
                            }
                        }
                    }
                }
            }
        }
    }

    let consistency = consistency.to_csr();
    Ok(FlowBlocks {
        volume: volume.to_csr(),
        consistency_t: consistency.transpose(),
        consistency,
        penalty_interior: penalty_interior.to_csr(),
        penalty_dirichlet: penalty_dirichlet.to_csr(),
        rhs_source,
        rhs_neumann,
        rhs_dirichlet_adjoint,
        rhs_dirichlet_penalty,
        any_dirichlet,
    })
}

/// Steady diffusion system for a scheme, built from fresh blocks.
pub fn assemble_elliptic(
    space: &DgSpace,
    scheme: &SchemeConfig,
    problem: &FlowProblem,
) -> Result<LinearSystem> {
    if scheme.degree != space.degree {
        return Err(Error::InvalidArgument(format!(
            "scheme degree {} does not match space degree {}",
            scheme.degree, space.degree
        )));
    }
    let blocks = assemble_flow_blocks(space, problem)?;
    elliptic_from_blocks(&blocks, scheme)
}

/// Recombines precomputed blocks into the steady system; used by penalty
/// sweeps so assembly happens once per mesh.
pub fn elliptic_from_blocks(blocks: &FlowBlocks, scheme: &SchemeConfig) -> Result<LinearSystem> {
    let base = blocks.theta_base(scheme.theta)?;
    let matrix = base
        .add_scaled(scheme.beta, &blocks.penalty_interior)?
        .add_scaled(scheme.beta, &blocks.penalty_dirichlet)?;
    Ok(LinearSystem {
        matrix,
        rhs: blocks.rhs(scheme),
        symmetric: scheme.symmetric(),
        pure_neumann_warning: !blocks.any_dirichlet,
    })
}

/// One backward-Euler step of the transient equation: the storage term
/// S/dt (v, w) both damps the operator and carries the previous pressure,
/// and the lagged dilation rate enters the rhs as a cellwise load.
pub fn assemble_flow_step(
    space: &DgSpace,
    scheme: &SchemeConfig,
    problem: &FlowProblem,
    p_prev: &[f64],
    div_u_rate: &[f64],
) -> Result<LinearSystem> {
    let blocks = assemble_flow_blocks(space, problem)?;
    flow_step_from_blocks(space, &blocks, scheme, problem, p_prev, div_u_rate)
}

/// Transient step from precomputed blocks.
pub fn flow_step_from_blocks(
    space: &DgSpace,
    blocks: &FlowBlocks,
    scheme: &SchemeConfig,
    problem: &FlowProblem,
    p_prev: &[f64],
    div_u_rate: &[f64],
) -> Result<LinearSystem> {
    if problem.dt <= 0.0 {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {}", problem.dt)));
    }
    if p_prev.len() != space.ndof() {
        return Err(Error::InvalidArgument("previous pressure has wrong length".into()));
    }
    if div_u_rate.len() != space.mesh.n_cells() {
        return Err(Error::InvalidArgument("dilation rate must be cellwise".into()));
    }
    let storage = problem.storage_coefficient()?;
    let mut sys = elliptic_from_blocks(blocks, scheme)?;
    let s_dt = storage / problem.dt;
    if s_dt > 0.0 {
        // Mass matrix is the identity for the orthonormal modal basis, so
        // the storage block is diagonal and (P_prev, w) is the coefficient
        // vector itself.
        let n = space.ndof();
        let mut eye = CooMatrix::new(n, n);
        for i in 0..n {
            eye.push(i, i, 1.0);
        }
        sys.matrix = sys.matrix.add_scaled(s_dt, &eye.to_csr())?;
        for i in 0..n {
            sys.rhs[i] += s_dt * p_prev[i];
        }
    }
    let coupling = cellwise_load(space, div_u_rate);
    let scale = problem.rho * problem.alpha;
    for i in 0..space.ndof() {
        sys.rhs[i] -= scale * coupling[i];
    }
    Ok(sys)
}

/// Load vector of a cellwise-constant field: b_i = sum_T c_T int_T phi_i.
pub fn cellwise_load(space: &DgSpace, cell_values: &[f64]) -> Vec<f64> {
    let nloc = space.ndof_per_cell();
    let mut b = vec![0.0; space.ndof()];
    for c in 0..space.mesh.n_cells() {
        if cell_values[c] == 0.0 {
            continue;
        }
        let (pts, wts) = space.cell_quadrature(c, space.degree);
        for (x, w) in pts.iter().zip(&wts) {
            let phi = space.basis_at(c, *x);
            for i in 0..nloc {
                b[space.global_dof(c, i)] += w * cell_values[c] * phi[i];
            }
        }
    }
    b
}
