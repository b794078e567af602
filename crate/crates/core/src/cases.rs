//! Manufactured diffusion problems with closed-form solutions, used to
//! measure convergence rates exactly.

use crate::error::{Error, Result};
use crate::flow::{FlowProblem, PermeabilityField, ScalarField};
use crate::mesh::{BoundaryTag, Mesh};
use std::collections::BTreeMap;
use std::sync::Arc;

pub type GradientField = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;

/// Which manufactured problem to build, with its coefficient parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseSpec {
    /// p = sin(x+y) on the unit square, constant kappa.
    Continuous2D { kappa: f64 },
    /// p = sin(x+y) on the unit square, kappa(x,y) = kappa sin(x+y).
    HeterogeneousContinuous2D { kappa: f64 },
    /// Piecewise-linear pressure on the unit interval with a coefficient
    /// jump at x = 0.5; p(0) = 0, p(1) = 1, no source.
    Discontinuous1D { kappa_left: f64, kappa_right: f64 },
}

impl CaseSpec {
    pub fn dim(&self) -> usize {
        match self {
            CaseSpec::Discontinuous1D { .. } => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseSpec::Continuous2D { .. } => "continuous-2d",
            CaseSpec::HeterogeneousContinuous2D { .. } => "heterogeneous-continuous-2d",
            CaseSpec::Discontinuous1D { .. } => "discontinuous-1d",
        }
    }
}

/// A flow problem plus exact-solution callbacks for error measurement.
pub struct ManufacturedCase {
    pub spec: CaseSpec,
    pub problem: FlowProblem,
    pub exact: ScalarField,
    pub exact_grad: GradientField,
}

impl ManufacturedCase {
    /// Uniform mesh with n subdivisions per side, all-Dirichlet boundary.
    pub fn build_mesh(&self, n: usize) -> Result<Mesh> {
        match self.spec.dim() {
            1 => Mesh::unit_interval(n),
            _ => Mesh::unit_square(n),
        }
    }
}

pub fn manufactured_elliptic_case(spec: CaseSpec) -> Result<ManufacturedCase> {
    match spec {
        CaseSpec::Continuous2D { kappa } => {
            check_positive("kappa", kappa)?;
            let exact: ScalarField = Arc::new(|x| (x[0] + x[1]).sin());
            let exact_grad: GradientField = Arc::new(|x| {
                let c = (x[0] + x[1]).cos();
                [c, c]
            });
            // g = -div(kappa grad sin(x+y)) = 2 kappa sin(x+y).
            let source: ScalarField = Arc::new(move |x| 2.0 * kappa * (x[0] + x[1]).sin());
            let problem = FlowProblem::steady(
                PermeabilityField::Constant(kappa),
                Some(source),
                dirichlet_from(&exact),
            );
            Ok(ManufacturedCase { spec, problem, exact, exact_grad })
        }
        CaseSpec::HeterogeneousContinuous2D { kappa } => {
            check_positive("kappa", kappa)?;
            let exact: ScalarField = Arc::new(|x| (x[0] + x[1]).sin());
            let exact_grad: GradientField = Arc::new(|x| {
                let c = (x[0] + x[1]).cos();
                [c, c]
            });
            let coefficient: ScalarField = Arc::new(move |x| kappa * (x[0] + x[1]).sin());
            // Flux component: kappa sin(u) cos(u) = kappa sin(2u)/2 in each
            // direction (u = x+y), so div = 2 kappa cos(2u) and
            // g = -2 kappa cos(2(x+y)).
            let source: ScalarField = Arc::new(move |x| -2.0 * kappa * (2.0 * (x[0] + x[1])).cos());
            let problem = FlowProblem::steady(
                PermeabilityField::SpatialScalar(coefficient),
                Some(source),
                dirichlet_from(&exact),
            );
            Ok(ManufacturedCase { spec, problem, exact, exact_grad })
        }
        CaseSpec::Discontinuous1D { kappa_left, kappa_right } => {
            check_positive("kappa_left", kappa_left)?;
            check_positive("kappa_right", kappa_right)?;
            let denom = kappa_left + kappa_right;
            let exact: ScalarField = Arc::new(move |x| {
                if x[0] <= 0.5 {
                    2.0 * x[0] * kappa_right / denom
                } else {
                    ((2.0 * x[0] - 1.0) * kappa_left + kappa_right) / denom
                }
            });
            let exact_grad: GradientField = Arc::new(move |x| {
                if x[0] <= 0.5 {
                    [2.0 * kappa_right / denom, 0.0]
                } else {
                    [2.0 * kappa_left / denom, 0.0]
                }
            });
            let problem = FlowProblem::steady(
                PermeabilityField::TwoZone { left: kappa_left, right: kappa_right },
                None,
                dirichlet_from(&exact),
            );
            Ok(ManufacturedCase { spec, problem, exact, exact_grad })
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidMaterial(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn dirichlet_from(exact: &ScalarField) -> BTreeMap<BoundaryTag, ScalarField> {
    let mut m: BTreeMap<BoundaryTag, ScalarField> = BTreeMap::new();
    m.insert(BoundaryTag::DirichletP, Arc::clone(exact));
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn discontinuous_branches_meet_at_the_interface() {
        for (kl, kr) in [(2.0, 0.5), (1.0, 1e-6), (3.5e-4, 7.2)] {
            let case =
                manufactured_elliptic_case(CaseSpec::Discontinuous1D { kappa_left: kl, kappa_right: kr })
                    .unwrap();
            let left = (case.exact)([0.5, 0.0]);
            let right = (case.exact)([0.5 + 1e-15, 0.0]);
            assert_abs_diff_eq!(left, right, epsilon = 1e-12);
            assert_abs_diff_eq!(left, kr / (kl + kr), epsilon = 1e-12);
        }
    }

    #[test]
    fn discontinuous_flux_is_continuous_across_the_interface() {
        for (kl, kr) in [(2.0, 0.5), (1.0, 1e-8), (4.0, 4.0 + 1e-9)] {
            let case =
                manufactured_elliptic_case(CaseSpec::Discontinuous1D { kappa_left: kl, kappa_right: kr })
                    .unwrap();
            let gl = (case.exact_grad)([0.25, 0.0])[0];
            let gr = (case.exact_grad)([0.75, 0.0])[0];
            let expected = 2.0 * kl * kr / (kl + kr);
            assert_abs_diff_eq!(kl * gl, expected, epsilon = 1e-12 * expected.max(1.0));
            assert_abs_diff_eq!(kr * gr, expected, epsilon = 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn discontinuous_boundary_values_are_zero_and_one() {
        let case = manufactured_elliptic_case(CaseSpec::Discontinuous1D {
            kappa_left: 0.3,
            kappa_right: 5.0,
        })
        .unwrap();
        assert_abs_diff_eq!((case.exact)([0.0, 0.0]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((case.exact)([1.0, 0.0]), 1.0, epsilon = 1e-12);
        let p_d = case.problem.dirichlet.get(&BoundaryTag::DirichletP).unwrap();
        assert_abs_diff_eq!(p_d([0.0, 0.0]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p_d([1.0, 0.0]), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn continuous_source_for_unit_kappa_is_twice_the_solution() {
        let case = manufactured_elliptic_case(CaseSpec::Continuous2D { kappa: 1.0 }).unwrap();
        let g = case.problem.source.as_ref().unwrap();
        for xy in [[0.1, 0.2], [0.7, 0.7], [0.0, 0.9]] {
            assert_abs_diff_eq!(g(xy), 2.0 * (xy[0] + xy[1]).sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn nonpositive_kappa_is_rejected_everywhere() {
        assert!(manufactured_elliptic_case(CaseSpec::Continuous2D { kappa: 0.0 }).is_err());
        assert!(manufactured_elliptic_case(CaseSpec::Continuous2D { kappa: -1.0 }).is_err());
        assert!(
            manufactured_elliptic_case(CaseSpec::HeterogeneousContinuous2D { kappa: -2.0 }).is_err()
        );
        assert!(manufactured_elliptic_case(CaseSpec::Discontinuous1D {
            kappa_left: 0.0,
            kappa_right: 1.0
        })
        .is_err());
        assert!(manufactured_elliptic_case(CaseSpec::Discontinuous1D {
            kappa_left: 1.0,
            kappa_right: f64::NAN
        })
        .is_err());
    }

    #[test]
    fn gradients_match_finite_differences_of_the_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eps = 1e-6;
        for spec in [
            CaseSpec::Continuous2D { kappa: 0.3 },
            CaseSpec::HeterogeneousContinuous2D { kappa: 2.0 },
            CaseSpec::Discontinuous1D { kappa_left: 3.0, kappa_right: 0.2 },
        ] {
            let case = manufactured_elliptic_case(spec).unwrap();
            for _ in 0..10 {
                // Keep clear of the 1D interface so both stencil legs stay
                // in one branch.
                let x = if spec.dim() == 1 {
                    let t: f64 = rng.gen_range(0.05..0.4);
                    let x0 = if rng.gen_bool(0.5) { t } else { t + 0.55 };
                    [x0, 0.0]
                } else {
                    [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)]
                };
                let g = (case.exact_grad)(x);
                for d in 0..spec.dim() {
                    let mut xp = x;
                    let mut xm = x;
                    xp[d] += eps;
                    xm[d] -= eps;
                    let fd = ((case.exact)(xp) - (case.exact)(xm)) / (2.0 * eps);
                    assert!((g[d] - fd).abs() < 1e-8, "{}: grad {} vs fd {}", spec.name(), g[d], fd);
                }
            }
        }
    }

    #[test]
    fn heterogeneous_source_matches_a_divergence_oracle() {
        let kappa = 1.7;
        let case = manufactured_elliptic_case(CaseSpec::HeterogeneousContinuous2D { kappa }).unwrap();
        let g = case.problem.source.as_ref().unwrap();
        let flux = |x: [f64; 2], d: usize| {
            let k = match &case.problem.kappa {
                PermeabilityField::SpatialScalar(f) => f(x),
                _ => unreachable!(),
            };
            k * (case.exact_grad)(x)[d]
        };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let eps = 1e-5;
        for _ in 0..10 {
            let x = [rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)];
            let mut div = 0.0;
            for d in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[d] += eps;
                xm[d] -= eps;
                div += (flux(xp, d) - flux(xm, d)) / (2.0 * eps);
            }
            assert!(
                (g(x) + div).abs() < 1e-6,
                "source {} vs -div {} at {:?}",
                g(x),
                -div,
                x
            );
        }
    }

    #[test]
    fn meshes_match_the_case_dimension() {
        let c1 = manufactured_elliptic_case(CaseSpec::Discontinuous1D {
            kappa_left: 1.0,
            kappa_right: 2.0,
        })
        .unwrap();
        assert_eq!(c1.build_mesh(16).unwrap().dim, 1);
        let c2 = manufactured_elliptic_case(CaseSpec::Continuous2D { kappa: 1.0 }).unwrap();
        assert_eq!(c2.build_mesh(4).unwrap().dim, 2);
    }
}
