//! Quadrature rules on the reference interval `[0, 1]` and the reference
//! triangle `{(r, s) : r, s >= 0, r + s <= 1}`.
//!
//! Interval rules are Gauss-Legendre; triangle rules are built by collapsing
//! a tensor Gauss grid through the Duffy map, which keeps the construction
//! exact for any requested polynomial degree without hardcoded point tables.

/// Gauss-Legendre nodes and weights on `[0, 1]`.
///
/// Exact for polynomials of degree `2n - 1`. Nodes are computed by Newton
/// iteration on the Legendre recurrence, so the rule is available for any
/// order the drivers ask for.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess on [-1, 1].
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_value_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // Map from [-1, 1] to [0, 1].
    for i in 0..n {
        nodes[i] = 0.5 * (nodes[i] + 1.0);
        weights[i] *= 0.5;
    }
    (nodes, weights)
}

/// Interval rule exact for polynomials of the given degree.
pub fn gauss_legendre_exact(degree: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(degree / 2 + 1)
}

fn legendre_value_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature on the unit reference triangle, exact for total degree `degree`.
///
/// Duffy map from the unit square: `x = u`, `y = v (1 - u)` with Jacobian
/// `(1 - u)`, which raises the `u`-degree of the integrand by one; the tensor
/// order accounts for that.
pub fn triangle_quadrature(degree: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let n = (degree + 1) / 2 + 1;
    let (xu, wu) = gauss_legendre(n);
    let (xv, wv) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (i, &u) in xu.iter().enumerate() {
        for (j, &v) in xv.iter().enumerate() {
            points.push([u, v * (1.0 - u)]);
            weights.push(wu[i] * wv[j] * (1.0 - u));
        }
    }
    (points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn gauss_two_point_matches_reference_values() {
        let (x, w) = gauss_legendre(2);
        let d = 0.5 / 3.0f64.sqrt();
        assert_abs_diff_eq!(x[0], 0.5 - d, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 0.5 + d, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn gauss_weights_sum_to_interval_length() {
        for n in 1..=12 {
            let (_, w) = gauss_legendre(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gauss_integrates_monomials_exactly() {
        for n in 1..=10 {
            let (x, w) = gauss_legendre(n);
            for d in 0..=(2 * n - 1) {
                let num: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(d as i32)).sum();
                let exact = 1.0 / (d as f64 + 1.0);
                assert_abs_diff_eq!(num, exact, epsilon = 1e-13);
            }
        }
    }

    /// Exact moment of x^a y^b over the unit triangle: a! b! / (a + b + 2)!.
    fn triangle_moment(a: u32, b: u32) -> f64 {
        let fact = |k: u32| (1..=k).map(|i| i as f64).product::<f64>().max(1.0);
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn triangle_rule_integrates_monomials_exactly() {
        for degree in 1..=11 {
            let (pts, w) = triangle_quadrature(degree);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 0.5, epsilon = 1e-14);
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let num: f64 = pts
                        .iter()
                        .zip(&w)
                        .map(|(p, &wi)| wi * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    assert_abs_diff_eq!(num, triangle_moment(a, b), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn triangle_points_stay_inside_reference_element() {
        let (pts, w) = triangle_quadrature(11);
        for (p, wi) in pts.iter().zip(&w) {
            assert!(p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 1.0);
            assert!(*wi > 0.0);
        }
    }

    proptest! {
        #[test]
        fn gauss_rule_is_exact_for_random_monomials(n in 1usize..9, seed in 0u32..1000) {
            let d = (seed as usize) % (2 * n);
            let (x, w) = gauss_legendre(n);
            let num: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(d as i32)).sum();
            prop_assert!((num - 1.0 / (d as f64 + 1.0)).abs() < 1e-12);
        }
    }
}
