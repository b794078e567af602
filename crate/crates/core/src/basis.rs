//! Modal orthonormal bases on the reference elements.
//!
//! The interval basis is scaled Legendre; the triangle basis is the
//! Koornwinder-Dubiner construction evaluated through collapsed coordinates.
//! Both are orthonormal on the unit reference element, which keeps cell mass
//! matrices equal to the identity and conditioning flat in the degree.

/// Gamma(n) for positive integer n.
fn gamma_int(n: usize) -> f64 {
    (1..n).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Normalized Jacobi polynomials `P_0..P_n` at `x`, orthonormal on `[-1, 1]`
/// with weight `(1 - x)^alpha (1 + x)^beta`. Integer parameters only, which
/// is all the Dubiner construction needs.
fn jacobi(n: usize, alpha: usize, beta: usize, x: f64) -> Vec<f64> {
    let (af, bf) = (alpha as f64, beta as f64);
    let mut p = vec![0.0; n + 1];
    let gamma0 = 2f64.powi((alpha + beta + 1) as i32) / (af + bf + 1.0) * gamma_int(alpha + 1)
        * gamma_int(beta + 1)
        / gamma_int(alpha + beta + 1);
    p[0] = 1.0 / gamma0.sqrt();
    if n == 0 {
        return p;
    }
    let gamma1 = (af + 1.0) * (bf + 1.0) / (af + bf + 3.0) * gamma0;
    p[1] = ((af + bf + 2.0) * x / 2.0 + (af - bf) / 2.0) / gamma1.sqrt();
    let mut aold = 2.0 / (2.0 + af + bf) * ((af + 1.0) * (bf + 1.0) / (af + bf + 3.0)).sqrt();
    for i in 1..n {
        let fi = i as f64;
        let h1 = 2.0 * fi + af + bf;
        let anew = 2.0 / (h1 + 2.0)
            * ((fi + 1.0) * (fi + 1.0 + af + bf) * (fi + 1.0 + af) * (fi + 1.0 + bf)
                / ((h1 + 1.0) * (h1 + 3.0)))
                .sqrt();
        let bnew = -(af * af - bf * bf) / (h1 * (h1 + 2.0));
        p[i + 1] = (-aold * p[i - 1] + (x - bnew) * p[i]) / anew;
        aold = anew;
    }
    p
}

/// Derivatives of the normalized Jacobi polynomials `P_0..P_n` at `x`.
fn jacobi_deriv(n: usize, alpha: usize, beta: usize, x: f64) -> Vec<f64> {
    let mut d = vec![0.0; n + 1];
    if n == 0 {
        return d;
    }
    let shifted = jacobi(n - 1, alpha + 1, beta + 1, x);
    for (i, di) in d.iter_mut().enumerate().skip(1) {
        let fi = i as f64;
        *di = (fi * (fi + alpha as f64 + beta as f64 + 1.0)).sqrt() * shifted[i - 1];
    }
    d
}

/// Orthonormal Legendre basis of degree `k` on the reference interval `[0, 1]`.
#[derive(Debug, Clone)]
pub struct IntervalBasis {
    pub degree: usize,
}

impl IntervalBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn ndof(&self) -> usize {
        self.degree + 1
    }

    pub fn eval(&self, r: f64) -> Vec<f64> {
        let x = 2.0 * r - 1.0;
        let p = jacobi(self.degree, 0, 0, x);
        p.iter().map(|v| std::f64::consts::SQRT_2 * v).collect()
    }

    /// Values and reference-coordinate derivatives at `r`.
    pub fn eval_grad(&self, r: f64) -> (Vec<f64>, Vec<f64>) {
        let x = 2.0 * r - 1.0;
        let p = jacobi(self.degree, 0, 0, x);
        let d = jacobi_deriv(self.degree, 0, 0, x);
        (
            p.iter().map(|v| std::f64::consts::SQRT_2 * v).collect(),
            d.iter().map(|v| 2.0 * std::f64::consts::SQRT_2 * v).collect(),
        )
    }
}

/// Orthonormal Dubiner basis of total degree `k` on the unit reference
/// triangle `{(r, s) : r, s >= 0, r + s <= 1}`.
///
/// Mode order is `(i, j)` with `i = 0..=k`, `j = 0..=k-i`.
#[derive(Debug, Clone)]
pub struct TriangleBasis {
    pub degree: usize,
}

impl TriangleBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn ndof(&self) -> usize {
        (self.degree + 1) * (self.degree + 2) / 2
    }

    /// Collapsed coordinates on the biunit triangle. The `a` coordinate has a
    /// removable singularity at the apex `b = 1`; modes with `i > 0` vanish
    /// there, so clamping `a` is exact.
    fn collapse(rb: f64, sb: f64) -> (f64, f64) {
        let a = if (1.0 - sb).abs() > 1e-12 { 2.0 * (1.0 + rb) / (1.0 - sb) - 1.0 } else { -1.0 };
        (a, sb)
    }

    pub fn eval(&self, r: f64, s: f64) -> Vec<f64> {
        let (a, b) = Self::collapse(2.0 * r - 1.0, 2.0 * s - 1.0);
        let k = self.degree;
        let pa: Vec<Vec<f64>> = (0..=k).map(|i| jacobi(k, 2 * i + 1, 0, b)).collect();
        let fa = jacobi(k, 0, 0, a);
        let mut out = Vec::with_capacity(self.ndof());
        for i in 0..=k {
            for j in 0..=(k - i) {
                let v = std::f64::consts::SQRT_2
                    * fa[i]
                    * pa[i][j]
                    * (1.0 - b).powi(i as i32);
                out.push(2.0 * v);
            }
        }
        out
    }

    /// Values and gradients with respect to the unit-triangle coordinates.
    pub fn eval_grad(&self, r: f64, s: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let (a, b) = Self::collapse(2.0 * r - 1.0, 2.0 * s - 1.0);
        let k = self.degree;
        let fa = jacobi(k, 0, 0, a);
        let dfa = jacobi_deriv(k, 0, 0, a);
        let mut vals = Vec::with_capacity(self.ndof());
        let mut grads = Vec::with_capacity(self.ndof());
        for i in 0..=k {
            let gb = jacobi(k, 2 * i + 1, 0, b);
            let dgb = jacobi_deriv(k, 2 * i + 1, 0, b);
            let half1mb = 0.5 * (1.0 - b);
            for j in 0..=(k - i) {
                let scale = 2f64.powf(i as f64 + 0.5);
                let val = std::f64::consts::SQRT_2 * fa[i] * gb[j] * (1.0 - b).powi(i as i32);

                let mut dmodedr = dfa[i] * gb[j];
                if i > 0 {
                    dmodedr *= half1mb.powi(i as i32 - 1);
                }
                let mut dmodeds = dfa[i] * gb[j] * 0.5 * (1.0 + a);
                if i > 0 {
                    dmodeds *= half1mb.powi(i as i32 - 1);
                }
                let mut tmp = dgb[j] * half1mb.powi(i as i32);
                if i > 0 {
                    tmp -= 0.5 * i as f64 * gb[j] * half1mb.powi(i as i32 - 1);
                }
                dmodeds += fa[i] * tmp;

                // Biunit gradients, then the chain rule of the unit->biunit
                // map (factor 2) and the unit-area normalization (factor 2).
                vals.push(2.0 * val);
                grads.push([4.0 * scale * dmodedr, 4.0 * scale * dmodeds]);
            }
        }
        (vals, grads)
    }
}
