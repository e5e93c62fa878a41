//! Quadrature rules: Gauss–Legendre (Newton on the Legendre recurrence),
//! Gauss–Hermite (Golub–Welsch on the Jacobi matrix), and an adaptive
//! Simpson rule for radial integrals.

use crate::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_and_derivative(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// ∫_a^b f dx by the n-point Gauss–Legendre rule.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes
        .iter()
        .zip(weights.iter())
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Nodes and weights of the n-point Gauss–Hermite rule:
/// ∫ f(x) e^{-x²} dx ≈ Σ wᵢ f(xᵢ). Golub–Welsch on the Jacobi matrix.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jac = nalgebra::DMatrix::zeros(n, n);
    for k in 1..n {
        let c = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = c;
        jac[(k, k - 1)] = c;
    }
    let se = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = se.eigenvalues[i];
            let first = se.eigenvectors[(0, i)];
            (node, std::f64::consts::PI.sqrt() * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Adaptive Simpson on [a, b] to the given absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fb, fm, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure(format!(
            "adaptive Simpson depth exhausted on [{a}, {b}], err {err:.3e}"
        )));
    }
    let l = simpson_rec(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        // order n is exact through degree 2n-1
        let val = integrate_gl(|x| x.powi(7) - 3.0 * x.powi(4) + x, -1.0, 2.0, 4);
        // antiderivative x^8/8 - 3x^5/5 + x^2/2 on [-1,2]
        let exact = |x: f64| x.powi(8) / 8.0 - 0.6 * x.powi(5) + 0.5 * x * x;
        assert_relative_eq!(val, exact(2.0) - exact(-1.0), max_relative = 1e-14);
    }

    #[test]
    fn gl_20_hits_exponential_to_machine_precision() {
        let val = integrate_gl(|s| (2.5 * s).exp(), 0.0, 1.0, 20);
        let exact = ((2.5f64).exp() - 1.0) / 2.5;
        assert_relative_eq!(val, exact, max_relative = 1e-15);
    }

    #[test]
    fn gh_moments_of_gaussian() {
        let (x, w) = gauss_hermite(24);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert_relative_eq!(m0, sqrt_pi, max_relative = 1e-13);
        assert_relative_eq!(m2, sqrt_pi / 2.0, max_relative = 1e-13);
        assert_relative_eq!(m4, sqrt_pi * 0.75, max_relative = 1e-13);
    }

    #[test]
    fn simpson_gaussian_tail() {
        let f = |x: f64| (-x * x).exp();
        let v = adaptive_simpson(&f, 0.0, 12.0, 1e-12).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-10);
    }
}
