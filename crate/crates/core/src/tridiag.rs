//! Symmetric tridiagonal eigenvalue machinery: implicit-shift QL for full
//! spectra and Sturm-count bisection for extreme eigenvalues. These are the
//! structured fast paths; the dense reference solver lives behind nalgebra.

use crate::{Error, Result};

/// Symmetric tridiagonal matrix; `off.len() == diag.len() - 1` (empty `off`
/// for a 1×1 block).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Dense copy, column-major nalgebra matrix. Test and dense-path helper.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    /// All eigenvalues, ascending, by the implicit-shift QL iteration.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        ql_implicit_eigenvalues(&self.diag, &self.off)
    }

    /// Number of eigenvalues strictly below `x` (Sturm / LDLᵀ inertia count).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let mut denom = q;
            if denom == 0.0 {
                denom = f64::MIN_POSITIVE;
            }
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// (λ_min, λ_max) by bisection on the Sturm count.
    pub fn extreme_eigenvalues(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo_min = f64::INFINITY;
        let mut hi_max = f64::NEG_INFINITY;
        for i in 0..n {
            let radius = if n == 1 {
                0.0
            } else if i == 0 {
                self.off[0].abs()
            } else if i == n - 1 {
                self.off[n - 2].abs()
            } else {
                self.off[i - 1].abs() + self.off[i].abs()
            };
            lo_min = lo_min.min(self.diag[i] - radius);
            hi_max = hi_max.max(self.diag[i] + radius);
        }
        let lambda_max = self.bisect_kth(n - 1, lo_min, hi_max);
        let lambda_min = self.bisect_kth(0, lo_min, hi_max);
        (lambda_min, lambda_max)
    }

    /// k-th smallest eigenvalue (0-based) within the bracket [lo, hi].
    fn bisect_kth(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Largest singular value max(|λ_min|, |λ_max|).
    pub fn spectral_norm(&self) -> f64 {
        let (lmin, lmax) = self.extreme_eigenvalues();
        lmin.abs().max(lmax.abs())
    }
}

/// Zero-diagonal block with the given couplings; the shape every gradient
/// block takes.
pub fn zero_diag(off: Vec<f64>) -> SymTridiag {
    SymTridiag {
        diag: vec![0.0; off.len() + 1],
        off,
    }
}

#[inline]
fn hypot(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Implicit-shift QL on (diag, off), returning ascending eigenvalues.
/// The classic EISPACK tql1 recurrence.
fn ql_implicit_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    if n == 1 {
        return Ok(d);
    }
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // locate a negligible subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::EigenFailure { block: l });
            }
            // implicit shift from the 2x2 at l
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g == 0.0 { 1.0 } else { g }));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}
