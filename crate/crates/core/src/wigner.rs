//! Phase-space side: Laguerre-polynomial Wigner functions of the oscillator
//! eigenstates, the closed-form thermal Wigner Gaussian, and spatial moments
//! cross-checked between the spectral and phase-space routes.
//!
//! Convention note: with f_n(z) = 2(−1)ⁿ e^{-|z|²/ħ} L_n(2|z|²/ħ) and
//! (1/h^d)∫ f dz = tr, summing the Boltzmann series gives the thermal
//! density (βθ(βħ/2)/2π)^d exp(−βθ(βħ/2)|z|²/2). The exponent carries the
//! factor 1/2; this is the normalization under which the density integrates
//! to one and reproduces the closed-form moments C_{d,n}/(βθ(βħ/2)/2)^{n/2}.

use crate::bounds::{c_dn, theta};
use crate::quad::{adaptive_simpson, gauss_hermite};
use crate::shells::{GradedBasis, ShellTable};
use crate::thermal::{OccupationProfile, StateKind};
use crate::{Error, KahanSum, Result};
use nalgebra::DMatrix;

/// L_n(x) by the stable three-term recurrence (the explicit binomial sum
/// cancels catastrophically past n ≈ 20).
pub fn laguerre(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut lm1 = 1.0;
    let mut l = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * l - kf * lm1) / (kf + 1.0);
        lm1 = l;
        l = next;
    }
    l
}

/// Wigner function of the 1-d oscillator eigenstate |n⟩ at the phase-space
/// point z = (x, ξ): f_n(z) = 2(−1)ⁿ e^{-|z|²/ħ} L_n(2|z|²/ħ). May be
/// negative away from n = 0.
pub fn eigen_wigner(n: usize, hbar: f64, x: f64, xi: f64) -> f64 {
    let zsq = x * x + xi * xi;
    let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
    sign * (-zsq / hbar).exp() * laguerre(n, 2.0 * zsq / hbar)
}

/// The thermal Wigner Gaussian f_β(z) = prefactor · e^{-rate |z|²/2} on
/// R^{2d}, with rate = βθ(βħ/2) and prefactor = (rate/2π)^d; integrates to
/// one and tends to the classical Gibbs density as ħ → 0.
#[derive(Debug, Clone, Copy)]
pub struct PhaseSpaceGaussian {
    pub d: usize,
    pub beta: f64,
    pub hbar: f64,
    pub rate: f64,
    pub prefactor: f64,
}

impl PhaseSpaceGaussian {
    pub fn new(d: usize, beta: f64, hbar: f64) -> Self {
        let rate = beta * theta(beta * hbar / 2.0);
        let prefactor = (rate / (2.0 * std::f64::consts::PI)).powi(d as i32);
        Self {
            d,
            beta,
            hbar,
            rate,
            prefactor,
        }
    }

    /// Density at squared phase-space radius |z|².
    pub fn density(&self, zsq: f64) -> f64 {
        self.prefactor * (-0.5 * self.rate * zsq).exp()
    }

    /// ∫ |x|ⁿ f_β dz over R^{2d} by quadrature: tensor Gauss–Hermite in the
    /// momentum factor and, for the position factor, tensor Gauss–Hermite
    /// when n is even or radial Simpson when n is odd. Orders double until
    /// two successive levels agree to `tol`.
    pub fn moment_quadrature(&self, n: u32, tol: f64) -> Result<f64> {
        let c = 0.5 * self.rate;
        let xi_integral = gh_doubling(self.d, c, |_| 1.0, tol)?;
        let x_integral = if n % 2 == 0 {
            gh_doubling(self.d, c, |x| radius_sq(x).powi(n as i32 / 2), tol)?
        } else {
            radial_moment(self.d, c, n, tol)?
        };
        Ok(self.prefactor * xi_integral * x_integral)
    }
}

fn radius_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// ∫_{R^dims} f(x) e^{-c|x|²} dx by an order-m tensor Gauss–Hermite rule.
fn gh_tensor(dims: usize, c: f64, f: &impl Fn(&[f64]) -> f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_hermite(order);
    let scale = c.sqrt();
    let mut point = vec![0.0f64; dims];
    let mut idx = vec![0usize; dims];
    let mut acc = KahanSum::new();
    loop {
        let mut w = 1.0;
        for k in 0..dims {
            point[k] = nodes[idx[k]] / scale;
            w *= weights[idx[k]];
        }
        acc.add(w * f(&point));
        // odometer over the tensor grid
        let mut k = 0;
        loop {
            if k == dims {
                return acc.value() * c.powf(-(dims as f64) / 2.0);
            }
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn gh_doubling(dims: usize, c: f64, f: impl Fn(&[f64]) -> f64, tol: f64) -> Result<f64> {
    let mut order = 16;
    let mut last = gh_tensor(dims, c, &f, order);
    for _ in 0..5 {
        order *= 2;
        let next = gh_tensor(dims, c, &f, order);
        if (next - last).abs() <= tol * next.abs().max(1e-300) {
            return Ok(next);
        }
        last = next;
    }
    Err(Error::QuadratureFailure(format!(
        "tensor Gauss-Hermite did not settle to {tol:.1e} by order {order}"
    )))
}

/// ∫_{R^d} |x|ⁿ e^{-c|x|²} dx = |S^{d-1}| ∫₀^∞ r^{n+d-1} e^{-cr²} dr by
/// adaptive Simpson in the radial variable.
fn radial_moment(d: usize, c: f64, n: u32, tol: f64) -> Result<f64> {
    let q = (n as f64) + d as f64 - 1.0;
    let integrand = move |r: f64| {
        if r == 0.0 && q < 0.0 {
            0.0
        } else {
            r.powf(q) * (-c * r * r).exp()
        }
    };
    let upper = ((q + 60.0) / c).sqrt().max(8.0 / c.sqrt());
    let scale_guess = (q / 2.0 / c).max(1.0 / c).powf(q / 2.0) / c.sqrt();
    let radial = adaptive_simpson(&integrand, 0.0, upper, tol * scale_guess * 1e-2)?;
    let df = d as f64;
    let sphere = 2.0 * std::f64::consts::PI.powf(df / 2.0)
        / statrs::function::gamma::ln_gamma(df / 2.0).exp();
    Ok(sphere * radial)
}

/// Closed-form spatial moment h^d Tr(|x|ⁿ ĝ_β) = C_{d,n} / (βθ(βħ/2)/2)^{n/2}.
pub fn thermal_moment_closed(d: usize, beta: f64, hbar: f64, n: u32) -> f64 {
    c_dn(d, n as f64) / (beta * theta(beta * hbar / 2.0) / 2.0).powf(n as f64 / 2.0)
}

fn require_boltzmann(profile: &OccupationProfile) -> Result<()> {
    if profile.kind != StateKind::MaxwellBoltzmann {
        return Err(Error::InvalidParameter(
            "spectral moments are defined against the Maxwell-Boltzmann profile".into(),
        ));
    }
    Ok(())
}

/// Diagonal of (x²)^{m} in d = 1 by windowed banded products: the power of
/// the pentadiagonal x² only reaches 2m levels sideways, so each diagonal
/// entry is a local computation and no dense algebra is needed.
pub fn x_squared_power_diagonal(cutoff: usize, hbar: f64, m: u32) -> Vec<f64> {
    let dim = cutoff + 1;
    let diag = |j: usize| hbar * (j as f64 + 0.5);
    let off = |j: usize| (hbar / 2.0) * ((j as f64 + 1.0) * (j as f64 + 2.0)).sqrt();
    let mut out = Vec::with_capacity(dim);
    let width = 2 * m as usize;
    let mut v = vec![0.0f64; dim];
    let mut next = vec![0.0f64; dim];
    for i in 0..dim {
        let lo = i.saturating_sub(width);
        let hi = (i + width).min(cutoff);
        for slot in v[lo..=hi].iter_mut() {
            *slot = 0.0;
        }
        v[i] = 1.0;
        for _ in 0..m {
            for (j, slot) in next[lo..=hi].iter_mut().enumerate() {
                let j = j + lo;
                let mut acc = diag(j) * v[j];
                if j >= 2 && j - 2 >= lo {
                    acc += off(j - 2) * v[j - 2];
                }
                if j + 2 <= hi {
                    acc += off(j) * v[j + 2];
                }
                *slot = acc;
            }
            v[lo..=hi].copy_from_slice(&next[lo..=hi]);
        }
        out.push(v[i]);
    }
    out
}

/// Spectral moment h^d Tr(|x|ⁿ ĝ_β): even n via banded powers of x²
/// (exact, no dense algebra); odd n in d = 1 via functional calculus of the
/// tridiagonal x, which converges only at O(1/K) because of the |x| cusp.
pub fn thermal_moment_spectral(
    profile: &OccupationProfile,
    shells: &ShellTable,
    n: u32,
    ceiling: usize,
) -> Result<f64> {
    require_boltzmann(profile)?;
    let h = 2.0 * std::f64::consts::PI * shells.hbar;
    let w = profile.state_eigenvalues();
    if n == 0 {
        let mut acc = KahanSum::new();
        for k in 0..=shells.cutoff {
            acc.add(shells.mults[k] as f64 * w[k]);
        }
        return Ok(h.powi(shells.d as i32) * acc.value());
    }
    if shells.d == 1 && n % 2 == 0 {
        let diag = x_squared_power_diagonal(shells.cutoff, shells.hbar, n / 2);
        let mut acc = KahanSum::new();
        for j in 0..=shells.cutoff {
            acc.add(diag[j] * w[j]);
        }
        return Ok(h * acc.value());
    }
    if shells.d == 1 {
        let dim = shells.cutoff + 1;
        if dim > ceiling {
            return Err(Error::DenseCeiling { dim, ceiling });
        }
        let x = crate::shells::LadderElements::new(shells.hbar).x_matrix(shells.cutoff);
        let xn = crate::norms::function_of_symmetric(&x.to_dense(), |l| l.abs().powi(n as i32));
        let mut acc = KahanSum::new();
        for j in 0..dim {
            acc.add(xn[(j, j)] * w[j]);
        }
        return Ok(h * acc.value());
    }
    if n % 2 != 0 {
        return Err(Error::InvalidParameter(
            "odd moments in d >= 2 are only available through the closed form".into(),
        ));
    }
    let basis = GradedBasis::new(shells.d, shells.cutoff)?;
    if basis.dim() > ceiling {
        return Err(Error::DenseCeiling {
            dim: basis.dim(),
            ceiling,
        });
    }
    let x2 = x_squared_dense(&basis, shells.hbar);
    let mut pow = x2.clone();
    for _ in 1..(n / 2) {
        pow = &pow * &x2;
    }
    let mut acc = KahanSum::new();
    for i in 0..basis.dim() {
        acc.add(pow[(i, i)] * w[basis.shell_of(i)]);
    }
    Ok(h.powi(shells.d as i32) * acc.value())
}

/// Momentum-side moment h Tr(|p|ⁿ ĝ_β) in d = 1 through the parity-block
/// functional calculus of p²; independent of the x route.
pub fn thermal_moment_spectral_momentum(
    profile: &OccupationProfile,
    shells: &ShellTable,
    n: u32,
    ceiling: usize,
) -> Result<f64> {
    require_boltzmann(profile)?;
    if shells.d != 1 {
        return Err(Error::InvalidParameter(
            "the momentum moment route is implemented for d = 1".into(),
        ));
    }
    let dim = shells.cutoff + 1;
    if dim > ceiling {
        return Err(Error::DenseCeiling { dim, ceiling });
    }
    let h = 2.0 * std::f64::consts::PI * shells.hbar;
    let weight =
        crate::norms::weight_matrix_1d(shells.cutoff, shells.hbar, &crate::norms::WeightSpec::new(n))?;
    let w = profile.state_eigenvalues();
    let mut acc = KahanSum::new();
    for j in 0..dim {
        // weight = I + |p|ⁿ, so the |p|ⁿ diagonal is weight_jj − 1
        acc.add((weight[(j, j)] - 1.0) * w[j]);
    }
    Ok(h * acc.value())
}

/// |x|² = Σᵢ xᵢ² on the graded basis: diagonal ħ(|n|₁ + d/2), couplings
/// +(ħ/2)√((nᵢ+1)(nᵢ+2)) to n + 2eᵢ.
pub fn x_squared_dense(basis: &GradedBasis, hbar: f64) -> DMatrix<f64> {
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for (i, idx) in basis.indices.iter().enumerate() {
        m[(i, i)] = hbar * (basis.shell_of(i) as f64 + basis.d as f64 / 2.0);
        for axis in 0..basis.d {
            let mut up = idx.clone();
            up[axis] += 2;
            if let Some(j) = basis.position(&up) {
                let na = idx[axis] as f64;
                let v = (hbar / 2.0) * ((na + 1.0) * (na + 2.0)).sqrt();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    m
}
