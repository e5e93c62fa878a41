//! Quantum gradients D_x ρ = [∇, ρ] and D_v ρ = [x/(iħ), ρ] in the Hermite
//! eigenbasis.
//!
//! Because ρ is a function of H and E_n depends only on |n|₁, the commutator
//! along one axis decomposes into independent tridiagonal blocks indexed by
//! the transverse shell r, each occurring g_{r,d-1} times. A block is
//! determined by the successor differences of the per-shell state
//! eigenvalues, so only those differences are stored; entries are generated
//! on demand:
//!
//!   entry(r, j) = sqrt((j+1)/(2ħ)) · (w_{j+1+r} − w_{j+r})
//!
//! with the 1/ħ of both gradients already folded in. The stored blocks are
//! the real symmetric representatives (for D_v this is the usual diagonal
//! phase gauge of i·[x,ρ]/ħ); singular values are unchanged.

use crate::shells::{binomial, ShellTable};
use crate::thermal::{OccupationProfile, StateKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientKind {
    /// D_x = [∇, ·] with ∇ = ip/ħ.
    Position,
    /// D_v = [x/(iħ), ·].
    Velocity,
}

impl std::fmt::Display for GradientKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GradientKind::Position => write!(f, "D_x"),
            GradientKind::Velocity => write!(f, "D_v"),
        }
    }
}

/// Block-tridiagonal representation of one gradient component.
#[derive(Debug, Clone)]
pub struct GradientBlocks {
    pub kind: GradientKind,
    /// Spatial axis the gradient acts along (0-based); the block data is
    /// axis-independent, the label is kept for reports.
    pub axis: usize,
    pub d: usize,
    pub hbar: f64,
    pub cutoff: usize,
    /// deltas[m] = w_{m+1} − w_m for the per-shell eigenvalue sequence w.
    deltas: Vec<f64>,
    /// The 1/ħ of the gradient definition is folded into the entries.
    pub inv_hbar_folded: bool,
}

impl GradientBlocks {
    /// Builds blocks for an arbitrary per-shell eigenvalue sequence
    /// (the thermal states, their square roots, G_μ, or any f(H)).
    pub fn from_shell_values(
        d: usize,
        hbar: f64,
        values: &[f64],
        kind: GradientKind,
        axis: usize,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "need at least one shell value".into(),
            ));
        }
        if axis >= d {
            return Err(Error::InvalidParameter(format!(
                "axis {axis} out of range for d = {d}"
            )));
        }
        let cutoff = values.len() - 1;
        let deltas = (0..cutoff).map(|m| values[m + 1] - values[m]).collect();
        Ok(Self {
            kind,
            axis,
            d,
            hbar,
            cutoff,
            deltas,
            inv_hbar_folded: true,
        })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// Number of distinct transverse shells (d = 1 has a single block).
    pub fn num_blocks(&self) -> usize {
        if self.d == 1 {
            1
        } else {
            self.cutoff + 1
        }
    }

    pub fn block_size(&self, r: usize) -> usize {
        self.cutoff - r + 1
    }

    /// Multiplicity g_{r,d-1} of the transverse shell r.
    pub fn block_mult(&self, r: usize) -> Result<u64> {
        if self.d == 1 {
            Ok(if r == 0 { 1 } else { 0 })
        } else {
            binomial((r + self.d - 2) as u64, (self.d - 2) as u64)
        }
    }

    #[inline]
    pub fn entry(&self, r: usize, j: usize) -> f64 {
        ((j as f64 + 1.0) / (2.0 * self.hbar)).sqrt() * self.deltas[j + r]
    }

    /// Off-diagonal sequence of block r (its diagonal is zero).
    pub fn block_entries(&self, r: usize) -> Vec<f64> {
        (0..self.cutoff - r).map(|j| self.entry(r, j)).collect()
    }

    /// Σ_r g_{r,d-1} (K−r+1); must equal C(K+d, d).
    pub fn total_dim(&self) -> Result<u64> {
        let mut total = 0u64;
        for r in 0..self.num_blocks() {
            total += self.block_mult(r)? * self.block_size(r) as u64;
        }
        Ok(total)
    }

    /// True when all occupation differences share one sign (always the case
    /// for monotone thermal profiles); enables the block-0 fast path for the
    /// largest singular value.
    pub fn sign_uniform(&self) -> bool {
        self.deltas.iter().all(|&x| x <= 0.0) || self.deltas.iter().all(|&x| x >= 0.0)
    }
}

fn check_compatible(profile: &OccupationProfile, shells: &ShellTable) -> Result<()> {
    if profile.params.d != shells.d
        || profile.params.hbar != shells.hbar
        || profile.cutoff != shells.cutoff
    {
        return Err(Error::CutoffMismatch(format!(
            "profile (d={}, hbar={}, K={}) vs shells (d={}, hbar={}, K={})",
            profile.params.d,
            profile.params.hbar,
            profile.cutoff,
            shells.d,
            shells.hbar,
            shells.cutoff
        )));
    }
    Ok(())
}

/// Gradient of the state itself, from the eigenbasis commutator identity
/// ([A, ρ])_{mn} = A_{mn}(ρ_n − ρ_m).
pub fn commutator_blocks(
    profile: &OccupationProfile,
    shells: &ShellTable,
    kind: GradientKind,
) -> Result<GradientBlocks> {
    check_compatible(profile, shells)?;
    GradientBlocks::from_shell_values(
        shells.d,
        shells.hbar,
        &profile.state_eigenvalues(),
        kind,
        0,
    )
}

/// Gradient of √ρ: same block structure with differences of the elementwise
/// square roots of the state eigenvalues.
pub fn sqrt_gradient_blocks(
    profile: &OccupationProfile,
    shells: &ShellTable,
    kind: GradientKind,
) -> Result<GradientBlocks> {
    check_compatible(profile, shells)?;
    GradientBlocks::from_shell_values(
        shells.d,
        shells.hbar,
        &profile.sqrt_state_eigenvalues(),
        kind,
        0,
    )
}

/// How the Duhamel s-integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DuhamelPath {
    /// ∫₀¹ a^{1-s} b^s ds = (a−b)/ln(a/b), with the a = b limit → a.
    Analytic,
    /// Gauss–Legendre quadrature of the given order on s ∈ [0, 1].
    GaussLegendre(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct DuhamelDiagnostics {
    /// |ln(a/b)| across adjacent shells; equals βħ for thermal kernels.
    pub max_log_ratio: f64,
    /// Set when the kernel decays so fast across a shell that fixed-order
    /// quadrature is unreliable and the analytic path should be used.
    pub quadrature_warning: bool,
}

const QUADRATURE_LOG_RATIO_LIMIT: f64 = 25.0;

/// The analytic s-kernel ∫₀¹ a^{1-s} b^s ds for a, b > 0.
pub fn analytic_s_kernel(a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    let u = (a / b).ln();
    a * (-(-u).exp_m1()) / u
}

/// Gradient of the state through the Duhamel representation
///
///   Dρ_β = −β ∫₀¹ G_μ^{1-s} (1+λG_μ)⁻¹ (DH) (1+λG_μ)⁻¹ G_μ^s ds
///
/// (and Dĝ_β = −(β/Z_β) ∫₀¹ G^{1-s} (DH) G^s ds for Maxwell–Boltzmann). All
/// factors are diagonal except DH, so the integral reduces per shell pair;
/// the products are regrouped into occupation form before exponentials can
/// overflow.
pub fn duhamel_blocks(
    profile: &OccupationProfile,
    shells: &ShellTable,
    kind: GradientKind,
    path: DuhamelPath,
) -> Result<(GradientBlocks, DuhamelDiagnostics)> {
    check_compatible(profile, shells)?;
    let beta = profile.params.beta;
    let hbar = shells.hbar;
    let bh = beta * hbar;

    // s-integral of e^{-s βħ} relative to the left endpoint
    let s_factor = match path {
        DuhamelPath::Analytic => -(-bh).exp_m1() / bh,
        DuhamelPath::GaussLegendre(order) => {
            if order < 2 {
                return Err(Error::InvalidParameter(
                    "Gauss-Legendre order must be >= 2".into(),
                ));
            }
            let (nodes, weights) = crate::quad::gauss_legendre(order);
            nodes
                .iter()
                .zip(weights.iter())
                .map(|(&x, &w)| 0.5 * w * (-(0.5 + 0.5 * x) * bh).exp())
                .sum()
        }
    };

    let w = profile.state_eigenvalues();
    let deltas: Vec<f64> = match profile.kind {
        StateKind::FermiDirac => {
            // -βħ · kern(a_m, a_{m+1}) · f_m f_{m+1} with f = (1+λG_μ)⁻¹;
            // a f_m = w_m and the remaining factor is 1 − n_{m+1}
            (0..shells.cutoff)
                .map(|m| -bh * s_factor * w[m] * (1.0 - profile.occ[m + 1]))
                .collect()
        }
        StateKind::MaxwellBoltzmann => (0..shells.cutoff)
            .map(|m| -bh * s_factor * w[m])
            .collect(),
    };

    let diag = DuhamelDiagnostics {
        max_log_ratio: bh,
        quadrature_warning: matches!(path, DuhamelPath::GaussLegendre(_))
            && bh > QUADRATURE_LOG_RATIO_LIMIT,
    };
    Ok((
        GradientBlocks {
            kind,
            axis: 0,
            d: shells.d,
            hbar,
            cutoff: shells.cutoff,
            deltas,
            inv_hbar_folded: true,
        },
        diag,
    ))
}
