//! Spectral calculus for thermal states of the d-dimensional harmonic trap.
//!
//! Everything is computed exactly in the Hermite eigenbasis: no wavefunction
//! is ever evaluated pointwise. The crate builds Fermi–Dirac and
//! Maxwell–Boltzmann occupation profiles, their quantum gradients
//! `[∇, ρ]` and `[x/(iħ), ρ]` as block-tridiagonal operators, and evaluates
//! rescaled (semiclassical) Schatten norms, momentum-weighted Sobolev norms,
//! and the analytic bounds these quantities satisfy.
//!
//! The companion `oracle` module carries slow dense reference implementations
//! for tests; production paths never go through it.

pub mod bounds;
pub mod gradients;
pub mod norms;
pub mod oracle;
pub mod quad;
pub mod shells;
pub mod thermal;
pub mod tridiag;
pub mod wigner;

pub use gradients::{GradientBlocks, GradientKind};
pub use norms::{SingularSpectrum, WeightSpec};
pub use shells::{LadderElements, ShellTable};
pub use thermal::{ModelParams, OccupationProfile, StateKind};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("chemical potential bracket failure: {0}")]
    BracketFailure(String),

    #[error("root finder did not converge after {iters} iterations (relative residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("truncation tail estimate {tail:.3e} exceeds tolerance {tol:.3e} at cutoff K={cutoff}")]
    TailTooLarge { cutoff: usize, tail: f64, tol: f64 },

    #[error("dense dimension {dim} exceeds ceiling {ceiling}")]
    DenseCeiling { dim: usize, ceiling: usize },

    #[error("tridiagonal eigensolver failed to converge (block {block})")]
    EigenFailure { block: usize },

    #[error("cutoff mismatch: {0}")]
    CutoffMismatch(String),

    #[error("quadrature tolerance not met: {0}")]
    QuadratureFailure(String),

    #[error("state constraint violated: {0}")]
    ConstraintViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Compensated (Kahan) accumulator. The trace constraint is enforced at
/// 1e-12 relative over sums with up to ~10^6 terms, which plain summation
/// cannot guarantee.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
