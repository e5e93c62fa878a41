//! Eigenstructure of the d-dimensional harmonic oscillator H = (|p|² + |x|²)/2.
//!
//! Shell k collects the eigenstates of total quantum number |n|₁ = k with
//! energy E_k = (k + d/2)ħ and multiplicity g_{k,d} = C(k+d−1, d−1). Matrix
//! elements of x and p are taken from the ladder algebra; Hermite functions
//! are never evaluated.

use crate::tridiag::SymTridiag;
use crate::{Error, Result};
use std::collections::HashMap;

/// Oscillator shells at a fixed truncation |n|₁ ≤ K.
#[derive(Debug, Clone)]
pub struct ShellTable {
    pub d: usize,
    pub hbar: f64,
    pub cutoff: usize,
    /// E_k = (k + d/2)ħ for k = 0..=K.
    pub energies: Vec<f64>,
    /// g_{k,d} = C(k+d−1, d−1) for k = 0..=K.
    pub mults: Vec<u64>,
}

/// Binomial coefficient in u64, erroring on overflow rather than wrapping.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - k + i + 1)
            .ok_or_else(|| Error::InvalidParameter(format!("binomial({n},{k}) overflows u64")))?
            / (i + 1);
    }
    Ok(acc)
}

/// C(m+d, d) as f64, filled iteratively for m = 0..len. Exact while the
/// values stay below 2^53; beyond that the relative error is ~1e-16, which
/// is all the norm accumulations need.
pub fn binomial_shifted_f64(d: usize, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut c = 1.0_f64;
    for m in 0..len {
        if m > 0 {
            c *= (m + d) as f64 / m as f64;
        }
        out.push(c);
    }
    out
}

impl ShellTable {
    /// Total dimension of the truncated space, Σ_k g_{k,d} = C(K+d, d).
    pub fn total_dim(&self) -> Result<u64> {
        binomial((self.cutoff + self.d) as u64, self.d as u64)
    }
}

/// Builds the shell table for dimension `d`, Planck constant `hbar` and
/// shell cutoff `K`.
pub fn build_shell_table(d: usize, hbar: f64, cutoff: usize) -> Result<ShellTable> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
    }
    if !hbar.is_finite() || hbar <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "hbar must be a positive finite real, got {hbar}"
        )));
    }
    let mut energies = Vec::with_capacity(cutoff + 1);
    let mut mults = Vec::with_capacity(cutoff + 1);
    for k in 0..=cutoff {
        energies.push((k as f64 + d as f64 / 2.0) * hbar);
        mults.push(binomial((k + d - 1) as u64, (d - 1) as u64)?);
    }
    Ok(ShellTable {
        d,
        hbar,
        cutoff,
        energies,
        mults,
    })
}

/// One-direction ladder couplings: x connects levels j and j+1 with
/// ⟨j|x|j+1⟩ = sqrt(ħ(j+1)/2). Momentum couplings have the same magnitude.
#[derive(Debug, Clone, Copy)]
pub struct LadderElements {
    pub hbar: f64,
}

impl LadderElements {
    pub fn new(hbar: f64) -> Self {
        Self { hbar }
    }

    #[inline]
    pub fn offdiag(&self, j: usize) -> f64 {
        (self.hbar * (j as f64 + 1.0) / 2.0).sqrt()
    }

    /// Single-direction x as a symmetric tridiagonal matrix on levels 0..=K.
    pub fn x_matrix(&self, cutoff: usize) -> SymTridiag {
        let off = (0..cutoff).map(|j| self.offdiag(j)).collect();
        SymTridiag {
            diag: vec![0.0; cutoff + 1],
            off,
        }
    }
}

/// Single-direction p² on levels 0..=K, split into its even / odd parity
/// blocks. Diagonal entries are ħ(j+1/2); the (j, j+2) coupling is
/// −(ħ/2)·sqrt((j+1)(j+2)), so each parity class is a symmetric tridiagonal
/// block.
pub fn momentum_squared_parity_blocks(cutoff: usize, hbar: f64) -> Result<(SymTridiag, SymTridiag)> {
    if !hbar.is_finite() || hbar <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "hbar must be a positive finite real, got {hbar}"
        )));
    }
    let block = |start: usize| -> SymTridiag {
        let levels: Vec<usize> = (start..=cutoff).step_by(2).collect();
        let diag = levels.iter().map(|&j| hbar * (j as f64 + 0.5)).collect();
        let off = levels
            .iter()
            .take(levels.len().saturating_sub(1))
            .map(|&j| -(hbar / 2.0) * ((j as f64 + 1.0) * (j as f64 + 2.0)).sqrt())
            .collect();
        SymTridiag { diag, off }
    };
    Ok((block(0), block(1)))
}

/// Graded lexicographic enumeration of {n ∈ N₀^d : |n|₁ ≤ K}, with the
/// inverse lookup. Shared by the dense weighted-norm path and the oracle.
#[derive(Debug, Clone)]
pub struct GradedBasis {
    pub d: usize,
    pub cutoff: usize,
    pub indices: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl GradedBasis {
    pub fn new(d: usize, cutoff: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
        }
        let mut indices = Vec::new();
        for k in 0..=cutoff {
            let mut current = vec![0u32; d];
            compositions(k as u32, d, 0, &mut current, &mut indices);
        }
        let lookup = indices
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        Ok(Self {
            d,
            cutoff,
            indices,
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, n: &[u32]) -> Option<usize> {
        self.lookup.get(n).copied()
    }

    /// Total quantum number of basis state `i`.
    pub fn shell_of(&self, i: usize) -> usize {
        self.indices[i].iter().map(|&v| v as usize).sum()
    }
}

fn compositions(rest: u32, d: usize, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos == d - 1 {
        current[pos] = rest;
        out.push(current.clone());
        return;
    }
    // lexicographic within a shell: leading coordinate descending would be
    // "reverse lex"; plain ascending on each coordinate is fine as long as
    // the map is a bijection, which the lookup table guarantees.
    for v in (0..=rest).rev() {
        current[pos] = v;
        compositions(rest - v, d, pos + 1, current, out);
    }
}
