//! Slow, dense, obviously-correct reference implementations. Everything
//! here materializes full d-dimensional operators on the graded basis and
//! leans on a generic dense eigensolver. Test and selftest territory only;
//! production paths never come through this module.

use crate::gradients::GradientKind;
use crate::shells::GradedBasis;
use crate::thermal::OccupationProfile;
use crate::{Error, Result};
use nalgebra::DMatrix;

/// A dense operator with its basis bookkeeping. All operators this crate
/// needs have real representatives in the graded Hermite basis (momentum
/// carries a diagonal phase gauge), so entries are stored real; `symmetric`
/// records which representative is held.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
    pub symmetric: bool,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Singular values, nonincreasing: |eigenvalues| for the symmetric
    /// representative, a full SVD otherwise (the Gram route would wash out
    /// the small values by squaring the condition number).
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = if self.symmetric {
            self.matrix
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .map(|l| l.abs())
                .collect()
        } else {
            self.matrix
                .clone()
                .svd(false, false)
                .singular_values
                .iter()
                .copied()
                .collect()
        };
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }
}

fn check_dim(basis: &GradedBasis, ceiling: usize) -> Result<()> {
    if basis.dim() > ceiling {
        return Err(Error::DenseCeiling {
            dim: basis.dim(),
            ceiling,
        });
    }
    Ok(())
}

/// Position operator along `axis`: ⟨n−e_a| x_a |n⟩ = sqrt(ħ n_a / 2).
pub fn dense_position(basis: &GradedBasis, hbar: f64, axis: usize, ceiling: usize) -> Result<DenseOperator> {
    check_dim(basis, ceiling)?;
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    ladder_fill(basis, axis, &mut m, |amp| (amp, amp));
    Ok(DenseOperator {
        matrix: m.map(|v| v * (hbar / 2.0).sqrt()),
        symmetric: true,
    })
}

/// The real antisymmetric factor A of the momentum p_a = i sqrt(ħ/2) A,
/// i.e. A = a†_a − a_a in ladder form.
pub fn dense_momentum_factor(
    basis: &GradedBasis,
    axis: usize,
    ceiling: usize,
) -> Result<DenseOperator> {
    check_dim(basis, ceiling)?;
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    // raising entries positive, lowering negative
    ladder_fill(basis, axis, &mut m, |amp| (amp, -amp));
    Ok(DenseOperator {
        matrix: m,
        symmetric: false,
    })
}

/// Fills ladder couplings: for every basis state n with n_a ≥ 1, the pair
/// (⟨n|·|n−e_a⟩, ⟨n−e_a|·|n⟩) = f(sqrt(n_a)).
fn ladder_fill<F: Fn(f64) -> (f64, f64)>(
    basis: &GradedBasis,
    axis: usize,
    m: &mut DMatrix<f64>,
    f: F,
) {
    for (i, idx) in basis.indices.iter().enumerate() {
        if idx[axis] == 0 {
            continue;
        }
        let mut down = idx.clone();
        down[axis] -= 1;
        let j = basis.position(&down).expect("lowered index stays in the simplex");
        let amp = (idx[axis] as f64).sqrt();
        let (raise, lower) = f(amp);
        m[(i, j)] = raise; // ⟨n| · |n-e⟩ row i, col j
        m[(j, i)] = lower;
    }
}

/// Diagonal density operator of the profile in graded order.
pub fn dense_state(
    profile: &OccupationProfile,
    basis: &GradedBasis,
    ceiling: usize,
) -> Result<DenseOperator> {
    check_dim(basis, ceiling)?;
    if basis.d != profile.params.d || basis.cutoff != profile.cutoff {
        return Err(Error::CutoffMismatch(
            "basis does not match the profile".into(),
        ));
    }
    let w = profile.state_eigenvalues();
    let m = DMatrix::from_fn(basis.dim(), basis.dim(), |i, j| {
        if i == j {
            w[basis.shell_of(i)]
        } else {
            0.0
        }
    });
    Ok(DenseOperator {
        matrix: m,
        symmetric: true,
    })
}

/// Dense gradient by honest matrix products: [∇_a, ρ] (symmetric
/// representative) or [x_a, ρ]/ħ (antisymmetric), built from the dense
/// operator factors rather than from the block formulas.
pub fn dense_gradient(
    profile: &OccupationProfile,
    basis: &GradedBasis,
    kind: GradientKind,
    axis: usize,
    ceiling: usize,
) -> Result<DenseOperator> {
    let rho = dense_state(profile, basis, ceiling)?.matrix;
    match kind {
        GradientKind::Position => {
            // ∇ = sqrt(1/2ħ)(a − a†): lowering entries positive
            let mut nabla = DMatrix::zeros(basis.dim(), basis.dim());
            ladder_fill(basis, axis, &mut nabla, |amp| (-amp, amp));
            let nabla = nabla.map(|v| v / (2.0 * profile.params.hbar).sqrt());
            let comm = &nabla * &rho - &rho * &nabla;
            Ok(DenseOperator {
                matrix: comm,
                symmetric: true,
            })
        }
        GradientKind::Velocity => {
            let x = dense_position(basis, profile.params.hbar, axis, ceiling)?.matrix;
            let comm = (&x * &rho - &rho * &x) / profile.params.hbar;
            Ok(DenseOperator {
                matrix: comm,
                symmetric: false,
            })
        }
    }
}

/// Dense |p|² = Σ_a p_a² = −(ħ/2) Σ_a A_a².
pub fn dense_p_squared(basis: &GradedBasis, hbar: f64, ceiling: usize) -> Result<DenseOperator> {
    check_dim(basis, ceiling)?;
    let mut acc = DMatrix::zeros(basis.dim(), basis.dim());
    for axis in 0..basis.d {
        let a = dense_momentum_factor(basis, axis, ceiling)?.matrix;
        acc += &a * &a;
    }
    Ok(DenseOperator {
        matrix: acc * (-hbar / 2.0),
        symmetric: true,
    })
}

/// Exact compression of |p|² to the basis cutoff: assembled on a basis
/// enlarged by two shells and restricted, so the boundary rows carry the
/// true matrix elements instead of the square of a truncated factor.
pub fn dense_p_squared_compressed(
    basis: &GradedBasis,
    hbar: f64,
    ceiling: usize,
) -> Result<DenseOperator> {
    check_dim(basis, ceiling)?;
    let big = GradedBasis::new(basis.d, basis.cutoff + 2)?;
    let full = dense_p_squared(&big, hbar, big.dim().max(ceiling))?.matrix;
    let map: Vec<usize> = basis
        .indices
        .iter()
        .map(|idx| big.position(idx).expect("small basis embeds in the big one"))
        .collect();
    let m = DMatrix::from_fn(basis.dim(), basis.dim(), |i, j| full[(map[i], map[j])]);
    Ok(DenseOperator {
        matrix: m,
        symmetric: true,
    })
}

/// Dense x² + p² assembled from the factor operators; its upper-left block
/// must be 2·diag(E) away from the truncation boundary.
pub fn dense_hamiltonian_twice(basis: &GradedBasis, hbar: f64, ceiling: usize) -> Result<DenseOperator> {
    check_dim(basis, ceiling)?;
    let mut acc = dense_p_squared(basis, hbar, ceiling)?.matrix;
    for axis in 0..basis.d {
        let x = dense_position(basis, hbar, axis, ceiling)?.matrix;
        acc += &x * &x;
    }
    Ok(DenseOperator {
        matrix: acc,
        symmetric: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shells::build_shell_table;
    use crate::thermal::{solve_chemical_potential, ModelParams};
    use approx::assert_relative_eq;

    fn profile_d2() -> (OccupationProfile, GradedBasis) {
        let params = ModelParams::new(2, 0.5, 1.0, 1.0).unwrap();
        let shells = build_shell_table(2, 0.5, 9).unwrap();
        let prof = solve_chemical_potential(&params, &shells).unwrap();
        let basis = GradedBasis::new(2, 9).unwrap();
        (prof, basis)
    }

    #[test]
    fn state_is_diagonal_with_unit_trace() {
        let (prof, basis) = profile_d2();
        let rho = dense_state(&prof, &basis, 4000).unwrap();
        let h = prof.params.h();
        let trace: f64 = (0..rho.dim()).map(|i| rho.matrix[(i, i)]).sum();
        assert_relative_eq!(h * h * trace, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gradient_antisymmetry_and_symmetry() {
        let (prof, basis) = profile_d2();
        let gx = dense_gradient(&prof, &basis, GradientKind::Position, 0, 4000).unwrap();
        let dev = (&gx.matrix - gx.matrix.transpose()).abs().max();
        assert!(dev < 1e-14, "position gradient not symmetric: {dev}");
        let gv = dense_gradient(&prof, &basis, GradientKind::Velocity, 0, 4000).unwrap();
        let dev = (&gv.matrix + gv.matrix.transpose()).abs().max();
        assert!(dev < 1e-14, "velocity gradient not antisymmetric: {dev}");
    }

    #[test]
    fn axis_permutation_symmetry() {
        let (prof, basis) = profile_d2();
        let s0 = dense_gradient(&prof, &basis, GradientKind::Position, 0, 4000)
            .unwrap()
            .singular_values();
        let s1 = dense_gradient(&prof, &basis, GradientKind::Position, 1, 4000)
            .unwrap()
            .singular_values();
        for (a, b) in s0.iter().zip(s1.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12 * s0[0]);
        }
    }

    #[test]
    fn hamiltonian_reconstruction_masking_boundary() {
        // (x² + p²)/2 from dense factors reproduces diag(E_k) except within
        // two shells of the truncation boundary
        for d in [1usize, 2] {
            let k = 8;
            let hbar = 0.7;
            let basis = GradedBasis::new(d, k).unwrap();
            let h2 = dense_hamiltonian_twice(&basis, hbar, 4000).unwrap().matrix;
            for i in 0..basis.dim() {
                let shell = basis.shell_of(i);
                if shell > k - 2 {
                    continue;
                }
                let expect = 2.0 * (shell as f64 + d as f64 / 2.0) * hbar;
                assert_relative_eq!(h2[(i, i)], expect, epsilon = 1e-12);
                for j in 0..basis.dim() {
                    if i != j && basis.shell_of(j) <= k - 2 {
                        assert!(h2[(i, j)].abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn dense_ceiling_respected() {
        let basis = GradedBasis::new(2, 9).unwrap();
        assert!(matches!(
            dense_position(&basis, 0.5, 0, 10),
            Err(Error::DenseCeiling { .. })
        ));
    }
}
