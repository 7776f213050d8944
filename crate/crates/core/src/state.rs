//! Two-qubit density matrices and entanglement metrics.
//!
//! Basis order is `|e_XX e_X>, |e_XX l_X>, |l_XX e_X>, |l_XX l_X>`, i.e.
//! `|00>, |01>, |10>, |11>` with the biexciton photon as the first qubit.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, kron, pauli_y, ComplexMatrix, ZERO};

/// Tolerance for Hermiticity, trace and positivity of a density matrix.
pub const STATE_TOL: f64 = 1e-10;

/// A validated 4x4 two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Real diagonal `(rho_00, rho_11, rho_22, rho_33)`.
    pub fn populations(&self) -> [f64; 4] {
        core::array::from_fn(|i| self.0[(i, i)].re)
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(4).scale_real(0.25))
    }

    /// `|psi><psi|` for a normalized 4-component state.
    pub fn pure(psi: &[Complex64; 4]) -> Result<Self> {
        validate_density_matrix(&ComplexMatrix::outer(psi))
    }

    /// Wraps a matrix without checking invariants. Only for values that
    /// are physical by construction.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// `a * self + (1 - a) * other`.
    pub fn mix(&self, other: &Self, a: f64) -> Self {
        Self(&self.0.scale_real(a) + &other.0.scale_real(1.0 - a))
    }
}

/// `(|00> + |11>) / sqrt(2)`.
pub fn phi_plus() -> [Complex64; 4] {
    let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
    [h, ZERO, ZERO, h]
}

/// Checks Hermiticity, unit trace and positivity, in that order.
pub fn validate_density_matrix(m: &ComplexMatrix) -> Result<DensityMatrix> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::DimensionMismatch { rows: m.rows(), cols: m.cols() });
    }
    let deviation = m.hermitian_deviation();
    if deviation > STATE_TOL {
        return Err(Error::HermiticityViolation { deviation });
    }
    let trace = m.trace().re;
    if (trace - 1.0).abs() > STATE_TOL {
        return Err(Error::TraceViolation { trace });
    }
    let es = hermitian_eigensystem(m)?;
    let min = es.values[3];
    if min < -STATE_TOL {
        return Err(Error::PositivityViolation { eigenvalue: min });
    }
    Ok(DensityMatrix(m.clone()))
}

/// `<psi| rho |psi>` clamped to `[0, 1]`.
pub fn fidelity_to_pure(rho: &DensityMatrix, psi: &[Complex64]) -> Result<f64> {
    if psi.len() != 4 {
        return Err(Error::DimensionMismatch { rows: psi.len(), cols: 1 });
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > STATE_TOL {
        return Err(Error::UnnormalizedTarget { norm });
    }
    let mut f = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            f += psi[i].conj() * rho.0[(i, j)] * psi[j];
        }
    }
    Ok(f.re.clamp(0.0, 1.0))
}

/// Wootters concurrence. The spin-flip eigenvalues are taken from the
/// Hermitian form `sqrt(rho) rho~ sqrt(rho)`, which shares its spectrum
/// with `rho rho~`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let lambdas = spin_flip_roots(rho)?;
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// Square roots of the eigenvalues of `rho (Y x Y) rho* (Y x Y)`, descending.
pub fn spin_flip_roots(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let yy = kron(&pauli_y(), &pauli_y());
    let flipped = &(&yy * &rho.0.conj()) * &yy;
    let es = hermitian_eigensystem(&rho.0)?;
    let sqrt_rho = es.reconstruct_with(|x| x.max(0.0).sqrt());
    let m = (&(&sqrt_rho * &flipped) * &sqrt_rho).hermitian_part();
    let mut roots: Vec<f64> = hermitian_eigensystem(&m)?.values.into_iter().map(|x| x.max(0.0).sqrt()).collect();
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(roots)
}

/// Concurrence squared.
pub fn tangle(rho: &DensityMatrix) -> Result<f64> {
    concurrence(rho).map(|c| c * c)
}

/// Closed-form concurrence of an X-shaped state:
/// `2 max(0, |rho_03| - sqrt(rho_11 rho_22), |rho_12| - sqrt(rho_00 rho_33))`.
pub fn x_state_concurrence(rho: &DensityMatrix) -> f64 {
    let p = rho.populations();
    let outer = rho.get(0, 3).norm() - (p[1] * p[2]).max(0.0).sqrt();
    let inner = rho.get(1, 2).norm() - (p[0] * p[3]).max(0.0).sqrt();
    2.0 * outer.max(inner).max(0.0)
}

/// X-state with given diagonal and coherences `rho_03`, `rho_12`.
pub fn x_state(populations: [f64; 4], outer: Complex64, inner: Complex64) -> Result<DensityMatrix> {
    let mut m = ComplexMatrix::diag(&populations);
    m[(0, 3)] = outer;
    m[(3, 0)] = outer.conj();
    m[(1, 2)] = inner;
    m[(2, 1)] = inner.conj();
    validate_density_matrix(&m)
}
