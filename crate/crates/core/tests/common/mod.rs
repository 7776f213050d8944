#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use timebin_core::linalg::ComplexMatrix;
use timebin_core::state::{validate_density_matrix, DensityMatrix};
use timebin_core::Complex64;

pub fn gaussian_matrix<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..n * n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    ComplexMatrix::from_vec(n, n, data).unwrap()
}

pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    gaussian_matrix(n, rng).hermitian_part()
}

/// Ginibre ensemble; `rank` columns of Gaussian noise.
pub fn random_state<R: Rng>(rank: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(4, rng);
    let mut cols = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..rank.min(4) {
            cols[(i, j)] = g[(i, j)];
        }
    }
    let m = cols.matmul(&cols.adjoint());
    let tr = m.trace().re;
    validate_density_matrix(&m.scale_real(1.0 / tr)).unwrap()
}

pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = f(i, j);
        }
    }
    m
}
