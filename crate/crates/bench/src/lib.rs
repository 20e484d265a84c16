//! Shared inputs for the criterion benchmarks.

use deqlens_core::families::{random_block_hermitian, random_support_hermitian};
use deqlens_core::SparseHermitianMatrix;

/// Dense real symmetric matrix with spectrum in `[0.1, 1]`.
pub fn dense_hermitian(n: usize, seed: u64) -> SparseHermitianMatrix {
    random_block_hermitian(n, n, (0.1, 1.0), seed).expect("valid generator parameters")
}

/// Irregular sparse pattern with at most `s` nonzeros per row.
pub fn sparse_hermitian(n: usize, s: usize, seed: u64) -> SparseHermitianMatrix {
    random_support_hermitian(n, s, seed).expect("valid generator parameters")
}
