//! Matrices shared by the integration suites.
#![allow(dead_code)]

use deqlens_core::families::{diag_power_family, identity, random_block_hermitian, random_support_hermitian};
use deqlens_core::matrix::{DEFAULT_HERM_TOL, DEFAULT_ZERO_TOL};
use deqlens_core::quasinorms::frobenius_norm;
use deqlens_core::{Complex64, SparseHermitianMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn real(dim: usize, entries: &[(usize, usize, f64)]) -> SparseHermitianMatrix {
    SparseHermitianMatrix::from_real_entries(dim, entries).expect("valid worked example")
}

/// The small hand-checkable instances: `D`, `I₃`, `J`, `Y` and `X`.
pub fn worked_examples() -> Vec<(String, SparseHermitianMatrix)> {
    vec![
        ("D".into(), real(3, &[(0, 0, 0.25), (1, 1, 0.0625), (2, 2, 0.015625)])),
        ("I3".into(), real(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)])),
        (
            "J".into(),
            real(2, &[(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)]),
        ),
        (
            "Y".into(),
            real(2, &[(0, 0, 0.6), (0, 1, 0.3), (1, 0, 0.3), (1, 1, 0.2)]),
        ),
        ("X".into(), real(2, &[(0, 1, 0.5), (1, 0, 0.5)])),
    ]
}

/// Complex Hermitian with roughly `density` of the off-diagonal pairs filled,
/// scaled so that its Frobenius norm, and hence its spectral norm, is `norm`.
pub fn complex_hermitian(n: usize, density: f64, norm: f64, seed: u64) -> SparseHermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        entries.push((i, i, Complex64::new(rng.gen_range(-1.0..=1.0), 0.0)));
        for j in 0..i {
            if rng.gen_bool(density) {
                let v = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                entries.push((i, j, v));
                entries.push((j, i, v.conj()));
            }
        }
    }
    let a = SparseHermitianMatrix::from_coordinates(n, entries, DEFAULT_ZERO_TOL, DEFAULT_HERM_TOL)
        .expect("generated entries are Hermitian");
    a.scaled(norm / frobenius_norm(&a)).expect("nonzero matrix")
}

/// Dense real matrix whose entries all share one magnitude; `‖A‖_F` ties the mixed term.
pub fn uniform_magnitude(n: usize, c: f64, seed: u64) -> SparseHermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        entries.push((i, i, c));
        for j in 0..i {
            let v = if rng.gen_bool(0.5) { c } else { -c };
            entries.push((i, j, v));
            entries.push((j, i, v));
        }
    }
    real(n, &entries)
}

/// Random Hermitian with spectral norm at most 1, cycling through the generators.
pub fn random_unit_hermitian(k: u64) -> SparseHermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + k);
    let n = rng.gen_range(2..=16);
    let s = rng.gen_range(1..=n);
    match k % 3 {
        0 => {
            let lo = rng.gen_range(0.01..=1.0);
            let hi = rng.gen_range(lo..=1.0);
            random_block_hermitian(n, s, (lo, hi), k).expect("valid block parameters")
        }
        1 => random_support_hermitian(n, s, k).expect("valid support parameters"),
        _ => complex_hermitian(n, rng.gen_range(0.1..=1.0), rng.gen_range(0.05..=1.0), k),
    }
}

/// Every matrix the cross-check suites run over.
pub fn corpus() -> Vec<(String, SparseHermitianMatrix)> {
    let mut out = worked_examples();
    for n in 2..=8 {
        out.push((format!("identity({n})"), identity(n).unwrap()));
        for off in [1.0, 2.5, 6.0] {
            let d = n as f64 + off;
            out.push((format!("diag_power({n}, {d})"), diag_power_family(n, d).unwrap()));
        }
    }
    for seed in 0..40u64 {
        let n = 4 + (seed as usize % 29);
        let s = 1 + (seed as usize * 7) % n;
        out.push((
            format!("random_block({n}, {s}, seed {seed})"),
            random_block_hermitian(n, s, (0.05, 1.0), seed).unwrap(),
        ));
        out.push((
            format!("random_support({n}, {s}, seed {seed})"),
            random_support_hermitian(n, s, seed).unwrap(),
        ));
        out.push((
            format!("complex({n}, seed {seed})"),
            complex_hermitian(n, 0.3, 0.9, 1000 + seed),
        ));
    }
    for (n, c) in [(2, 0.5), (4, 0.25), (8, 0.125), (5, 0.2)] {
        out.push((
            format!("uniform_magnitude({n}, {c})"),
            uniform_magnitude(n, c, n as u64),
        ));
    }
    out
}
