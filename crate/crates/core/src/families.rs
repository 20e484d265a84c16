//! Deterministic matrix generators.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{SparseHermitianMatrix, DEFAULT_HERM_TOL, DEFAULT_ZERO_TOL};
use crate::spectrum;

/// Identifier of the seeded generator, recorded with every generated matrix.
pub const PRNG_ID: &str = "chacha8/seed_from_u64";

/// Relative threshold below which a rescaled random matrix is flagged singular.
pub const SINGULAR_FLAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Identity,
    DiagPower,
    RandomBlockHermitian,
    RandomSupportHermitian,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Identity => "identity",
            FamilyKind::DiagPower => "diag-power",
            FamilyKind::RandomBlockHermitian => "random-block-hermitian",
            FamilyKind::RandomSupportHermitian => "random-support-hermitian",
        }
    }
}

/// Full parameter set of a generated matrix. Equal specs give identical matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_range: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prng_id: Option<String>,
}

impl FamilySpec {
    pub fn identity(n: usize) -> Self {
        FamilySpec {
            kind: FamilyKind::Identity,
            n,
            d: None,
            s: None,
            spectrum_range: None,
            seed: None,
            prng_id: None,
        }
    }

    pub fn diag_power(n: usize, d: f64) -> Self {
        FamilySpec {
            kind: FamilyKind::DiagPower,
            d: Some(d),
            ..Self::identity(n)
        }
    }

    pub fn random_block(n: usize, s: usize, range: (f64, f64), seed: u64) -> Self {
        FamilySpec {
            kind: FamilyKind::RandomBlockHermitian,
            s: Some(s),
            spectrum_range: Some(range),
            seed: Some(seed),
            prng_id: Some(PRNG_ID.to_string()),
            ..Self::identity(n)
        }
    }

    pub fn random_support(n: usize, s: usize, seed: u64) -> Self {
        FamilySpec {
            kind: FamilyKind::RandomSupportHermitian,
            s: Some(s),
            seed: Some(seed),
            prng_id: Some(PRNG_ID.to_string()),
            ..Self::identity(n)
        }
    }

    pub fn generate(&self) -> Result<Generated> {
        let missing = |what: &str| Error::domain(format!("{} family needs {what}", self.kind.name()));
        match self.kind {
            FamilyKind::Identity => Ok(Generated {
                matrix: identity(self.n)?,
                known_spectrum: Some(vec![1.0; self.n]),
                singular: false,
            }),
            FamilyKind::DiagPower => {
                let d = self.d.ok_or_else(|| missing("d"))?;
                let matrix = diag_power_family(self.n, d)?;
                let mut known: Vec<f64> = matrix.entries().map(|(_, _, v)| v.re).collect();
                known.sort_by(f64::total_cmp);
                Ok(Generated {
                    matrix,
                    known_spectrum: Some(known),
                    singular: false,
                })
            }
            FamilyKind::RandomBlockHermitian => {
                let s = self.s.ok_or_else(|| missing("s"))?;
                let range = self.spectrum_range.ok_or_else(|| missing("a spectrum range"))?;
                let seed = self.seed.ok_or_else(|| missing("a seed"))?;
                let (matrix, known) = random_block_hermitian_with_spectrum(self.n, s, range, seed)?;
                Ok(Generated {
                    matrix,
                    known_spectrum: Some(known),
                    singular: false,
                })
            }
            FamilyKind::RandomSupportHermitian => {
                let s = self.s.ok_or_else(|| missing("s"))?;
                let seed = self.seed.ok_or_else(|| missing("a seed"))?;
                let (matrix, singular) = random_support_hermitian_flagged(self.n, s, seed)?;
                Ok(Generated {
                    matrix,
                    known_spectrum: None,
                    singular,
                })
            }
        }
    }

    /// Provenance line for Matrix Market headers.
    pub fn provenance(&self) -> String {
        format!(
            "deqlens family {}",
            serde_json::to_string(self).expect("family spec serializes")
        )
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub matrix: SparseHermitianMatrix,
    /// Exact spectrum when the construction fixes it, ascending.
    pub known_spectrum: Option<Vec<f64>>,
    /// Set when the generator produced a (numerically) singular matrix.
    pub singular: bool,
}

/// `diag(d^-1, d^-2, ..., d^-n)`.
pub fn diag_power_family(n: usize, d: f64) -> Result<SparseHermitianMatrix> {
    if n < 2 {
        return Err(Error::domain(format!("diag-power family needs n >= 2, got {n}")));
    }
    if !(d.is_finite() && d > n as f64) {
        return Err(Error::domain(format!(
            "diag-power family needs d > n, got n = {n}, d = {d}"
        )));
    }
    let entries: Vec<_> = (0..n)
        .map(|i| (i, i, Complex64::new(1.0 / d.powi(i as i32 + 1), 0.0)))
        .collect();
    SparseHermitianMatrix::from_coordinates(n, entries, DEFAULT_ZERO_TOL, DEFAULT_HERM_TOL)
}

pub fn identity(n: usize) -> Result<SparseHermitianMatrix> {
    if n == 0 {
        return Err(Error::domain("identity needs n >= 1"));
    }
    SparseHermitianMatrix::from_coordinates(
        n,
        (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))),
        DEFAULT_ZERO_TOL,
        DEFAULT_HERM_TOL,
    )
}

fn check_sparsity(n: usize, s: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if s == 0 || s > n {
        return Err(Error::domain(format!(
            "sparsity must satisfy 1 <= s <= n, got s = {s}, n = {n}"
        )));
    }
    Ok(())
}

/// Haar-distributed orthogonal `b x b` matrix (row-major) via Gram-Schmidt on Gaussians.
fn random_orthogonal(b: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut q: Vec<f64> = (0..b * b).map(|_| rng.sample(StandardNormal)).collect();
        let mut ok = true;
        // Columns are orthonormalized in place.
        for c in 0..b {
            for prev in 0..c {
                let dot: f64 = (0..b).map(|r| q[r * b + c] * q[r * b + prev]).sum();
                for r in 0..b {
                    q[r * b + c] -= dot * q[r * b + prev];
                }
            }
            let norm = (0..b).map(|r| q[r * b + c].powi(2)).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for r in 0..b {
                q[r * b + c] /= norm;
            }
        }
        if ok {
            return q;
        }
    }
}

/// Block-diagonal Hermitian with dense blocks of size at most `s` and a spectrum
/// drawn uniformly from `range`.
pub fn random_block_hermitian(n: usize, s: usize, range: (f64, f64), seed: u64) -> Result<SparseHermitianMatrix> {
    random_block_hermitian_with_spectrum(n, s, range, seed).map(|(m, _)| m)
}

/// As [`random_block_hermitian`], also returning the construction-time spectrum (ascending).
pub fn random_block_hermitian_with_spectrum(
    n: usize,
    s: usize,
    range: (f64, f64),
    seed: u64,
) -> Result<(SparseHermitianMatrix, Vec<f64>)> {
    check_sparsity(n, s)?;
    let (lo, hi) = range;
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(Error::domain(format!(
            "spectrum range must satisfy 0 < lo <= hi <= 1, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut spectrum = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let b = s.min(n - start);
        let lambdas: Vec<f64> = (0..b)
            .map(|_| if lo == hi { lo } else { rng.gen_range(lo..=hi) })
            .collect();
        spectrum.extend_from_slice(&lambdas);
        let q = random_orthogonal(b, &mut rng);
        for i in 0..b {
            for j in 0..=i {
                let v: f64 = (0..b).map(|k| q[i * b + k] * lambdas[k] * q[j * b + k]).sum();
                if v != 0.0 {
                    entries.push((start + i, start + j, Complex64::new(v, 0.0)));
                    if i != j {
                        entries.push((start + j, start + i, Complex64::new(v, 0.0)));
                    }
                }
            }
        }
        start += b;
    }
    spectrum.sort_by(f64::total_cmp);
    let m = SparseHermitianMatrix::from_coordinates(n, entries, DEFAULT_ZERO_TOL, DEFAULT_HERM_TOL)?;
    Ok((m, spectrum))
}

/// Random symmetric support with at most `s` nonzeros per row, values uniform in
/// `[-1, 1]`, rescaled to spectral norm 1.
pub fn random_support_hermitian(n: usize, s: usize, seed: u64) -> Result<SparseHermitianMatrix> {
    random_support_hermitian_flagged(n, s, seed).map(|(m, _)| m)
}

/// As [`random_support_hermitian`], also reporting whether the result is singular.
pub fn random_support_hermitian_flagged(n: usize, s: usize, seed: u64) -> Result<(SparseHermitianMatrix, bool)> {
    check_sparsity(n, s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = vec![0usize; n];
    let mut support: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        let target = rng.gen_range(1..=s);
        let mut candidates: Vec<usize> = (i..n).collect();
        candidates.shuffle(&mut rng);
        for j in candidates {
            if count[i] >= target {
                break;
            }
            if i == j {
                support.push((i, i));
                count[i] += 1;
            } else if count[j] < s {
                support.push((i, j));
                count[i] += 1;
                count[j] += 1;
            }
        }
    }
    support.sort_unstable();

    let mut entries = Vec::with_capacity(2 * support.len());
    for (i, j) in support {
        let v = loop {
            let v: f64 = rng.gen_range(-1.0..=1.0);
            if v != 0.0 {
                break v;
            }
        };
        entries.push((i, j, Complex64::new(v, 0.0)));
        if i != j {
            entries.push((j, i, Complex64::new(v, 0.0)));
        }
    }
    let raw = SparseHermitianMatrix::from_coordinates(n, entries, DEFAULT_ZERO_TOL, DEFAULT_HERM_TOL)?;
    let eig = spectrum::eigenvalues(&raw)?;
    let abs_max = eig.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let abs_min = eig.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let scaled = raw.scaled(1.0 / abs_max)?;
    Ok((scaled, abs_min <= SINGULAR_FLAG_TOL * abs_max))
}
