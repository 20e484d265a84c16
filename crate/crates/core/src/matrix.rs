//! Square Hermitian matrices in compressed sparse row form.
//!
//! Indices are 0-based everywhere in the library. Matrix Market files are
//! 1-based on disk and converted on read/write.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_ZERO_TOL: f64 = 0.0;
pub const DEFAULT_HERM_TOL: f64 = 1e-10;

/// An `n x n` Hermitian matrix with explicitly stored nonzeros.
///
/// Entries with magnitude `<= zero_tol` are never stored. Hermitian symmetry is
/// checked at construction to within `herm_tol * max|a_ij|`; the stored values
/// are kept as given, so `adjoint` may differ from the matrix by that amount.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitianMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    zero_tol: f64,
    herm_tol: f64,
    herm_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatrixShapeSummary {
    pub dim: usize,
    pub nnz: usize,
    pub nnz_per_row: Vec<usize>,
    /// Maximum number of stored entries in any row (the sparsity `s`).
    pub s: usize,
}

impl SparseHermitianMatrix {
    /// Builds and validates a matrix from `(row, col, value)` triples.
    pub fn from_coordinates<I>(dim: usize, entries: I, zero_tol: f64, herm_tol: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        if dim == 0 {
            return Err(Error::domain("matrix dimension must be at least 1"));
        }
        if !(zero_tol >= 0.0 && zero_tol.is_finite()) {
            return Err(Error::domain(format!(
                "zero_tol must be finite and nonnegative, got {zero_tol}"
            )));
        }
        if !(herm_tol >= 0.0 && herm_tol.is_finite()) {
            return Err(Error::domain(format!(
                "herm_tol must be finite and nonnegative, got {herm_tol}"
            )));
        }

        let mut triples: Vec<(usize, usize, Complex64)> = Vec::new();
        for (row, col, v) in entries {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteValue { row, col });
            }
            if row >= dim || col >= dim {
                return Err(Error::IndexOutOfRange { row, col, dim });
            }
            triples.push((row, col, v));
        }
        triples.sort_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = triples.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::DuplicateEntry {
                row: w[0].0,
                col: w[0].1,
            });
        }
        triples.retain(|&(_, _, v)| v.norm() > zero_tol);

        let matrix = Self::from_sorted(dim, triples, zero_tol, herm_tol);
        let (deviation, worst) = matrix.hermitian_defect();
        let allowed = herm_tol * matrix.max_abs();
        if deviation > allowed {
            let (row, col) = worst.unwrap_or((0, 0));
            return Err(Error::NotHermitian {
                row,
                col,
                deviation,
                allowed,
            });
        }
        Ok(matrix)
    }

    /// Real-valued convenience constructor with default tolerances.
    pub fn from_real_entries(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_coordinates(
            dim,
            entries.iter().map(|&(r, c, v)| (r, c, Complex64::new(v, 0.0))),
            DEFAULT_ZERO_TOL,
            DEFAULT_HERM_TOL,
        )
    }

    /// Assembles CSR storage from row-major sorted, duplicate-free triples.
    fn from_sorted(dim: usize, triples: Vec<(usize, usize, Complex64)>, zero_tol: f64, herm_tol: f64) -> Self {
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &triples {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let (col_idx, values) = triples.into_iter().map(|(_, c, v)| (c, v)).unzip();
        let mut m = SparseHermitianMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
            zero_tol,
            herm_tol,
            herm_deviation: 0.0,
        };
        m.herm_deviation = m.hermitian_defect().0;
        m
    }

    /// Largest `|a_ij - conj(a_ji)|` (for the diagonal, `|Im a_ii|`) and where it occurs.
    fn hermitian_defect(&self) -> (f64, Option<(usize, usize)>) {
        let mut worst = 0.0;
        let mut at = None;
        for (i, j, v) in self.entries() {
            let dev = if i == j {
                v.im.abs()
            } else {
                let mirror = self.get(j, i);
                (v - mirror.conj()).norm()
            };
            if dev > worst {
                worst = dev;
                at = Some((i, j));
            }
        }
        (worst, at)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn herm_tol(&self) -> f64 {
        self.herm_tol
    }

    /// Absolute Hermitian deviation measured at construction.
    pub fn hermitian_deviation(&self) -> f64 {
        self.herm_deviation
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[Complex64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when no stored entry has a nonzero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut triples: Vec<_> = self.entries().map(|(i, j, v)| (j, i, v.conj())).collect();
        triples.sort_by_key(|&(r, c, _)| (r, c));
        Self::from_sorted(self.dim, triples, self.zero_tol, self.herm_tol)
    }

    /// Raises every stored entry to the power `p`; `p = 0` maps every stored entry to 1.
    ///
    /// Only nonnegative real entries are accepted, since no branch of the
    /// complex power is singled out.
    pub fn entrywise_power(&self, p: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&p) {
            return Err(Error::POutOfRange(p));
        }
        let mut triples = Vec::with_capacity(self.nnz());
        for (i, j, v) in self.entries() {
            if v.im != 0.0 || v.re < 0.0 {
                return Err(Error::ComplexPowerUndefined { row: i, col: j });
            }
            let powered = if p == 0.0 { 1.0 } else { v.re.powf(p) };
            // Underflow to zero would store a forbidden zero.
            if powered > self.zero_tol {
                triples.push((i, j, Complex64::new(powered, 0.0)));
            }
        }
        Ok(Self::from_sorted(self.dim, triples, self.zero_tol, self.herm_tol))
    }

    /// Multiplies every entry by the real factor `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::domain(format!(
                "scale factor must be finite and nonzero, got {c}"
            )));
        }
        let triples: Vec<_> = self
            .entries()
            .map(|(i, j, v)| (i, j, v * c))
            .filter(|(_, _, v)| v.norm() > self.zero_tol)
            .collect();
        Ok(Self::from_sorted(self.dim, triples, self.zero_tol, self.herm_tol))
    }

    pub fn shape_summary(&self) -> MatrixShapeSummary {
        let nnz_per_row: Vec<usize> = (0..self.dim)
            .map(|i| self.row(i).1.iter().filter(|v| v.norm() > self.zero_tol).count())
            .collect();
        MatrixShapeSummary {
            dim: self.dim,
            nnz: nnz_per_row.iter().sum(),
            s: nnz_per_row.iter().copied().max().unwrap_or(0),
            nnz_per_row,
        }
    }

    /// Sparse matrix-vector product.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, j, v) in self.entries() {
            out[i * n + j] = v;
        }
        out
    }
}
