//! Hermitian spectra, condition numbers and sparse-access membership.
//!
//! Eigenvalues come from a cyclic Jacobi sweep on a dense copy. Complex input is
//! handled through the real symmetric embedding `[[Re, -Im], [Im, Re]]`, whose
//! spectrum is that of `A` with every eigenvalue doubled.

use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::SparseHermitianMatrix;

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_SWEEPS: usize = 64;

/// `|λ|max / |λ|min`, or infinite for a singular matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditionNumber {
    Finite(f64),
    Infinite,
}

impl ConditionNumber {
    pub fn value(self) -> f64 {
        match self {
            ConditionNumber::Finite(k) => k,
            ConditionNumber::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ConditionNumber::Finite(_))
    }
}

impl fmt::Display for ConditionNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionNumber::Finite(k) => write!(f, "{k}"),
            ConditionNumber::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ConditionNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ConditionNumber::Finite(k) => s.serialize_f64(*k),
            ConditionNumber::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumOptions {
    /// Membership requires `|λ|max <= 1 + membership_tol`.
    pub membership_tol: f64,
    /// Singular when `|λ|min <= singular_tol * |λ|max`. Zero means exactly zero only.
    pub singular_tol: f64,
    /// Additionally require every eigenvalue to be positive.
    pub signed_strict: bool,
    /// Divide the spectrum by `|λ|max` before judging membership.
    pub normalize: bool,
    pub max_sweeps: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            membership_tol: DEFAULT_MEMBERSHIP_TOL,
            singular_tol: 0.0,
            signed_strict: false,
            normalize: false,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    /// Ascending by signed value.
    pub eigenvalues: Vec<f64>,
    pub signed_min: f64,
    pub signed_max: f64,
    pub abs_min: f64,
    pub abs_max: f64,
    pub kappa: ConditionNumber,
    pub abs_sum: f64,
    pub sparse_access_member: bool,
    pub membership_tol: f64,
    pub singular_tol: f64,
    pub signed_strict: bool,
    /// Factor the eigenvalues were divided by (1 unless normalized).
    pub scale: f64,
}

impl SpectrumSummary {
    /// Summarizes a sorted spectrum.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, opts: &SpectrumOptions) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let abs_max = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let scale = if opts.normalize && abs_max > 0.0 { abs_max } else { 1.0 };
        if scale != 1.0 {
            for l in &mut eigenvalues {
                *l /= scale;
            }
        }
        let abs_max = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let abs_min = eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        let abs_sum = eigenvalues.iter().map(|l| l.abs()).sum();
        let singular = abs_min <= opts.singular_tol * abs_max;
        let kappa = if singular {
            ConditionNumber::Infinite
        } else {
            ConditionNumber::Finite(abs_max / abs_min)
        };
        let signs_ok = !opts.signed_strict || eigenvalues.iter().all(|&l| l > 0.0);
        SpectrumSummary {
            signed_min: eigenvalues[0],
            signed_max: eigenvalues[eigenvalues.len() - 1],
            abs_min,
            abs_max,
            kappa,
            abs_sum,
            sparse_access_member: abs_max <= 1.0 + opts.membership_tol && !singular && signs_ok,
            membership_tol: opts.membership_tol,
            singular_tol: opts.singular_tol,
            signed_strict: opts.signed_strict,
            scale,
            eigenvalues,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "eigenvalue"])?;
        for (k, l) in self.eigenvalues.iter().enumerate() {
            w.write_record([k.to_string(), l.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Disjoint-pair rounds of the round-robin ordering of `0..n`.
///
/// Every pair `(p, q)` with `p < q` appears in exactly one round, so one pass
/// over all rounds is a full cyclic sweep.
fn round_robin_rounds(n: usize) -> Vec<Vec<(usize, usize)>> {
    // Odd sizes get a phantom player; pairs involving it are dropped.
    let m = n + n % 2;
    let mut ring: Vec<usize> = (1..m).collect();
    let mut rounds = Vec::with_capacity(m.saturating_sub(1));
    for _ in 1..m {
        let seat = |k: usize| if k == 0 { 0 } else { ring[k - 1] };
        let pairs = (0..m / 2)
            .map(|k| (seat(k), seat(m - 1 - k)))
            .filter(|&(x, y)| x < n && y < n)
            .map(|(x, y)| (x.min(y), x.max(y)))
            .collect();
        rounds.push(pairs);
        ring.rotate_right(1);
    }
    rounds
}

#[derive(Debug, Clone, Copy)]
struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    new_pp: f64,
    new_qq: f64,
}

/// `row <- row J` for the product `J` of disjoint plane rotations.
fn rotate_columns(row: &mut [f64], rotations: &[Rotation]) {
    for r in rotations {
        let (xp, xq) = (row[r.p], row[r.q]);
        row[r.p] = r.c * xp - r.s * xq;
        row[r.q] = r.s * xp + r.c * xq;
    }
}

/// Cyclic Jacobi on a dense real symmetric `n x n` row-major matrix.
///
/// Sweeps follow the round-robin ordering: each round applies a set of
/// disjoint rotations, first to whole rows and then within every row, so all
/// memory access is contiguous.
///
/// On return the diagonal holds the eigenvalues. When `vectors` is given it
/// must hold the identity on entry and receives the eigenvectors as columns.
/// A rotation is skipped when `|a_pq| <= eps * sqrt(|a_pp a_qq|)`, which keeps
/// small eigenvalues of graded matrices accurate to high relative precision.
pub fn jacobi_symmetric(a: &mut [f64], n: usize, mut vectors: Option<&mut [f64]>, max_sweeps: usize) -> Result<usize> {
    assert_eq!(a.len(), n * n);
    if let Some(v) = vectors.as_deref() {
        assert_eq!(v.len(), n * n);
    }
    let off_mass = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        (2.0 * s).sqrt()
    };

    let rounds = round_robin_rounds(n);
    let mut rotations = Vec::with_capacity(n / 2);
    for sweep in 0..max_sweeps {
        let mut rotated = false;
        for pairs in &rounds {
            rotations.clear();
            for &(p, q) in pairs {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq == 0.0 || apq.abs() <= f64::EPSILON * (app.abs() * aqq.abs()).sqrt() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                rotations.push(Rotation {
                    p,
                    q,
                    c,
                    s: t * c,
                    new_pp: app - t * apq,
                    new_qq: aqq + t * apq,
                });
            }
            if rotations.is_empty() {
                continue;
            }
            rotated = true;

            // A <- J^T A mixes rows p and q.
            for r in &rotations {
                let (head, tail) = a.split_at_mut(r.q * n);
                let row_p = &mut head[r.p * n..r.p * n + n];
                let row_q = &mut tail[..n];
                for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = r.c * xp - r.s * xq;
                    *y = r.s * xp + r.c * xq;
                }
            }
            // A <- A J mixes columns p and q within every row.
            for row in a.chunks_exact_mut(n) {
                rotate_columns(row, &rotations);
            }
            if let Some(v) = vectors.as_deref_mut() {
                for row in v.chunks_exact_mut(n) {
                    rotate_columns(row, &rotations);
                }
            }
            for r in &rotations {
                a[r.p * n + r.p] = r.new_pp;
                a[r.q * n + r.q] = r.new_qq;
                a[r.p * n + r.q] = 0.0;
                a[r.q * n + r.p] = 0.0;
            }
        }
        if !rotated {
            return Ok(sweep + 1);
        }
    }
    let off = off_mass(a);
    if off == 0.0 {
        return Ok(max_sweeps);
    }
    Err(Error::ConvergenceFailure {
        sweeps: max_sweeps,
        off_diagonal: off,
    })
}

/// Real symmetric matrix whose spectrum carries that of `a` (doubled when complex).
fn real_embedding(a: &SparseHermitianMatrix) -> (Vec<f64>, usize, bool) {
    let n = a.dim();
    if a.is_real() {
        let mut m = vec![0.0; n * n];
        for (i, j, v) in a.entries() {
            m[i * n + j] = v.re;
        }
        symmetrize(&mut m, n);
        (m, n, false)
    } else {
        let m2 = 2 * n;
        let mut m = vec![0.0; m2 * m2];
        for (i, j, v) in a.entries() {
            m[i * m2 + j] = v.re;
            m[(i + n) * m2 + (j + n)] = v.re;
            m[i * m2 + (j + n)] = -v.im;
            m[(i + n) * m2 + j] = v.im;
        }
        symmetrize(&mut m, m2);
        (m, m2, true)
    }
}

/// Averages `m` with its transpose so Jacobi sees an exactly symmetric input.
fn symmetrize(m: &mut [f64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
}

/// All eigenvalues of `a`, ascending.
pub fn eigenvalues(a: &SparseHermitianMatrix) -> Result<Vec<f64>> {
    eigenvalues_with(a, DEFAULT_MAX_SWEEPS)
}

pub fn eigenvalues_with(a: &SparseHermitianMatrix, max_sweeps: usize) -> Result<Vec<f64>> {
    let (mut m, size, doubled) = real_embedding(a);
    jacobi_symmetric(&mut m, size, None, max_sweeps)?;
    let mut vals: Vec<f64> = (0..size).map(|i| m[i * size + i]).collect();
    vals.sort_by(f64::total_cmp);
    if doubled {
        vals = vals.into_iter().step_by(2).collect();
    }
    Ok(vals)
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit eigenvectors, `vectors[k]` pairs with `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
}

impl EigenDecomposition {
    /// Largest `||A v - λ v||_2` over all pairs.
    pub fn max_residual(&self, a: &SparseHermitianMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&l, v)| {
                let av = a.mul_vec(v);
                av.iter()
                    .zip(v)
                    .map(|(x, y)| (x - y * l).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues and eigenvectors.
pub fn eigen_decomposition(a: &SparseHermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let (mut m, size, doubled) = real_embedding(a);
    let mut v = vec![0.0; size * size];
    for i in 0..size {
        v[i * size + i] = 1.0;
    }
    jacobi_symmetric(&mut m, size, Some(&mut v), DEFAULT_MAX_SWEEPS)?;
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&x, &y| m[x * size + x].total_cmp(&m[y * size + y]));
    if doubled {
        order = order.into_iter().step_by(2).collect();
    }
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in order {
        values.push(m[k * size + k]);
        let mut vec: Vec<Complex64> = if doubled {
            (0..n)
                .map(|i| Complex64::new(v[i * size + k], v[(i + n) * size + k]))
                .collect()
        } else {
            (0..n).map(|i| Complex64::new(v[i * size + k], 0.0)).collect()
        };
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut vec {
            *z /= norm;
        }
        vectors.push(vec);
    }
    Ok(EigenDecomposition { values, vectors })
}

pub fn spectrum_summary(a: &SparseHermitianMatrix, opts: &SpectrumOptions) -> Result<SpectrumSummary> {
    Ok(SpectrumSummary::from_eigenvalues(
        eigenvalues_with(a, opts.max_sweeps)?,
        opts,
    ))
}

/// κ of a computed spectrum.
pub fn condition_number(spec: &SpectrumSummary) -> ConditionNumber {
    spec.kappa
}

/// Spectrum plus the sparse-access verdict: `|λ|max <= 1 + tol` and nonsingular.
pub fn sparse_access_check(a: &SparseHermitianMatrix, opts: &SpectrumOptions) -> Result<(SpectrumSummary, bool)> {
    let spec = spectrum_summary(a, opts)?;
    let member = spec.sparse_access_member;
    Ok((spec, member))
}

const ORACLE_MAX_ITER: usize = 200_000;

/// Rayleigh-quotient power iteration for the top eigenvalue of a PSD operator.
fn power_iteration<F>(n: usize, mut apply: F) -> Result<f64>
where
    F: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
{
    // Deterministic start with no special alignment.
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.618_033_988_749_895).fract(), 0.0))
        .collect();
    let normalize = |x: &mut Vec<Complex64>| {
        let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in x.iter_mut() {
            *z /= nrm;
        }
    };
    normalize(&mut x);
    let mut prev = f64::NAN;
    for _ in 0..ORACLE_MAX_ITER {
        let y = apply(&x)?;
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum();
        x = y;
        if x.iter().all(|z| z.norm_sqr() == 0.0) {
            return Ok(0.0);
        }
        normalize(&mut x);
        if (rq - prev).abs() <= 1e-15 * rq.abs() {
            return Ok(rq);
        }
        prev = rq;
    }
    Err(Error::ConvergenceFailure {
        sweeps: ORACLE_MAX_ITER,
        off_diagonal: f64::NAN,
    })
}

/// Dense LU factorization with partial pivoting.
struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

impl Lu {
    /// `None` when a pivot column is exactly zero, i.e. `a` is singular.
    fn new(a: &SparseHermitianMatrix) -> Option<Self> {
        let n = a.dim();
        let mut lu = a.to_dense();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pr, best) =
                (k..n)
                    .map(|r| (r, lu[r * n + k].norm()))
                    .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return None;
            }
            if pr != k {
                for c in 0..n {
                    lu.swap(k * n + c, pr * n + c);
                }
                piv.swap(k, pr);
            }
            let pivot = lu[k * n + k];
            for r in (k + 1)..n {
                let f = lu[r * n + k] / pivot;
                lu[r * n + k] = f;
                for c in (k + 1)..n {
                    let u = lu[k * n + c];
                    lu[r * n + c] -= f * u;
                }
            }
        }
        Some(Lu { n, lu, piv })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            for c in 0..r {
                let l = self.lu[r * n + c];
                let xc = x[c];
                x[r] -= l * xc;
            }
        }
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                let u = self.lu[r * n + c];
                let xc = x[c];
                x[r] -= u * xc;
            }
            x[r] /= self.lu[r * n + r];
        }
        x
    }
}

/// `(|λ|min, |λ|max)` by power iteration on `A²` and on `A⁻²`; `|λ|min` is 0
/// when elimination meets an exactly zero pivot.
///
/// Shares no code with the Jacobi path; it exists to cross-check it.
pub fn extremal_eigenvalues_oracle(a: &SparseHermitianMatrix) -> Result<(f64, f64)> {
    let n = a.dim();
    let top = power_iteration(n, |x| Ok(a.mul_vec(&a.mul_vec(x))))?;
    let Some(lu) = Lu::new(a) else {
        return Ok((0.0, top.sqrt()));
    };
    let inv_top = power_iteration(n, |x| Ok(lu.solve(&lu.solve(x))))?;
    Ok(((1.0 / inv_top).sqrt(), top.sqrt()))
}
