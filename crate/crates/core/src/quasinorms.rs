//! Frobenius norm, the row power-sum family `s_p` on `[0, 2]`, and the
//! ordering checks that tie the family together.
//!
//! For `p > 0`, `s_p(A) = max_i sum_j |a_ij|^p`. At `p = 0` the power sum is
//! replaced by the support count, which is also its `p -> 0+` limit, so the
//! family is continuous on the closed interval. Nothing here relies on the
//! triangle inequality, which fails for `p < 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SparseHermitianMatrix;

pub const DEFAULT_GRID_RESOLUTION: usize = 201;

/// Absolute slack used by the vector inequality checks.
pub const VECTOR_CHECK_SLACK: f64 = 1e-12;

/// Row-wise magnitudes of a matrix, kept for repeated `s_p` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMagnitudes {
    row_ptr: Vec<usize>,
    mags: Vec<f64>,
    /// `ln` of each magnitude, so `m^p` costs one `exp`.
    logs: Vec<f64>,
}

impl RowMagnitudes {
    pub fn new(a: &SparseHermitianMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(a.dim() + 1);
        let mut mags = Vec::with_capacity(a.nnz());
        row_ptr.push(0);
        for i in 0..a.dim() {
            mags.extend(a.row(i).1.iter().map(|v| v.norm()).filter(|&m| m > a.zero_tol()));
            row_ptr.push(mags.len());
        }
        let logs = mags.iter().map(|m| m.ln()).collect();
        RowMagnitudes { row_ptr, mags, logs }
    }

    fn rows<'a>(&'a self, values: &'a [f64]) -> impl Iterator<Item = &'a [f64]> {
        self.row_ptr.windows(2).map(move |w| &values[w[0]..w[1]])
    }

    /// Maximum row support count.
    pub fn count(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// `max_i sum_j |a_ij|^p`, with the support count at `p = 0`.
    pub fn power_sum(&self, p: f64) -> f64 {
        if p == 0.0 {
            return self.count() as f64;
        }
        let row_sums: Box<dyn Iterator<Item = f64> + '_> = if p == 1.0 {
            Box::new(self.rows(&self.mags).map(|row| row.iter().sum::<f64>()))
        } else if p == 2.0 {
            Box::new(self.rows(&self.mags).map(|row| row.iter().map(|m| m * m).sum::<f64>()))
        } else {
            Box::new(
                self.rows(&self.logs)
                    .map(|row| row.iter().map(|l| (p * l).exp()).sum::<f64>()),
            )
        };
        row_sums.fold(0.0, f64::max)
    }
}

/// Frobenius norm.
///
/// Squared magnitudes are summed in ascending order, so the result depends only
/// on the multiset of magnitudes and `frobenius_norm(A) == frobenius_norm(A†)`
/// holds bit-for-bit.
pub fn frobenius_norm(a: &SparseHermitianMatrix) -> f64 {
    frobenius_norm_squared(a).sqrt()
}

/// `sum |a_ij|^2`, summed in ascending order.
pub fn frobenius_norm_squared(a: &SparseHermitianMatrix) -> f64 {
    let mut sq: Vec<f64> = a.entries().map(|(_, _, v)| v.norm_sqr()).collect();
    sq.sort_by(f64::total_cmp);
    sq.iter().sum()
}

/// `s_p(A)` for `p` in `(0, 2]`.
pub fn s_p(a: &SparseHermitianMatrix, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::POutOfRange(p));
    }
    Ok(RowMagnitudes::new(a).power_sum(p))
}

/// Maximum number of nonzero entries in any row.
pub fn s_zero(a: &SparseHermitianMatrix) -> usize {
    a.shape_summary().s
}

/// Uniform grid of `resolution` points on `[0, 2]`, endpoints included.
pub fn p_grid(resolution: usize) -> Vec<f64> {
    let last = (resolution - 1) as f64;
    (0..resolution)
        .map(|k| {
            if k + 1 == resolution {
                2.0
            } else {
                2.0 * k as f64 / last
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub p: f64,
    pub s_p: f64,
    pub s_complement_adjoint: f64,
}

impl ProfileSample {
    /// `sqrt(s_p(A) * s_{2-p}(A†))`.
    pub fn mixed(&self) -> f64 {
        (self.s_p * self.s_complement_adjoint).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasinormProfile {
    pub frobenius: f64,
    pub s_zero: usize,
    pub samples: Vec<ProfileSample>,
    pub grid_resolution: usize,
}

/// Samples `p -> (s_p(A), s_{2-p}(A†))` on a uniform grid.
pub fn profile(a: &SparseHermitianMatrix, grid_resolution: usize) -> Result<QuasinormProfile> {
    if grid_resolution < 3 {
        return Err(Error::domain(format!(
            "grid resolution must be at least 3, got {grid_resolution}"
        )));
    }
    let rows = RowMagnitudes::new(a);
    let adj_rows = RowMagnitudes::new(&a.adjoint());
    let samples = p_grid(grid_resolution)
        .into_iter()
        .map(|p| ProfileSample {
            p,
            s_p: rows.power_sum(p),
            s_complement_adjoint: adj_rows.power_sum(2.0 - p),
        })
        .collect();
    Ok(QuasinormProfile {
        frobenius: frobenius_norm(a),
        s_zero: rows.count(),
        samples,
        grid_resolution,
    })
}

impl QuasinormProfile {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["p", "s_p", "s_2_minus_p_adjoint", "mixed"])?;
        for s in &self.samples {
            w.write_record([s.p, s.s_p, s.s_complement_adjoint, s.mixed()].map(|x| x.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// One `s_2 <= s_{2-eps} <= s_1 <= s_0` chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingChain {
    pub epsilon: f64,
    /// `[s_2, s_{2-eps}, s_1, s_0]`.
    pub values: [f64; 4],
    pub links_hold: [bool; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub spectral_norm: f64,
    pub max_abs_entry: f64,
    /// False when the spectral norm exceeds `1 + 1e-9`; the chains are still evaluated.
    pub hypothesis_holds: bool,
    pub chains: Vec<OrderingChain>,
    /// Largest `left - right` over all links; nonpositive means every link holds exactly.
    pub worst_slack: f64,
    pub slack_tol: f64,
}

impl OrderingReport {
    pub fn all_hold(&self) -> bool {
        self.chains.iter().all(|c| c.links_hold.iter().all(|&h| h))
    }
}

/// Evaluates `s_2(A) <= s_{2-eps}(A) <= s_1(A) <= s_0(A)` for each `eps`,
/// computing the spectral norm with the dense eigensolver.
pub fn check_sp_ordering(a: &SparseHermitianMatrix, epsilons: &[f64]) -> Result<OrderingReport> {
    let spectral_norm = crate::spectrum::eigenvalues(a)?
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()));
    check_sp_ordering_with_norm(a, spectral_norm, epsilons, 1e-12)
}

/// Same as [`check_sp_ordering`] with a caller-supplied spectral norm.
///
/// The chain needs `max |a_ij| <= 1`, which spectral norm `<= 1` implies.
/// A link holds when `left <= right + slack_tol`.
pub fn check_sp_ordering_with_norm(
    a: &SparseHermitianMatrix,
    spectral_norm: f64,
    epsilons: &[f64],
    slack_tol: f64,
) -> Result<OrderingReport> {
    if let Some(&e) = epsilons.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {e}")));
    }
    let rows = RowMagnitudes::new(a);
    let s2 = rows.power_sum(2.0);
    let s1 = rows.power_sum(1.0);
    let s0 = rows.count() as f64;
    let mut worst = f64::NEG_INFINITY;
    let chains = epsilons
        .iter()
        .map(|&epsilon| {
            let values = [s2, rows.power_sum(2.0 - epsilon), s1, s0];
            let mut links_hold = [false; 3];
            for k in 0..3 {
                let (l, r) = (values[k], values[k + 1]);
                worst = worst.max(l - r);
                links_hold[k] = l <= r + slack_tol;
            }
            OrderingChain {
                epsilon,
                values,
                links_hold,
            }
        })
        .collect();
    Ok(OrderingReport {
        spectral_norm,
        max_abs_entry: a.max_abs(),
        hypothesis_holds: spectral_norm <= 1.0 + 1e-9,
        chains,
        worst_slack: worst,
        slack_tol,
    })
}

fn lp(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `||x||_{p2} <= ||x||_{p1}` for `p1 <= p2`, up to [`VECTOR_CHECK_SLACK`].
pub fn lp_monotonicity_check(x: &[f64], p1: f64, p2: f64) -> Result<bool> {
    for p in [p1, p2] {
        if !(p > 0.0 && p <= 2.0) {
            return Err(Error::POutOfRange(p));
        }
    }
    if p1 > p2 {
        return Err(Error::domain(format!("need p1 <= p2, got {p1} > {p2}")));
    }
    Ok(lp(x, p2) <= lp(x, p1) + VECTOR_CHECK_SLACK)
}

/// Hölder: `sum |v_i w_i| <= ||v||_p ||w||_q` for conjugate `p, q`.
pub fn holder_check(v: &[f64], w: &[f64], p: f64, q: f64) -> Result<bool> {
    if !(p > 1.0 && q > 1.0) || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
        return Err(Error::ConjugateExponentMismatch { p, q });
    }
    if v.len() != w.len() {
        return Err(Error::domain("vectors must have equal length"));
    }
    let lhs: f64 = v.iter().zip(w).map(|(a, b)| (a * b).abs()).sum();
    Ok(lhs <= lp(v, p) * lp(w, q) + VECTOR_CHECK_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity3() -> SparseHermitianMatrix {
        SparseHermitianMatrix::from_real_entries(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]).unwrap()
    }

    fn d_example() -> SparseHermitianMatrix {
        SparseHermitianMatrix::from_real_entries(3, &[(0, 0, 0.25), (1, 1, 0.0625), (2, 2, 0.015625)]).unwrap()
    }

    fn x_example() -> SparseHermitianMatrix {
        SparseHermitianMatrix::from_real_entries(2, &[(0, 1, 0.5), (1, 0, 0.5)]).unwrap()
    }

    fn j_example() -> SparseHermitianMatrix {
        SparseHermitianMatrix::from_real_entries(2, &[(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)]).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn frobenius_examples() {
        assert!(close(frobenius_norm(&identity3()), 3f64.sqrt(), 1e-15));
        let expected = (1.0f64 / 16.0 + 1.0 / 256.0 + 1.0 / 4096.0).sqrt();
        assert!(close(frobenius_norm(&d_example()), expected, 1e-15));
        // sqrt(273 / 4096)
        assert!(close(frobenius_norm(&d_example()), 0.258167369404036, 1e-14));
        assert!(close(frobenius_norm(&x_example()), 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn s_p_examples() {
        for p in [0.1, 0.5, 1.0, 1.7, 2.0] {
            assert_eq!(s_p(&identity3(), p).unwrap(), 1.0);
        }
        assert_eq!(s_p(&d_example(), 2.0).unwrap(), 0.0625);
        assert_eq!(s_p(&x_example(), 1.0).unwrap(), 0.5);
        assert!(matches!(s_p(&d_example(), 0.0), Err(Error::POutOfRange(_))));
        assert!(matches!(s_p(&d_example(), 2.5), Err(Error::POutOfRange(_))));
    }

    #[test]
    fn s_zero_examples() {
        assert_eq!(s_zero(&identity3()), 1);
        assert_eq!(s_zero(&d_example()), 1);
        assert_eq!(s_zero(&j_example()), 2);
    }

    #[test]
    fn power_sum_is_continuous_at_zero() {
        let m = SparseHermitianMatrix::from_real_entries(
            3,
            &[(0, 0, 0.3), (0, 2, 0.01), (2, 0, 0.01), (1, 1, 0.9), (2, 2, 0.7)],
        )
        .unwrap();
        let rows = RowMagnitudes::new(&m);
        assert_eq!(rows.power_sum(0.0), 2.0);
        assert!((rows.power_sum(1e-10) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn profile_examples() {
        let prof = profile(&identity3(), 201).unwrap();
        assert_eq!(prof.samples.len(), 201);
        assert_eq!(prof.samples[0].p, 0.0);
        assert_eq!(prof.samples[200].p, 2.0);
        assert!(prof.samples.iter().all(|s| s.mixed() == 1.0));

        let prof = profile(&d_example(), 201).unwrap();
        assert_eq!(prof.s_zero, 1);
        assert_eq!(prof.samples[0].s_p, 1.0);
        for s in &prof.samples {
            assert!(close(s.mixed(), 0.25, 1e-14), "p = {}: {}", s.p, s.mixed());
        }

        let prof = profile(&j_example(), 201).unwrap();
        assert!(close(prof.frobenius, 1.0, 1e-15));
        for s in &prof.samples {
            assert!(close(s.mixed(), 1.0, 1e-14));
        }
        assert!(profile(&j_example(), 2).is_err());
    }

    #[test]
    fn profile_csv_has_header_and_rows() {
        let csv = profile(&d_example(), 3).unwrap().to_csv().unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "p,s_p,s_2_minus_p_adjoint,mixed");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,1,0.0625,0.25"));
    }

    #[test]
    fn ordering_examples() {
        let r = check_sp_ordering(&d_example(), &[0.5]).unwrap();
        assert!(r.hypothesis_holds && r.all_hold());
        let v = r.chains[0].values;
        assert_eq!(v[0], 0.0625);
        assert!(close(v[1], 0.125, 1e-15));
        assert_eq!(v[2], 0.25);
        assert_eq!(v[3], 1.0);

        let r = check_sp_ordering(&identity3(), &[0.5]).unwrap();
        assert!(r.all_hold());
        assert_eq!(r.worst_slack, 0.0);

        let big = identity3().scaled(2.0).unwrap();
        let r = check_sp_ordering(&big, &[0.5]).unwrap();
        assert!(!r.hypothesis_holds);
        assert!(!r.all_hold());
        assert!(check_sp_ordering(&identity3(), &[1.0]).is_err());
    }

    #[test]
    fn vector_checks() {
        assert!(lp_monotonicity_check(&[1.0, 1.0], 1.0, 2.0).unwrap());
        assert!(lp_monotonicity_check(&[0.25, 0.0625, 0.015625], 1.0, 2.0).unwrap());
        assert!(lp_monotonicity_check(&[1.0, 0.0, 0.0], 0.3, 1.9).unwrap());
        assert_eq!(lp(&[1.0, 0.0, 0.0], 0.3), lp(&[1.0, 0.0, 0.0], 1.9));
        assert!(lp_monotonicity_check(&[1.0], 2.0, 1.0).is_err());

        assert!(holder_check(&[1.0, 0.0], &[1.0, 0.0], 2.0, 2.0).unwrap());
        assert!(holder_check(&[1.0, 1.0], &[1.0, 1.0], 2.0, 2.0).unwrap());
        assert!(holder_check(&[0.3, 0.2], &[0.1, 0.9], 1.5, 3.0).unwrap());
        assert!(matches!(
            holder_check(&[1.0], &[1.0], 2.0, 3.0),
            Err(Error::ConjugateExponentMismatch { .. })
        ));
    }
}
