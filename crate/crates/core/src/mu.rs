//! The `μ(A)` pass: minimize `sqrt(s_p(A) s_{2-p}(A†))` over `p ∈ [0, 2]`,
//! compare against `||A||_F`, and pick the inner model.
//!
//! `log s_p(A)` is a maximum of log-sum-exp functions of `p` and hence convex,
//! and the same holds for `log s_{2-p}(A†)`. Their sum is convex, so the
//! objective is unimodal: a coarse grid locates the basin and golden-section
//! refinement on the bracketing cell finds the global minimum.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SparseHermitianMatrix;
use crate::quasinorms::{frobenius_norm, p_grid, RowMagnitudes, DEFAULT_GRID_RESOLUTION};

pub const DEFAULT_P_TOL: f64 = 1e-9;
pub const DEFAULT_TIE_TOL: f64 = 1e-12;
pub const MIN_GRID_RESOLUTION: usize = 21;

/// Which quantum-access normalization the pass selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InnerModel {
    /// Frobenius-normalizing.
    MuF,
    /// `s_p`-normalizing.
    MuP,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuConfig {
    pub grid_resolution: usize,
    /// Argument tolerance of the refinement.
    pub p_tol: f64,
    /// Relative tolerance for treating two objective values as equal.
    pub tie_tol: f64,
}

impl Default for MuConfig {
    fn default() -> Self {
        MuConfig {
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            p_tol: DEFAULT_P_TOL,
            tie_tol: DEFAULT_TIE_TOL,
        }
    }
}

impl MuConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < MIN_GRID_RESOLUTION {
            return Err(Error::domain(format!(
                "grid resolution must be at least {MIN_GRID_RESOLUTION}, got {}",
                self.grid_resolution
            )));
        }
        if !(self.p_tol > 0.0 && self.p_tol.is_finite()) {
            return Err(Error::domain(format!("p_tol must be positive, got {}", self.p_tol)));
        }
        if !(self.tie_tol >= 0.0 && self.tie_tol.is_finite()) {
            return Err(Error::domain(format!(
                "tie_tol must be nonnegative, got {}",
                self.tie_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuResult {
    pub mu_value: f64,
    pub frobenius: f64,
    pub mixed_min: f64,
    pub p_star: f64,
    pub inner_model: InnerModel,
    /// `||A||_F <= sqrt(s_p(A) s_{2-p}(A†))` at every checked `p`.
    pub deqineq_all_p: bool,
    /// Objective value closest to violating the inequality, and where.
    pub deqineq_worst_p: f64,
    pub deqineq_worst_value: f64,
    pub grid_resolution: usize,
    pub p_tol: f64,
    pub tie_tol: f64,
}

/// The mixed objective with precomputed row magnitudes for `A` and `A†`.
#[derive(Debug, Clone)]
pub struct MixedObjective {
    rows: RowMagnitudes,
    /// `None` when the adjoint has exactly the same row magnitudes.
    adjoint_rows: Option<RowMagnitudes>,
}

impl MixedObjective {
    pub fn new(a: &SparseHermitianMatrix) -> Self {
        let rows = RowMagnitudes::new(a);
        let adjoint_rows = RowMagnitudes::new(&a.adjoint());
        MixedObjective {
            adjoint_rows: (adjoint_rows != rows).then_some(adjoint_rows),
            rows,
        }
    }

    fn adjoint_rows(&self) -> &RowMagnitudes {
        self.adjoint_rows.as_ref().unwrap_or(&self.rows)
    }

    /// `sqrt(s_p(A) s_{2-p}(A†))`; `p` is clamped to `[0, 2]`.
    pub fn eval(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 2.0);
        (self.rows.power_sum(p) * self.adjoint_rows().power_sum(2.0 - p)).sqrt()
    }

    /// `eval` at every grid point. For a self-adjoint magnitude pattern each
    /// distinct exponent is summed once, which gives bit-identical values.
    fn eval_grid(&self, grid: &[f64]) -> Vec<f64> {
        if self.adjoint_rows.is_some() {
            return grid.par_iter().map(|&p| self.eval(p)).collect();
        }
        let clamped: Vec<f64> = grid.iter().map(|p| p.clamp(0.0, 2.0)).collect();
        let mut exponents: Vec<f64> = clamped.iter().flat_map(|&p| [p, 2.0 - p]).collect();
        exponents.sort_by(f64::total_cmp);
        exponents.dedup_by(|x, y| x.to_bits() == y.to_bits());
        let sums: Vec<f64> = exponents.par_iter().map(|&p| self.rows.power_sum(p)).collect();
        let lookup = |p: f64| {
            sums[exponents
                .binary_search_by(|e| e.total_cmp(&p))
                .expect("exponent was tabulated")]
        };
        clamped.iter().map(|&p| (lookup(p) * lookup(2.0 - p)).sqrt()).collect()
    }
}

/// `sqrt(s_p(A) s_{2-p}(A†))` with the support count at either endpoint.
pub fn mu_objective(a: &SparseHermitianMatrix, p: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&p) {
        return Err(Error::POutOfRange(p));
    }
    Ok(MixedObjective::new(a).eval(p))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone)]
struct Minimization {
    p_star: f64,
    mixed_min: f64,
    /// Every `(p, value)` the search evaluated and kept as a checkpoint.
    checked: Vec<(f64, f64)>,
}

fn minimize(obj: &MixedObjective, cfg: &MuConfig) -> Minimization {
    let grid = p_grid(cfg.grid_resolution);
    let values = obj.eval_grid(&grid);
    let (k_min, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });

    let lo = grid[k_min.saturating_sub(1)];
    let hi = grid[(k_min + 1).min(grid.len() - 1)];
    let (p_gold, v_gold) = golden_section(|p| obj.eval(p), lo, hi, cfg.p_tol);

    let (p_best, mixed_min) = if v_gold < values[k_min] {
        (p_gold, v_gold)
    } else {
        (grid[k_min], values[k_min])
    };

    // Smallest p whose value ties the minimum: the sublevel set of a
    // quasiconvex function is an interval, so bisect for its left end.
    let threshold = mixed_min * (1.0 + cfg.tie_tol);
    let p_star = if values[0] <= threshold {
        0.0
    } else {
        let mut left = grid
            .iter()
            .zip(&values)
            .take_while(|(&p, _)| p < p_best)
            .filter(|(_, &v)| v > threshold)
            .map(|(&p, _)| p)
            .last()
            .unwrap_or(0.0);
        let mut right = p_best;
        while right - left > cfg.p_tol {
            let mid = 0.5 * (left + right);
            if obj.eval(mid) <= threshold {
                right = mid;
            } else {
                left = mid;
            }
        }
        right
    };

    let mut checked: Vec<(f64, f64)> = grid.into_iter().zip(values).collect();
    checked.push((p_gold, v_gold));
    checked.push((p_star, obj.eval(p_star)));
    Minimization {
        p_star,
        mixed_min,
        checked,
    }
}

/// Global minimum of the mixed objective: `(p_star, mixed_min)`.
pub fn minimize_mixed(a: &SparseHermitianMatrix, grid_resolution: usize, p_tol: f64) -> Result<(f64, f64)> {
    let cfg = MuConfig {
        grid_resolution,
        p_tol,
        ..MuConfig::default()
    };
    cfg.validate()?;
    let m = minimize(&MixedObjective::new(a), &cfg);
    Ok((m.p_star, m.mixed_min))
}

/// Runs the full pass with default configuration.
pub fn mu(a: &SparseHermitianMatrix) -> MuResult {
    mu_with(a, &MuConfig::default()).expect("default configuration is valid")
}

pub fn mu_with(a: &SparseHermitianMatrix, cfg: &MuConfig) -> Result<MuResult> {
    cfg.validate()?;
    let obj = MixedObjective::new(a);
    let m = minimize(&obj, cfg);
    let frobenius = frobenius_norm(a);

    let (worst_p, worst_value) =
        m.checked
            .iter()
            .copied()
            .fold((m.p_star, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let worst_value = worst_value.min(m.mixed_min);
    let ties = |v: f64| frobenius <= v * (1.0 + cfg.tie_tol);
    let deqineq_all_p = m.checked.iter().all(|&(_, v)| ties(v)) && ties(m.mixed_min);
    let inner_model = if ties(m.mixed_min) {
        InnerModel::MuF
    } else {
        InnerModel::MuP
    };

    Ok(MuResult {
        mu_value: frobenius.min(m.mixed_min),
        frobenius,
        mixed_min: m.mixed_min,
        p_star: m.p_star,
        inner_model,
        deqineq_all_p,
        deqineq_worst_p: worst_p,
        deqineq_worst_value: worst_value,
        grid_resolution: cfg.grid_resolution,
        p_tol: cfg.p_tol,
        tie_tol: cfg.tie_tol,
    })
}
