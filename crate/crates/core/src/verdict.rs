//! Dequantizability predicates and the final classification.
//!
//! Every predicate stores both sides of its inequality. The report can never
//! say a matrix is un-dequantizable: the spectral and sparsity predicates are
//! necessary conditions for that, and their failure is what gets reported.

use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SparseHermitianMatrix;
use crate::mu::{mu_with, InnerModel, MuConfig, MuResult};
use crate::quasinorms::{frobenius_norm, frobenius_norm_squared, RowMagnitudes};
use crate::spectrum::{spectrum_summary, ConditionNumber, SpectrumOptions, SpectrumSummary};

pub const SCHEMA_VERSION: u32 = 1;

/// Comparison a predicate asserts between its two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Gt => ">",
            Relation::Le => "<=",
        }
    }
}

/// Outcome of one inequality, with both sides kept for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evidence {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    /// Added to `rhs` for non-strict comparisons; zero for strict ones.
    pub slack: f64,
    /// Where in `p` the inequality was tightest, for predicates quantified over `p`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_p: Option<f64>,
}

impl Evidence {
    fn compare(lhs: f64, rhs: f64, relation: Relation, slack: f64) -> Self {
        let mut e = Evidence {
            holds: false,
            lhs,
            rhs,
            relation,
            slack,
            at_p: None,
        };
        e.holds = e.recheck();
        e
    }

    /// Re-evaluates the relation from the stored sides.
    pub fn recheck(&self) -> bool {
        match self.relation {
            Relation::Lt => self.lhs < self.rhs + self.slack,
            Relation::Gt => self.lhs > self.rhs + self.slack,
            Relation::Le => self.lhs <= self.rhs + self.slack,
        }
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} -> {}",
            self.lhs,
            self.relation.symbol(),
            self.rhs,
            if self.holds { "holds" } else { "fails" }
        )
    }
}

/// `||A||_F <= sqrt(s_p(A) s_{2-p}(A†))` at every checked `p`, i.e.
/// `s_{2-p}(A†) >= ||A||_F^2 / s_p(A)` for all `p`. When it holds the
/// Frobenius model is selected and dequantization applies.
pub fn lemma_deq_sufficient(mu: &MuResult) -> Evidence {
    let mut e = Evidence {
        holds: mu.deqineq_all_p,
        lhs: mu.frobenius,
        rhs: mu.deqineq_worst_value,
        relation: Relation::Le,
        slack: mu.deqineq_worst_value * mu.tie_tol,
        at_p: Some(mu.deqineq_worst_p),
    };
    // The stored sides must reproduce the flag.
    debug_assert_eq!(e.recheck(), e.holds);
    e.holds = e.recheck();
    e
}

/// `s_0(A) < ||A||_F^2 / s_2(A†)` or `s_0(A†) < ||A||_F^2 / s_2(A)`.
///
/// True means the necessary condition for un-dequantizability holds. The
/// reported sides are those of the disjunct with the larger margin.
pub fn lemma_undeq_bound(a: &SparseHermitianMatrix) -> Evidence {
    let adj = a.adjoint();
    let rows = RowMagnitudes::new(a);
    let adj_rows = RowMagnitudes::new(&adj);
    let f2 = frobenius_norm_squared(a);
    let first = Evidence::compare(rows.count() as f64, f2 / adj_rows.power_sum(2.0), Relation::Lt, 0.0);
    let second = Evidence::compare(adj_rows.count() as f64, f2 / rows.power_sum(2.0), Relation::Lt, 0.0);
    if second.rhs - second.lhs > first.rhs - first.lhs {
        second
    } else {
        first
    }
}

fn require_member(spec: &SpectrumSummary) -> Result<f64> {
    match spec.kappa {
        ConditionNumber::Finite(k) if spec.sparse_access_member => Ok(k),
        _ => Err(Error::NotSparseAccess),
    }
}

/// `κ < Σ|λ_i| / (sqrt(s) |λ|min)`.
pub fn theorem_form_a(spec: &SpectrumSummary, s: usize) -> Result<Evidence> {
    let kappa = require_member(spec)?;
    let rhs = spec.abs_sum / ((s as f64).sqrt() * spec.abs_min);
    Ok(Evidence::compare(kappa, rhs, Relation::Lt, 0.0))
}

/// `|λ|min > sqrt(s) / (κ(n - 1) + 1)`.
pub fn theorem_form_b(spec: &SpectrumSummary, s: usize, n: usize) -> Result<Evidence> {
    let kappa = require_member(spec)?;
    let rhs = (s as f64).sqrt() / (kappa * (n as f64 - 1.0) + 1.0);
    Ok(Evidence::compare(spec.abs_min, rhs, Relation::Gt, 0.0))
}

/// `sqrt(s) < ||A||_F / |λ|max`.
pub fn intermediate_sqrt_s_bound(a: &SparseHermitianMatrix, spec: &SpectrumSummary, s: usize) -> Result<Evidence> {
    require_member(spec)?;
    let rhs = frobenius_norm(a) / spec.abs_max;
    Ok(Evidence::compare((s as f64).sqrt(), rhs, Relation::Lt, 0.0))
}

/// Outcome of the `d^n >= d^{n-1}(n-1) + 1` check for the diagonal power family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryCheck {
    pub n: u32,
    pub d: f64,
    /// Whether big-integer arithmetic was used (integer `d`).
    pub exact: bool,
    /// Exact sides as decimal strings (`d^n` and `d^{n-1}(n-1)+1`), or the
    /// factored floating-point sides `d` and `(n-1) + d^{1-n}`.
    pub lhs: String,
    pub rhs: String,
    /// True when the inequality holds, i.e. the family is dequantizable.
    pub holds: bool,
}

impl fmt::Display for CorollaryCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (rel, verdict) = if self.holds {
            ("≥", "dequantizable")
        } else {
            ("<", "not confirmed")
        };
        write!(f, "{} {} {} ⇒ {}", self.lhs, rel, self.rhs, verdict)
    }
}

/// Largest integer magnitude for which `d` is treated as an exact integer.
const EXACT_INTEGER_LIMIT: f64 = 9_007_199_254_740_992.0;

pub fn corollary_family_check(n: u32, d: f64) -> Result<CorollaryCheck> {
    if n < 2 {
        return Err(Error::domain(format!("corollary check needs n >= 2, got {n}")));
    }
    if !(d.is_finite() && d > n as f64) {
        return Err(Error::domain(format!(
            "corollary check needs d > n, got n = {n}, d = {d}"
        )));
    }
    if d.fract() == 0.0 && d < EXACT_INTEGER_LIMIT {
        let base = BigUint::from(d as u64);
        let lhs = base.pow(n);
        let rhs = base.pow(n - 1) * BigUint::from(n - 1) + BigUint::from(1u32);
        Ok(CorollaryCheck {
            n,
            d,
            exact: true,
            holds: lhs >= rhs,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        })
    } else {
        let rhs = (n as f64 - 1.0) + d.powi(1 - n as i32);
        Ok(CorollaryCheck {
            n,
            d,
            exact: false,
            holds: d >= rhs * (1.0 - 1e-12),
            lhs: d.to_string(),
            rhs: rhs.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// The Frobenius-model inequality holds at every `p`.
    DequantizableSufficient,
    /// A necessary condition for un-dequantizability fails.
    DequantizableBySpectrum,
    Inconclusive,
    /// Outside the sparse-access model; spectral predicates do not apply.
    NotSparseAccess,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct VerdictConfig {
    pub mu: MuConfig,
    pub spectrum: SpectrumOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixDigest {
    pub dim: usize,
    pub s: usize,
    pub nnz: usize,
    pub hermitian_deviation: f64,
    /// Divisor applied before analysis (1 when not normalized).
    pub normalized_by: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predicates {
    pub lemma_deq_sufficient: Evidence,
    pub lemma_undeq_bound: Evidence,
    #[serde(rename = "theorem_form_A")]
    pub theorem_form_a: Option<Evidence>,
    #[serde(rename = "theorem_form_B")]
    pub theorem_form_b: Option<Evidence>,
    pub intermediate_sqrt_s_bound: Option<Evidence>,
    pub corollary_family: Option<CorollaryCheck>,
}

impl Predicates {
    /// Names and outcomes of the necessary conditions that were evaluated.
    pub fn necessary_conditions(&self) -> Vec<(&'static str, &Evidence)> {
        let mut out = vec![("lemma_undeq_bound", &self.lemma_undeq_bound)];
        for (name, e) in [
            ("theorem_form_A", &self.theorem_form_a),
            ("theorem_form_B", &self.theorem_form_b),
            ("intermediate_sqrt_s_bound", &self.intermediate_sqrt_s_bound),
        ] {
            if let Some(e) = e {
                out.push((name, e));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub schema_version: u32,
    pub matrix: MatrixDigest,
    pub mu: MuResult,
    pub spectrum: SpectrumSummary,
    pub predicates: Predicates,
    pub classification: Classification,
    /// Predicates whose outcome decided the classification.
    pub triggered_by: Vec<String>,
    pub config: VerdictConfig,
}

impl VerdictReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Attaches the closed-form family check.
    pub fn with_corollary(mut self, check: CorollaryCheck) -> Self {
        self.predicates.corollary_family = Some(check);
        self
    }
}

/// Classifies `a` with the default configuration.
pub fn classify(a: &SparseHermitianMatrix) -> Result<VerdictReport> {
    classify_with(a, &VerdictConfig::default())
}

pub fn classify_with(a: &SparseHermitianMatrix, config: &VerdictConfig) -> Result<VerdictReport> {
    config.mu.validate()?;
    let raw_opts = SpectrumOptions {
        normalize: false,
        ..config.spectrum
    };
    let mut spectrum = spectrum_summary(a, &raw_opts)?;
    let scaled;
    let a = if config.spectrum.normalize && spectrum.abs_max > 0.0 {
        // Scale the stored spectrum instead of re-solving so |λ|max is exactly 1.
        spectrum = SpectrumSummary::from_eigenvalues(spectrum.eigenvalues, &config.spectrum);
        scaled = a.scaled(1.0 / spectrum.scale)?;
        &scaled
    } else {
        a
    };

    let shape = a.shape_summary();
    let s = shape.s;
    let n = a.dim();
    let mu = mu_with(a, &config.mu)?;

    let lemma_deq = lemma_deq_sufficient(&mu);
    let lemma_undeq = lemma_undeq_bound(a);
    let form_a = theorem_form_a(&spectrum, s).ok();
    let form_b = theorem_form_b(&spectrum, s, n).ok();
    let intermediate = intermediate_sqrt_s_bound(a, &spectrum, s).ok();

    let predicates = Predicates {
        lemma_deq_sufficient: lemma_deq,
        lemma_undeq_bound: lemma_undeq,
        theorem_form_a: form_a,
        theorem_form_b: form_b,
        intermediate_sqrt_s_bound: intermediate,
        corollary_family: None,
    };

    let (classification, triggered_by) = if lemma_deq.holds {
        debug_assert_eq!(mu.inner_model, InnerModel::MuF);
        (
            Classification::DequantizableSufficient,
            vec!["lemma_deq_sufficient".to_string()],
        )
    } else if !spectrum.sparse_access_member {
        (
            Classification::NotSparseAccess,
            vec!["sparse_access_member".to_string()],
        )
    } else {
        let failed: Vec<String> = predicates
            .necessary_conditions()
            .into_iter()
            .filter(|(_, e)| !e.holds)
            .map(|(name, _)| name.to_string())
            .collect();
        if failed.is_empty() {
            (Classification::Inconclusive, Vec::new())
        } else {
            (Classification::DequantizableBySpectrum, failed)
        }
    };

    Ok(VerdictReport {
        schema_version: SCHEMA_VERSION,
        matrix: MatrixDigest {
            dim: n,
            s,
            nnz: shape.nnz,
            hermitian_deviation: a.hermitian_deviation(),
            normalized_by: spectrum.scale,
        },
        mu,
        spectrum,
        predicates,
        classification,
        triggered_by,
        config: *config,
    })
}
