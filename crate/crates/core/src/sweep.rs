//! Parameter sweeps over the generator families, written as CSV.

use std::collections::BTreeMap;
use std::io::Read;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{FamilyKind, FamilySpec};
use crate::verdict::{classify_with, corollary_family_check, Evidence, VerdictConfig, VerdictReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SweepFamily {
    /// `d = n + offset` for every offset.
    DiagPower {
        n_min: usize,
        n_max: usize,
        d_offsets: Vec<f64>,
    },
    Identity {
        n_min: usize,
        n_max: usize,
    },
    RandomBlock {
        n_min: usize,
        n_max: usize,
        s_values: Vec<usize>,
        spectrum_range: (f64, f64),
        seed_base: u64,
        seeds: usize,
    },
    RandomSupport {
        n_min: usize,
        n_max: usize,
        s_values: Vec<usize>,
        seed_base: u64,
        seeds: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub family: SweepFamily,
    pub config: VerdictConfig,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

/// Offsets `step, 2 step, ...` up to and including `max`.
pub fn offsets_up_to(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && max.is_finite()) {
        return Err(Error::domain("d offsets need a positive step"));
    }
    let count = (max / step + 1e-9).floor();
    Ok((1..=count.max(0.0) as usize).map(|k| k as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub family: FamilySpec,
}

/// One CSV row: either a full verdict or the reason the point failed.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub outcome: std::result::Result<VerdictReport, String>,
}

fn n_range(n_min: usize, n_max: usize) -> Result<std::ops::RangeInclusive<usize>> {
    if n_min > n_max {
        return Err(Error::domain(format!("empty n range {n_min}..={n_max}")));
    }
    Ok(n_min..=n_max)
}

/// Enumerates sweep points in deterministic order. Points violating a family
/// precondition are kept; they fail at evaluation time with a logged reason.
pub fn sweep_points(family: &SweepFamily) -> Result<Vec<SweepPoint>> {
    let mut specs = Vec::new();
    match family {
        SweepFamily::DiagPower {
            n_min,
            n_max,
            d_offsets,
        } => {
            for n in n_range(*n_min, *n_max)? {
                for &off in d_offsets {
                    specs.push(FamilySpec::diag_power(n, n as f64 + off));
                }
            }
        }
        SweepFamily::Identity { n_min, n_max } => {
            specs.extend(n_range(*n_min, *n_max)?.map(FamilySpec::identity));
        }
        SweepFamily::RandomBlock {
            n_min,
            n_max,
            s_values,
            spectrum_range,
            seed_base,
            seeds,
        } => {
            for n in n_range(*n_min, *n_max)? {
                for &s in s_values {
                    for k in 0..*seeds as u64 {
                        specs.push(FamilySpec::random_block(n, s, *spectrum_range, seed_base + k));
                    }
                }
            }
        }
        SweepFamily::RandomSupport {
            n_min,
            n_max,
            s_values,
            seed_base,
            seeds,
        } => {
            for n in n_range(*n_min, *n_max)? {
                for &s in s_values {
                    for k in 0..*seeds as u64 {
                        specs.push(FamilySpec::random_support(n, s, seed_base + k));
                    }
                }
            }
        }
    }
    if specs.is_empty() {
        return Err(Error::domain("sweep has no parameter points"));
    }
    Ok(specs
        .into_iter()
        .enumerate()
        .map(|(index, family)| SweepPoint { index, family })
        .collect())
}

pub fn evaluate_point(point: &SweepPoint, config: &VerdictConfig) -> SweepRow {
    let outcome = (|| -> Result<VerdictReport> {
        let generated = point.family.generate()?;
        let report = classify_with(&generated.matrix, config)?;
        Ok(match (point.family.kind, point.family.d) {
            (FamilyKind::DiagPower, Some(d)) => {
                let n = u32::try_from(point.family.n).map_err(|_| Error::domain("n too large"))?;
                report.with_corollary(corollary_family_check(n, d)?)
            }
            _ => report,
        })
    })()
    .map_err(|e| e.to_string());
    SweepRow {
        point: point.clone(),
        outcome,
    }
}

/// Evaluates every point whose index is not in `skip`, in index order.
pub fn run_sweep(spec: &SweepSpec, skip: &dyn Fn(usize) -> bool) -> Result<Vec<SweepRow>> {
    let points: Vec<SweepPoint> = sweep_points(&spec.family)?
        .into_iter()
        .filter(|p| !skip(p.index))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(|p| evaluate_point(p, &spec.config)).collect()))
}

pub const CSV_COLUMNS: &[&str] = &[
    "index",
    "family",
    "n",
    "d",
    "s",
    "seed",
    "frobenius",
    "mu",
    "p_star",
    "inner_model",
    "kappa",
    "lemma_deq_sufficient_lhs",
    "lemma_deq_sufficient_rhs",
    "lemma_deq_sufficient_holds",
    "lemma_undeq_bound_lhs",
    "lemma_undeq_bound_rhs",
    "lemma_undeq_bound_holds",
    "theorem_form_A_lhs",
    "theorem_form_A_rhs",
    "theorem_form_A_holds",
    "theorem_form_B_lhs",
    "theorem_form_B_rhs",
    "theorem_form_B_holds",
    "intermediate_sqrt_s_bound_lhs",
    "intermediate_sqrt_s_bound_rhs",
    "intermediate_sqrt_s_bound_holds",
    "corollary_lhs",
    "corollary_rhs",
    "corollary_holds",
    "classification",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn evidence_cells(e: Option<&Evidence>) -> [String; 3] {
    match e {
        Some(e) => [e.lhs.to_string(), e.rhs.to_string(), e.holds.to_string()],
        None => Default::default(),
    }
}

impl SweepRow {
    pub fn csv_record(&self) -> Vec<String> {
        let f = &self.point.family;
        let mut rec = vec![
            self.point.index.to_string(),
            f.kind.name().to_string(),
            f.n.to_string(),
            opt(f.d),
            opt(f.s),
            opt(f.seed),
        ];
        match &self.outcome {
            Ok(r) => {
                rec.push(r.mu.frobenius.to_string());
                rec.push(r.mu.mu_value.to_string());
                rec.push(r.mu.p_star.to_string());
                rec.push(format!("{:?}", r.mu.inner_model));
                rec.push(r.spectrum.kappa.to_string());
                let p = &r.predicates;
                for e in [
                    Some(&p.lemma_deq_sufficient),
                    Some(&p.lemma_undeq_bound),
                    p.theorem_form_a.as_ref(),
                    p.theorem_form_b.as_ref(),
                    p.intermediate_sqrt_s_bound.as_ref(),
                ] {
                    rec.extend(evidence_cells(e));
                }
                match &p.corollary_family {
                    Some(c) => rec.extend([c.lhs.clone(), c.rhs.clone(), c.holds.to_string()]),
                    None => rec.extend([String::new(), String::new(), String::new()]),
                }
                rec.push(r.classification.to_string());
                rec.push(String::new());
            }
            Err(msg) => {
                rec.resize(CSV_COLUMNS.len() - 1, String::new());
                rec.push(msg.clone());
            }
        }
        rec
    }

    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }
}

/// Rows of a previously written sweep CSV keyed by index, kept verbatim.
pub fn read_existing_rows<R: Read>(reader: R) -> Result<BTreeMap<usize, Vec<String>>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::domain("existing sweep file has a different column set"));
    }
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let index: usize = rec[0]
            .parse()
            .map_err(|_| Error::domain(format!("bad index '{}' in existing sweep file", &rec[0])))?;
        out.insert(index, rec.iter().map(str::to_string).collect());
    }
    Ok(out)
}

/// Renders header plus rows (already in index order) as CSV.
pub fn render_csv<'a, I>(records: I) -> Result<String>
where
    I: IntoIterator<Item = &'a Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: SweepFamily) -> SweepSpec {
        SweepSpec {
            family,
            config: VerdictConfig::default(),
            jobs: 2,
        }
    }

    #[test]
    fn offsets() {
        assert_eq!(offsets_up_to(3.0, 1.0).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(offsets_up_to(1.0, 0.5).unwrap(), vec![0.5, 1.0]);
        assert!(offsets_up_to(0.5, 1.0).unwrap().is_empty());
        assert!(offsets_up_to(1.0, 0.0).is_err());
    }

    #[test]
    fn empty_sweeps_are_rejected() {
        assert!(sweep_points(&SweepFamily::Identity { n_min: 5, n_max: 4 }).is_err());
        let f = SweepFamily::DiagPower {
            n_min: 2,
            n_max: 3,
            d_offsets: vec![],
        };
        assert!(sweep_points(&f).is_err());
    }

    #[test]
    fn diag_power_sweep_is_all_by_spectrum() {
        let s = spec(SweepFamily::DiagPower {
            n_min: 2,
            n_max: 6,
            d_offsets: offsets_up_to(3.0, 1.0).unwrap(),
        });
        let rows = run_sweep(&s, &|_| false).unwrap();
        assert_eq!(rows.len(), 15);
        for (k, r) in rows.iter().enumerate() {
            assert_eq!(r.point.index, k);
            let rec = r.csv_record();
            assert_eq!(rec.len(), CSV_COLUMNS.len());
            assert_eq!(rec[CSV_COLUMNS.len() - 2], "DequantizableBySpectrum");
        }
    }

    #[test]
    fn identity_sweep_is_inconclusive() {
        let rows = run_sweep(&spec(SweepFamily::Identity { n_min: 2, n_max: 10 }), &|_| false).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.outcome.as_ref().unwrap().classification.to_string() == "Inconclusive"));
    }

    #[test]
    fn failed_points_carry_error_column() {
        let s = spec(SweepFamily::RandomBlock {
            n_min: 2,
            n_max: 2,
            s_values: vec![3],
            spectrum_range: (0.5, 1.0),
            seed_base: 0,
            seeds: 1,
        });
        let rows = run_sweep(&s, &|_| false).unwrap();
        assert!(rows[0].failed());
        let rec = rows[0].csv_record();
        assert_eq!(rec.len(), CSV_COLUMNS.len());
        assert!(rec.last().unwrap().contains("sparsity"));
    }

    #[test]
    fn existing_rows_round_trip() {
        let rows = run_sweep(&spec(SweepFamily::Identity { n_min: 2, n_max: 4 }), &|_| false).unwrap();
        let records: Vec<_> = rows.iter().map(SweepRow::csv_record).collect();
        let text = render_csv(&records).unwrap();
        let back = read_existing_rows(text.as_bytes()).unwrap();
        assert_eq!(back.values().cloned().collect::<Vec<_>>(), records);
    }
}
