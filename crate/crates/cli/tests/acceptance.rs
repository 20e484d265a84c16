//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use deqlens_cli::{run, Cli, EXIT_OK};
use deqlens_core::families::{diag_power_family, identity, random_block_hermitian, FamilySpec};
use deqlens_core::mtx::write_matrix_market_file;
use deqlens_core::mu::{minimize_mixed, mu, MixedObjective, DEFAULT_P_TOL};
use deqlens_core::quasinorms::{
    check_sp_ordering, frobenius_norm, frobenius_norm_squared, holder_check, lp_monotonicity_check, s_p,
    DEFAULT_GRID_RESOLUTION,
};
use deqlens_core::spectrum::{eigen_decomposition, extremal_eigenvalues_oracle, spectrum_summary, SpectrumOptions};
use deqlens_core::verdict::corollary_family_check;
use deqlens_core::{classify, Classification, InnerModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale
}

/// Runs the CLI in-process; returns the exit code and captured stdout/stderr.
fn cli(args: &[&str]) -> (i32, String, String) {
    let parsed = Cli::try_parse_from(std::iter::once("deqlens").chain(args.iter().copied()))
        .unwrap_or_else(|e| panic!("bad arguments {args:?}: {e}"));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&parsed, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("temporary paths are UTF-8")
}

fn corollary_reproduction() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for n in 2u32..=12 {
        for d in (n + 1)..=(n + 10) {
            let (code, out, err) = cli(&["check-corollary", "--n", &n.to_string(), "--d", &d.to_string()]);
            ensure(code == EXIT_OK && out.contains("⇒ dequantizable"), || {
                format!("check-corollary n={n} d={d}: exit {code}, {out}{err}")
            })?;
            let c = corollary_family_check(n, d as f64).map_err(|e| e.to_string())?;
            ensure(c.exact && c.holds, || {
                format!("n={n} d={d}: not an exact confirmation: {c}")
            })?;
            let a = diag_power_family(n as usize, d as f64).map_err(|e| e.to_string())?;
            let report = classify(&a).map_err(|e| e.to_string())?;
            ensure(report.classification == Classification::DequantizableBySpectrum, || {
                format!("n={n} d={d}: classified {}", report.classification)
            })?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:.2?} (limit 30 s)")
    })?;
    Ok(format!(
        "{checked} (n, d) pairs confirmed exactly and classified in {elapsed:.2?}"
    ))
}

fn worked_instance_pinning() -> Outcome {
    let a = FamilySpec::diag_power(3, 4.0)
        .generate()
        .map_err(|e| e.to_string())?
        .matrix;
    let r = classify(&a).map_err(|e| e.to_string())?;
    let kappa = r.spectrum.kappa.value();
    ensure(rel_close(kappa, 16.0, 1e-10, 1.0), || format!("κ = {kappa}"))?;
    ensure((r.mu.mu_value - 0.25).abs() <= 1e-9, || {
        format!("μ = {}", r.mu.mu_value)
    })?;
    ensure(r.mu.inner_model == InnerModel::MuP, || {
        format!("inner model {:?}", r.mu.inner_model)
    })?;
    let b = r.predicates.theorem_form_b.as_ref().ok_or("form B missing")?;
    ensure(
        !b.holds && (b.lhs - 0.015625).abs() <= 1e-15 && (b.rhs - 1.0 / 33.0).abs() <= 1e-15,
        || format!("form B: {b}"),
    )?;
    let fa = r.predicates.theorem_form_a.as_ref().ok_or("form A missing")?;
    ensure(fa.holds && fa.lhs == 16.0 && fa.rhs == 21.0, || format!("form A: {fa}"))?;
    Ok(format!(
        "κ = {kappa}, μ = {} (MuP), form B {b}, form A {fa}",
        r.mu.mu_value
    ))
}

fn identity_chain() -> Outcome {
    for n in 2..=32usize {
        let r = classify(&identity(n).unwrap()).map_err(|e| e.to_string())?;
        ensure(r.classification == Classification::Inconclusive, || {
            format!("I_{n} classified {}", r.classification)
        })?;
        let b = r.predicates.theorem_form_b.as_ref().ok_or("form B missing")?;
        ensure(
            b.holds && b.lhs == 1.0 && rel_close(b.rhs, 1.0 / n as f64, 1e-15, 1.0),
            || format!("I_{n} form B: {b}"),
        )?;
    }
    Ok("I_2 … I_32 inconclusive with form B sides (1, 1/n)".into())
}

fn property_suites() -> Outcome {
    let epsilons = [0.25, 0.5, 0.75];
    let mut worst = f64::NEG_INFINITY;
    for k in 0..1000 {
        let a = common::random_unit_hermitian(k);
        let report = check_sp_ordering(&a, &epsilons).map_err(|e| e.to_string())?;
        ensure(report.hypothesis_holds, || {
            format!("matrix {k}: spectral norm {} exceeds 1", report.spectral_norm)
        })?;
        ensure(report.all_hold(), || {
            format!("matrix {k}: chain violated: {:?}", report.chains)
        })?;
        worst = worst.max(report.worst_slack);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xa11ce);
    for k in 0..1000 {
        let len = rng.gen_range(1..=64);
        let vector = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..len)
                .map(|_| rng.gen_range(-1.0..=1.0) * 10f64.powf(rng.gen_range(-6.0..=2.0)))
                .collect()
        };
        let x = vector(&mut rng);
        let w = vector(&mut rng);
        let p1 = rng.gen_range(0.05..=2.0);
        let p2 = rng.gen_range(p1..=2.0);
        ensure(lp_monotonicity_check(&x, p1, p2).map_err(|e| e.to_string())?, || {
            format!("vector {k}: ‖x‖_{p2} > ‖x‖_{p1}")
        })?;
        let p = rng.gen_range(1.05..=20.0);
        let q = p / (p - 1.0);
        ensure(holder_check(&x, &w, p, q).map_err(|e| e.to_string())?, || {
            format!("vector {k}: Hölder fails at p = {p}")
        })?;
    }
    Ok(format!(
        "1000 matrices × 3 chains (worst left − right {worst:.3e}); 1000 monotonicity + 1000 Hölder checks, zero violations"
    ))
}

fn optimizer_vs_oracle() -> Outcome {
    const ORACLE_POINTS: usize = 10_000;
    // Rounding noise of one objective evaluation; flat objectives expose it.
    const EVALUATION_NOISE: f64 = 1e-14;
    let mut worst_gap = 0.0f64;
    let mut worst_excess = 0.0f64;
    for k in 0..200 {
        let a = match k % 4 {
            3 => common::uniform_magnitude(2 + (k as usize % 7), 0.1 + 0.01 * (k % 50) as f64, k),
            _ => common::random_unit_hermitian(10_000 + k),
        };
        let (_, found) = minimize_mixed(&a, DEFAULT_GRID_RESOLUTION, DEFAULT_P_TOL).map_err(|e| e.to_string())?;
        let objective = MixedObjective::new(&a);
        let values: Vec<f64> = (0..ORACLE_POINTS)
            .map(|i| objective.eval(2.0 * i as f64 / (ORACLE_POINTS - 1) as f64))
            .collect();
        let oracle = values.iter().copied().fold(f64::INFINITY, f64::min);
        let gap = (found - oracle).abs();
        worst_gap = worst_gap.max(gap / oracle.max(1.0));
        ensure(gap <= 1e-6 * oracle.max(1.0), || {
            format!("matrix {k}: found {found}, grid {oracle}")
        })?;

        let r = mu(&a);
        let f = frobenius_norm(&a);
        ensure(r.mu_value <= f, || {
            format!("matrix {k}: μ = {} > ‖A‖_F = {f}", r.mu_value)
        })?;
        for &v in &values {
            worst_excess = worst_excess.max((r.mu_value - v) / v);
            ensure(r.mu_value <= v * (1.0 + EVALUATION_NOISE), || {
                format!("matrix {k}: μ = {} exceeds grid value {v}", r.mu_value)
            })?;
        }
    }
    Ok(format!(
        "200 matrices, worst scaled gap to the 10⁴-point grid {worst_gap:.3e}, worst relative excess of μ over a grid value {worst_excess:.3e}"
    ))
}

fn spectrum_cross_checks() -> Outcome {
    let corpus = common::corpus();
    // Beyond this condition number neither solver resolves |λ|min to 1e-6.
    const ORACLE_MIN_KAPPA_LIMIT: f64 = 1e8;
    let (mut oracle_max_checked, mut oracle_min_checked) = (0, 0);
    for (name, a) in &corpus {
        let spec = spectrum_summary(a, &SpectrumOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let sum: f64 = spec.eigenvalues.iter().sum();
        let trace = a.trace().re;
        ensure(
            rel_close(sum, trace, 1e-10, spec.abs_sum.max(f64::MIN_POSITIVE)),
            || format!("{name}: Σλ = {sum}, trace = {trace}"),
        )?;
        let squares: f64 = spec.eigenvalues.iter().map(|l| l * l).sum();
        let f2 = frobenius_norm_squared(a);
        ensure(rel_close(squares, f2, 1e-10, f2), || {
            format!("{name}: Σλ² = {squares}, ‖A‖_F² = {f2}")
        })?;

        let decomposition = eigen_decomposition(a).map_err(|e| format!("{name}: {e}"))?;
        let residual = decomposition.max_residual(a);
        let f = frobenius_norm(a);
        ensure(residual <= 1e-8 * f, || {
            format!("{name}: residual {residual:e} > 1e-8·{f}")
        })?;

        let s2 = s_p(a, 2.0).map_err(|e| e.to_string())?;
        ensure(s2 <= spec.abs_max * spec.abs_max + 1e-10, || {
            format!("{name}: s_2 = {s2} > |λ|max² = {}", spec.abs_max * spec.abs_max)
        })?;

        let (lo, hi) = extremal_eigenvalues_oracle(a).map_err(|e| format!("{name}: oracle: {e}"))?;
        ensure(rel_close(hi, spec.abs_max, 1e-6, spec.abs_max), || {
            format!("{name}: oracle |λ|max {hi} vs {}", spec.abs_max)
        })?;
        oracle_max_checked += 1;
        if spec.kappa.value() <= ORACLE_MIN_KAPPA_LIMIT {
            ensure(rel_close(lo, spec.abs_min, 1e-6, spec.abs_min), || {
                format!("{name}: oracle |λ|min {lo} vs {}", spec.abs_min)
            })?;
            oracle_min_checked += 1;
        }
    }
    Ok(format!(
        "{} matrices: trace, Frobenius, residual and s_2 bounds hold; oracle |λ|max agrees on {oracle_max_checked}, |λ|min on the {oracle_min_checked} with κ ≤ 1e8",
        corpus.len()
    ))
}

fn consistency_invariant() -> Outcome {
    let corpus = common::corpus();
    let (mut muf, mut lemma_true) = (0, 0);
    for (name, a) in &corpus {
        let r = classify(a).map_err(|e| format!("{name}: {e}"))?;
        let lemma = r.predicates.lemma_deq_sufficient.holds;
        let selected = r.mu.inner_model == InnerModel::MuF;
        ensure(lemma == (selected && r.mu.deqineq_all_p), || {
            format!(
                "{name}: lemma {lemma}, model {:?}, deqineq_all_p {}",
                r.mu.inner_model, r.mu.deqineq_all_p
            )
        })?;
        muf += selected as usize;
        lemma_true += lemma as usize;
    }
    Ok(format!(
        "{} matrices ({muf} select MuF, lemma holds on {lemma_true})",
        corpus.len()
    ))
}

fn performance() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let matrix = dir.path().join("dense512.mtx");
    let a = random_block_hermitian(512, 512, (0.1, 1.0), 512).map_err(|e| e.to_string())?;
    write_matrix_market_file(&a, &matrix, &[]).map_err(|e| e.to_string())?;
    let json = dir.path().join("dense512.json");

    let start = Instant::now();
    let (code, _, err) = cli(&["analyze", path_str(&matrix), "--json", path_str(&json)]);
    let analyze = start.elapsed();
    ensure(code == EXIT_OK, || format!("analyze exit {code}: {err}"))?;
    ensure(analyze < Duration::from_secs(10), || {
        format!("dense 512 analyze took {analyze:.2?}")
    })?;

    let csv = dir.path().join("sweep.csv");
    let start = Instant::now();
    let (code, _, err) = cli(&[
        "sweep",
        "diag-power",
        "--n-min",
        "2",
        "--n-max",
        "11",
        "--d-offset-max",
        "10",
        "--out",
        path_str(&csv),
    ]);
    let sweep = start.elapsed();
    ensure(code == EXIT_OK, || format!("sweep exit {code}: {err}"))?;
    let rows = fs::read_to_string(&csv).map_err(|e| e.to_string())?.lines().count() - 1;
    ensure(rows == 100, || format!("sweep produced {rows} rows"))?;
    ensure(sweep < Duration::from_secs(60), || {
        format!("100-point sweep took {sweep:.2?}")
    })?;
    Ok(format!("dense 512 analyze {analyze:.2?}; 100-point sweep {sweep:.2?}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name);

    let mut generated = Vec::new();
    for round in 0..2 {
        let out = p(&format!("block{round}.mtx"));
        let (code, _, err) = cli(&[
            "generate",
            "random-block",
            "--n",
            "40",
            "--s",
            "8",
            "--lo",
            "0.2",
            "--hi",
            "0.9",
            "--seed",
            "11",
            "--out",
            path_str(&out),
        ]);
        ensure(code == EXIT_OK, || format!("generate exit {code}: {err}"))?;
        generated.push(fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(generated[0] == generated[1], || "generated matrices differ".into())?;

    let mut outputs = Vec::new();
    for round in 0..2 {
        let (json, profile, spectrum) = (
            p(&format!("r{round}.json")),
            p(&format!("p{round}.csv")),
            p(&format!("s{round}.csv")),
        );
        let (code, _, err) = cli(&[
            "analyze",
            path_str(&p("block0.mtx")),
            "--json",
            path_str(&json),
            "--profile-csv",
            path_str(&profile),
            "--spectrum-csv",
            path_str(&spectrum),
        ]);
        ensure(code == EXIT_OK, || format!("analyze exit {code}: {err}"))?;
        let sweep = p(&format!("sweep{round}.csv"));
        let jobs = if round == 0 { "1" } else { "4" };
        let (code, _, err) = cli(&[
            "sweep",
            "random-support",
            "--n-min",
            "6",
            "--n-max",
            "9",
            "--s",
            "2,3",
            "--seeds",
            "2",
            "--jobs",
            jobs,
            "--out",
            path_str(&sweep),
        ]);
        ensure(code == EXIT_OK, || format!("sweep exit {code}: {err}"))?;
        outputs.push([json, profile, spectrum, sweep].map(|f| fs::read(f).expect("output was written")));
    }
    for (k, label) in ["JSON report", "profile CSV", "spectrum CSV", "sweep CSV"]
        .iter()
        .enumerate()
    {
        ensure(outputs[0][k] == outputs[1][k], || {
            format!("{label} differs between runs")
        })?;
    }
    Ok("generated matrix, JSON report, profile/spectrum CSVs and sweep CSV are byte-identical across runs".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("corollary reproduction", corollary_reproduction),
        ("worked instance n=3, d=4", worked_instance_pinning),
        ("identity chain", identity_chain),
        ("quasinorm property suites", property_suites),
        ("mu optimizer vs grid oracle", optimizer_vs_oracle),
        ("spectrum cross-checks", spectrum_cross_checks),
        ("lemma/inner-model consistency", consistency_invariant),
        ("performance", performance),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{}] {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
