//! `deqlens` command-line front end.
//!
//! Exit codes: `analyze` returns 0 once an analysis completes (whatever the
//! classification), 2 for unreadable or invalid input and 3 for solver
//! failure. `check-corollary` returns 1 when `d <= n`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use deqlens_core::families::FamilySpec;
use deqlens_core::matrix::{DEFAULT_HERM_TOL, DEFAULT_ZERO_TOL};
use deqlens_core::mtx::{read_matrix_market_with, to_matrix_market_string};
use deqlens_core::quasinorms::profile;
use deqlens_core::spectrum::{SpectrumOptions, DEFAULT_MEMBERSHIP_TOL};
use deqlens_core::sweep::{offsets_up_to, read_existing_rows, render_csv, run_sweep, SweepFamily, SweepRow, SweepSpec};
use deqlens_core::verdict::{classify_with, corollary_family_check, VerdictConfig, VerdictReport};
use deqlens_core::{Error, MuConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_SOLVER_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "deqlens",
    version,
    about = "Inner-model selection and dequantizability verdicts for Hermitian matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a Matrix Market file and print the verdict.
    Analyze(AnalyzeArgs),
    /// Write a generated matrix in Matrix Market format.
    Generate(GenerateArgs),
    /// Check d^n >= d^(n-1)(n-1)+1 for the diagonal power family.
    CheckCorollary(CorollaryArgs),
    /// Classify every point of a family parameter sweep into a CSV.
    Sweep(SweepArgs),
}

/// Tolerances and solver settings shared by `analyze` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Number of uniform grid points on [0, 2] for the mu pass.
    #[arg(long = "grid", env = "DEQLENS_GRID", default_value_t = deqlens_core::quasinorms::DEFAULT_GRID_RESOLUTION)]
    pub grid: usize,
    /// Argument tolerance of the golden-section refinement.
    #[arg(long = "p-tol", env = "DEQLENS_P_TOL", default_value_t = deqlens_core::mu::DEFAULT_P_TOL)]
    pub p_tol: f64,
    /// Divide the matrix by its spectral norm before analysis.
    #[arg(long)]
    pub normalize: bool,
    /// Slack on the spectral-norm bound for sparse-access membership.
    #[arg(long, env = "DEQLENS_MEMBERSHIP_TOL", default_value_t = DEFAULT_MEMBERSHIP_TOL)]
    pub membership_tol: f64,
    /// Relative threshold on |λ|min/|λ|max below which the matrix counts as singular.
    #[arg(long, env = "DEQLENS_SINGULAR_TOL", default_value_t = 0.0)]
    pub singular_tol: f64,
    /// Require a positive spectrum for sparse-access membership.
    #[arg(long)]
    pub signed_strict: bool,
}

impl AnalysisArgs {
    pub fn verdict_config(&self) -> VerdictConfig {
        VerdictConfig {
            mu: MuConfig {
                grid_resolution: self.grid,
                p_tol: self.p_tol,
                ..MuConfig::default()
            },
            spectrum: SpectrumOptions {
                membership_tol: self.membership_tol,
                singular_tol: self.singular_tol,
                signed_strict: self.signed_strict,
                normalize: self.normalize,
                ..SpectrumOptions::default()
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Matrix Market file.
    pub matrix: PathBuf,
    /// Write the full JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the sampled s_p profile as CSV.
    #[arg(long)]
    pub profile_csv: Option<PathBuf>,
    /// Write the eigenvalues as CSV.
    #[arg(long)]
    pub spectrum_csv: Option<PathBuf>,
    /// Entries with magnitude at or below this are treated as zero.
    #[arg(long, env = "DEQLENS_ZERO_TOL", default_value_t = DEFAULT_ZERO_TOL)]
    pub zero_tol: f64,
    /// Relative tolerance of the Hermitian check.
    #[arg(long, env = "DEQLENS_HERM_TOL", default_value_t = DEFAULT_HERM_TOL)]
    pub herm_tol: f64,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    DiagPower,
    Identity,
    RandomBlock,
    RandomSupport,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub kind: GenerateKind,
    #[arg(long)]
    pub n: usize,
    /// Base of the diagonal power family (must exceed n).
    #[arg(long)]
    pub d: Option<f64>,
    /// Maximum nonzeros per row for the random families.
    #[arg(long)]
    pub s: Option<usize>,
    /// Spectrum range for random-block.
    #[arg(long, default_value_t = 0.1)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

impl GenerateArgs {
    pub fn family_spec(&self) -> Result<FamilySpec, String> {
        let need = |v: Option<usize>, what: &str| v.ok_or_else(|| format!("--{what} is required for this family"));
        Ok(match self.kind {
            GenerateKind::Identity => FamilySpec::identity(self.n),
            GenerateKind::DiagPower => FamilySpec::diag_power(self.n, self.d.ok_or("--d is required for diag-power")?),
            GenerateKind::RandomBlock => {
                FamilySpec::random_block(self.n, need(self.s, "s")?, (self.lo, self.hi), self.seed)
            }
            GenerateKind::RandomSupport => FamilySpec::random_support(self.n, need(self.s, "s")?, self.seed),
        })
    }
}

#[derive(Debug, Args)]
pub struct CorollaryArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub d: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub kind: GenerateKind,
    #[arg(long)]
    pub n_min: usize,
    #[arg(long)]
    pub n_max: usize,
    /// diag-power: largest offset of d above n (d ranges over (n, n + max]).
    #[arg(long, default_value_t = 3.0)]
    pub d_offset_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub d_step: f64,
    /// Sparsity values for the random families.
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Seeds per (n, s) point for the random families.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// CSV output; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Keep rows already present in the output file and compute only the rest.
    #[arg(long)]
    pub resume: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

impl SweepArgs {
    pub fn sweep_spec(&self) -> Result<SweepSpec, Error> {
        let family = match self.kind {
            GenerateKind::DiagPower => SweepFamily::DiagPower {
                n_min: self.n_min,
                n_max: self.n_max,
                d_offsets: offsets_up_to(self.d_offset_max, self.d_step)?,
            },
            GenerateKind::Identity => SweepFamily::Identity {
                n_min: self.n_min,
                n_max: self.n_max,
            },
            GenerateKind::RandomBlock => SweepFamily::RandomBlock {
                n_min: self.n_min,
                n_max: self.n_max,
                s_values: self.s.clone(),
                spectrum_range: (self.lo, self.hi),
                seed_base: self.seed_base,
                seeds: self.seeds,
            },
            GenerateKind::RandomSupport => SweepFamily::RandomSupport {
                n_min: self.n_min,
                n_max: self.n_max,
                s_values: self.s.clone(),
                seed_base: self.seed_base,
                seeds: self.seeds,
            },
        };
        Ok(SweepSpec {
            family,
            config: self.analysis.verdict_config(),
            jobs: self.jobs,
        })
    }
}

fn error_exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INVALID_INPUT
    } else {
        EXIT_SOLVER_FAILURE
    }
}

/// Reads and classifies a Matrix Market file.
pub fn analyze_file(path: &Path, args: &AnalyzeArgs) -> Result<VerdictReport, Error> {
    let a = read_matrix_market_with(path, args.zero_tol, args.herm_tol)?;
    classify_with(&a, &args.analysis.verdict_config())
}

/// Human-readable verdict summary.
pub fn render_summary(r: &VerdictReport) -> String {
    let mut s = String::new();
    let m = &r.matrix;
    s += &format!(
        "matrix: n = {}, nnz = {}, s = {}, hermitian deviation = {:e}\n",
        m.dim, m.nnz, m.s, m.hermitian_deviation
    );
    if m.normalized_by != 1.0 {
        s += &format!("normalized by spectral norm {}\n", m.normalized_by);
    }
    let mu = &r.mu;
    s += &format!(
        "mu: {} (frobenius {}, mixed minimum {} at p* = {}), inner model {:?}\n",
        mu.mu_value, mu.frobenius, mu.mixed_min, mu.p_star, mu.inner_model
    );
    let sp = &r.spectrum;
    s += &format!(
        "spectrum: |λ|min = {}, |λ|max = {}, κ = {}, Σ|λ| = {}, sparse-access member: {}\n",
        sp.abs_min,
        sp.abs_max,
        sp.kappa,
        sp.abs_sum,
        if sp.sparse_access_member { "yes" } else { "no" }
    );
    s += "predicates:\n";
    let p = &r.predicates;
    let rows = [
        ("lemma_deq_sufficient", Some(&p.lemma_deq_sufficient)),
        ("lemma_undeq_bound", Some(&p.lemma_undeq_bound)),
        ("theorem_form_A", p.theorem_form_a.as_ref()),
        ("theorem_form_B", p.theorem_form_b.as_ref()),
        ("intermediate_sqrt_s_bound", p.intermediate_sqrt_s_bound.as_ref()),
    ];
    for (name, e) in rows {
        match e {
            Some(e) => s += &format!("  {name:<27} {e}\n"),
            None => s += &format!("  {name:<27} n/a (not a sparse-access input)\n"),
        }
    }
    if let Some(c) = &p.corollary_family {
        s += &format!("  {:<27} {c}\n", "corollary_family");
    }
    s += &format!("classification: {}", r.classification);
    if !r.triggered_by.is_empty() {
        s += &format!(" (triggered by {})", r.triggered_by.join(", "));
    }
    s.push('\n');
    s
}

fn write_output(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = match analyze_file(&args.matrix, args) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", args.matrix.display());
            return error_exit_code(&e);
        }
    };
    let _ = out.write_all(render_summary(&report).as_bytes());

    let mut extras: Vec<(&PathBuf, Result<String, Error>)> = Vec::new();
    if let Some(p) = &args.json {
        extras.push((p, report.to_json().map(|j| j + "\n")));
    }
    if let Some(p) = &args.spectrum_csv {
        extras.push((p, report.spectrum.to_csv()));
    }
    if let Some(p) = &args.profile_csv {
        let text = read_matrix_market_with(&args.matrix, args.zero_tol, args.herm_tol)
            .and_then(|a| match report.matrix.normalized_by {
                f if f != 1.0 => a.scaled(1.0 / f),
                _ => Ok(a),
            })
            .and_then(|a| profile(&a, args.analysis.grid))
            .and_then(|prof| prof.to_csv());
        extras.push((p, text));
    }
    for (path, text) in extras {
        let res = text.and_then(|t| fs::write(path, t).map_err(Error::from));
        if let Err(e) = res {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_FAILURE;
        }
    }
    EXIT_OK
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let spec = match args.family_spec() {
        Ok(s) => s,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INVALID_INPUT;
        }
    };
    let generated = match spec.generate() {
        Ok(g) => g,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return error_exit_code(&e);
        }
    };
    if generated.singular {
        let _ = writeln!(err, "warning: generated matrix is numerically singular");
    }
    let text = to_matrix_market_string(&generated.matrix, &[spec.provenance()]);
    if let Err(e) = write_output(&args.out, &text, out) {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return EXIT_FAILURE;
    }
    EXIT_OK
}

pub fn cmd_check_corollary(args: &CorollaryArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match corollary_family_check(args.n, args.d) {
        Ok(c) => {
            let _ = writeln!(out, "n = {}, d = {}: {c}", args.n, args.d);
            if c.holds {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let spec = match args.sweep_spec() {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID_INPUT;
        }
    };

    let existing = match (&args.out, args.resume) {
        (Some(path), true) if path.exists() => {
            match fs::File::open(path).map_err(Error::from).and_then(read_existing_rows) {
                Ok(rows) => rows,
                Err(e) => {
                    let _ = writeln!(err, "error: cannot resume from {}: {e}", path.display());
                    return EXIT_INVALID_INPUT;
                }
            }
        }
        _ => Default::default(),
    };

    let rows = match run_sweep(&spec, &|i| existing.contains_key(&i)) {
        Ok(rows) => rows,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID_INPUT;
        }
    };
    for r in rows.iter().filter(|r| r.failed()) {
        if let Err(msg) = &r.outcome {
            let _ = writeln!(
                err,
                "warning: point {} ({}): {msg}",
                r.point.index,
                r.point.family.kind.name()
            );
        }
    }
    let all_failed = !rows.is_empty() && rows.iter().all(SweepRow::failed);

    let mut merged = existing;
    for r in &rows {
        merged.insert(r.point.index, r.csv_record());
    }
    let text = match render_csv(merged.values()) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    if let Err(e) = write_output(&args.out, &text, out) {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return EXIT_FAILURE;
    }
    if all_failed {
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out, err),
        Command::Generate(a) => cmd_generate(a, out, err),
        Command::CheckCorollary(a) => cmd_check_corollary(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
    }
}
