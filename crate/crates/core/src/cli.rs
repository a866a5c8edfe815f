//! Command-line front end for `dctflow`.
//!
//! Exit codes: 0 on success, 1 when a verification or evaluation check
//! fails, 2 for usage and input errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::complexity::{self, ComplexityRegistry};
use crate::error::Error;
use crate::factorizer::{check_plan_file, BaseLibrary, ScaledFactorization};
use crate::flowgraph::io::{to_dot, PlanFile, TransformKind};
use crate::flowgraph::{fold, transpose, OpCount, PlanGraph};
use crate::oracle::{self, DenseMatrix, Identity};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const MAX_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(
    name = "dctflow",
    version,
    about = "Flowgraph factorizations of the DCT"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a plan and write it as JSON or DOT.
    Gen(GenArgs),
    /// Run a plan on an input vector and compare with the oracle.
    Eval(EvalArgs),
    /// Count the operations of a built plan.
    Count(CountArgs),
    /// Evaluate the closed-form operation counts.
    Formula(FormulaArgs),
    /// Scaled counts against the prime-factor bound for q in 3, 5, 15.
    Table2(TableArgs),
    /// Scaled multiplications per point for the four length families.
    Fig5(Fig5Args),
    /// Check the matrix identities and every plan against the oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transform {
    Dct2,
    Dct3,
    Dct4,
}

/// Which plan to build.
#[derive(Debug, Clone, Args)]
pub struct PlanSpec {
    /// Transform length.
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long, value_enum, default_value = "dct2")]
    pub transform: Transform,
    /// Build the scaled DCT-II (outputs need the pi/delta post-scaling).
    #[arg(long)]
    pub scaled: bool,
    /// Run constant folding on the plan.
    #[arg(long)]
    pub fold: bool,
    /// Extra base modules (plan files labelled dct2 or scaled-dct2).
    #[arg(long = "base", value_name = "FILE")]
    pub bases: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub plan: PlanSpec,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub plan: PlanSpec,
    /// Seed for the ChaCha8 generator drawing inputs in [-1, 1].
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated input instead of a random one.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub input: Option<Vec<f64>>,
    #[arg(long = "tol", value_parser = parse_tolerance, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub plan: PlanSpec,
    /// Also print the closed-form counts and the difference.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct FormulaArgs {
    /// Registry base length.
    #[arg(long)]
    pub q: usize,
    /// Number of recursion levels.
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub scaled: bool,
    /// With --scaled, the counts after constant folding.
    #[arg(long)]
    pub fold: bool,
    /// Print the prime-factor upper bound on scaled multiplications.
    #[arg(long, conflicts_with_all = ["pfa_lower", "compare"])]
    pub pfa_scaled: bool,
    /// Print the prime-factor lower bound on unscaled multiplications.
    #[arg(long, conflicts_with = "compare")]
    pub pfa_lower: bool,
    /// Also build the plan of length q*2^m and print the difference.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct Fig5Args {
    #[arg(long, default_value_t = 7)]
    pub max_m: u32,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 64)]
    pub max_n: usize,
    #[arg(long = "tol", value_parser = parse_tolerance, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Plan files to check against the oracle of their transform.
    #[arg(long = "plan", value_name = "FILE")]
    pub plans: Vec<PathBuf>,
    /// Extra base modules, as for gen.
    #[arg(long = "base", value_name = "FILE")]
    pub bases: Vec<PathBuf>,
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t <= MAX_TOLERANCE {
        Ok(t)
    } else {
        Err(format!("tolerance must lie in (0, {MAX_TOLERANCE:e}]"))
    }
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::CheckFailed => 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}

type CliResult = Result<Status, CliError>;

pub fn run(config: &CliConfig, out: &mut dyn Write) -> CliResult {
    match &config.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Count(a) => cmd_count(a, out),
        Command::Formula(a) => cmd_formula(a, out),
        Command::Table2(a) => cmd_table2(a, out),
        Command::Fig5(a) => cmd_fig5(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    }
}

fn pick_format(
    requested: Option<Format>,
    default: Format,
    allowed: &[Format],
) -> Result<Format, CliError> {
    let f = requested.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!(
            "format {f:?} is not available here; choose one of {allowed:?}"
        )))
    }
}

fn load_library(bases: &[PathBuf]) -> Result<BaseLibrary, Error> {
    let mut lib = BaseLibrary::standard();
    for path in bases {
        lib.load_file(path)?;
    }
    Ok(lib)
}

/// A built plan: plain, or scaled with its output factors.
enum Built {
    Plain(PlanGraph, TransformKind),
    Scaled(ScaledFactorization),
}

impl Built {
    fn graph(&self) -> &PlanGraph {
        match self {
            Built::Plain(p, _) => p,
            Built::Scaled(s) => &s.plan,
        }
    }

    fn counts(&self) -> OpCount {
        self.graph().count_ops()
    }

    fn plan_file(&self) -> PlanFile {
        match self {
            Built::Plain(p, kind) => PlanFile::new(p, Some(*kind)),
            Built::Scaled(s) => {
                let mut f = PlanFile::new(&s.plan, Some(TransformKind::ScaledDct2));
                f.pi = Some(s.pi.clone());
                f.delta = Some(s.delta.clone());
                f
            }
        }
    }

    /// The natural-order transform of `x`.
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        match self {
            Built::Plain(p, _) => p.evaluate(x),
            Built::Scaled(s) => s.apply(x),
        }
    }

    fn oracle(&self) -> Result<DenseMatrix, Error> {
        let n = self.graph().n_inputs();
        match self {
            Built::Plain(_, TransformKind::Dct3) => oracle::dct3_matrix(n),
            Built::Plain(_, TransformKind::Dct4) => oracle::dct4_matrix(n),
            _ => oracle::dct2_matrix(n),
        }
    }
}

fn build(spec: &PlanSpec) -> Result<Built, CliError> {
    let lib = load_library(&spec.bases)?;
    let n = spec.n;
    if spec.scaled {
        if spec.transform != Transform::Dct2 {
            return Err(CliError::Usage("--scaled applies to dct2 only".into()));
        }
        let s = lib.scaled_plan(n)?;
        return Ok(Built::Scaled(if spec.fold { s.fold() } else { s }));
    }
    let (plan, kind) = match spec.transform {
        Transform::Dct2 => (lib.kok_plan(n)?, TransformKind::Dct2),
        Transform::Dct3 => (lib.dct3_plan(n)?, TransformKind::Dct3),
        Transform::Dct4 => (lib.dct4_plan(n)?, TransformKind::Dct4),
    };
    let plan = if spec.fold { fold(&plan) } else { plan };
    Ok(Built::Plain(plan, kind))
}

fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> CliResult {
    let format = pick_format(args.format, Format::Json, &[Format::Json, Format::Dot])?;
    let built = build(&args.plan)?;
    match format {
        Format::Dot => {
            let name = match (&built, args.plan.transform) {
                (Built::Scaled(_), _) => format!("scaled_dct2_{}", args.plan.n),
                (_, t) => format!("{t:?}_{}", args.plan.n).to_lowercase(),
            };
            out.write_all(to_dot(built.graph(), &name).as_bytes())?;
        }
        _ => writeln!(out, "{}", built.plan_file().to_json())?,
    }
    Ok(Status::Success)
}

fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> CliResult {
    let format = pick_format(args.format, Format::Csv, &[Format::Csv, Format::Json])?;
    let built = build(&args.plan)?;
    let n = args.plan.n;
    let x = match &args.input {
        Some(v) => v.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
        }
    };
    let y = built.apply(&x)?;
    let want = built.oracle()?.apply(&x);
    let err: Vec<f64> = y.iter().zip(&want).map(|(a, b)| (a - b).abs()).collect();
    let max_err = err.iter().copied().fold(0.0, f64::max);
    let passed = max_err < args.tolerance;
    match format {
        Format::Json => {
            let report = json!({
                "prng": "chacha8",
                "seed": args.seed,
                "input": x,
                "output": y,
                "oracle": want,
                "max_abs_err": max_err,
                "tolerance": args.tolerance,
                "passed": passed,
            });
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&report).map_err(Error::from)?
            )?;
        }
        _ => {
            if args.input.is_none() {
                writeln!(out, "# prng=chacha8 seed={}", args.seed)?;
            }
            writeln!(out, "k,input,output,oracle,abs_err")?;
            for k in 0..n {
                writeln!(out, "{k},{},{},{},{:e}", x[k], y[k], want[k], err[k])?;
            }
            writeln!(out, "# max_abs_err={max_err:e} tol={:e}", args.tolerance)?;
        }
    }
    Ok(if passed {
        Status::Success
    } else {
        Status::CheckFailed
    })
}

fn write_counts(
    out: &mut dyn Write,
    format: Format,
    rows: &[(&str, OpCount)],
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let value = if let [(_, c)] = rows {
                serde_json::to_value(c)
            } else {
                serde_json::to_value(
                    rows.iter()
                        .map(|(k, c)| (k.to_string(), *c))
                        .collect::<std::collections::BTreeMap<_, _>>(),
                )
            }
            .map_err(Error::from)?;
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&value).map_err(Error::from)?
            )?;
        }
        Format::Text => {
            for (label, c) in rows {
                let prefix = if rows.len() > 1 {
                    format!("{label}: ")
                } else {
                    String::new()
                };
                writeln!(
                    out,
                    "{prefix}mu={} alpha={} sigma={}",
                    c.mu, c.alpha, c.sigma
                )?;
            }
        }
        _ => {
            if let [(_, c)] = rows {
                writeln!(out, "mu,alpha,sigma\n{c}")?;
            } else {
                writeln!(out, "source,mu,alpha,sigma")?;
                for (label, c) in rows {
                    writeln!(out, "{label},{c}")?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_count(args: &CountArgs, out: &mut dyn Write) -> CliResult {
    let format = pick_format(
        args.format,
        Format::Csv,
        &[Format::Csv, Format::Text, Format::Json],
    )?;
    let spec = &args.plan;
    let counts = build(spec)?.counts();
    if !args.compare {
        write_counts(out, format, &[("plan", counts)])?;
        return Ok(Status::Success);
    }
    if spec.transform == Transform::Dct4 {
        return Err(CliError::Usage(
            "--compare has no closed form for dct4".into(),
        ));
    }
    let formula = complexity::counts_for_length(
        &ComplexityRegistry::standard(),
        spec.n,
        spec.scaled,
        spec.fold,
    )?;
    write_counts(
        out,
        format,
        &[
            ("plan", counts),
            ("formula", formula),
            ("difference", counts - formula),
        ],
    )?;
    Ok(Status::Success)
}

fn cmd_formula(args: &FormulaArgs, out: &mut dyn Write) -> CliResult {
    let format = pick_format(
        args.format,
        Format::Csv,
        &[Format::Csv, Format::Text, Format::Json],
    )?;
    let reg = ComplexityRegistry::standard();
    let base = reg.get(args.q)?;
    if args.fold && !args.scaled {
        return Err(CliError::Usage(
            "--fold needs --scaled for closed forms".into(),
        ));
    }
    if args.pfa_scaled {
        let bound = complexity::pfa_scaled_bound(&base, args.m)?;
        match format {
            Format::Json => writeln!(out, "{}", json!({ "fl_mu": bound }))?,
            Format::Text => writeln!(out, "fl_mu={bound}")?,
            _ => writeln!(out, "fl_mu\n{bound}")?,
        }
        return Ok(Status::Success);
    }
    if args.pfa_lower {
        let bound = complexity::pfa_unscaled_lower_bound(&base, args.m)?;
        let recursive = complexity::kok_counts(&base, args.m).mu;
        let matches = complexity::matches_pfa(args.m)?;
        match format {
            Format::Json => writeln!(
                out,
                "{}",
                json!({ "pfa_lower": bound, "recursive_mu": recursive, "matches": matches })
            )?,
            Format::Text => writeln!(
                out,
                "pfa_lower={bound} recursive_mu={recursive} matches={matches}"
            )?,
            _ => writeln!(
                out,
                "pfa_lower,recursive_mu,matches\n{bound},{recursive},{matches}"
            )?,
        }
        return Ok(Status::Success);
    }
    let formula = match (args.scaled, args.fold) {
        (true, true) => complexity::family_scaled_counts(&reg, args.q, args.m)?,
        (true, false) => complexity::scaled_counts(&base, args.m),
        _ => complexity::kok_counts(&base, args.m),
    };
    if !args.compare {
        write_counts(out, format, &[("formula", formula)])?;
        return Ok(Status::Success);
    }
    let n = args
        .q
        .checked_shl(args.m)
        .filter(|n| n >> args.m == args.q)
        .ok_or_else(|| CliError::Usage("q*2^m overflows".into()))?;
    let spec = PlanSpec {
        n,
        transform: Transform::Dct2,
        scaled: args.scaled,
        fold: args.fold,
        bases: Vec::new(),
    };
    let counts = build(&spec)?.counts();
    write_counts(
        out,
        format,
        &[
            ("formula", formula),
            ("plan", counts),
            ("difference", counts - formula),
        ],
    )?;
    Ok(Status::Success)
}

fn cmd_table2(args: &TableArgs, out: &mut dyn Write) -> CliResult {
    let format = pick_format(args.format, Format::Csv, &[Format::Csv, Format::Json])?;
    let rows = complexity::table2();
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&rows).map_err(Error::from)?
        )?,
        _ => out.write_all(complexity::table2_csv(&rows).as_bytes())?,
    }
    Ok(Status::Success)
}

fn cmd_fig5(args: &Fig5Args, out: &mut dyn Write) -> CliResult {
    let format = pick_format(args.format, Format::Csv, &[Format::Csv, Format::Json])?;
    if args.max_m > 24 {
        return Err(CliError::Usage("--max-m is limited to 24".into()));
    }
    let points = complexity::fig5_data(args.max_m);
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&points).map_err(Error::from)?
        )?,
        _ => out.write_all(complexity::fig5_csv(&points).as_bytes())?,
    }
    Ok(Status::Success)
}

/// Outcome of one check at one length.
#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub check: String,
    pub n: usize,
    pub error: f64,
    pub passed: bool,
    pub detail: Option<String>,
}

impl CheckRecord {
    fn measured(check: &str, n: usize, error: f64, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            n,
            error,
            passed: error < tolerance,
            detail: None,
        }
    }

    fn failed(check: &str, n: usize, detail: String) -> Self {
        Self {
            check: check.to_string(),
            n,
            error: f64::INFINITY,
            passed: false,
            detail: Some(detail),
        }
    }
}

/// Identity residuals for every `N <= max_n`, then every supported plan
/// against its oracle. Records come back ordered by check, then length.
pub fn verification_suite(lib: &BaseLibrary, max_n: usize, tolerance: f64) -> Vec<CheckRecord> {
    let mut records = Vec::new();
    for id in Identity::ALL {
        for n in (1..=max_n).filter(|&n| id.applies(n)) {
            records.push(match id.residual(n) {
                Ok(e) => CheckRecord::measured(id.name(), n, e, tolerance),
                Err(e) => CheckRecord::failed(id.name(), n, e.to_string()),
            });
        }
    }
    type PlanCheck = fn(&BaseLibrary, usize) -> Result<(DenseMatrix, DenseMatrix), Error>;
    let plan_checks: [(&str, PlanCheck); 6] = [
        ("kok-plan", |l, n| {
            Ok((l.kok_plan(n)?.to_matrix(), oracle::dct2_matrix(n)?))
        }),
        ("scaled-plan", |l, n| {
            Ok((l.scaled_plan(n)?.reconstruct(), oracle::dct2_matrix(n)?))
        }),
        ("scaled-plan-folded", |l, n| {
            Ok((
                l.scaled_plan(n)?.fold().reconstruct(),
                oracle::dct2_matrix(n)?,
            ))
        }),
        ("dct3-plan", |l, n| {
            Ok((l.dct3_plan(n)?.to_matrix(), oracle::dct3_matrix(n)?))
        }),
        ("dct3-plan-via-scaled", |l, n| {
            Ok((
                l.dct3_plan_via_scaled(n)?.to_matrix(),
                oracle::dct3_matrix(n)?,
            ))
        }),
        ("dct4-plan", |l, n| {
            Ok((l.dct4_plan(n)?.to_matrix(), oracle::dct4_matrix(n)?))
        }),
    ];
    let lengths: Vec<usize> = (1..=max_n).filter(|&n| lib.supports(n)).collect();
    for (name, check) in plan_checks {
        for &n in &lengths {
            records.push(match check(lib, n) {
                Ok((got, want)) => {
                    CheckRecord::measured(name, n, got.max_abs_diff(&want), tolerance)
                }
                Err(e) => CheckRecord::failed(name, n, e.to_string()),
            });
        }
    }
    for &n in &lengths {
        let record = match lib.kok_plan(n) {
            Ok(p) => {
                let same = transpose(&p).count_ops() == p.count_ops();
                let detail = (!same).then(|| "transposition changed the counts".to_string());
                CheckRecord {
                    check: "transpose-counts".into(),
                    n,
                    error: 0.0,
                    passed: same,
                    detail,
                }
            }
            Err(e) => CheckRecord::failed("transpose-counts", n, e.to_string()),
        };
        records.push(record);
    }
    records
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult {
    if args.max_n == 0 {
        return Err(Error::ZeroLength.into());
    }
    let lib = load_library(&args.bases)?;
    let mut records = verification_suite(&lib, args.max_n, args.tolerance);
    for path in &args.plans {
        let name = format!("plan {}", path.display());
        let record = match PlanFile::read(path).and_then(|f| {
            let n = f.n_inputs;
            check_plan_file(&f, &path.display().to_string(), args.tolerance).map(|e| (n, e))
        }) {
            Ok((n, e)) => CheckRecord::measured(&name, n, e, args.tolerance),
            Err(e) => CheckRecord::failed(&name, 0, e.to_string()),
        };
        records.push(record);
    }

    writeln!(out, "check,max_n,cases,max_error,status")?;
    let mut i = 0;
    while i < records.len() {
        let group: Vec<&CheckRecord> = records[i..]
            .iter()
            .take_while(|r| r.check == records[i].check)
            .collect();
        i += group.len();
        let max_n = group.iter().map(|r| r.n).max().unwrap_or(0);
        let max_err = group.iter().map(|r| r.error).fold(0.0, f64::max);
        let ok = group.iter().all(|r| r.passed);
        writeln!(
            out,
            "{},{max_n},{},{max_err:e},{}",
            group[0].check,
            group.len(),
            if ok { "ok" } else { "FAIL" }
        )?;
    }
    let failures: Vec<&CheckRecord> = records.iter().filter(|r| !r.passed).collect();
    for r in &failures {
        let why = r
            .detail
            .clone()
            .unwrap_or_else(|| format!("error {:e}", r.error));
        writeln!(out, "FAIL {} N={}: {why}", r.check, r.n)?;
    }
    Ok(if failures.is_empty() {
        Status::Success
    } else {
        Status::CheckFailed
    })
}
