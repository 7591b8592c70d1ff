//! Command-line interface: configuration ingestion, command dispatch, and
//! serialization of systems, constructions, minima profiles and
//! verification reports.
//!
//! All numeric config values travel as decimal strings and are parsed into
//! exact rationals; outputs are JSON records (exact or outward-rounded
//! decimal strings) and plot-ready CSV for combined graphs. Output files are
//! written to a temporary sibling and atomically renamed, so no partial
//! file survives an error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use parageo::construction::{run as construction_run, ConstructionError, GrowthSequence};
use parageo::exact_linalg::IntVector;
use parageo::interval::{BigFloat, Dir, Interval, PrecisionPolicy};
use parageo::minima::{
    lambda_point, minkowski_sandwich, successive_minima_bruteforce, volume, BodyFamily,
    MinimaError,
};
use parageo::rational::{format_exact, parse_decimal};
use parageo::systems::{MeshSequence, QuasiRegularSystem};
use parageo::verify::{certify, CertStatus, VerifyConfig, VerifyError};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID_SEQUENCE: u8 = 2;
const EXIT_CONSTRUCTION: u8 = 3;
const EXIT_VERIFY_FAIL: u8 = 4;
const EXIT_INDETERMINATE: u8 = 5;
const EXIT_BUDGET: u8 = 6;

#[derive(Parser)]
#[command(
    name = "parageo",
    about = "Exact toolkit for quasi-regular (n,0)-systems and the integer \
             point sequences realizing them",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a quasi-regular system: combined-graph CSV plus summary.
    System(CommonArgs),
    /// Construct the integer point sequence for a growth sequence.
    Construct(CommonArgs),
    /// Certify the uniform bound 2n^2 for the constructed direction.
    Verify(CommonArgs),
    /// Successive minima of C_u(Q), exact or certificate mode.
    Minima(MinimaArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path (atomic write); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Working precision in bits (default 128).
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Construction stage count M.
    #[arg(long)]
    stages: Option<usize>,
    /// Grid samples per breakpoint interval.
    #[arg(long)]
    grid: Option<usize>,
    /// Enumeration budget in candidate points.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct MinimaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Direction as comma-separated decimals (normalized internally);
    /// when omitted the direction comes from the configured construction.
    #[arg(long)]
    u: Option<String>,
    /// Body parameter Q >= 1 (decimal).
    #[arg(long = "Q", default_value = "1")]
    q_value: String,
    /// exact: brute-force enumeration; certificate: product-bound bracket.
    #[arg(long, default_value = "exact")]
    mode: String,
}

#[derive(Debug, Deserialize, Serialize, Clone)]
struct RunConfig {
    n: usize,
    sequence: SequenceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    enumeration_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out: Option<String>,
}

#[derive(Debug, Deserialize, Serialize, Clone)]
#[serde(rename_all = "lowercase")]
enum SequenceSpec {
    Explicit(Vec<String>),
    Regular {
        x1: String,
        rho: String,
        count: usize,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::System(args) => cmd_system(&args),
        Command::Construct(args) => cmd_construct(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Minima(args) => cmd_minima(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::new(EXIT_USAGE, format!("cannot read config: {e}")))?;
    let mut config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::new(EXIT_INVALID_SEQUENCE, format!("invalid config: {e}")))?;
    if config.n < 2 {
        return Err(CliError::new(EXIT_INVALID_SEQUENCE, "n must be at least 2"));
    }
    if let Some(bits) = args.precision_bits {
        config.precision_bits = Some(bits);
    }
    if let Some(stages) = args.stages {
        config.stages = Some(stages);
    }
    if let Some(grid) = args.grid {
        config.grid_samples = Some(grid);
    }
    if let Some(budget) = args.budget {
        config.enumeration_budget = Some(budget);
    }
    Ok(config)
}

impl RunConfig {
    fn policy(&self) -> PrecisionPolicy {
        let start = self.precision_bits.unwrap_or(128);
        let max = std::env::var("PARAGEO_MAX_PRECISION")
            .ok()
            .and_then(|v| v.parse().ok())
            .or(self.max_precision_bits)
            .unwrap_or(4096);
        PrecisionPolicy::new(start, max)
    }

    fn mesh(&self) -> Result<MeshSequence, CliError> {
        let invalid = |e: String| CliError::new(EXIT_INVALID_SEQUENCE, e);
        match &self.sequence {
            SequenceSpec::Explicit(values) => {
                let mut parsed = Vec::with_capacity(values.len());
                for v in values {
                    parsed.push(
                        parse_decimal(v).map_err(|e| invalid(format!("bad mesh value: {e}")))?,
                    );
                }
                MeshSequence::explicit(parsed).map_err(|e| invalid(e.to_string()))
            }
            SequenceSpec::Regular { x1, rho, count } => {
                if *count < self.n {
                    return Err(invalid(format!(
                        "regular spec needs count >= n, got {count} < {}",
                        self.n
                    )));
                }
                let x1 = parse_decimal(x1).map_err(|e| invalid(format!("bad x1: {e}")))?;
                let rho = parse_decimal(rho).map_err(|e| invalid(format!("bad rho: {e}")))?;
                MeshSequence::regular(x1, rho, *count).map_err(|e| invalid(e.to_string()))
            }
        }
    }

    fn budget(&self) -> usize {
        self.enumeration_budget.unwrap_or(1_000_000)
    }

    fn samples(&self) -> usize {
        self.grid_samples.unwrap_or(16)
    }
}

fn out_path(args: &CommonArgs, config: &RunConfig) -> Option<PathBuf> {
    args.out
        .clone()
        .or_else(|| config.out.as_ref().map(PathBuf::from))
}

/// Atomic write: temp sibling plus rename, so errors leave no partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)
        .map_err(|e| CliError::new(EXIT_USAGE, format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        CliError::new(EXIT_USAGE, format!("cannot rename to {}: {e}", path.display()))
    })
}

fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn dec(r: &parageo::num_rational::BigRational) -> String {
    BigFloat::from_ratio(r, 128, Dir::Down).to_decimal(18, Dir::Down)
}

fn interval_pair(iv: &Interval) -> [String; 2] {
    let (lo, hi) = iv.to_decimal_pair(36);
    [lo, hi]
}

fn vector_strings(v: &IntVector) -> Vec<String> {
    v.coords().iter().map(|c| c.to_string()).collect()
}

fn map_construction_err(e: ConstructionError) -> CliError {
    CliError::new(EXIT_CONSTRUCTION, e.to_string())
}

fn map_minima_err(e: MinimaError) -> CliError {
    match e {
        MinimaError::BudgetExceeded { .. } => CliError::new(EXIT_BUDGET, e.to_string()),
        MinimaError::AmbiguousProfile => CliError::new(EXIT_INDETERMINATE, e.to_string()),
        other => CliError::new(EXIT_CONSTRUCTION, other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// system
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SystemSummary {
    schema: u32,
    command: &'static str,
    inputs: RunConfig,
    n: usize,
    mesh_gap: String,
    mesh_at_least_log4: String,
    regular_rho: Option<String>,
    breakpoints: Vec<String>,
    domain: [String; 2],
    segment_rows: usize,
}

fn cmd_system(args: &CommonArgs) -> Result<u8, CliError> {
    let config = load_config(args)?;
    let mesh = config.mesh()?;
    let sys = QuasiRegularSystem::new(mesh.clone(), config.n)
        .map_err(|e| CliError::new(EXIT_INVALID_SEQUENCE, e.to_string()))?;
    let k = sys.breakpoints().len();
    let segments = if k >= 2 {
        sys.combined_graph(1, k - 1)
            .map_err(|e| CliError::new(EXIT_INVALID_SEQUENCE, e.to_string()))?
    } else {
        Vec::new()
    };

    let mut csv = String::from("segment_id,component_index,q_start,y_start,q_end,y_end,slope\n");
    for (id, s) in segments.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            id,
            s.component_index,
            dec(&s.q_start),
            dec(&s.y_start),
            dec(&s.q_end),
            dec(&s.y_end),
            s.slope
        ));
    }

    let gap = mesh.mesh_gap().expect("mesh has at least n >= 2 values");
    let policy = config.policy();
    let log4_flag = policy
        .escalate(|bits| match mesh.has_mesh_at_least_log4(bits) {
            parageo::Cert::True => Ok("true"),
            parageo::Cert::False => Ok("false"),
            parageo::Cert::Unknown => Err(parageo::IntervalError::Indeterminate { bits }),
        })
        .unwrap_or("indeterminate");

    let summary = SystemSummary {
        schema: 1,
        command: "system",
        inputs: config.clone(),
        n: sys.n(),
        mesh_gap: format_exact(&gap),
        mesh_at_least_log4: log4_flag.to_string(),
        regular_rho: mesh.is_regular().map(|r| format_exact(&r)),
        breakpoints: sys.breakpoints().iter().map(format_exact).collect(),
        domain: [format_exact(sys.domain().0), format_exact(sys.domain().1)],
        segment_rows: segments.len(),
    };
    let summary_json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;

    match out_path(args, &config) {
        Some(p) => {
            write_atomic(&p, &csv)?;
            println!("{summary_json}");
        }
        None => {
            print!("{csv}");
            eprintln!("{summary_json}");
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// construct
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ConstructRecord {
    schema: u32,
    command: &'static str,
    inputs: RunConfig,
    n: usize,
    stages: usize,
    points: Vec<Vec<String>>,
    certificates: Vec<CertRecord>,
    heights_sq: Vec<String>,
    tail_radii_upper: Vec<String>,
    direction: DirectionRecord,
}

#[derive(Serialize)]
struct CertRecord {
    point_index: usize,
    det: String,
    dual_pairing: String,
    z: Vec<String>,
    rounded: Vec<String>,
    coeffs: Vec<[String; 2]>,
}

#[derive(Serialize)]
struct DirectionRecord {
    w: Vec<String>,
    norm_sq: String,
    tail_upper: String,
    stage: usize,
}

fn build_construction(
    config: &RunConfig,
) -> Result<parageo::ConstructionResult, CliError> {
    let mut mesh = config.mesh()?;
    let policy = config.policy();
    let m = config.stages.unwrap_or(mesh.len());
    if m > mesh.len() {
        // only geometric meshes know their continuation
        mesh = mesh.extended(m).ok_or_else(|| {
            CliError::new(
                EXIT_CONSTRUCTION,
                format!("explicit mesh has {} values, cannot reach {m} stages", mesh.len()),
            )
        })?;
    }
    let growth = GrowthSequence::from_mesh(&mesh, &policy).map_err(|e| match e {
        ConstructionError::MeshGapTooSmall => CliError::new(
            EXIT_CONSTRUCTION,
            "refusing to construct: the certified bound requires mesh gap at least log 4",
        ),
        other => map_construction_err(other),
    })?;
    construction_run(config.n, &growth, m, &policy).map_err(map_construction_err)
}

fn cmd_construct(args: &CommonArgs) -> Result<u8, CliError> {
    let config = load_config(args)?;
    let result = build_construction(&config)?;
    let proxy = result.direction(None).map_err(map_construction_err)?;
    let record = ConstructRecord {
        schema: 1,
        command: "construct",
        inputs: config.clone(),
        n: result.n(),
        stages: result.stage_count(),
        points: result.points().iter().map(vector_strings).collect(),
        certificates: result
            .stages()
            .iter()
            .map(|s| CertRecord {
                point_index: s.point_index,
                det: s.det.to_string(),
                dual_pairing: s.dual_pairing.to_string(),
                z: vector_strings(&s.rounding.z),
                rounded: s.rounding.rounded.iter().map(|m| m.to_string()).collect(),
                coeffs: s.rounding.coeffs.iter().map(interval_pair).collect(),
            })
            .collect(),
        heights_sq: result.heights_sq().iter().map(|h| h.to_string()).collect(),
        tail_radii_upper: result
            .tails()
            .iter()
            .map(|t| t.hi().to_decimal(36, Dir::Up))
            .collect(),
        direction: DirectionRecord {
            w: vector_strings(&proxy.w),
            norm_sq: proxy.norm_sq.to_string(),
            tail_upper: proxy.tail.hi().to_decimal(36, Dir::Up),
            stage: proxy.stage,
        },
    };
    let json = serde_json::to_string_pretty(&record)
        .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    emit(out_path(args, &config).as_deref(), &json)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(args: &CommonArgs) -> Result<u8, CliError> {
    let config = load_config(args)?;
    let mesh = config.mesh()?;
    let sys = QuasiRegularSystem::new(mesh, config.n)
        .map_err(|e| CliError::new(EXIT_INVALID_SEQUENCE, e.to_string()))?;
    let vconfig = VerifyConfig {
        samples_per_interval: config.samples(),
        tail_rel_target: 1e-6,
        policy: config.policy(),
    };

    let map_err = |e: VerifyError| match e {
        VerifyError::MeshGapTooSmall => CliError::new(
            EXIT_CONSTRUCTION,
            "refusing to construct: the certified bound requires mesh gap at least log 4",
        ),
        VerifyError::System(se) => CliError::new(EXIT_INVALID_SEQUENCE, se.to_string()),
        other => CliError::new(EXIT_CONSTRUCTION, other.to_string()),
    };

    // Stage margin handled by the driver; explicit --stages overrides.
    let (report, _result) = match config.stages {
        None => parageo::verify::certify_system(&sys, &vconfig).map_err(map_err)?,
        Some(m) => {
            let mesh = sys
                .mesh()
                .extended(m)
                .ok_or_else(|| CliError::new(EXIT_CONSTRUCTION, "explicit mesh too short"))?;
            let growth = GrowthSequence::from_mesh(&mesh, &vconfig.policy)
                .map_err(map_construction_err)?;
            let result = construction_run(config.n, &growth, m, &vconfig.policy)
                .map_err(map_construction_err)?;
            let proxy = result.direction(None).map_err(map_construction_err)?;
            let report = certify(&sys, &result, &proxy, &vconfig).map_err(map_err)?;
            (report, result)
        }
    };

    let record = report.to_record();
    let json = serde_json::to_string_pretty(&record)
        .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    emit(out_path(args, &config).as_deref(), &json)?;

    eprintln!(
        "status={:?} n={} bound={} max_deviation_upper={} sampling_error={} grid_points={} stages={}",
        report.status,
        report.n,
        report.bound,
        report.max_deviation_upper.to_decimal(12, Dir::Up),
        dec(&report.sampling_error),
        report.grid.len(),
        report.stages_used,
    );
    Ok(match report.status {
        CertStatus::Pass => 0,
        CertStatus::Fail => EXIT_VERIFY_FAIL,
        CertStatus::Indeterminate => EXIT_INDETERMINATE,
    })
}

// ---------------------------------------------------------------------------
// minima
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MinimaRecord {
    schema: u32,
    command: &'static str,
    n: usize,
    q: String,
    mode: String,
    direction: Vec<String>,
    lambdas: Vec<[String; 2]>,
    lambdas_sq: Option<Vec<String>>,
    witnesses: Option<Vec<Vec<String>>>,
    certificate_factor: Option<[String; 2]>,
    decisive: bool,
}

/// Parses a decimal direction vector into an integer normal by clearing
/// denominators (the body uses the unit vector along it).
fn parse_direction(u: &str) -> Result<IntVector, CliError> {
    let parts: Vec<_> = u.split(',').map(str::trim).collect();
    if parts.len() < 2 {
        return Err(CliError::new(
            EXIT_USAGE,
            "direction needs at least 2 comma-separated decimals",
        ));
    }
    let mut rats = Vec::with_capacity(parts.len());
    for p in parts {
        rats.push(parse_decimal(p).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?);
    }
    let mut denom_lcm = parageo::num_bigint::BigInt::from(1);
    for r in &rats {
        let d = r.denom();
        let g = parageo::num_integer::Integer::gcd(&denom_lcm, d);
        denom_lcm = denom_lcm / g * d;
    }
    let coords: Vec<parageo::num_bigint::BigInt> = rats
        .iter()
        .map(|r| (r * parageo::num_rational::BigRational::from_integer(denom_lcm.clone())).to_integer())
        .collect();
    IntVector::new(coords).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))
}

fn cmd_minima(args: &MinimaArgs) -> Result<u8, CliError> {
    let config = load_config(&args.common)?;
    let q = parse_decimal(&args.q_value)
        .map_err(|e| CliError::new(EXIT_USAGE, format!("bad Q: {e}")))?;
    let bits = config.policy().start_bits;

    let (body, dir_strings) = match &args.u {
        Some(u) => {
            let w = parse_direction(u)?;
            let strings = vector_strings(&w);
            (BodyFamily::rational_unit(w).map_err(map_minima_err)?, strings)
        }
        None => {
            let result = build_construction(&config)?;
            let proxy = result.direction(None).map_err(map_construction_err)?;
            let strings = vector_strings(&proxy.w);
            (BodyFamily::from_proxy(proxy), strings)
        }
    };

    let record = match args.mode.as_str() {
        "exact" => {
            let profile = successive_minima_bruteforce(&body, &q, config.budget(), bits)
                .map_err(map_minima_err)?;
            MinimaRecord {
                schema: 1,
                command: "minima",
                n: body.n(),
                q: format_exact(&q),
                mode: "exact".into(),
                direction: dir_strings,
                lambdas: profile.lambdas.iter().map(interval_pair).collect(),
                lambdas_sq: profile
                    .lambdas_sq
                    .as_ref()
                    .map(|v| v.iter().map(format_exact).collect()),
                witnesses: Some(profile.witnesses.iter().map(vector_strings).collect()),
                certificate_factor: None,
                decisive: profile.decisive,
            }
        }
        "certificate" => {
            // Product-bound bracket over the standard basis (always
            // independent): sorted values plus the n! B / 2^n factor.
            let n = body.n();
            let q_iv = Interval::from_ratio(&q, bits);
            let mut lambdas = Vec::with_capacity(n);
            for i in 1..=n {
                let e_i = IntVector::unit(n, i)
                    .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
                lambdas.push(lambda_point(&e_i, &body, &q_iv, bits).map_err(map_minima_err)?);
            }
            let (vol, _) = volume(n, &q_iv, 1e-9, bits).map_err(map_minima_err)?;
            let (sorted, factor) = minkowski_sandwich(&lambdas, &vol, bits);
            MinimaRecord {
                schema: 1,
                command: "minima",
                n,
                q: format_exact(&q),
                mode: "certificate".into(),
                direction: dir_strings,
                lambdas: sorted.iter().map(interval_pair).collect(),
                lambdas_sq: None,
                witnesses: None,
                certificate_factor: Some(interval_pair(&factor)),
                decisive: true,
            }
        }
        other => {
            return Err(CliError::new(
                EXIT_USAGE,
                format!("unknown mode {other:?}, expected exact or certificate"),
            ))
        }
    };
    let json = serde_json::to_string_pretty(&record)
        .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    emit(out_path(&args.common, &config).as_deref(), &json)?;
    Ok(0)
}
