//! Command-line driver.
//!
//! ```text
//! rlra gen    --m 100 --n 100 --type II --seed 1 --out a.bin
//! rlra svd    --in a.bin --method rand --k 10 --p 5 --q 2 --seed 2 --out-prefix f
//! rlra verify --in a.bin --factors f
//! rlra bench  --in a.bin --ks 5,10,20,40
//! ```
//!
//! Factorization commands write each factor as a binary matrix named
//! `<prefix>_<NAME>.bin` next to a `<prefix>.json` manifest; `verify` and
//! `bench` print CSV with a fixed header.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dense::{DenseMatrix, Permutation, RngState};
use crate::error::Error;
use crate::interp::{
    cur, cur_blockrand, cur_rand, id_blockrand, id_column, id_rand, CurFactors, IdFactors, Side,
};
use crate::io::report::{verify, Density, ErrorReport, Factorization, VerifyContext};
use crate::io::{gen_test_matrix, load_binary, read_spectrum, save_binary, write_spectrum, SpectrumSpec};
use crate::qb::{qb_blocked, qb_hierarchical, qb_parallel, qb_single, QbFactors};
use crate::rsvd::{rsvd_v1, rsvd_v2, svd_from_qb, svd_truncated, SvdFactors};
use crate::sketch::{SketchParams, SvdMethod};
use crate::truncation::Truncation;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "RLRA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "rlra", version, about = "Randomized low-rank matrix factorizations")]
pub struct Cli {
    /// Worker threads for the dense kernels (overridden by RLRA_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate A = U diag(sigma) V' with a prescribed spectrum.
    Gen(GenArgs),
    /// Low-rank SVD.
    Svd(FactorArgs),
    /// Column interpolative decomposition.
    Id(FactorArgs),
    /// CUR decomposition.
    Cur(FactorArgs),
    /// QB decomposition.
    Qb(FactorArgs),
    /// Compare stored factors against the matrix; prints one CSV row.
    Verify(VerifyArgs),
    /// Sweep the rank and print error and storage per rank as CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// I, II, III, or a comma-separated list of base-10 exponents.
    #[arg(long = "type", default_value = "II")]
    pub spectrum: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Spectrum sidecar path (default: `<out>.sigma`).
    #[arg(long)]
    pub sigma_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dense deterministic factorization.
    Det,
    /// Randomized sampling, fixed rank.
    Rand,
    /// Blocked adaptive QB followed by the small factorization.
    Blockrand,
    /// Approximate parallel QB.
    Parallel,
    /// Row-partitioned QB.
    Hier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Vnum {
    /// QR of B' then an SVD of the small triangular factor.
    Qr,
    /// Eigendecomposition of B B'.
    Bbt,
}

impl From<Vnum> for SvdMethod {
    fn from(v: Vnum) -> Self {
        match v {
            Vnum::Qr => SvdMethod::Qr,
            Vnum::Bbt => SvdMethod::Bbt,
        }
    }
}

#[derive(Args, Debug, Clone)]
#[group(id = "mode", required = true, multiple = false, args = ["k", "tol", "rel_tol"])]
pub struct ModeArgs {
    /// Target rank.
    #[arg(long)]
    pub k: Option<usize>,
    /// Absolute Frobenius tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Tolerance relative to the Frobenius norm of the input.
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SketchArgs {
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, default_value_t = 10)]
    pub block: usize,
    #[arg(long, default_value_t = 10)]
    pub max_blocks: usize,
    /// Number of row slabs for `--method hier` (a power of two).
    #[arg(long, default_value_t = 2)]
    pub row_blocks: usize,
    #[arg(long, value_enum, default_value_t = Vnum::Qr)]
    pub vnum: Vnum,
    #[arg(long, value_enum, default_value_t = Method::Rand)]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct FactorArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_prefix: PathBuf,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub sketch: SketchArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Prefix given to the factorization command.
    #[arg(long)]
    pub factors: PathBuf,
    /// Spectrum sidecar (default: `<in>.sigma` when present).
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// `dense` or the nonzero fraction of A assumed for copied factors.
    #[arg(long, default_value = "dense")]
    pub density: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Svd,
    Id,
    Cur,
    Qb,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Input matrix; omit to generate one from `--m/--n/--type`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "type", default_value = "III")]
    pub spectrum: String,
    #[arg(long, default_value_t = 0)]
    pub gen_seed: u64,
    /// Spectrum sidecar for a supplied input (default: `<in>.sigma` when present).
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Comma-separated ranks.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Kind::Svd)]
    pub kind: Kind,
    #[arg(long, default_value = "dense")]
    pub density: String,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub sketch: SketchArgs,
}

/// Manifest written next to the factor files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub kind: String,
    pub method: Method,
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub params: String,
    /// Power iterations, when the method used the power scheme.
    pub q: Option<usize>,
    /// Factor name to file name, relative to the manifest.
    pub files: BTreeMap<String, String>,
    pub row_perm: Option<Vec<usize>>,
    pub col_perm: Option<Vec<usize>>,
    pub residual: Option<f64>,
    pub tolerance_reached: bool,
    pub wall_seconds: f64,
}

/// A computed factorization of any supported kind.
pub enum Computed {
    Svd(SvdFactors),
    Id(IdFactors),
    Cur(CurFactors),
    Qb(QbFactors),
}

impl Computed {
    pub fn as_dyn(&self) -> &dyn Factorization {
        match self {
            Computed::Svd(f) => f,
            Computed::Id(f) => f,
            Computed::Cur(f) => f,
            Computed::Qb(f) => f,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Run(Error::invalid(format!("csv: {e}")))
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Entry point of the binary; returns the process exit status.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` (including the program name) and executes the command.
/// Exit status: 0 on success, 2 on usage errors, 1 on runtime failures.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    configure_threads(cli.threads);
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn configure_threads(flag: Option<usize>) {
    let env = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(n) = env.or(flag).filter(|&n| n > 0) {
        // A pool can only be installed once per process; later calls keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Outcome<()> {
    match command {
        Command::Gen(g) => gen(g),
        Command::Svd(f) => factor_command(Kind::Svd, f),
        Command::Id(f) => factor_command(Kind::Id, f),
        Command::Cur(f) => factor_command(Kind::Cur, f),
        Command::Qb(f) => factor_command(Kind::Qb, f),
        Command::Verify(v) => verify_command(v, out),
        Command::Bench(b) => bench(b, out),
    }
}

fn sidecar_path(matrix: &Path) -> PathBuf {
    let mut s = matrix.as_os_str().to_owned();
    s.push(".sigma");
    PathBuf::from(s)
}

fn gen(g: GenArgs) -> Outcome<()> {
    let spec: SpectrumSpec = g.spectrum.parse().map_err(|e: Error| usage(e.to_string()))?;
    if g.m == 0 || g.n == 0 {
        return Err(usage("--m and --n must be positive"));
    }
    let (a, sigma) = gen_test_matrix(g.m, g.n, &spec, &mut RngState::new(g.seed))?;
    save_binary(&g.out, &a)?;
    write_spectrum(g.sigma_out.unwrap_or_else(|| sidecar_path(&g.out)), &sigma)?;
    Ok(())
}

fn parse_density(s: &str) -> Outcome<Density> {
    if s.eq_ignore_ascii_case("dense") {
        return Ok(Density::Dense);
    }
    let t = s.strip_prefix("sparse:").unwrap_or(s);
    match t.parse::<f64>() {
        Ok(f) if (0.0..=1.0).contains(&f) => Ok(Density::Sparse(f)),
        _ => Err(usage(format!(
            "--density must be 'dense' or a fraction in [0, 1], got '{s}'"
        ))),
    }
}

fn params_string(mode: Truncation, s: &SketchArgs) -> String {
    let m = match mode {
        Truncation::Rank(k) => format!("k={k}"),
        Truncation::Tolerance(t) => format!("tol={t:e}"),
    };
    let v = match s.vnum {
        Vnum::Qr => "qr",
        Vnum::Bbt => "bbt",
    };
    format!(
        "{m};p={};q={};s={};block={};max_blocks={};vnum={v};seed={}",
        s.p, s.q, s.s, s.block, s.max_blocks, s.seed
    )
}

fn resolve_mode(mode: &ModeArgs, a: &DenseMatrix) -> Outcome<Truncation> {
    let t = match (mode.k, mode.tol, mode.rel_tol) {
        (Some(k), None, None) => Truncation::from_pair(k, 0.0),
        (None, Some(t), None) => Truncation::from_pair(0, t),
        (None, None, Some(r)) => Truncation::from_pair(0, r * a.frobenius_norm()),
        _ => return Err(usage("exactly one of --k, --tol, --rel-tol is required")),
    };
    t.map_err(|e| usage(e.to_string()))
}

fn fixed_rank(mode: Truncation, what: &str) -> Outcome<usize> {
    match mode {
        Truncation::Rank(k) => Ok(k),
        Truncation::Tolerance(_) => Err(usage(format!(
            "{what} supports a fixed rank only; pass --k instead of a tolerance"
        ))),
    }
}

/// Blocks needed to reach `k + p` columns.
fn blocks_for(k: usize, s: &SketchArgs, a: &DenseMatrix) -> usize {
    (k + s.p).min(a.min_dim()).div_ceil(s.block.max(1)).max(1)
}

fn sketch_params(mode: Truncation, s: &SketchArgs) -> SketchParams {
    let (k, tol) = match mode {
        Truncation::Rank(k) => (k, 0.0),
        Truncation::Tolerance(t) => (0, t),
    };
    SketchParams {
        k,
        p: s.p,
        q: s.q,
        s: s.s,
        tol,
        block: s.block,
        max_blocks: s.max_blocks,
        method: s.vnum.into(),
        seed: s.seed,
    }
}

/// Fixed-rank QB from the parallel or hierarchical scheme.
fn structured_qb(method: Method, k: usize, s: &SketchArgs, a: &DenseMatrix, rng: &mut RngState) -> Outcome<QbFactors> {
    let blocks = blocks_for(k, s, a);
    Ok(match method {
        Method::Parallel => qb_parallel(a, s.block, blocks, s.q, rng)?,
        Method::Hier => qb_hierarchical(a, s.row_blocks, s.block, blocks, s.q, rng)?,
        _ => unreachable!(),
    })
}

/// Runs one factorization. Returns the factors and whether the method used
/// the power scheme.
pub fn factorize(
    kind: Kind,
    mode: Truncation,
    s: &SketchArgs,
    a: &DenseMatrix,
) -> std::result::Result<(Computed, bool), String> {
    compute(kind, mode, s, a).map_err(|f| match f {
        Failure::Usage(m) => m,
        Failure::Run(e) => e.to_string(),
    })
}

fn compute(kind: Kind, mode: Truncation, s: &SketchArgs, a: &DenseMatrix) -> Outcome<(Computed, bool)> {
    let mut rng = RngState::new(s.seed);
    let rng = &mut rng;
    let vnum: SvdMethod = s.vnum.into();
    let powered = s.method != Method::Det;
    let out = match (kind, s.method) {
        (Kind::Svd, Method::Det) => Computed::Svd(svd_truncated(a, mode)?),
        (Kind::Svd, Method::Rand) => {
            let k = fixed_rank(mode, "svd --method rand")?;
            Computed::Svd(match vnum {
                SvdMethod::Qr => rsvd_v2(a, k, s.p, s.q, s.s, rng)?,
                SvdMethod::Bbt => rsvd_v1(a, k, s.p, s.q, s.s, rng)?,
            })
        }
        (Kind::Svd, Method::Blockrand) => {
            let qb = crate::interp::blockrand_qb(a, &sketch_params(mode, s), rng)?;
            let k = match mode {
                Truncation::Rank(k) => Some(k.min(qb.rank)),
                Truncation::Tolerance(_) => None,
            };
            Computed::Svd(svd_from_qb(&qb, k, vnum)?)
        }
        (Kind::Svd, m @ (Method::Parallel | Method::Hier)) => {
            let k = fixed_rank(mode, "svd --method parallel/hier")?;
            let qb = structured_qb(m, k, s, a, rng)?;
            Computed::Svd(svd_from_qb(&qb, Some(k.min(qb.rank)), vnum)?)
        }
        (Kind::Id, Method::Det) => Computed::Id(id_column(a, mode)?),
        (Kind::Id, Method::Rand) => {
            let k = fixed_rank(mode, "id --method rand")?;
            Computed::Id(id_rand(a, k, s.p, s.q, s.s, rng)?)
        }
        (Kind::Id, Method::Blockrand) => Computed::Id(id_blockrand(a, &sketch_params(mode, s), rng)?),
        (Kind::Cur, Method::Det) => Computed::Cur(cur(a, mode)?),
        (Kind::Cur, Method::Rand) => {
            let k = fixed_rank(mode, "cur --method rand")?;
            Computed::Cur(cur_rand(a, k, s.p, s.q, s.s, rng)?)
        }
        (Kind::Cur, Method::Blockrand) => Computed::Cur(cur_blockrand(a, &sketch_params(mode, s), rng)?),
        (Kind::Qb, Method::Rand) => match mode {
            Truncation::Tolerance(t) => Computed::Qb(qb_single(a, t, a.min_dim(), rng)?),
            Truncation::Rank(_) => {
                return Err(usage("qb --method rand is the single-vector scheme; pass --tol"))
            }
        },
        (Kind::Qb, Method::Blockrand) => Computed::Qb(match mode {
            Truncation::Rank(k) => qb_blocked(a, s.block, blocks_for(k, s, a), 0.0, s.q, 1, rng)?,
            Truncation::Tolerance(t) => qb_blocked(a, s.block, s.max_blocks, t, s.q, 1, rng)?,
        }),
        (Kind::Qb, m @ (Method::Parallel | Method::Hier)) => {
            let k = fixed_rank(mode, "qb --method parallel/hier")?;
            Computed::Qb(structured_qb(m, k, s, a, rng)?)
        }
        (kind, method) => {
            return Err(usage(format!(
                "method {:?} is not available for {:?}",
                method, kind
            )))
        }
    };
    Ok((out, powered))
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Svd => "svd",
        Kind::Id => "id",
        Kind::Cur => "cur",
        Kind::Qb => "qb",
    }
}

fn file_name(prefix: &Path, part: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(format!("_{part}.bin"));
    PathBuf::from(s)
}

fn manifest_path(prefix: &Path) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_factors(prefix: &Path, parts: &[(&str, &DenseMatrix)]) -> Outcome<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    for (name, m) in parts {
        let path = file_name(prefix, name);
        save_binary(&path, m)?;
        let base = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name.to_string(), base);
    }
    Ok(files)
}

fn factor_command(kind: Kind, f: FactorArgs) -> Outcome<()> {
    let a = load_binary(&f.input)?;
    let mode = resolve_mode(&f.mode, &a)?;
    let start = Instant::now();
    let (computed, powered) = compute(kind, mode, &f.sketch, &a)?;
    let wall_seconds = start.elapsed().as_secs_f64();

    let sigma_col;
    let (files, row_perm, col_perm, residual, reached) = match &computed {
        Computed::Svd(s) => {
            sigma_col = DenseMatrix::from_col_major(s.rank, 1, s.sigma.clone())?;
            let files = write_factors(&f.out_prefix, &[("U", &s.u), ("S", &sigma_col), ("V", &s.v)])?;
            (files, None, None, None, true)
        }
        Computed::Id(i) => {
            let files = write_factors(&f.out_prefix, &[("V", &i.coeffs)])?;
            (files, None, Some(i.perm.as_slice().to_vec()), i.residual, i.tolerance_reached)
        }
        Computed::Cur(c) => {
            let files = write_factors(&f.out_prefix, &[("C", &c.c), ("U", &c.u), ("R", &c.r)])?;
            (
                files,
                Some(c.row_perm.as_slice().to_vec()),
                Some(c.col_perm.as_slice().to_vec()),
                Some(c.residual),
                c.tolerance_reached,
            )
        }
        Computed::Qb(q) => {
            let files = write_factors(&f.out_prefix, &[("Q", &q.q), ("B", &q.b)])?;
            (files, None, None, Some(q.residual), q.tolerance_reached)
        }
    };
    let manifest = Manifest {
        kind: kind_name(kind).to_string(),
        method: f.sketch.method,
        m: a.rows(),
        n: a.cols(),
        rank: computed.as_dyn().rank(),
        params: params_string(mode, &f.sketch),
        q: powered.then_some(f.sketch.q),
        files,
        row_perm,
        col_perm,
        residual,
        tolerance_reached: reached,
        wall_seconds,
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Failure::Run(Error::invalid(format!("manifest: {e}"))))?;
    fs::write(manifest_path(&f.out_prefix), json)?;
    Ok(())
}

fn load_manifest(prefix: &Path) -> Outcome<(Manifest, Computed)> {
    let path = manifest_path(prefix);
    let text = fs::read_to_string(&path)?;
    let man: Manifest = serde_json::from_str(&text).map_err(|e| {
        Failure::Run(Error::Format {
            path: path.clone(),
            offset: 0,
            msg: format!("invalid manifest: {e}"),
        })
    })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let part = |name: &str| -> Outcome<DenseMatrix> {
        let file = man
            .files
            .get(name)
            .ok_or_else(|| Failure::Run(Error::invalid(format!("manifest lacks factor {name}"))))?;
        Ok(load_binary(dir.join(file))?)
    };
    let perm = |p: &Option<Vec<usize>>| -> Outcome<Permutation> {
        let p = p
            .clone()
            .ok_or_else(|| Failure::Run(Error::invalid("manifest lacks a permutation")))?;
        Ok(Permutation::new(p)?)
    };
    let computed = match man.kind.as_str() {
        "svd" => {
            let u = part("U")?;
            let v = part("V")?;
            let sigma = part("S")?.into_vec();
            Computed::Svd(SvdFactors { rank: sigma.len(), u, sigma, v })
        }
        "id" => Computed::Id(IdFactors {
            perm: perm(&man.col_perm)?,
            coeffs: part("V")?,
            rank: man.rank,
            side: Side::Column,
            residual: man.residual,
            clamped: false,
            tolerance_reached: man.tolerance_reached,
        }),
        "cur" => Computed::Cur(CurFactors {
            c: part("C")?,
            u: part("U")?,
            r: part("R")?,
            row_perm: perm(&man.row_perm)?,
            col_perm: perm(&man.col_perm)?,
            rank: man.rank,
            residual: man.residual.unwrap_or(f64::NAN),
            tolerance_reached: man.tolerance_reached,
        }),
        "qb" => Computed::Qb(QbFactors {
            q: part("Q")?,
            b: part("B")?,
            rank: man.rank,
            residual: man.residual.unwrap_or(f64::NAN),
            history: Vec::new(),
            tolerance_reached: man.tolerance_reached,
        }),
        other => return Err(Failure::Run(Error::invalid(format!("unknown factor kind '{other}'")))),
    };
    Ok((man, computed))
}

fn spectrum_for(input: &Path, explicit: &Option<PathBuf>) -> Outcome<Option<Vec<f64>>> {
    match explicit {
        Some(p) => Ok(Some(read_spectrum(p)?)),
        None => {
            let p = sidecar_path(input);
            Ok(if p.exists() { Some(read_spectrum(p)?) } else { None })
        }
    }
}

fn write_csv(out: &mut dyn Write, rows: &[ErrorReport]) -> Outcome<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn method_label(kind: Kind, method: Method) -> String {
    let m = match method {
        Method::Det => "det",
        Method::Rand => "rand",
        Method::Blockrand => "blockrand",
        Method::Parallel => "parallel",
        Method::Hier => "hier",
    };
    format!("{}_{m}", kind_name(kind))
}

fn verify_command(v: VerifyArgs, out: &mut dyn Write) -> Outcome<()> {
    let a = load_binary(&v.input)?;
    let density = parse_density(&v.density)?;
    let (man, computed) = load_manifest(&v.factors)?;
    if (man.m, man.n) != a.shape() {
        return Err(Failure::Run(Error::DimensionMismatch {
            op: "verify",
            left: a.shape(),
            right: (man.m, man.n),
        }));
    }
    let sigma = spectrum_for(&v.input, &v.spectrum)?;
    let kind = match man.kind.as_str() {
        "svd" => Kind::Svd,
        "id" => Kind::Id,
        "cur" => Kind::Cur,
        _ => Kind::Qb,
    };
    let ctx = VerifyContext {
        method: method_label(kind, man.method),
        params: man.params.clone(),
        sigma: sigma.as_deref(),
        q: man.q,
        density,
        wall_seconds: man.wall_seconds,
    };
    let report = verify(&a, computed.as_dyn(), &ctx)?;
    write_csv(out, &[report])
}

fn bench(b: BenchArgs, out: &mut dyn Write) -> Outcome<()> {
    let density = parse_density(&b.density)?;
    let (a, sigma) = match (&b.input, b.m, b.n) {
        (Some(path), None, None) => {
            let a = load_binary(path)?;
            let s = spectrum_for(path, &b.sigma)?;
            (a, s)
        }
        (None, Some(m), Some(n)) => {
            let spec: SpectrumSpec = b.spectrum.parse().map_err(|e: Error| usage(e.to_string()))?;
            let (a, s) = gen_test_matrix(m, n, &spec, &mut RngState::new(b.gen_seed))?;
            (a, Some(s))
        }
        _ => return Err(usage("bench needs either --in or both --m and --n")),
    };
    let mut rows = Vec::with_capacity(b.ks.len());
    for &k in &b.ks {
        let mode = Truncation::from_pair(k, 0.0).map_err(|e| usage(e.to_string()))?;
        let start = Instant::now();
        let (computed, powered) = compute(b.kind, mode, &b.sketch, &a)?;
        let wall_seconds = start.elapsed().as_secs_f64();
        let ctx = VerifyContext {
            method: method_label(b.kind, b.sketch.method),
            params: params_string(mode, &b.sketch),
            sigma: sigma.as_deref(),
            q: powered.then_some(b.sketch.q),
            density,
            wall_seconds,
        };
        rows.push(verify(&a, computed.as_dyn(), &ctx)?);
    }
    match &b.out {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            write_csv(&mut f, &rows)
        }
        None => write_csv(out, &rows),
    }
}
