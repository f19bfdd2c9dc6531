//! Command-line front end. `run` parses arguments, dispatches to a
//! subcommand and returns the process exit code.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::classes::{classify, ClassLabel, DEFAULT_N_MAX};
use crate::error::LabError;
use crate::generators::{self, derive_seed, name_hash, EnsembleConfig, Family, DEFAULT_CONDITION_CAP};
use crate::matrix::{basis_vector, ComplexMatrix};
use crate::matrix_file::MatrixFile;
use crate::suite;
use crate::tolerance::{PinvFault, ToleranceConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "eplab", version, about = "Numerical laboratory for EP-type matrix classes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Dimension list given as ranges and singletons, e.g. `2-6` or `2,3,5-7`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut dims = Vec::new();
        for part in s.split(',').map(str::trim) {
            let bad = || format!("bad dimension list {s:?}");
            match part.split_once('-') {
                Some((a, b)) => {
                    let a: usize = a.trim().parse().map_err(|_| bad())?;
                    let b: usize = b.trim().parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    dims.extend(a..=b);
                }
                None => dims.push(part.parse().map_err(|_| bad())?),
            }
        }
        if dims.contains(&0) {
            return Err("dimensions must be positive".into());
        }
        dims.sort_unstable();
        dims.dedup();
        Ok(Dims(dims))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().rank_tol_factor)]
    pub rank_tol_factor: f64,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().residual_tol)]
    pub residual_tol: f64,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().psd_tol)]
    pub psd_tol: f64,
    /// Largest class index n in profiles and indexed claims.
    #[arg(long, global = true, default_value_t = DEFAULT_N_MAX)]
    pub n_max: u32,
    /// Master seed; the only source of randomness.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Dimensions for suite trials and witness search.
    #[arg(long, global = true, default_value = "2-6")]
    pub dims: Dims,
    /// Trials per claim population, or per family in a witness search.
    #[arg(long, global = true, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Corrupt the pseudoinverse; used to check that the suite can fail.
    #[arg(long, global = true, hide = true)]
    pub inject_pinv_fault: bool,
}

impl GlobalArgs {
    pub fn tolerance(&self) -> ToleranceConfig {
        let tol = ToleranceConfig {
            rank_tol_factor: self.rank_tol_factor,
            residual_tol: self.residual_tol,
            psd_tol: self.psd_tol,
            ..ToleranceConfig::default()
        };
        if self.inject_pinv_fault {
            tol.with_fault(PinvFault::LeadingSignFlip)
        } else {
            tol
        }
    }

    pub fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig {
            master_seed: self.seed,
            dims: self.dims.0.clone(),
            trials_per_family: self.trials,
            n_max: self.n_max,
            ..EnsembleConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the class profile of a matrix file.
    Classify { path: PathBuf },
    /// Run every registered claim over the seeded ensemble.
    Suite,
    /// Search for a matrix in one class and outside another, e.g. NEP2-not-EP.
    Witness { pair: String },
    /// Emit a generated matrix as a matrix file.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    pub family: String,
    /// First vector of rank_one: `e<k>` or a comma list such as `1,0,2-1i`.
    #[arg(long)]
    pub x: Option<String>,
    /// Second vector of rank_one.
    #[arg(long)]
    pub y: Option<String>,
    /// Weight of paper_shift.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Nilpotency index of nilpotent_nep, or the class-index hint of a draw.
    #[arg(long)]
    pub n: Option<u32>,
    /// Comma list of positive weighted_shift weights.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let code = match e {
            LabError::InvalidInput(_) | LabError::ShapeMismatch { .. } | LabError::NotSquare { .. } => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        };
        Self { code, message: e.to_string() }
    }
}

/// What a successful command produced.
#[derive(Debug)]
pub struct Output {
    pub code: u8,
    pub body: String,
    pub note: Option<String>,
}

pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            if let Some(note) = &out.note {
                eprintln!("{note}");
            }
            if out.body.is_empty() {
                return out.code;
            }
            match emit(cli.global.out.as_ref(), &out.body) {
                Ok(()) => out.code,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: Option<&PathBuf>, body: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Output, Failure> {
    let g = &cli.global;
    let tol = g.tolerance();
    tol.validate()?;
    match &cli.command {
        Command::Classify { path } => classify_cmd(path, g, &tol),
        Command::Suite => suite_cmd(g, &tol),
        Command::Witness { pair } => witness_cmd(pair, g, &tol),
        Command::Gen(args) => gen_cmd(args, g),
    }
}

fn canonical_json<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("reports always serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values always serialize");
    s.push('\n');
    s
}

fn matrix_body(m: &ComplexMatrix) -> String {
    let mut s = MatrixFile::to_json(m);
    s.push('\n');
    s
}

pub fn classify_cmd(path: &PathBuf, g: &GlobalArgs, tol: &ToleranceConfig) -> Result<Output, Failure> {
    let t = MatrixFile::read(path)?;
    let profile = classify(&t, g.n_max, tol)?;
    let body = match g.format {
        Format::Text => profile.to_text(),
        Format::Json => canonical_json(&profile),
    };
    Ok(Output { code: EXIT_OK, body, note: None })
}

pub fn suite_cmd(g: &GlobalArgs, tol: &ToleranceConfig) -> Result<Output, Failure> {
    let report = suite::run_suite(&g.ensemble(), tol)?;
    let body = match g.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    let code = if report.all_pass() { EXIT_OK } else { EXIT_FAIL };
    Ok(Output { code, body, note: None })
}

/// A registered class separation `member-not-excluded` and the families a
/// directed search draws from.
#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub member: ClassLabel,
    pub excluded: ClassLabel,
    pub families: Vec<Family>,
}

impl Separation {
    pub fn parse(pair: &str) -> Result<Self, Failure> {
        let lower = pair.to_ascii_lowercase();
        let at = lower
            .find("-not-")
            .ok_or_else(|| Failure::usage(format!("expected <class>-not-<class>, got {pair:?}")))?;
        let member: ClassLabel = pair[..at].parse()?;
        let excluded: ClassLabel = pair[at + 5..].parse()?;
        if member == excluded {
            return Err(Failure::usage(format!("{pair:?} is contradictory: no operator is in {member} and outside it")));
        }
        let families = search_families(member, excluded)
            .ok_or_else(|| Failure::usage(format!("{member}-not-{excluded} is not a registered separation")))?;
        Ok(Self { member, excluded, families })
    }

    /// Class index the search asks the generators for.
    fn n_hint(&self) -> u32 {
        match self.member {
            ClassLabel::NEp(n) | ClassLabel::NHypoEp(n) | ClassLabel::NNormal(n) => n,
            _ => 1,
        }
    }

    fn depth(&self) -> u32 {
        let idx = |l: ClassLabel| match l {
            ClassLabel::NEp(n) | ClassLabel::NHypoEp(n) | ClassLabel::NNormal(n) => n,
            _ => 1,
        };
        idx(self.member).max(idx(self.excluded))
    }
}

fn search_families(member: ClassLabel, excluded: ClassLabel) -> Option<Vec<Family>> {
    use ClassLabel::*;
    use Family as F;
    let ep_like = [F::NonNormalEp, F::Paper2x2, F::EpInvolution];
    let v = match (member, excluded) {
        (NEp(n), NEp(m)) if n > m => vec![F::NilpotentNep, F::WeightedShift, F::PaperShift, F::RankOne],
        (NEp(n), Ep | HypoEp) if n >= 2 => vec![F::NilpotentNep, F::RankOne, F::PaperShift, F::WeightedShift],
        (NEp(_), Normal | QuasiNormal | Sd | Hyponormal) => [&ep_like[..], &[F::NilpotentNep]].concat(),
        (NHypoEp(n), NHypoEp(m)) if n > m => vec![F::NilpotentNep, F::NHepNonNep, F::WeightedShift],
        (NHypoEp(_), NEp(_) | Ep | HypoEp) => vec![F::NHepNonNep, F::NilpotentNep, F::RankOne, F::General],
        (HypoEp, Ep) => vec![F::General, F::RankOne, F::PartialIsometry, F::NHepNonNep],
        (Ep, Normal | QuasiNormal | Sd | Hyponormal | PartialIsometry) => ep_like.to_vec(),
        (Sd, Normal | QuasiNormal | Ep | HypoEp | Hyponormal) => vec![F::RankOne, F::PartialIsometry, F::NilpotentNep],
        (PartialIsometry, Ep | Normal | NEp(1)) => vec![F::PartialIsometry, F::NilpotentNep],
        (NNormal(n), Normal | QuasiNormal) if n >= 2 => vec![F::NilpotentNep, F::WeightedShift],
        _ => return None,
    };
    Some(v)
}

/// Draws from the separation's families over `--dims` until `classify`
/// confirms a witness or the budget of `--trials` per family runs out.
pub fn find_witness(
    sep: &Separation,
    g: &GlobalArgs,
    tol: &ToleranceConfig,
) -> Result<Option<(ComplexMatrix, String)>, Failure> {
    let depth = g.n_max.max(sep.depth());
    let key = name_hash(&format!("{}-not-{}", sep.member, sep.excluded));
    for (fi, family) in sep.families.iter().enumerate() {
        let dims: Vec<usize> = g.dims.0.iter().copied().filter(|&d| family.accepts(d)).collect();
        if dims.is_empty() {
            continue;
        }
        for k in 0..g.trials {
            let dim = dims[k % dims.len()];
            let seed = derive_seed(g.seed, &[key, fi as u64, k as u64]);
            let t = family.draw(dim, sep.n_hint(), seed, DEFAULT_CONDITION_CAP)?;
            let profile = classify(&t, depth, tol)?;
            if profile.holds(sep.member) && !profile.holds(sep.excluded) {
                let note = format!("{}-not-{}: {} draw, dim {dim}, seed {seed}", sep.member, sep.excluded, family.name());
                return Ok(Some((t, note)));
            }
        }
    }
    Ok(None)
}

pub fn witness_cmd(pair: &str, g: &GlobalArgs, tol: &ToleranceConfig) -> Result<Output, Failure> {
    let sep = Separation::parse(pair)?;
    match find_witness(&sep, g, tol)? {
        Some((t, note)) => Ok(Output { code: EXIT_OK, body: matrix_body(&t), note: Some(note) }),
        None => Ok(Output {
            code: EXIT_FAIL,
            body: String::new(),
            note: Some(format!(
                "no witness for {}-not-{} in {} trials per family over dims {}",
                sep.member, sep.excluded, g.trials, g.dims
            )),
        }),
    }
}

/// `e<k>` (1-based) or a comma list of complex numbers such as `1,2-1i,0`.
#[derive(Debug, Clone, PartialEq)]
enum VectorSpec {
    Basis(usize),
    Entries(Vec<Complex64>),
}

impl VectorSpec {
    fn parse(s: &str) -> Result<Self, Failure> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix('e').and_then(|k| k.parse::<usize>().ok()) {
            if k == 0 {
                return Err(Failure::usage("basis vectors are numbered from e1"));
            }
            return Ok(VectorSpec::Basis(k));
        }
        let entries = s
            .split(',')
            .map(|z| {
                let z = z.trim().replace(' ', "");
                Complex64::from_str(&z).map_err(|_| Failure::usage(format!("bad complex number {z:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorSpec::Entries(entries))
    }

    fn min_dim(&self) -> usize {
        match self {
            VectorSpec::Basis(k) => *k,
            VectorSpec::Entries(v) => v.len(),
        }
    }

    fn build(&self, dim: usize) -> Result<Vec<Complex64>, Failure> {
        match self {
            VectorSpec::Basis(k) if *k <= dim => Ok(basis_vector(dim, *k)),
            VectorSpec::Basis(k) => Err(Failure::usage(format!("e{k} does not exist in dimension {dim}"))),
            VectorSpec::Entries(v) if v.len() == dim => Ok(v.clone()),
            VectorSpec::Entries(v) => Err(Failure::usage(format!("vector of length {} in dimension {dim}", v.len()))),
        }
    }
}

fn parse_weights(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|w| w.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad weight {w:?}"))))
        .collect()
}

pub fn gen_cmd(args: &GenArgs, g: &GlobalArgs) -> Result<Output, Failure> {
    let family = Family::from_name(&args.family)?;
    let given: Vec<&str> = [
        ("--x", args.x.is_some()),
        ("--y", args.y.is_some()),
        ("--alpha", args.alpha.is_some()),
        ("--n", args.n.is_some()),
        ("--weights", args.weights.is_some()),
        ("--dim", args.dim.is_some()),
        ("--rank", args.rank.is_some()),
    ]
    .into_iter()
    .filter(|(_, set)| *set)
    .map(|(name, _)| name)
    .collect();
    let allowed: &[&str] = match family {
        Family::Paper2x2 => &["--dim"],
        Family::PaperShift => &["--alpha", "--dim"],
        Family::RankOne => &["--x", "--y", "--dim"],
        Family::WeightedShift => &["--weights", "--dim"],
        Family::Projection | Family::PartialIsometry | Family::General => &["--dim", "--rank"],
        _ => &["--dim", "--n"],
    };
    if let Some(bad) = given.iter().find(|p| !allowed.contains(p)) {
        return Err(Failure::usage(format!("{bad} does not apply to family {}", family.name())));
    }
    let seed = g.seed;
    let dim = args.dim.unwrap_or(4);
    let t = match family {
        Family::Paper2x2 => {
            if args.dim.is_some_and(|d| d != 2) {
                return Err(Failure::usage("paper_2x2 is 2x2"));
            }
            generators::paper_2x2()
        }
        Family::PaperShift => generators::paper_shift_example(args.alpha.unwrap_or(2.0), args.dim.unwrap_or(9))?,
        Family::RankOne if args.x.is_some() || args.y.is_some() => {
            let (Some(x), Some(y)) = (&args.x, &args.y) else {
                return Err(Failure::usage("rank_one needs both --x and --y"));
            };
            let (x, y) = (VectorSpec::parse(x)?, VectorSpec::parse(y)?);
            let dim = args.dim.unwrap_or_else(|| x.min_dim().max(y.min_dim()));
            generators::rank_one(&x.build(dim)?, &y.build(dim)?)?
        }
        Family::WeightedShift if args.weights.is_some() => {
            let w = parse_weights(args.weights.as_deref().unwrap_or_default())?;
            let n = args.dim.unwrap_or(w.len() + 1);
            generators::weighted_shift_trunc(&w, n)?
        }
        Family::Projection if args.rank.is_some() => {
            generators::random_projection(dim, args.rank.unwrap_or_default(), seed)?
        }
        Family::PartialIsometry if args.rank.is_some() => {
            generators::random_partial_isometry(dim, args.rank.unwrap_or_default(), seed)?
        }
        Family::General if args.rank.is_some() => {
            generators::random_general(dim, args.rank.unwrap_or_default(), seed, DEFAULT_CONDITION_CAP)?
        }
        Family::NilpotentNep => generators::nilpotent_nep(dim, args.n.unwrap_or(2) as usize, seed)?,
        f => f.draw(dim, args.n.unwrap_or(1), seed, DEFAULT_CONDITION_CAP)?,
    };
    Ok(Output { code: EXIT_OK, body: matrix_body(&t), note: None })
}
