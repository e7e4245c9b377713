use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Effective dimension along covering families: codecs, gales, compression
/// estimates, faithfulness and the chasing construction.
///
/// Exit status: 0 success, 1 soft property failure, 2 usage, 3 codec,
/// 4 insufficient data.
#[derive(Parser, Debug)]
#[command(name = "phidim", version)]
pub struct Cli {
    /// Write data files, report.txt and manifest.json here.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Re-express a digit file in another representation.
    Convert(ConvertArgs),
    /// Compression-based dimension profiles of a bit file.
    Estimate(EstimateArgs),
    /// Log-limit terms and a verdict for a Cantor scale sequence.
    Faithfulness(FaithfulnessArgs),
    /// Supergale tables.
    #[command(subcommand)]
    Gale(GaleCommand),
    /// Check the covering-family axioms to a finite depth.
    VerifyFamily(VerifyFamilyArgs),
    /// Build a sequence whose complexity chases the input's, stage by stage.
    Chase(ChaseArgs),
    /// Write a dilution witness for a scale sequence.
    Dilute(DiluteArgs),
    /// Write a seeded or constant bit file.
    Sample(SampleArgs),
    /// Point complexity of a rational at precision r.
    Kr(KrArgs),
    /// Repeat the run recorded in a manifest and compare output digests.
    Rerun(RerunArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct ConvertArgs {
    /// Digit file; `-` reads standard input.
    #[arg(long)]
    pub input: PathBuf,
    /// Source representation; defaults to the file's `#repr` header.
    #[arg(long)]
    pub from: Option<String>,
    #[arg(long)]
    pub to: String,
    #[arg(long)]
    pub depth: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    /// Packed 0/1 bit file.
    #[arg(long)]
    pub input: PathBuf,
    /// `lz` or `entropy:<h>`.
    #[arg(long, default_value = "lz")]
    pub oracle: String,
    /// Also sample at the scale points of `cantor:<Q>`.
    #[arg(long)]
    pub phi: Option<String>,
    /// Last scale index; defaults to the largest k with m_k within the input.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Prefix length used by the plain grid 1..=N (defaults to the whole input).
    #[arg(long)]
    pub length: Option<usize>,
    /// Skip the plain grid.
    #[arg(long)]
    pub no_plain: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct FaithfulnessArgs {
    #[arg(long)]
    pub q: String,
    #[arg(long)]
    pub kmax: usize,
    #[arg(long, default_value = "1/20")]
    pub zero_tol: String,
    #[arg(long, default_value = "1/2")]
    pub away_tol: String,
    /// Inclusive k range `a..b`; defaults to the last half of the terms.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaleCommand {
    /// A gale with the same value on every set down to the depth.
    Constant(GaleConstantArgs),
    /// Check the supergale inequality at every stored node.
    Validate(GaleFileArgs),
    /// Antichain mass against root mass.
    Kraft(GaleKraftArgs),
    /// Gale from a cover file of `level,index` rows.
    FromCover(GaleFromCoverArgs),
    /// Sets where the capital reaches 2^r / delta^s.
    ToCover(GaleToCoverArgs),
    /// Capital along the representation chain of a point.
    Success(GaleSuccessArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct FamilyArgs {
    /// `dyadic`, `cf` or `cantor:<Q>`.
    #[arg(long)]
    pub family: String,
    /// Largest partial quotient enumerated on continued-fraction levels.
    #[arg(long)]
    pub max_term: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct GaleConstantArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub s: String,
    #[arg(long)]
    pub depth: u32,
    #[arg(long, default_value = "1")]
    pub value: String,
}

#[derive(Args, Debug, Serialize)]
pub struct GaleFileArgs {
    #[arg(long)]
    pub file: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GaleKraftArgs {
    #[arg(long)]
    pub file: PathBuf,
    /// `level,index` rows.
    #[arg(long)]
    pub antichain: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GaleFromCoverArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub s: String,
    #[arg(long)]
    pub depth: u32,
    #[arg(long)]
    pub cover: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GaleToCoverArgs {
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub r: i64,
    #[arg(long, default_value = "1")]
    pub delta: String,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tie {
    Left,
    Right,
}

#[derive(Args, Debug, Serialize)]
pub struct GaleSuccessArgs {
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long, value_enum, default_value = "left")]
    pub tie: Tie,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyFamilyArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub depth: u32,
    /// Comma-separated sample points; defaults to the built-in set.
    #[arg(long)]
    pub samples: Option<String>,
    /// Fineness threshold; defaults to twice the largest diameter at the depth.
    #[arg(long)]
    pub epsilon: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ChaseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "lz")]
    pub oracle_a: String,
    #[arg(long, default_value = "entropy:1")]
    pub oracle_b: String,
    /// Base offset M (stage 0 is [0, M^2)).
    #[arg(long = "M", value_name = "M")]
    pub offset: usize,
    #[arg(long)]
    pub stages: usize,
    #[arg(long, default_value_t = 256)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Abort if the best candidate falls short of t_m by more than this.
    #[arg(long)]
    pub max_deficit: Option<u64>,
    /// `fitted`, `c:<x>` for x*sqrt(n)*log2(n), or `bits:<x>` for a constant.
    #[arg(long, default_value = "fitted")]
    pub slack: String,
}

#[derive(Args, Debug, Serialize)]
pub struct DiluteArgs {
    #[arg(long)]
    pub q: String,
    #[arg(long)]
    pub s: String,
    #[arg(long, default_value_t = 1)]
    pub k_lo: usize,
    #[arg(long)]
    pub k_hi: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Random,
    Zeros,
    Bernoulli,
    /// Seeded bits at even positions, zeros at odd ones.
    Interleaved,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub kind: SampleKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Probability of a 1 for `bernoulli`.
    #[arg(long)]
    pub p: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct KrArgs {
    #[arg(long)]
    pub x: String,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub r: i64,
    #[arg(long, default_value = "lz")]
    pub oracle: String,
    #[arg(long, default_value_t = 256)]
    pub max_den: u64,
    #[arg(long, default_value_t = 32)]
    pub max_level: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}
