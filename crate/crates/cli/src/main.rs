//! `cookiehash` command-line tool.
//!
//! Exit codes: 0 success, 1 computation or I/O failure, 2 invalid usage or
//! input, 3 resource budget exceeded.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use cookiehash::analysis::{
    collision_bound, collision_bound_bits, collision_bound_with_rate, exhaustive_growth_report,
    freeness_check, integer_hash, random_growth_sweep, AnalysisError, ResourceGuard,
};
use cookiehash::attacks::{
    backtrack_preimage_3gen, brute_force_preimage, greedy_preimage, two_generator_product,
    AttackError, SearchOutcome, DEFAULT_NODE_BUDGET,
};
use cookiehash::bits::{bits_to_string, bytes_to_bits, parse_bits};
use cookiehash::matrix::word_to_string;
use cookiehash::params::{generate_prime_seeded, parse_decimal};
use cookiehash::randomness::{
    batch_pass_rates, builtin_suite, hash_stream_generate, read_sequence, seeded_input, sts_export,
    BitSequence, StreamConfig, TestReport, DEFAULT_BLOCK_SIZE,
};
use cookiehash::{CookieHasher, Digest, GeneratorSet, HashParams, IntMat, Mat2};

/// Overrides the default multiplication budget of enumerations.
const ENV_MAX_MULTIPLICATIONS: &str = "COOKIEHASH_MAX_MULTIPLICATIONS";
/// Overrides the default node budget of the backtracking preimage search.
const ENV_NODE_BUDGET: &str = "COOKIEHASH_NODE_BUDGET";

#[derive(Debug)]
enum CliError {
    Usage(String),
    Compute(String),
    Budget(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Compute(m) | CliError::Budget(m) => f.write_str(m),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::ResourceLimit { .. } => CliError::Budget(e.to_string()),
            AnalysisError::EmptyExperiment
            | AnalysisError::OddLength(_)
            | AnalysisError::NotMultipleOfFour(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::Resource(inner) => inner.into(),
            AttackError::SetSize(_) => CliError::Usage(e.to_string()),
            AttackError::NotInSemigroup { .. } => CliError::Compute(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn usage<E: fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser)]
#[command(name = "cookiehash", version, about = "Cayley hashing with cookies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hash a bit string (padded with 000 unless --raw).
    Hash(HashArgs),
    /// Multiply two hex digests: the digest of the concatenated inputs.
    Combine(CombineArgs),
    /// Exhaustive maximal or random generic growth of a generator set.
    Growth(GrowthArgs),
    /// Look for two words with equal integer products.
    Freeness(FreenessArgs),
    /// Length below which no two inputs can collide.
    GirthBound(GirthArgs),
    /// Recover an input from a hash value.
    Preimage(PreimageArgs),
    /// Write hashed sequences as ASCII files for an external test suite.
    NistExport(ExportArgs),
    /// Run the built-in statistical tests.
    Randtest(RandtestArgs),
    /// Hash a seeded random input and report throughput and additions per bit.
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(skip)]
struct PrimeArgs {
    /// Named prime: paper-256 or paper-512.
    #[arg(long, conflicts_with_all = ["prime", "prime_bits"])]
    preset: Option<String>,
    /// Prime in decimal.
    #[arg(long, conflicts_with = "prime_bits")]
    prime: Option<String>,
    /// Prime size in bits (with --generate, a fresh seeded prime).
    #[arg(long)]
    prime_bits: Option<u64>,
    /// Generate a random prime of --prime-bits bits from --seed.
    #[arg(long, requires = "prime_bits")]
    generate: bool,
}

impl PrimeArgs {
    fn resolve(&self, seed: u64) -> Result<HashParams, CliError> {
        if let Some(name) = &self.preset {
            return HashParams::preset(name).map_err(usage);
        }
        if let Some(text) = &self.prime {
            return HashParams::from_decimal(text).map_err(usage);
        }
        if let Some(bits) = self.prime_bits {
            if !self.generate {
                return Err(CliError::Usage(
                    "--prime-bits needs --generate to pick a prime".to_string(),
                ));
            }
            let p = generate_prime_seeded(bits, seed).map_err(usage)?;
            eprintln!("prime: {p}");
            return HashParams::assume_prime(p).map_err(usage);
        }
        HashParams::preset("paper-256").map_err(usage)
    }
}

#[derive(Args)]
struct InputArgs {
    /// Input as a string of 0 and 1 (whitespace ignored).
    #[arg(long, conflicts_with = "file", allow_hyphen_values = true)]
    bits: Option<String>,
    /// Read input from a file; `-` or no input flag reads stdin.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Treat file or stdin contents as ASCII 0/1 text instead of raw bytes.
    #[arg(long)]
    ascii: bool,
}

impl InputArgs {
    fn read(&self) -> Result<Vec<bool>, CliError> {
        if let Some(text) = &self.bits {
            return parse_bits(text).map_err(usage);
        }
        let data = match &self.file {
            Some(path) if path.as_os_str() != "-" => {
                fs::read(path).map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))?
            }
            _ => {
                let mut buf = Vec::new();
                io::stdin().read_to_end(&mut buf)?;
                buf
            }
        };
        if self.ascii {
            let text = String::from_utf8(data).map_err(|_| usage("input is not ASCII"))?;
            parse_bits(&text).map_err(usage)
        } else {
            Ok(bytes_to_bits(&data))
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DigestFormat {
    Hex,
    Bits,
}

fn render(d: &Digest, format: DigestFormat) -> String {
    match format {
        DigestFormat::Hex => d.to_hex(),
        DigestFormat::Bits => d.to_bit_string(),
    }
}

#[derive(Args)]
struct HashArgs {
    #[command(flatten)]
    prime: PrimeArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Skip the 000 padding.
    #[arg(long)]
    raw: bool,
    /// Also print addition and multiplication counts.
    #[arg(long)]
    count_ops: bool,
    #[arg(long, value_enum, default_value = "hex")]
    format: DigestFormat,
    /// Seed for --generate.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn cmd_hash(args: HashArgs) -> CliResult {
    let params = args.prime.resolve(args.seed)?;
    let bits = args.input.read()?;
    let mut h = CookieHasher::new(&params);
    h.absorb_bits(bits);
    if !args.raw {
        h.pad();
    }
    println!("{}", render(&h.finalize_raw(), args.format));
    if args.count_ops {
        let c = h.counter();
        println!(
            "bits={} additions={} multiplications={}",
            h.bits_absorbed(),
            c.additions,
            c.multiplications
        );
    }
    Ok(())
}

#[derive(Args)]
struct CombineArgs {
    #[command(flatten)]
    prime: PrimeArgs,
    /// Left digest (hex).
    first: String,
    /// Right digest (hex).
    second: String,
    #[arg(long, value_enum, default_value = "hex")]
    format: DigestFormat,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn cmd_combine(args: CombineArgs) -> CliResult {
    let params = args.prime.resolve(args.seed)?;
    let p = params.modulus();
    let a = Digest::from_hex(&args.first, p).map_err(usage)?;
    let b = Digest::from_hex(&args.second, p).map_err(usage)?;
    let d = a.combine(&b).map_err(usage)?;
    println!("{}", render(&d, args.format));
    Ok(())
}

fn generator_set(name: &str) -> Result<GeneratorSet, CliError> {
    GeneratorSet::preset(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown generator set {name:?}; expected one of {}",
            GeneratorSet::PRESET_NAMES.join(", ")
        ))
    })
}

fn env_u64(name: &str, default: u64) -> Result<u64, CliError> {
    match std::env::var(name) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{name} must be a nonnegative integer"))),
        Err(_) => Ok(default),
    }
}

fn guard() -> Result<ResourceGuard, CliError> {
    Ok(ResourceGuard {
        max_multiplications: env_u64(ENV_MAX_MULTIPLICATIONS, ResourceGuard::DEFAULT_LIMIT)?,
    })
}

#[derive(Clone, Copy, ValueEnum)]
enum GrowthModeArg {
    Exhaustive,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Summary,
}

#[derive(Args)]
struct GrowthArgs {
    /// Generator set: cookie, zemor, a2b2, a2bm2 or xy.
    #[arg(long, default_value = "a2b2")]
    set: String,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: GrowthModeArg,
    /// Word lengths, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    lengths: Vec<usize>,
    /// Random words per length.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "summary")]
    format: ReportFormat,
}

fn cmd_growth(args: GrowthArgs) -> CliResult {
    let set = generator_set(&args.set)?;
    let report = match args.mode {
        GrowthModeArg::Exhaustive => exhaustive_growth_report(&set, &args.lengths, guard()?)?,
        GrowthModeArg::Random => random_growth_sweep(&set, &args.lengths, args.trials, args.seed)?,
    };
    match args.format {
        ReportFormat::Csv => print!("{}", report.to_csv()),
        ReportFormat::Summary => print!("{}", report.summary()),
    }
    Ok(())
}

#[derive(Args)]
struct FreenessArgs {
    #[arg(long, default_value = "cookie")]
    set: String,
    #[arg(long)]
    max_len: usize,
}

fn cmd_freeness(args: FreenessArgs) -> CliResult {
    let set = generator_set(&args.set)?;
    let report = freeness_check(&set, args.max_len, guard()?)?;
    println!("{report}");
    Ok(())
}

#[derive(Args)]
struct GirthArgs {
    /// Named prime.
    #[arg(long, conflicts_with_all = ["prime", "prime_bits"])]
    preset: Option<String>,
    /// Prime (or any modulus) in decimal.
    #[arg(long, conflicts_with = "prime_bits")]
    prime: Option<String>,
    /// Modulus of exactly 2^N.
    #[arg(long)]
    prime_bits: Option<u64>,
    /// Use log_rate(p) instead of the exact golden-ratio bound.
    #[arg(long)]
    rate: Option<f64>,
}

fn cmd_girth_bound(args: GirthArgs) -> CliResult {
    let p = if let Some(name) = &args.preset {
        Some(
            HashParams::preset(name)
                .map_err(usage)?
                .modulus()
                .value()
                .clone(),
        )
    } else if let Some(text) = &args.prime {
        Some(parse_decimal(text).map_err(usage)?)
    } else {
        None
    };
    let bound = match (args.rate, p, args.prime_bits) {
        (Some(rate), _, _) if !rate.is_finite() || rate <= 1.0 => {
            return Err(CliError::Usage("--rate must exceed 1".to_string()))
        }
        (Some(rate), Some(p), _) => collision_bound_with_rate(p.bits() as f64, rate),
        (Some(rate), None, Some(bits)) => collision_bound_with_rate(bits as f64, rate),
        (None, Some(p), _) => collision_bound(&p),
        (None, None, Some(bits)) => collision_bound_bits(bits),
        (_, None, None) => collision_bound_bits(256),
    };
    println!("{bound}");
    Ok(())
}

#[derive(Clone, Copy, ValueEnum)]
enum PreimageMethod {
    /// Entry-sum descent over a two-generator set.
    Greedy,
    /// Backtracking descent over {A, B, C} under the cookie rule.
    Backtrack,
    /// Exhaustive search over bit strings modulo p.
    Brute,
}

#[derive(Args)]
struct PreimageArgs {
    #[arg(long, value_enum)]
    method: PreimageMethod,
    /// Integer target matrix as a,b,c,d (greedy and backtrack).
    #[arg(long, conflicts_with_all = ["target_bits", "digest"], allow_hyphen_values = true)]
    matrix: Option<String>,
    /// Build the target by hashing these bits (0 = A, 1 = B for greedy).
    #[arg(long, conflicts_with = "digest")]
    target_bits: Option<String>,
    /// Hex digest target (brute).
    #[arg(long)]
    digest: Option<String>,
    /// Generator set for greedy.
    #[arg(long, default_value = "a2b2")]
    set: String,
    #[arg(long, default_value_t = 0)]
    min_len: usize,
    #[arg(long, default_value_t = 64)]
    max_len: usize,
    /// Node budget for backtrack (default 1000000).
    #[arg(long)]
    budget: Option<u64>,
    #[command(flatten)]
    prime: PrimeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_matrix(text: &str) -> Result<IntMat, CliError> {
    let parts: Vec<BigInt> = text
        .split(',')
        .map(|s| s.trim().parse::<BigInt>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage("matrix entries must be integers"))?;
    match parts.as_slice() {
        [a, b, c, d] => Ok(Mat2::new(a.clone(), b.clone(), c.clone(), d.clone())),
        _ => Err(usage("matrix needs four entries a,b,c,d")),
    }
}

fn cmd_preimage(args: PreimageArgs) -> CliResult {
    let target_bits = args
        .target_bits
        .as_deref()
        .map(parse_bits)
        .transpose()
        .map_err(usage)?;
    match args.method {
        PreimageMethod::Greedy => {
            let set = generator_set(&args.set)?;
            let target = match (&args.matrix, &target_bits) {
                (Some(m), _) => parse_matrix(m)?,
                (None, Some(bits)) => two_generator_product(bits),
                _ => return Err(usage("greedy needs --matrix or --target-bits")),
            };
            let word = greedy_preimage(&set, &target)?;
            println!("{}", word_to_string(&word));
        }
        PreimageMethod::Backtrack => {
            let target = match (&args.matrix, &target_bits) {
                (Some(m), _) => parse_matrix(m)?,
                (None, Some(bits)) => integer_hash(bits),
                _ => return Err(usage("backtrack needs --matrix or --target-bits")),
            };
            let budget = match args.budget {
                Some(b) => b,
                None => env_u64(ENV_NODE_BUDGET, DEFAULT_NODE_BUDGET)?,
            };
            let stats = backtrack_preimage_3gen(&target, args.max_len, budget);
            match &stats.outcome {
                SearchOutcome::Found(bits) => println!("{}", bits_to_string(bits)),
                SearchOutcome::Exhausted => println!("none"),
                SearchOutcome::BudgetHit => {}
            }
            println!("{}", stats.summary_line());
            if stats.outcome == SearchOutcome::BudgetHit {
                return Err(CliError::Budget(format!(
                    "node budget of {budget} exhausted"
                )));
            }
        }
        PreimageMethod::Brute => {
            let params = args.prime.resolve(args.seed)?;
            let target = match (&args.digest, &target_bits) {
                (Some(hex), _) => Digest::from_hex(hex, params.modulus()).map_err(usage)?,
                (None, Some(bits)) => cookiehash::hash_raw(&params, bits.iter().copied()),
                _ => return Err(usage("brute needs --digest or --target-bits")),
            };
            match brute_force_preimage(&target, &params, args.min_len, args.max_len, guard()?)? {
                Some(bits) => println!("{}", bits_to_string(&bits)),
                None => println!("none"),
            }
        }
    }
    Ok(())
}

#[derive(Args)]
struct StreamArgs {
    /// Number of test sequences.
    #[arg(long, default_value_t = 100)]
    sequences: usize,
    /// Minimum bits per sequence; whole digests are concatenated.
    #[arg(long, default_value_t = 1_000_000)]
    sequence_bits: usize,
    /// Bits of each random hash input.
    #[arg(long, default_value_t = 1_000_000)]
    input_bits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl StreamArgs {
    fn generate(&self, params: &HashParams) -> Vec<BitSequence> {
        let config = StreamConfig {
            digests: StreamConfig::digests_for(
                self.sequences,
                self.sequence_bits,
                params.digest_bits(),
            ),
            input_bits: self.input_bits,
            seed: self.seed,
            sequence_bits: Some(self.sequence_bits),
        };
        hash_stream_generate(params, config).sequences
    }
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    prime: PrimeArgs,
    #[command(flatten)]
    stream: StreamArgs,
    /// Output directory; files are data_<index>.txt.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_nist_export(args: ExportArgs) -> CliResult {
    let params = args.prime.resolve(args.stream.seed)?;
    let sequences = args.stream.generate(&params);
    let paths = sts_export(&sequences, &args.out).map_err(|e| CliError::Compute(e.to_string()))?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

#[derive(Args)]
struct RandtestArgs {
    #[command(flatten)]
    prime: PrimeArgs,
    #[command(flatten)]
    stream: StreamArgs,
    /// Test these ASCII sequence files instead of generating hash output.
    #[arg(long, num_args = 1..)]
    files: Vec<PathBuf>,
    /// Block length for the block frequency test.
    #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    /// csv: one line per test and sequence; summary: pass counts per test.
    #[arg(long, value_enum, default_value = "summary")]
    format: ReportFormat,
}

fn cmd_randtest(args: RandtestArgs) -> CliResult {
    let sequences = if args.files.is_empty() {
        let params = args.prime.resolve(args.stream.seed)?;
        args.stream.generate(&params)
    } else {
        args.files
            .iter()
            .map(|p| read_sequence(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))))
            .collect::<Result<_, _>>()?
    };
    match args.format {
        ReportFormat::Csv => {
            println!("sequence,{}", TestReport::CSV_HEADER);
            for (i, seq) in sequences.iter().enumerate() {
                for r in builtin_suite(seq, args.block_size).map_err(usage)? {
                    println!("{i},{}", r.csv_line());
                }
            }
        }
        ReportFormat::Summary => {
            for t in batch_pass_rates(&sequences, args.block_size).map_err(usage)? {
                println!("{:<28} {}/{}", t.test, t.passed, t.total);
            }
        }
    }
    Ok(())
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    prime: PrimeArgs,
    /// Input length in bits.
    #[arg(long, default_value_t = 1_000_000)]
    input_bits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let params = args.prime.resolve(args.seed)?;
    let input = seeded_input(args.seed, 0, args.input_bits);
    let start = Instant::now();
    let mut h = CookieHasher::new(&params);
    h.absorb_bits(input);
    let elapsed = start.elapsed().as_secs_f64();
    let c = h.counter();
    let n = h.bits_absorbed();
    let per_bit = if n > 1 {
        c.additions as f64 / (n - 1) as f64
    } else {
        0.0
    };
    println!(
        "bits={n} additions={} multiplications={}",
        c.additions, c.multiplications
    );
    println!("additions_per_bit={per_bit:.4}");
    println!(
        "bits_per_sec={:.0}",
        n as f64 / elapsed.max(f64::MIN_POSITIVE)
    );
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Hash(a) => cmd_hash(a),
        Command::Combine(a) => cmd_combine(a),
        Command::Growth(a) => cmd_growth(a),
        Command::Freeness(a) => cmd_freeness(a),
        Command::GirthBound(a) => cmd_girth_bound(a),
        Command::Preimage(a) => cmd_preimage(a),
        Command::NistExport(a) => cmd_nist_export(a),
        Command::Randtest(a) => cmd_randtest(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli);
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
