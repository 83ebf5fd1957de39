use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vvcse::cli_io::{
    decode_only, generate, metrics_report, replacement_stream, run_oracle, seal_stream, tables_or_default,
    unseal_stream, verify, write_csv, CoefficientStream, GenConfig, Magnitude, ModeChoice, OracleConfig, PatternMode,
    SealedStream, StreamError,
};
use vvcse::coeffmodel::{CodingMode, CodingTables};
use vvcse::crypto::{EncryptionRegionMap, Key, Nonce, RegionSource, RuleParams};
use vvcse::metrics::{read_pgm_file, FrameBuffer, PsnrWeights, DEFAULT_TAU};

#[derive(Parser)]
#[command(name = "vvcse", version, about = "Constant-bitrate selective encryption of residual coefficient bins")]
struct Cli {
    /// Coding table file (JSON); the built-in defaults when omitted.
    #[arg(long, global = true)]
    tables: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic coefficient stream.
    Gen(GenArgs),
    /// Encrypt a coefficient stream into a sealed stream.
    Encrypt(EncryptArgs),
    /// Decrypt a sealed stream, or decode it without the key.
    Decrypt(DecryptArgs),
    /// Check a sealed stream against its plain stream.
    Verify(VerifyArgs),
    /// Brute-force check of the encryptable-bin detector.
    Oracle(OracleArgs),
    /// Security metrics over PGM frame pairs.
    Metrics(MetricsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Tc,
    Ts,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Uniform,
    Geometric,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Block sizes as WxH, cycled in order.
    #[arg(long, value_delimiter = ',', default_value = "4x4,2x8,8x2", value_parser = parse_size)]
    size: Vec<(usize, usize)>,
    #[arg(long, value_enum, default_value = "mixed")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "uniform")]
    dist: DistArg,
    /// Largest magnitude.
    #[arg(long, default_value_t = 1024)]
    max_abs: u32,
    /// Mean magnitude for the geometric distribution.
    #[arg(long, default_value_t = 8.0)]
    mean: f64,
    #[arg(long, default_value_t = 0.3)]
    zero_prob: f64,
    /// Number of stand-alone syntax elements appended.
    #[arg(long, default_value_t = 0)]
    aux: usize,
    #[arg(long, default_value_t = 15)]
    log2_tr_range: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncryptArgs {
    /// Plain coefficient stream.
    input: PathBuf,
    /// 128-bit key, 32 hex digits.
    #[arg(long)]
    key: Option<String>,
    /// 128-bit initial counter, 32 hex digits.
    #[arg(long)]
    nonce: Option<String>,
    /// Zero every encryptable bin instead of encrypting (no key needed).
    #[arg(long, conflicts_with_all = ["key", "nonce"])]
    replace_zero: bool,
    #[arg(long)]
    out: PathBuf,
    /// Also write the encrypted-region map as JSON.
    #[arg(long)]
    regions: Option<PathBuf>,
}

#[derive(Args)]
struct DecryptArgs {
    /// Sealed stream.
    input: PathBuf,
    #[arg(long, required_unless_present = "decode_only")]
    key: Option<String>,
    /// Must match the nonce stored in the container when given.
    #[arg(long)]
    nonce: Option<String>,
    /// Parse without the key and write the coefficients a plain decoder sees.
    #[arg(long)]
    decode_only: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    plain: PathBuf,
    sealed: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 10_000)]
    blocks: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "4x4", value_parser = parse_size)]
    size: (usize, usize),
    #[arg(long, value_enum, default_value = "mixed")]
    mode: ModeArg,
    #[arg(long, default_value_t = 32)]
    max_abs: i32,
    #[arg(long, default_value_t = 0.3)]
    zero_prob: f64,
    /// Random patterns per position instead of all of them.
    #[arg(long)]
    sampled: Option<u32>,
    /// Sum offset of the pass-2-1 rice check; anything but 20 is a
    /// deliberately broken detector.
    #[arg(long, default_value_t = 20)]
    mutate_offset: i64,
    /// Also run the zero-replacement attack on every block.
    #[arg(long)]
    replacement: bool,
    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Luma,
    #[value(name = "611")]
    Yuv611,
}

#[derive(Args)]
struct MetricsArgs {
    /// Reference PGM frames.
    #[arg(long = "ref", num_args = 1.., required = true)]
    reference: Vec<PathBuf>,
    /// Test PGM frames, aligned with --ref.
    #[arg(long, num_args = 1.., required = true)]
    test: Vec<PathBuf>,
    /// Edge threshold as a fraction of the peak value.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    /// PSNR weighting; 611 takes frames as consecutive Y, Cb, Cr files.
    #[arg(long, value_enum, default_value = "luma")]
    psnr_weights: WeightsArg,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(w)?, parse(h)?))
}

/// Failures: bad input is a usage error, a failed check is a verification
/// failure.
enum Failure {
    Usage(String),
    Verification(String),
}

impl From<StreamError> for Failure {
    fn from(e: StreamError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn parse_key(s: Option<&str>) -> Result<Key, Failure> {
    let s = s.ok_or_else(|| Failure::Usage("--key is required".into()))?;
    s.parse().map_err(|e: vvcse::crypto::CryptoError| Failure::Usage(e.to_string()))
}

fn parse_nonce(s: &str) -> Result<Nonce, Failure> {
    s.parse().map_err(|e: vvcse::crypto::CryptoError| Failure::Usage(e.to_string()))
}

fn mode_choice(m: ModeArg) -> ModeChoice {
    match m {
        ModeArg::Tc => ModeChoice::Tc,
        ModeArg::Ts => ModeChoice::Ts,
        ModeArg::Mixed => ModeChoice::Mixed,
    }
}

fn write_regions(path: &Path, bit_count: usize, regions: &EncryptionRegionMap) -> Result<(), Failure> {
    let sources = [
        RegionSource::TcSuffix,
        RegionSource::TsSuffix,
        RegionSource::Sign,
        RegionSource::FlElement,
        RegionSource::EgkSuffixMvd,
    ];
    let totals: serde_json::Map<String, serde_json::Value> = sources
        .iter()
        .map(|&s| (serde_json::to_value(s).expect("serializes").as_str().unwrap_or_default().to_owned(), regions.bits_of(s).into()))
        .collect();
    let doc = serde_json::json!({
        "bit_count": bit_count,
        "encrypted_bits": regions.total_bits(),
        "totals": totals,
        "regions": regions.regions(),
    });
    std::fs::write(path, serde_json::to_string_pretty(&doc).expect("serializes") + "\n").map_err(|e| io_fail(path, e))
}

fn cmd_gen(a: GenArgs, tables: &CodingTables) -> Result<(), Failure> {
    let magnitude = match a.dist {
        DistArg::Uniform => Magnitude::Uniform { max_abs: a.max_abs },
        DistArg::Geometric => Magnitude::Geometric { mean: a.mean, max_abs: a.max_abs },
    };
    let cfg = GenConfig {
        seed: a.seed,
        count: a.count,
        sizes: a.size,
        mode: mode_choice(a.mode),
        magnitude,
        zero_prob: a.zero_prob,
        aux_count: a.aux,
        log2_tr_range: a.log2_tr_range,
    };
    generate(&cfg, tables)?.write_file(&a.out)?;
    Ok(())
}

fn cmd_encrypt(a: EncryptArgs, tables: &CodingTables) -> Result<(), Failure> {
    let stream = CoefficientStream::read_file(&a.input)?;
    let (sealed, out) = if a.replace_zero {
        replacement_stream(&stream, tables)?
    } else {
        let key = parse_key(a.key.as_deref())?;
        let nonce = parse_nonce(a.nonce.as_deref().ok_or_else(|| Failure::Usage("--nonce is required".into()))?)?;
        seal_stream(&stream, tables, &key, &nonce)?
    };
    std::fs::write(&a.out, sealed.to_bytes()).map_err(|e| io_fail(&a.out, e))?;
    if let Some(p) = &a.regions {
        write_regions(p, sealed.bits.len(), &out.regions)?;
    }
    eprintln!(
        "{} bits, {} encrypted ({:.2}%)",
        sealed.bits.len(),
        out.regions.total_bits(),
        100.0 * out.regions.total_bits() as f64 / sealed.bits.len().max(1) as f64
    );
    Ok(())
}

fn cmd_decrypt(a: DecryptArgs, tables: &CodingTables) -> Result<(), Failure> {
    let bytes = std::fs::read(&a.input).map_err(|e| io_fail(&a.input, e))?;
    let sealed = SealedStream::from_bytes(&bytes)?;
    let stream = if a.decode_only {
        decode_only(&sealed, tables)?
    } else {
        if let Some(n) = &a.nonce {
            if parse_nonce(n)? != sealed.header.nonce {
                return Err(Failure::Usage(format!("--nonce does not match the container nonce {}", sealed.header.nonce)));
            }
        }
        unseal_stream(&sealed, tables, &parse_key(a.key.as_deref())?)?
    };
    stream.write_file(&a.out)?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs, tables: &CodingTables) -> Result<(), Failure> {
    let plain = CoefficientStream::read_file(&a.plain)?;
    let bytes = std::fs::read(&a.sealed).map_err(|e| io_fail(&a.sealed, e))?;
    let report = verify(&plain, &bytes, tables);
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification("verification failed".into()))
    }
}

fn cmd_oracle(a: OracleArgs, tables: &CodingTables) -> Result<(), Failure> {
    let cfg = OracleConfig {
        blocks: a.blocks,
        seed: a.seed,
        width: a.size.0,
        height: a.size.1,
        mode: match a.mode {
            ModeArg::Tc => Some(CodingMode::Transform),
            ModeArg::Ts => Some(CodingMode::TransformSkip),
            ModeArg::Mixed => None,
        },
        max_abs: a.max_abs,
        zero_prob: a.zero_prob,
        log2_tr_range: 15,
        rules: RuleParams { pass2_1_offset: a.mutate_offset },
        patterns: a.sampled.map_or(PatternMode::Exhaustive, PatternMode::Sampled),
        replacement: a.replacement,
    };
    vvcse::coeffmodel::check_dims(cfg.width, cfg.height).map_err(|e| Failure::Usage(e.to_string()))?;
    if cfg.max_abs < 1 || !(0.0..=1.0).contains(&cfg.zero_prob) {
        return Err(Failure::Usage("--max-abs must be positive and --zero-prob in [0, 1]".into()));
    }
    let r = run_oracle(&cfg, tables);
    println!("blocks                {}", r.blocks);
    println!("significant positions {}", r.significant_positions);
    println!("encryptable positions {}", r.encryptable_positions);
    println!("encryptable bits      {}", r.encryptable_bits);
    println!("substitutions         {}", r.substitutions);
    println!("violations            {}", r.violations);
    println!("decision drift        {}", r.decision_drift);
    if cfg.replacement {
        println!("replacement failures  {} / {}", r.replacement_failures, r.replacement_checked);
    }
    for (reason, n) in &r.blocked_by {
        println!("blocked by {reason:<11} {n}");
    }
    for v in &r.first_violations {
        println!("violation: block {} ({}, {}) {} -> {} [{} bits]: {}", v.block, v.x, v.y, v.original, v.substituted, v.bits, v.what);
    }
    if let Some(p) = &a.out {
        std::fs::write(p, serde_json::to_string_pretty(&r).expect("serializes") + "\n").map_err(|e| io_fail(p, e))?;
    }
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} violations", r.violations + r.decision_drift + r.replacement_failures)))
    }
}

fn load_frames(paths: &[PathBuf], planes: usize) -> Result<Vec<Vec<FrameBuffer>>, Failure> {
    if paths.len() % planes != 0 {
        return Err(Failure::Usage(format!("{} files do not group into {planes}-plane frames", paths.len())));
    }
    paths
        .chunks(planes)
        .map(|c| c.iter().map(|p| read_pgm_file(p).map_err(|e| Failure::Usage(e.to_string()))).collect())
        .collect()
}

fn cmd_metrics(a: MetricsArgs) -> Result<(), Failure> {
    let weights = match a.psnr_weights {
        WeightsArg::Luma => PsnrWeights::LumaOnly,
        WeightsArg::Yuv611 => PsnrWeights::Yuv611,
    };
    let planes = weights.weights().len();
    let rows = metrics_report(&load_frames(&a.reference, planes)?, &load_frames(&a.test, planes)?, a.tau, weights)?;
    match &a.out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| io_fail(p, e))?;
            write_csv(&rows, a.tau, weights, f)?;
        }
        None => write_csv(&rows, a.tau, weights, std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let tables = tables_or_default(cli.tables.as_deref())?;
    match cli.command {
        Command::Gen(a) => cmd_gen(a, &tables),
        Command::Encrypt(a) => cmd_encrypt(a, &tables),
        Command::Decrypt(a) => cmd_decrypt(a, &tables),
        Command::Verify(a) => cmd_verify(a, &tables),
        Command::Oracle(a) => cmd_oracle(a, &tables),
        Command::Metrics(a) => cmd_metrics(a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on its own for malformed command lines.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("vvcse: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("vvcse: {msg}");
            ExitCode::from(2)
        }
    }
}
