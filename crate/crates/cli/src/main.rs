use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use earid::ecc::EccName;
use earid::harness::DEFAULT_TRIALS;
use earid::synth::DEFAULT_WEAR_JITTER;

mod commands;
mod list;

/// Ear-canal-scan key extraction and fuzzy-commitment authentication on a
/// synthetic population.
#[derive(Debug, Parser)]
#[command(name = "earid", version)]
struct Cli {
    /// Log filter (error, warn, info, debug, trace); RUST_LOG overrides.
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scan dataset.
    Gen(GenArgs),
    /// Extract the cepstral feature of a set of scans as JSON.
    Features(FeaturesArgs),
    /// Enroll a subject: write the key, helper data and stored credential.
    Enroll(EnrollArgs),
    /// Authenticate with fresh scans against a stored credential.
    Auth(AuthArgs),
    /// Error rates over random gallery/enrolled groupings.
    Eval(EvalArgs),
    /// Passive, synthetic, universal, key-guessing and false-trigger attacks.
    Attack(AttackArgs),
    /// Genuine and cross-user distances over simulated days or sessions.
    Drift(DriftArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExcitationArg {
    Chirp,
    Mls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    Quiet,
    Indoor,
    Street,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Day,
    Session,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 44)]
    subjects: u32,
    /// Scans per subject.
    #[arg(long, default_value_t = 40)]
    scans: u32,
    /// Scans per subject reserved for enrollment.
    #[arg(long, default_value_t = 8)]
    enroll_scans: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also generate silicon, universal and false-trigger corpora.
    #[arg(long)]
    attacks: bool,
    #[arg(long, default_value_t = DEFAULT_WEAR_JITTER)]
    wear_jitter: f64,
    #[arg(long, value_enum, default_value_t = ExcitationArg::Chirp)]
    excitation: ExcitationArg,
    /// Excitation length in seconds.
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Noise conditions cycled over trials.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "quiet")]
    noise: Vec<NoiseArg>,
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    subject: String,
    /// Trial indices, e.g. `0-7` or `8,9`.
    #[arg(long)]
    scans: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnrollArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    subject: String,
    /// Population gallery: ids or index ranges. Defaults to every other
    /// subject.
    #[arg(long)]
    gallery: Option<String>,
    #[arg(long, default_value = "bch255")]
    ecc: EccName,
    #[arg(long)]
    out_key: PathBuf,
    #[arg(long)]
    out_helper: PathBuf,
    /// Credential store directory.
    #[arg(long, default_value = "earid-store")]
    store: PathBuf,
    #[arg(long, default_value_t = 1)]
    projection_seed: u64,
    /// Renyi order of the biometric information.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct AuthArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Subject whose ear is scanned.
    #[arg(long)]
    subject: String,
    /// Claimed identity; defaults to the scanned subject.
    #[arg(long)]
    user: Option<String>,
    #[arg(long)]
    helper: PathBuf,
    #[arg(long, default_value = "earid-store")]
    store: PathBuf,
    #[arg(long, default_value = "bch255")]
    ecc: EccName,
    /// Trial indices of the attempt; defaults to the first two scans after
    /// enrollment.
    #[arg(long)]
    scans: Option<String>,
    /// Seed of the committed secret.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "bch255")]
    ecc: EccName,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Exit with status 2 when an acceptance target is missed.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    report: ReportArgs,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[command(flatten)]
    report: ReportArgs,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
}

#[derive(Debug, Args)]
struct DriftArgs {
    #[command(flatten)]
    report: ReportArgs,
    #[arg(long, default_value_t = 5)]
    periods: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Day)]
    mode: ModeArg,
    /// Attempts per enrolled user and period.
    #[arg(long, default_value_t = 5)]
    attempts: usize,
    /// Day mode jitter growth per period.
    #[arg(long, default_value_t = 0.05)]
    drift_factor: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log)).init();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Features(a) => commands::features(a),
        Command::Enroll(a) => commands::enroll(a),
        Command::Auth(a) => commands::auth(a),
        Command::Eval(a) => commands::eval(a),
        Command::Attack(a) => commands::attack(a),
        Command::Drift(a) => commands::drift(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
