//! Command-line front end: build and verify schemes, evaluate rates, sweep
//! the cooperation capacity and reproduce the showcase configurations.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use sldic_core::analysis::{decoder, verify_with, VerificationReport, DEFAULT_MAX_STATES};
use sldic_core::rates::{formula_rate, sweep_with, RatePoint};
use sldic_core::schemes::{build, classify_regime, Construction, Regime, SchemeDescription, Segment};
use sldic_core::{BitVector, ChannelParams, RateResult};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION: u8 = 2;
pub const EXIT_UNSUPPORTED: u8 = 3;
pub const EXIT_USAGE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "sldic", version, about = "Secure schemes for the 2-user symmetric deterministic interference channel with transmitter cooperation")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the scheme for (m, n, C) and dump its generator matrices.
    Encode(EncodeArgs),
    /// Build the scheme and certify decodability and perfect secrecy.
    Verify(VerifyArgs),
    /// Print the closed-form achievable secrecy rate.
    Rate(RateArgs),
    /// Tabulate the rate for C = 0..=cmax, certifying every point.
    Sweep(SweepArgs),
    /// Build and verify the showcase configurations.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ChannelArgs {
    /// Direct-link levels.
    #[arg(long)]
    pub m: usize,
    /// Cross-link levels.
    #[arg(long)]
    pub n: usize,
    /// Cooperative link capacity (bits per channel use per direction).
    #[arg(long = "c", default_value_t = 0)]
    pub c: usize,
}

impl ChannelArgs {
    pub fn params(&self) -> ChannelParams {
        ChannelParams::new(self.m, self.n, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[value(alias = "structured-text", alias = "structured")]
    Json,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Largest state space the enumeration method may visit.
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    pub max_states: u64,
    /// Seed for the randomized encode/transmit/decode round trips.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of randomized round trips.
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Defaults to json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Largest cooperation capacity in the sweep.
    #[arg(long)]
    pub cmax: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    pub max_states: u64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Directory receiving one scheme dump per configuration.
    #[arg(long, default_value = "demo-output")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    pub max_states: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("unsupported case in the {regime} regime: {reason}")]
    Unsupported { regime: Regime, reason: String },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Unsupported { .. } => EXIT_UNSUPPORTED,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }

    /// One-line JSON describing the failure.
    pub fn machine_readable(&self) -> String {
        let (status, regime) = match self {
            CliError::Usage(_) => ("usage_error", None),
            CliError::Io { .. } => ("io_error", None),
            CliError::Unsupported { regime, .. } => ("unsupported", Some(regime.as_str())),
            CliError::Verification(_) => ("verification_failed", None),
        };
        serde_json::json!({
            "status": status,
            "regime": regime,
            "reason": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

impl From<sldic_core::Error> for CliError {
    fn from(e: sldic_core::Error) -> Self {
        use sldic_core::Error as E;
        match e {
            E::Unsupported { regime, reason } => CliError::Unsupported { regime, reason },
            E::InconsistentMethods(msg) => CliError::Verification(format!("internal inconsistency: {msg}")),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub fn run(cfg: &CliConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.command {
        Command::Encode(a) => run_encode(a, stdout),
        Command::Verify(a) => run_verify(a, stdout).map(|_| ()),
        Command::Rate(a) => run_rate(a, stdout),
        Command::Sweep(a) => run_sweep(a, stdout),
        Command::Demo(a) => run_demo(a, stdout),
    }
}

/// Writes `text` to `path`, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    let (result, shown) = match path {
        Some(p) => (fs::write(p, text), p.display().to_string()),
        None => (stdout.write_all(text.as_bytes()), "<stdout>".to_string()),
    };
    result.map_err(|source| CliError::Io { path: shown, source })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn build_scheme(p: &ChannelParams) -> Result<SchemeDescription, CliError> {
    if p.m == 0 && p.n == 0 {
        return Err(CliError::Usage("m and n cannot both be zero".into()));
    }
    Ok(build(p)?)
}

pub fn run_encode(args: &EncodeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let s = build_scheme(&args.channel.params())?;
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&s).expect("scheme serializes") + "\n",
        Format::Csv => scheme_csv(&s),
    };
    emit(args.out.as_deref(), stdout, &text)
}

/// One row per transmitted level: `slot,transmitter,level,bits`, levels
/// counted from the bottom, bits ordered by source column.
fn scheme_csv(s: &SchemeDescription) -> String {
    let q = s.params.q();
    let mut out = String::from("slot,transmitter,level,bits\n");
    for (k, slot) in s.slots.iter().enumerate() {
        for tx in [1, 2] {
            let g = slot.generator(tx);
            for level in (1..=q).rev() {
                out.push_str(&format!("{},{tx},{level},{}\n", k + 1, g.row(q - level)));
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct RoundTrip {
    pub seed: u64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Serialize)]
pub struct VerifyOutcome {
    pub status: &'static str,
    pub params: ChannelParams,
    pub regime: Regime,
    pub construction: Construction,
    pub rate: RateResult,
    pub rate_value: String,
    pub report: VerificationReport,
    pub roundtrip: RoundTrip,
}

impl VerifyOutcome {
    pub fn ok(&self) -> bool {
        self.report.passed() && self.roundtrip.failures == 0
    }
}

/// Encodes random sources, sends them through the channel and decodes them
/// with each receiver's linear decoder.
fn round_trips(s: &SchemeDescription, seed: u64, trials: usize) -> Result<RoundTrip, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decoders = [decoder(s, 1)?, decoder(s, 2)?];
    let mut failures = 0;
    for _ in 0..trials {
        let src = BitVector::from_bits((0..s.layout.total()).map(|_| rng.random::<bool>()));
        let (y1, y2) = s.simulate(&src)?;
        for (dec, y, seg) in [(&decoders[0], &y1, Segment::W1), (&decoders[1], &y2, Segment::W2)] {
            let want = BitVector::from_bits(s.layout.columns(seg).map(|c| src.get(c)));
            let ok = match dec {
                Some(d) => d.decode(y)? == want,
                None => false,
            };
            failures += usize::from(!ok);
        }
    }
    Ok(RoundTrip { seed, trials, failures })
}

pub fn run_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<VerifyOutcome, CliError> {
    let p = args.channel.params();
    let s = build_scheme(&p)?;
    let report = verify_with(&s, args.max_states)?;
    let roundtrip = round_trips(&s, args.seed, args.trials)?;
    let mut outcome = VerifyOutcome {
        status: "ok",
        params: p,
        regime: s.regime,
        construction: s.construction,
        rate: s.rate,
        rate_value: s.rate.to_string(),
        report,
        roundtrip,
    };
    if !outcome.ok() {
        outcome.status = "verification_failed";
    }
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&outcome).expect("outcome serializes") + "\n",
        Format::Csv => {
            let r = &outcome.report;
            let v = reduced(&outcome.rate);
            format!(
                "m,n,C,regime,rate_num,rate_den,decodable_1,decodable_2,secret_1,secret_2,mi_bits_1,mi_bits_2,method,state_count,status\n\
                 {},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                p.m,
                p.n,
                p.c,
                outcome.regime,
                v.0,
                v.1,
                yes_no(r.decodable_1),
                yes_no(r.decodable_2),
                yes_no(r.secret_1),
                yes_no(r.secret_2),
                r.mi_bits_1,
                r.mi_bits_2,
                serde_json::to_value(r.method).unwrap().as_str().unwrap(),
                r.state_count,
                outcome.status
            )
        }
    };
    emit(args.out.as_deref(), stdout, &text)?;
    if outcome.ok() {
        Ok(outcome)
    } else {
        Err(CliError::Verification(format!(
            "m={} n={} C={}: decodable=({}, {}) secret=({}, {}) roundtrip failures={}",
            p.m,
            p.n,
            p.c,
            outcome.report.decodable_1,
            outcome.report.decodable_2,
            outcome.report.secret_1,
            outcome.report.secret_2,
            outcome.roundtrip.failures
        )))
    }
}

fn reduced(rate: &RateResult) -> (usize, usize) {
    let v = rate.value();
    (*v.numer(), *v.denom())
}

pub fn run_rate(args: &RateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = args.channel.params();
    if p.m == 0 && p.n == 0 {
        return Err(CliError::Usage("m and n cannot both be zero".into()));
    }
    let regime = classify_regime(&p)?;
    let rate = formula_rate(&p)?;
    let (num, den) = reduced(&rate);
    let text = match args.format.unwrap_or(Format::Json) {
        Format::Json => {
            serde_json::json!({
                "params": p,
                "regime": regime,
                "rate": format!("{num}/{den}"),
                "rate_value": rate.as_f64(),
                "conjecture": sldic_core::rates::is_conjectured(&p),
            })
            .to_string()
                + "\n"
        }
        Format::Csv => format!("m,n,C,regime,rate_num,rate_den,rate\n{},{},{},{regime},{num},{den},{}\n", p.m, p.n, p.c, rate.as_f64()),
    };
    emit(None, stdout, &text)
}

/// CSV with header `C,rate_num,rate_den,rate,regime,verified`; the fraction
/// is reduced and `rate` is its decimal value.
pub fn sweep_csv(points: &[RatePoint]) -> String {
    let mut out = String::from("C,rate_num,rate_den,rate,regime,verified\n");
    for p in points {
        let (num, den) = reduced(&p.rate);
        let regime = p.regime.map_or("degenerate", |r| r.as_str());
        let verified = match p.verified {
            Some(true) => "yes",
            Some(false) => "no",
            None => "na",
        };
        out.push_str(&format!("{},{num},{den},{},{regime},{verified}\n", p.c, p.rate.as_f64()));
    }
    out
}

pub fn run_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let points = sweep_with(args.m, args.n, args.cmax, args.max_states);
    let text = match args.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&points),
        Format::Json => serde_json::to_string_pretty(&points).expect("points serialize") + "\n",
    };
    emit(args.out.as_deref(), stdout, &text)
}

/// The showcase configurations and the rate each must reach.
pub fn demo_cases() -> Vec<(ChannelParams, RateResult)> {
    vec![
        (ChannelParams::new(4, 2, 0), RateResult::integer(2)),
        (ChannelParams::new(4, 2, 2), RateResult::integer(4)),
        (ChannelParams::new(5, 4, 0), RateResult::integer(2)),
        (ChannelParams::new(5, 4, 1), RateResult::integer(3)),
        (ChannelParams::new(5, 4, 4), RateResult::integer(5)),
        (ChannelParams::new(2, 4, 2), RateResult::new(5, 2)),
    ]
}

pub fn run_demo(args: &DemoArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;

    let mut failures = Vec::new();
    let mut table = String::new();
    for (p, expected) in demo_cases() {
        let s = build_scheme(&p)?;
        let report = verify_with(&s, args.max_states)?;
        let good = report.passed() && s.rate == expected;
        table.push_str(&format!(
            "m={} n={} C={} R_S={} expected={} regime={} decodable={} secret={} I(W1;y2)={} I(W2;y1)={} method={} {}\n",
            p.m,
            p.n,
            p.c,
            s.rate,
            expected,
            s.regime,
            yes_no(report.decodable_1 && report.decodable_2),
            yes_no(report.secret_1 && report.secret_2),
            report.mi_bits_1,
            report.mi_bits_2,
            serde_json::to_value(report.method).unwrap().as_str().unwrap(),
            if good { "OK" } else { "FAIL" },
        ));
        if !good {
            failures.push(format!("m={} n={} C={}", p.m, p.n, p.c));
        }
        let dump = serde_json::json!({ "scheme": s, "report": report });
        let path = args.out.join(format!("scheme_m{}_n{}_c{}.json", p.m, p.n, p.c));
        fs::write(&path, serde_json::to_string_pretty(&dump).unwrap() + "\n").map_err(io_err(&path))?;
    }
    emit(None, stdout, &table)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failures.join("; ")))
    }
}
