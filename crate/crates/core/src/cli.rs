//! The `rbc` command line: argument definitions and the four subcommands.
//!
//! Every command writes to caller-supplied streams and returns its exit
//! code, so the binary is a thin wrapper.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::adversary::{run_attack, AttackOutcome, AttackStrategy};
use crate::agents::HonestAlice;
use crate::analysis::CapacityReport;
use crate::codec::Bit;
use crate::netsim::{run_protocol, SimConfig, Transcript};
use crate::spacetime::{ProtocolParams, Site};
use crate::time::Seconds;
use crate::verifier::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ABORT: i32 = 2;
pub const EXIT_REJECT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "rbc",
    version,
    about = "Relativistic two-site bit commitment simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate an honest commitment and write its transcript.
    Run(RunArgs),
    /// Check a transcript and print the verdict.
    Verify(VerifyArgs),
    /// Estimate a cheating strategy's success rate.
    Attack(AttackArgs),
    /// Report traffic growth and the number of rounds a channel sustains.
    Capacity(CapacityArgs),
}

#[derive(Args, Debug, Clone)]
pub struct TimingArgs {
    /// Site separation in light-seconds.
    #[arg(long, default_value = "1.0")]
    pub dx: Seconds,
    /// Placement tolerance in seconds [default: dx/10^4].
    #[arg(long)]
    pub delta: Option<Seconds>,
    /// Transmission window in seconds [default: dx/10^3].
    #[arg(long)]
    pub dt: Option<Seconds>,
}

impl TimingArgs {
    pub fn params(&self, m: u32) -> Result<ProtocolParams, String> {
        let dx = self.dx;
        let delta = self
            .delta
            .unwrap_or(Seconds::from_atto(dx.as_atto() / 10_000));
        let dt = self.dt.unwrap_or(Seconds::from_atto(dx.as_atto() / 1_000));
        ProtocolParams::new(m, dx, delta, dt).map_err(|e| e.to_string())
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Security parameter; residues are taken mod 2^m.
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub rounds: u32,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub bit: u8,
    #[command(flatten)]
    pub timing: TimingArgs,
    #[arg(long, default_value_t = 0)]
    pub alice_seed: u64,
    #[arg(long, default_value_t = 0)]
    pub bob_seed: u64,
    /// Transcript path; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Unveil from both sites.
    #[arg(long)]
    pub dual_unveil: bool,
    /// Same-site message delay in seconds, within [0, 2 delta] [default: delta].
    #[arg(long)]
    pub intra_delay: Option<Seconds>,
    /// Site (1 or 2) where Bob aggregates.
    #[arg(long, value_parser = parse_site)]
    pub hq_site: Option<Site>,
    /// Record a test-signal echo at each site.
    #[arg(long)]
    pub handshake: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub transcript: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Args, Debug)]
pub struct AttackArgs {
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub rounds: u32,
    /// offset-guess or honest-relabel.
    #[arg(long)]
    pub strategy: AttackStrategy,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub timing: TimingArgs,
    #[arg(long, env = "RBC_FORMAT", value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    #[arg(long, default_value_t = 10)]
    pub m: u32,
    #[command(flatten)]
    pub timing: TimingArgs,
    /// Channel rate in bits per second; a positive integer, e.g. 1e11.
    #[arg(long, value_parser = parse_baud)]
    pub baud: u64,
    #[arg(long, env = "RBC_FORMAT", value_enum, default_value = "json")]
    pub format: Format,
}

fn parse_site(s: &str) -> Result<Site, String> {
    match s {
        "1" => Ok(Site::One),
        "2" => Ok(Site::Two),
        _ => Err(format!("site must be 1 or 2, got {s:?}")),
    }
}

fn parse_baud(s: &str) -> Result<u64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() || v < 1.0 || v.fract() != 0.0 || v >= u64::MAX as f64 {
        return Err(format!("baud must be a positive integer, got {s:?}"));
    }
    Ok(v as u64)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let params = match args.timing.params(args.m) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let config = SimConfig {
        intra_delay: args.intra_delay,
        dual_unveil: args.dual_unveil,
        hq_site: args.hq_site,
        handshake: args.handshake,
    };
    let bit = Bit::from_bool(args.bit == 1);
    let sim = match run_protocol(
        params,
        args.rounds,
        bit,
        args.alice_seed,
        args.bob_seed,
        &HonestAlice,
        &config,
    ) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let text = sim.transcript.to_json();
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    match &sim.transcript.abort {
        Some(reason) => {
            let _ = writeln!(err, "protocol aborted: {reason}");
            EXIT_ABORT
        }
        None => EXIT_OK,
    }
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match fs::read_to_string(&args.transcript) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", args.transcript.display());
            return EXIT_USAGE;
        }
    };
    let transcript = match Transcript::from_json(&text) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: malformed transcript: {e}");
            return EXIT_USAGE;
        }
    };
    let verdict = verify(&transcript);
    let _ = out.write_all(pretty(&verdict.record()).as_bytes());
    if verdict.accepted_bit().is_some() {
        EXIT_OK
    } else {
        EXIT_REJECT
    }
}

fn attack_table(o: &AttackOutcome) -> String {
    let mut rows = vec![
        ("strategy", o.strategy.to_string()),
        ("m", o.m.to_string()),
        ("rounds", o.rounds.to_string()),
        ("trials", o.trials.to_string()),
        ("successes", o.successes.to_string()),
        ("success_rate", format!("{:.6}", o.success_rate)),
        ("std_error", format!("{:.6}", o.std_error)),
    ];
    if let (Some(rate), Some(exact)) = (o.oracle_rate, &o.oracle_exact) {
        rows.push(("oracle_rate", format!("{rate:.6} ({exact})")));
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

pub fn cmd_attack(args: &AttackArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let params = match args.timing.params(args.m) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    match run_attack(params, args.rounds, args.strategy, args.trials, args.seed) {
        Ok(outcome) => {
            let text = match args.format {
                Format::Json => pretty(&outcome),
                Format::Table => attack_table(&outcome),
            };
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn cmd_capacity(args: &CapacityArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let params = match args.timing.params(args.m) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let report = CapacityReport::new(&params, args.baud);
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Table => report.to_table(),
    };
    let _ = out.write_all(text.as_bytes());
    EXIT_OK
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Attack(a) => cmd_attack(a, out, err),
        Command::Capacity(a) => cmd_capacity(a, out, err),
    }
}

/// Parses `argv` and runs the command. Usage errors exit 1; `--help` and
/// `--version` print to `out` and exit 0.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            }
        }
    }
}
