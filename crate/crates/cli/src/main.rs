mod commands;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use ulc_core::stepfn::StepFunctionSpec;
use ulc_core::twisted::CfNumber;
use ulc_core::{BigInt, BigRational, RatInterval};

use crate::error::{CliError, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
use crate::report::{emit, render, Emit, Format};

#[derive(Parser, Debug)]
#[command(name = "ulc", version, about = "Exact certificates for uniform multiplicative Diophantine approximation")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Write the report here (plus `<out>.manifest.json`) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Worker threads; the output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Add `elapsed_ms` to the JSON report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Continued fraction and convergents of a rational or a periodic expansion.
    Cf(CfArgs),
    /// Zaremba numerators u/q in F_m.
    Zaremba(ZarembaArgs),
    /// Share of primes in [γT, T] with |M_q| >= q^σ.
    Density(DensityArgs),
    /// Exceptional set and exponential-sum checks for a product set mod N.
    Productset(ProductsetArgs),
    /// Search witness quadruples (p, q, r, s).
    Witness(WitnessArgs),
    /// Nested-interval construction with per-level certificates.
    Build(BuildArgs),
    /// Liouville-type ξ against a badly approximable ζ.
    Twisted(TwistedArgs),
    /// p-adic, S-twisted and singleton-complement constructions.
    Sarith(SarithArgs),
    /// Q · min_{n<=Q} Π ‖n x_i‖ at points or over boxes.
    Eval(EvalArgs),
    /// Optimal (d, β) and the resulting constant.
    Optimize(OptimizeArgs),
}

fn rational(s: &str) -> Result<BigRational, String> {
    ulc_core::ratcore::parse_rational(s).map_err(|e| e.to_string())
}

/// `lo:hi`, inclusive.
fn range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: u64 = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let hi: u64 = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

/// A point `a/b` or a box `lo:hi`.
fn point_or_box(s: &str) -> Result<RatInterval, String> {
    if s.contains(':') {
        s.parse::<RatInterval>().map_err(|e| e.to_string())
    } else {
        rational(s).map(RatInterval::point)
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["x", "number"])))]
pub struct CfArgs {
    /// A rational `a/b`.
    #[arg(long, value_parser = rational)]
    pub x: Option<BigRational>,
    /// `golden`, `sqrt2`, `sqrt3` or `a0;prefix|period`.
    #[arg(long)]
    pub number: Option<CfNumber>,
    /// Largest convergent denominator listed for `--number`.
    #[arg(long, default_value = "1000000")]
    pub qmax: BigInt,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("denominators").required(true).args(["q", "range"])))]
pub struct ZarembaArgs {
    #[arg(long)]
    pub q: Option<u64>,
    /// Every denominator in `lo:hi`.
    #[arg(long, value_parser = range)]
    pub range: Option<(u64, u64)>,
    #[arg(long)]
    pub m: u64,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long = "T")]
    pub t: u64,
    #[arg(long, value_parser = rational, default_value = "1/2")]
    pub gamma: BigRational,
    #[arg(long)]
    pub m: u64,
    /// Defaults to the tabulated 2δ - 1.001 when known for `m`.
    #[arg(long, value_parser = rational)]
    pub sigma: Option<BigRational>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("residues").required(true).args(["set", "m"])))]
pub struct ProductsetArgs {
    /// Prime modulus.
    #[arg(long = "N")]
    pub n: u64,
    /// Explicit residues.
    #[arg(long = "M", value_delimiter = ',')]
    pub set: Option<Vec<u64>>,
    /// Use the Zaremba numerators of N with bound m.
    #[arg(long)]
    pub m: Option<u64>,
    /// Window {L+1, ..., L+H}; middle third when omitted.
    #[arg(long = "L", requires = "window_len")]
    pub window_start: Option<u64>,
    #[arg(long = "H", id = "window_len", requires = "window_start")]
    pub window_len: Option<u64>,
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long, value_parser = rational)]
    pub tau: BigRational,
    /// Prime range `lo:hi` for q.
    #[arg(long, value_parser = range)]
    pub range: (u64, u64),
    #[arg(long = "I")]
    pub i: RatInterval,
    #[arg(long = "J")]
    pub j: RatInterval,
    /// Stop after this many witnesses in canonical order; 0 for no limit.
    #[arg(long, default_value = "10000")]
    pub max_witnesses: usize,
    #[arg(long, value_parser = rational, default_value = "0")]
    pub left_margin: BigRational,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum StrategyArg {
    Auto,
    Inversion,
    FractionScan,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long, value_parser = rational)]
    pub tau: BigRational,
    #[arg(long)]
    pub steps: usize,
    /// Taken from the optimizer for (m, τ) when omitted.
    #[arg(long, value_parser = rational, requires = "beta")]
    pub d: Option<BigRational>,
    #[arg(long, value_parser = rational, requires = "d")]
    pub beta: Option<BigRational>,
    /// α as a fraction of β.
    #[arg(long, value_parser = rational, default_value = "999999/1000000", conflicts_with = "alpha")]
    pub alpha_ratio: BigRational,
    #[arg(long, value_parser = rational)]
    pub alpha: Option<BigRational>,
    /// Level-0 prime range `lo:hi`.
    #[arg(long, value_parser = range)]
    pub prime_range: (u64, u64),
    #[arg(long = "I", default_value = "1/5:4/5")]
    pub i: RatInterval,
    #[arg(long = "J", default_value = "1/5:4/5")]
    pub j: RatInterval,
    #[arg(long)]
    pub max_prime: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TwistedArgs {
    /// Badly approximable ζ as a continued fraction.
    #[arg(long, default_value = "golden")]
    pub zeta: CfNumber,
    #[arg(long, default_value = "identity")]
    pub phi: StepFunctionSpec,
    #[arg(long, default_value = "one")]
    pub psi: StepFunctionSpec,
    #[arg(long)]
    pub levels: usize,
    #[arg(long = "I0", default_value = "1/5:4/5")]
    pub i0: RatInterval,
    #[arg(long, default_value = "10000")]
    pub scan_to: u64,
    #[arg(long)]
    pub cutoff: Option<BigInt>,
}

#[derive(Args, Debug)]
pub struct SarithArgs {
    #[command(subcommand)]
    pub mode: SarithMode,
}

#[derive(Subcommand, Debug)]
pub enum SarithMode {
    /// Nested intervals around u/p^a with p-adically weighted certificates.
    Padic {
        #[arg(long)]
        p: u64,
        /// β schedule `b0,b1,...`, the last value repeating.
        #[arg(long, value_parser = rational, value_delimiter = ',', default_value = "1/10")]
        beta: Vec<BigRational>,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value = "4")]
        a0: u32,
    },
    /// Φ-twisted construction with q = base^a and an S-norm weight.
    Twisted {
        /// `include:p1,p2` or `exclude:p1,...`.
        #[arg(long = "S")]
        s: ulc_core::sarith::SSpec,
        #[arg(long, default_value = "2")]
        base: u64,
        #[arg(long, default_value = "sqrt")]
        phi: StepFunctionSpec,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value = "4096")]
        max_exponent: u32,
    },
    /// Q min_{q<=Q} ‖qξ‖ |q|_S with S every prime but one.
    Singleton {
        #[arg(long, default_value = "sqrt2")]
        xi: CfNumber,
        #[arg(long)]
        exclude: u64,
        /// Ascending list of Q.
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        q: Vec<BigInt>,
    },
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("qs").required(true).args(["q", "q_range"])))]
pub struct EvalArgs {
    /// Components, each a point `a/b` or a box `lo:hi`.
    #[arg(long, value_parser = point_or_box, value_delimiter = ',', required = true)]
    pub x: Vec<RatInterval>,
    /// Ascending list of Q.
    #[arg(long = "Q", value_delimiter = ',')]
    pub q: Option<Vec<BigInt>>,
    /// Every Q in `lo:hi`.
    #[arg(long = "Q-range", value_parser = range)]
    pub q_range: Option<(u64, u64)>,
    /// Also report (Q/Ψ(Q)) times the minimum.
    #[arg(long)]
    pub psi: Option<StepFunctionSpec>,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long, value_parser = rational, default_value = "1")]
    pub tau: BigRational,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Cf(_) => "cf",
            Self::Zaremba(_) => "zaremba",
            Self::Density(_) => "density",
            Self::Productset(_) => "productset",
            Self::Witness(_) => "witness",
            Self::Build(_) => "build",
            Self::Twisted(_) => "twisted",
            Self::Sarith(_) => "sarith",
            Self::Eval(_) => "eval",
            Self::Optimize(_) => "optimize",
        }
    }
}

fn dispatch(cmd: &Command) -> Result<report::Report, CliError> {
    match cmd {
        Command::Cf(a) => commands::cf(a),
        Command::Zaremba(a) => commands::zaremba(a),
        Command::Density(a) => commands::density(a),
        Command::Productset(a) => commands::productset(a),
        Command::Witness(a) => commands::witness(a),
        Command::Build(a) => commands::build(a),
        Command::Twisted(a) => commands::twisted(a),
        Command::Sarith(a) => commands::sarith(&a.mode),
        Command::Eval(a) => commands::eval(a),
        Command::Optimize(a) => commands::optimize(a),
    }
}

fn run(cli: &Cli, args: &[String]) -> Result<i32, CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let started = Instant::now();
    let mut report = dispatch(&cli.command)?;
    let wall_ms = started.elapsed().as_millis() as u64;
    if cli.global.timing {
        if let Some(obj) = report.json.as_object_mut() {
            obj.insert("elapsed_ms".into(), wall_ms.into());
        }
    }
    let name = cli.command.name();
    let bytes = render(&report, cli.global.format, name)?;
    let exit_code = if report.failures.is_empty() { EXIT_OK } else { EXIT_VERIFY };
    emit(&bytes, &Emit { command: name, args, format: cli.global.format, out: cli.global.out.as_deref(), wall_ms, exit_code })?;
    for f in &report.failures {
        eprintln!("verification failed: {f}");
    }
    Ok(exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match run(&cli, &args) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            match code {
                EXIT_USAGE => eprintln!("error: {e}"),
                _ => eprintln!("verification failed: {e}"),
            }
            code
        }
    };
    ExitCode::from(code as u8)
}
