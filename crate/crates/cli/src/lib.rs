//! Command-line front end: argument parsing, prime-table caching and report
//! emission for every module of `ps4`.

pub mod emit;

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use ps4::arith::cache;
use ps4::bounds::{self, AffineExponent, ExponentPair, Rational};
use ps4::expsum::{eval_s, phase_error_budget, ExpSumSpec, Weight};
use ps4::gamma::{find_solution, gamma_parts, ternary_count, RunParams, SearchOutcome, SearchRange, TernaryReport};
use ps4::smoothing::SmoothingKernel;
use ps4::stats::{chi4_phi_sum, hooley_report, linnik_partial, singular_product, HooleyRange};
use ps4::{par, PrimeTable, SieveConfig};

pub use emit::{emit_report, format_float, Format};

/// A real flag: a decimal or an exact `p/q`.
fn real(s: &str) -> Result<f64, String> {
    if s.contains('/') {
        return Rational::from_str(s).map(|r| r.to_f64()).map_err(|e| e.to_string());
    }
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// An exact flag: `p/q` or an integer; decimals would round silently.
fn exact(s: &str) -> Result<Rational, String> {
    Rational::from_str(s).map_err(|_| format!("{s:?} is not an exact rational; write it as p/q"))
}

/// `X=a:b:steps`: `steps` equally spaced values from `a` to `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.to } else { self.from + h * i as f64 })
            .collect()
    }
}

fn sweep(s: &str) -> Result<Sweep, String> {
    let body = s.strip_prefix("X=").ok_or("expected X=a:b:steps")?;
    let parts: Vec<&str> = body.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err("expected X=a:b:steps".into());
    };
    let (from, to) = (real(a)?, real(b)?);
    let steps: usize = n.parse().map_err(|_| format!("{n:?} is not a step count"))?;
    if steps == 0 || to < from {
        return Err("need steps >= 1 and a <= b".into());
    }
    Ok(Sweep { from, to, steps })
}

#[derive(Parser, Debug, Clone)]
#[command(name = "ps4", version, about = "Prime quadruple counts, exponential sums and exponent bookkeeping")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for cached prime tables.
    #[arg(long, global = true, env = cache::CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeArg {
    Theorem,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    /// `ln p` on primes.
    Log,
    /// `Lambda(n)` on prime powers.
    Mangoldt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Theta,
    Fourier,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Sieve primes up to a limit (and cache them).
    Sieve {
        #[arg(long)]
        limit: u64,
    },
    /// Find one quadruple with a shifted-sum-of-two-squares first prime.
    Solve {
        #[arg(long = "N", value_parser = real)]
        n: f64,
        #[arg(long, value_parser = real)]
        c: f64,
        #[arg(long, value_parser = real)]
        eps: f64,
        #[arg(long, value_enum, default_value = "theorem")]
        range: RangeArg,
    },
    /// Raw and smoothed quadruple counts with the divisor-range split.
    Gamma(GammaArgs),
    /// Weighted count of prime triples.
    Ternary {
        #[arg(long = "N", value_parser = real)]
        n: f64,
        #[arg(long, value_parser = real)]
        c: f64,
        #[arg(long, value_parser = real)]
        eps: f64,
    },
    /// One value of the prime exponential sum.
    Expsum {
        #[arg(long, value_parser = real)]
        c: f64,
        #[arg(long, value_parser = real, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, value_parser = real)]
        lo: f64,
        #[arg(long, value_parser = real)]
        hi: f64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        l: i64,
        #[arg(long, default_value_t = 1)]
        d: u64,
        #[arg(long, value_enum, default_value = "log")]
        weight: WeightArg,
    },
    /// Sample the smoothing kernel or its transform.
    Kernel(KernelArgs),
    #[command(subcommand)]
    Bounds(BoundsCmd),
    #[command(subcommand)]
    Stats(StatsCmd),
}

#[derive(Args, Debug, Clone, PartialEq)]
#[command(group(ArgGroup::new("size").required(true).args(["n", "x", "sweep"])))]
pub struct GammaArgs {
    #[arg(long = "N", value_parser = real)]
    pub n: Option<f64>,
    /// Uses `N = 3 X^c`.
    #[arg(long = "X", value_parser = real)]
    pub x: Option<f64>,
    #[arg(long, value_parser = real)]
    pub c: f64,
    #[arg(long, value_parser = real)]
    pub eps: f64,
    #[arg(long = "A", value_parser = real, default_value = "1")]
    pub a: f64,
    /// Divisor cut; defaults to `sqrt(X) / ln^A X`.
    #[arg(long = "D", value_parser = real)]
    pub d: Option<f64>,
    /// `X=a:b:steps`, one report per `X` with `N = 3 X^c`.
    #[arg(long, value_parser = sweep)]
    pub sweep: Option<Sweep>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct KernelArgs {
    #[arg(long, value_parser = real)]
    pub a: Option<f64>,
    #[arg(long, value_parser = real)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    /// With `--X`, the kernel of a run: `a = 0.9 eps`, `delta = 0.1 eps`.
    #[arg(long, value_parser = real, conflicts_with_all = ["a", "delta", "k"])]
    pub eps: Option<f64>,
    #[arg(long = "X", value_parser = real, requires = "eps")]
    pub x: Option<f64>,
    #[arg(long, value_enum, default_value = "theta")]
    pub grid: GridArg,
    #[arg(long, default_value_t = 201)]
    pub n: usize,
    /// Right end of the transform grid; defaults to where the envelope drops below 1e-12.
    #[arg(long, value_parser = real)]
    pub x_max: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum BoundsCmd {
    /// Apply a word of A and B processes to (0, 1), right to left.
    Pairs {
        #[arg(long)]
        word: String,
    },
    /// The largest admissible exponent c.
    Threshold,
    /// Exponents of the sup bound and the third and fourth moments at c.
    Chain {
        #[arg(long, value_parser = exact)]
        c: Rational,
    },
    /// Every term of the sup bound at c.
    Sup {
        #[arg(long, value_parser = exact)]
        c: Rational,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum StatsCmd {
    /// Sum of r(p - 1) against its main term.
    #[command(group(ArgGroup::new("size").required(true).args(["x", "sweep"])))]
    Linnik {
        #[arg(long = "X", value_parser = real)]
        x: Option<f64>,
        #[arg(long, value_parser = sweep)]
        sweep: Option<Sweep>,
    },
    /// The Euler product over 2 < p <= plimit.
    Singular {
        #[arg(long)]
        plimit: u64,
    },
    /// Partial sum of chi_4(d) / phi(d).
    Chi4phi {
        #[arg(long = "D", value_parser = real)]
        d: f64,
    },
    /// Divisors of p - 1 near sqrt X.
    #[command(group(ArgGroup::new("size").required(true).args(["x", "sweep"])))]
    Hooley {
        #[arg(long, value_parser = real)]
        omega: f64,
        #[arg(long = "X", value_parser = real)]
        x: Option<f64>,
        #[arg(long, value_parser = sweep)]
        sweep: Option<Sweep>,
    },
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output: Format,
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad command line; exit code 1.
    Usage(clap::Error),
    /// Valid command that the library rejected or could not complete; exit code 2.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
        }
    }

    /// Usage errors as clap renders them; domain errors as JSON.
    pub fn print(&self) -> std::io::Result<()> {
        match self {
            CliError::Usage(e) => e.print(),
            CliError::Domain(_) => writeln!(std::io::stderr(), "{}", self.to_json()),
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}`.
    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(e) => {
                // clap's message up to the usage block, on one line.
                let text = e.render().to_string();
                let head: Vec<&str> = text.lines().take_while(|l| !l.trim().is_empty()).map(str::trim).collect();
                ("usage", head.join(" "))
            }
            CliError::Domain(m) => ("domain", m.clone()),
        };
        json!({"error": {"kind": kind, "message": message}}).to_string()
    }
}

fn domain<E: Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

fn usage(kind: ErrorKind, msg: impl Display) -> CliError {
    CliError::Usage(Cli::command().error(kind, msg))
}

/// Parse `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Usage)?;
    if let Command::Kernel(k) = &cli.command {
        let explicit = k.a.is_some() && k.delta.is_some();
        let run = k.eps.is_some() && k.x.is_some();
        if !explicit && !run {
            return Err(usage(
                ErrorKind::MissingRequiredArgument,
                "kernel needs --a and --delta (optionally --k), or --eps with --X",
            ));
        }
    }
    if cli.threads == Some(0) {
        return Err(usage(ErrorKind::ValueValidation, "--threads must be at least 1"));
    }
    Ok(RunConfig {
        command: cli.command,
        output: cli.format,
        cache_dir: cli.cache_dir,
        threads: cli.threads,
    })
}

fn table(cfg: &RunConfig, upto: f64) -> Result<PrimeTable, CliError> {
    if !(upto.is_finite() && upto >= 0.0) {
        return Err(CliError::Domain(format!("prime range up to {upto} is not usable")));
    }
    let limit = (upto.ceil() as u64).max(100);
    cache::load_or_sieve(limit, cfg.cache_dir.as_deref(), &SieveConfig::default()).map_err(domain)
}

fn render<T: Serialize + ?Sized>(cfg: &RunConfig, report: &T) -> Result<String, CliError> {
    emit_report(report, cfg.output).map_err(domain)
}

#[derive(Serialize)]
struct SieveReport {
    limit: u64,
    prime_count: usize,
    largest_prime: Option<u64>,
}

#[derive(Serialize)]
struct SolveReport {
    n: f64,
    c: f64,
    epsilon: f64,
    range: RangeArg,
    #[serde(flatten)]
    outcome: SearchOutcome,
}

#[derive(Serialize)]
struct TernaryOut {
    n0: f64,
    c: f64,
    epsilon: f64,
    #[serde(flatten)]
    report: TernaryReport,
}

#[derive(Serialize)]
struct ExpSumOut {
    re: f64,
    im: f64,
    abs: f64,
    phase_error_budget: f64,
}

#[derive(Serialize)]
struct ThetaRow {
    y: f64,
    theta: f64,
}

#[derive(Serialize)]
struct FourierRow {
    x: f64,
    #[serde(rename = "Theta")]
    theta_hat: f64,
    envelope: f64,
}

#[derive(Serialize)]
struct PairOut {
    word: String,
    kappa: Rational,
    lambda: Rational,
    kappa_decimal: f64,
    lambda_decimal: f64,
}

#[derive(Serialize)]
struct ThresholdOut {
    num: i64,
    den: i64,
    decimal: f64,
}

#[derive(Serialize)]
struct ExponentOut {
    exponent: AffineExponent,
    at_c: Rational,
    decimal: f64,
}

impl ExponentOut {
    fn new(e: &AffineExponent, c: &Rational) -> Self {
        let at_c = e.eval(c);
        Self {
            exponent: e.clone(),
            decimal: at_c.to_f64(),
            at_c,
        }
    }
}

#[derive(Serialize)]
struct ChainOut {
    c: Rational,
    c_decimal: f64,
    sup: ExponentOut,
    e2: ExponentOut,
    psi1: ExponentOut,
    e3: ExponentOut,
    psi2: ExponentOut,
    e4: ExponentOut,
    /// `(4 - c)` minus the minor-arc exponent; positive below the threshold.
    margin: Rational,
}

fn execute_gamma(cfg: &RunConfig, g: &GammaArgs) -> Result<String, CliError> {
    let params: Vec<RunParams> = match (&g.sweep, g.x, g.n) {
        (Some(s), _, _) => s
            .values()
            .into_iter()
            .map(|x| RunParams::from_x(x, g.c, g.eps, g.a, g.d))
            .collect::<Result<_, _>>()
            .map_err(domain)?,
        (None, Some(x), _) => vec![RunParams::from_x(x, g.c, g.eps, g.a, g.d).map_err(domain)?],
        (None, None, Some(n)) => vec![RunParams::new(n, g.c, g.eps, g.a, g.d).map_err(domain)?],
        (None, None, None) => unreachable!("clap requires one of --N, --X, --sweep"),
    };
    let top = params.iter().map(|p| p.x()).fold(0.0, f64::max);
    let t = table(cfg, top)?;
    let reports = params
        .iter()
        .map(|p| gamma_parts(p, &t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(domain)?;
    if g.sweep.is_some() {
        render(cfg, &reports)
    } else {
        render(cfg, &reports[0])
    }
}

fn execute_kernel(cfg: &RunConfig, k: &KernelArgs) -> Result<String, CliError> {
    let kernel = match (k.eps, k.x) {
        (Some(eps), Some(x)) => SmoothingKernel::for_run(eps, x),
        _ => SmoothingKernel::new(k.a.unwrap_or_default(), k.delta.unwrap_or_default(), k.k.unwrap_or(4)),
    }
    .map_err(domain)?;
    if k.n == 0 {
        return Err(CliError::Domain("--n must be positive".into()));
    }
    match k.grid {
        GridArg::Theta => {
            let rows: Vec<ThetaRow> = kernel.theta_grid(k.n).into_iter().map(|(y, theta)| ThetaRow { y, theta }).collect();
            render(cfg, &rows)
        }
        GridArg::Fourier => {
            let x_max = k.x_max.unwrap_or_else(|| kernel.envelope_cutoff(1e-12));
            let rows: Vec<FourierRow> = kernel
                .fourier_grid(x_max, k.n)
                .into_iter()
                .map(|(x, theta_hat, envelope)| FourierRow { x, theta_hat, envelope })
                .collect();
            render(cfg, &rows)
        }
    }
}

fn execute_bounds(cfg: &RunConfig, b: &BoundsCmd) -> Result<String, CliError> {
    match b {
        BoundsCmd::Pairs { word } => {
            let p = bounds::apply_word(word, &ExponentPair::trivial()).map_err(domain)?;
            render(
                cfg,
                &PairOut {
                    word: word.to_ascii_uppercase(),
                    kappa_decimal: p.kappa.to_f64(),
                    lambda_decimal: p.lambda.to_f64(),
                    kappa: p.kappa,
                    lambda: p.lambda,
                },
            )
        }
        BoundsCmd::Threshold => {
            let c = bounds::c_threshold().map_err(domain)?;
            let small = |v: &dyn Display| v.to_string().parse::<i64>().map_err(domain);
            render(
                cfg,
                &ThresholdOut {
                    num: small(c.numer())?,
                    den: small(c.denom())?,
                    decimal: c.to_f64(),
                },
            )
        }
        BoundsCmd::Chain { c } => {
            let ch = bounds::l_moment_chain(c).map_err(domain)?;
            render(
                cfg,
                &ChainOut {
                    c: c.clone(),
                    c_decimal: c.to_f64(),
                    sup: ExponentOut::new(&ch.sup, c),
                    e2: ExponentOut::new(&ch.e2, c),
                    psi1: ExponentOut::new(&ch.psi1, c),
                    e3: ExponentOut::new(&ch.e3, c),
                    psi2: ExponentOut::new(&ch.psi2, c),
                    e4: ExponentOut::new(&ch.e4, c),
                    margin: bounds::gamma32_margin(c).map_err(domain)?,
                },
            )
        }
        BoundsCmd::Sup { c } => render(cfg, &bounds::sup_s_report(c).map_err(domain)?),
    }
}

fn execute_stats(cfg: &RunConfig, s: &StatsCmd) -> Result<String, CliError> {
    match s {
        StatsCmd::Linnik { x, sweep } => {
            let xs = sweep.as_ref().map(Sweep::values).unwrap_or_else(|| vec![x.unwrap_or_default()]);
            let t = table(cfg, xs.iter().copied().fold(0.0, f64::max))?;
            let rows = xs.iter().map(|&x| linnik_partial(x, &t)).collect::<Result<Vec<_>, _>>().map_err(domain)?;
            if sweep.is_some() {
                render(cfg, &rows)
            } else {
                render(cfg, &rows[0])
            }
        }
        StatsCmd::Singular { plimit } => {
            let t = table(cfg, *plimit as f64)?;
            render(cfg, &singular_product(*plimit, &t).map_err(domain)?)
        }
        StatsCmd::Chi4phi { d } => {
            let t = table(cfg, *d)?;
            render(cfg, &chi4_phi_sum(*d, &t).map_err(domain)?)
        }
        StatsCmd::Hooley { omega, x, sweep } => {
            let xs = sweep.as_ref().map(Sweep::values).unwrap_or_else(|| vec![x.unwrap_or_default()]);
            let t = table(cfg, xs.iter().copied().fold(0.0, f64::max))?;
            let rows = xs
                .iter()
                .map(|&x| HooleyRange::new(x, *omega).and_then(|r| hooley_report(&r, &t)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(domain)?;
            if sweep.is_some() {
                render(cfg, &rows)
            } else {
                render(cfg, &rows[0])
            }
        }
    }
}

/// Run a validated config and return the rendered report.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    match &cfg.command {
        Command::Sieve { limit } => {
            let t = cache::load_or_sieve(*limit, cfg.cache_dir.as_deref(), &SieveConfig::default()).map_err(domain)?;
            render(
                cfg,
                &SieveReport {
                    limit: t.limit(),
                    prime_count: t.primes().len(),
                    largest_prime: t.primes().last().copied(),
                },
            )
        }
        Command::Solve { n, c, eps, range } => {
            let hi = match range {
                RangeArg::Theorem => (n / 3.0).powf(1.0 / c),
                RangeArg::Full => (n + eps).powf(1.0 / c),
            };
            let t = table(cfg, hi)?;
            let r = match range {
                RangeArg::Theorem => SearchRange::Theorem,
                RangeArg::Full => SearchRange::Full,
            };
            let outcome = find_solution(*n, *c, *eps, r, &t).map_err(domain)?;
            render(
                cfg,
                &SolveReport {
                    n: *n,
                    c: *c,
                    epsilon: *eps,
                    range: *range,
                    outcome,
                },
            )
        }
        Command::Gamma(g) => execute_gamma(cfg, g),
        Command::Ternary { n, c, eps } => {
            let t = table(cfg, (n / 2.0).powf(1.0 / c))?;
            let report = ternary_count(*n, *c, *eps, &t).map_err(domain)?;
            render(
                cfg,
                &TernaryOut {
                    n0: *n,
                    c: *c,
                    epsilon: *eps,
                    report,
                },
            )
        }
        Command::Expsum { c, t, lo, hi, l, d, weight } => {
            let w = match weight {
                WeightArg::Log => Weight::LogPrime,
                WeightArg::Mangoldt => Weight::VonMangoldt,
            };
            let spec = ExpSumSpec::new(*c, *lo, *hi, *l, *d, w).map_err(domain)?;
            let tab = table(cfg, *hi)?;
            let v = eval_s(&spec, *t, &tab).map_err(domain)?;
            render(
                cfg,
                &ExpSumOut {
                    re: v.re,
                    im: v.im,
                    abs: v.norm(),
                    phase_error_budget: phase_error_budget(*t, hi.powf(*c)),
                },
            )
        }
        Command::Kernel(k) => execute_kernel(cfg, k),
        Command::Bounds(b) => execute_bounds(cfg, b),
        Command::Stats(s) => execute_stats(cfg, s),
    }
}

/// Run and write to the given streams; returns the process exit code.
pub fn run_with(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Some(n) = cfg.threads {
        // Only the first configuration in a process takes effect.
        let _ = par::configure_threads(n);
    }
    match execute(cfg) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "{}", domain(e).to_json());
                2
            }
        },
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code()
        }
    }
}

pub fn run(cfg: &RunConfig) -> i32 {
    run_with(cfg, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
