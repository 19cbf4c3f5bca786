//! Command-line front end. Each subcommand parses its flags, calls one
//! library operation and renders the result with [`crate::report`].

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::counting::{count_prefixes, growth_sequence};
use crate::density::{convergence_diagnostic, iterate_f_n};
use crate::error::{Error, Result};
use crate::garsia::{build_nu_n, garsia_ratio};
use crate::numeric::{make_beta, uniform_point, Backend, BetaParam, BetaSpec, Limits};
use crate::random_beta::{bound_check, c_beta, McParams};
use crate::report::{self, Table};

/// Stream of the seeded generator that draws `diagnose` sample points.
const DIAGNOSE_SAMPLE_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Parser)]
#[command(name = "betacount", version, about = "Count beta-expansions and study Bernoulli convolutions")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pretty,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Base β as a decimal in (1, 2), using the float backend.
    #[arg(long, global = true, conflicts_with = "beta_quad")]
    pub beta: Option<f64>,
    /// Base β as the root in (1, 2) of x^2 = a x + b, using exact arithmetic.
    #[arg(long, global = true, value_name = "A,B", value_parser = parse_pair)]
    pub beta_quad: Option<(i64, i64)>,
    /// Comparison tolerance of the float backend.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for every randomized subcommand.
    #[arg(long, global = true, default_value_t = 42, env = "BETACOUNT_SEED")]
    pub seed: u64,
    /// Largest prefix length for counting.
    #[arg(long, global = true, default_value_t = 30, env = "BETACOUNT_N_MAX")]
    pub max_depth: usize,
    /// Largest number of words that may be enumerated.
    #[arg(long, global = true, default_value_t = 1_000_000, env = "BETACOUNT_MAX_ENUMERATION")]
    pub max_enumeration: usize,
    /// Largest n for which the 2^n sums of ν_{β,n} are built.
    #[arg(long, global = true, default_value_t = 24, env = "BETACOUNT_MAX_MEASURE_DEPTH")]
    pub max_measure_depth: usize,
    /// Largest number of pieces of a density.
    #[arg(long, global = true, default_value_t = 2_000_000, env = "BETACOUNT_PIECE_BUDGET")]
    pub piece_budget: usize,
    /// Output format; defaults to csv with --out and pretty otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Significant digits for floating-point output.
    #[arg(long, global = true, default_value_t = report::DEFAULT_PRECISION)]
    pub precision: usize,
}

/// A point `x + xq·β`.
#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Rational part of the point: an integer, p/q or a decimal.
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub x: BigRational,
    /// Coefficient of β in the point (exact backend only).
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    pub xq: Option<BigRational>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Number of simulated orbits.
    #[arg(long, default_value_t = 1000)]
    pub orbits: usize,
    /// Steps per orbit.
    #[arg(long, default_value_t = 5000)]
    pub steps: usize,
    /// Initial steps to discard; defaults to 10% of --steps.
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// N_n(x; β), the number of length-n prefixes of expansions of x.
    Count {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        n: usize,
    },
    /// N_k(x; β) and f_k(x) for k = 1..=n-max.
    Growth {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
    },
    /// The piecewise-constant density f_n on I_β.
    Density {
        #[arg(long)]
        n: usize,
        /// Add exact p + qβ columns for the piece values (exact backend only).
        #[arg(long)]
        exact: bool,
    },
    /// Entropy of ν_{β,n} for n = 1..=n-max, or the measure itself.
    Entropy {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        /// Print the atoms and masses of ν_{β,n-max} instead.
        #[arg(long)]
        measure: bool,
    },
    /// Monte-Carlo estimate of the switch-region frequency and c(β).
    Simulate {
        #[command(flatten)]
        mc: McArgs,
    },
    /// Check ln(N_n(x))/n >= c(β) - slack at random points.
    Bound {
        #[arg(long, default_value_t = 18)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        slack: f64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Tail oscillation of f_n(x) at random points.
    Diagnose {
        #[arg(long, default_value_t = 24)]
        n_max: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

/// Validated settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub beta: BetaParam,
    pub seed: u64,
    pub limits: Limits,
    pub format: Format,
    pub precision: usize,
    pub out: Option<PathBuf>,
}

/// Failures before any computation starts; reported as usage errors.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum UsageError {
    #[error("one of --beta <DECIMAL> or --beta-quad <A,B> is required")]
    MissingBeta,
    #[error("--precision must be between 1 and 40")]
    Precision,
}

impl CommonArgs {
    pub fn config(&self) -> std::result::Result<Result<RunConfig>, UsageError> {
        let spec = match (self.beta, self.beta_quad) {
            (Some(value), None) => BetaSpec::Float { value, tolerance: self.tol },
            (None, Some((a, b))) => BetaSpec::Quadratic { a, b },
            _ => return Err(UsageError::MissingBeta),
        };
        if !(1..=40).contains(&self.precision) {
            return Err(UsageError::Precision);
        }
        let limits = Limits {
            max_depth: self.max_depth,
            max_enumeration: self.max_enumeration,
            max_measure_depth: self.max_measure_depth,
            piece_budget: self.piece_budget,
            ..Limits::default()
        };
        let format = self.format.unwrap_or(if self.out.is_some() { Format::Csv } else { Format::Pretty });
        Ok(make_beta(spec).map(|beta| RunConfig {
            beta,
            seed: self.seed,
            limits,
            format,
            precision: self.precision,
            out: self.out.clone(),
        }))
    }
}

/// Rendered output: CSV blocks and an optional human summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub tables: Vec<Table>,
    /// `key=value` lines shown above the tables in pretty mode.
    pub summary: Vec<(String, String)>,
    /// Whether pretty mode shows the tables after the summary.
    pub pretty_tables: bool,
}

impl Output {
    fn tables(tables: Vec<Table>) -> Self {
        Output { tables, summary: Vec::new(), pretty_tables: true }
    }

    /// CSV blocks are separated by a blank line.
    pub fn render(&self, format: Format) -> Vec<u8> {
        let mut buf = Vec::new();
        if format == Format::Pretty {
            let mut s = String::new();
            for (k, v) in &self.summary {
                let _ = writeln!(s, "{k}={v}");
            }
            buf.extend(s.into_bytes());
        }
        if format == Format::Pretty && !self.pretty_tables {
            return buf;
        }
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 || (format == Format::Pretty && !self.summary.is_empty()) {
                buf.push(b'\n');
            }
            match format {
                Format::Csv => t.write_csv(&mut buf),
                Format::Pretty => t.write_pretty(&mut buf),
            }
            .expect("writing to memory");
        }
        buf
    }
}

/// Run one subcommand with a validated configuration.
pub fn execute(cfg: &RunConfig, command: &Command) -> Result<Output> {
    match &cfg.beta {
        BetaParam::Float(b) => {
            if matches!(command, Command::Count { point, .. } | Command::Growth { point, .. } if point.xq.is_some()) {
                return Err(Error::InvalidParams("--xq needs the exact backend (--beta-quad)".into()));
            }
            execute_with(b, cfg, command)
        }
        BetaParam::Quadratic(b) => execute_with(b, cfg, command),
    }
}

fn point_of<B: Backend>(beta: &B, p: &PointArgs) -> B::Num {
    let x = beta.from_rational(&p.x);
    match &p.xq {
        Some(q) => beta.add(&x, &beta.mul(&beta.from_rational(q), &beta.beta())),
        None => x,
    }
}

fn mc_params(mc: &McArgs, seed: u64) -> McParams {
    let mut params = McParams::new(mc.orbits, mc.steps, seed);
    if let Some(b) = mc.burn_in {
        params.burn_in = b;
    }
    params
}

fn execute_with<B: Backend>(beta: &B, cfg: &RunConfig, command: &Command) -> Result<Output> {
    let prec = cfg.precision;
    let limits = &cfg.limits;
    let fmt = |v: f64| report::fmt_float(v, prec);
    match command {
        Command::Count { point, n } => {
            let r = count_prefixes(&point_of(beta, point), *n, beta, limits)?;
            let mut summary = vec![
                ("N".to_string(), r.count.to_string()),
                ("f_n".to_string(), fmt(r.f_n_value)),
                ("garsia_erdos".to_string(), fmt(r.garsia_erdos)),
            ];
            if let Some(l) = r.log_rate {
                summary.push(("log_rate".into(), fmt(l)));
            }
            if r.near_boundary {
                summary.push(("near_boundary".into(), "true".into()));
            }
            let table = report::count_table(std::slice::from_ref(&r), prec);
            // one row adds nothing to the summary lines
            Ok(Output { tables: vec![table], summary, pretty_tables: false })
        }
        Command::Growth { point, n_max } => {
            let g = growth_sequence(&point_of(beta, point), beta, *n_max, limits)?;
            Ok(Output {
                tables: vec![report::growth_table(&g, prec)],
                summary: vec![
                    ("tail_start".into(), g.tail_start.to_string()),
                    ("tail_min_f_n".into(), fmt(g.tail_min_f_n)),
                    ("tail_max_f_n".into(), fmt(g.tail_max_f_n)),
                ],
                pretty_tables: true,
            })
        }
        Command::Density { n, exact } => {
            if *exact && !beta.is_exact() {
                return Err(Error::InvalidParams("--exact needs the exact backend (--beta-quad)".into()));
            }
            let f = iterate_f_n(beta, *n, limits)?;
            Ok(Output::tables(vec![report::density_table(&f, beta, prec, *exact)]))
        }
        Command::Entropy { n_max, measure } => {
            if *measure {
                let m = build_nu_n(beta, *n_max, limits)?;
                Ok(Output::tables(vec![report::measure_table(&m, beta, prec)]))
            } else {
                let g = garsia_ratio(beta, *n_max, limits)?;
                Ok(Output {
                    tables: vec![report::entropy_table(&g, prec)],
                    summary: vec![("final_gap".into(), fmt(g.final_gap)), ("increases".into(), g.increases.to_string())],
                    pretty_tables: true,
                })
            }
        }
        Command::Simulate { mc } => {
            let c = c_beta(beta, &mc_params(mc, cfg.seed))?;
            Ok(Output::tables(vec![report::simulation_table(&c, prec), report::simulation_summary(&c, prec)]))
        }
        Command::Bound { n, samples, slack, mc } => {
            let b = bound_check(beta, *samples, *n, &mc_params(mc, cfg.seed), *slack, limits)?;
            Ok(Output {
                tables: vec![report::bound_table(&b, cfg.seed, prec)],
                summary: vec![
                    ("c_beta".into(), fmt(b.c_beta)),
                    ("c_beta_std_error".into(), fmt(b.c_beta_std_error)),
                    ("fraction_satisfied".into(), fmt(b.fraction)),
                ],
                pretty_tables: true,
            })
        }
        Command::Diagnose { n_max, samples } => {
            let xs = diagnose_points(beta, *samples, cfg.seed);
            let r = convergence_diagnostic(beta, &xs, *n_max, limits)?;
            Ok(Output {
                tables: vec![report::diagnose_table(&r, cfg.seed, prec)],
                summary: vec![
                    ("median_oscillation".into(), fmt(r.median_oscillation)),
                    ("mean_oscillation".into(), fmt(r.mean_oscillation)),
                    ("max_oscillation".into(), fmt(r.max_oscillation)),
                ],
                pretty_tables: true,
            })
        }
    }
}

/// Sample points of `diagnose`, drawn from `seed`.
pub fn diagnose_points<B: Backend>(beta: &B, samples: usize, seed: u64) -> Vec<B::Num> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DIAGNOSE_SAMPLE_STREAM);
    (0..samples).map(|_| uniform_point(beta, &mut rng)).collect()
}

fn parse_pair(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B but got '{s}'"))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("'{t}': {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Parse `p`, `p/q` or a decimal such as `-0.125` or `3.5e-2` into an exact
/// rational.
pub fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("'{s}' is not an integer, p/q or decimal");
    if s.contains('/') {
        let r = BigRational::from_str(s).map_err(|_| bad())?;
        return Ok(r);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int}{frac}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all).map_err(|_| bad())?);
    let shift = exp - frac.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut scale = BigRational::one();
    for _ in 0..shift.unsigned_abs() {
        scale *= &ten;
    }
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    if neg && !value.is_zero() {
        value = -value;
    }
    Ok(value)
}
