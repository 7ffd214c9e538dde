//! `esprod` command-line front end.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on usage
//! or input errors.

use std::io::{Read, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{factorial_moments, power_moments, pte_witness, vanishing_order_by_moments};
use crate::newton::{elementary_from_power, reconstruct_multiset, PowerSums};
use crate::norms::{coeff_norms, default_grid, refine_enclosure, sup_norm_enclosure};
use crate::polyring::{ExponentSequence, IntPolynomial};
use crate::search::{
    exhaustive_search, local_search, sweep, write_sweep_csv, ResultCache, SearchConfig,
    SearchParams, Strategy, SweepParams, DEFAULT_FINE_GRID,
};
use crate::theorems::{batch_verify, verify_main_bound, verify_or_inequality, Family};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Jsonl,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "esprod", version, about = "Exact tools for pure power products prod (1 - z^s_j)")]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PolyInput {
    /// Exponents, e.g. `1,2,4`. Without it a polynomial `{"coeffs": [...]}` or a
    /// sequence `{"s": [...]}` is read from stdin.
    #[arg(long = "s", allow_hyphen_values = true)]
    s: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expand the product into its coefficients.
    Expand {
        #[arg(long = "s", allow_hyphen_values = true)]
        s: String,
    },
    /// Exact l1, l2^2, linf and nonzero count.
    Norms(PolyInput),
    /// Certified enclosure of the maximum modulus on |z| = 1.
    Supnorm {
        #[command(flatten)]
        input: PolyInput,
        #[arg(long)]
        grid: Option<usize>,
        /// Refine until the enclosure is at most this wide.
        #[arg(long)]
        refine: Option<f64>,
    },
    /// Power and factorial moments and the vanishing order at z = 1.
    Moments {
        #[command(flatten)]
        input: PolyInput,
        /// Highest moment index; defaults to the vanishing order.
        #[arg(long)]
        r_max: Option<usize>,
    },
    /// Reconstruct an integer multiset from power sums p_1 .. p_m.
    Newton {
        #[arg(required = true, allow_negative_numbers = true)]
        power_sums: Vec<BigInt>,
    },
    /// PTE witness for a product with +-1 coefficients.
    Pte(PolyInput),
    /// Check the lower bounds on one product or on a family.
    Verify {
        #[arg(long = "s", allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum)]
        family: Option<FamilyKind>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        s_max: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Additionally require `lower >= VALUE` (failure-path testing).
        #[arg(long, hide = true)]
        assert_lower_above: Option<f64>,
    },
    /// Compare the sup-norm with sqrt(2 sum |a_k|^2).
    OrCheck {
        #[command(flatten)]
        input: PolyInput,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Minimise the certified sup-norm over exponent sequences.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        s_max: u64,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
        /// JSONL cache; without a value, `$ES_CACHE_DIR/search.jsonl`.
        #[arg(long, num_args = 0..=1)]
        cache: Option<Option<PathBuf>>,
    },
    /// Search every n in a range, e.g. `--n 1..6`.
    Sweep {
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 8)]
        s_max: u64,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        #[arg(long, num_args = 0..=1)]
        cache: Option<Option<PathBuf>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyKind {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Auto,
    Exhaustive,
    Local,
}

/// Validated settings shared by the subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid_size: Option<usize>,
    pub jobs: usize,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if let Some(m) = self.grid_size {
            if m < 2 {
                return Err(Error::InvalidArgument(format!("--grid must be at least 2, got {m}")));
            }
        }
        if self.jobs < 1 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        Ok(())
    }
}

fn default_cache_path() -> PathBuf {
    std::env::var_os("ES_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".es-cache"))
        .join("search.jsonl")
}

fn resolve_cache(flag: Option<Option<PathBuf>>) -> Option<ResultCache> {
    flag.map(|p| ResultCache::new(p.unwrap_or_else(default_cache_path)))
}

fn parse_range(text: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::InvalidArgument(format!("'{text}' is not a range like 1..6"));
    let (lo, hi) = match text.split_once("..").or_else(|| text.split_once('-')) {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (text, text),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo < 1 || hi < lo {
        return Err(bad());
    }
    Ok(lo..=hi)
}

struct Io<'a> {
    stdin: &'a mut (dyn Read + Send),
    stdout: &'a mut (dyn Write + Send),
}

fn read_polynomial(input: &PolyInput, io: &mut Io<'_>) -> Result<IntPolynomial> {
    if let Some(s) = &input.s {
        return Ok(IntPolynomial::expand_product(&s.parse()?));
    }
    let mut text = String::new();
    io.stdin.read_to_string(&mut text)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("coeffs").is_some() {
        Ok(serde_json::from_value(value)?)
    } else if value.get("s").is_some() {
        let s: ExponentSequence = serde_json::from_value(value)?;
        Ok(IntPolynomial::expand_product(&s))
    } else {
        Err(Error::InvalidArgument(
            "stdin must hold {\"coeffs\": [...]} or {\"s\": [...]}".into(),
        ))
    }
}

struct Emitter<'a, 'b> {
    cfg: &'a RunConfig,
    io: &'a mut Io<'b>,
}

impl Emitter<'_, '_> {
    fn write_bytes(&mut self, bytes: &[u8]) -> Result<()> {
        match &self.cfg.output_path {
            Some(path) => std::fs::write(path, bytes)?,
            None => self.io.stdout.write_all(bytes)?,
        }
        Ok(())
    }

    /// JSON by default, pretty JSON for `text` unless `text` is supplied.
    fn emit<T: Serialize>(&mut self, value: &T, text: Option<String>) -> Result<()> {
        let body = match (self.cfg.format, text) {
            (Format::Text, Some(t)) => t,
            (Format::Text, None) => serde_json::to_string_pretty(value)?,
            _ => serde_json::to_string(value)?,
        };
        self.write_bytes(format!("{body}\n").as_bytes())
    }
}

#[derive(Serialize)]
struct MomentsOut {
    #[serde(with = "crate::serde_big::vec")]
    power_moments: Vec<BigInt>,
    #[serde(with = "crate::serde_big::vec")]
    factorial_moments: Vec<BigInt>,
    #[serde(with = "crate::serde_big::display")]
    vanishing_order: usize,
}

#[derive(Serialize)]
struct NewtonOut {
    elementary: crate::newton::ElementarySymmetric,
    multiset: crate::newton::IntMultiset,
}

#[derive(Serialize)]
struct Rejection {
    rejected: bool,
    reason: String,
}

fn execute(cli: Cli, io: &mut Io<'_>) -> Result<i32> {
    let grid_flag = match &cli.command {
        Command::Supnorm { grid, .. }
        | Command::Verify { grid, .. }
        | Command::OrCheck { grid, .. }
        | Command::Search { grid, .. }
        | Command::Sweep { grid, .. } => *grid,
        _ => None,
    };
    let default_format = match &cli.command {
        Command::Sweep { .. } => Format::Csv,
        _ => Format::Json,
    };
    let cfg = RunConfig {
        grid_size: grid_flag,
        jobs: cli.jobs,
        output_path: cli.output.clone(),
        format: cli.format.unwrap_or(default_format),
    };
    cfg.validate()?;
    let mut out = Emitter { cfg: &cfg, io };

    match cli.command {
        Command::Expand { s } => {
            let seq: ExponentSequence = s.parse()?;
            let p = IntPolynomial::expand_product(&seq);
            let text = p.to_string();
            out.emit(&p, Some(text))?;
        }
        Command::Norms(input) => {
            let p = read_polynomial(&input, out.io)?;
            out.emit(&coeff_norms(&p), None)?;
        }
        Command::Supnorm { input, refine, .. } => {
            let p = read_polynomial(&input, out.io)?;
            let m = cfg.grid_size.unwrap_or_else(|| default_grid(&p));
            let mut e = sup_norm_enclosure(&p, m)?;
            if let Some(width) = refine {
                e = match refine_enclosure(&p, &e, width) {
                    Ok(r) => r,
                    Err(Error::RefineCapExhausted { best, width: got, .. }) => {
                        eprintln!("refinement cap reached at width {got:e}");
                        out.emit(&*best, None)?;
                        return Ok(EXIT_FAILURE);
                    }
                    Err(err) => return Err(err),
                };
            }
            let text = format!("[{}, {}] at angle {} (M = {})", e.lower, e.upper, e.argmax_angle, e.grid_size);
            out.emit(&e, Some(text))?;
        }
        Command::Moments { input, r_max } => {
            let p = read_polynomial(&input, out.io)?;
            let order = vanishing_order_by_moments(&p)?;
            let r = r_max.unwrap_or(order);
            out.emit(
                &MomentsOut {
                    power_moments: power_moments(&p, r),
                    factorial_moments: factorial_moments(&p, r),
                    vanishing_order: order,
                },
                None,
            )?;
        }
        Command::Newton { power_sums } => {
            let ps = PowerSums::new(power_sums);
            match reconstruct_multiset(&ps) {
                Ok(multiset) => {
                    let elementary = elementary_from_power(&ps)?;
                    out.emit(&NewtonOut { elementary, multiset }, None)?;
                }
                Err(e @ (Error::NotRealizable(_) | Error::TooLargeToFactor(_))) => {
                    out.emit(&Rejection { rejected: true, reason: e.to_string() }, None)?;
                    return Ok(EXIT_FAILURE);
                }
                Err(e) => return Err(e),
            }
        }
        Command::Pte(input) => {
            let p = read_polynomial(&input, out.io)?;
            match pte_witness(&p) {
                Ok(w) => out.emit(&w, None)?,
                Err(e @ Error::NotPlusMinusOne { .. }) => {
                    out.emit(&Rejection { rejected: true, reason: e.to_string() }, None)?;
                }
                Err(e) => return Err(e),
            }
        }
        Command::Verify {
            s,
            family,
            n,
            s_max,
            count,
            seed,
            assert_lower_above,
            ..
        } => {
            let m = cfg.grid_size.unwrap_or(DEFAULT_FINE_GRID);
            if let Some(s) = s {
                let seq: ExponentSequence = s.parse()?;
                let report = verify_main_bound(&seq, m)?;
                let mut ok = report.passed();
                if let Some(floor) = assert_lower_above {
                    ok &= report.enclosure.lower >= floor;
                }
                out.emit(&report, None)?;
                return Ok(if ok { EXIT_OK } else { EXIT_FAILURE });
            }
            let n = n.ok_or_else(|| Error::InvalidArgument("verify needs --s or --n".into()))?;
            let s_max = s_max.unwrap_or(8);
            let fam = match family.unwrap_or(FamilyKind::Exhaustive) {
                FamilyKind::Exhaustive => Family::Exhaustive { n_max: n, s_max },
                FamilyKind::Random => Family::Random { count, n, s_max, seed },
            };
            let outcome = batch_verify(&fam, m)?;
            match cfg.format {
                Format::Jsonl => out.write_bytes(outcome.to_jsonl()?.as_bytes())?,
                _ => {
                    if let Some(path) = &cfg.output_path {
                        std::fs::write(path, outcome.to_jsonl()?)?;
                    }
                    let body = serde_json::to_string(&outcome.summary)?;
                    out.io.stdout.write_all(format!("{body}\n").as_bytes())?;
                }
            }
            if !outcome.summary.failures.is_empty() {
                return Ok(EXIT_FAILURE);
            }
        }
        Command::OrCheck { input, .. } => {
            let p = read_polynomial(&input, out.io)?;
            let m = cfg.grid_size.unwrap_or_else(|| default_grid(&p));
            let report = verify_or_inequality(&p, m)?;
            if !report.hypothesis_guaranteed {
                eprintln!("warning: input is not a pure power product; zeros on |z| = 1 not guaranteed");
            }
            out.emit(&report, None)?;
            if !report.passed() {
                return Ok(EXIT_FAILURE);
            }
        }
        Command::Search {
            n,
            s_max,
            seed,
            iters,
            strategy,
            cache,
            ..
        } => {
            let m = cfg.grid_size.unwrap_or(DEFAULT_FINE_GRID);
            let strategy = match strategy {
                StrategyArg::Exhaustive => Strategy::Exhaustive,
                StrategyArg::Local => Strategy::Local,
                StrategyArg::Auto => {
                    if crate::polyring::count_canonical(n, s_max) <= SearchConfig::default().candidate_cap {
                        Strategy::Exhaustive
                    } else {
                        Strategy::Local
                    }
                }
            };
            let params = SearchParams {
                s_max,
                grid: m,
                strategy,
                seed: (strategy == Strategy::Local).then_some(seed),
            };
            let compute = || match strategy {
                Strategy::Exhaustive => exhaustive_search(n, s_max, m),
                Strategy::Local => local_search(n, s_max, m, seed, iters),
            };
            let record = match resolve_cache(cache) {
                Some(c) => c.get_or_compute(n, &params, compute)?,
                None => compute()?,
            };
            eprintln!("search finished in {:.3} s", record.wall_time);
            out.emit(&record, None)?;
        }
        Command::Sweep {
            n,
            s_max,
            seed,
            iters,
            cache,
            ..
        } => {
            let range = parse_range(&n)?;
            let params = SweepParams {
                s_max,
                grid: cfg.grid_size.unwrap_or(DEFAULT_FINE_GRID),
                seed,
                iters,
                config: SearchConfig::default(),
            };
            let records = match resolve_cache(cache) {
                Some(c) => range
                    .map(|k| {
                        let strategy = if crate::polyring::count_canonical(k, s_max)
                            <= params.config.candidate_cap
                        {
                            Strategy::Exhaustive
                        } else {
                            Strategy::Local
                        };
                        let key = SearchParams {
                            s_max,
                            grid: params.grid,
                            strategy,
                            seed: (strategy == Strategy::Local).then_some(seed),
                        };
                        c.get_or_compute(k, &key, || Ok(sweep(k..=k, &params)?.remove(0)))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => sweep(range, &params)?,
            };
            match cfg.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_sweep_csv(&records, &mut buf)?;
                    out.write_bytes(&buf)?;
                }
                _ => {
                    let mut body = String::new();
                    for r in &records {
                        body.push_str(&serde_json::to_string(r)?);
                        body.push('\n');
                    }
                    out.write_bytes(body.as_bytes())?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run_with_io<I, T>(
    argv: I,
    stdin: &mut (dyn Read + Send),
    stdout: &mut (dyn Write + Send),
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let jobs = cli.jobs.max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut io = Io { stdin, stdout };
    match pool.install(|| execute(cli, &mut io)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_io(
        argv,
        &mut std::io::stdin(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..6").unwrap(), 1..=6);
        assert_eq!(parse_range("2..=4").unwrap(), 2..=4);
        assert_eq!(parse_range("3-5").unwrap(), 3..=5);
        assert_eq!(parse_range("4").unwrap(), 4..=4);
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("a").is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = RunConfig {
            grid_size: Some(1),
            jobs: 1,
            output_path: None,
            format: Format::Json,
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { grid_size: Some(2), ..cfg };
        assert!(cfg.validate().is_ok());
        assert!(RunConfig { jobs: 0, ..cfg }.validate().is_err());
    }
}
