//! `driftbias` command-line interface.
//!
//! Tabular results go to standard output as CSV (or to `--out`), notes and
//! warnings to standard error. Exit status is 0 on success, 1 for domain
//! errors such as a degenerate condition and 2 for usage or input errors.

mod input;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use driftbias::conditional::{linspace, write_surface_csv};
use driftbias::diagnostics::SMALL_SAMPLE;
use driftbias::format::significant;
use driftbias::pipeline::{ingest, run_portfolio, write_report_csv};
use driftbias::smoothing::{default_alpha_grid, DEFAULT_ALPHA};
use driftbias::{
    acf_pacf, asymptotic_limit, bias_surface, conditional_mu, conditional_nu, estimate_unconditional,
    fit_alpha, ljung_box, log_returns, monte_carlo_conditional, simulate_gbm, smooth, ConditionalQuery,
    Direction, GbmParams, InitPolicy, PipelineConfig, PricePath, SmoothingConfig,
};

use input::{in_file, open, read_series, sink};

const DIGITS: usize = 10;

#[derive(Parser)]
#[command(name = "driftbias", version, about = "Conditional drift estimates and bias-adjusted return forecasts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write the CSV to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one GBM price path (exact log-normal steps).
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 100.0)]
        a0: f64,
        /// Horizon in years.
        #[arg(long = "T")]
        horizon: f64,
        /// Number of steps.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Unconditional drift and variance estimates from a `date_index,price` CSV.
    #[command(allow_negative_numbers = true)]
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Observations per year; the step is `1 / h_per_year`.
        #[arg(long, default_value_t = 252.0)]
        h_per_year: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Conditional expectation of the drift estimate given past performance.
    #[command(allow_negative_numbers = true)]
    Conditional {
        /// Log drift ν.
        #[arg(long, conflicts_with = "mu", required_unless_present = "mu")]
        nu: Option<f64>,
        /// Arithmetic drift μ; the output is then E[μ̂ | condition].
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        sigma: f64,
        #[arg(long = "T")]
        horizon: f64,
        /// Threshold on the total log-return.
        #[arg(long = "C")]
        threshold: f64,
        #[arg(long, default_value = "above")]
        direction: Direction,
        /// Also estimate by Monte Carlo with this many draws.
        #[arg(long, requires = "seed")]
        mc_paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Conditional expectation and bias over a (μ, C) grid.
    #[command(allow_negative_numbers = true)]
    Surface {
        #[arg(long, default_value_t = -0.5)]
        mu_min: f64,
        #[arg(long, default_value_t = 0.5)]
        mu_max: f64,
        #[arg(long, default_value_t = 21)]
        mu_steps: usize,
        #[arg(long, default_value_t = -0.5)]
        c_min: f64,
        #[arg(long, default_value_t = 0.5)]
        c_max: f64,
        #[arg(long, default_value_t = 21)]
        c_steps: usize,
        #[arg(long, default_value_t = 0.3)]
        sigma: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value = "above")]
        direction: Direction,
        #[command(flatten)]
        output: Output,
    },
    /// Long-horizon limit of the conditional expectation.
    #[command(allow_negative_numbers = true)]
    Limits {
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value = "above")]
        direction: Direction,
        /// With `--C`, also tabulate the expectation for T = 1, 10, ..., 10^4.
        #[arg(long, requires = "threshold")]
        sigma: Option<f64>,
        #[arg(long = "C", requires = "sigma")]
        threshold: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Single exponential smoothing of a one-column CSV series.
    #[command(allow_negative_numbers = true)]
    Smooth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, conflicts_with = "fit")]
        alpha: Option<f64>,
        /// Choose α on a 0.05 grid by minimum in-sample SSE.
        #[arg(long)]
        fit: bool,
        /// Initial forecast F₁; defaults to the first observation.
        #[arg(long)]
        init: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// ACF, PACF and Ljung-Box test of a one-column CSV series.
    #[command(allow_negative_numbers = true)]
    Diagnose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        lags: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Per-stock bias adjustment and holdout scoring.
    #[command(allow_negative_numbers = true)]
    Pipeline {
        /// `stock_id,date,close` daily closes.
        #[arg(long)]
        prices: PathBuf,
        /// `stock_id,year,beta,risk_free,market_return_expectation`.
        #[arg(long)]
        capm: PathBuf,
        /// `key = value` settings file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

fn fmt(x: f64) -> String {
    significant(x, DIGITS)
}

fn csv_out(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::Writer::from_writer(sink(out)?))
}

fn finish(mut w: csv::Writer<Box<dyn Write>>) -> Result<()> {
    w.flush().context("writing output")?;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate { mu, sigma, a0, horizon, n, seed, output } => {
            let params = GbmParams::new(mu, sigma)?;
            let path = simulate_gbm(&params, a0, horizon, n, seed)?;
            path.write_csv(sink(output.out.as_deref())?)?;
        }
        Command::Estimate { input, h_per_year, output } => {
            if !(h_per_year.is_finite() && h_per_year > 0.0) {
                return Err(driftbias::Error::InvalidArgument(format!("h-per-year must be positive, got {h_per_year}")).into());
            }
            let path = PricePath::read_csv(open(&input)?, 1.0 / h_per_year).map_err(in_file(&input))?;
            let est = estimate_unconditional(&log_returns(&path))?;
            let mut w = csv_out(output.out.as_deref())?;
            w.write_record(["nu_hat", "sigma2_hat", "mu_hat", "n", "T"])?;
            w.write_record([
                fmt(est.nu_hat),
                fmt(est.sigma2_hat),
                fmt(est.nu_hat + 0.5 * est.sigma2_hat),
                est.n.to_string(),
                fmt(est.horizon),
            ])?;
            finish(w)?;
        }
        Command::Conditional { nu, mu, sigma, horizon, threshold, direction, mc_paths, seed, output } => {
            let (param, nu) = match (nu, mu) {
                (Some(nu), _) => ("nu", nu),
                (None, Some(mu)) => ("mu", mu - 0.5 * sigma * sigma),
                (None, None) => unreachable!("clap requires one of --nu and --mu"),
            };
            let q = ConditionalQuery::new(nu, sigma, horizon, threshold, direction)?;
            let r = if param == "mu" { conditional_mu(&q)? } else { conditional_nu(&q)? };
            let mut header = vec!["parameter", "direction", "expectation", "tail_probability", "bias", "mills_argument"];
            let mut row = vec![
                param.to_string(),
                direction.to_string(),
                fmt(r.expectation),
                fmt(r.tail_probability),
                fmt(r.bias),
                fmt(r.mills_argument),
            ];
            if let (Some(paths), Some(seed)) = (mc_paths, seed) {
                let mc = monte_carlo_conditional(&q, paths, seed)?;
                let shift = if param == "mu" { 0.5 * sigma * sigma } else { 0.0 };
                header.extend(["mc_mean", "mc_std_error", "mc_retained"]);
                row.extend([fmt(mc.mean + shift), fmt(mc.std_error), mc.retained.to_string()]);
            }
            let mut w = csv_out(output.out.as_deref())?;
            w.write_record(&header)?;
            w.write_record(&row)?;
            finish(w)?;
        }
        Command::Surface { mu_min, mu_max, mu_steps, c_min, c_max, c_steps, sigma, horizon, direction, output } => {
            let cells = bias_surface(
                &linspace(mu_min, mu_max, mu_steps),
                &linspace(c_min, c_max, c_steps),
                sigma,
                horizon,
                direction,
            )?;
            let degenerate = cells.iter().filter(|c| c.is_degenerate()).count();
            write_surface_csv(&cells, sink(output.out.as_deref())?)?;
            if degenerate > 0 {
                eprintln!("note: {degenerate} cell(s) have a vanishing conditioning probability");
            }
        }
        Command::Limits { nu, direction, sigma, threshold, output } => {
            let limit = asymptotic_limit(nu, direction);
            let mut w = csv_out(output.out.as_deref())?;
            match (sigma, threshold) {
                (Some(sigma), Some(c)) => {
                    w.write_record(["T", "expectation", "limit", "gap"])?;
                    for k in 0..=4 {
                        let t = 10f64.powi(k);
                        let q = ConditionalQuery::new(nu, sigma, t, c, direction)?;
                        let cell = match conditional_nu(&q) {
                            Ok(r) => [fmt(r.expectation), fmt(limit), fmt((r.expectation - limit).abs())],
                            Err(driftbias::Error::DegenerateCondition(_)) => [String::new(), fmt(limit), String::new()],
                            Err(e) => return Err(e.into()),
                        };
                        let mut record = vec![fmt(t)];
                        record.extend(cell);
                        w.write_record(&record)?;
                    }
                }
                _ => {
                    w.write_record(["nu", "direction", "limit"])?;
                    w.write_record([fmt(nu), direction.to_string(), fmt(limit)])?;
                }
            }
            finish(w)?;
        }
        Command::Smooth { input, alpha, fit, init, output } => {
            let values = read_series(&input)?;
            let alpha = if fit {
                fit_alpha(&values, &default_alpha_grid())?.0
            } else {
                alpha.unwrap_or(DEFAULT_ALPHA)
            };
            let policy = init.map_or(InitPolicy::FirstObservation, InitPolicy::ProvidedValue);
            let smoothed = smooth(&values, &SmoothingConfig::new(alpha, policy)?)?;
            let mut w = csv_out(output.out.as_deref())?;
            w.write_record(["t", "value", "forecast"])?;
            for (t, (y, f)) in values.iter().zip(&smoothed.forecasts).enumerate() {
                w.write_record([(t + 1).to_string(), fmt(*y), fmt(*f)])?;
            }
            w.write_record([(values.len() + 1).to_string(), String::new(), fmt(smoothed.next_forecast())])?;
            finish(w)?;
            eprintln!("alpha={} sse={}", fmt(alpha), fmt(smoothed.sse()));
        }
        Command::Diagnose { input, lags, output } => {
            let values = read_series(&input)?;
            let acf = acf_pacf(&values, lags)?;
            let lb = ljung_box(&values, lags)?;
            let mut w = csv_out(output.out.as_deref())?;
            w.write_record(["lag", "acf", "pacf"])?;
            for k in 0..lags {
                w.write_record([(k + 1).to_string(), fmt(acf.acf[k]), fmt(acf.pacf[k])])?;
            }
            finish(w)?;
            eprintln!("Q={} p={} lags={}", fmt(lb.q_statistic), fmt(lb.p_value), lb.lags_tested);
            if lb.small_sample {
                eprintln!(
                    "warning: n={} is below {SMALL_SAMPLE}; the chi-square p-value is unreliable",
                    lb.n
                );
            }
        }
        Command::Pipeline { prices, capm, config, output } => {
            let config = match &config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| driftbias::Error::Input {
                        file: path.clone(),
                        message: e.to_string(),
                    })?;
                    PipelineConfig::parse(&text, path)?
                }
                None => PipelineConfig::default(),
            };
            let stocks = ingest(&prices, &capm, &config)?;
            let report = run_portfolio(&stocks, &config)?;
            write_report_csv(&report, sink(output.out.as_deref())?)?;
            eprint!("{}", report.summary());
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<driftbias::Error>() {
        Some(e) if e.is_usage() => 2,
        Some(_) => 1,
        None => match err.downcast_ref::<csv::Error>() {
            Some(_) => 2,
            None => 1,
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let message = format!("{err:#}").replace('\n', " ");
            eprintln!("error: {message}");
            ExitCode::from(exit_code(&err))
        }
    }
}
