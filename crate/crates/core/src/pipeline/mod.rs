//! Yearly forecast workflow for a set of stocks.
//!
//! For each period the drift and variance are estimated from daily prices.
//! A performance-chasing investor holds the stock in the next period only if
//! this period's total log-return beat the CAPM benchmark `C`. In that case
//! the investor expects the conditional drift `E[ν̂ | R > C]`, evaluated with
//! this period's estimates plugged in. The bias of a period is the gap
//! between the drift expected for it and the drift then realized, or zero if
//! nothing was held.
//!
//! Two corrections are scored against a holdout period. The simple one
//! subtracts the previous period's bias. The exponential-smoothing one
//! subtracts the smoothed bias series.

mod config;
mod ingest;
mod report;
pub mod synthetic;

use rayon::prelude::*;

use crate::conditional::{conditional_nu, ConditionalQuery, Direction};
use crate::error::{Error, Result};
use crate::smoothing::{default_alpha_grid, fit_alpha, smooth, SmoothingConfig};
use crate::stochastic::{estimate_unconditional, log_returns, PricePath};

pub use config::{BenchmarkMode, PipelineConfig};
pub use ingest::{ingest, ingest_readers, IngestedStock};
pub use report::{write_report_csv, PortfolioReport};

/// CAPM inputs for one stock and period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapmInputs {
    pub beta: f64,
    pub risk_free: f64,
    pub market_return_expectation: f64,
}

impl CapmInputs {
    pub fn benchmark(&self) -> f64 {
        capm_benchmark(self.risk_free, self.beta, self.market_return_expectation)
    }
}

/// One period of daily prices, labelled by calendar year.
#[derive(Debug, Clone, PartialEq)]
pub struct Period {
    pub label: i32,
    pub prices: PricePath,
    pub capm: Option<CapmInputs>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StockDataset {
    stock_id: String,
    periods: Vec<Period>,
}

impl StockDataset {
    /// Periods must have consecutive labels.
    pub fn new(stock_id: impl Into<String>, periods: Vec<Period>) -> Result<Self> {
        let stock_id = stock_id.into();
        if periods.is_empty() {
            return Err(Error::InsufficientData {
                what: "stock periods",
                needed: 1,
                got: 0,
            });
        }
        for w in periods.windows(2) {
            if w[1].label != w[0].label + 1 {
                return Err(Error::invalid(format!(
                    "stock {stock_id}: periods {} and {} are not contiguous",
                    w[0].label, w[1].label
                )));
            }
        }
        Ok(Self { stock_id, periods })
    }

    pub fn stock_id(&self) -> &str {
        &self.stock_id
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }
}

/// Why a period does or does not carry a forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForecastFlag {
    /// First period; there is no earlier performance to react to.
    NoHistory,
    /// The previous period did not beat its benchmark.
    NotInvested,
    /// The previous period beat its benchmark and a forecast was formed.
    Invested,
    /// The previous period beat its benchmark but the conditional
    /// expectation could not be evaluated (zero variance or an
    /// underflowing tail).
    Degenerate,
}

impl ForecastFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ForecastFlag::NoHistory => "no_history",
            ForecastFlag::NotInvested => "not_invested",
            ForecastFlag::Invested => "invested",
            ForecastFlag::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub period_index: usize,
    pub label: i32,
    pub nu_hat: f64,
    pub sigma2_hat: f64,
    /// Total log-return `R̃` over the period.
    pub realized_return: f64,
    pub benchmark_c: f64,
    /// `R̃ > C`; decides whether the next period is held.
    pub beat_benchmark: bool,
    /// Whether the stock is held during this period.
    pub invested: bool,
    /// Drift expected for this period; zero when not invested.
    pub nu_tilde: f64,
    /// `ν̃ − ν̂` when invested, zero otherwise.
    pub bias: f64,
    pub flag: ForecastFlag,
}

/// A forecast for the period following some record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub nu_tilde: f64,
    pub flag: ForecastFlag,
}

impl Forecast {
    pub fn invested(&self) -> bool {
        self.flag == ForecastFlag::Invested
    }
}

/// CAPM expected return `r_f + β (E[r_M] − r_f)`.
pub fn capm_benchmark(risk_free: f64, beta: f64, market_return_expectation: f64) -> f64 {
    risk_free + beta * (market_return_expectation - risk_free)
}

/// Forecast issued at the end of `record`'s period for the next one.
pub fn forward_forecast(record: &PeriodRecord, period_length: f64) -> Forecast {
    if !record.beat_benchmark {
        return Forecast { nu_tilde: 0.0, flag: ForecastFlag::NotInvested };
    }
    let query = ConditionalQuery::new(
        record.nu_hat,
        record.sigma2_hat.sqrt(),
        period_length,
        record.benchmark_c,
        Direction::Above,
    );
    match query.and_then(|q| conditional_nu(&q)) {
        Ok(r) => Forecast { nu_tilde: r.expectation, flag: ForecastFlag::Invested },
        Err(_) => Forecast { nu_tilde: 0.0, flag: ForecastFlag::Degenerate },
    }
}

fn benchmark_for(data: &StockDataset, period: &Period, config: &PipelineConfig) -> Result<f64> {
    match config.benchmark {
        BenchmarkMode::Constant(c) => Ok(c),
        BenchmarkMode::PerPeriod => period.capm.map(|c| c.benchmark()).ok_or_else(|| Error::MissingStock {
            stock_id: data.stock_id.clone(),
            year: Some(period.label),
        }),
    }
}

/// Estimates, gates and biases for every period of one stock.
pub fn build_period_records(data: &StockDataset, config: &PipelineConfig) -> Result<Vec<PeriodRecord>> {
    if data.periods.len() < 2 {
        return Err(Error::InsufficientData {
            what: "forecast periods",
            needed: 2,
            got: data.periods.len(),
        });
    }
    let mut records: Vec<PeriodRecord> = Vec::with_capacity(data.periods.len());
    for (i, period) in data.periods.iter().enumerate() {
        let series = log_returns(&period.prices);
        let est = estimate_unconditional(&series)?;
        let c = benchmark_for(data, period, config)?;
        let forecast = match records.last() {
            Some(prev) => forward_forecast(prev, config.period_length),
            None => Forecast { nu_tilde: 0.0, flag: ForecastFlag::NoHistory },
        };
        let invested = forecast.invested();
        records.push(PeriodRecord {
            period_index: i,
            label: period.label,
            nu_hat: est.nu_hat,
            sigma2_hat: est.sigma2_hat,
            realized_return: series.total(),
            benchmark_c: c,
            beat_benchmark: series.total() > c,
            invested,
            nu_tilde: forecast.nu_tilde,
            bias: if invested { forecast.nu_tilde - est.nu_hat } else { 0.0 },
            flag: forecast.flag,
        });
    }
    Ok(records)
}

/// Sum of squared biases.
pub fn ssd(records: &[PeriodRecord]) -> f64 {
    records.iter().map(|r| r.bias * r.bias).sum()
}

/// Sum of squared deviations of in-sample adjusted forecasts (aligned with
/// `records[1..]`) over the invested periods.
pub fn adjusted_ssd(records: &[PeriodRecord], adjusted: &[f64]) -> f64 {
    records[1..]
        .iter()
        .zip(adjusted)
        .filter(|(r, _)| r.invested)
        .map(|(r, a)| (a - r.nu_hat) * (a - r.nu_hat))
        .sum()
}

/// Forecasts for periods `2..=N` corrected by the previous period's bias.
/// Periods that are not held keep a zero forecast.
pub fn simple_adjust(records: &[PeriodRecord]) -> Result<Vec<f64>> {
    if records.len() < 2 {
        return Err(Error::InsufficientData {
            what: "simple adjustment",
            needed: 2,
            got: records.len(),
        });
    }
    Ok(records
        .windows(2)
        .map(|w| if w[1].invested { w[1].nu_tilde - w[0].bias } else { 0.0 })
        .collect())
}

fn bias_series(records: &[PeriodRecord]) -> Vec<f64> {
    records.iter().map(|r| r.bias).collect()
}

/// Forecasts for periods `2..=N` corrected by the exponentially smoothed
/// bias, `ν̃_i − F_i` where `F_i` smooths `b_1..b_{i−1}`. With `α = 1` this
/// equals [`simple_adjust`].
pub fn es_adjust(records: &[PeriodRecord], config: &SmoothingConfig) -> Result<Vec<f64>> {
    if records.len() < 3 {
        return Err(Error::InsufficientData {
            what: "exponential-smoothing adjustment",
            needed: 3,
            got: records.len(),
        });
    }
    let smoothed = smooth(&bias_series(records), config)?;
    Ok(records[1..]
        .iter()
        .zip(&smoothed.forecasts[1..])
        .map(|(r, f)| if r.invested { r.nu_tilde - f } else { 0.0 })
        .collect())
}

/// Raw, simple-adjusted and smoothing-adjusted forecasts for the period
/// after the last record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextForecasts {
    pub raw: f64,
    pub simple: f64,
    pub es: f64,
    pub flag: ForecastFlag,
    pub alpha: f64,
}

pub fn next_forecasts(records: &[PeriodRecord], config: &PipelineConfig) -> Result<NextForecasts> {
    if records.len() < 3 {
        return Err(Error::InsufficientData {
            what: "holdout forecast",
            needed: 3,
            got: records.len(),
        });
    }
    let biases = bias_series(records);
    let alpha = if config.fit_alpha {
        fit_alpha(&biases, &default_alpha_grid())?.0
    } else {
        config.alpha
    };
    let smoothed = smooth(&biases, &SmoothingConfig::with_alpha(alpha)?)?;
    let last = records.last().expect("non-empty");
    let forecast = forward_forecast(last, config.period_length);
    let (simple, es) = if forecast.invested() {
        (forecast.nu_tilde - last.bias, forecast.nu_tilde - smoothed.next_forecast())
    } else {
        (0.0, 0.0)
    };
    Ok(NextForecasts { raw: forecast.nu_tilde, simple, es, flag: forecast.flag, alpha })
}

/// Holdout comparison of the three forecasts for one stock.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastReport {
    pub stock_id: String,
    pub holdout_nu_hat: f64,
    pub raw_conditional: f64,
    pub simple_adjusted: f64,
    pub es_adjusted: f64,
    pub sd_raw: f64,
    pub sd_simple: f64,
    pub sd_es: f64,
    pub alpha: f64,
    pub flag: ForecastFlag,
    pub records: Vec<PeriodRecord>,
}

/// Drift estimate over a holdout path; a single step is enough.
pub fn holdout_drift(holdout: &PricePath) -> f64 {
    log_returns(holdout).total() / holdout.horizon()
}

pub fn score_and_report(data: &StockDataset, holdout: &PricePath, config: &PipelineConfig) -> Result<ForecastReport> {
    let records = build_period_records(data, config)?;
    let next = next_forecasts(&records, config)?;
    let truth = holdout_drift(holdout);
    let sq = |f: f64| (f - truth) * (f - truth);
    Ok(ForecastReport {
        stock_id: data.stock_id.clone(),
        holdout_nu_hat: truth,
        raw_conditional: next.raw,
        simple_adjusted: next.simple,
        es_adjusted: next.es,
        sd_raw: sq(next.raw),
        sd_simple: sq(next.simple),
        sd_es: sq(next.es),
        alpha: next.alpha,
        flag: next.flag,
        records,
    })
}

/// Scores every stock (in parallel) and totals the squared deviations.
/// Rows are ordered by stock id.
pub fn run_portfolio(stocks: &[IngestedStock], config: &PipelineConfig) -> Result<PortfolioReport> {
    let mut rows = stocks
        .par_iter()
        .map(|s| score_and_report(&s.dataset, &s.holdout, config))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.stock_id.cmp(&b.stock_id));
    Ok(PortfolioReport::new(rows))
}
