//! Synthetic multi-stock portfolio with a persistent forecast bias.
//!
//! Each stock follows a GBM inside every period. While the stock is held,
//! the period's true drift is set to the conditional forecast minus an
//! AR(1) bias, so the realized forecast errors are autocorrelated in the way
//! the bias-correction step expects. Periods that are not held run at the
//! stock's base drift.
//!
//! The default bias level and spread (0.15 and 0.10) and the volatility
//! range are set so that raw holdout errors `ν̃ − ν̂` have about the mean
//! and spread seen in a ten-stock annual study. With much larger
//! volatilities the estimation noise in `ν̂` swamps the bias signal.

use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::Rng as _;

use super::{forward_forecast, CapmInputs, ForecastFlag, IngestedStock, Period, PeriodRecord, StockDataset};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::stochastic::{estimate_unconditional, log_returns, PricePath};

const MARKET_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub stocks: usize,
    /// Sample periods; one extra holdout period is always generated.
    pub periods: usize,
    pub days_per_period: usize,
    pub bias_phi: f64,
    pub bias_mean: f64,
    /// Stationary standard deviation of the injected bias.
    pub bias_sd: f64,
    pub nu_range: (f64, f64),
    pub sigma_range: (f64, f64),
    pub beta_range: (f64, f64),
    pub risk_free_range: (f64, f64),
    pub market_range: (f64, f64),
    pub initial_price: f64,
    pub base_year: i32,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            stocks: 10,
            periods: 10,
            days_per_period: 252,
            bias_phi: 0.9,
            bias_mean: 0.15,
            bias_sd: 0.10,
            nu_range: (0.10, 0.30),
            sigma_range: (0.05, 0.10),
            beta_range: (0.6, 1.4),
            risk_free_range: (0.02, 0.04),
            market_range: (0.06, 0.10),
            initial_price: 100.0,
            base_year: 2009,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.stocks == 0 || self.periods < 2 || self.days_per_period == 0 {
            return Err(Error::invalid("need at least one stock, two periods and one day per period"));
        }
        if self.bias_phi.is_nan() || self.bias_phi.abs() >= 1.0 || self.bias_sd.is_nan() || self.bias_sd < 0.0 {
            return Err(Error::invalid("bias process must be stationary with a non-negative spread"));
        }
        if !(self.sigma_range.0 > 0.0 && self.sigma_range.0 <= self.sigma_range.1) {
            return Err(Error::invalid("volatility range must be positive"));
        }
        Ok(())
    }

    fn step_h(&self) -> f64 {
        1.0 / self.days_per_period as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStock {
    pub stock_id: String,
    pub nu: f64,
    pub sigma: f64,
    pub beta: f64,
    /// `periods + 1` price paths; the last one is the holdout.
    pub paths: Vec<Vec<f64>>,
    /// Injected bias per period, zero where the stock was not held.
    pub injected_bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPortfolio {
    pub config: SyntheticConfig,
    /// `(risk_free, market_return_expectation)` per period.
    pub market: Vec<(f64, f64)>,
    pub stocks: Vec<SyntheticStock>,
}

fn uniform(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn gbm_segment(rng: &mut Rng, start: f64, nu: f64, sigma: f64, steps: usize, h: f64) -> Vec<f64> {
    let mut prices = Vec::with_capacity(steps + 1);
    prices.push(start);
    let (drift, scale) = (nu * h, sigma * h.sqrt());
    let mut z = start.ln();
    for _ in 0..steps {
        z += drift + scale * rng::standard_normal(rng);
        prices.push(z.exp());
    }
    prices
}

fn summarize(index: usize, label: i32, path: &PricePath, benchmark: f64) -> Result<PeriodRecord> {
    let series = log_returns(path);
    let est = estimate_unconditional(&series)?;
    Ok(PeriodRecord {
        period_index: index,
        label,
        nu_hat: est.nu_hat,
        sigma2_hat: est.sigma2_hat,
        realized_return: series.total(),
        benchmark_c: benchmark,
        beat_benchmark: series.total() > benchmark,
        invested: false,
        nu_tilde: 0.0,
        bias: 0.0,
        flag: ForecastFlag::NoHistory,
    })
}

fn generate_stock(
    config: &SyntheticConfig,
    market: &[(f64, f64)],
    index: usize,
    seed: u64,
) -> Result<SyntheticStock> {
    let mut rng = rng::stream(seed, index as u64);
    let nu = uniform(&mut rng, config.nu_range);
    let sigma = uniform(&mut rng, config.sigma_range);
    let beta = uniform(&mut rng, config.beta_range);
    let h = config.step_h();
    let innovation_sd = config.bias_sd * (1.0 - config.bias_phi * config.bias_phi).sqrt();
    let mut bias = config.bias_mean + config.bias_sd * rng::standard_normal(&mut rng);

    let mut paths = Vec::with_capacity(config.periods + 1);
    let mut injected = Vec::with_capacity(config.periods + 1);
    let mut previous: Option<PeriodRecord> = None;
    let mut start = config.initial_price;
    for (i, &(rf, erm)) in market.iter().enumerate() {
        let forecast = previous.as_ref().map(|r| forward_forecast(r, 1.0));
        let drift = match forecast {
            Some(f) if f.invested() => {
                injected.push(bias);
                f.nu_tilde - bias
            }
            _ => {
                injected.push(0.0);
                nu
            }
        };
        let prices = gbm_segment(&mut rng, start, drift, sigma, config.days_per_period, h);
        start = *prices.last().expect("non-empty");
        let path = PricePath::new(i as f64, h, prices.clone())?;
        let label = config.base_year + i as i32;
        previous = Some(summarize(i, label, &path, rf + beta * (erm - rf))?);
        paths.push(prices);
        bias = config.bias_mean
            + config.bias_phi * (bias - config.bias_mean)
            + innovation_sd * rng::standard_normal(&mut rng);
    }
    Ok(SyntheticStock {
        stock_id: format!("S{:02}", index + 1),
        nu,
        sigma,
        beta,
        paths,
        injected_bias: injected,
    })
}

/// Generates a portfolio; the same seed always yields the same prices.
pub fn generate(config: &SyntheticConfig, seed: u64) -> Result<SyntheticPortfolio> {
    config.validate()?;
    let mut market_rng = rng::stream(seed, MARKET_STREAM);
    let market: Vec<(f64, f64)> = (0..=config.periods)
        .map(|_| {
            let rf = uniform(&mut market_rng, config.risk_free_range);
            let erm = uniform(&mut market_rng, config.market_range);
            (rf, erm)
        })
        .collect();
    let stocks = (0..config.stocks)
        .map(|k| generate_stock(config, &market, k, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticPortfolio { config: *config, market, stocks })
}

/// `count` consecutive weekdays starting at the first weekday on or after
/// January 2 of `year`.
fn trading_days(year: i32, count: usize) -> Vec<NaiveDate> {
    let mut day = NaiveDate::from_ymd_opt(year, 1, 2).expect("valid date");
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(day);
        }
        day += Duration::days(1);
    }
    out
}

impl SyntheticPortfolio {
    fn label(&self, period: usize) -> i32 {
        self.config.base_year + period as i32
    }

    fn capm(&self, stock: &SyntheticStock, period: usize) -> CapmInputs {
        let (risk_free, market_return_expectation) = self.market[period];
        CapmInputs {
            beta: stock.beta,
            risk_free,
            market_return_expectation,
        }
    }

    /// The portfolio in the form produced by CSV ingestion, without the
    /// rounding a CSV round trip applies.
    pub fn ingested(&self) -> Result<Vec<IngestedStock>> {
        let h = self.config.step_h();
        self.stocks
            .iter()
            .map(|s| {
                let mut periods = s
                    .paths
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        Ok(Period {
                            label: self.label(i),
                            prices: PricePath::new(i as f64, h, p.clone())?,
                            capm: Some(self.capm(s, i)),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let holdout = periods.pop().expect("holdout period");
                Ok(IngestedStock {
                    dataset: StockDataset::new(s.stock_id.clone(), periods)?,
                    holdout: holdout.prices,
                    holdout_label: holdout.label,
                })
            })
            .collect()
    }

    /// `stock_id,date,close` rows; closes carry six decimals.
    pub fn write_prices_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["stock_id", "date", "close"])?;
        for s in &self.stocks {
            for (i, path) in s.paths.iter().enumerate() {
                for (date, close) in trading_days(self.label(i), path.len()).iter().zip(path) {
                    w.write_record([
                        s.stock_id.as_str(),
                        &date.format("%Y-%m-%d").to_string(),
                        &format!("{close:.6}"),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// CAPM inputs for every stock and sample period.
    pub fn write_capm_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["stock_id", "year", "beta", "risk_free", "market_return_expectation"])?;
        for s in &self.stocks {
            for i in 0..self.config.periods {
                let c = self.capm(s, i);
                w.write_record([
                    s.stock_id.clone(),
                    self.label(i).to_string(),
                    format!("{:.6}", c.beta),
                    format!("{:.6}", c.risk_free),
                    format!("{:.6}", c.market_return_expectation),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
