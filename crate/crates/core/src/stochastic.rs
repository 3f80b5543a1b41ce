//! Geometric Brownian motion: parameters, exact simulation, log-returns and
//! the unconditional drift/variance estimators.
//!
//! Prices follow `dA = μ A dt + σ A dW`, so the log-price is a Brownian motion
//! with drift `ν = μ − σ²/2`. Time is measured in years throughout.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Drift and volatility of the price process.
///
/// `mu` is stored; the log-drift `nu` is always derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    mu: f64,
    sigma: f64,
}

impl GbmParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid(format!("drift must be finite, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!("volatility must be positive, got {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    /// Builds parameters from the log-drift `ν`.
    pub fn from_log_drift(nu: f64, sigma: f64) -> Result<Self> {
        Self::new(nu + 0.5 * sigma * sigma, sigma)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Log-drift `ν = μ − σ²/2`.
    pub fn nu(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }
}

/// Prices sampled on a uniform grid `t0, t0 + h, …, t0 + n·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    t0: f64,
    step_h: f64,
    prices: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PriceRow {
    date_index: u64,
    price: f64,
}

impl PricePath {
    pub fn new(t0: f64, step_h: f64, prices: Vec<f64>) -> Result<Self> {
        if !(step_h.is_finite() && step_h > 0.0) {
            return Err(Error::invalid(format!("step must be positive, got {step_h}")));
        }
        if prices.len() < 2 {
            return Err(Error::InsufficientData {
                what: "price path",
                needed: 2,
                got: prices.len(),
            });
        }
        if let Some((i, p)) = prices
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::invalid(format!(
                "price {i} is {p}; prices must be strictly positive"
            )));
        }
        Ok(Self { t0, step_h, prices })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn step_h(&self) -> f64 {
        self.step_h
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Number of steps `n` (one fewer than the number of prices).
    pub fn steps(&self) -> usize {
        self.prices.len() - 1
    }

    /// Length of the sampled interval, `n·h`.
    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.step_h
    }

    /// Writes `date_index,price` CSV. Prices use the shortest decimal
    /// representation that round-trips.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date_index", "price"])?;
        for (i, p) in self.prices.iter().enumerate() {
            w.write_record([i.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `date_index,price` CSV. Rows must be indexed `0, 1, 2, …`.
    pub fn read_csv<R: Read>(input: R, step_h: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut prices = Vec::new();
        for (expected, row) in r.deserialize::<PriceRow>().enumerate() {
            let row = row?;
            if row.date_index != expected as u64 {
                return Err(Error::invalid(format!(
                    "date_index {} out of sequence, expected {expected}",
                    row.date_index
                )));
            }
            prices.push(row.price);
        }
        Self::new(0.0, step_h, prices)
    }
}

/// Log-returns `r_i = ln A_i − ln A_{i−1}` of a price path.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    step_h: f64,
    returns: Vec<f64>,
    total: f64,
}

impl ReturnSeries {
    pub fn step_h(&self) -> f64 {
        self.step_h
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    /// Total log-return `Z_T − Z_0` over the path.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.returns.len() as f64 * self.step_h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    /// Annualized log-drift estimate `ν̂ = (z_T − z_0)/T`.
    pub nu_hat: f64,
    /// Annualized variance estimate with the `(n−1)·h` divisor.
    pub sigma2_hat: f64,
    pub n: usize,
    pub horizon: f64,
}

/// Simulates a price path with the exact log-normal update
/// `A_i = A_{i−1} · exp(ν h + σ √h ξ_i)`.
///
/// Draws `ξ_i` from stream 0 of `seed`, which is also path 0 of
/// [`simulate_terminal_log_returns`].
pub fn simulate_gbm(params: &GbmParams, a0: f64, horizon: f64, n: usize, seed: u64) -> Result<PricePath> {
    let mut rng = rng::stream(seed, 0);
    simulate_gbm_with_noise(params, a0, horizon, n, || rng::standard_normal(&mut rng))
}

/// Same as [`simulate_gbm`] with the standard normal draws supplied by the
/// caller.
pub fn simulate_gbm_with_noise<F>(
    params: &GbmParams,
    a0: f64,
    horizon: f64,
    n: usize,
    mut noise: F,
) -> Result<PricePath>
where
    F: FnMut() -> f64,
{
    if !(a0.is_finite() && a0 > 0.0) {
        return Err(Error::invalid(format!("initial price must be positive, got {a0}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    if n == 0 {
        return Err(Error::invalid("step count must be at least 1"));
    }
    let h = horizon / n as f64;
    let drift = params.nu() * h;
    let vol = params.sigma() * h.sqrt();
    let mut prices = Vec::with_capacity(n + 1);
    prices.push(a0);
    // Accumulate the log-price so long paths do not compound rounding in the
    // product.
    let mut z = 0.0;
    for _ in 0..n {
        z += drift + vol * noise();
        prices.push(a0 * z.exp());
    }
    PricePath::new(0.0, h, prices)
}

/// Terminal log-returns `Z_T − Z_0` of `paths` independent simulated paths.
/// Path `k` uses stream `k` of `seed`.
pub fn simulate_terminal_log_returns(
    params: &GbmParams,
    horizon: f64,
    n: usize,
    paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    if n == 0 {
        return Err(Error::invalid("step count must be at least 1"));
    }
    let h = horizon / n as f64;
    let drift = params.nu() * h;
    let vol = params.sigma() * h.sqrt();
    Ok((0..paths as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(seed, k);
            (0..n).fold(0.0, |z, _| z + drift + vol * rng::standard_normal(&mut rng))
        })
        .collect())
}

pub fn log_returns(path: &PricePath) -> ReturnSeries {
    let logs: Vec<f64> = path.prices.iter().map(|p| p.ln()).collect();
    let returns = logs.windows(2).map(|w| w[1] - w[0]).collect();
    ReturnSeries {
        step_h: path.step_h,
        returns,
        total: logs[logs.len() - 1] - logs[0],
    }
}

/// Unconditional estimates `ν̂ = (z_T − z_0)/T` and
/// `σ̂² = Σ(r_i − r̄)² / ((n−1)h)`.
pub fn estimate_unconditional(series: &ReturnSeries) -> Result<EstimateResult> {
    let n = series.returns.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "variance estimate",
            needed: 2,
            got: n,
        });
    }
    let horizon = series.horizon();
    let mean = series.returns.iter().sum::<f64>() / n as f64;
    let ss: f64 = series.returns.iter().map(|r| (r - mean) * (r - mean)).sum();
    Ok(EstimateResult {
        nu_hat: series.total / horizon,
        sigma2_hat: ss / ((n - 1) as f64 * series.step_h),
        n,
        horizon,
    })
}

/// Converts a per-step quantity to a per-year one.
pub fn annualize(value_per_step: f64, step_h: f64) -> Result<f64> {
    if !(step_h.is_finite() && step_h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {step_h}")));
    }
    Ok(value_per_step / step_h)
}
