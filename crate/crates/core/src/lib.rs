//! Conditional drift estimation for geometric Brownian motion.
//!
//! The crate models an asset price as a geometric Brownian motion, estimates
//! its drift and volatility from sampled prices, and measures how much a
//! trader who conditions on past performance over- or under-estimates the
//! drift. Biased forecasts can then be corrected with simple or
//! exponential-smoothing adjustments and scored against a holdout period.
//!
//! Modules map onto the workflow:
//!
//! * [`stochastic`] — price model, simulation and unconditional estimates.
//! * [`conditional`] — conditional expectations, tail probabilities, limits
//!   and the Monte Carlo oracle.
//! * [`smoothing`] — single exponential smoothing.
//! * [`diagnostics`] — ACF/PACF and the Ljung-Box portmanteau test.
//! * [`pipeline`] — per-stock yearly workflow from CSV ingestion to report.

pub mod conditional;
pub mod diagnostics;
mod error;
pub mod format;
pub mod normal;
pub mod pipeline;
pub mod rng;
pub mod smoothing;
pub mod stochastic;

pub use conditional::{
    asymptotic_limit, bias_surface, conditional_mu, conditional_nu, monte_carlo_conditional,
    tail_probability, ConditionalQuery, ConditionalResult, Direction, MonteCarloEstimate,
    SurfaceCell,
};
pub use diagnostics::{acf_pacf, ljung_box, AcfResult, LjungBoxResult};
pub use error::{Error, Result};
pub use pipeline::{
    build_period_records, capm_benchmark, es_adjust, score_and_report, simple_adjust,
    BenchmarkMode, ForecastReport, PeriodRecord, PipelineConfig, PortfolioReport, StockDataset,
};
pub use smoothing::{fit_alpha, smooth, weight_expansion, InitPolicy, SmoothedSeries, SmoothingConfig};
pub use stochastic::{
    annualize, estimate_unconditional, log_returns, simulate_gbm, EstimateResult, GbmParams,
    PricePath, ReturnSeries,
};
