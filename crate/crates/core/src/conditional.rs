//! Drift expectations conditional on past performance.
//!
//! Over `[0, T]` the total log-return `R = Z_T − Z_0` is `N(νT, σ²T)` and the
//! drift estimator is `ν̂ = R/T`. Conditioning on `R > C` (or `R ≤ C`) gives a
//! truncated normal mean:
//!
//! ```text
//! d = (C − νT) / (σ√T)
//! E[ν̂ | R > C] = ν + (σ/√T) · φ(d) / (1 − Φ(d))
//! E[ν̂ | R ≤ C] = ν − (σ/√T) · φ(d) / Φ(d)
//! ```
//!
//! The difference from `ν` is the bias a performance-chasing trader carries
//! into the next period.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::significant;
use crate::normal;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Condition on `R > C`.
    Above,
    /// Condition on `R ≤ C`; ties land here.
    AtOrBelow,
}

impl Direction {
    /// Whether a realized total return satisfies the condition.
    #[inline]
    pub fn admits(self, total_return: f64, threshold: f64) -> bool {
        match self {
            Direction::Above => total_return > threshold,
            Direction::AtOrBelow => total_return <= threshold,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Above => "above",
            Direction::AtOrBelow => "at-or-below",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "above" => Ok(Direction::Above),
            "at-or-below" | "below" | "atorbelow" => Ok(Direction::AtOrBelow),
            other => Err(Error::invalid(format!(
                "unknown direction {other:?}, expected above or at-or-below"
            ))),
        }
    }
}

/// One conditional-expectation evaluation: `(ν, σ, T, C, direction)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalQuery {
    nu: f64,
    sigma: f64,
    horizon: f64,
    threshold: f64,
    direction: Direction,
}

impl ConditionalQuery {
    pub fn new(nu: f64, sigma: f64, horizon: f64, threshold: f64, direction: Direction) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::invalid(format!("log-drift must be finite, got {nu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!("volatility must be positive, got {sigma}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if threshold.is_nan() {
            return Err(Error::invalid("threshold is NaN"));
        }
        Ok(Self { nu, sigma, horizon, threshold, direction })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Standardized threshold `d = (C − νT)/(σ√T)`.
    pub fn mills_argument(&self) -> f64 {
        (self.threshold - self.nu * self.horizon) / (self.sigma * self.horizon.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalResult {
    pub expectation: f64,
    pub tail_probability: f64,
    /// `expectation − ν` (for [`conditional_mu`], `expectation − μ`).
    pub bias: f64,
    pub mills_argument: f64,
}

/// Probability of the conditioning event.
pub fn tail_probability(q: &ConditionalQuery) -> f64 {
    let d = q.mills_argument();
    match q.direction {
        Direction::Above => normal::sf(d),
        Direction::AtOrBelow => normal::cdf(d),
    }
}

/// `E[ν̂ | condition]` via the inverse Mills ratio.
///
/// Fails with [`Error::DegenerateCondition`] when the conditioning event lies
/// more than [`normal::DEGENERATE_CUTOFF`] standard deviations into the tail.
pub fn conditional_nu(q: &ConditionalQuery) -> Result<ConditionalResult> {
    let d = q.mills_argument();
    let scale = q.sigma / q.horizon.sqrt();
    let (shift, tail) = match q.direction {
        Direction::Above => {
            if d > normal::DEGENERATE_CUTOFF {
                return Err(degenerate(q, d));
            }
            (scale * normal::upper_mills(d), normal::sf(d))
        }
        Direction::AtOrBelow => {
            if d < -normal::DEGENERATE_CUTOFF {
                return Err(degenerate(q, d));
            }
            (-scale * normal::lower_mills(d), normal::cdf(d))
        }
    };
    let expectation = q.nu + shift;
    Ok(ConditionalResult {
        expectation,
        tail_probability: tail,
        bias: expectation - q.nu,
        mills_argument: d,
    })
}

fn degenerate(q: &ConditionalQuery, d: f64) -> Error {
    let op = match q.direction {
        Direction::Above => ">",
        Direction::AtOrBelow => "<=",
    };
    Error::DegenerateCondition(format!(
        "P(R_T {op} {}) underflows (d = {d:.3}, nu = {}, sigma = {}, T = {})",
        q.threshold, q.nu, q.sigma, q.horizon
    ))
}

/// `E[μ̂ | condition] = E[ν̂ | condition] + σ²/2`. The bias is unchanged.
pub fn conditional_mu(q: &ConditionalQuery) -> Result<ConditionalResult> {
    let r = conditional_nu(q)?;
    Ok(ConditionalResult {
        expectation: r.expectation + 0.5 * q.sigma * q.sigma,
        ..r
    })
}

/// Limit of the conditional expectation as `T → ∞`.
pub fn asymptotic_limit(nu: f64, direction: Direction) -> f64 {
    match direction {
        Direction::Above if nu > 0.0 => nu,
        Direction::AtOrBelow if nu < 0.0 => nu,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub retained: usize,
    pub paths: usize,
}

const MC_CHUNK: usize = 1 << 15;

/// Brute-force estimate of `E[ν̂ | condition]`: draws `R ~ N(νT, σ²T)`,
/// keeps the draws satisfying the condition and averages `R/T`.
///
/// Chunk `k` of `2^15` draws uses stream `k` of `seed`; results do not
/// depend on the thread count.
pub fn monte_carlo_conditional(q: &ConditionalQuery, paths: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if paths < 1000 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least 1000 paths, got {paths}"
        )));
    }
    let mean_r = q.nu * q.horizon;
    let sd_r = q.sigma * q.horizon.sqrt();
    let chunks = paths.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(seed, k as u64);
            let len = MC_CHUNK.min(paths - k * MC_CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                let r = mean_r + sd_r * rng::standard_normal(&mut rng);
                if q.direction.admits(r, q.threshold) {
                    m.push(r / q.horizon);
                }
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    if total.n == 0 {
        return Err(Error::DegenerateCondition(format!(
            "no simulated path satisfied R_T {} {}",
            if q.direction == Direction::Above { ">" } else { "<=" },
            q.threshold
        )));
    }
    let variance = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    Ok(MonteCarloEstimate {
        mean: total.mean,
        std_error: (variance / total.n as f64).sqrt(),
        retained: total.n,
        paths,
    })
}

/// Running count/mean/sum-of-squares with Chan's pairwise merge.
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + delta * b.n as f64 / n as f64,
            m2: a.m2 + b.m2 + delta * delta * (a.n as f64 * b.n as f64) / n as f64,
        }
    }
}

/// One `(μ, C)` cell of a conditional-expectation surface. `expectation` and
/// `bias` are `None` when the conditioning event is degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    pub mu: f64,
    pub threshold: f64,
    pub expectation: Option<f64>,
    pub bias: Option<f64>,
}

impl SurfaceCell {
    pub fn is_degenerate(&self) -> bool {
        self.expectation.is_none()
    }
}

/// Evaluates [`conditional_mu`] over the cartesian grid `mu_grid × c_grid`,
/// row-major in `mu`.
pub fn bias_surface(
    mu_grid: &[f64],
    c_grid: &[f64],
    sigma: f64,
    horizon: f64,
    direction: Direction,
) -> Result<Vec<SurfaceCell>> {
    if mu_grid.is_empty() || c_grid.is_empty() {
        return Err(Error::invalid("surface grids must be non-empty"));
    }
    let mut cells = Vec::with_capacity(mu_grid.len() * c_grid.len());
    for &mu in mu_grid {
        let nu = mu - 0.5 * sigma * sigma;
        for &c in c_grid {
            let q = ConditionalQuery::new(nu, sigma, horizon, c, direction)?;
            let cell = match conditional_mu(&q) {
                Ok(r) => SurfaceCell { mu, threshold: c, expectation: Some(r.expectation), bias: Some(r.bias) },
                Err(Error::DegenerateCondition(_)) => {
                    SurfaceCell { mu, threshold: c, expectation: None, bias: None }
                }
                Err(e) => return Err(e),
            };
            cells.push(cell);
        }
    }
    Ok(cells)
}

/// Writes `mu,C,expectation,bias,flag` CSV with 10 significant digits.
pub fn write_surface_csv<W: Write>(cells: &[SurfaceCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mu", "C", "expectation", "bias", "flag"])?;
    for c in cells {
        let opt = |v: Option<f64>| v.map(|x| significant(x, 10)).unwrap_or_default();
        w.write_record([
            significant(c.mu, 10),
            significant(c.threshold, 10),
            opt(c.expectation),
            opt(c.bias),
            if c.is_degenerate() { "degenerate".into() } else { "ok".into() },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
