//! Single exponential smoothing, `F_{t+1} = α·Y_t + (1 − α)·F_t`.

use crate::error::{Error, Result};

/// Smoothing factor used when none is fitted.
pub const DEFAULT_ALPHA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitPolicy {
    /// `F_1 = Y_1`.
    #[default]
    FirstObservation,
    /// `F_1` given explicitly.
    ProvidedValue(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConfig {
    alpha: f64,
    init: InitPolicy,
}

impl SmoothingConfig {
    pub fn new(alpha: f64, init: InitPolicy) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!(
                "smoothing factor must lie in [0, 1], got {alpha}"
            )));
        }
        if let InitPolicy::ProvidedValue(v) = init {
            if !v.is_finite() {
                return Err(Error::invalid(format!("initial forecast must be finite, got {v}")));
            }
        }
        Ok(Self { alpha, init })
    }

    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, InitPolicy::FirstObservation)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn init(&self) -> InitPolicy {
        self.init
    }
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            init: InitPolicy::FirstObservation,
        }
    }
}

/// Observations `Y_1..Y_t` with forecasts `F_1..F_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSeries {
    pub observations: Vec<f64>,
    pub forecasts: Vec<f64>,
    pub alpha: f64,
}

impl SmoothedSeries {
    /// One-step-ahead forecast `F_{t+1}`.
    pub fn next_forecast(&self) -> f64 {
        *self.forecasts.last().expect("forecasts are never empty")
    }

    /// Sum of squared one-step errors `Σ (Y_k − F_k)²`.
    pub fn sse(&self) -> f64 {
        self.observations
            .iter()
            .zip(&self.forecasts)
            .map(|(y, f)| (y - f) * (y - f))
            .sum()
    }
}

pub fn smooth(observations: &[f64], config: &SmoothingConfig) -> Result<SmoothedSeries> {
    let first = *observations.first().ok_or(Error::InsufficientData {
        what: "exponential smoothing",
        needed: 1,
        got: 0,
    })?;
    let alpha = config.alpha;
    let mut f = match config.init {
        InitPolicy::FirstObservation => first,
        InitPolicy::ProvidedValue(v) => v,
    };
    let mut forecasts = Vec::with_capacity(observations.len() + 1);
    forecasts.push(f);
    for &y in observations {
        f = alpha * y + (1.0 - alpha) * f;
        forecasts.push(f);
    }
    Ok(SmoothedSeries {
        observations: observations.to_vec(),
        forecasts,
        alpha,
    })
}

/// Weights expressing `F_{t+1}` as a dot product with
/// `(Y_t, Y_{t−1}, …, Y_1, F_1)`: `α(1−α)^k` for `k = 0..t`, then `(1−α)^t`.
pub fn weight_expansion(config: &SmoothingConfig, t: usize) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::InsufficientData {
            what: "weight expansion",
            needed: 1,
            got: 0,
        });
    }
    let alpha = config.alpha;
    let keep = 1.0 - alpha;
    let mut weights = Vec::with_capacity(t + 1);
    let mut decay = 1.0;
    for _ in 0..t {
        weights.push(alpha * decay);
        decay *= keep;
    }
    weights.push(decay);
    Ok(weights)
}

/// `0.05, 0.10, …, 0.95`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

/// Grid value of `α` minimizing the one-step SSE with `F_1 = Y_1`. Ties go
/// to the smallest `α`.
pub fn fit_alpha(observations: &[f64], grid: &[f64]) -> Result<(f64, f64)> {
    if observations.len() < 3 {
        return Err(Error::InsufficientData {
            what: "smoothing factor fit",
            needed: 3,
            got: observations.len(),
        });
    }
    if grid.is_empty() {
        return Err(Error::invalid("smoothing factor grid is empty"));
    }
    let mut best: Option<(f64, f64)> = None;
    for &alpha in grid {
        let sse = smooth(observations, &SmoothingConfig::with_alpha(alpha)?)?.sse();
        best = match best {
            Some((a, s)) if s < sse || (s == sse && a <= alpha) => Some((a, s)),
            _ => Some((alpha, sse)),
        };
    }
    Ok(best.expect("grid is non-empty"))
}
